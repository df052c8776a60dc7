//! Word vectors with precomputed nearest-neighbor lists.
//!
//! File format (UTF-8, one record per line):
//!
//! ```text
//! #model <name> <dim> <vocab_size> <K>
//! V <word> <dim floats>
//! N <word> <neighbor:distance> ...
//! ```
//!
//! Every word has one `V` and one `N` line. A neighbor list holds the
//! `min(K, vocab_size - 1)` nearest other words by cosine distance, ascending.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Allowed gap between a stored neighbor distance and the recomputed one.
pub const DISTANCE_TOLERANCE: f64 = 1e-6;

pub const DEFAULT_NEIGHBORS: usize = 300;

/// `1 - cos(u, v)`, clamped into `[0, 2]` against rounding.
pub fn cosine_distance(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch(u.len(), v.len()));
    }
    let nu = norm(u);
    let nv = norm(v);
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(distance_with_norms(u, nu, v, nv))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn distance_with_norms(u: &[f64], nu: f64, v: &[f64], nv: f64) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    (1.0 - dot / (nu * nv)).clamp(0.0, 2.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    name: String,
    dim: usize,
    k: usize,
    /// Sorted vocabulary.
    words: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Vec<f64>,
    norms: Vec<f64>,
    neighbors: Vec<Vec<(usize, f64)>>,
}

impl EmbeddingModel {
    /// Build a model from raw vectors, computing exact top-`k` neighbor
    /// lists by brute force. Equal distances are ordered by word.
    pub fn from_vectors(
        name: impl Into<String>,
        entries: Vec<(String, Vec<f64>)>,
        k: usize,
    ) -> Result<Self> {
        let name = name.into();
        check_token(&name, "model name")?;
        let mut entries = entries;
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        let dim = entries.first().map(|e| e.1.len()).ok_or(Error::EmptyData)?;
        if dim == 0 {
            return Err(Error::InvalidInput("vectors must have at least one dimension".into()));
        }
        let mut index = HashMap::with_capacity(entries.len());
        let mut words = Vec::with_capacity(entries.len());
        let mut vectors = Vec::with_capacity(entries.len() * dim);
        let mut norms = Vec::with_capacity(entries.len());
        for (i, (w, v)) in entries.into_iter().enumerate() {
            check_token(&w, "word")?;
            if v.len() != dim {
                return Err(Error::DimensionMismatch(dim, v.len()));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput(format!("non-finite vector for {w:?}")));
            }
            let n = norm(&v);
            if n == 0.0 {
                return Err(Error::ZeroVector);
            }
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::InvalidInput(format!("duplicate word {w:?}")));
            }
            words.push(w);
            vectors.extend(v);
            norms.push(n);
        }
        let mut model = EmbeddingModel {
            name,
            dim,
            k,
            words,
            index,
            vectors,
            norms,
            neighbors: Vec::new(),
        };
        let keep = model.list_len();
        model.neighbors = (0..model.words.len())
            .into_par_iter()
            .map(|i| {
                let mut all: Vec<(usize, f64)> = (0..model.words.len())
                    .filter(|&j| j != i)
                    .map(|j| (j, model.dist_idx(i, j)))
                    .collect();
                // words are sorted, so index order is lexicographic order
                all.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
                all.truncate(keep);
                all
            })
            .collect();
        Ok(model)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Neighbor-list length declared in the header.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn vector(&self, word: &str) -> Option<&[f64]> {
        self.index.get(word).map(|&i| self.vec_idx(i))
    }

    /// Stored neighbors of `word`, nearest first.
    pub fn neighbors(&self, word: &str) -> Result<impl Iterator<Item = (&str, f64)> + '_> {
        let i = self.idx(word)?;
        Ok(self.neighbors[i]
            .iter()
            .map(|&(j, d)| (self.words[j].as_str(), d)))
    }

    /// Cosine distance between two vocabulary words.
    pub fn distance(&self, a: &str, b: &str) -> Result<f64> {
        Ok(self.dist_idx(self.idx(a)?, self.idx(b)?))
    }

    /// All `candidates` ordered by distance to `word`, ties by word.
    pub fn rank<'a>(&self, word: &str, candidates: &[&'a str]) -> Result<Vec<(&'a str, f64)>> {
        let w = self.idx(word)?;
        let mut out = candidates
            .iter()
            .map(|c| Ok((*c, self.dist_idx(w, self.idx(c)?))))
            .collect::<Result<Vec<_>>>()?;
        out.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
        Ok(out)
    }

    /// The `k` candidates closest to `clue`, nearest first.
    pub fn nearest_board_words<'a>(
        &self,
        clue: &str,
        candidates: &[&'a str],
        k: usize,
    ) -> Result<Vec<&'a str>> {
        if k > candidates.len() {
            return Err(Error::InvalidInput(format!(
                "asked for {k} of {} candidates",
                candidates.len()
            )));
        }
        let mut ranked = self.rank(clue, candidates)?;
        ranked.truncate(k);
        Ok(ranked.into_iter().map(|(w, _)| w).collect())
    }

    fn list_len(&self) -> usize {
        self.k.min(self.words.len().saturating_sub(1))
    }

    fn idx(&self, word: &str) -> Result<usize> {
        self.index
            .get(word)
            .copied()
            .ok_or_else(|| Error::OutOfVocabulary(word.to_string()))
    }

    fn vec_idx(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    fn dist_idx(&self, i: usize, j: usize) -> f64 {
        distance_with_norms(self.vec_idx(i), self.norms[i], self.vec_idx(j), self.norms[j])
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parse and fully validate a neighbor file.
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let perr = |line: usize, msg: String| Error::parse(source, line, msg);
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

        let (hline, header) = lines
            .by_ref()
            .find(|(_, l)| !l.trim().is_empty())
            .ok_or_else(|| perr(1, "missing header".into()))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 5 || h[0] != "#model" {
            return Err(perr(hline, "expected `#model <name> <dim> <vocab_size> <K>`".into()));
        }
        let num = |s: &str, what: &str| {
            s.parse::<usize>()
                .map_err(|_| perr(hline, format!("bad {what} {s:?}")))
        };
        let name = h[1].to_string();
        let dim = num(h[2], "dim")?;
        let vocab_size = num(h[3], "vocab size")?;
        let k = num(h[4], "K")?;
        if dim == 0 {
            return Err(perr(hline, "dim must be positive".into()));
        }

        #[derive(Default)]
        struct Pending {
            vector: Option<Vec<f64>>,
            neighbors: Option<(usize, Vec<(String, f64)>)>,
        }
        let mut pending: HashMap<String, Pending> = HashMap::with_capacity(vocab_size);

        for (ln, line) in lines {
            let mut parts = line.split_whitespace();
            let Some(tag) = parts.next() else { continue };
            let word = parts
                .next()
                .ok_or_else(|| perr(ln, "missing word".into()))?;
            match tag {
                "V" => {
                    let v = parts
                        .map(|x| x.parse::<f64>().ok().filter(|f| f.is_finite()))
                        .collect::<Option<Vec<f64>>>()
                        .ok_or_else(|| perr(ln, format!("bad float in vector of {word:?}")))?;
                    if v.len() != dim {
                        return Err(perr(
                            ln,
                            format!("vector of {word:?} has {} values, expected {dim}", v.len()),
                        ));
                    }
                    if v.iter().all(|x| *x == 0.0) {
                        return Err(perr(ln, format!("zero vector for {word:?}")));
                    }
                    let entry = pending.entry(word.to_string()).or_default();
                    if entry.vector.replace(v).is_some() {
                        return Err(perr(ln, format!("duplicate vector for {word:?}")));
                    }
                }
                "N" => {
                    let list = parts
                        .map(|tok| {
                            let (w, d) = tok.rsplit_once(':')?;
                            let d = d.parse::<f64>().ok()?;
                            (!w.is_empty()).then(|| (w.to_string(), d))
                        })
                        .collect::<Option<Vec<_>>>()
                        .ok_or_else(|| perr(ln, format!("bad neighbor entry for {word:?}")))?;
                    let entry = pending.entry(word.to_string()).or_default();
                    if entry.neighbors.replace((ln, list)).is_some() {
                        return Err(perr(ln, format!("duplicate neighbor line for {word:?}")));
                    }
                }
                other => return Err(perr(ln, format!("unknown record type {other:?}"))),
            }
        }

        let last = text.lines().count().max(1);
        if pending.len() != vocab_size {
            return Err(perr(
                last,
                format!("header declares {vocab_size} words, found {}", pending.len()),
            ));
        }
        // Sorted order, so that index order is lexicographic order.
        let mut pending: Vec<(String, Pending)> = pending.into_iter().collect();
        pending.sort_by(|a, b| a.0.cmp(&b.0));
        let mut sorted_words = Vec::with_capacity(pending.len());
        let mut vectors = Vec::with_capacity(pending.len() * dim);
        let mut norms = Vec::with_capacity(pending.len());
        let mut sorted_raw = Vec::with_capacity(pending.len());
        for (word, p) in pending {
            let v = p
                .vector
                .ok_or_else(|| perr(last, format!("no vector line for {word:?}")))?;
            let nl = p
                .neighbors
                .ok_or_else(|| perr(last, format!("no neighbor line for {word:?}")))?;
            norms.push(norm(&v));
            vectors.extend(v);
            sorted_words.push(word);
            sorted_raw.push(nl);
        }
        let index: HashMap<String, usize> = sorted_words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();

        let mut model = EmbeddingModel {
            name,
            dim,
            k,
            words: sorted_words,
            index,
            vectors,
            norms,
            neighbors: Vec::new(),
        };
        let expected = model.list_len();
        let mut neighbors = Vec::with_capacity(model.words.len());
        for (i, (ln, list)) in sorted_raw.into_iter().enumerate() {
            let word = &model.words[i];
            if list.len() != expected {
                return Err(perr(
                    ln,
                    format!("{word:?} has {} neighbors, expected {expected}", list.len()),
                ));
            }
            let mut resolved = Vec::with_capacity(list.len());
            let mut prev = f64::NEG_INFINITY;
            for (nw, d) in list {
                let j = *model
                    .index
                    .get(&nw)
                    .ok_or_else(|| perr(ln, format!("neighbor {nw:?} of {word:?} not in vocabulary")))?;
                if j == i {
                    return Err(perr(ln, format!("{word:?} lists itself as a neighbor")));
                }
                if !(0.0..=2.0).contains(&d) {
                    return Err(perr(ln, format!("distance {d} to {nw:?} outside [0, 2]")));
                }
                if d < prev {
                    return Err(perr(ln, format!("neighbors of {word:?} not sorted by distance")));
                }
                let actual = model.dist_idx(i, j);
                if (actual - d).abs() > DISTANCE_TOLERANCE {
                    return Err(perr(
                        ln,
                        format!("stored distance {d} from {word:?} to {nw:?}, vectors give {actual}"),
                    ));
                }
                prev = d;
                resolved.push((j, d));
            }
            neighbors.push(resolved);
        }
        model.neighbors = neighbors;
        Ok(model)
    }

    /// Write in the neighbor-file format, sorted by word, floats in shortest
    /// round-trip form.
    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(
            w,
            "#model {} {} {} {}",
            self.name,
            self.dim,
            self.words.len(),
            self.k
        )?;
        for (i, word) in self.words.iter().enumerate() {
            write!(w, "V {word}")?;
            for x in self.vec_idx(i) {
                write!(w, " {x}")?;
            }
            writeln!(w)?;
            write!(w, "N {word}")?;
            for &(j, d) in &self.neighbors[i] {
                write!(w, " {}:{d}", self.words[j])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut buf = Vec::new();
        self.write_to(&mut buf).map_err(|e| Error::io(path, e))?;
        fs::write(path, buf).map_err(|e| Error::io(path, e))
    }
}

fn check_token(s: &str, what: &str) -> Result<()> {
    if s.is_empty() || s.chars().any(char::is_whitespace) {
        return Err(Error::InvalidInput(format!("{what} {s:?} must be a non-empty token")));
    }
    Ok(())
}
