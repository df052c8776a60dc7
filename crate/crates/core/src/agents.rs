//! Embedding-driven base agents.
//!
//! The spymaster considers every word in the neighbor lists of its team's
//! unrevealed words, drops the associations that are not strictly closer to
//! the clue than the nearest bad card, and gives the clue that keeps the most
//! associations (then the smallest mean distance, then the first word). The
//! guesser picks the `n` unrevealed words closest to the clue.
//!
//! A spymaster and guesser sharing one model therefore never turn a bad card:
//! every kept association lies inside the bad-card radius, so the guesser's
//! `n` nearest words are all good.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::embeddings::EmbeddingModel;
use crate::error::{Error, Result};
use crate::game::{Clue, GameState, GuessDecision};

/// The active team's unrevealed words, and every other unrevealed word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpymasterView {
    pub good: Vec<String>,
    pub bad: Vec<String>,
}

impl SpymasterView {
    pub fn from_state(state: &GameState) -> Self {
        let own = state.active_team().category();
        let (good, bad): (Vec<_>, Vec<_>) = state
            .board()
            .iter()
            .filter(|c| !c.revealed)
            .partition(|c| c.category == own);
        SpymasterView {
            good: good.into_iter().map(|c| c.word.clone()).collect(),
            bad: bad.into_iter().map(|c| c.word.clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateClue {
    pub word: String,
    /// Good words within the bad-card radius, nearest first.
    pub associated_good: Vec<(String, f64)>,
    pub min_bad_distance: f64,
}

impl CandidateClue {
    pub fn mean_distance(&self) -> f64 {
        self.associated_good.iter().map(|(_, d)| d).sum::<f64>() / self.associated_good.len() as f64
    }
}

/// All candidate clues with at least one surviving association, in
/// preference order (most associations, smallest mean distance, word).
pub fn candidate_clues(
    model: &EmbeddingModel,
    view: &SpymasterView,
    state: &GameState,
) -> Result<Vec<CandidateClue>> {
    // candidate -> good words whose neighbor list it came from
    let mut sources: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for g in &view.good {
        for (n, _) in model.neighbors(g)? {
            sources.entry(n).or_default().push(g);
        }
    }

    let mut out = Vec::new();
    for (word, goods) in sources {
        if !state.legal_clue(&Clue::new(word, 1)) {
            continue;
        }
        let min_bad = view
            .bad
            .iter()
            .map(|b| model.distance(word, b))
            .try_fold(f64::INFINITY, |m, d| d.map(|d| m.min(d)))?;
        let mut assoc = goods
            .into_iter()
            .map(|g| Ok((g.to_string(), model.distance(word, g)?)))
            .collect::<Result<Vec<_>>>()?;
        assoc.retain(|(_, d)| *d < min_bad);
        if assoc.is_empty() {
            continue;
        }
        assoc.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        out.push(CandidateClue {
            word: word.to_string(),
            associated_good: assoc,
            min_bad_distance: min_bad,
        });
    }
    out.sort_by(|a, b| {
        b.associated_good
            .len()
            .cmp(&a.associated_good.len())
            .then_with(|| a.mean_distance().total_cmp(&b.mean_distance()))
            .then_with(|| a.word.cmp(&b.word))
    });
    Ok(out)
}

/// The base spymaster's clue. Falls back to the nearest legal neighbor of the
/// alphabetically first good word, for one, when no candidate survives.
pub fn give_clue(model: &EmbeddingModel, view: &SpymasterView, state: &GameState) -> Result<Clue> {
    if view.good.is_empty() {
        return Err(Error::InvalidInput("spymaster has no good words left".into()));
    }
    if let Some(best) = candidate_clues(model, view, state)?.into_iter().next() {
        let n = best.associated_good.len() as u8;
        return Ok(Clue::new(best.word, n));
    }
    let first = view.good.iter().min().expect("non-empty");
    let fallback = model
        .neighbors(first)?
        .map(|(w, _)| Clue::new(w, 1))
        .find(|c| state.legal_clue(c))
        .ok_or(Error::NoCandidate)?;
    log::debug!("no clue survives the bad-word filter; falling back to {:?}", fallback.word);
    Ok(fallback)
}

/// The base guesser's full guess list for `clue`: the `n` nearest unrevealed
/// words, or every unrevealed word in distance order when `n` is zero.
pub fn make_guesses(model: &EmbeddingModel, clue: &Clue, unrevealed: &[&str]) -> Result<Vec<String>> {
    if unrevealed.is_empty() {
        return Err(Error::InvalidInput("no unrevealed words".into()));
    }
    if !model.contains(&clue.word) {
        let first = unrevealed.iter().min().expect("non-empty");
        log::warn!(
            "clue {:?} not in vocabulary of {}; guessing {first:?}",
            clue.word,
            model.name()
        );
        return Ok(vec![first.to_string()]);
    }
    let k = match clue.number {
        0 => unrevealed.len(),
        n => (n as usize).min(unrevealed.len()),
    };
    Ok(model
        .nearest_board_words(&clue.word, unrevealed, k)?
        .into_iter()
        .map(str::to_string)
        .collect())
}

/// Turn a planned guess list into the engine's guess callback: guesses in
/// order, then stops.
pub fn scripted_guesser(plan: Vec<String>) -> impl FnMut(&GameState) -> GuessDecision {
    let mut plan = plan.into_iter();
    move |_| plan.next().map_or(GuessDecision::Stop, GuessDecision::Guess)
}

/// Plan the base guesser's guesses for the current board.
pub fn guess_plan(model: &EmbeddingModel, clue: &Clue, state: &GameState) -> Result<Vec<String>> {
    let words = state.unrevealed_words();
    let refs: Vec<&str> = words.iter().map(String::as_str).collect();
    make_guesses(model, clue, &refs)
}

/// A named agent: the models it uses as spymaster and as guesser. Most
/// agents use one model for both; concatenated models may differ per role.
#[derive(Debug, Clone)]
pub struct AgentModels {
    pub spymaster: Arc<EmbeddingModel>,
    pub guesser: Arc<EmbeddingModel>,
}

/// Agents keyed by short code (`w`, `g5`, `cn`, ...). Files loaded once and
/// shared between codes that name the same path.
#[derive(Debug, Default, Clone)]
pub struct AgentRegistry {
    agents: BTreeMap<String, AgentModels>,
    files: HashMap<PathBuf, Arc<EmbeddingModel>>,
}

impl AgentRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, code: impl Into<String>, spymaster: Arc<EmbeddingModel>, guesser: Arc<EmbeddingModel>) {
        self.agents
            .insert(code.into(), AgentModels { spymaster, guesser });
    }

    /// Register `code` with one model used in both roles.
    pub fn insert_model(&mut self, code: impl Into<String>, model: Arc<EmbeddingModel>) {
        self.insert(code, model.clone(), model);
    }

    /// Register `code` from neighbor files, one per role.
    pub fn load(&mut self, code: impl Into<String>, spymaster: &Path, guesser: &Path) -> Result<()> {
        let s = self.file(spymaster)?;
        let g = self.file(guesser)?;
        self.insert(code, s, g);
        Ok(())
    }

    fn file(&mut self, path: &Path) -> Result<Arc<EmbeddingModel>> {
        if let Some(m) = self.files.get(path) {
            return Ok(m.clone());
        }
        let m = Arc::new(EmbeddingModel::load(path)?);
        self.files.insert(path.to_path_buf(), m.clone());
        Ok(m)
    }

    pub fn get(&self, code: &str) -> Result<&AgentModels> {
        self.agents
            .get(code)
            .ok_or_else(|| Error::Config(format!("unknown agent code {code:?}")))
    }

    pub fn codes(&self) -> impl Iterator<Item = &str> {
        self.agents.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }
}
