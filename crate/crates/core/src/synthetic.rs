//! Synthetic embedding models for tests, demos and desk-scale experiments.
//!
//! Words come in two pools: board words (`card000`, ...) that can be dealt
//! onto boards, and clue-only words (`clue000`, ...). A *family* of models
//! shares one set of concept vectors and perturbs it per member, so members
//! agree on most associations and disagree on some, like embeddings trained on
//! different corpora.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::embeddings::EmbeddingModel;
use crate::error::{Error, Result};
use crate::game::BOARD_SIZE;
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub board_words: usize,
    /// Clue-only words placed near each board word.
    pub related_per_board_word: usize,
    /// Clue-only words placed at random.
    pub free_words: usize,
    pub dim: usize,
    /// Neighbor-list length.
    pub k: usize,
    /// Spread of related words around their board word, relative to the
    /// unit-variance concept vectors.
    pub relatedness: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            board_words: 40,
            related_per_board_word: 2,
            free_words: 40,
            dim: 16,
            k: 30,
            relatedness: 0.5,
        }
    }
}

impl SyntheticSpec {
    fn validate(&self) -> Result<()> {
        if self.board_words < BOARD_SIZE {
            return Err(Error::Config(format!(
                "need at least {BOARD_SIZE} board words, got {}",
                self.board_words
            )));
        }
        if self.dim == 0 || self.k == 0 {
            return Err(Error::Config("dim and k must be positive".into()));
        }
        if !(self.relatedness.is_finite() && self.relatedness >= 0.0) {
            return Err(Error::Config("relatedness must be non-negative".into()));
        }
        Ok(())
    }
}

pub fn board_word(i: usize) -> String {
    format!("card{i:03}")
}

fn clue_word(i: usize) -> String {
    format!("clue{i:03}")
}

/// The words boards are dealt from.
pub fn board_vocabulary(spec: &SyntheticSpec) -> Vec<String> {
    (0..spec.board_words).map(board_word).collect()
}

fn gaussian(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

/// Shared concept vectors for every word of the vocabulary.
fn concepts(spec: &SyntheticSpec, seed: u64) -> Vec<(String, Vec<f64>)> {
    let mut rng = rng::stream(seed, &[0]);
    let mut out = Vec::new();
    let mut clue = 0;
    for b in 0..spec.board_words {
        let base = gaussian(&mut rng, spec.dim);
        for _ in 0..spec.related_per_board_word {
            let v = base
                .iter()
                .map(|x| x + spec.relatedness * rng.sample::<f64, _>(StandardNormal))
                .collect();
            out.push((clue_word(clue), v));
            clue += 1;
        }
        out.push((board_word(b), base));
    }
    for _ in 0..spec.free_words {
        out.push((clue_word(clue), gaussian(&mut rng, spec.dim)));
        clue += 1;
    }
    out
}

/// One model with independent Gaussian structure.
pub fn random_model(name: &str, spec: &SyntheticSpec, seed: u64) -> Result<EmbeddingModel> {
    spec.validate()?;
    EmbeddingModel::from_vectors(name, concepts(spec, seed), spec.k)
}

/// Models sharing concept vectors; member `i` adds independent noise of scale
/// `divergence` to every word. Divergence 0 yields identical models.
pub fn model_family(
    names: &[&str],
    spec: &SyntheticSpec,
    divergence: f64,
    seed: u64,
) -> Result<Vec<EmbeddingModel>> {
    spec.validate()?;
    if !(divergence.is_finite() && divergence >= 0.0) {
        return Err(Error::Config("divergence must be non-negative".into()));
    }
    let base = concepts(spec, seed);
    names
        .iter()
        .enumerate()
        .map(|(m, name)| {
            let mut rng = rng::stream(seed, &[1, m as u64]);
            let entries = base
                .iter()
                .map(|(w, v)| {
                    let v = v
                        .iter()
                        .map(|x| x + divergence * rng.sample::<f64, _>(StandardNormal))
                        .collect();
                    (w.clone(), v)
                })
                .collect();
            EmbeddingModel::from_vectors(*name, entries, spec.k)
        })
        .collect()
}
