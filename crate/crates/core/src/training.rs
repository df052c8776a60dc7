//! Fitting rating weights from simulated matchups.
//!
//! Pairs of random teams are played against each other by Monte-Carlo
//! simulation. The difference of their outcome distributions is the input and
//! the first team's empirical win fraction is the target; weights are fitted
//! by full-batch gradient descent on the mean absolute error of
//! `sigmoid(W · diff)`.
//!
//! The rating model has no intercept, so a matchup is played half the time
//! with each team moving first; otherwise the first-mover edge shows up as
//! unexplainable bias in the targets.

use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::colt::{sigmoid, ColtWeights, Provenance};
use crate::error::{Error, Result};
use crate::outcome::{OutcomeDistribution, NUM_OUTCOMES};
use crate::rng;
use crate::sim::{
    sample_dense_outcome_vector, sample_outcome_vector, simulate_competitive, SimOutcomeModel,
};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSample {
    pub diff: [f64; NUM_OUTCOMES],
    pub target: f64,
}

/// How random teams are drawn for the training matchups.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VectorScheme {
    /// [`sample_outcome_vector`]: 2..=10 active outcomes.
    Sparse,
    /// Dirichlet(`alpha`) over all outcomes.
    Dense { alpha: f64 },
}

impl VectorScheme {
    pub const DEFAULT: VectorScheme = VectorScheme::Dense { alpha: 0.5 };

    pub fn sample(&self, rng: &mut impl rand::Rng) -> OutcomeDistribution {
        match *self {
            VectorScheme::Sparse => sample_outcome_vector(rng),
            VectorScheme::Dense { alpha } => sample_dense_outcome_vector(rng, alpha),
        }
    }
}

impl std::str::FromStr for VectorScheme {
    type Err = Error;

    /// `sparse`, `dense` or `dense:<alpha>`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sparse" => Ok(VectorScheme::Sparse),
            "dense" => Ok(VectorScheme::DEFAULT),
            _ => {
                let alpha = s
                    .strip_prefix("dense:")
                    .and_then(|a| a.parse::<f64>().ok())
                    .filter(|a| a.is_finite() && *a > 0.0)
                    .ok_or_else(|| Error::Config(format!("unknown vector scheme {s:?}")))?;
                Ok(VectorScheme::Dense { alpha })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub scheme: VectorScheme,
    pub n_samples: usize,
    pub games_per_matchup: usize,
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub convergence_tol: f64,
    pub seed: u64,
}

impl TrainingConfig {
    /// 18000 matchups of 1000 games each.
    pub fn full() -> Self {
        TrainingConfig {
            n_samples: 18_000,
            games_per_matchup: 1_000,
            ..Self::desk()
        }
    }

    /// 3000 matchups of 300 games each.
    pub fn desk() -> Self {
        TrainingConfig {
            scheme: VectorScheme::DEFAULT,
            n_samples: 3_000,
            games_per_matchup: 300,
            learning_rate: 0.5,
            max_epochs: 50_000,
            convergence_tol: 1e-9,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 || self.games_per_matchup == 0 || self.max_epochs == 0 {
            return Err(Error::Config("sample, game and epoch counts must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.convergence_tol > 0.0) {
            return Err(Error::Config("learning rate and tolerance must be positive".into()));
        }
        Ok(())
    }
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self::desk()
    }
}

/// Win fraction of `x` over `games` games, `x` moving first in the first
/// half (rounded up) and second in the rest.
pub fn balanced_win_fraction(
    x: &SimOutcomeModel,
    y: &SimOutcomeModel,
    games: usize,
    rng: &mut impl rand::Rng,
) -> f64 {
    assert!(games >= 1, "games must be positive");
    let first = games.div_ceil(2);
    let second = games - first;
    let mut wins = simulate_competitive(x, y, first, rng) * first as f64;
    if second > 0 {
        wins += (1.0 - simulate_competitive(y, x, second, rng)) * second as f64;
    }
    wins.round() / games as f64
}

/// One matchup: two random teams, their difference, and the simulated win
/// fraction of the first.
pub fn build_sample(scheme: VectorScheme, seed: u64, index: u64, games: usize) -> TrainingSample {
    let mut rng = rng::stream(seed, &[index]);
    let x = scheme.sample(&mut rng);
    let y = scheme.sample(&mut rng);
    let target = balanced_win_fraction(
        &SimOutcomeModel::new(x),
        &SimOutcomeModel::new(y),
        games,
        &mut rng,
    );
    TrainingSample {
        diff: x.diff(&y),
        target,
    }
}

/// Generate `cfg.n_samples` matchups in parallel. Every sample draws from its
/// own stream, so the result does not depend on the thread count.
pub fn build_dataset(cfg: &TrainingConfig) -> Result<Vec<TrainingSample>> {
    cfg.validate()?;
    Ok((0..cfg.n_samples as u64)
        .into_par_iter()
        .map(|i| build_sample(cfg.scheme, cfg.seed, i, cfg.games_per_matchup))
        .collect())
}

/// Split off the last tenth of the samples as a holdout set.
pub fn split_holdout(data: &[TrainingSample]) -> (&[TrainingSample], &[TrainingSample]) {
    let holdout = data.len() / 10;
    data.split_at(data.len() - holdout)
}

pub fn predict(w: &[f64; NUM_OUTCOMES], diff: &[f64; NUM_OUTCOMES]) -> f64 {
    sigmoid(w.iter().zip(diff).map(|(a, b)| a * b).sum())
}

/// Mean absolute error of the sigmoid predictions.
pub fn l1_loss(w: &[f64; NUM_OUTCOMES], data: &[TrainingSample]) -> f64 {
    data.iter()
        .map(|s| (predict(w, &s.diff) - s.target).abs())
        .sum::<f64>()
        / data.len() as f64
}

/// Subgradient of [`l1_loss`]; a sample with zero residual contributes 0.
pub fn l1_gradient(w: &[f64; NUM_OUTCOMES], data: &[TrainingSample]) -> [f64; NUM_OUTCOMES] {
    let mut g = [0.0; NUM_OUTCOMES];
    for s in data {
        let p = predict(w, &s.diff);
        let r = p - s.target;
        if r == 0.0 {
            continue;
        }
        let scale = r.signum() * p * (1.0 - p);
        for (gi, di) in g.iter_mut().zip(s.diff.iter()) {
            *gi += scale * di;
        }
    }
    let n = data.len() as f64;
    g.iter_mut().for_each(|x| *x /= n);
    g
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub weights: ColtWeights,
    pub final_loss: f64,
    pub epochs: usize,
    pub converged: bool,
}

/// Full-batch gradient descent from zero weights. A step that raises the
/// loss is rejected and the learning rate halved; training stops once an
/// accepted step improves the loss by less than the tolerance.
pub fn fit(data: &[TrainingSample], cfg: &TrainingConfig) -> Result<FitReport> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    cfg.validate()?;
    let mut w = [0.0; NUM_OUTCOMES];
    let mut loss = l1_loss(&w, data);
    let mut lr = cfg.learning_rate;
    let mut converged = false;
    let mut epochs = 0;

    while epochs < cfg.max_epochs {
        epochs += 1;
        let g = l1_gradient(&w, data);
        if g.iter().all(|x| *x == 0.0) {
            converged = true;
            break;
        }
        let mut candidate = w;
        for (c, gi) in candidate.iter_mut().zip(g.iter()) {
            *c -= lr * gi;
        }
        let next = l1_loss(&candidate, data);
        if next > loss {
            lr *= 0.5;
            if lr < 1e-12 {
                converged = true;
                break;
            }
            continue;
        }
        let improvement = loss - next;
        w = candidate;
        loss = next;
        if improvement < cfg.convergence_tol {
            converged = true;
            break;
        }
    }

    Ok(FitReport {
        weights: ColtWeights::new(w, Provenance::Retrained)?,
        final_loss: loss,
        epochs,
        converged,
    })
}

pub fn train_weights(data: &[TrainingSample], cfg: &TrainingConfig) -> Result<ColtWeights> {
    fit(data, cfg).map(|r| r.weights)
}

/// Coefficient of determination of `sigmoid(W · diff)` against the targets.
pub fn evaluate_r2(w: &ColtWeights, data: &[TrainingSample]) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let preds: Vec<f64> = data
        .iter()
        .map(|s| predict(w.weights(), &s.diff))
        .collect();
    let targets: Vec<f64> = data.iter().map(|s| s.target).collect();
    r_squared(&preds, &targets)
}

pub fn r_squared(preds: &[f64], targets: &[f64]) -> Result<f64> {
    if targets.is_empty() {
        return Err(Error::EmptyData);
    }
    let mean = targets.iter().sum::<f64>() / targets.len() as f64;
    let ss_tot: f64 = targets.iter().map(|t| (t - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::ConstantTargets);
    }
    let ss_res: f64 = preds
        .iter()
        .zip(targets)
        .map(|(p, t)| (t - p).powi(2))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Dataset dump: 36 tab-separated signed floats, a tab, then the target.
pub fn write_dataset(mut w: impl Write, data: &[TrainingSample]) -> std::io::Result<()> {
    for s in data {
        let cols: Vec<String> = s.diff.iter().map(f64::to_string).collect();
        writeln!(w, "{}\t{}", cols.join("\t"), s.target)?;
    }
    Ok(())
}

pub fn read_dataset(r: impl BufRead, source: &str) -> Result<Vec<TrainingSample>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split('\t')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::parse(source, i + 1, e.to_string()))?;
        if vals.len() != NUM_OUTCOMES + 1 {
            return Err(Error::parse(
                source,
                i + 1,
                format!("expected {} columns, got {}", NUM_OUTCOMES + 1, vals.len()),
            ));
        }
        let mut diff = [0.0; NUM_OUTCOMES];
        diff.copy_from_slice(&vals[..NUM_OUTCOMES]);
        out.push(TrainingSample {
            diff,
            target: vals[NUM_OUTCOMES],
        });
    }
    Ok(out)
}
