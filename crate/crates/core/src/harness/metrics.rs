use std::collections::BTreeMap;

use crate::colt::ColtWeights;
use crate::error::{Error, Result};
use crate::outcome::OutcomeCounts;

use super::{mean, GameLog, PairingResult};

/// CoLT rating, win rate, and mean rounds to win (absent without wins).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricTriple {
    pub colt: f64,
    pub win_rate: f64,
    pub win_time: Option<f64>,
}

/// Metrics over a set of games: CoLT of the pooled turn outcomes, fraction
/// of games won, mean turns over won games.
pub fn compute_metrics(logs: &[GameLog], weights: &ColtWeights) -> Result<MetricTriple> {
    if logs.is_empty() {
        return Err(Error::EmptyData);
    }
    let counts: OutcomeCounts = logs.iter().flat_map(|g| g.outcomes.iter()).collect();
    let colt = weights.rate(&counts.to_distribution()?);
    let won: Vec<f64> = logs
        .iter()
        .filter(|g| g.won)
        .map(|g| g.rounds() as f64)
        .collect();
    Ok(MetricTriple {
        colt,
        win_rate: won.len() as f64 / logs.len() as f64,
        win_time: (!won.is_empty()).then(|| mean(&won)),
    })
}

/// CoLT over games `t..` of each block, averaged across repetitions.
pub fn colt_excluding_prefix(result: &PairingResult, t: usize, weights: &ColtWeights) -> Result<f64> {
    if t >= result.games_per_block {
        return Err(Error::InvalidInput(format!(
            "cannot drop {t} of {} games",
            result.games_per_block
        )));
    }
    let per_rep = (0..result.repetitions)
        .map(|r| compute_metrics(&result.repetition(r)[t..], weights).map(|m| m.colt))
        .collect::<Result<Vec<_>>>()?;
    Ok(mean(&per_rep))
}

/// Mean CoLT of the `i`-th game of a block, for every `i`.
pub fn colt_time_series(result: &PairingResult, weights: &ColtWeights) -> Result<Vec<f64>> {
    if result.repetitions == 0 {
        return Err(Error::EmptyData);
    }
    (0..result.games_per_block)
        .map(|i| {
            let per_rep = (0..result.repetitions)
                .map(|r| {
                    let g = &result.repetition(r)[i];
                    compute_metrics(std::slice::from_ref(g), weights).map(|m| m.colt)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(mean(&per_rep))
        })
        .collect()
}

/// Half-width of the normal-approximation 95% interval for the mean:
/// `1.96 * s / sqrt(n)` with the sample standard deviation `s`.
pub fn confidence_interval(samples: &[f64]) -> Result<f64> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::InvalidInput("need at least two samples".into()));
    }
    let m = mean(samples);
    let var = samples.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok(1.96 * var.sqrt() / (n as f64).sqrt())
}

/// A metric for every (spymaster, guesser) pair of static agents.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairMatrix {
    pub spymasters: Vec<String>,
    pub guessers: Vec<String>,
    pub values: BTreeMap<(String, String), f64>,
}

impl PairMatrix {
    pub fn new(spymasters: Vec<String>, guessers: Vec<String>) -> Self {
        PairMatrix {
            spymasters,
            guessers,
            values: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, spymaster: &str, guesser: &str, value: f64) {
        self.values
            .insert((spymaster.to_string(), guesser.to_string()), value);
    }

    pub fn get(&self, spymaster: &str, guesser: &str) -> Option<f64> {
        self.values
            .get(&(spymaster.to_string(), guesser.to_string()))
            .copied()
    }

    fn check_complete(&self) -> Result<()> {
        let missing: Vec<String> = self
            .spymasters
            .iter()
            .flat_map(|s| self.guessers.iter().map(move |g| (s, g)))
            .filter(|(s, g)| self.get(s, g).is_none())
            .map(|(s, g)| format!("{s}/{g}"))
            .collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::IncompleteMatrix(missing.join(", ")))
        }
    }
}

/// The best static agent per role, with its mean over teammates.
#[derive(Debug, Clone, PartialEq)]
pub struct BestAverage {
    pub spymaster: (String, f64),
    pub guesser: (String, f64),
}

/// Per role, the agent with the highest mean over a uniform choice of
/// teammate. Without the partner, an agent's own code is left out of its
/// teammates. Ties go to the alphabetically first code.
pub fn best_average_baseline(m: &PairMatrix, without_partner: bool) -> Result<BestAverage> {
    m.check_complete()?;
    let best = |own: &[String], others: &[String], value: &dyn Fn(&str, &str) -> f64| {
        let mut scored = own
            .iter()
            .map(|a| {
                let vals: Vec<f64> = others
                    .iter()
                    .filter(|b| !(without_partner && *b == a))
                    .map(|b| value(a, b))
                    .collect();
                if vals.is_empty() {
                    return Err(Error::Config(format!("{a} has no teammates left")));
                }
                Ok((a.clone(), mean(&vals)))
            })
            .collect::<Result<Vec<_>>>()?;
        scored.sort_by(|x, y| y.1.total_cmp(&x.1).then_with(|| x.0.cmp(&y.0)));
        scored
            .into_iter()
            .next()
            .ok_or_else(|| Error::Config("empty result matrix".into()))
    };
    Ok(BestAverage {
        spymaster: best(&m.spymasters, &m.guessers, &|s, g| m.get(s, g).expect("complete"))?,
        guesser: best(&m.guessers, &m.spymasters, &|g, s| m.get(s, g).expect("complete"))?,
    })
}
