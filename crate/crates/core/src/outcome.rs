//! The 36 legal single-turn outcomes and the count/distribution vectors
//! built over them.
//!
//! Canonical order: team flips ascending, and within each flip count the
//! adverse card in the order none, opponent, bystander, assassin. The two
//! infeasible families (zero flips with no adverse card, nine flips with an
//! adverse card) are skipped, so index 0 is `0100` and index 35 is `9000`.

use std::fmt;
use std::ops::Index;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of legal turn outcomes.
pub const NUM_OUTCOMES: usize = 36;

/// Most own-team cards any team can flip in one turn.
pub const MAX_TEAM_FLIPS: u8 = 9;

/// The turn-ending card revealed at the end of a turn, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Adverse {
    Opponent,
    Bystander,
    Assassin,
}

impl Adverse {
    pub const ALL: [Adverse; 3] = [Adverse::Opponent, Adverse::Bystander, Adverse::Assassin];

    fn slot(adverse: Option<Adverse>) -> usize {
        match adverse {
            None => 0,
            Some(Adverse::Opponent) => 1,
            Some(Adverse::Bystander) => 2,
            Some(Adverse::Assassin) => 3,
        }
    }
}

/// Classified result of one turn: own cards flipped, then at most one
/// adverse card.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TurnOutcome {
    team_flips: u8,
    adverse: Option<Adverse>,
}

impl TryFrom<String> for TurnOutcome {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<TurnOutcome> for String {
    fn from(o: TurnOutcome) -> String {
        o.label()
    }
}

impl TurnOutcome {
    pub fn new(team_flips: u8, adverse: Option<Adverse>) -> Result<Self> {
        if team_flips > MAX_TEAM_FLIPS {
            return Err(Error::InvalidOutcome(format!(
                "{team_flips} team flips exceeds {MAX_TEAM_FLIPS}"
            )));
        }
        if team_flips == 0 && adverse.is_none() {
            return Err(Error::InvalidOutcome(
                "at least one card must be guessed per turn".into(),
            ));
        }
        if team_flips == MAX_TEAM_FLIPS && adverse.is_some() {
            return Err(Error::InvalidOutcome(
                "nine team flips ends the game before an adverse card".into(),
            ));
        }
        Ok(TurnOutcome {
            team_flips,
            adverse,
        })
    }

    pub fn team_flips(self) -> u8 {
        self.team_flips
    }

    pub fn adverse(self) -> Option<Adverse> {
        self.adverse
    }

    pub fn index(self) -> OutcomeIndex {
        let slot = Adverse::slot(self.adverse);
        let idx = match self.team_flips {
            0 => slot - 1,
            MAX_TEAM_FLIPS => NUM_OUTCOMES - 1,
            t => 3 + (t as usize - 1) * 4 + slot,
        };
        OutcomeIndex(idx as u8)
    }

    /// Four-digit label `t o b a`, e.g. `2010`.
    pub fn label(self) -> String {
        let flag = |a: Adverse| u8::from(self.adverse == Some(a));
        format!(
            "{}{}{}{}",
            self.team_flips,
            flag(Adverse::Opponent),
            flag(Adverse::Bystander),
            flag(Adverse::Assassin)
        )
    }

    /// True when the outcome revealed an opponent, bystander or assassin card.
    pub fn is_bad(self) -> bool {
        self.adverse.is_some()
    }
}

impl fmt::Display for TurnOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for TurnOutcome {
    type Err = Error;

    fn from_str(label: &str) -> Result<Self> {
        let bytes = label.as_bytes();
        if bytes.len() != 4 || !bytes.iter().all(u8::is_ascii_digit) {
            return Err(Error::InvalidOutcome(format!(
                "label {label:?} is not four digits"
            )));
        }
        let digit = |i: usize| bytes[i] - b'0';
        let mut adverse = None;
        for (pos, kind) in (1..4).zip(Adverse::ALL) {
            match digit(pos) {
                0 => {}
                1 if adverse.is_none() => adverse = Some(kind),
                1 => {
                    return Err(Error::InvalidOutcome(format!(
                        "label {label:?} has more than one adverse card"
                    )))
                }
                _ => {
                    return Err(Error::InvalidOutcome(format!(
                        "label {label:?}: adverse flags must be 0 or 1"
                    )))
                }
            }
        }
        TurnOutcome::new(digit(0), adverse)
            .map_err(|e| Error::InvalidOutcome(format!("label {label:?}: {e}")))
    }
}

/// Position of an outcome in the canonical 36-slot ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OutcomeIndex(u8);

impl OutcomeIndex {
    pub fn new(i: usize) -> Result<Self> {
        if i < NUM_OUTCOMES {
            Ok(OutcomeIndex(i as u8))
        } else {
            Err(Error::InvalidOutcome(format!("index {i} out of range")))
        }
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }

    pub fn outcome(self) -> TurnOutcome {
        ALL_OUTCOMES[self.get()]
    }

    pub fn label(self) -> String {
        self.outcome().label()
    }

    pub fn all() -> impl Iterator<Item = OutcomeIndex> {
        (0..NUM_OUTCOMES as u8).map(OutcomeIndex)
    }
}

/// Parse a four-digit label into its canonical index.
pub fn outcome_index(label: &str) -> Result<OutcomeIndex> {
    label.parse::<TurnOutcome>().map(TurnOutcome::index)
}

/// Every legal outcome, in canonical order.
pub static ALL_OUTCOMES: [TurnOutcome; NUM_OUTCOMES] = build_all();

const fn build_all() -> [TurnOutcome; NUM_OUTCOMES] {
    const ADV: [Option<Adverse>; 4] = [
        None,
        Some(Adverse::Opponent),
        Some(Adverse::Bystander),
        Some(Adverse::Assassin),
    ];
    let mut out = [TurnOutcome {
        team_flips: 0,
        adverse: None,
    }; NUM_OUTCOMES];
    let mut n = 0;
    let mut t = 0u8;
    while t <= MAX_TEAM_FLIPS {
        let mut a = 0;
        while a < 4 {
            let feasible = !(t == 0 && a == 0) && !(t == MAX_TEAM_FLIPS && a != 0);
            if feasible {
                out[n] = TurnOutcome {
                    team_flips: t,
                    adverse: ADV[a],
                };
                n += 1;
            }
            a += 1;
        }
        t += 1;
    }
    out
}

/// Per-outcome tallies (`C_i` in the ensemble).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutcomeCounts {
    counts: [u64; NUM_OUTCOMES],
}

impl Default for OutcomeCounts {
    fn default() -> Self {
        OutcomeCounts {
            counts: [0; NUM_OUTCOMES],
        }
    }
}

impl OutcomeCounts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_array(counts: [u64; NUM_OUTCOMES]) -> Self {
        OutcomeCounts { counts }
    }

    pub fn record(&mut self, outcome: TurnOutcome) {
        self.counts[outcome.index().get()] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn as_array(&self) -> &[u64; NUM_OUTCOMES] {
        &self.counts
    }

    pub fn merge(&mut self, other: &OutcomeCounts) {
        for (a, b) in self.counts.iter_mut().zip(other.counts.iter()) {
            *a += b;
        }
    }

    pub fn to_distribution(&self) -> Result<OutcomeDistribution> {
        counts_to_distribution(self)
    }
}

impl Index<OutcomeIndex> for OutcomeCounts {
    type Output = u64;

    fn index(&self, i: OutcomeIndex) -> &u64 {
        &self.counts[i.get()]
    }
}

impl<'a> FromIterator<&'a TurnOutcome> for OutcomeCounts {
    fn from_iter<I: IntoIterator<Item = &'a TurnOutcome>>(iter: I) -> Self {
        let mut c = OutcomeCounts::new();
        for o in iter {
            c.record(*o);
        }
        c
    }
}

/// Normalize counts into frequencies. Empty counts are an error; callers
/// treat an unplayed expert separately.
pub fn counts_to_distribution(c: &OutcomeCounts) -> Result<OutcomeDistribution> {
    let n = c.total();
    if n == 0 {
        return Err(Error::EmptyCounts);
    }
    let mut probs = [0.0; NUM_OUTCOMES];
    for (p, &k) in probs.iter_mut().zip(c.counts.iter()) {
        *p = k as f64 / n as f64;
    }
    Ok(OutcomeDistribution { probs })
}

/// A probability distribution over the 36 outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct OutcomeDistribution {
    probs: [f64; NUM_OUTCOMES],
}

const SUM_TOLERANCE: f64 = 1e-9;

impl OutcomeDistribution {
    pub fn new(probs: [f64; NUM_OUTCOMES]) -> Result<Self> {
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidInput(
                "distribution entries must be finite and non-negative".into(),
            ));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidInput(format!(
                "distribution sums to {sum}, expected 1"
            )));
        }
        Ok(OutcomeDistribution { probs })
    }

    pub fn one_hot(outcome: TurnOutcome) -> Self {
        let mut probs = [0.0; NUM_OUTCOMES];
        probs[outcome.index().get()] = 1.0;
        OutcomeDistribution { probs }
    }

    pub fn uniform() -> Self {
        OutcomeDistribution {
            probs: [1.0 / NUM_OUTCOMES as f64; NUM_OUTCOMES],
        }
    }

    /// Build from `(label, weight)` pairs; weights are normalized.
    pub fn from_labels(pairs: &[(&str, f64)]) -> Result<Self> {
        let mut probs = [0.0; NUM_OUTCOMES];
        for (label, w) in pairs {
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "weight for {label} must be finite and non-negative"
                )));
            }
            probs[outcome_index(label)?.get()] += w;
        }
        let total: f64 = probs.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidInput("distribution has no mass".into()));
        }
        probs.iter_mut().for_each(|p| *p /= total);
        Self::new(probs)
    }

    pub fn probs(&self) -> &[f64; NUM_OUTCOMES] {
        &self.probs
    }

    /// Element-wise difference, used as a training input.
    pub fn diff(&self, other: &OutcomeDistribution) -> [f64; NUM_OUTCOMES] {
        let mut d = [0.0; NUM_OUTCOMES];
        for i in 0..NUM_OUTCOMES {
            d[i] = self.probs[i] - other.probs[i];
        }
        d
    }

    /// Convex combination `a * self + (1 - a) * other`.
    pub fn mix(&self, other: &OutcomeDistribution, a: f64) -> Result<Self> {
        let mut probs = [0.0; NUM_OUTCOMES];
        for i in 0..NUM_OUTCOMES {
            probs[i] = a * self.probs[i] + (1.0 - a) * other.probs[i];
        }
        Self::new(probs)
    }
}

impl Index<OutcomeIndex> for OutcomeDistribution {
    type Output = f64;

    fn index(&self, i: OutcomeIndex) -> &f64 {
        &self.probs[i.get()]
    }
}

impl TryFrom<Vec<f64>> for OutcomeDistribution {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        let probs: [f64; NUM_OUTCOMES] = v.try_into().map_err(|v: Vec<f64>| {
            Error::InvalidInput(format!("expected {NUM_OUTCOMES} entries, got {}", v.len()))
        })?;
        Self::new(probs)
    }
}

impl From<OutcomeDistribution> for Vec<f64> {
    fn from(d: OutcomeDistribution) -> Vec<f64> {
        d.probs.to_vec()
    }
}
