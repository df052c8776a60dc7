//! Adaptive ensemble: a UCB bandit over expert agents, scored by the CoLT
//! rating of each expert's observed turn outcomes.
//!
//! Each turn one expert is chosen by
//! `rate(C_i / n_i) + c * sqrt(ln N / n_i)` (unplayed experts score +inf,
//! ties broken uniformly at random), plays the turn, and the turn outcome is
//! credited to it, and optionally to every expert that would have played
//! the identical action.

use rand::Rng;

use crate::colt::ColtWeights;
use crate::error::{Error, Result};
use crate::outcome::{OutcomeCounts, TurnOutcome};
use crate::rng::SimRng;

pub const DEFAULT_EXPLORATION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Spymaster,
    Guesser,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpertHandle {
    pub id: usize,
    pub role: Role,
    pub code: String,
}

/// How the ensemble picks its expert each turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Selection {
    #[default]
    Ucb,
    /// Uniformly random expert every turn (a baseline).
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub experts: Vec<String>,
    pub c: f64,
    pub shared_credit: bool,
    /// Codes dropped from `experts`, e.g. the teammate's own model.
    pub exclude: Vec<String>,
    pub selection: Selection,
}

impl EnsembleConfig {
    pub fn new(experts: impl IntoIterator<Item = impl Into<String>>) -> Self {
        EnsembleConfig {
            experts: experts.into_iter().map(Into::into).collect(),
            c: DEFAULT_EXPLORATION,
            shared_credit: true,
            exclude: Vec::new(),
            selection: Selection::Ucb,
        }
    }

    /// The expert codes after exclusion, in configured order.
    pub fn active_experts(&self) -> Result<Vec<String>> {
        let mut seen = std::collections::HashSet::new();
        for e in &self.experts {
            if !seen.insert(e) {
                return Err(Error::Config(format!("expert {e:?} listed twice")));
            }
        }
        let out: Vec<String> = self
            .experts
            .iter()
            .filter(|e| !self.exclude.contains(e))
            .cloned()
            .collect();
        if out.is_empty() {
            return Err(Error::Config("ensemble has no experts after exclusion".into()));
        }
        Ok(out)
    }

    pub fn handles(&self, role: Role) -> Result<Vec<ExpertHandle>> {
        Ok(self
            .active_experts()?
            .into_iter()
            .enumerate()
            .map(|(id, code)| ExpertHandle { id, role, code })
            .collect())
    }
}

/// The expert played this turn, its action, and the other experts that
/// proposed the same action.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision<A> {
    pub expert: usize,
    pub action: A,
    pub same_action: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct EnsembleState {
    counts: Vec<OutcomeCounts>,
    pulls: Vec<u64>,
    total: u64,
    c: f64,
    weights: ColtWeights,
    shared_credit: bool,
    selection: Selection,
    rng: SimRng,
}

impl EnsembleState {
    pub fn new(
        n_experts: usize,
        weights: ColtWeights,
        c: f64,
        shared_credit: bool,
        selection: Selection,
        rng: SimRng,
    ) -> Result<Self> {
        if n_experts == 0 {
            return Err(Error::Config("ensemble needs at least one expert".into()));
        }
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::Config(format!("exploration constant {c} must be >= 0")));
        }
        Ok(EnsembleState {
            counts: vec![OutcomeCounts::new(); n_experts],
            pulls: vec![0; n_experts],
            total: 0,
            c,
            weights,
            shared_credit,
            selection,
            rng,
        })
    }

    pub fn from_config(cfg: &EnsembleConfig, weights: ColtWeights, rng: SimRng) -> Result<Self> {
        let n = cfg.active_experts()?.len();
        Self::new(n, weights, cfg.c, cfg.shared_credit, cfg.selection, rng)
    }

    pub fn len(&self) -> usize {
        self.pulls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulls.is_empty()
    }

    pub fn counts(&self, i: usize) -> Result<&OutcomeCounts> {
        self.counts.get(i).ok_or(Error::UnknownExpert(i))
    }

    pub fn pulls(&self, i: usize) -> Result<u64> {
        self.pulls.get(i).copied().ok_or(Error::UnknownExpert(i))
    }

    /// Turns played so far.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn shared_credit(&self) -> bool {
        self.shared_credit
    }

    /// Empirical rating of expert `i`, if it has been credited at all.
    pub fn empirical_colt(&self, i: usize) -> Result<Option<f64>> {
        let n = self.pulls(i)?;
        if n == 0 {
            return Ok(None);
        }
        let dist = self.counts[i].to_distribution()?;
        Ok(Some(self.weights.rate(&dist)))
    }

    pub fn ucb_score(&self, i: usize) -> Result<f64> {
        let n = self.pulls(i)?;
        match self.empirical_colt(i)? {
            None => Ok(f64::INFINITY),
            Some(colt) => {
                let bonus = (self.total as f64).ln() / n as f64;
                Ok(colt + self.c * bonus.max(0.0).sqrt())
            }
        }
    }

    pub fn select_expert(&mut self) -> usize {
        match self.selection {
            Selection::Uniform => self.rng.random_range(0..self.len()),
            Selection::Ucb => {
                let scores: Vec<f64> = (0..self.len())
                    .map(|i| self.ucb_score(i).expect("index in range"))
                    .collect();
                let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let tied: Vec<usize> = (0..self.len()).filter(|&i| scores[i] == best).collect();
                tied[self.rng.random_range(0..tied.len())]
            }
        }
    }

    /// Credit `outcome` to `chosen` and, with shared credit on, to every
    /// expert in `same_action`. The turn counter advances once.
    pub fn record_outcome(
        &mut self,
        chosen: usize,
        outcome: TurnOutcome,
        same_action: &[usize],
    ) -> Result<()> {
        self.pulls(chosen)?;
        for (k, &j) in same_action.iter().enumerate() {
            self.pulls(j)?;
            if j == chosen || same_action[..k].contains(&j) {
                return Err(Error::InvalidInput(format!(
                    "expert {j} repeated in shared-credit list"
                )));
            }
        }
        self.credit(chosen, outcome);
        if self.shared_credit {
            for &j in same_action {
                self.credit(j, outcome);
            }
        }
        self.total += 1;
        Ok(())
    }

    fn credit(&mut self, i: usize, outcome: TurnOutcome) {
        self.counts[i].record(outcome);
        self.pulls[i] += 1;
    }

    /// Choose an expert and get its action from `propose`. When shared credit
    /// is on, every other expert is asked too, and those proposing an equal
    /// action are listed in the decision.
    pub fn act<A: PartialEq>(
        &mut self,
        mut propose: impl FnMut(usize) -> Result<A>,
    ) -> Result<Decision<A>> {
        let expert = self.select_expert();
        let action = propose(expert)?;
        let mut same_action = Vec::new();
        if self.shared_credit {
            for j in (0..self.len()).filter(|&j| j != expert) {
                if propose(j)? == action {
                    same_action.push(j);
                }
            }
        }
        Ok(Decision {
            expert,
            action,
            same_action,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn state(m: usize, c: f64, shared: bool) -> EnsembleState {
        EnsembleState::new(m, ColtWeights::published(), c, shared, Selection::Ucb, stream(1, &[])).unwrap()
    }

    fn o(label: &str) -> TurnOutcome {
        label.parse().unwrap()
    }

    #[test]
    fn hand_computed_score() {
        let mut s = state(2, 0.5, false);
        s.record_outcome(0, o("9000"), &[]).unwrap();
        s.record_outcome(1, o("1000"), &[]).unwrap();
        let expect = 1.528 + 0.5 * 2f64.ln().sqrt();
        assert!((s.ucb_score(0).unwrap() - expect).abs() < 1e-9);
        assert!((expect - 1.944277305578849).abs() < 1e-12);
    }

    #[test]
    fn unplayed_expert_scores_infinity() {
        let mut s = state(3, 0.5, false);
        assert_eq!(s.ucb_score(2).unwrap(), f64::INFINITY);
        s.record_outcome(0, o("2010"), &[]).unwrap();
        assert_eq!(s.ucb_score(1).unwrap(), f64::INFINITY);
        assert_eq!(s.counts(0).unwrap()[o("2010").index()], 1);
        assert_eq!((s.pulls(0).unwrap(), s.total()), (1, 1));
        assert!(matches!(s.ucb_score(3), Err(Error::UnknownExpert(3))));
    }

    #[test]
    fn zero_exploration_is_pure_rating() {
        let mut s = state(1, 0.0, false);
        s.record_outcome(0, o("3000"), &[]).unwrap();
        s.record_outcome(0, o("0010"), &[]).unwrap();
        let w = ColtWeights::published();
        let expect = 0.5 * (w.weights()[o("3000").index().get()] + w.weights()[o("0010").index().get()]);
        assert!((s.ucb_score(0).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn shared_credit_counts_turn_once() {
        let mut s = state(5, 0.5, true);
        s.record_outcome(2, o("1000"), &[1, 4]).unwrap();
        for i in [1, 2, 4] {
            assert_eq!(s.pulls(i).unwrap(), 1);
        }
        assert_eq!(s.total(), 1);
        assert!(s.record_outcome(2, o("1000"), &[2]).is_err());
        assert!(s.record_outcome(2, o("1000"), &[1, 1]).is_err());
        assert!(s.record_outcome(9, o("1000"), &[]).is_err());
        assert_eq!(s.total(), 1);
    }

    #[test]
    fn config_exclusion() {
        let mut cfg = EnsembleConfig::new(["w", "g5", "cn"]);
        cfg.exclude = vec!["g5".into()];
        assert_eq!(cfg.active_experts().unwrap(), vec!["w", "cn"]);
        cfg.exclude = vec!["w".into(), "g5".into(), "cn".into()];
        assert!(cfg.active_experts().is_err());
        assert!(EnsembleConfig::new(["w", "w"]).active_experts().is_err());
    }
}
