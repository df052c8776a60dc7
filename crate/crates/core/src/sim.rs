//! Engine-free Monte-Carlo games driven by outcome distributions.
//!
//! A team is modelled as a distribution over the 36 turn outcomes. Each turn
//! an outcome is sampled, restricted to what the remaining cards allow, and
//! applied to per-category tallies.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};

use crate::outcome::{
    Adverse, OutcomeDistribution, TurnOutcome, ALL_OUTCOMES, NUM_OUTCOMES,
};
use crate::game::{BYSTANDER_CARDS, FIRST_TEAM_CARDS, SECOND_TEAM_CARDS};

/// A stochastic team: samples its turn outcomes from a fixed distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOutcomeModel {
    dist: OutcomeDistribution,
}

impl SimOutcomeModel {
    pub fn new(dist: OutcomeDistribution) -> Self {
        SimOutcomeModel { dist }
    }

    pub fn distribution(&self) -> &OutcomeDistribution {
        &self.dist
    }

    pub fn sample_turn(&self, ctx: TurnContext, rng: &mut impl Rng) -> TurnOutcome {
        sample_turn(&self.dist, ctx, rng)
    }
}

impl From<OutcomeDistribution> for SimOutcomeModel {
    fn from(dist: OutcomeDistribution) -> Self {
        SimOutcomeModel::new(dist)
    }
}

/// Draw a random team: a sparsity level `s` in 2..=10, `s` distinct outcome
/// slots, and flat-Dirichlet mass over those slots.
pub fn sample_outcome_vector(rng: &mut impl Rng) -> OutcomeDistribution {
    let s = rng.random_range(2..=10);
    let slots = rand::seq::index::sample(rng, NUM_OUTCOMES, s);
    let mut probs = [0.0; NUM_OUTCOMES];
    let mut total = 0.0;
    for i in slots.iter() {
        let g: f64 = rng.sample(Exp1);
        probs[i] = g;
        total += g;
    }
    if total <= 0.0 {
        // all gamma draws underflowed; vanishingly rare
        probs.iter_mut().for_each(|p| *p = 0.0);
        for i in slots.iter() {
            probs[i] = 1.0;
        }
        total = s as f64;
    }
    probs.iter_mut().for_each(|p| *p /= total);
    OutcomeDistribution::new(probs).expect("normalized draw is a distribution")
}

/// Draw a random team with symmetric Dirichlet(`alpha`) mass over all 36
/// outcomes. Small `alpha` gives lumpy vectors with a few dominant outcomes.
pub fn sample_dense_outcome_vector(rng: &mut impl Rng, alpha: f64) -> OutcomeDistribution {
    let gamma = Gamma::new(alpha, 1.0).expect("alpha must be positive and finite");
    let mut probs = [0.0; NUM_OUTCOMES];
    probs.iter_mut().for_each(|p| *p = gamma.sample(rng));
    let total: f64 = probs.iter().sum();
    if total <= 0.0 {
        return OutcomeDistribution::uniform();
    }
    probs.iter_mut().for_each(|p| *p /= total);
    OutcomeDistribution::new(probs).expect("normalized draw is a distribution")
}

/// Cards still hidden, seen from the acting team.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TurnContext {
    pub own: u8,
    pub opponent: u8,
    pub bystanders: u8,
}

impl TurnContext {
    pub fn feasible(&self, o: TurnOutcome) -> bool {
        o.team_flips() <= self.own
            && match o.adverse() {
                Some(Adverse::Opponent) => self.opponent > 0,
                Some(Adverse::Bystander) => self.bystanders > 0,
                _ => true,
            }
    }

    /// Clearing the last own card wins before any adverse card is turned.
    fn classify(&self, o: TurnOutcome) -> TurnOutcome {
        if o.team_flips() == self.own && o.adverse().is_some() {
            TurnOutcome::new(self.own, None).expect("own > 0 during play")
        } else {
            o
        }
    }

    /// Nearest feasible outcome to an infeasible one.
    fn project(&self, o: TurnOutcome) -> TurnOutcome {
        let t = o.team_flips().min(self.own);
        if t == self.own {
            return TurnOutcome::new(t, None).expect("own > 0 during play");
        }
        let adverse = match o.adverse() {
            Some(Adverse::Bystander) if self.bystanders == 0 => Some(Adverse::Opponent),
            Some(Adverse::Opponent) if self.opponent == 0 => Some(if self.bystanders > 0 {
                Adverse::Bystander
            } else {
                Adverse::Assassin
            }),
            a => a,
        };
        TurnOutcome::new(t, adverse).expect("projected outcome is legal")
    }
}

/// Sample one turn outcome from `dist`, zeroing infeasible outcomes and
/// renormalizing. When no feasible outcome carries mass, every feasible
/// outcome ties at zero; the tie goes to the projection of the most likely
/// outcome onto the feasible set.
pub fn sample_turn(dist: &OutcomeDistribution, ctx: TurnContext, rng: &mut impl Rng) -> TurnOutcome {
    let probs = dist.probs();
    let mass: f64 = ALL_OUTCOMES
        .iter()
        .zip(probs.iter())
        .filter(|(o, _)| ctx.feasible(**o))
        .map(|(_, p)| p)
        .sum();

    let picked = if mass > 0.0 {
        let mut u = rng.random::<f64>() * mass;
        let mut last = None;
        let mut chosen = None;
        for (o, &p) in ALL_OUTCOMES.iter().zip(probs.iter()) {
            if p <= 0.0 || !ctx.feasible(*o) {
                continue;
            }
            last = Some(*o);
            if u < p {
                chosen = Some(*o);
                break;
            }
            u -= p;
        }
        chosen.or(last).expect("positive feasible mass")
    } else {
        let (best, _) = ALL_OUTCOMES
            .iter()
            .zip(probs.iter())
            .fold((ALL_OUTCOMES[0], f64::NEG_INFINITY), |acc, (o, &p)| {
                if p > acc.1 {
                    (*o, p)
                } else {
                    acc
                }
            });
        ctx.project(best)
    };
    ctx.classify(picked)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimStatus {
    Ongoing,
    /// Index of the winning team (0 = first mover).
    Won(usize),
}

/// Tallies for an abstract competitive game. Team 0 moves first with nine
/// cards, team 1 holds eight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompetitiveTally {
    own: [u8; 2],
    bystanders: u8,
    active: usize,
    status: SimStatus,
}

impl Default for CompetitiveTally {
    fn default() -> Self {
        CompetitiveTally {
            own: [FIRST_TEAM_CARDS as u8, SECOND_TEAM_CARDS as u8],
            bystanders: BYSTANDER_CARDS as u8,
            active: 0,
            status: SimStatus::Ongoing,
        }
    }
}

impl CompetitiveTally {
    pub fn context(&self) -> TurnContext {
        TurnContext {
            own: self.own[self.active],
            opponent: self.own[1 - self.active],
            bystanders: self.bystanders,
        }
    }

    pub fn status(&self) -> SimStatus {
        self.status
    }

    pub fn active(&self) -> usize {
        self.active
    }

    pub fn apply(&mut self, o: TurnOutcome) {
        debug_assert!(self.context().feasible(o));
        let me = self.active;
        let them = 1 - me;
        self.own[me] -= o.team_flips();
        if self.own[me] == 0 {
            self.status = SimStatus::Won(me);
            return;
        }
        match o.adverse() {
            Some(Adverse::Opponent) => {
                self.own[them] -= 1;
                if self.own[them] == 0 {
                    self.status = SimStatus::Won(them);
                    return;
                }
            }
            Some(Adverse::Bystander) => self.bystanders -= 1,
            Some(Adverse::Assassin) => {
                self.status = SimStatus::Won(them);
                return;
            }
            None => {}
        }
        self.active = them;
    }
}

/// Play `n_games` competitive games, `a` moving first; returns `a`'s win
/// fraction.
pub fn simulate_competitive(
    a: &SimOutcomeModel,
    b: &SimOutcomeModel,
    n_games: usize,
    rng: &mut impl Rng,
) -> f64 {
    assert!(n_games >= 1, "n_games must be positive");
    let teams = [a, b];
    let mut wins = 0usize;
    for _ in 0..n_games {
        let mut g = CompetitiveTally::default();
        let winner = loop {
            let o = teams[g.active()].sample_turn(g.context(), rng);
            g.apply(o);
            if let SimStatus::Won(w) = g.status() {
                break w;
            }
        };
        if winner == 0 {
            wins += 1;
        }
    }
    wins as f64 / n_games as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolitaireStatus {
    Ongoing,
    Won,
    Lost,
}

/// Tallies for an abstract solitaire game.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolitaireTally {
    own: u8,
    opponent: u8,
    bystanders: u8,
    turns: u32,
    status: SolitaireStatus,
}

impl Default for SolitaireTally {
    fn default() -> Self {
        SolitaireTally {
            own: FIRST_TEAM_CARDS as u8,
            opponent: SECOND_TEAM_CARDS as u8,
            bystanders: BYSTANDER_CARDS as u8,
            turns: 0,
            status: SolitaireStatus::Ongoing,
        }
    }
}

impl SolitaireTally {
    pub fn context(&self) -> TurnContext {
        TurnContext {
            own: self.own,
            opponent: self.opponent,
            bystanders: self.bystanders,
        }
    }

    pub fn status(&self) -> SolitaireStatus {
        self.status
    }

    pub fn turns(&self) -> u32 {
        self.turns
    }

    pub fn apply(&mut self, o: TurnOutcome) {
        debug_assert!(self.context().feasible(o));
        self.turns += 1;
        self.own -= o.team_flips();
        if self.own == 0 {
            self.status = SolitaireStatus::Won;
            return;
        }
        match o.adverse() {
            Some(Adverse::Opponent) => {
                self.opponent -= 1;
                if self.opponent == 0 {
                    self.status = SolitaireStatus::Lost;
                }
            }
            Some(Adverse::Bystander) => self.bystanders -= 1,
            Some(Adverse::Assassin) => self.status = SolitaireStatus::Lost,
            None => {}
        }
    }
}

/// Win rate and mean turns-to-win (over won games only; `None` without wins).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitaireStats {
    pub win_rate: f64,
    pub win_time: Option<f64>,
}

pub fn simulate_solitaire(a: &SimOutcomeModel, n_games: usize, rng: &mut impl Rng) -> SolitaireStats {
    assert!(n_games >= 1, "n_games must be positive");
    let mut wins = 0usize;
    let mut win_turns = 0u64;
    for _ in 0..n_games {
        let mut g = SolitaireTally::default();
        while g.status() == SolitaireStatus::Ongoing {
            let o = a.sample_turn(g.context(), rng);
            g.apply(o);
        }
        if g.status() == SolitaireStatus::Won {
            wins += 1;
            win_turns += u64::from(g.turns());
        }
    }
    SolitaireStats {
        win_rate: wins as f64 / n_games as f64,
        win_time: (wins > 0).then(|| win_turns as f64 / wins as f64),
    }
}
