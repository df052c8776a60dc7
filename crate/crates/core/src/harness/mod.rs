//! Experiment protocol: blocks of consecutive solitaire games per pairing,
//! repeated with fresh adaptive state, and the metrics computed from them.
//!
//! Boards depend only on `(seed, repetition, game)`, so every pairing run
//! under one seed sees the same board sequence. Logs are the source of
//! truth; every aggregate is recomputed from them.

mod metrics;
mod report;
mod surface;

pub mod config;

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::{give_clue, guess_plan, scripted_guesser, AgentRegistry, SpymasterView};
use crate::colt::ColtWeights;
use crate::embeddings::EmbeddingModel;
use crate::ensemble::{EnsembleConfig, EnsembleState, Role};
use crate::error::{Error, Result};
use crate::game::{Clue, GameState, GameStatus, Mode, FIRST_TEAM_CARDS};
use crate::outcome::{OutcomeDistribution, TurnOutcome};
use crate::rng;
use crate::sim::{sample_turn, SolitaireStatus, SolitaireTally};

pub use metrics::{
    best_average_baseline, colt_excluding_prefix, colt_time_series, compute_metrics,
    confidence_interval, BestAverage, MetricTriple, PairMatrix,
};
pub use report::{format_matrix_table, write_results_csv, write_timeseries_csv, ResultRow};
pub use surface::{colt_surface, Surface, SurfaceConfig, SurfaceSample};

/// Default number of consecutive games played with one teammate.
pub const GAMES_PER_BLOCK: usize = 50;

const BOARD_STREAM: u64 = 0xB0A2D;
const ENSEMBLE_STREAM: u64 = 0xE25E;
const SIM_STREAM: u64 = 0x5173;

/// One side of a pairing.
#[derive(Debug, Clone, PartialEq)]
pub enum SideSpec {
    /// A fixed base agent by registry code.
    Agent(String),
    /// An adaptive ensemble over registry codes.
    Ensemble(EnsembleConfig),
}

impl SideSpec {
    pub fn label(&self) -> String {
        match self {
            SideSpec::Agent(code) => code.clone(),
            SideSpec::Ensemble(cfg) => match cfg.selection {
                crate::ensemble::Selection::Ucb => "ACE".into(),
                crate::ensemble::Selection::Uniform => "R".into(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairingConfig {
    pub spymaster: SideSpec,
    pub guesser: SideSpec,
    pub games_per_block: usize,
    pub repetitions: usize,
    pub board_words: Vec<String>,
    pub seed: u64,
}

impl PairingConfig {
    pub fn new(spymaster: SideSpec, guesser: SideSpec, board_words: Vec<String>) -> Self {
        PairingConfig {
            spymaster,
            guesser,
            games_per_block: GAMES_PER_BLOCK,
            repetitions: 1,
            board_words,
            seed: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.games_per_block == 0 || self.repetitions == 0 {
            return Err(Error::Config("games and repetitions must be positive".into()));
        }
        if matches!(
            (&self.spymaster, &self.guesser),
            (SideSpec::Ensemble(_), SideSpec::Ensemble(_))
        ) {
            return Err(Error::Config("only one side of a pairing may adapt".into()));
        }
        Ok(())
    }
}

/// One game's turn outcomes, and which expert played each turn when one side
/// is an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameLog {
    pub repetition: usize,
    pub game: usize,
    pub won: bool,
    pub outcomes: Vec<TurnOutcome>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub experts: Vec<String>,
}

impl GameLog {
    /// Solitaire games are won exactly when all own cards were flipped.
    pub fn check(&self) -> Result<()> {
        let flips: usize = self.outcomes.iter().map(|o| o.team_flips() as usize).sum();
        if self.outcomes.is_empty() || (flips == FIRST_TEAM_CARDS) != self.won {
            return Err(Error::InvalidInput(format!(
                "game {} of repetition {}: outcomes do not match result",
                self.game, self.repetition
            )));
        }
        Ok(())
    }

    pub fn rounds(&self) -> usize {
        self.outcomes.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairingResult {
    pub spymaster: String,
    pub guesser: String,
    pub games_per_block: usize,
    pub repetitions: usize,
    /// Ordered by repetition, then game.
    pub logs: Vec<GameLog>,
}

impl PairingResult {
    pub fn repetition(&self, r: usize) -> &[GameLog] {
        let start = r * self.games_per_block;
        &self.logs[start..start + self.games_per_block]
    }

    /// Mean over repetitions of each repetition's metrics, with 95% CI
    /// half-widths across repetitions.
    pub fn summary(&self, weights: &ColtWeights) -> Result<Summary> {
        let per_rep = (0..self.repetitions)
            .map(|r| compute_metrics(self.repetition(r), weights))
            .collect::<Result<Vec<_>>>()?;
        let colts: Vec<f64> = per_rep.iter().map(|m| m.colt).collect();
        let rates: Vec<f64> = per_rep.iter().map(|m| m.win_rate).collect();
        let times: Vec<f64> = per_rep.iter().filter_map(|m| m.win_time).collect();
        let half = |v: &[f64]| if v.len() >= 2 { confidence_interval(v).ok() } else { None };
        Ok(Summary {
            colt: mean(&colts),
            colt_ci: half(&colts),
            win_rate: mean(&rates),
            win_rate_ci: half(&rates),
            win_time: (!times.is_empty()).then(|| mean(&times)),
            win_time_ci: half(&times),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub colt: f64,
    pub colt_ci: Option<f64>,
    pub win_rate: f64,
    pub win_rate_ci: Option<f64>,
    pub win_time: Option<f64>,
    pub win_time_ci: Option<f64>,
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// The board for game `game` of repetition `rep`.
pub fn board_for(words: &[String], seed: u64, rep: usize, game: usize) -> Result<GameState> {
    let s = rng::derive_seed(seed, &[BOARD_STREAM, rep as u64, game as u64]);
    GameState::new_board(words, s, Mode::Solitaire)
}

enum Side {
    Fixed(Arc<EmbeddingModel>),
    Adaptive {
        experts: Vec<(String, Arc<EmbeddingModel>)>,
        state: EnsembleState,
    },
}

fn resolve_side(
    spec: &SideSpec,
    role: Role,
    registry: &AgentRegistry,
    weights: &ColtWeights,
    seed: u64,
    rep: usize,
) -> Result<Side> {
    let pick = |code: &str| -> Result<Arc<EmbeddingModel>> {
        let a = registry.get(code)?;
        Ok(match role {
            Role::Spymaster => a.spymaster.clone(),
            Role::Guesser => a.guesser.clone(),
        })
    };
    match spec {
        SideSpec::Agent(code) => Ok(Side::Fixed(pick(code)?)),
        SideSpec::Ensemble(cfg) => {
            let experts = cfg
                .active_experts()?
                .into_iter()
                .map(|c| pick(&c).map(|m| (c, m)))
                .collect::<Result<Vec<_>>>()?;
            let state = EnsembleState::from_config(
                cfg,
                weights.clone(),
                rng::stream(seed, &[ENSEMBLE_STREAM, rep as u64]),
            )?;
            Ok(Side::Adaptive { experts, state })
        }
    }
}

/// Play one repetition: `games_per_block` consecutive games with adaptive
/// state carried across games.
fn run_repetition(
    cfg: &PairingConfig,
    registry: &AgentRegistry,
    weights: &ColtWeights,
    rep: usize,
) -> Result<Vec<GameLog>> {
    let mut spy = resolve_side(&cfg.spymaster, Role::Spymaster, registry, weights, cfg.seed, rep)?;
    let mut guess = resolve_side(&cfg.guesser, Role::Guesser, registry, weights, cfg.seed, rep)?;
    let mut logs = Vec::with_capacity(cfg.games_per_block);

    for game in 0..cfg.games_per_block {
        let mut state = board_for(&cfg.board_words, cfg.seed, rep, game)?;
        let mut outcomes = Vec::new();
        let mut experts = Vec::new();
        while !state.is_over() {
            let view = SpymasterView::from_state(&state);
            let (clue, spy_pick) = match &mut spy {
                Side::Fixed(m) => (give_clue(m, &view, &state)?, None),
                Side::Adaptive { experts: ex, state: es } => {
                    let d = es.act(|j| give_clue(&ex[j].1, &view, &state))?;
                    (d.action.clone(), Some(d))
                }
            };
            let (plan, guess_pick) = match &mut guess {
                Side::Fixed(m) => (guess_plan(m, &clue, &state)?, None),
                Side::Adaptive { experts: ex, state: es } => {
                    let d = es.act(|j| guess_plan(&ex[j].1, &clue, &state))?;
                    (d.action.clone(), Some(d))
                }
            };
            let outcome = state.resolve_turn(&clue, scripted_guesser(plan))?;
            outcomes.push(outcome);
            if let (Some(d), Side::Adaptive { experts: ex, state: es }) = (&spy_pick, &mut spy) {
                es.record_outcome(d.expert, outcome, &d.same_action)?;
                experts.push(ex[d.expert].0.clone());
            }
            if let (Some(d), Side::Adaptive { experts: ex, state: es }) = (&guess_pick, &mut guess) {
                es.record_outcome(d.expert, outcome, &d.same_action)?;
                experts.push(ex[d.expert].0.clone());
            }
        }
        logs.push(GameLog {
            repetition: rep,
            game,
            won: state.status() == GameStatus::Won(state.active_team()),
            outcomes,
            experts,
        });
    }
    Ok(logs)
}

/// Play every repetition of a pairing on the embedding agents in `registry`.
/// Repetitions run in parallel; the result does not depend on scheduling.
pub fn run_pairing(
    cfg: &PairingConfig,
    registry: &AgentRegistry,
    weights: &ColtWeights,
) -> Result<PairingResult> {
    cfg.validate()?;
    let reps = (0..cfg.repetitions)
        .into_par_iter()
        .map(|rep| run_repetition(cfg, registry, weights, rep))
        .collect::<Result<Vec<_>>>()?;
    Ok(PairingResult {
        spymaster: cfg.spymaster.label(),
        guesser: cfg.guesser.label(),
        games_per_block: cfg.games_per_block,
        repetitions: cfg.repetitions,
        logs: reps.into_iter().flatten().collect(),
    })
}

/// A teammate pairing reduced to outcome distributions: each expert is a
/// fixed distribution over turn outcomes that stands for "this expert
/// together with the current teammate". Turns are drawn on the abstract
/// solitaire tallies instead of a real board.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedPairing {
    pub experts: Vec<(String, OutcomeDistribution)>,
    pub ensemble: EnsembleConfig,
    pub games_per_block: usize,
    pub repetitions: usize,
    pub seed: u64,
}

/// Run the ensemble over simulated experts. Shared credit never applies:
/// simulated experts have no comparable actions.
pub fn run_simulated(sp: &SimulatedPairing, weights: &ColtWeights) -> Result<PairingResult> {
    if sp.games_per_block == 0 || sp.repetitions == 0 {
        return Err(Error::Config("games and repetitions must be positive".into()));
    }
    let codes = sp.ensemble.active_experts()?;
    let dists = codes
        .iter()
        .map(|c| {
            sp.experts
                .iter()
                .find(|(name, _)| name == c)
                .map(|(_, d)| *d)
                .ok_or_else(|| Error::Config(format!("no distribution for expert {c:?}")))
        })
        .collect::<Result<Vec<_>>>()?;

    let reps = (0..sp.repetitions)
        .into_par_iter()
        .map(|rep| {
            let mut es = EnsembleState::from_config(
                &sp.ensemble,
                weights.clone(),
                rng::stream(sp.seed, &[ENSEMBLE_STREAM, rep as u64]),
            )?;
            let mut turn_rng = rng::stream(sp.seed, &[SIM_STREAM, rep as u64]);
            let mut logs = Vec::with_capacity(sp.games_per_block);
            for game in 0..sp.games_per_block {
                let mut tally = SolitaireTally::default();
                let mut outcomes = Vec::new();
                let mut experts = Vec::new();
                while tally.status() == SolitaireStatus::Ongoing {
                    let q = es.select_expert();
                    let o = sample_turn(&dists[q], tally.context(), &mut turn_rng);
                    es.record_outcome(q, o, &[])?;
                    tally.apply(o);
                    outcomes.push(o);
                    experts.push(codes[q].clone());
                }
                logs.push(GameLog {
                    repetition: rep,
                    game,
                    won: tally.status() == SolitaireStatus::Won,
                    outcomes,
                    experts,
                });
            }
            Ok(logs)
        })
        .collect::<Result<Vec<Vec<GameLog>>>>()?;

    let label = SideSpec::Ensemble(sp.ensemble.clone()).label();
    Ok(PairingResult {
        spymaster: label,
        guesser: "simulated".into(),
        games_per_block: sp.games_per_block,
        repetitions: sp.repetitions,
        logs: reps.into_iter().flatten().collect(),
    })
}

/// Write logs as JSON lines, one game per line.
pub fn write_game_logs<'a>(
    mut w: impl std::io::Write,
    pairing: &str,
    logs: impl IntoIterator<Item = &'a GameLog>,
) -> Result<()> {
    #[derive(Serialize)]
    struct Line<'b> {
        pairing: &'b str,
        #[serde(flatten)]
        log: &'b GameLog,
    }
    for log in logs {
        serde_json::to_writer(&mut w, &Line { pairing, log })?;
        w.write_all(b"\n").map_err(|e| Error::io("<log writer>", e))?;
    }
    Ok(())
}

/// Read JSON-lines game logs, grouped by pairing in order of first
/// appearance. Each game is checked for consistency.
pub fn read_game_logs(r: impl std::io::BufRead, source: &str) -> Result<Vec<(String, Vec<GameLog>)>> {
    #[derive(Deserialize)]
    struct Line {
        #[serde(default)]
        pairing: String,
        #[serde(flatten)]
        log: GameLog,
    }
    let mut out: Vec<(String, Vec<GameLog>)> = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Line =
            serde_json::from_str(&line).map_err(|e| Error::parse(source, i + 1, e.to_string()))?;
        rec.log
            .check()
            .map_err(|e| Error::parse(source, i + 1, e.to_string()))?;
        match out.iter_mut().find(|(p, _)| *p == rec.pairing) {
            Some((_, v)) => v.push(rec.log),
            None => out.push((rec.pairing, vec![rec.log])),
        }
    }
    Ok(out)
}

/// Play one game between fixed agents on a given board and return the final
/// state; handy for inspection and replay checks.
pub fn play_game(
    spymaster: &EmbeddingModel,
    guesser: &EmbeddingModel,
    mut state: GameState,
) -> Result<GameState> {
    while !state.is_over() {
        let clue: Clue = give_clue(spymaster, &SpymasterView::from_state(&state), &state)?;
        let plan = guess_plan(guesser, &clue, &state)?;
        state.resolve_turn(&clue, scripted_guesser(plan))?;
    }
    Ok(state)
}
