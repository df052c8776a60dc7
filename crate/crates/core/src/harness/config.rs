//! TOML experiment description and the full evaluation run it drives.
//!
//! ```toml
//! seed = 7
//! games_per_block = 50
//! repetitions = 20
//! words = "words.txt"          # board words, one per line
//! weights = "weights.tsv"      # optional; bundled weights otherwise
//!
//! [agents]                     # code = neighbor file, or one file per role
//! w = "models/w.nbr"
//! wg = { spymaster = "models/wg50.nbr", guesser = "models/wg300.nbr" }
//!
//! [ensemble]
//! c = 0.5
//! shared_credit = true
//! roles = ["spymaster", "guesser"]
//! conditions = ["with_partner", "without_partner"]
//! ```
//!
//! Instead of `[agents]` (and `words`), a `[synthetic]` table generates a
//! family of related models, one per code.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use crate::agents::AgentRegistry;
use crate::colt::ColtWeights;
use crate::ensemble::{EnsembleConfig, Role, Selection, DEFAULT_EXPLORATION};
use crate::error::{Error, Result};
use crate::synthetic::{board_vocabulary, model_family, SyntheticSpec};

use super::metrics::{best_average_baseline, colt_time_series, PairMatrix};
use super::report::{format_matrix_table, write_results_csv, write_timeseries_csv, ResultRow};
use super::{run_pairing, write_game_logs, PairingConfig, PairingResult, SideSpec};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum AgentFiles {
    Shared(PathBuf),
    PerRole { spymaster: PathBuf, guesser: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSection {
    pub codes: Vec<String>,
    #[serde(default = "default_divergence")]
    pub divergence: f64,
    #[serde(default)]
    pub board_words: Option<usize>,
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub k: Option<usize>,
}

fn default_divergence() -> f64 {
    0.35
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    WithPartner,
    WithoutPartner,
}

impl Condition {
    fn name(self) -> &'static str {
        match self {
            Condition::WithPartner => "with_partner",
            Condition::WithoutPartner => "without_partner",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "yes")]
    pub shared_credit: bool,
    #[serde(default = "all_roles")]
    pub roles: Vec<Role>,
    #[serde(default = "all_conditions")]
    pub conditions: Vec<Condition>,
    /// Also run the uniform-random ensemble.
    #[serde(default = "yes")]
    pub random_baseline: bool,
}

fn default_c() -> f64 {
    DEFAULT_EXPLORATION
}
fn yes() -> bool {
    true
}
fn all_roles() -> Vec<Role> {
    vec![Role::Spymaster, Role::Guesser]
}
fn all_conditions() -> Vec<Condition> {
    vec![Condition::WithPartner, Condition::WithoutPartner]
}

impl Default for EnsembleSection {
    fn default() -> Self {
        EnsembleSection {
            c: default_c(),
            shared_credit: true,
            roles: all_roles(),
            conditions: all_conditions(),
            random_baseline: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_games")]
    pub games_per_block: usize,
    #[serde(default = "default_reps")]
    pub repetitions: usize,
    #[serde(default)]
    pub words: Option<PathBuf>,
    #[serde(default)]
    pub weights: Option<PathBuf>,
    #[serde(default)]
    pub agents: BTreeMap<String, AgentFiles>,
    #[serde(default)]
    pub synthetic: Option<SyntheticSection>,
    #[serde(default)]
    pub ensemble: Option<EnsembleSection>,
}

fn default_games() -> usize {
    super::GAMES_PER_BLOCK
}
fn default_reps() -> usize {
    200
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

/// Everything an experiment produces, ready to be written out.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub tables: String,
    pub series: Vec<(ResultRow, Vec<f64>)>,
    pub pairings: Vec<(String, PairingResult)>,
}

impl ExperimentOutput {
    /// Write `results.csv`, `tables.txt`, `timeseries.csv` and `logs.jsonl`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let create = |name: &str| {
            let p = dir.join(name);
            fs::File::create(&p)
                .map(std::io::BufWriter::new)
                .map_err(|e| Error::io(p, e))
        };
        write_results_csv(create("results.csv")?, &self.rows)?;
        write_timeseries_csv(create("timeseries.csv")?, &self.series)?;
        fs::write(dir.join("tables.txt"), &self.tables).map_err(|e| Error::io(dir.join("tables.txt"), e))?;
        let mut logs = create("logs.jsonl")?;
        for (id, p) in &self.pairings {
            write_game_logs(&mut logs, id, &p.logs)?;
        }
        use std::io::Write;
        logs.flush().map_err(|e| Error::io(dir.join("logs.jsonl"), e))
    }
}

/// Registry, board words and weights described by `cfg`; relative paths
/// resolve against `base`.
pub fn resolve_inputs(
    cfg: &ExperimentConfig,
    base: &Path,
) -> Result<(AgentRegistry, Vec<String>, ColtWeights)> {
    let at = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
    let weights = match &cfg.weights {
        Some(p) => ColtWeights::load(at(p))?,
        None => ColtWeights::published(),
    };
    let mut registry = AgentRegistry::new();
    let mut words = None;
    match (&cfg.synthetic, cfg.agents.is_empty()) {
        (Some(_), false) => {
            return Err(Error::Config("use either [agents] or [synthetic], not both".into()))
        }
        (None, true) => return Err(Error::Config("no agents configured".into())),
        (Some(syn), true) => {
            let defaults = SyntheticSpec::default();
            let spec = SyntheticSpec {
                board_words: syn.board_words.unwrap_or(defaults.board_words),
                dim: syn.dim.unwrap_or(defaults.dim),
                k: syn.k.unwrap_or(defaults.k),
                ..defaults
            };
            let names: Vec<&str> = syn.codes.iter().map(String::as_str).collect();
            for (code, m) in syn.codes.iter().zip(model_family(&names, &spec, syn.divergence, cfg.seed)?) {
                registry.insert_model(code.clone(), Arc::new(m));
            }
            words = Some(board_vocabulary(&spec));
        }
        (None, false) => {
            for (code, files) in &cfg.agents {
                match files {
                    AgentFiles::Shared(p) => registry.load(code.clone(), &at(p), &at(p))?,
                    AgentFiles::PerRole { spymaster, guesser } => {
                        registry.load(code.clone(), &at(spymaster), &at(guesser))?
                    }
                }
            }
        }
    }
    let words = match (&cfg.words, words) {
        (Some(p), _) => {
            let p = at(p);
            let text = fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_string)
                .collect()
        }
        (None, Some(w)) => w,
        (None, None) => return Err(Error::Config("`words` is required with [agents]".into())),
    };
    Ok((registry, words, weights))
}

fn row(condition: &str, p: &PairingResult, weights: &ColtWeights) -> Result<ResultRow> {
    Ok(ResultRow {
        condition: condition.to_string(),
        spymaster: p.spymaster.clone(),
        guesser: p.guesser.clone(),
        repetitions: p.repetitions,
        games_per_block: p.games_per_block,
        summary: p.summary(weights)?,
    })
}

/// Run the static matrix and, when configured, the adaptive experiments.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    registry: &AgentRegistry,
    words: &[String],
    weights: &ColtWeights,
) -> Result<ExperimentOutput> {
    let codes: Vec<String> = registry.codes().map(str::to_string).collect();
    let pairing = |spymaster: SideSpec, guesser: SideSpec| PairingConfig {
        spymaster,
        guesser,
        games_per_block: cfg.games_per_block,
        repetitions: cfg.repetitions,
        board_words: words.to_vec(),
        seed: cfg.seed,
    };

    let mut rows = Vec::new();
    let mut series = Vec::new();
    let mut pairings = Vec::new();
    let mut colt = PairMatrix::new(codes.clone(), codes.clone());
    let mut rate = colt.clone();
    let mut time = colt.clone();
    let mut static_rows = BTreeMap::new();

    for s in &codes {
        for g in &codes {
            let p = run_pairing(
                &pairing(SideSpec::Agent(s.clone()), SideSpec::Agent(g.clone())),
                registry,
                weights,
            )?;
            let r = row("static", &p, weights)?;
            colt.insert(s, g, r.summary.colt);
            rate.insert(s, g, r.summary.win_rate);
            if let Some(t) = r.summary.win_time {
                time.insert(s, g, t);
            }
            static_rows.insert((s.clone(), g.clone()), r.clone());
            rows.push(r);
            pairings.push((format!("static:{s}/{g}"), p));
        }
    }

    let mut tables = String::new();
    tables += &format_matrix_table("CoLT, static pairs", &colt);
    tables += "\n";
    tables += &format_matrix_table("Win rate, static pairs", &rate);
    tables += "\n";
    tables += &format_matrix_table("Win time, static pairs", &time);

    if let Some(ens) = &cfg.ensemble {
        for &cond in &ens.conditions {
            let without = cond == Condition::WithoutPartner;
            if without && codes.len() < 2 {
                return Err(Error::Config("without-partner runs need two agents".into()));
            }
            let ba = best_average_baseline(&colt, without)?;
            for &role in &ens.roles {
                let ba_code = match role {
                    Role::Spymaster => &ba.spymaster.0,
                    Role::Guesser => &ba.guesser.0,
                };
                let mut table = PairMatrix::new(Vec::new(), codes.clone());
                let mut selections = vec![(Selection::Ucb, "ACE")];
                if ens.random_baseline {
                    selections.push((Selection::Uniform, "R"));
                }
                for (selection, label) in &selections {
                    table.spymasters.push(label.to_string());
                    for mate in &codes {
                        let ecfg = EnsembleConfig {
                            experts: codes.clone(),
                            c: ens.c,
                            shared_credit: ens.shared_credit,
                            exclude: if without { vec![mate.clone()] } else { Vec::new() },
                            selection: *selection,
                        };
                        let (spy, gue) = match role {
                            Role::Spymaster => (SideSpec::Ensemble(ecfg), SideSpec::Agent(mate.clone())),
                            Role::Guesser => (SideSpec::Agent(mate.clone()), SideSpec::Ensemble(ecfg)),
                        };
                        let p = run_pairing(&pairing(spy, gue), registry, weights)?;
                        let r = row(cond.name(), &p, weights)?;
                        table.insert(label, mate, r.summary.colt);
                        series.push((r.clone(), colt_time_series(&p, weights)?));
                        rows.push(r);
                        pairings.push((format!("{}:{}/{}", cond.name(), p.spymaster, p.guesser), p));
                    }
                }
                let ba_label = format!("BA({ba_code})");
                table.spymasters.push(ba_label.clone());
                for mate in codes.iter().filter(|m| !(without && *m == ba_code)) {
                    let key = match role {
                        Role::Spymaster => (ba_code.clone(), mate.clone()),
                        Role::Guesser => (mate.clone(), ba_code.clone()),
                    };
                    let mut r = static_rows[&key].clone();
                    table.insert(&ba_label, mate, r.summary.colt);
                    r.condition = format!("{}_best_average", cond.name());
                    rows.push(r);
                }
                let role_name = match role {
                    Role::Spymaster => "adaptive spymaster (rows) with each guesser",
                    Role::Guesser => "adaptive guesser (rows) with each spymaster",
                };
                tables += "\n";
                tables += &format_matrix_table(&format!("CoLT, {role_name}, {}", cond.name()), &table);
            }
        }
    }

    Ok(ExperimentOutput {
        rows,
        tables,
        series,
        pairings,
    })
}
