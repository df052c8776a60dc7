use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};

use super::metrics::PairMatrix;
use super::Summary;

/// One line of `results.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    /// e.g. `static`, `with_partner`, `without_partner`.
    pub condition: String,
    pub spymaster: String,
    pub guesser: String,
    pub repetitions: usize,
    pub games_per_block: usize,
    pub summary: Summary,
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6}")).unwrap_or_default()
}

pub fn write_results_csv(w: impl Write, rows: &[ResultRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "condition",
        "spymaster",
        "guesser",
        "repetitions",
        "games_per_block",
        "colt",
        "colt_ci95",
        "win_rate",
        "win_rate_ci95",
        "win_time",
        "win_time_ci95",
    ])?;
    for r in rows {
        let s = &r.summary;
        out.write_record([
            r.condition.clone(),
            r.spymaster.clone(),
            r.guesser.clone(),
            r.repetitions.to_string(),
            r.games_per_block.to_string(),
            format!("{:.6}", s.colt),
            opt(s.colt_ci),
            format!("{:.6}", s.win_rate),
            opt(s.win_rate_ci),
            opt(s.win_time),
            opt(s.win_time_ci),
        ])?;
    }
    out.flush().map_err(|e| Error::io("<results csv>", e))
}

/// `spymaster,guesser,condition,game,colt` rows, one per game index.
pub fn write_timeseries_csv(w: impl Write, series: &[(ResultRow, Vec<f64>)]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["condition", "spymaster", "guesser", "game", "colt"])?;
    for (row, values) in series {
        for (i, v) in values.iter().enumerate() {
            out.write_record([
                row.condition.clone(),
                row.spymaster.clone(),
                row.guesser.clone(),
                (i + 1).to_string(),
                format!("{v:.6}"),
            ])?;
        }
    }
    out.flush().map_err(|e| Error::io("<timeseries csv>", e))
}

/// Aligned text table: spymasters down, guessers across, plus a row mean.
/// Missing cells print as `-`.
pub fn format_matrix_table(title: &str, m: &PairMatrix) -> String {
    let mut header = vec![String::from("SM \\ G")];
    header.extend(m.guessers.iter().cloned());
    header.push("mean".into());
    let mut rows = vec![header];
    for s in &m.spymasters {
        let vals: Vec<Option<f64>> = m.guessers.iter().map(|g| m.get(s, g)).collect();
        let present: Vec<f64> = vals.iter().flatten().copied().collect();
        let mut row = vec![s.clone()];
        row.extend(
            vals.iter()
                .map(|v| v.map_or("-".to_string(), |x| format!("{x:.2}"))),
        );
        row.push(if present.is_empty() {
            "-".into()
        } else {
            format!("{:.2}", present.iter().sum::<f64>() / present.len() as f64)
        });
        rows.push(row);
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    let _ = writeln!(out, "{title}");
    for (i, r) in rows.iter().enumerate() {
        let line: Vec<String> = r
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(c, (cell, w))| {
                if c == 0 {
                    format!("{cell:<w$}")
                } else {
                    format!("{cell:>w$}")
                }
            })
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
        if i == 0 {
            let total = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
            let _ = writeln!(out, "{}", "-".repeat(total));
        }
    }
    out
}
