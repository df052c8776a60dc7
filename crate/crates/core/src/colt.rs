//! Linear team rating over turn-outcome distributions.
//!
//! A team's rating is `W · X`, where `X` is its distribution over the 36 turn
//! outcomes. Rating differences passed through a logistic sigmoid predict the
//! head-to-head win probability between two teams, in the same spirit as Elo.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::outcome::{outcome_index, OutcomeDistribution, OutcomeIndex, NUM_OUTCOMES};

const PUBLISHED_TSV: &str = include_str!("../data/colt_published.tsv");
const HEADER_TAG: &str = "#colt-weights";

/// Where a weight set came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    Published,
    Retrained,
    Other(String),
}

impl Provenance {
    fn tag(&self) -> &str {
        match self {
            Provenance::Published => "published",
            Provenance::Retrained => "retrained",
            Provenance::Other(s) => s,
        }
    }

    fn from_tag(tag: &str) -> Self {
        match tag {
            "published" => Provenance::Published,
            "retrained" => Provenance::Retrained,
            other => Provenance::Other(other.to_string()),
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// The 36 rating weights, keyed by canonical outcome index.
#[derive(Debug, Clone, PartialEq)]
pub struct ColtWeights {
    weights: [f64; NUM_OUTCOMES],
    provenance: Provenance,
}

impl ColtWeights {
    pub fn new(weights: [f64; NUM_OUTCOMES], provenance: Provenance) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidInput("weights must be finite".into()));
        }
        Ok(ColtWeights {
            weights,
            provenance,
        })
    }

    pub fn zeros(provenance: Provenance) -> Self {
        ColtWeights {
            weights: [0.0; NUM_OUTCOMES],
            provenance,
        }
    }

    /// The published weight set bundled with the crate.
    pub fn published() -> Self {
        Self::parse(PUBLISHED_TSV, "colt_published.tsv").expect("bundled weights file is valid")
    }

    pub fn weights(&self) -> &[f64; NUM_OUTCOMES] {
        &self.weights
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn weight(&self, i: OutcomeIndex) -> f64 {
        self.weights[i.get()]
    }

    /// Rating of an outcome distribution.
    pub fn rate(&self, x: &OutcomeDistribution) -> f64 {
        self.rate_signed(x.probs())
    }

    /// Dot product with an arbitrary (possibly signed, unnormalized) vector.
    pub fn rate_signed(&self, v: &[f64; NUM_OUTCOMES]) -> f64 {
        self.weights.iter().zip(v.iter()).map(|(w, x)| w * x).sum()
    }

    /// Predicted probability that team `x` beats team `y`.
    pub fn win_probability(&self, x: &OutcomeDistribution, y: &OutcomeDistribution) -> f64 {
        sigmoid(self.rate(x) - self.rate(y))
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let provenance = match lines.next() {
            Some((_, header)) => {
                let mut parts = header.split('\t');
                if parts.next() != Some(HEADER_TAG) {
                    return Err(Error::parse(
                        source,
                        1,
                        format!("expected header starting with {HEADER_TAG}"),
                    ));
                }
                Provenance::from_tag(parts.next().unwrap_or("unknown").trim())
            }
            None => return Err(Error::parse(source, 1, "empty weights file")),
        };

        let mut weights = [0.0; NUM_OUTCOMES];
        let mut seen = 0usize;
        for (i, line) in lines {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let (label, value) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(source, line_no, "expected label<TAB>weight"))?;
            let idx = outcome_index(label.trim())
                .map_err(|e| Error::parse(source, line_no, e.to_string()))?;
            if idx.get() != seen {
                return Err(Error::parse(
                    source,
                    line_no,
                    format!("label {label} out of canonical order"),
                ));
            }
            weights[seen] = value
                .trim()
                .parse()
                .map_err(|e| Error::parse(source, line_no, format!("bad weight: {e}")))?;
            seen += 1;
        }
        if seen != NUM_OUTCOMES {
            return Err(Error::parse(
                source,
                seen + 1,
                format!("expected {NUM_OUTCOMES} weights, found {seen}"),
            ));
        }
        ColtWeights::new(weights, provenance)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{HEADER_TAG}\t{}", self.provenance)?;
        for i in OutcomeIndex::all() {
            writeln!(w, "{}\t{}", i.label(), self.weights[i.get()])?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut buf = Vec::new();
        self.write_to(&mut buf).map_err(|e| Error::io(path, e))?;
        fs::write(path, buf).map_err(|e| Error::io(path, e))
    }
}

pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Rating of `x` under weights `w`.
pub fn rate(w: &ColtWeights, x: &OutcomeDistribution) -> f64 {
    w.rate(x)
}

pub fn win_probability(w: &ColtWeights, x: &OutcomeDistribution, y: &OutcomeDistribution) -> f64 {
    w.win_probability(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::outcome::TurnOutcome;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn one_hot(label: &str) -> OutcomeDistribution {
        OutcomeDistribution::one_hot(label.parse::<TurnOutcome>().unwrap())
    }

    #[test]
    fn published_one_hot_values() {
        let w = ColtWeights::published();
        assert_eq!(w.provenance(), &Provenance::Published);
        assert_eq!(w.rate(&one_hot("0001")), -9.740);
        assert_eq!(w.rate(&one_hot("9000")), 1.528);
        assert_eq!(w.rate(&one_hot("2010")), 0.830);
        assert_eq!(w.rate(&one_hot("1010")), 0.007);
    }

    #[test]
    fn uniform_rating_is_mean_weight() {
        // Sum of the published column values, tallied by hand: -2.101.
        let w = ColtWeights::published();
        assert_abs_diff_eq!(
            w.rate(&OutcomeDistribution::uniform()),
            -2.101 / 36.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn win_probability_examples() {
        let w = ColtWeights::published();
        let x = one_hot("9000");
        let y = one_hot("0001");
        assert_eq!(w.win_probability(&x, &x), 0.5);
        // 1 / (1 + e^-11.268)
        assert_abs_diff_eq!(w.win_probability(&x, &y), 0.999_987_224_902_313, epsilon = 1e-12);
    }

    #[test]
    fn weights_file_round_trip() {
        let w = ColtWeights::published();
        let mut buf = Vec::new();
        w.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(ColtWeights::parse(&text, "mem").unwrap(), w);
        assert!(text.starts_with("#colt-weights\tpublished\n0100\t-4.695\n"));
    }

    #[test]
    fn weights_file_errors() {
        assert!(ColtWeights::parse("", "x").is_err());
        assert!(ColtWeights::parse("#colt-weights\tretrained\n0100\t1\n", "x").is_err());
        let swapped = PUBLISHED_TSV.replacen("0100\t-4.695\n0010\t-1.854", "0010\t-1.854\n0100\t-4.695", 1);
        let err = ColtWeights::parse(&swapped, "x").unwrap_err();
        assert!(err.to_string().contains("x:2"), "{err}");
        let nan = PUBLISHED_TSV.replacen("-4.695", "NaN", 1);
        assert!(ColtWeights::parse(&nan, "x").is_err());
    }

    fn arb_vec() -> impl Strategy<Value = [f64; NUM_OUTCOMES]> {
        proptest::array::uniform32(-10.0f64..10.0).prop_flat_map(|head| {
            proptest::array::uniform4(-10.0f64..10.0).prop_map(move |tail| {
                let mut v = [0.0; NUM_OUTCOMES];
                v[..32].copy_from_slice(&head);
                v[32..].copy_from_slice(&tail);
                v
            })
        })
    }

    fn arb_dist() -> impl Strategy<Value = OutcomeDistribution> {
        arb_vec().prop_map(|v| {
            let mut p = v.map(f64::abs);
            p[0] += 1e-3;
            let s: f64 = p.iter().sum();
            p.iter_mut().for_each(|x| *x /= s);
            OutcomeDistribution::new(p).unwrap()
        })
    }

    proptest! {
        #[test]
        fn rate_is_linear(w in arb_vec(), x in arb_dist(), y in arb_dist(), a in 0.0f64..=1.0) {
            let w = ColtWeights::new(w, Provenance::Retrained).unwrap();
            let mixed = x.mix(&y, a).unwrap();
            let lhs = w.rate(&mixed);
            let rhs = a * w.rate(&x) + (1.0 - a) * w.rate(&y);
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn rate_difference_identity(w in arb_vec(), x in arb_dist(), y in arb_dist()) {
            let w = ColtWeights::new(w, Provenance::Retrained).unwrap();
            let d = x.diff(&y);
            prop_assert!((w.rate(&x) - w.rate(&y) - w.rate_signed(&d)).abs() < 1e-12);
        }

        #[test]
        fn sigmoid_symmetry(x in arb_dist(), y in arb_dist()) {
            let w = ColtWeights::published();
            let s = w.win_probability(&x, &y) + w.win_probability(&y, &x);
            prop_assert!((s - 1.0).abs() < 1e-12);
        }
    }
}
