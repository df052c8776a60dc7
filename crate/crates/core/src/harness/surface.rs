//! CoLT as a function of (win rate, win time).
//!
//! Random teams are rated and simulated in solitaire; a Gaussian radial
//! basis interpolant over the two solitaire metrics then maps the plane to a
//! rating. Coordinates are min-max normalized, an affine trend is fitted
//! first, and the kernel part interpolates the residuals.

use rayon::prelude::*;

use crate::colt::ColtWeights;
use crate::error::{Error, Result};
use crate::rng;
use crate::sim::{simulate_solitaire, SimOutcomeModel};
use crate::training::VectorScheme;

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceConfig {
    pub n_vectors: usize,
    pub games_each: usize,
    pub grid_rows: usize,
    pub grid_cols: usize,
    /// Kernel standard deviation in normalized coordinates.
    pub width: f64,
    /// Added to the kernel diagonal; keeps the solve stable with near
    /// duplicate points.
    pub ridge: f64,
    pub seed: u64,
    /// How the random teams are drawn.
    pub scheme: VectorScheme,
}

impl SurfaceConfig {
    /// 500 vectors of 1000 games each.
    pub fn full() -> Self {
        SurfaceConfig {
            n_vectors: 500,
            games_each: 1000,
            ..Self::desk()
        }
    }

    /// 50 vectors of 200 games each.
    pub fn desk() -> Self {
        SurfaceConfig {
            n_vectors: 50,
            games_each: 200,
            grid_rows: 20,
            grid_cols: 20,
            width: 0.15,
            ridge: 1e-9,
            seed: 0,
            scheme: VectorScheme::DEFAULT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSample {
    pub win_rate: f64,
    pub win_time: f64,
    pub colt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Surface {
    /// Usable samples (at least one win).
    pub samples: Vec<SurfaceSample>,
    /// Vectors dropped for never winning.
    pub excluded: usize,
    /// Column coordinates.
    pub win_rates: Vec<f64>,
    /// Row coordinates.
    pub win_times: Vec<f64>,
    /// `values[row][col]`.
    pub values: Vec<Vec<f64>>,
    fit: Rbf,
}

impl Surface {
    pub fn evaluate(&self, win_rate: f64, win_time: f64) -> f64 {
        self.fit.eval(win_rate, win_time)
    }

    /// Slopes of the affine trend per unit win rate and per round of win
    /// time: the large-scale shape underneath the interpolated bumps.
    pub fn trend_slopes(&self) -> (f64, f64) {
        let f = &self.fit;
        (f.trend[1] / f.span[0], f.trend[2] / f.span[1])
    }

    /// CSV rows `win_rate,win_time,colt` over the grid.
    pub fn write_csv(&self, w: impl std::io::Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["win_rate", "win_time", "colt"])?;
        for (r, wt) in self.win_times.iter().enumerate() {
            for (c, wr) in self.win_rates.iter().enumerate() {
                out.write_record([wr.to_string(), wt.to_string(), self.values[r][c].to_string()])?;
            }
        }
        out.flush().map_err(|e| Error::io("<surface csv>", e))
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Rbf {
    lo: [f64; 2],
    span: [f64; 2],
    centers: Vec<[f64; 2]>,
    alpha: Vec<f64>,
    trend: [f64; 3],
    width: f64,
}

impl Rbf {
    fn normalize(&self, x: f64, y: f64) -> [f64; 2] {
        [(x - self.lo[0]) / self.span[0], (y - self.lo[1]) / self.span[1]]
    }

    fn kernel(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let d2 = (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2);
        (-d2 / (2.0 * self.width * self.width)).exp()
    }

    fn eval(&self, x: f64, y: f64) -> f64 {
        let p = self.normalize(x, y);
        let trend = self.trend[0] + self.trend[1] * p[0] + self.trend[2] * p[1];
        trend
            + self
                .centers
                .iter()
                .zip(&self.alpha)
                .map(|(c, a)| a * self.kernel(p, *c))
                .sum::<f64>()
    }

    fn fit(points: &[(f64, f64, f64)], width: f64, ridge: f64) -> Result<Self> {
        let bounds = |f: fn(&(f64, f64, f64)) -> f64| {
            let lo = points.iter().map(f).fold(f64::INFINITY, f64::min);
            let hi = points.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
            (lo, if hi > lo { hi - lo } else { 1.0 })
        };
        let (lx, sx) = bounds(|p| p.0);
        let (ly, sy) = bounds(|p| p.1);
        let mut rbf = Rbf {
            lo: [lx, ly],
            span: [sx, sy],
            centers: Vec::new(),
            alpha: Vec::new(),
            trend: [0.0; 3],
            width,
        };
        rbf.centers = points.iter().map(|p| rbf.normalize(p.0, p.1)).collect();

        // least-squares affine trend
        let mut ata = vec![0.0; 9];
        let mut atb = vec![0.0; 3];
        for (c, p) in rbf.centers.iter().zip(points) {
            let row = [1.0, c[0], c[1]];
            for i in 0..3 {
                atb[i] += row[i] * p.2;
                for j in 0..3 {
                    ata[i * 3 + j] += row[i] * row[j];
                }
            }
        }
        for i in 0..3 {
            ata[i * 4] += 1e-12;
        }
        let t = cholesky_solve(ata, atb, 3)?;
        rbf.trend = [t[0], t[1], t[2]];

        let n = points.len();
        let resid: Vec<f64> = rbf
            .centers
            .iter()
            .zip(points)
            .map(|(c, p)| p.2 - (rbf.trend[0] + rbf.trend[1] * c[0] + rbf.trend[2] * c[1]))
            .collect();
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                k[i * n + j] = rbf.kernel(rbf.centers[i], rbf.centers[j]);
            }
            k[i * n + i] += ridge;
        }
        rbf.alpha = cholesky_solve(k, resid, n)?;
        Ok(rbf)
    }
}

/// Solve `A x = b` for symmetric positive definite `A` (row-major, n x n).
fn cholesky_solve(mut a: Vec<f64>, mut b: Vec<f64>, n: usize) -> Result<Vec<f64>> {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > 0.0) {
            return Err(Error::InvalidInput("interpolation system is not positive definite".into()));
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    for i in 0..n {
        for k in 0..i {
            b[i] -= a[i * n + k] * b[k];
        }
        b[i] /= a[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            b[i] -= a[k * n + i] * b[k];
        }
        b[i] /= a[i * n + i];
    }
    Ok(b)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![(lo + hi) / 2.0],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Sample random teams, measure them, and fit the rating surface. The grid
/// spans the observed range of both metrics.
pub fn colt_surface(cfg: &SurfaceConfig, weights: &ColtWeights) -> Result<Surface> {
    if cfg.n_vectors < 10 {
        return Err(Error::Config("need at least 10 vectors".into()));
    }
    if cfg.games_each == 0 || !(cfg.width > 0.0) || !(cfg.ridge >= 0.0) {
        return Err(Error::Config("games, width must be positive; ridge non-negative".into()));
    }
    let measured: Vec<(f64, Option<f64>, f64)> = (0..cfg.n_vectors as u64)
        .into_par_iter()
        .map(|i| {
            let dist = cfg.scheme.sample(&mut rng::stream(cfg.seed, &[i, 0]));
            let stats = simulate_solitaire(
                &SimOutcomeModel::new(dist),
                cfg.games_each,
                &mut rng::stream(cfg.seed, &[i, 1]),
            );
            (stats.win_rate, stats.win_time, weights.rate(&dist))
        })
        .collect();

    let samples: Vec<SurfaceSample> = measured
        .iter()
        .filter_map(|&(win_rate, wt, colt)| {
            wt.map(|win_time| SurfaceSample {
                win_rate,
                win_time,
                colt,
            })
        })
        .collect();
    if samples.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "only {} vectors won a game; need 3",
            samples.len()
        )));
    }
    let points: Vec<(f64, f64, f64)> = samples
        .iter()
        .map(|s| (s.win_rate, s.win_time, s.colt))
        .collect();
    let fit = Rbf::fit(&points, cfg.width, cfg.ridge)?;

    let range = |f: fn(&SurfaceSample) -> f64| {
        let lo = samples.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = samples.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    };
    let (rlo, rhi) = range(|s| s.win_rate);
    let (tlo, thi) = range(|s| s.win_time);
    let win_rates = linspace(rlo, rhi, cfg.grid_cols);
    let win_times = linspace(tlo, thi, cfg.grid_rows);
    let values = win_times
        .iter()
        .map(|&wt| win_rates.iter().map(|&wr| fit.eval(wr, wt)).collect())
        .collect();

    Ok(Surface {
        excluded: cfg.n_vectors - samples.len(),
        samples,
        win_rates,
        win_times,
        values,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solves_small_system() {
        let a = vec![4.0, 2.0, 2.0, 3.0];
        let x = cholesky_solve(a, vec![2.0, 1.0], 2).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-12 && x[1].abs() < 1e-12);
        assert!(cholesky_solve(vec![0.0], vec![1.0], 1).is_err());
    }

    #[test]
    fn interpolant_passes_through_points() {
        let pts: Vec<(f64, f64, f64)> = (0..12)
            .map(|i| {
                let x = i as f64 / 11.0;
                let y = ((i * 7) % 12) as f64 / 11.0 * 5.0 + 1.0;
                (x, y, (3.0 * x).sin() - 0.2 * y)
            })
            .collect();
        let rbf = Rbf::fit(&pts, 0.2, 1e-12).unwrap();
        for p in &pts {
            assert!((rbf.eval(p.0, p.1) - p.2).abs() < 1e-6);
        }
    }

    #[test]
    fn affine_data_is_reproduced_everywhere() {
        let pts: Vec<(f64, f64, f64)> = (0..10)
            .map(|i| {
                let x = (i % 4) as f64;
                let y = (i / 4) as f64 + 0.3 * x;
                (x, y, 2.0 * x - y + 1.0)
            })
            .collect();
        let rbf = Rbf::fit(&pts, 0.3, 1e-12).unwrap();
        assert!((rbf.eval(1.5, 1.2) - (3.0 - 1.2 + 1.0)).abs() < 1e-6);
    }
}
