use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use rayon::prelude::*;

use super::{check_square_symmetric, Partition, PartitionMeta};
use crate::data::{GroupLayout, RankMatrix};
use crate::error::{param_err, Error, Result};
use crate::tail::seco_partition;

/// Threshold grid used for the loss curve unless another is given.
pub const DEFAULT_TAU_GRID: &str = "0.05:0.0025:0.12";

/// Greedy thresholding of a normalised SECO similarity matrix.
///
/// While groups remain, the most similar remaining pair `(a, b)` is taken (ties
/// go to the lexicographically smallest pair). If its similarity is at most `tau`
/// then `a` becomes a singleton, otherwise the cluster is every remaining `s` with
/// `min(Θ(a,s), Θ(b,s)) >= tau`. The diagonal is treated as 1, so `a` and `b`
/// always belong to their own cluster.
pub fn caice(similarity: &Array2<f64>, tau: f64) -> Result<Partition> {
    let d = check_square_symmetric(similarity)?;
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(param_err!("threshold tau={tau} must be positive"));
    }
    let entry = |a: usize, b: usize| if a == b { 1.0 } else { similarity[[a, b]] };

    let mut alive = vec![true; d];
    let mut remaining = d;
    // best[a]: most similar live partner of a, smallest index on ties
    let best_partner = |a: usize, alive: &[bool]| -> Option<(f64, usize)> {
        let mut best: Option<(f64, usize)> = None;
        for b in (0..d).filter(|&b| b != a && alive[b]) {
            let v = entry(a, b);
            if best.is_none_or(|(bv, _)| v > bv) {
                best = Some((v, b));
            }
        }
        best
    };
    let mut best: Vec<Option<(f64, usize)>> = (0..d).map(|a| best_partner(a, &alive)).collect();

    let mut clusters = Vec::new();
    while remaining > 0 {
        let cluster: Vec<usize> = if remaining == 1 {
            vec![alive.iter().position(|&x| x).expect("one group left")]
        } else {
            let mut top: Option<(f64, usize, usize)> = None;
            for a in (0..d).filter(|&a| alive[a]) {
                let (v, b) = best[a].expect("a live partner exists");
                if top.is_none_or(|(tv, _, _)| v > tv) {
                    top = Some((v, a, b));
                }
            }
            let (v, a, b) = top.expect("at least two groups left");
            if v <= tau {
                vec![a]
            } else {
                (0..d)
                    .filter(|&s| alive[s] && entry(a, s).min(entry(b, s)) >= tau)
                    .collect()
            }
        };
        for &g in &cluster {
            alive[g] = false;
        }
        remaining -= cluster.len();
        for a in 0..d {
            if alive[a] && best[a].is_some_and(|(_, b)| !alive[b]) {
                best[a] = best_partner(a, &alive);
            }
        }
        clusters.push(cluster);
    }
    let mut meta = PartitionMeta::named("caice");
    meta.tau = Some(tau);
    Partition::new(clusters, d, meta)
}

/// Parses `start:step:end` (inclusive) or a single value into a threshold grid.
/// Points are rounded to 12 decimals to remove accumulation noise.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
    let num = |s: &str| {
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| param_err!("invalid number {s:?} in grid {spec:?}"))
    };
    match parts.as_slice() {
        [v] => Ok(vec![num(v)?]),
        [start, step, end] => {
            let (start, step, end) = (num(start)?, num(step)?, num(end)?);
            if step.is_nan() || step <= 0.0 || end < start {
                return Err(param_err!("grid {spec:?} is empty"));
            }
            let count = ((end - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..count)
                .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
                .collect())
        }
        _ => Err(param_err!("grid {spec:?} must look like start:step:end")),
    }
}

/// Loss curve over a threshold grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TauCurve {
    pub grid: Vec<f64>,
    /// Partition SECO of `caice(Θ̂, τ)` at each grid point.
    pub seco_values: Vec<f64>,
    /// `ln(1 + SECO(τ) − min SECO)`.
    pub loss: Vec<f64>,
    pub n_clusters: Vec<usize>,
    pub best_tau: f64,
}

impl TauCurve {
    pub fn best_index(&self) -> usize {
        self.grid
            .iter()
            .position(|&t| t == self.best_tau)
            .expect("best tau is on the grid")
    }

    /// CSV with columns `tau,seco,loss`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::from("tau,seco,loss\n");
        for i in 0..self.grid.len() {
            out.push_str(&format!(
                "{},{},{}\n",
                self.grid[i], self.seco_values[i], self.loss[i]
            ));
        }
        std::fs::File::create(path)
            .and_then(|mut f| f.write_all(out.as_bytes()))
            .map_err(|e| Error::io(path, e))
    }
}

/// Runs `caice` at every grid threshold and scores each partition by its
/// empirical SECO, computed with `k_loss` extremes. The best threshold minimises
/// the loss; ties go to the smallest threshold.
pub fn select_tau(
    r: &RankMatrix,
    layout: &GroupLayout,
    similarity: &Array2<f64>,
    grid: &[f64],
    k_loss: usize,
) -> Result<TauCurve> {
    if grid.is_empty() {
        return Err(param_err!("threshold grid is empty"));
    }
    if similarity.nrows() != layout.d() {
        return Err(Error::Matrix(format!(
            "matrix has {} rows but the layout has {} groups",
            similarity.nrows(),
            layout.d()
        )));
    }
    let evaluated: Vec<(f64, usize)> = grid
        .par_iter()
        .map(|&tau| {
            let p = caice(similarity, tau)?;
            Ok((seco_partition(r, layout, &p, k_loss)?, p.len()))
        })
        .collect::<Result<_>>()?;
    let seco_values: Vec<f64> = evaluated.iter().map(|e| e.0).collect();
    let min = seco_values.iter().copied().fold(f64::INFINITY, f64::min);
    let loss: Vec<f64> = seco_values.iter().map(|s| (s - min).ln_1p()).collect();
    let best_tau = grid
        .iter()
        .zip(&seco_values)
        .filter(|(_, &s)| s == min)
        .map(|(&t, _)| t)
        .fold(f64::INFINITY, f64::min);
    Ok(TauCurve {
        grid: grid.to_vec(),
        seco_values,
        loss,
        n_clusters: evaluated.iter().map(|e| e.1).collect(),
        best_tau,
    })
}
