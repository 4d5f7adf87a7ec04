use ndarray::Array2;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{check_dissimilarity, Partition, PartitionMeta};
use crate::error::{param_err, Result};

const MAX_ITER: usize = 1000;

/// Result of a k-medoids run.
#[derive(Debug, Clone)]
pub struct KMedoids {
    pub partition: Partition,
    /// Sorted medoid indices.
    pub medoids: Vec<usize>,
    /// Total dissimilarity of every group to its medoid.
    pub objective: f64,
    /// Objective after initialisation and after every accepted swap.
    pub trace: Vec<f64>,
}

/// Nearest and second-nearest medoid distances of one point.
struct Nearest {
    slot: usize,
    near: f64,
    second: f64,
}

fn nearest(dissim: &Array2<f64>, medoids: &[usize], i: usize) -> Nearest {
    let mut best = Nearest {
        slot: 0,
        near: f64::INFINITY,
        second: f64::INFINITY,
    };
    for (slot, &m) in medoids.iter().enumerate() {
        let v = if i == m { -1.0 } else { dissim[[i, m]] };
        if v < best.near {
            best.second = best.near;
            best.near = v;
            best.slot = slot;
        } else if v < best.second {
            best.second = v;
        }
    }
    // a medoid always belongs to itself
    best.near = best.near.max(0.0);
    best
}

fn objective(dissim: &Array2<f64>, medoids: &[usize]) -> f64 {
    (0..dissim.nrows())
        .map(|i| nearest(dissim, medoids, i).near)
        .sum()
}

/// PAM k-medoids: random initial medoids drawn from `seed`, then best-improvement
/// swaps of one medoid with one non-medoid until no swap lowers the objective.
///
/// Swap candidates are scored in parallel; the best swap is picked by a
/// sequential scan so ties resolve to the lowest (medoid slot, candidate) pair.
pub fn kmedoids(dissim: &Array2<f64>, k: usize, seed: u64) -> Result<KMedoids> {
    let d = check_dissimilarity(dissim)?;
    if k == 0 || k > d {
        return Err(param_err!("number of clusters K={k} must lie in 1..={d}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut medoids: Vec<usize> = sample(&mut rng, d, k).into_vec();
    medoids.sort_unstable();
    let mut current = objective(dissim, &medoids);
    let mut trace = vec![current];

    for _ in 0..MAX_ITER {
        let cache: Vec<Nearest> = (0..d).map(|i| nearest(dissim, &medoids, i)).collect();
        let candidates: Vec<usize> = (0..d).filter(|h| !medoids.contains(h)).collect();
        let scored: Vec<(f64, usize, usize)> = candidates
            .par_iter()
            .map(|&h| {
                let mut best = (f64::INFINITY, 0, h);
                for slot in 0..k {
                    let cost: f64 = cache
                        .iter()
                        .enumerate()
                        .map(|(i, c)| {
                            let to_h = if i == h { 0.0 } else { dissim[[i, h]] };
                            let keep = if c.slot == slot { c.second } else { c.near };
                            to_h.min(keep)
                        })
                        .sum();
                    if cost < best.0 {
                        best = (cost, slot, h);
                    }
                }
                best
            })
            .collect();
        let Some(&(cost, slot, h)) =
            scored
                .iter()
                .fold(None::<&(f64, usize, usize)>, |acc, s| match acc {
                    Some(a) if a.0 <= s.0 => Some(a),
                    _ => Some(s),
                })
        else {
            break;
        };
        if cost >= current - 1e-12 * current.abs().max(1.0) {
            break;
        }
        medoids[slot] = h;
        medoids.sort_unstable();
        current = objective(dissim, &medoids);
        trace.push(current);
    }

    let labels: Vec<usize> = (0..d).map(|i| nearest(dissim, &medoids, i).slot).collect();
    let mut meta = PartitionMeta::named("kmedoids");
    meta.k = Some(k);
    meta.seed = Some(seed);
    meta.note =
        Some("PAM k-medoids on 1 - normalised SECO, used as the quantization baseline".into());
    let mut clusters = vec![Vec::new(); k];
    for (i, &l) in labels.iter().enumerate() {
        clusters[l].push(i);
    }
    Ok(KMedoids {
        partition: Partition::new(clusters, d, meta)?,
        medoids,
        objective: current,
        trace,
    })
}
