use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use rayon::prelude::*;

use super::{check_dissimilarity, hclust, kmedoids, Linkage, Partition};
use crate::error::{param_err, Error, Result};

/// Per-group silhouette values and their mean.
#[derive(Debug, Clone, PartialEq)]
pub struct Silhouette {
    pub values: Vec<f64>,
    pub average: f64,
}

/// Silhouette `s(i) = (b − a)/max(a, b)`, where `a` is the mean dissimilarity to
/// the rest of the own cluster and `b` the smallest mean dissimilarity to another
/// cluster. Members of singleton clusters score 0.
pub fn silhouette(dissim: &Array2<f64>, p: &Partition) -> Result<Silhouette> {
    let d = check_dissimilarity(dissim)?;
    if p.d() != d {
        return Err(Error::Partition(format!(
            "partition covers {} groups but the matrix has {d}",
            p.d()
        )));
    }
    if p.len() < 2 {
        return Err(param_err!("silhouette needs at least 2 clusters"));
    }
    let labels = p.labels();
    let values: Vec<f64> = (0..d)
        .map(|i| {
            let own = &p.clusters()[labels[i]];
            if own.len() == 1 {
                return 0.0;
            }
            let mean_to = |cluster: &[usize]| {
                let (sum, n) = cluster
                    .iter()
                    .filter(|&&j| j != i)
                    .fold((0.0, 0usize), |(s, n), &j| (s + dissim[[i, j]], n + 1));
                sum / n as f64
            };
            let a = mean_to(own);
            let b = p
                .clusters()
                .iter()
                .enumerate()
                .filter(|(c, _)| *c != labels[i])
                .map(|(_, cl)| mean_to(cl))
                .fold(f64::INFINITY, f64::min);
            let scale = a.max(b);
            if scale == 0.0 {
                0.0
            } else {
                (b - a) / scale
            }
        })
        .collect();
    let average = values.iter().sum::<f64>() / d as f64;
    Ok(Silhouette { values, average })
}

/// Clustering method scored by [`choose_k`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KMethod {
    Hclust(Linkage),
    Kmedoids,
}

impl KMethod {
    pub fn partition(&self, dissim: &Array2<f64>, k: usize, seed: u64) -> Result<Partition> {
        match *self {
            KMethod::Hclust(linkage) => hclust(dissim, k, linkage),
            KMethod::Kmedoids => Ok(kmedoids(dissim, k, seed)?.partition),
        }
    }
}

/// Average silhouette for every candidate `K`.
#[derive(Debug, Clone)]
pub struct SilhouetteTable {
    /// `(K, average silhouette)` in the order of the requested range.
    pub rows: Vec<(usize, f64)>,
    pub best_k: usize,
    pub best_partition: Partition,
}

impl SilhouetteTable {
    /// CSV with columns `K,silhouette`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::from("K,silhouette\n");
        for (k, s) in &self.rows {
            out.push_str(&format!("{k},{s}\n"));
        }
        std::fs::File::create(path)
            .and_then(|mut f| f.write_all(out.as_bytes()))
            .map_err(|e| Error::io(path, e))
    }
}

/// Picks the `K` with the largest average silhouette. Averages within `1e-12`
/// of the maximum count as ties, which go to the smallest `K`.
pub fn choose_k(
    dissim: &Array2<f64>,
    k_range: &[usize],
    method: KMethod,
    seed: u64,
) -> Result<SilhouetteTable> {
    let d = check_dissimilarity(dissim)?;
    if k_range.is_empty() {
        return Err(param_err!("K range is empty"));
    }
    if let Some(k) = k_range.iter().find(|&&k| k < 2 || k > d) {
        return Err(param_err!("K={k} outside 2..={d}"));
    }
    let scored: Vec<(usize, f64, Partition)> = k_range
        .par_iter()
        .map(|&k| {
            let p = method.partition(dissim, k, seed)?;
            let s = silhouette(dissim, &p)?;
            Ok((k, s.average, p))
        })
        .collect::<Result<_>>()?;
    let max = scored.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let best = scored
        .iter()
        .filter(|s| s.1 >= max - 1e-12)
        .min_by_key(|s| s.0)
        .expect("non-empty range");
    let mut best_partition = best.2.clone();
    let mut meta = best_partition.meta().clone();
    meta.k_source = Some("choose_k".into());
    best_partition = best_partition.with_meta(meta);
    Ok(SilhouetteTable {
        rows: scored.iter().map(|s| (s.0, s.1)).collect(),
        best_k: best.0,
        best_partition,
    })
}
