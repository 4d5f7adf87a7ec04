use std::fmt;
use std::str::FromStr;

use ndarray::Array2;

use super::{check_dissimilarity, Partition, PartitionMeta};
use crate::error::{param_err, Error, Result};

/// Between-cluster dissimilarity used when merging.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Linkage {
    #[default]
    Average,
    Single,
    Complete,
}

impl FromStr for Linkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "average" => Ok(Linkage::Average),
            "single" => Ok(Linkage::Single),
            "complete" => Ok(Linkage::Complete),
            _ => Err(param_err!(
                "unknown linkage {s:?} (average, single, complete)"
            )),
        }
    }
}

impl fmt::Display for Linkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Linkage::Average => "average",
            Linkage::Single => "single",
            Linkage::Complete => "complete",
        })
    }
}

/// Agglomerative clustering from `d` singletons down to `k` clusters.
///
/// Each cluster lives in the slot of its smallest member, so breaking ties on the
/// smallest slot pair is the same as breaking them on cluster index. Linkage
/// distances are maintained with the Lance-Williams updates.
pub fn hclust(dissim: &Array2<f64>, k: usize, linkage: Linkage) -> Result<Partition> {
    let d = check_dissimilarity(dissim)?;
    if k == 0 || k > d {
        return Err(param_err!("number of clusters K={k} must lie in 1..={d}"));
    }
    let mut dist = dissim.clone();
    let mut members: Vec<Vec<usize>> = (0..d).map(|g| vec![g]).collect();
    let mut active: Vec<usize> = (0..d).collect();

    while active.len() > k {
        let mut best: Option<(f64, usize, usize)> = None;
        for (x, &i) in active.iter().enumerate() {
            for &j in &active[x + 1..] {
                let v = dist[[i, j]];
                if best.is_none_or(|(bv, _, _)| v < bv) {
                    best = Some((v, i, j));
                }
            }
        }
        let (_, i, j) = best.expect("at least two clusters");
        let (ni, nj) = (members[i].len() as f64, members[j].len() as f64);
        for &l in active.iter().filter(|&&l| l != i && l != j) {
            let (di, dj) = (dist[[i, l]], dist[[j, l]]);
            let merged = match linkage {
                Linkage::Average => (ni * di + nj * dj) / (ni + nj),
                Linkage::Single => di.min(dj),
                Linkage::Complete => di.max(dj),
            };
            dist[[i, l]] = merged;
            dist[[l, i]] = merged;
        }
        let moved = std::mem::take(&mut members[j]);
        members[i].extend(moved);
        active.retain(|&l| l != j);
    }

    let clusters = active.iter().map(|&i| members[i].clone()).collect();
    let mut meta = PartitionMeta::named("hclust");
    meta.k = Some(k);
    meta.linkage = Some(linkage.to_string());
    Partition::new(clusters, d, meta)
}
