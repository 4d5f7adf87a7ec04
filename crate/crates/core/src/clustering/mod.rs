//! Partitions of the `d` groups and the algorithms that produce them.

mod caice;
mod hclust;
mod kmedoids;
mod silhouette;

use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use caice::{caice, parse_grid, select_tau, TauCurve, DEFAULT_TAU_GRID};
pub use hclust::{hclust, Linkage};
pub use kmedoids::{kmedoids, KMedoids};
pub use silhouette::{choose_k, silhouette, KMethod, Silhouette, SilhouetteTable};

/// Provenance recorded alongside a partition.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PartitionMeta {
    pub algorithm: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linkage: Option<String>,
    /// `"user"` or `"choose_k"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl PartitionMeta {
    pub fn named(algorithm: &str) -> Self {
        Self {
            algorithm: algorithm.to_string(),
            ..Self::default()
        }
    }
}

/// Disjoint, non-empty clusters of group indices covering `0..d`. Clusters keep
/// the order in which they were produced; members are sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    clusters: Vec<Vec<usize>>,
    d: usize,
    meta: PartitionMeta,
}

#[derive(Serialize, Deserialize)]
struct PartitionFile {
    #[serde(flatten)]
    meta: PartitionMeta,
    clusters: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(mut clusters: Vec<Vec<usize>>, d: usize, meta: PartitionMeta) -> Result<Self> {
        let mut seen = vec![false; d];
        for cluster in &mut clusters {
            if cluster.is_empty() {
                return Err(Error::Partition("empty cluster".into()));
            }
            cluster.sort_unstable();
            for &g in cluster.iter() {
                if g >= d {
                    return Err(Error::Partition(format!(
                        "group {g} out of range for d={d}"
                    )));
                }
                if std::mem::replace(&mut seen[g], true) {
                    return Err(Error::Partition(format!("group {g} appears twice")));
                }
            }
        }
        if let Some(g) = seen.iter().position(|s| !s) {
            return Err(Error::Partition(format!("group {g} is not covered")));
        }
        Ok(Self { clusters, d, meta })
    }

    /// Builds a partition from one cluster label per group.
    pub fn from_labels(labels: &[usize], meta: PartitionMeta) -> Result<Self> {
        let mut order: Vec<usize> = Vec::new();
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        for (g, &l) in labels.iter().enumerate() {
            match order.iter().position(|&o| o == l) {
                Some(i) => clusters[i].push(g),
                None => {
                    order.push(l);
                    clusters.push(vec![g]);
                }
            }
        }
        Self::new(clusters, labels.len(), meta)
    }

    pub fn singletons(d: usize, meta: PartitionMeta) -> Self {
        Self {
            clusters: (0..d).map(|g| vec![g]).collect(),
            d,
            meta,
        }
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn meta(&self) -> &PartitionMeta {
        &self.meta
    }

    pub fn with_meta(mut self, meta: PartitionMeta) -> Self {
        self.meta = meta;
        self
    }

    /// Cluster index of each group.
    pub fn labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.d];
        for (i, cluster) in self.clusters.iter().enumerate() {
            for &g in cluster {
                labels[g] = i;
            }
        }
        labels
    }

    /// Clusters ordered by their smallest member, for order-free comparison.
    pub fn canonical(&self) -> Vec<Vec<usize>> {
        let mut c = self.clusters.clone();
        c.sort_unstable_by_key(|cl| cl[0]);
        c
    }

    /// True when both partitions group the same elements, whatever the order.
    pub fn same_clusters(&self, other: &Partition) -> bool {
        self.d == other.d && self.canonical() == other.canonical()
    }

    /// JSON with 1-based group ids.
    pub fn to_json(&self) -> String {
        let file = PartitionFile {
            meta: self.meta.clone(),
            clusters: self
                .clusters
                .iter()
                .map(|c| c.iter().map(|g| g + 1).collect())
                .collect(),
        };
        serde_json::to_string(&file).expect("partition serializes")
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, String> {
        let file: PartitionFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let d = file.clusters.iter().map(Vec::len).sum();
        let clusters = file
            .clusters
            .into_iter()
            .map(|c| {
                c.into_iter()
                    .map(|g| g.checked_sub(1).ok_or("group ids are 1-based".to_string()))
                    .collect::<std::result::Result<Vec<_>, _>>()
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(clusters, d, file.meta).map_err(|e| e.to_string())
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|m| Error::parse(path, m))
    }
}

/// Checks that `m` is square, symmetric, and finite.
pub(crate) fn check_square_symmetric(m: &Array2<f64>) -> Result<usize> {
    let (rows, cols) = m.dim();
    if rows != cols || rows == 0 {
        return Err(Error::Matrix(format!(
            "expected a non-empty square matrix, got {rows}x{cols}"
        )));
    }
    for a in 0..rows {
        for b in 0..rows {
            let v = m[[a, b]];
            if !v.is_finite() {
                return Err(Error::Matrix(format!("entry ({a},{b}) is not finite")));
            }
            if v != m[[b, a]] {
                return Err(Error::Matrix(format!(
                    "matrix is not symmetric at ({a},{b})"
                )));
            }
        }
    }
    Ok(rows)
}

/// Checks a dissimilarity matrix: symmetric, zero diagonal, non-negative.
pub fn check_dissimilarity(m: &Array2<f64>) -> Result<usize> {
    let d = check_square_symmetric(m)?;
    for a in 0..d {
        if m[[a, a]] != 0.0 {
            return Err(Error::Matrix(format!("diagonal entry {a} is not zero")));
        }
    }
    if m.iter().any(|&v| v < 0.0) {
        return Err(Error::Matrix("negative dissimilarity".into()));
    }
    Ok(d)
}
