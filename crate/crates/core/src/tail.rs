//! Rank-based estimators of extremal dependence.
//!
//! All estimators here count, over the rows of a [`RankMatrix`], how often a
//! column's rank exceeds `n + 0.5 - k`, i.e. belongs to the `k` largest values of
//! that column. With integer ranks this is `rank >= n - k + 1`, which is how it is
//! evaluated. Each column contributes exactly `k` exceedances, so the extremal
//! coefficient of any non-empty column set lies in `[1, n/k]`.
//!
//! For the pairwise SECO matrix, exceedances are stored as row bitsets per group;
//! the joint count of two groups is then the popcount of a word-wise OR.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::Partition;
use crate::data::{block_maxima, format_f64, rank_matrix, Dataset, GroupLayout, RankMatrix};
use crate::error::{param_err, Error, Result};

/// Number of extremes `k` for threshold estimators and, optionally, the block
/// length `m` for the madogram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailParams {
    pub k: usize,
    pub m: Option<usize>,
}

impl TailParams {
    pub fn validate(&self, n: usize) -> Result<()> {
        check_k(n, self.k)?;
        if let Some(m) = self.m {
            if m == 0 || m > n {
                return Err(param_err!("block length m={m} must lie in 1..={n}"));
            }
        }
        Ok(())
    }
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(param_err!("k={k} must lie in 1..={n}"));
    }
    Ok(())
}

fn check_cols(r: &RankMatrix, cols: &[usize]) -> Result<()> {
    if cols.is_empty() {
        return Err(param_err!("column set is empty"));
    }
    if let Some(&c) = cols.iter().find(|&&c| c >= r.q()) {
        return Err(param_err!("column {c} out of range for {} columns", r.q()));
    }
    Ok(())
}

fn check_layout(r: &RankMatrix, layout: &GroupLayout) -> Result<()> {
    if r.q() != layout.q() {
        return Err(Error::Layout(format!(
            "layout covers {} columns but the rank matrix has {}",
            layout.q(),
            r.q()
        )));
    }
    Ok(())
}

/// Set of row indices, one bit per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct RowSet {
    words: Vec<u64>,
}

impl RowSet {
    fn empty(n: usize) -> Self {
        Self {
            words: vec![0; n.div_ceil(64)],
        }
    }

    fn insert(&mut self, row: usize) {
        self.words[row / 64] |= 1 << (row % 64);
    }

    fn union_with(&mut self, other: &RowSet) {
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w |= o;
        }
    }

    pub(crate) fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub(crate) fn union_count(&self, other: &RowSet) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    fn intersection_count(&self, other: &RowSet) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }
}

/// Rows in which column `c` is among its `k` largest values.
fn column_exceedances(r: &RankMatrix, c: usize, k: usize) -> RowSet {
    let threshold = (r.n() - k) as u32;
    let mut set = RowSet::empty(r.n());
    for (i, &rank) in r.column(c).iter().enumerate() {
        if rank > threshold {
            set.insert(i);
        }
    }
    set
}

/// Rows in which at least one of `cols` is extreme.
pub(crate) fn exceedance_set(r: &RankMatrix, cols: &[usize], k: usize) -> RowSet {
    let mut set = RowSet::empty(r.n());
    for &c in cols {
        set.union_with(&column_exceedances(r, c, k));
    }
    set
}

/// Nonparametric extremal coefficient of the column set `cols`: the number of
/// rows where any column exceeds its threshold, divided by `k`.
pub fn ext_coeff_eks(r: &RankMatrix, cols: &[usize], k: usize) -> Result<f64> {
    check_cols(r, cols)?;
    check_k(r.n(), k)?;
    Ok(exceedance_set(r, cols, k).count() as f64 / k as f64)
}

/// Empirical extremal correlation: fraction of the `k` extremes of column `a`
/// that coincide with extremes of column `b`.
pub fn ext_corr(r: &RankMatrix, a: usize, b: usize, k: usize) -> Result<f64> {
    check_cols(r, &[a, b])?;
    if a == b {
        return Err(param_err!(
            "extremal correlation needs two distinct columns"
        ));
    }
    check_k(r.n(), k)?;
    let joint = column_exceedances(r, a, k).intersection_count(&column_exceedances(r, b, k));
    Ok(joint as f64 / k as f64)
}

fn check_group(layout: &GroupLayout, g: usize) -> Result<()> {
    if g >= layout.d() {
        return Err(param_err!(
            "group {g} out of range for {} groups",
            layout.d()
        ));
    }
    Ok(())
}

/// Empirical SECO between groups `a` and `b`: `θ̂(a) + θ̂(b) - θ̂(a,b)`.
pub fn seco_pair(
    r: &RankMatrix,
    layout: &GroupLayout,
    a: usize,
    b: usize,
    k: usize,
) -> Result<f64> {
    check_layout(r, layout)?;
    check_group(layout, a)?;
    check_group(layout, b)?;
    if a == b {
        return Err(param_err!("SECO needs two distinct groups"));
    }
    check_k(r.n(), k)?;
    let sa = exceedance_set(r, layout.group(a), k);
    let sb = exceedance_set(r, layout.group(b), k);
    let shared = sa.count() + sb.count() - sa.union_count(&sb);
    Ok(shared as f64 / k as f64)
}

/// Normalised pairwise SECO matrix with the per-group extremal coefficients it
/// was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct SecoMatrix {
    entries: Array2<f64>,
    thetas: Vec<f64>,
    k: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    thetas: Vec<f64>,
    k: usize,
    d: usize,
}

impl SecoMatrix {
    pub fn d(&self) -> usize {
        self.thetas.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.entries[[a, b]]
    }

    /// `1 - Θ̂` with a zero diagonal, the dissimilarity used by the baselines.
    pub fn dissimilarity(&self) -> Array2<f64> {
        dissimilarity_from_similarity(&self.entries)
    }

    /// Headerless `d × d` CSV of the full matrix.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_matrix_csv(&self.entries, path.as_ref())
    }

    /// JSON sidecar holding `thetas`, `k` and `d`.
    pub fn write_sidecar(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let sidecar = Sidecar {
            thetas: self.thetas.clone(),
            k: self.k,
            d: self.d(),
        };
        let text = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

pub fn dissimilarity_from_similarity(similarity: &Array2<f64>) -> Array2<f64> {
    Array2::from_shape_fn(similarity.dim(), |(a, b)| {
        if a == b {
            0.0
        } else {
            1.0 - similarity[[a, b]]
        }
    })
}

pub fn write_matrix_csv(matrix: &Array2<f64>, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    for row in matrix.rows() {
        let line: Vec<String> = row.iter().map(|v| format_f64(*v)).collect();
        writeln!(out, "{}", line.join(",")).map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Reads a headerless square CSV matrix.
pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<Array2<f64>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut flat = Vec::new();
    let mut rows = 0;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::parse(path, e.to_string()))?;
        for (c, field) in record.iter().enumerate() {
            match field.parse::<f64>() {
                Ok(v) if v.is_finite() => flat.push(v),
                _ => {
                    return Err(Error::InvalidCell {
                        row: i + 1,
                        col: c + 1,
                        value: field.to_string(),
                    })
                }
            }
        }
        rows += 1;
    }
    if rows == 0 || flat.len() != rows * rows {
        return Err(Error::Matrix(format!(
            "{} is not a square matrix",
            path.display()
        )));
    }
    Ok(Array2::from_shape_vec((rows, rows), flat).expect("square by construction"))
}

/// Normalised SECO over all group pairs:
/// `Θ̂(a,b) = SECO(a,b) / min{θ̂(a), θ̂(b)}`, with a unit diagonal.
///
/// Group exceedance sets are built once; each off-diagonal cell is then a single
/// OR-popcount pass. Rows of the matrix are filled in parallel and every cell is
/// computed independently, so the result does not depend on the thread count.
pub fn seco_matrix(r: &RankMatrix, layout: &GroupLayout, k: usize) -> Result<SecoMatrix> {
    check_layout(r, layout)?;
    check_k(r.n(), k)?;
    let d = layout.d();
    let sets: Vec<RowSet> = layout
        .groups()
        .par_iter()
        .map(|g| exceedance_set(r, g, k))
        .collect();
    let counts: Vec<usize> = sets.iter().map(RowSet::count).collect();
    let rows: Vec<Vec<f64>> = (0..d)
        .into_par_iter()
        .map(|a| {
            (0..d)
                .map(|b| {
                    if a == b {
                        1.0
                    } else {
                        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                        let union = sets[lo].union_count(&sets[hi]);
                        let shared = counts[lo] + counts[hi] - union;
                        shared as f64 / counts[lo].min(counts[hi]) as f64
                    }
                })
                .collect()
        })
        .collect();
    let entries = Array2::from_shape_vec((d, d), rows.concat()).expect("d x d by construction");
    let thetas = counts.iter().map(|&c| c as f64 / k as f64).collect();
    Ok(SecoMatrix { entries, thetas, k })
}

/// Empirical SECO of a partition of the groups: the sum of the extremal
/// coefficients of the clusters minus that of all columns together.
pub fn seco_partition(
    r: &RankMatrix,
    layout: &GroupLayout,
    partition: &Partition,
    k: usize,
) -> Result<f64> {
    check_layout(r, layout)?;
    if partition.d() != layout.d() {
        return Err(Error::Partition(format!(
            "partition covers {} groups but the layout has {}",
            partition.d(),
            layout.d()
        )));
    }
    check_k(r.n(), k)?;
    let per_cluster: usize = partition
        .clusters()
        .par_iter()
        .map(|cluster| exceedance_set(r, &layout.columns_of(cluster), k).count())
        .sum();
    let all: Vec<usize> = (0..r.q()).collect();
    let total = exceedance_set(r, &all, k).count();
    Ok((per_cluster - total) as f64 / k as f64)
}

/// Madogram estimate kept as an exact ratio of integers.
///
/// With block ranks `R` among `k` blocks and `p` columns,
/// `ν̂ = Σ_i (p·max_c R_ic − Σ_c R_ic) / (k·p·(k+1))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Madogram {
    numerator: u128,
    denominator: u128,
    blocks: usize,
    columns: usize,
}

impl Madogram {
    pub fn value(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    /// Number of blocks `k`.
    pub fn blocks(&self) -> usize {
        self.blocks
    }

    /// Largest attainable value, `k/(k+1) - 1/2`.
    pub fn upper_bound(&self) -> f64 {
        let k = self.blocks as f64;
        k / (k + 1.0) - 0.5
    }

    /// Exact integer check of `ν̂ <= k/(k+1) - 1/2`.
    pub fn within_bound(&self) -> bool {
        let k = self.blocks as u128;
        2 * self.numerator <= k * self.columns as u128 * (k - 1)
    }

    /// Madogram-based extremal coefficient `(1/2 + ν̂)/(1/2 − ν̂)`, evaluated as a
    /// single division of integers.
    pub fn ext_coeff(&self) -> f64 {
        let two_num = 2 * self.numerator;
        (self.denominator + two_num) as f64 / (self.denominator - two_num) as f64
    }
}

/// Madogram of block-maximum ranks over the columns `cols`.
pub fn madogram(r_block: &RankMatrix, cols: &[usize]) -> Result<Madogram> {
    check_cols(r_block, cols)?;
    let k = r_block.n();
    if k < 2 {
        return Err(param_err!("madogram needs at least 2 blocks, got {k}"));
    }
    let p = cols.len() as u128;
    let numerator = (0..k)
        .map(|i| {
            let (max, sum) = cols.iter().fold((0u128, 0u128), |(mx, s), &c| {
                let rank = r_block.get(i, c) as u128;
                (mx.max(rank), s + rank)
            });
            p * max - sum
        })
        .sum();
    Ok(Madogram {
        numerator,
        denominator: k as u128 * p * (k as u128 + 1),
        blocks: k,
        columns: cols.len(),
    })
}

/// Maps a madogram value to an extremal coefficient: `(0.5 + ν)/(0.5 − ν)`.
///
/// `nu` must lie in `[0, k/(k+1) − 1/2]`; values above the bound by less than
/// `1e-12` are accepted to absorb rounding.
pub fn ext_coeff_mad(nu: f64, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(param_err!("k must be at least 1"));
    }
    let bound = k as f64 / (k as f64 + 1.0) - 0.5;
    if !(0.0..=bound + 1e-12).contains(&nu) {
        return Err(param_err!("madogram value {nu} outside [0, {bound}]"));
    }
    Ok((0.5 + nu) / (0.5 - nu))
}

/// Madogram extremal coefficient of `cols` computed from raw data: block maxima of
/// length `m`, ranked among themselves.
pub fn ext_coeff_madogram(data: &Dataset, cols: &[usize], m: usize) -> Result<Madogram> {
    let maxima = block_maxima(data, m)?;
    madogram(&rank_matrix(&maxima), cols)
}
