//! Datasets of grouped, jointly observed time series and their column-wise ranks.
//!
//! A [`Dataset`] is an `n × q` matrix of finite observations (rows are time steps)
//! together with a [`GroupLayout`] that assigns each of the `q` columns to one of
//! `d` groups (for instance the precipitation and wind columns of one pixel).
//! Every tail estimator in this crate consumes the [`RankMatrix`] of a dataset
//! and never the raw values.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param_err, Error, Result};

/// Assignment of the `q` dataset columns to `d` ordered, disjoint groups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct GroupLayout {
    groups: Vec<Vec<usize>>,
    q: usize,
}

impl GroupLayout {
    /// Validates that `groups` is a partition of `0..q` into non-empty groups.
    pub fn new(groups: Vec<Vec<usize>>, q: usize) -> Result<Self> {
        let mut seen = vec![false; q];
        for (j, group) in groups.iter().enumerate() {
            if group.is_empty() {
                return Err(Error::Layout(format!("group {} is empty", j + 1)));
            }
            for &c in group {
                if c >= q {
                    return Err(Error::Layout(format!(
                        "index {c} out of range for {q} columns"
                    )));
                }
                if seen[c] {
                    return Err(Error::Layout(format!("index {c} repeated")));
                }
                seen[c] = true;
            }
        }
        if let Some(c) = seen.iter().position(|s| !s) {
            return Err(Error::Layout(format!(
                "column {c} is not assigned to any group"
            )));
        }
        Ok(Self { groups, q })
    }

    /// Builds a layout from raw group lists, inferring `q` from the largest index.
    pub fn from_groups(groups: Vec<Vec<usize>>) -> Result<Self> {
        let q = groups.iter().flatten().max().map_or(0, |&m| m + 1);
        Self::new(groups, q)
    }

    /// One group per column.
    pub fn singletons(q: usize) -> Self {
        Self {
            groups: (0..q).map(|c| vec![c]).collect(),
            q,
        }
    }

    /// Consecutive groups of the given sizes: `[2, 1]` gives `[[0, 1], [2]]`.
    pub fn contiguous(sizes: &[usize]) -> Result<Self> {
        let mut groups = Vec::with_capacity(sizes.len());
        let mut start = 0;
        for &p in sizes {
            groups.push((start..start + p).collect());
            start += p;
        }
        Self::new(groups, start)
    }

    pub fn d(&self) -> usize {
        self.groups.len()
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn group(&self, j: usize) -> &[usize] {
        &self.groups[j]
    }

    /// All columns of the given groups, in group order.
    pub fn columns_of(&self, groups: &[usize]) -> Vec<usize> {
        groups
            .iter()
            .flat_map(|&g| self.groups[g].iter().copied())
            .collect()
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::parse(path, e.to_string()))
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(&self.groups).expect("layout serializes");
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

impl TryFrom<Vec<Vec<usize>>> for GroupLayout {
    type Error = Error;

    fn try_from(groups: Vec<Vec<usize>>) -> Result<Self> {
        Self::from_groups(groups)
    }
}

impl From<GroupLayout> for Vec<Vec<usize>> {
    fn from(layout: GroupLayout) -> Self {
        layout.groups
    }
}

/// `n` time steps of `q` finite observations grouped by a [`GroupLayout`].
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Array2<f64>,
    layout: GroupLayout,
}

impl Dataset {
    pub fn new(values: Array2<f64>, layout: GroupLayout) -> Result<Self> {
        let (n, q) = values.dim();
        if n < 2 {
            return Err(param_err!("a dataset needs at least 2 rows, got {n}"));
        }
        if q != layout.q() {
            return Err(Error::Layout(format!(
                "layout covers {} columns but the data has {q}",
                layout.q()
            )));
        }
        if let Some(((i, c), v)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidCell {
                row: i + 1,
                col: c + 1,
                value: v.to_string(),
            });
        }
        Ok(Self { values, layout })
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn q(&self) -> usize {
        self.values.ncols()
    }

    pub fn d(&self) -> usize {
        self.layout.d()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn layout(&self) -> &GroupLayout {
        &self.layout
    }

    pub fn into_parts(self) -> (Array2<f64>, GroupLayout) {
        (self.values, self.layout)
    }

    /// Writes the wide CSV format read by [`load_dataset`]. Header names are
    /// `g<group>_<variable>`, both 1-based.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        let mut header = vec![String::new(); self.q()];
        for (j, group) in self.layout.groups().iter().enumerate() {
            for (l, &c) in group.iter().enumerate() {
                header[c] = format!("g{}_{}", j + 1, l + 1);
            }
        }
        let io = |e| Error::io(path, e);
        writeln!(out, "{}", header.join(",")).map_err(io)?;
        let mut line = String::new();
        for row in self.values.rows() {
            line.clear();
            for (c, v) in row.iter().enumerate() {
                if c > 0 {
                    line.push(',');
                }
                line.push_str(&format_f64(*v));
            }
            writeln!(out, "{line}").map_err(io)?;
        }
        out.flush().map_err(io)
    }
}

/// Shortest round-tripping decimal, switching to exponent notation for very
/// small or very large magnitudes.
pub fn format_f64(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Reads a wide CSV (one header row, numeric body) and a JSON group layout.
pub fn load_dataset(path: impl AsRef<Path>, layout_path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let layout = GroupLayout::read_json(layout_path.as_ref())?;
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(file));
    let q = reader
        .headers()
        .map_err(|e| Error::parse(path, e.to_string()))?
        .len();
    if q != layout.q() {
        return Err(Error::Layout(format!(
            "layout covers {} columns but {} has {q}",
            layout.q(),
            path.display()
        )));
    }
    let mut flat = Vec::new();
    let mut n = 0;
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
        n += 1;
    }
    let values = Array2::from_shape_vec((n, q), flat).expect("rectangular by construction");
    Dataset::new(values, layout)
}

/// Column-wise ranks in `1..=n`, stored column-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankMatrix {
    n: usize,
    q: usize,
    ranks: Vec<u32>,
}

impl RankMatrix {
    /// Builds a rank matrix from columns that must each be a permutation of `1..=n`.
    pub fn from_columns(columns: Vec<Vec<u32>>) -> Result<Self> {
        let q = columns.len();
        let n = columns.first().map_or(0, Vec::len);
        if q == 0 || n == 0 {
            return Err(param_err!("rank matrix must be non-empty"));
        }
        let mut ranks = Vec::with_capacity(n * q);
        for (c, col) in columns.into_iter().enumerate() {
            if col.len() != n {
                return Err(param_err!(
                    "rank column {c} has length {} != {n}",
                    col.len()
                ));
            }
            let mut seen = vec![false; n];
            for &r in &col {
                let r = r as usize;
                if r == 0 || r > n || seen[r - 1] {
                    return Err(param_err!(
                        "rank column {c} is not a permutation of 1..={n}"
                    ));
                }
                seen[r - 1] = true;
            }
            ranks.extend(col);
        }
        Ok(Self { n, q, ranks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn column(&self, c: usize) -> &[u32] {
        &self.ranks[c * self.n..(c + 1) * self.n]
    }

    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.ranks[col * self.n + row]
    }
}

/// Ranks each column; ties go to the earlier row.
pub fn rank_matrix(data: &Dataset) -> RankMatrix {
    rank_values(data.values())
}

pub(crate) fn rank_values(values: &Array2<f64>) -> RankMatrix {
    let (n, q) = values.dim();
    let columns: Vec<Vec<u32>> = (0..q)
        .into_par_iter()
        .map(|c| {
            let col = values.column(c).to_vec();
            let mut order: Vec<u32> = (0..n as u32).collect();
            // stable: equal values keep row order
            order.sort_by(|&a, &b| {
                col[a as usize]
                    .partial_cmp(&col[b as usize])
                    .expect("finite values")
            });
            let mut ranks = vec![0u32; n];
            for (pos, &row) in order.iter().enumerate() {
                ranks[row as usize] = pos as u32 + 1;
            }
            ranks
        })
        .collect();
    RankMatrix {
        n,
        q,
        ranks: columns.concat(),
    }
}

/// Column-wise maxima over consecutive blocks of `m` rows. Trailing rows that do
/// not fill a block are dropped.
pub fn block_maxima(data: &Dataset, m: usize) -> Result<Dataset> {
    let n = data.n();
    if m == 0 || m > n {
        return Err(param_err!("block length m={m} must lie in 1..={n}"));
    }
    let k = n / m;
    if k < 2 {
        return Err(param_err!(
            "block length m={m} leaves {k} block(s) of {n} rows; at least 2 are needed"
        ));
    }
    let values = data.values();
    let maxima = Array2::from_shape_fn((k, data.q()), |(i, c)| {
        (i * m..(i + 1) * m)
            .map(|t| values[[t, c]])
            .fold(f64::NEG_INFINITY, f64::max)
    });
    Dataset::new(maxima, data.layout.clone())
}
