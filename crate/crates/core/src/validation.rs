//! Validation harnesses: partition agreement, estimator saturation in high
//! dimension, exact axiom checks on data, and monotonicity of the closed forms.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::clustering::{Partition, PartitionMeta};
use crate::data::{rank_values, Dataset, GroupLayout, RankMatrix};
use crate::error::{param_err, Error, Result};
use crate::models::{row_rng, seco_nested_hr, seco_nested_logistic, Family};
use crate::tail::{
    exceedance_set, ext_coeff_eks, ext_coeff_madogram, seco_matrix, seco_pair, seco_partition,
};

/// Cross-tabulation of two partitions of the same `d` groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    pub counts: Vec<Vec<u64>>,
    pub row_sums: Vec<u64>,
    pub col_sums: Vec<u64>,
    pub total: u64,
}

impl ContingencyTable {
    pub fn new(p1: &Partition, p2: &Partition) -> Result<Self> {
        if p1.d() != p2.d() {
            return Err(Error::Partition(format!(
                "partitions cover {} and {} groups",
                p1.d(),
                p2.d()
            )));
        }
        let l2 = p2.labels();
        let mut counts = vec![vec![0u64; p2.len()]; p1.len()];
        for (g, cluster) in p1.clusters().iter().enumerate() {
            for &x in cluster {
                counts[g][l2[x]] += 1;
            }
        }
        let row_sums = counts.iter().map(|r| r.iter().sum()).collect();
        let col_sums = (0..p2.len())
            .map(|h| counts.iter().map(|r| r[h]).sum())
            .collect();
        Ok(Self {
            counts,
            row_sums,
            col_sums,
            total: p1.d() as u64,
        })
    }
}

fn pairs(x: u64) -> i128 {
    let x = x as i128;
    x * (x - 1) / 2
}

/// Adjusted Rand Index. The raw value is returned and can be negative.
///
/// With `r0 = Σ C(d_gh,2)`, `r1 = Σ C(d_g·,2)`, `r2 = Σ C(d_·h,2)` and
/// `r3 = 2 r1 r2 / (d(d−1))`, `ARI = (r0 − r3)/(½(r1 + r2) − r3)`. Numerator and
/// denominator are scaled by `2d(d−1)` and formed in integers, so an undefined
/// index is detected exactly.
pub fn ari(p1: &Partition, p2: &Partition) -> Result<f64> {
    let t = ContingencyTable::new(p1, p2)?;
    if t.total < 2 {
        return Err(param_err!("ARI needs at least 2 groups"));
    }
    let r0: i128 = t.counts.iter().flatten().map(|&c| pairs(c)).sum();
    let r1: i128 = t.row_sums.iter().map(|&c| pairs(c)).sum();
    let r2: i128 = t.col_sums.iter().map(|&c| pairs(c)).sum();
    let dd = t.total as i128 * (t.total as i128 - 1);
    let num = 2 * r0 * dd - 4 * r1 * r2;
    let den = (r1 + r2) * dd - 4 * r1 * r2;
    if den == 0 {
        return Err(Error::AriUndefined(
            "both partitions are trivial (all singletons or a single cluster)".into(),
        ));
    }
    Ok(num as f64 / den as f64)
}

/// One named check with an optional measured value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: Option<f64>,
    pub detail: String,
}

impl Check {
    pub fn new(
        name: impl Into<String>,
        passed: bool,
        value: Option<f64>,
        detail: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            passed,
            value,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    passed: usize,
    failed: usize,
    details: &'a [Check],
}

impl Report {
    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn passed(&self) -> usize {
        self.checks.iter().filter(|c| c.passed).count()
    }

    pub fn failed(&self) -> usize {
        self.checks.len() - self.passed()
    }

    pub fn all_passed(&self) -> bool {
        self.failed() == 0
    }

    /// `{"passed": .., "failed": .., "details": [..]}`
    pub fn summary_json(&self) -> String {
        let s = Summary {
            passed: self.passed(),
            failed: self.failed(),
            details: &self.checks,
        };
        serde_json::to_string_pretty(&s).expect("report serializes")
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::parse(path, e.to_string()))?;
        let err = |e: csv::Error| Error::parse(path, e.to_string());
        w.write_record(["check", "passed", "value", "detail"])
            .map_err(err)?;
        for c in &self.checks {
            let value = c.value.map(|v| v.to_string()).unwrap_or_default();
            w.write_record([c.name.as_str(), &c.passed.to_string(), &value, &c.detail])
                .map_err(err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// ARI of two partitions together with its symmetry check.
pub fn ari_report(p1: &Partition, p2: &Partition) -> Report {
    let mut report = Report::default();
    match (ari(p1, p2), ari(p2, p1)) {
        (Ok(a), Ok(b)) => {
            report.push(Check::new(
                "ari",
                a <= 1.0,
                Some(a),
                format!("{} vs {} clusters", p1.len(), p2.len()),
            ));
            report.push(Check::new("ari-symmetric", a == b, Some(b), ""));
        }
        (Err(e), _) | (_, Err(e)) => report.push(Check::new("ari", false, None, e.to_string())),
    }
    report
}

/// One grid point of the saturation experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsRow {
    pub n: usize,
    pub d: usize,
    pub theta_eks: f64,
    /// `n/k`
    pub eks_bound: f64,
    pub theta_mad: f64,
    /// Number of blocks, `⌊n/m⌋`.
    pub mad_bound: f64,
    pub nu: f64,
    pub nu_bound: f64,
    pub nu_within_bound: bool,
    /// Extremal coefficient of `d` independent variables.
    pub theta_true: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsTable {
    pub rows: Vec<BoundsRow>,
}

/// Default sample sizes `{100, 150, …, 1000}`.
pub fn default_bounds_grid() -> Vec<usize> {
    (100..=1000).step_by(50).collect()
}

fn dimension(n: usize, exponent: f64) -> usize {
    let x = (n as f64).powf(exponent);
    if (x - x.round()).abs() < 1e-9 {
        x.round() as usize
    } else {
        x.ceil() as usize
    }
}

impl BoundsTable {
    /// One check per row: both estimators within their deterministic bounds.
    pub fn report(&self) -> Report {
        let mut report = Report::default();
        for r in &self.rows {
            report.push(Check::new(
                format!("eks-bound n={}", r.n),
                (1.0..=r.eks_bound).contains(&r.theta_eks),
                Some(r.theta_eks),
                format!("bound {} (theoretical {})", r.eks_bound, r.theta_true),
            ));
            report.push(Check::new(
                format!("mad-bound n={}", r.n),
                r.nu_within_bound && r.theta_mad <= r.mad_bound,
                Some(r.theta_mad),
                format!("nu {} <= {}", r.nu, r.nu_bound),
            ));
        }
        report
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out =
            String::from("n,d,theta_eks,eks_bound,theta_mad,mad_bound,nu,nu_bound,theta_true\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.n,
                r.d,
                r.theta_eks,
                r.eks_bound,
                r.theta_mad,
                r.mad_bound,
                r.nu,
                r.nu_bound,
                r.theta_true
            );
        }
        std::fs::File::create(path)
            .and_then(|mut f| f.write_all(out.as_bytes()))
            .map_err(|e| Error::io(path, e))
    }
}

/// For each `n`, draws `d = ⌈n^exponent⌉` independent uniform columns and records
/// both extremal coefficient estimators over all `d` columns together with their
/// upper bounds. Each grid point uses its own random stream derived from `seed`.
pub fn bounds_experiment(
    n_grid: &[usize],
    exponent: f64,
    k: usize,
    m: usize,
    seed: u64,
) -> Result<BoundsTable> {
    if n_grid.is_empty() {
        return Err(param_err!("sample-size grid is empty"));
    }
    if !(exponent > 0.0 && exponent.is_finite()) {
        return Err(param_err!("exponent {exponent} must be positive"));
    }
    if let Some(n) = n_grid
        .iter()
        .find(|&&n| n < k || n < 2 * m || k == 0 || m == 0)
    {
        return Err(param_err!("n={n} must be at least k={k} and 2m={}", 2 * m));
    }
    let rows = n_grid
        .par_iter()
        .map(|&n| {
            let d = dimension(n, exponent);
            let mut rng = row_rng(seed, n as u64);
            let values = Array2::from_shape_simple_fn((n, d), || rng.random::<f64>());
            let data = Dataset::new(values, GroupLayout::new(vec![(0..d).collect()], d)?)?;
            let all: Vec<usize> = (0..d).collect();
            let theta_eks = ext_coeff_eks(&rank_values(data.values()), &all, k)?;
            let mado = ext_coeff_madogram(&data, &all, m)?;
            Ok(BoundsRow {
                n,
                d,
                theta_eks,
                eks_bound: n as f64 / k as f64,
                theta_mad: mado.ext_coeff(),
                mad_bound: mado.blocks() as f64,
                nu: mado.value(),
                nu_bound: mado.upper_bound(),
                nu_within_bound: mado.within_bound(),
                theta_true: d as f64,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundsTable { rows })
}

/// Strictly increasing map of a value, given the sample size.
type Transform = fn(f64, f64) -> f64;

fn bitwise_eq(a: &Array2<f64>, b: &Array2<f64>) -> bool {
    a.dim() == b.dim() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

/// Exact estimator-level axiom checks on one dataset.
///
/// * A1: reordering groups permutes the SECO matrix accordingly and reordering
///   columns inside groups changes nothing; the SECO of all groups is unchanged.
/// * A2: `0 ≤ SECO(all groups) ≤ min_j Σ_{i≠j} θ̂(i)`, checked on integer counts.
/// * A6: strictly increasing transforms of the data leave the ranks and the SECO
///   matrix bitwise unchanged.
/// * Pairwise: `0 ≤ SECO(a,b) ≤ min{θ̂(a), θ̂(b)}` for every pair.
pub fn axiom_suite(r: &RankMatrix, layout: &GroupLayout, k: usize, seed: u64) -> Result<Report> {
    let base = seco_matrix(r, layout, k)?;
    let d = layout.d();
    let singletons = Partition::singletons(d, PartitionMeta::named("singletons"));
    let base_seco = seco_partition(r, layout, &singletons, k)?;
    let mut rng = row_rng(seed, u64::MAX);
    let mut report = Report::default();

    // A1, groups
    let mut perm: Vec<usize> = (0..d).collect();
    perm.shuffle(&mut rng);
    let permuted = GroupLayout::new(
        perm.iter().map(|&g| layout.group(g).to_vec()).collect(),
        layout.q(),
    )?;
    let pm = seco_matrix(r, &permuted, k)?;
    let mut mismatches = 0;
    for a in 0..d {
        for b in 0..d {
            if pm.get(a, b).to_bits() != base.get(perm[a], perm[b]).to_bits() {
                mismatches += 1;
            }
        }
    }
    let ps = seco_partition(r, &permuted, &singletons, k)?;
    report.push(Check::new(
        "A1-group-permutation",
        mismatches == 0 && ps.to_bits() == base_seco.to_bits(),
        Some(mismatches as f64),
        format!("{mismatches} mismatched entries"),
    ));

    // A1, columns within groups
    let shuffled = GroupLayout::new(
        layout
            .groups()
            .iter()
            .map(|g| {
                let mut g = g.clone();
                g.shuffle(&mut rng);
                g
            })
            .collect(),
        layout.q(),
    )?;
    let sm = seco_matrix(r, &shuffled, k)?;
    let ss = seco_partition(r, &shuffled, &singletons, k)?;
    report.push(Check::new(
        "A1-column-permutation",
        bitwise_eq(sm.entries(), base.entries())
            && sm.thetas() == base.thetas()
            && ss.to_bits() == base_seco.to_bits(),
        None,
        "",
    ));

    // A2 on integer counts
    let all: Vec<usize> = (0..r.q()).collect();
    let joint = exceedance_set(r, &all, k).count();
    let counts: Vec<usize> = layout
        .groups()
        .iter()
        .map(|g| exceedance_set(r, g, k).count())
        .collect();
    let sum: usize = counts.iter().sum();
    let upper = counts.iter().map(|c| sum - c).min().unwrap_or(0);
    let seco_count = sum as i64 - joint as i64;
    report.push(Check::new(
        "A2-bounds",
        seco_count >= 0 && seco_count as usize <= upper,
        Some(base_seco),
        format!("0 <= {seco_count} <= {upper} (counts)"),
    ));

    // A6
    let as_values = Array2::from_shape_fn((r.n(), r.q()), |(i, c)| r.get(i, c) as f64);
    let n = r.n() as f64;
    let transforms: [(&str, Transform); 4] = [
        ("affine", |x, _| 2.0 * x + 1.0),
        ("exp", |x, n| (x / n).exp()),
        ("cube", |x, n| (x / n - 0.5).powi(3)),
        ("log", |x, _| x.ln()),
    ];
    for (name, t) in transforms {
        let moved = as_values.mapv(|x| t(x, n));
        let rr = rank_values(&moved);
        let ok = rr == *r && bitwise_eq(seco_matrix(&rr, layout, k)?.entries(), base.entries());
        report.push(Check::new(format!("A6-transform-{name}"), ok, None, ""));
    }
    // a different random transform per column
    let mixed = Array2::from_shape_fn(as_values.dim(), |(i, c)| {
        let (_, t) = transforms[c % transforms.len()];
        t(as_values[[i, c]], n)
    });
    let rr = rank_values(&mixed);
    report.push(Check::new(
        "A6-transform-mixed",
        rr == *r && bitwise_eq(seco_matrix(&rr, layout, k)?.entries(), base.entries()),
        None,
        "",
    ));

    // pairwise bound: normalised entries in [0, 1] plus direct evaluation on a sample
    let mut violations = base
        .entries()
        .iter()
        .filter(|v| !(0.0..=1.0).contains(*v))
        .count();
    if d >= 2 {
        for _ in 0..d.min(200) {
            let a = rng.random_range(0..d);
            let b = (a + rng.random_range(1..d)) % d;
            let s = seco_pair(r, layout, a, b, k)?;
            if !(s >= 0.0 && s <= base.thetas()[a].min(base.thetas()[b])) {
                violations += 1;
            }
        }
    }
    report.push(Check::new(
        "pairwise-bound",
        violations == 0,
        Some(violations as f64),
        format!("{violations} violations"),
    ));
    Ok(report)
}

/// Default mother and child parameter grids for the coherence check.
pub fn default_coherence_grids(family: Family) -> (Vec<f64>, Vec<f64>) {
    match family {
        Family::Logistic => (
            vec![0.91, 0.93, 0.95, 0.97, 0.99],
            (1..=90).map(|i| i as f64 / 100.0).collect(),
        ),
        Family::HuslerReiss => (
            vec![6.0, 6.25, 6.5, 6.75, 7.0],
            (1..=600).map(|i| i as f64 / 100.0).collect(),
        ),
    }
}

/// Every `step`-th grid point, starting with the first.
pub fn thin(grid: &[f64], step: usize) -> Vec<f64> {
    grid.iter().step_by(step.max(1)).copied().collect()
}

/// Checks that the closed-form SECO decreases strictly, by more than `1e-12`,
/// along the sorted mother grid at every pair of child parameters.
pub fn coherence_levelsets(
    family: Family,
    mother_grid: &[f64],
    child_grid: &[f64],
) -> Result<Report> {
    if mother_grid.is_empty() || child_grid.is_empty() {
        return Err(param_err!("coherence grids must be non-empty"));
    }
    let mut mothers = mother_grid.to_vec();
    mothers.sort_by(f64::total_cmp);
    if family == Family::Logistic {
        let max_child = child_grid.iter().copied().fold(f64::MIN, f64::max);
        if max_child > mothers[0] {
            return Err(param_err!(
                "child parameter {max_child} exceeds mother parameter {}",
                mothers[0]
            ));
        }
    }
    let seco = |m: f64, a: f64, b: f64| match family {
        Family::Logistic => seco_nested_logistic(m, a, b),
        Family::HuslerReiss => seco_nested_hr(m, a, b),
    };
    let results: Vec<(usize, Option<String>)> = child_grid
        .par_iter()
        .map(|&a| {
            let mut evaluations = 0;
            let mut first = None;
            for &b in child_grid {
                let values = mothers
                    .iter()
                    .map(|&m| seco(m, a, b))
                    .collect::<Result<Vec<_>>>()?;
                evaluations += values.len();
                for (i, w) in values.windows(2).enumerate() {
                    let drop = w[0] - w[1];
                    if (drop.is_nan() || drop <= 1e-12) && first.is_none() {
                        first = Some(format!(
                            "children ({a}, {b}): {} at {} vs {} at {}",
                            w[0],
                            mothers[i],
                            w[1],
                            mothers[i + 1]
                        ));
                    }
                }
            }
            Ok((evaluations, first))
        })
        .collect::<Result<_>>()?;
    let evaluations: usize = results.iter().map(|r| r.0).sum();
    let failures: Vec<&String> = results.iter().filter_map(|r| r.1.as_ref()).collect();
    let mut report = Report::default();
    report.push(Check::new(
        format!("{family:?}-monotone-in-mother"),
        failures.is_empty(),
        Some(failures.len() as f64),
        match failures.first() {
            Some(f) => format!("{} child rows violate, first: {f}", failures.len()),
            None => format!("{evaluations} evaluations"),
        },
    ));
    Ok(report)
}
