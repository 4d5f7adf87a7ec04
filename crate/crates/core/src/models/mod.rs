//! Parametric extreme-value models used for closed-form checks and simulation.
//!
//! A [`NestedModelSpec`] describes a two-level model: a mother stable tail
//! dependence function applied across groups, and one child function per group.
//! For the logistic family,
//!
//! `L(x) = ( Σ_g ( Σ_{ℓ∈g} x_ℓ^{1/α_g} )^{α_g/α₀} )^{α₀}`,
//!
//! which requires `α_g ≤ α₀` for every group. The Hüsler-Reiss family is
//! bivariate only and is available through closed forms, not sampling.

mod sample;
mod stdf;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{param_err, Error, Result};

pub(crate) use sample::row_rng;
pub use sample::{sample_ai_blocks, sample_logistic, sample_nested_logistic};
pub use stdf::{
    normal_cdf, normal_sf, seco_nested_hr, seco_nested_logistic, stdf_hr, stdf_logistic, theta_hr,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Logistic,
    #[serde(alias = "hr", alias = "husler-reiss")]
    HuslerReiss,
}

/// Parameters of a (nested) logistic or Hüsler-Reiss model.
///
/// JSON form: `{"family":"logistic","mother":0.95,"children":[0.4,0.6],"sizes":[2,2]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct NestedModelSpec {
    family: Family,
    mother: f64,
    children: Vec<f64>,
    sizes: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    family: Family,
    mother: f64,
    children: Vec<f64>,
    sizes: Vec<usize>,
}

impl TryFrom<RawSpec> for NestedModelSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        Self::new(raw.family, raw.mother, raw.children, raw.sizes)
    }
}

impl From<NestedModelSpec> for RawSpec {
    fn from(s: NestedModelSpec) -> Self {
        RawSpec {
            family: s.family,
            mother: s.mother,
            children: s.children,
            sizes: s.sizes,
        }
    }
}

impl NestedModelSpec {
    pub fn new(family: Family, mother: f64, children: Vec<f64>, sizes: Vec<usize>) -> Result<Self> {
        if children.is_empty() || children.len() != sizes.len() {
            return Err(param_err!(
                "need one child parameter per group ({} parameters, {} sizes)",
                children.len(),
                sizes.len()
            ));
        }
        if sizes.contains(&0) {
            return Err(param_err!("group sizes must be at least 1"));
        }
        match family {
            Family::Logistic => {
                for &a in children.iter().chain([&mother]) {
                    if !(a > 0.0 && a <= 1.0) {
                        return Err(param_err!("logistic parameter {a} outside (0, 1]"));
                    }
                }
                if let Some(a) = children.iter().find(|&&a| a > mother) {
                    return Err(param_err!(
                        "nesting requires every child parameter <= mother {mother}, got {a}"
                    ));
                }
            }
            Family::HuslerReiss => {
                for &l in children.iter().chain([&mother]) {
                    if l.is_nan() || l <= 0.0 {
                        return Err(param_err!("Hüsler-Reiss parameter {l} must be positive"));
                    }
                }
                if let Some(p) = sizes.iter().find(|&&p| p > 2) {
                    return Err(param_err!(
                        "Hüsler-Reiss groups are at most bivariate, got {p}"
                    ));
                }
            }
        }
        Ok(Self {
            family,
            mother,
            children,
            sizes,
        })
    }

    pub fn logistic(mother: f64, children: Vec<f64>, sizes: Vec<usize>) -> Result<Self> {
        Self::new(Family::Logistic, mother, children, sizes)
    }

    pub fn husler_reiss(mother: f64, children: Vec<f64>, sizes: Vec<usize>) -> Result<Self> {
        Self::new(Family::HuslerReiss, mother, children, sizes)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn mother(&self) -> f64 {
        self.mother
    }

    pub fn children(&self) -> &[f64] {
        &self.children
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Number of groups.
    pub fn d(&self) -> usize {
        self.sizes.len()
    }

    /// Total number of columns.
    pub fn q(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))
    }

    /// Extremal coefficient of one group, the child function at the all-ones vector.
    fn group_theta(&self, g: usize) -> f64 {
        let p = self.sizes[g];
        match self.family {
            Family::Logistic => (p as f64).powf(self.children[g]),
            Family::HuslerReiss if p == 1 => 1.0,
            Family::HuslerReiss => theta_hr(self.children[g]),
        }
    }
}

/// Model extremal coefficient of the columns of the groups in `cluster`: the
/// nested stable tail dependence function evaluated at the all-ones vector.
pub fn theta_model(spec: &NestedModelSpec, cluster: &[usize]) -> Result<f64> {
    if cluster.is_empty() {
        return Err(param_err!("cluster is empty"));
    }
    let mut seen = vec![false; spec.d()];
    for &g in cluster {
        if g >= spec.d() || std::mem::replace(&mut seen[g], true) {
            return Err(param_err!("invalid or repeated group {g} in cluster"));
        }
    }
    let thetas: Vec<f64> = cluster.iter().map(|&g| spec.group_theta(g)).collect();
    match (spec.family, thetas.as_slice()) {
        (Family::Logistic, _) => stdf_logistic(&thetas, spec.mother),
        (Family::HuslerReiss, [t]) => Ok(*t),
        (Family::HuslerReiss, [ta, tb]) => stdf_hr(*ta, *tb, spec.mother),
        (Family::HuslerReiss, _) => Err(param_err!(
            "the Hüsler-Reiss mother is bivariate; cluster has {} groups",
            cluster.len()
        )),
    }
}

/// Closed-form SECO of the groups in `cluster`: `Σ_g θ(g) − θ(cluster)`.
pub fn seco_model(spec: &NestedModelSpec, cluster: &[usize]) -> Result<f64> {
    let joint = theta_model(spec, cluster)?;
    let sum: f64 = cluster.iter().map(|&g| spec.group_theta(g)).sum();
    Ok(sum - joint)
}
