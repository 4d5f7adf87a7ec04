//! Exact samplers for logistic and nested logistic extreme-value copulas.
//!
//! Rows are drawn with the Marshall-Olkin frailty construction. For the flat
//! logistic copula with parameter `α`, draw `S` positive stable with Laplace
//! transform `exp(−t^α)` and i.i.d. unit exponentials `E_ℓ`; then
//! `U_ℓ = exp(−(E_ℓ/S)^α)`. The nested version draws a mother frailty `V₀`
//! (stable with index `α₀`) and, per group, `V_g = V₀^{α₀/α_g} · S_g` with `S_g`
//! stable of index `α_g/α₀`. All arithmetic is done on log scale so that small
//! `α` does not overflow.
//!
//! Each row uses its own ChaCha stream, keyed by the seed, so the output does not
//! depend on how rows are scheduled across threads. When a child parameter equals
//! the mother no child frailty is drawn, which makes the degenerate nested model
//! consume exactly the random numbers of the flat model.

use std::f64::consts::PI;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, Open01};
use rayon::prelude::*;

use super::{Family, NestedModelSpec};
use crate::clustering::{Partition, PartitionMeta};
use crate::data::{Dataset, GroupLayout};
use crate::error::{param_err, Result};

/// `ln S` for `S` positive stable with `E[exp(−tS)] = exp(−t^α)` (Kanter's
/// representation).
fn ln_positive_stable<R: Rng + ?Sized>(rng: &mut R, alpha: f64) -> f64 {
    if alpha >= 1.0 {
        return 0.0;
    }
    let u: f64 = PI * rng.sample::<f64, _>(Open01);
    let w: f64 = rng.sample(Exp1);
    (alpha * u).sin().ln() - u.sin().ln() / alpha
        + (1.0 - alpha) / alpha * (((1.0 - alpha) * u).sin().ln() - w.ln())
}

pub(crate) fn row_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn nested_row<R: Rng + ?Sized>(rng: &mut R, spec: &NestedModelSpec, out: &mut Vec<f64>) {
    let a0 = spec.mother();
    let ln_v0 = ln_positive_stable(rng, a0);
    for (&alpha, &p) in spec.children().iter().zip(spec.sizes()) {
        let ln_v = if alpha == a0 {
            ln_v0
        } else {
            let beta = alpha / a0;
            ln_v0 / beta + ln_positive_stable(rng, beta)
        };
        for _ in 0..p {
            let e: f64 = rng.sample(Exp1);
            out.push((-(alpha * (e.ln() - ln_v)).exp()).exp());
        }
    }
}

fn sample_rows(n: usize, spec: &NestedModelSpec, seed: u64, stream_base: u64) -> Vec<Vec<f64>> {
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = row_rng(seed, stream_base + i as u64);
            let mut row = Vec::with_capacity(spec.q());
            nested_row(&mut rng, spec, &mut row);
            row
        })
        .collect()
}

fn check_logistic(spec: &NestedModelSpec) -> Result<()> {
    if spec.family() != Family::Logistic {
        return Err(param_err!(
            "only logistic models can be sampled; Hüsler-Reiss is closed-form only"
        ));
    }
    Ok(())
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(param_err!("sample size n={n} must be at least 2"));
    }
    if n as u64 > u32::MAX as u64 {
        return Err(param_err!("sample size n={n} too large"));
    }
    Ok(())
}

/// `n` rows of the `p`-variate logistic extreme-value copula (uniform margins),
/// as a dataset with a single group.
pub fn sample_logistic(n: usize, p: usize, alpha: f64, seed: u64) -> Result<Dataset> {
    let spec = NestedModelSpec::logistic(alpha, vec![alpha], vec![p])?;
    sample_nested_logistic(n, &spec, seed)
}

/// `n` rows of a nested logistic extreme-value copula; one dataset group per
/// child.
pub fn sample_nested_logistic(n: usize, spec: &NestedModelSpec, seed: u64) -> Result<Dataset> {
    check_n(n)?;
    check_logistic(spec)?;
    let rows = sample_rows(n, spec, seed, 0);
    let values = Array2::from_shape_vec((n, spec.q()), rows.concat()).expect("n x q rows");
    Dataset::new(values, GroupLayout::contiguous(spec.sizes())?)
}

/// Independent blocks, each drawn from its own nested logistic model. Columns
/// and groups are laid out block after block; the returned partition lists the
/// groups of each block.
pub fn sample_ai_blocks(
    n: usize,
    block_specs: &[NestedModelSpec],
    seed: u64,
) -> Result<(Dataset, Partition)> {
    check_n(n)?;
    if block_specs.is_empty() {
        return Err(param_err!("at least one block is required"));
    }
    for spec in block_specs {
        check_logistic(spec)?;
    }
    let blocks: Vec<Vec<Vec<f64>>> = block_specs
        .iter()
        .enumerate()
        .map(|(b, spec)| sample_rows(n, spec, seed, (b as u64) << 32))
        .collect();
    let q: usize = block_specs.iter().map(NestedModelSpec::q).sum();
    let mut flat = Vec::with_capacity(n * q);
    for i in 0..n {
        for block in &blocks {
            flat.extend_from_slice(&block[i]);
        }
    }
    let sizes: Vec<usize> = block_specs
        .iter()
        .flat_map(|s| s.sizes().iter().copied())
        .collect();
    let layout = GroupLayout::contiguous(&sizes)?;
    let mut clusters = Vec::with_capacity(block_specs.len());
    let mut start = 0;
    for spec in block_specs {
        clusters.push((start..start + spec.d()).collect());
        start += spec.d();
    }
    let truth = Partition::new(clusters, start, PartitionMeta::named("planted"))?;
    let values = Array2::from_shape_vec((n, q), flat).expect("n x q rows");
    Ok((Dataset::new(values, layout)?, truth))
}
