//! Closed forms for the logistic and Hüsler-Reiss families.

use crate::error::{param_err, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Standard normal survival function `1 − Φ(x)`, accurate in the upper tail.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(param_err!("logistic parameter {alpha} outside (0, 1]"));
    }
    Ok(())
}

/// Logistic (Gumbel) stable tail dependence function `(Σ x_i^{1/α})^α`.
pub fn stdf_logistic(x: &[f64], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if let Some(v) = x.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        return Err(param_err!(
            "stdf argument {v} is not a finite non-negative number"
        ));
    }
    let max = x.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(0.0);
    }
    // scaled by the maximum so that x^{1/α} cannot overflow for small α
    let s: f64 = x.iter().map(|v| (v / max).powf(1.0 / alpha)).sum();
    Ok(max * s.powf(alpha))
}

/// Bivariate Hüsler-Reiss stable tail dependence function
/// `x₁Φ(λ/2 + ln(x₁/x₂)/λ) + x₂Φ(λ/2 + ln(x₂/x₁)/λ)`.
///
/// `lambda` may be `+∞` (independence).
pub fn stdf_hr(x1: f64, x2: f64, lambda: f64) -> Result<f64> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(param_err!(
            "Hüsler-Reiss parameter {lambda} must be positive"
        ));
    }
    if !(x1 >= 0.0 && x2 >= 0.0 && x1.is_finite() && x2.is_finite()) {
        return Err(param_err!(
            "stdf arguments ({x1}, {x2}) must be finite and non-negative"
        ));
    }
    if x1 == 0.0 && x2 == 0.0 {
        return Err(param_err!("stdf_hr is undefined at the origin"));
    }
    if x1 == 0.0 || x2 == 0.0 {
        return Ok(x1 + x2);
    }
    let lr = (x1 / x2).ln();
    Ok(x1 * normal_cdf(lambda / 2.0 + lr / lambda) + x2 * normal_cdf(lambda / 2.0 - lr / lambda))
}

/// `x₁ + x₂ − L_HR(x₁, x₂)` evaluated through survival functions, so that the
/// small values near independence keep their relative precision.
pub(crate) fn hr_defect(x1: f64, x2: f64, lambda: f64) -> f64 {
    if x1 == 0.0 || x2 == 0.0 {
        return 0.0;
    }
    let lr = (x1 / x2).ln();
    x1 * normal_sf(lambda / 2.0 + lr / lambda) + x2 * normal_sf(lambda / 2.0 - lr / lambda)
}

/// Extremal coefficient of a bivariate Hüsler-Reiss pair, `2Φ(λ/2)`.
pub fn theta_hr(lambda: f64) -> f64 {
    2.0 * normal_cdf(lambda / 2.0)
}

/// SECO of the nested logistic model with bivariate children:
/// `2^{α_a} + 2^{α_b} − (2^{α_a/α₀} + 2^{α_b/α₀})^{α₀}`.
pub fn seco_nested_logistic(a0: f64, aa: f64, ab: f64) -> Result<f64> {
    check_alpha(a0)?;
    check_alpha(aa)?;
    check_alpha(ab)?;
    if aa > a0 || ab > a0 {
        return Err(param_err!(
            "nesting requires child parameters ({aa}, {ab}) <= mother {a0}"
        ));
    }
    let (ta, tb) = (2f64.powf(aa), 2f64.powf(ab));
    let joint = (2f64.powf(aa / a0) + 2f64.powf(ab / a0)).powf(a0);
    Ok((ta + tb - joint).max(0.0))
}

/// SECO of the nested Hüsler-Reiss model with bivariate children,
/// `θ_a + θ_b − L_HR(θ_a, θ_b; λ₀)` with `θ_j = 2Φ(λ_j/2)`.
pub fn seco_nested_hr(l0: f64, la: f64, lb: f64) -> Result<f64> {
    for l in [l0, la, lb] {
        if l.is_nan() || l <= 0.0 {
            return Err(param_err!("Hüsler-Reiss parameter {l} must be positive"));
        }
    }
    if !la.is_finite() || !lb.is_finite() {
        return Err(param_err!("child parameters must be finite"));
    }
    Ok(hr_defect(theta_hr(la), theta_hr(lb), l0))
}
