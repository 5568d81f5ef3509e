//! Reference functions and brackets for the behaviour of `I(ρ)` as `ρ → 0`
//! and `ρ → ∞`.
//!
//! ```text
//! G(ρ) = Σ_k 1/(k √((kπρ)² + 1)),      H(ρ) = Σ_k 2ρ/(k((kπρ)² + 1))
//! D_k(ρ) = ρ arcsinh(kπρ)/(kπ) + √((kπρ)² + 1) - iρ
//! Ĩ(ρ) = (ρ² + 1)/ρ · Σ_k Re 1/(k D_k(ρ))
//! ```
//!
//! `G` and `H` are summed with the same convexity bracket as the residue
//! series, using their closed-form tail integrals.

use crate::error::{Error, Result};
use crate::kernel::Pitch;
use crate::quadrature::integrate_density;
use crate::residue::{approx_sum, residue_sum};
use crate::roots::ROUCHE_CONSTANT;
use crate::sum::CompensatedSum;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Quadrature is skipped below this pitch in [`asymptotic_report`].
pub const QUADRATURE_FLOOR: f64 = 1e-3;

const MAX_TERMS: u64 = 100_000_000;

/// Sum a positive, decreasing, convex series given its tail integral
/// `∫_K^∞`; returns `(value, bound)`.
fn convex_series<F, T>(term: F, tail: T, tol: f64, start: u64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64 + Sync,
    T: Fn(f64) -> f64,
{
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let mut cutoff = start.max(8);
    loop {
        let k = cutoff as f64;
        let lower = tail(k) - 0.5 * term(k);
        let upper = tail(k + 0.5);
        let half = 0.5 * (upper - lower).max(0.0);
        if half <= 0.5 * tol || cutoff >= MAX_TERMS {
            if half > 0.5 * tol {
                return Err(Error::ToleranceNotReached {
                    requested: tol,
                    achieved: half,
                    panels: cutoff as usize,
                });
            }
            let terms: Vec<f64> = (1..=cutoff).into_par_iter().map(|k| term(k as f64)).collect();
            let mut acc = CompensatedSum::new();
            for t in terms {
                acc.add(t);
            }
            return Ok((acc.value() + 0.5 * (upper + lower), half));
        }
        cutoff = (2 * cutoff).min(MAX_TERMS);
    }
}

fn start_cutoff(rho: Pitch, tol: f64) -> u64 {
    // The bracket half-width is about |f'(K)|/16 with f ~ 1/(πρK²).
    let c = PI * rho.value();
    (1.0 / (8.0 * c * tol)).cbrt().min(MAX_TERMS as f64) as u64
}

/// `G(ρ) = Σ 1/(k√((kπρ)² + 1))`.
pub fn g_series(rho: Pitch, tol: f64) -> Result<f64> {
    let c = PI * rho.value();
    convex_series(
        |k| 1.0 / (k * (c * k).hypot(1.0)),
        |k| (1.0 / (c * k)).asinh(),
        tol,
        start_cutoff(rho, tol),
    )
    .map(|(v, _)| v)
}

/// Bracket `[L, U]` for `G(ρ) - log(1/ρ)`:
/// `L = log((1 + √((πρ)² + 1))/π)`, `U = L + 1/√((πρ)² + 1)`.
pub fn g_bracket(rho: Pitch) -> (f64, f64) {
    let s = (PI * rho.value()).hypot(1.0);
    let lower = ((1.0 + s) / PI).ln();
    (lower, lower + 1.0 / s)
}

/// `H(ρ) = Σ 2ρ/(k((kπρ)² + 1))`.
pub fn h_series(rho: Pitch, tol: f64) -> Result<f64> {
    let r = rho.value();
    let c = PI * r;
    convex_series(
        |k| 2.0 * r / (k * ((c * k).powi(2) + 1.0)),
        |k| r * (1.0 / (c * k).powi(2)).ln_1p(),
        tol,
        start_cutoff(rho, tol),
    )
    .map(|(v, _)| v)
}

/// `2ρ(1 + log(1/(πρ)) + ½ log(1 + (πρ)²))`, an upper bound for `H(ρ)`.
pub fn h_bound(rho: Pitch) -> f64 {
    let r = rho.value();
    let c = PI * r;
    2.0 * r * (1.0 - c.ln() + 0.5 * (c * c).ln_1p())
}

/// `D_k(ρ) = ρ arcsinh(kπρ)/(kπ) + √((kπρ)² + 1) - iρ`.
pub fn dk_decomposition(rho: Pitch, k: u64) -> Complex64 {
    let r = rho.value();
    let kpi = k as f64 * PI;
    let u = kpi * r;
    Complex64::new(r * u.asinh() / kpi + u.hypot(1.0), -r)
}

/// Outcome of checking the transfer conditions on a list of terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    /// All imaginary parts are nonzero and share one sign.
    pub sign_ok: bool,
    /// `-1`, `+1`, or `0` when `sign_ok` is false.
    pub sign: i8,
    /// `min |Im b| / |b|` over the terms.
    pub c_empirical: f64,
}

pub fn transfer_check(terms: &[Complex64]) -> Result<TransferReport> {
    if terms.is_empty() {
        return Err(Error::EmptyInput("transfer_check needs at least one term".into()));
    }
    let positive = terms.iter().all(|b| b.im > 0.0);
    let negative = terms.iter().all(|b| b.im < 0.0);
    let c_empirical = terms
        .iter()
        .map(|b| if b.norm() == 0.0 { 0.0 } else { b.im.abs() / b.norm() })
        .fold(f64::INFINITY, f64::min);
    Ok(TransferReport {
        sign_ok: positive || negative,
        sign: if positive {
            1
        } else if negative {
            -1
        } else {
            0
        },
        c_empirical,
    })
}

/// `π/√(π² + 1)`, the non-tangency constant of the `w`-series.
pub fn non_tangency_constant() -> f64 {
    PI / (PI * PI + 1.0).sqrt()
}

/// `11√5 ρ`, the relative perturbation allowed between `1/E'(z_k)` and
/// `1/E'(w_k)`.
pub fn perturbation_constant(rho: Pitch) -> f64 {
    5.5 * ROUCHE_CONSTANT * rho.value()
}

/// Band for `I(ρ)·ρ/log(1/ρ)` implied by the `G` bracket, the `H` bound and
/// the perturbation between the two series. Requires `ρ < 1/π`.
pub fn small_pitch_ratio_band(rho: Pitch) -> Result<(f64, f64)> {
    let r = rho.value();
    if r >= 1.0 / PI {
        return Err(Error::Domain(format!("ratio band needs ρ < 1/π, got {r}")));
    }
    let log_inv = -r.ln();
    let (lower, upper) = g_bracket(rho);
    let h = h_bound(rho);
    let eps = perturbation_constant(rho) / non_tangency_constant();
    let scale = (r * r + 1.0) / log_inv;
    Ok((
        scale * (1.0 - eps) * (log_inv + lower - h),
        scale * (1.0 + eps) * (log_inv + upper + h),
    ))
}

/// One row of the comparison between methods and reference functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub rho: Pitch,
    pub i_quad: Option<f64>,
    pub i_res: Option<f64>,
    pub i_tilde: f64,
    /// `log(1/ρ)/ρ`.
    pub small_rho_ref: f64,
    /// `(π/(3(ρ² + 1)), π/(3ρ²))`.
    pub large_rho_band: (f64, f64),
    pub g_value: f64,
    pub g_bracket: (f64, f64),
    /// `i_res·ρ/log(1/ρ)`, for `ρ < 1`.
    pub ratio_small: Option<f64>,
    /// `i_quad·3ρ²/π`.
    pub ratio_large: Option<f64>,
}

/// Rough magnitude of `I(ρ)`, used to turn relative tolerances into
/// absolute ones.
pub fn magnitude(rho: Pitch) -> f64 {
    let r = rho.value();
    let c = PI * r;
    // (ρ²+1)/ρ·G(ρ) bounds Ĩ; G ≤ log(1/ρ) + U for small ρ and ≤ ζ(2)/(πρ) overall.
    let g = (1.0 / c).asinh() + 1.0;
    ((r * r + 1.0) / r * g).min(PI / (3.0 * r * r))
}

/// Evaluate every method and reference at one pitch, `tol` relative.
pub fn report_at(rho: Pitch, tol: f64) -> Result<AsymptoticReport> {
    let r = rho.value();
    let scale = magnitude(rho);
    let abs_tol = tol * scale;
    let i_quad = if r >= QUADRATURE_FLOOR {
        Some(integrate_density(rho, abs_tol)?.value)
    } else {
        None
    };
    let i_res = Some(residue_sum(rho, abs_tol)?.value);
    let i_tilde = approx_sum(rho, abs_tol)?.value;
    let g_value = g_series(rho, tol.min(1e-10))?;
    let log_inv = -r.ln();
    Ok(AsymptoticReport {
        rho,
        i_quad,
        i_res,
        i_tilde,
        small_rho_ref: log_inv / r,
        large_rho_band: (PI / (3.0 * (r * r + 1.0)), PI / (3.0 * r * r)),
        g_value,
        g_bracket: g_bracket(rho),
        ratio_small: if r < 1.0 { i_res.map(|v| v * r / log_inv) } else { None },
        ratio_large: i_quad.map(|v| v * 3.0 * r * r / PI),
    })
}

/// [`report_at`] over a grid, in parallel, returned in grid order.
pub fn asymptotic_report(grid: &[Pitch], tol: f64) -> Result<Vec<AsymptoticReport>> {
    if grid.is_empty() {
        return Err(Error::EmptyInput("pitch grid is empty".into()));
    }
    grid.par_iter().map(|&rho| report_at(rho, tol)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::residue::{approx_term, weight};

    fn p(r: f64) -> Pitch {
        Pitch::new(r).unwrap()
    }

    #[test]
    fn g_inside_bracket() {
        for &rho in &[1e-4, 1e-2, 0.3, 1.0] {
            let g = g_series(p(rho), 1e-12).unwrap();
            let (lo, hi) = g_bracket(p(rho));
            let d = g + rho.ln();
            assert!(lo <= d && d <= hi, "rho {rho}: {lo} <= {d} <= {hi}");
        }
    }

    #[test]
    fn g_matches_direct_partial_sum() {
        // Oracle: plain summation to 10⁶ plus the tail integral from 10⁶ + 1/2.
        let rho: f64 = 0.01;
        let c = PI * rho;
        let n = 1_000_000u64;
        let mut direct = 0.0;
        for k in (1..=n).rev() {
            let k = k as f64;
            direct += 1.0 / (k * (c * k).hypot(1.0));
        }
        direct += (1.0 / (c * (n as f64 + 0.5))).asinh();
        let g = g_series(p(rho), 1e-12).unwrap();
        assert!((g - direct).abs() < 1e-10, "{g} vs {direct}");
    }

    #[test]
    fn bracket_limits_at_small_pitch() {
        let (lo, hi) = g_bracket(p(1e-12));
        assert!((lo - (2.0 / PI).ln()).abs() < 1e-12);
        assert!((hi - 1.0 - (2.0 / PI).ln()).abs() < 1e-12);
    }

    #[test]
    fn h_below_bound_and_shrinking() {
        let mut prev = f64::INFINITY;
        for &rho in &[1e-2, 1e-3, 1e-4] {
            let h = h_series(p(rho), 1e-14).unwrap();
            assert!(h > 0.0 && h <= h_bound(p(rho)));
            assert!(h < prev);
            prev = h;
        }
    }

    #[test]
    fn dk_identity_and_bounds() {
        let rho = p(0.01);
        for k in [1u64, 7, 300] {
            let d = dk_decomposition(rho, k);
            let u = k as f64 * PI * 0.01;
            assert!(d.re >= u.hypot(1.0));
            let lhs = weight(rho, approx_term(rho, k));
            let rhs = (1.0 + 1e-4) / 0.01 * (1.0 / (k as f64 * d)).re;
            assert!(((lhs - rhs) / rhs).abs() < 1e-13);
            let gk = 1.0 / (k as f64 * u.hypot(1.0));
            let hk = 2.0 * 0.01 / (k as f64 * (u * u + 1.0));
            assert!(((1.0 / (k as f64 * d)).re - gk).abs() <= hk);
        }
        // Oracle for k = 1: direct evaluation of the defining expression.
        let u: f64 = PI * 0.01;
        let d1 = dk_decomposition(rho, 1);
        assert!((d1.re - (0.01 * u.asinh() / PI + (u * u + 1.0).sqrt())).abs() < 1e-16);
        assert_eq!(d1.im, -0.01);
    }

    #[test]
    fn transfer_check_cases() {
        let mixed = [Complex64::new(1.0, 1.0), Complex64::new(1.0, -1.0)];
        assert!(!transfer_check(&mixed).unwrap().sign_ok);
        assert!(matches!(transfer_check(&[]), Err(Error::EmptyInput(_))));
        let terms: Vec<Complex64> = (1..=1000).map(|k| approx_term(p(0.05), k)).collect();
        let r = transfer_check(&terms).unwrap();
        assert!(r.sign_ok && r.sign == -1);
        assert!(r.c_empirical >= non_tangency_constant());
    }

    #[test]
    fn ratio_band_is_ordered() {
        for &rho in &[1e-6, 1e-3, 0.05] {
            let (lo, hi) = small_pitch_ratio_band(p(rho)).unwrap();
            assert!(lo < 1.0 + 0.2 && lo < hi);
        }
        assert!(small_pitch_ratio_band(p(0.5)).is_err());
    }

    #[test]
    fn report_for_unit_pitch_agrees_across_methods() {
        let r = report_at(p(1.0), 1e-9).unwrap();
        let q = r.i_quad.unwrap();
        let s = r.i_res.unwrap();
        assert!((q - s).abs() < 1e-8);
        assert!(r.ratio_small.is_none());
        let d = r.g_value;
        assert!(d >= r.g_bracket.0 && d <= r.g_bracket.1);
    }
}
