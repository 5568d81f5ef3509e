//! `I(ρ)` as a sum of residues.
//!
//! Closing the real line in the upper half-plane gives
//!
//! ```text
//! I(ρ) = -4π(ρ² + 1) Σ_k Im 1/E'_ρ(z_k)
//! ```
//!
//! over the roots `z_k` of [`crate::roots`]; replacing `z_k` by the
//! approximants `w_k` gives the closed-form series `Ĩ(ρ)`.
//!
//! Truncation. Writing `z = 2πκ + ξ`, the root condition
//! `2 sin(z/2) = ±iρz` becomes `2 sin(ξ/2) = iρ(2πκ + ξ)` in every strip,
//! which makes sense for real `κ`. Its root `ξ(κ)` interpolates the
//! terms smoothly between integers, and so does the closed form for `w`.
//! The interpolated term `f(κ)` is positive, decreasing and convex, so the
//! tail `Σ_{k>K} f(k)` lies in `[∫_K^∞ f - f(K)/2, ∫_{K+1/2}^∞ f]`. The
//! midpoint of that bracket is added to the partial sum and its half-width
//! is the reported tail bound; `K` is doubled until that bound fits.

use crate::error::{Error, Result};
use crate::kernel::{e_rho_prime, Pitch};
use crate::quadrature::{integrate, try_integrate, EnergyEstimate, Method, QuadOptions};
use crate::roots::{approx_values, refine_root_robust, StripRoot};
use crate::sum::CompensatedSum;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Newton budget per root before falling back to the curve oracle.
pub const NEWTON_BUDGET: usize = 20;

/// Accuracy of the refined roots feeding the series.
pub const ROOT_TOL: f64 = 1e-13;

/// Largest cutoff tried before giving up.
pub const MAX_CUTOFF: u64 = 10_000_000;

/// Where a series was cut and how well its tail is known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesTruncation {
    /// Terms `k = 1..=cutoff` are summed explicitly.
    pub cutoff: u64,
    /// Estimate of `Σ_{k > cutoff}` added to the partial sum.
    pub tail_estimate: f64,
    /// Bound on the error of `tail_estimate`.
    pub tail_bound: f64,
}

/// An estimate together with its truncation data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesResult {
    pub estimate: EnergyEstimate,
    pub truncation: SeriesTruncation,
}

/// `1/E'_ρ(z_k)`. The factor `-4π(ρ² + 1)` is applied when summing.
pub fn residue_term(rho: Pitch, root: &StripRoot) -> Result<Complex64> {
    let d = e_rho_prime(rho, root.z)?;
    let scale = 2.0 * rho.squared() * root.z.norm() + 2.0 * root.z.sin().norm();
    if d.norm() <= 64.0 * f64::EPSILON * scale || d.norm() == 0.0 {
        return Err(Error::DerivativeUnderflow {
            k: root.k,
            modulus: d.norm(),
        });
    }
    Ok(1.0 / d)
}

/// `1/E'_ρ(w_k)` from the closed form of `E'_ρ(w_k)`.
pub fn approx_term(rho: Pitch, k: u64) -> Complex64 {
    1.0 / approx_values(rho, k).1
}

/// Contribution `-4π(ρ² + 1) Im(term)` of one term to `I(ρ)`.
#[inline]
pub fn weight(rho: Pitch, term: Complex64) -> f64 {
    -4.0 * PI * (rho.squared() + 1.0) * term.im
}

/// Closed-form term for real index `κ`:
/// `-4π(ρ²+1) Im 1/E'(w(κ)) = (ρ²+1) B/(κρ(ρ² + B²))`,
/// `B = ρ arcsinh(u)/(κπ) + √(u² + 1)`, `u = κπρ`.
pub fn approx_weight(rho: Pitch, kappa: f64) -> f64 {
    let r = rho.value();
    let u = kappa * PI * r;
    let b = r * u.asinh() / (kappa * PI) + u.hypot(1.0);
    (r * r + 1.0) * b / (kappa * r * (r * r + b * b))
}

/// Solve `2 sin(ξ/2) = iρ(2πκ + ξ)` for `ξ` near `2i arcsinh(κπρ)`.
///
/// At integer `κ = k` the point `2πk + ξ` is the root `z_k`.
pub fn shifted_root(rho: Pitch, kappa: f64, tol: f64) -> Result<Complex64> {
    let r = rho.value();
    let i_rho = Complex64::new(0.0, r);
    let base = 2.0 * PI * kappa;
    let f = |xi: Complex64| 2.0 * (0.5 * xi).sin() - i_rho * (base + xi);
    let mut xi = Complex64::new(0.0, 2.0 * (kappa * PI * r).asinh());
    let mut value = f(xi);
    for _ in 0..100 {
        let d = (0.5 * xi).cos() - i_rho;
        let mut step = -value / d;
        if step.norm() <= tol.max(4.0 * f64::EPSILON * xi.norm()) {
            return Ok(xi + step);
        }
        let mut accepted = false;
        for _ in 0..60 {
            let next = f(xi + step);
            if next.norm() < value.norm() {
                xi += step;
                value = next;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return Ok(xi);
        }
    }
    Err(Error::NonConvergence {
        k: kappa.round() as u64,
        iterations: 100,
    })
}

/// Interpolated residue term at real index `κ`, using `sin z = sin ξ`.
pub fn residue_weight(rho: Pitch, kappa: f64) -> Result<f64> {
    let xi = shifted_root(rho, kappa, ROOT_TOL)?;
    let z = 2.0 * PI * kappa + xi;
    let d = 2.0 * rho.squared() * z + 2.0 * xi.sin();
    Ok(weight(rho, 1.0 / d))
}

/// Bracket for `Σ_{k > K} f(k)` with `f` positive, decreasing and convex.
fn tail_bracket<F>(f: &F, cutoff: u64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let k = cutoff as f64;
    // ∫_a^∞ f(κ) dκ with κ = a/s.
    let tail_integral = |a: f64| -> Result<(f64, f64)> {
        let r = try_integrate(
            |s: f64| Ok(f(a / s)? * a / (s * s)),
            0.0,
            1.0,
            QuadOptions::absolute(tol),
        )?;
        Ok((r.value, r.error))
    };
    let (from_k, err_k) = tail_integral(k)?;
    let (from_half, err_half) = tail_integral(k + 0.5)?;
    let lower = from_k - 0.5 * f(k)? - err_k;
    let upper = from_half + err_half;
    Ok((lower, upper))
}

/// Sample-based check that `f` is decreasing and convex on `[K, 10⁶K]`.
fn tail_is_convex<F>(f: &F, cutoff: u64) -> Result<bool>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let k = cutoff as f64;
    let h = 0.25;
    for j in 0..80 {
        let x = k * 2f64.powf(j as f64 / 4.0);
        let (a, b, c) = (f(x)?, f(x + h)?, f(x + 2.0 * h)?);
        let slack = 1e-12 * a.abs();
        if !(b <= a + slack && a - 2.0 * b + c >= -slack) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn initial_cutoff(rho: Pitch, tol: f64) -> u64 {
    let r2 = rho.squared();
    // Half-width of the bracket is about |f'(K)|/16 ≈ (ρ²+1)/(8πρ²K³).
    let k = ((r2 + 1.0) / (8.0 * PI * r2 * tol)).cbrt().ceil();
    (k as u64).clamp(8, MAX_CUTOFF)
}

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")))
    }
}

/// Choose the cutoff and tail estimate for a term function `f`.
fn truncate<F>(rho: Pitch, tol: f64, f: F) -> Result<SeriesTruncation>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let mut cutoff = initial_cutoff(rho, tol);
    let mut last = f64::INFINITY;
    loop {
        if tail_is_convex(&f, cutoff)? {
            let (lower, upper) = tail_bracket(&f, cutoff, tol / 16.0)?;
            let half_width = 0.5 * (upper - lower).max(0.0);
            last = half_width;
            if half_width <= 0.5 * tol {
                return Ok(SeriesTruncation {
                    cutoff,
                    tail_estimate: 0.5 * (upper + lower),
                    tail_bound: half_width,
                });
            }
        }
        if cutoff >= MAX_CUTOFF {
            return Err(Error::ToleranceNotReached {
                requested: tol,
                achieved: last,
                panels: cutoff as usize,
            });
        }
        cutoff = (2 * cutoff).min(MAX_CUTOFF);
    }
}

/// Roots `z_1..z_K` for the series, refined in parallel and returned in order.
pub fn series_roots(rho: Pitch, cutoff: u64) -> Result<Vec<StripRoot>> {
    (1..=cutoff)
        .into_par_iter()
        .map(|k| refine_root_robust(rho, k, ROOT_TOL, NEWTON_BUDGET))
        .collect()
}

fn partial_residue_sum(rho: Pitch, cutoff: u64) -> Result<f64> {
    let terms: Vec<f64> = (1..=cutoff)
        .into_par_iter()
        .map(|k| {
            let root = refine_root_robust(rho, k, ROOT_TOL, NEWTON_BUDGET)?;
            Ok(weight(rho, residue_term(rho, &root)?))
        })
        .collect::<Result<_>>()?;
    let mut acc = CompensatedSum::new();
    for t in terms {
        acc.add(t);
    }
    Ok(acc.value())
}

fn partial_approx_sum(rho: Pitch, cutoff: u64) -> f64 {
    let terms: Vec<f64> = (1..=cutoff)
        .into_par_iter()
        .map(|k| weight(rho, approx_term(rho, k)))
        .collect();
    let mut acc = CompensatedSum::new();
    for t in terms {
        acc.add(t);
    }
    acc.value()
}

/// `I(ρ)` from the residues at the refined roots.
pub fn residue_series(rho: Pitch, tol: f64) -> Result<SeriesResult> {
    check_tol(tol)?;
    let truncation = truncate(rho, tol, |kappa| residue_weight(rho, kappa))?;
    let partial = partial_residue_sum(rho, truncation.cutoff)?;
    Ok(SeriesResult {
        estimate: EnergyEstimate {
            rho,
            value: partial + truncation.tail_estimate,
            method: Method::ResidueSeries,
            tail_bound: truncation.tail_bound,
            tolerance: tol,
        },
        truncation,
    })
}

/// `Ĩ(ρ)` from the closed-form approximants.
pub fn approx_series(rho: Pitch, tol: f64) -> Result<SeriesResult> {
    check_tol(tol)?;
    let truncation = truncate(rho, tol, |kappa| Ok(approx_weight(rho, kappa)))?;
    let partial = partial_approx_sum(rho, truncation.cutoff);
    Ok(SeriesResult {
        estimate: EnergyEstimate {
            rho,
            value: partial + truncation.tail_estimate,
            method: Method::ApproxSeries,
            tail_bound: truncation.tail_bound,
            tolerance: tol,
        },
        truncation,
    })
}

/// [`residue_series`] without the truncation record.
pub fn residue_sum(rho: Pitch, tol: f64) -> Result<EnergyEstimate> {
    residue_series(rho, tol).map(|r| r.estimate)
}

/// [`approx_series`] without the truncation record.
pub fn approx_sum(rho: Pitch, tol: f64) -> Result<EnergyEstimate> {
    approx_series(rho, tol).map(|r| r.estimate)
}

/// Residue series cut at a fixed `cutoff`, with the tail handled as in
/// [`residue_series`]. Returns `(value, tail_bound)`.
pub fn residue_sum_at_cutoff(rho: Pitch, cutoff: u64, tol: f64) -> Result<(f64, f64)> {
    check_tol(tol)?;
    if cutoff == 0 {
        return Err(Error::InvalidParameter("cutoff must be >= 1".into()));
    }
    let f = |kappa| residue_weight(rho, kappa);
    let (lower, upper) = tail_bracket(&f, cutoff, tol)?;
    let partial = partial_residue_sum(rho, cutoff)?;
    Ok((partial + 0.5 * (upper + lower), 0.5 * (upper - lower)))
}

/// Plain partial sum `-4π(ρ²+1) Σ_{k ≤ K} Im 1/E'(w_k)` without tail.
pub fn approx_partial_sum(rho: Pitch, cutoff: u64) -> f64 {
    partial_approx_sum(rho, cutoff)
}

/// `∫_K^∞` of the closed-form term, used as a crude upper tail estimate.
pub fn approx_tail_integral(rho: Pitch, cutoff: u64, tol: f64) -> Result<f64> {
    let k = cutoff as f64;
    Ok(integrate(
        |s: f64| approx_weight(rho, k / s) * k / (s * s),
        0.0,
        1.0,
        QuadOptions::absolute(tol),
    )?
    .value)
}
