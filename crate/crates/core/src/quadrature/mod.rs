//! Real-line quadrature for `I(ρ) = ∫ M_ρ(t) dt` and the companion sinc
//! integrals.
//!
//! Each integrand is integrated on `[0, T]` (all three are even) and the
//! tail beyond `T` is split into a leading `c/t²` piece, integrated exactly,
//! and a nonnegative remainder bounded by `C/t⁴`. The remainder enters as the
//! midpoint of `[0, C/(3T³)]`, so the reported `tail_bound` is rigorous and
//! the cutoff `T` only grows like `tol^{-1/3}`.

mod gauss_kronrod;

pub(crate) use gauss_kronrod::kronrod21;
pub use gauss_kronrod::{integrate, try_integrate, QuadOptions, QuadResult, QuadValue};

use crate::error::{Error, Result};
use crate::kernel::{m_rho_real, sinc_deficit_series, sinc_squared_series, x_minus_sin, Pitch};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Panel width cap: the integrands oscillate with period `2π` or `π`.
pub const PANEL_WIDTH: f64 = PI;

/// Smallest truncation point ever used.
pub const MIN_CUTOFF: f64 = 4.0 * PI;

/// How an [`EnergyEstimate`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Quadrature,
    ResidueSeries,
    ApproxSeries,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Quadrature => "quadrature",
            Method::ResidueSeries => "residue_series",
            Method::ApproxSeries => "approx_series",
        }
    }
}

/// A computed value of `I(ρ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub rho: Pitch,
    pub value: f64,
    pub method: Method,
    /// Bound on the error committed by truncating the domain or the series.
    pub tail_bound: f64,
    pub tolerance: f64,
}

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )))
    }
}

/// Cutoff with `C/(3T³) ≤ budget`.
fn cutoff_for(c: f64, budget: f64) -> f64 {
    MIN_CUTOFF.max((c / (3.0 * budget)).cbrt())
}

fn integrate_halfline<F>(f: F, cutoff: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    let opts = QuadOptions::absolute(tol).with_panel_width(PANEL_WIDTH);
    let r = integrate(f, 0.0, cutoff, opts)?;
    Ok(r.value)
}

/// Truncation used by [`integrate_density`]: returns `(T, tail_bound)`.
pub fn density_cutoff(rho: Pitch, tol: f64) -> (f64, f64) {
    let r2 = rho.squared();
    // Two tails, each with remainder in [0, 4(ρ²+1)/(3ρ⁴T³)], estimated by
    // the midpoint: total error at most 4(ρ²+1)/(3ρ⁴T³).
    let c = 4.0 * (r2 + 1.0) / (r2 * r2);
    let t = cutoff_for(c, 0.5 * tol);
    (t, c / (3.0 * t.powi(3)))
}

/// `I(ρ) = ∫ M_ρ(t) dt` by adaptive quadrature with a certified tail.
pub fn integrate_density(rho: Pitch, tol: f64) -> Result<EnergyEstimate> {
    check_tol(tol)?;
    let r2 = rho.squared();
    let (t, tail_bound) = density_cutoff(rho, tol);
    // Quadrature error on [0, T] counts twice.
    let half = integrate_halfline(|x| m_rho_real(rho, x), t, 0.25 * tol)?;
    let leading = 1.0 / (r2 * t);
    // Each side subtracts the midpoint tail_bound/2 of its remainder.
    let value = 2.0 * (half + leading) - tail_bound;
    Ok(EnergyEstimate {
        rho,
        value,
        method: Method::Quadrature,
        tail_bound,
        tolerance: tol,
    })
}

/// `(1 - sinc² t)/t²`, with `sinc t = sin t / t`.
pub fn sinc_deficit(t: f64) -> f64 {
    let t = t.abs();
    if t < 1e-2 {
        return sinc_deficit_series(t);
    }
    x_minus_sin(t) * (t + t.sin()) / t.powi(4)
}

/// `∫_ℝ (1 - sinc² t)/t² dt`, whose value is `2π/3`.
pub fn sinc_deficit_integral(tol: f64) -> Result<f64> {
    check_tol(tol)?;
    // f = 1/t² - sin²t/t⁴ beyond T; remainder per side in [0, 1/(3T³)].
    let t = cutoff_for(2.0, 0.5 * tol);
    let tail_bound = 2.0 / (3.0 * t.powi(3));
    let half = integrate_halfline(sinc_deficit, t, 0.25 * tol)?;
    Ok(2.0 * (half + 1.0 / t) - 0.5 * tail_bound)
}

/// Integrand of `dI/dρ` in the variable `t = x/2`:
/// `ρ(sinc² t - 1)/(t²(ρ² + sinc² t)²)`.
pub fn didrho_integrand(rho: Pitch, t: f64) -> f64 {
    let r = rho.value();
    let t = t.abs();
    let (deficit, s2) = if t < 1e-2 {
        (sinc_deficit_series(t), sinc_squared_series(t))
    } else {
        let s = t.sin() / t;
        (sinc_deficit(t), s * s)
    };
    let d = r * r + s2;
    -r * deficit / (d * d)
}

/// `dI/dρ`, strictly negative.
pub fn didrho(rho: Pitch, tol: f64) -> Result<f64> {
    check_tol(tol)?;
    let r = rho.value();
    let r2 = rho.squared();
    // Beyond T the integrand is -1/(ρ³t²) plus a remainder in
    // [0, (ρ²+1)²/(ρ⁷t⁴)].
    let c = (r2 + 1.0).powi(2) / r.powi(7);
    let t = cutoff_for(2.0 * c, 0.5 * tol);
    let tail_bound = 2.0 * c / (3.0 * t.powi(3));
    let half = integrate_halfline(|x| didrho_integrand(rho, x), t, 0.25 * tol)?;
    Ok(2.0 * (half - 1.0 / (r * r2 * t)) + 0.5 * tail_bound)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(r: f64) -> Pitch {
        Pitch::new(r).unwrap()
    }

    #[test]
    fn sinc_integral_is_two_thirds_pi() {
        let v = sinc_deficit_integral(1e-10).unwrap();
        assert!((v - 2.0 * PI / 3.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn sinc_deficit_near_zero() {
        // 1 - sinc² t = t²/3 - 2t⁴/45 + ..., so the integrand tends to 1/3.
        let t: f64 = 1e-4;
        let oracle = 1.0 / 3.0 - 2.0 * t * t / 45.0;
        assert!((sinc_deficit(t) - oracle).abs() < 1e-15);
        assert!((sinc_deficit(0.0) - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn sinc_deficit_nonnegative() {
        for i in 0..2000 {
            assert!(sinc_deficit(i as f64 * 0.037) >= 0.0);
        }
    }

    #[test]
    fn sandwich_for_large_pitch() {
        for &rho in &[2.0, 10.0] {
            let v = integrate_density(p(rho), 1e-9).unwrap().value;
            assert!(v >= PI / (3.0 * (rho * rho + 1.0)) - 1e-9);
            assert!(v <= PI / (3.0 * rho * rho) + 1e-9);
        }
    }

    #[test]
    fn tail_bound_within_tolerance() {
        for &rho in &[0.05, 1.0, 20.0] {
            let e = integrate_density(p(rho), 1e-8).unwrap();
            assert!(e.tail_bound <= 0.5 * e.tolerance * (1.0 + 1e-12));
            assert!(e.value > 0.0);
        }
    }

    #[test]
    fn didrho_negative_and_matches_difference() {
        let rho = 1.0;
        let h = 1e-4;
        let d = didrho(p(rho), 1e-11).unwrap();
        let up = integrate_density(p(rho + h), 1e-12).unwrap().value;
        let dn = integrate_density(p(rho - h), 1e-12).unwrap().value;
        let fd = (up - dn) / (2.0 * h);
        assert!(d < 0.0);
        assert!(((d - fd) / fd).abs() < 1e-5, "{d} vs {fd}");
    }

    #[test]
    fn didrho_integrand_nonpositive() {
        for i in 0..2000 {
            assert!(didrho_integrand(p(0.7), i as f64 * 0.013) <= 0.0);
        }
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(integrate_density(p(1.0), 0.0).is_err());
        assert!(sinc_deficit_integral(-1.0).is_err());
    }
}
