//! Scalar special functions and transcendental constants.
//!
//! * `Σ(u) = u sech u` with its two branch inverses (outer `u ≥ β`, inner
//!   `|u| ≤ β`),
//! * the critical point `β` of `Σ` and its maximum `α = Σ(β)`,
//! * the roots `c_k ∈ [(k - 1/2)π, kπ]` of `θ tan θ + 1 = 0`,
//! * the ratio `arcsinh(u)/u`.
//!
//! Every root here is found by bisection on an analytically known bracket.

use crate::error::{Error, Result};
use serde::Serialize;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{OnceLock, RwLock};

/// Residual tolerance used for the cached constants.
pub const CONSTANT_TOL: f64 = 1e-12;

/// Offset from the tangent pole used when bracketing `c_k`.
const CK_POLE_OFFSET: f64 = 1e-9;

const MAX_BISECTIONS: usize = 400;

/// `Σ(u) = u sech u`.
#[inline]
pub fn sigma_map(u: f64) -> f64 {
    // cosh overflows to +inf past |u| ≈ 710 and the quotient correctly goes to 0.
    u / u.cosh()
}

/// `Σ'(u) = (1 - u tanh u) sech u`.
#[inline]
pub fn sigma_derivative(u: f64) -> f64 {
    (1.0 - u * u.tanh()) / u.cosh()
}

/// Critical point and maximum value of `Σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaBeta {
    pub alpha: f64,
    pub beta: f64,
}

impl AlphaBeta {
    /// `1/α`, the pitch at which the solution curves of `sin ζ = iρζ` bifurcate.
    pub fn critical_pitch(&self) -> f64 {
        1.0 / self.alpha
    }
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
///
/// Stops once `|f(mid)| <= tol` or the bracket can no longer shrink.
pub(crate) fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Some(lo);
    }
    if f_hi == 0.0 {
        return Some(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return None;
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..MAX_BISECTIONS {
        mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Some(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        if f_mid.abs() <= tol && (hi - lo) <= 4.0 * f64::EPSILON * mid.abs().max(1.0) {
            break;
        }
    }
    Some(mid)
}

/// Solve `β tanh β = 1` on `[1, 2]` and set `α = Σ(β)`.
pub fn solve_alpha_beta(tol: f64) -> Result<AlphaBeta> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    // 1 - tanh 1 > 0 and 1 - 2 tanh 2 < 0.
    let beta = bisect(|u| 1.0 - u * u.tanh(), 1.0, 2.0, tol)
        .expect("1 - u tanh u changes sign on [1, 2]");
    Ok(AlphaBeta {
        alpha: sigma_map(beta),
        beta,
    })
}

/// Process-wide `α, β` at [`CONSTANT_TOL`].
pub fn alpha_beta() -> AlphaBeta {
    static AB: OnceLock<AlphaBeta> = OnceLock::new();
    *AB.get_or_init(|| solve_alpha_beta(CONSTANT_TOL).expect("constant tolerance is positive"))
}

/// Which left inverse of `Σ` to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SigmaBranch {
    /// `σ : [0, α] → [β, ∞]`, with `σ(0) = +∞`.
    Outer,
    /// `ς : [-α, α] → [-β, β]`.
    Inner,
}

/// Branch inverse of `Σ`.
///
/// The outer branch is restricted to `[0, α]` and returns `f64::INFINITY` at 0.
pub fn sigma_inverse(v: f64, branch: SigmaBranch) -> Result<f64> {
    let AlphaBeta { alpha, beta } = alpha_beta();
    // Allow a few ulps of slack so Σ(β) itself is accepted.
    let slack = 8.0 * f64::EPSILON * alpha;
    if !v.is_finite() || v.abs() > alpha + slack {
        return Err(Error::Domain(format!("|v| = {} exceeds α = {alpha}", v.abs())));
    }
    let v = v.clamp(-alpha, alpha);
    match branch {
        SigmaBranch::Outer => {
            if v < 0.0 {
                return Err(Error::Domain(format!(
                    "outer branch is restricted to [0, α], got {v}"
                )));
            }
            if v == 0.0 {
                return Ok(f64::INFINITY);
            }
            if v == alpha {
                return Ok(beta);
            }
            // Σ(u) ≈ 2u e^{-u} for large u.
            let mut hi = (beta + 1.0).max(-2.0 * (v / 2.0).ln());
            while sigma_map(hi) > v {
                hi *= 2.0;
            }
            Ok(bisect(|u| sigma_map(u) - v, beta, hi, 0.0).expect("Σ - v changes sign on [β, hi]"))
        }
        SigmaBranch::Inner => {
            if v == 0.0 {
                return Ok(0.0);
            }
            if v.abs() == alpha {
                return Ok(beta.copysign(v));
            }
            Ok(bisect(|u| sigma_map(u) - v, -beta, beta, 0.0)
                .expect("Σ is increasing from -α to α on [-β, β]"))
        }
    }
}

/// The root of `θ tan θ + 1 = 0` in `[(k - 1/2)π, kπ]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CkConstant {
    pub k: u64,
    pub value: f64,
}

impl CkConstant {
    /// `a_k = kπ - c_k`, positive and decreasing to 0.
    pub fn gap(&self) -> f64 {
        self.k as f64 * PI - self.value
    }

    /// The interval `K_k = [(k - 1/2)π, kπ]`.
    pub fn interval(k: u64) -> (f64, f64) {
        let k = k as f64;
        ((k - 0.5) * PI, k * PI)
    }
}

/// Bisection for `c_k` on the pole-free form `θ sin θ + cos θ`.
pub fn solve_ck(k: u64, tol: f64) -> Result<CkConstant> {
    if k == 0 {
        return Err(Error::InvalidParameter("c_k is defined for k >= 1".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    let (lo, hi) = CkConstant::interval(k);
    let value = bisect(|t| t * t.sin() + t.cos(), lo + CK_POLE_OFFSET, hi, tol)
        .expect("θ sin θ + cos θ changes sign on K_k");
    Ok(CkConstant { k, value })
}

/// `c_k` at [`CONSTANT_TOL`], cached for the lifetime of the process.
pub fn ck(k: u64) -> Result<CkConstant> {
    static CACHE: OnceLock<RwLock<HashMap<u64, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(&value) = cache.read().expect("c_k cache poisoned").get(&k) {
        return Ok(CkConstant { k, value });
    }
    let c = solve_ck(k, CONSTANT_TOL)?;
    cache.write().expect("c_k cache poisoned").insert(k, c.value);
    Ok(c)
}

/// `arcsinh(u)/u`, strictly inside `(0, 1)` for every nonzero `u`.
///
/// Near the origin the true value lies within half an ulp of 1; the result is
/// rounded toward zero there so the strict upper bound is preserved.
pub fn arcsinh_ratio(u: f64) -> Result<f64> {
    if u == 0.0 || !u.is_finite() {
        return Err(Error::Domain(format!("arcsinh(u)/u needs a finite nonzero u, got {u}")));
    }
    let a = u.abs();
    let ratio = if a < 1e-3 {
        let u2 = a * a;
        1.0 - u2 / 6.0 + 3.0 * u2 * u2 / 40.0 - 5.0 * u2 * u2 * u2 / 112.0
    } else {
        a.asinh() / a
    };
    if ratio >= 1.0 {
        Ok(f64::from_bits(1.0f64.to_bits() - 1))
    } else {
        Ok(ratio)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_at_origin_and_two() {
        assert_eq!(sigma_map(0.0), 0.0);
        // 2 / cosh 2 = 4 / (e^2 + e^-2)
        let e2 = 2.0f64.exp();
        let oracle = 4.0 / (e2 + 1.0 / e2);
        assert!((sigma_map(2.0) - oracle).abs() < 1e-15);
        assert!((sigma_map(2.0) - 0.531_604_457_668_159_4).abs() < 1e-15);
    }

    #[test]
    fn sigma_derivative_matches_central_difference() {
        for &u in &[-3.0, -0.5, 0.0, 0.7, 1.2, 4.0] {
            let h = 1e-6;
            let fd = (sigma_map(u + h) - sigma_map(u - h)) / (2.0 * h);
            assert!((fd - sigma_derivative(u)).abs() < 1e-8, "u = {u}");
        }
    }

    #[test]
    fn alpha_beta_identities() {
        let ab = solve_alpha_beta(1e-12).unwrap();
        assert!((ab.beta * ab.beta.tanh() - 1.0).abs() < 1e-10);
        assert!((ab.beta / ab.beta.cosh() - ab.alpha).abs() < 1e-10);
        assert!((ab.beta.sinh() * ab.alpha - 1.0).abs() < 1e-10);
        assert!((ab.beta - 1.1997).abs() < 5e-4);
        assert!((ab.alpha - 0.6627).abs() < 5e-4);
        assert!((ab.critical_pitch() - 1.5089).abs() < 5e-4);
    }

    #[test]
    fn solve_alpha_beta_rejects_bad_tol() {
        assert!(solve_alpha_beta(0.0).is_err());
        assert!(solve_alpha_beta(f64::NAN).is_err());
    }

    #[test]
    fn sigma_inverse_branch_points() {
        let AlphaBeta { alpha, beta } = alpha_beta();
        assert_eq!(sigma_inverse(alpha, SigmaBranch::Outer).unwrap(), beta);
        assert_eq!(sigma_inverse(0.0, SigmaBranch::Inner).unwrap(), 0.0);
        assert_eq!(sigma_inverse(0.0, SigmaBranch::Outer).unwrap(), f64::INFINITY);
        assert_eq!(sigma_inverse(-alpha, SigmaBranch::Inner).unwrap(), -beta);
    }

    #[test]
    fn sigma_inverse_outer_at_tenth() {
        // Independent oracle: plain bisection on [β, 60].
        let beta = alpha_beta().beta;
        let (mut lo, mut hi) = (beta, 60.0);
        while hi - lo > 1e-14 {
            let mid = 0.5 * (lo + hi);
            if mid / mid.cosh() > 0.1 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let u = sigma_inverse(0.1, SigmaBranch::Outer).unwrap();
        assert!(u > beta);
        assert!((u - lo).abs() < 1e-12);
        assert!((sigma_map(u) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn sigma_inverse_domain_errors() {
        let alpha = alpha_beta().alpha;
        assert!(matches!(sigma_inverse(alpha * 1.01, SigmaBranch::Outer), Err(Error::Domain(_))));
        assert!(matches!(sigma_inverse(-alpha * 1.01, SigmaBranch::Inner), Err(Error::Domain(_))));
        assert!(matches!(sigma_inverse(-0.1, SigmaBranch::Outer), Err(Error::Domain(_))));
    }

    #[test]
    fn sigma_inverse_tiny_values_stay_bracketed() {
        for &v in &[1e-300, 1e-100, 1e-20, 1e-5] {
            let u = sigma_inverse(v, SigmaBranch::Outer).unwrap();
            assert!(u.is_finite() && u > alpha_beta().beta);
            assert!((sigma_map(u) - v).abs() <= 1e-12 * v.max(1e-300) + 1e-300, "v = {v}");
        }
    }

    #[test]
    fn c1_and_c2_constants() {
        let c1 = ck(1).unwrap();
        assert!((c1.value - 2.7984).abs() < 5e-4);
        let c2 = ck(2).unwrap().value;
        assert!((c2 * c2 * c2.cos() - 36.9794).abs() < 5e-3);
        assert!((c1.gap() - 0.3432).abs() < 5e-4);
    }

    #[test]
    fn c50_close_to_pole_free_end() {
        let c = solve_ck(50, 1e-12).unwrap();
        let (lo, hi) = CkConstant::interval(50);
        assert!(c.value >= lo && c.value <= hi);
        assert!((c.value * c.value.tan() + 1.0).abs() < 1e-8);
        // kπ - c_k ≈ 1/(kπ) for large k.
        assert!(c.gap() < 1.0 / (50.0 * PI) * 1.01);
        assert!(c.gap() > 0.0);
    }

    #[test]
    fn ck_rejects_zero_index() {
        assert!(solve_ck(0, 1e-12).is_err());
    }

    #[test]
    fn ck_gaps_decrease_and_stay_in_interval() {
        let mut prev = f64::INFINITY;
        for k in 1..=500 {
            let c = ck(k).unwrap();
            let (lo, hi) = CkConstant::interval(k);
            assert!(c.value >= lo && c.value <= hi, "k = {k}");
            assert!(c.gap() < prev, "k = {k}");
            prev = c.gap();
        }
    }

    #[test]
    fn arcsinh_ratio_values() {
        let oracle = (1.0 + 2.0f64.sqrt()).ln();
        assert!((arcsinh_ratio(1.0).unwrap() - oracle).abs() < 1e-15);
        assert_eq!(arcsinh_ratio(-1.0).unwrap(), arcsinh_ratio(1.0).unwrap());
        let big = arcsinh_ratio(1e6).unwrap();
        assert!(big > 0.0 && big < 1.0);
        assert!(matches!(arcsinh_ratio(0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn arcsinh_ratio_stays_strictly_inside_unit_interval() {
        let n = 10_000;
        for i in 0..n {
            let u = 10f64.powf(-8.0 + 16.0 * i as f64 / (n - 1) as f64);
            for s in [u, -u] {
                let r = arcsinh_ratio(s).unwrap();
                assert!(r > 0.0 && r < 1.0, "u = {s}, r = {r}");
            }
        }
    }
}
