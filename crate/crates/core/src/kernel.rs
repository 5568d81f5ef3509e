//! Evaluation of the density `M_ρ` and the exponential polynomial
//! `E_ρ(z) = ρ²z² + 4 sin²(z/2)` whose nonzero roots are the poles of `M_ρ`.
//!
//! On the real line
//!
//! ```text
//! M_ρ(t) = (ρ² + 1)/(ρ²t² + 4 sin²(t/2)) - 1/t²
//!        = (t² - 4 sin²(t/2)) / (t² (ρ²t² + 4 sin²(t/2)))
//! ```
//!
//! and the second form is what gets evaluated: `t² - 4 sin²(t/2)` is expanded
//! as `4 (x - sin x)(x + sin x)` with `x = t/2`, and `x - sin x` has its own
//! series so nothing cancels. Below [`SERIES_CROSSOVER`] a Taylor expansion
//! in `t` takes over, which also covers the removable singularity at 0.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

/// A point of the complex plane.
pub type ComplexPoint = Complex64;

/// `|t|` (or `|z|`) below which the Taylor branch is used.
pub const SERIES_CROSSOVER: f64 = 1e-2;

/// `|Im z|` above which `E_ρ` refuses to evaluate.
pub const OVERFLOW_GUARD: f64 = 700.0;

/// Relative size of `|E_ρ(z)|` against its two summands below which `z` is
/// treated as a pole.
const POLE_GUARD: f64 = 64.0 * f64::EPSILON;

/// Helix pitch parameter `ρ > 0`; the geometric pitch is `2πρ`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Pitch(f64);

impl Pitch {
    pub fn new(rho: f64) -> Result<Self> {
        if rho.is_finite() && rho > 0.0 {
            Ok(Pitch(rho))
        } else {
            Err(Error::InvalidParameter(format!(
                "pitch must be finite and positive, got {rho}"
            )))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn squared(self) -> f64 {
        self.0 * self.0
    }
}

impl TryFrom<f64> for Pitch {
    type Error = Error;
    fn try_from(rho: f64) -> Result<Self> {
        Pitch::new(rho)
    }
}

impl From<Pitch> for f64 {
    fn from(p: Pitch) -> f64 {
        p.0
    }
}

impl fmt::Display for Pitch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

// (1 - sinc² x)/x² = 1/3 - 2x²/45 + x⁴/315 - 2x⁶/14175 + ...
const DEFICIT_SERIES: [f64; 4] = [1.0 / 3.0, -2.0 / 45.0, 1.0 / 315.0, -2.0 / 14175.0];
// sinc² x = 1 - x²/3 + 2x⁴/45 - x⁶/315 + ...
const SINC2_SERIES: [f64; 4] = [1.0, -1.0 / 3.0, 2.0 / 45.0, -1.0 / 315.0];

#[inline]
fn even_poly(coeffs: &[f64], x2: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x2 + c)
}

#[inline]
fn even_poly_complex(coeffs: &[f64], x2: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x2 + c)
}

/// `(1 - sinc² x)/x²` for small `|x|`.
#[inline]
pub(crate) fn sinc_deficit_series(x: f64) -> f64 {
    even_poly(&DEFICIT_SERIES, x * x)
}

/// `sinc² x` for small `|x|`.
#[inline]
pub(crate) fn sinc_squared_series(x: f64) -> f64 {
    even_poly(&SINC2_SERIES, x * x)
}

/// `x - sin x` without cancellation.
pub fn x_minus_sin(x: f64) -> f64 {
    if x.abs() < 1.0 {
        // x³/3! - x⁵/5! + ... through x²¹.
        let x2 = x * x;
        let mut term = x * x2 / 6.0;
        let mut acc = 0.0;
        let mut n = 3.0;
        for _ in 0..10 {
            acc += term;
            term *= -x2 / ((n + 1.0) * (n + 2.0));
            n += 2.0;
        }
        acc
    } else {
        x - x.sin()
    }
}

/// `M_ρ(t)` on the real line. Even in `t`, nonnegative, and equal to
/// `1/(12(ρ² + 1))` at the origin.
pub fn m_rho_real(rho: Pitch, t: f64) -> f64 {
    let r2 = rho.squared();
    let t = t.abs();
    if t < SERIES_CROSSOVER {
        let x = 0.5 * t;
        return sinc_deficit_series(x) / (4.0 * (r2 + sinc_squared_series(x)));
    }
    let x = 0.5 * t;
    let s = x.sin();
    let numerator = 4.0 * x_minus_sin(x) * (x + s);
    let value = numerator / (t * t * (r2 * t * t + 4.0 * s * s));
    value.max(0.0)
}

/// `E_ρ(z)` together with its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpPoly {
    pub value: Complex64,
    pub first: Complex64,
    pub second: Complex64,
}

fn check_guard(z: Complex64) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite point {z}")));
    }
    if z.im.abs() > OVERFLOW_GUARD {
        return Err(Error::Overflow {
            im_abs: z.im.abs(),
            guard: OVERFLOW_GUARD,
        });
    }
    Ok(())
}

/// `4 sin²(z/2)`: half-angle form near the real axis, `2 - 2cos z` away from it.
#[inline]
fn four_sin_half_sq(z: Complex64) -> Complex64 {
    if z.im.abs() < 1.0 {
        let s = (0.5 * z).sin();
        4.0 * s * s
    } else {
        2.0 - 2.0 * z.cos()
    }
}

/// `E_ρ(z) = ρ²z² + 4 sin²(z/2)`.
pub fn e_rho(rho: Pitch, z: Complex64) -> Result<Complex64> {
    check_guard(z)?;
    Ok(rho.squared() * z * z + four_sin_half_sq(z))
}

/// `E'_ρ(z) = 2ρ²z + 2 sin z`.
pub fn e_rho_prime(rho: Pitch, z: Complex64) -> Result<Complex64> {
    check_guard(z)?;
    Ok(2.0 * rho.squared() * z + 2.0 * z.sin())
}

/// `E''_ρ(z) = 2ρ² + 2 cos z`.
pub fn e_rho_double_prime(rho: Pitch, z: Complex64) -> Result<Complex64> {
    check_guard(z)?;
    Ok(2.0 * rho.squared() + 2.0 * z.cos())
}

/// `E_ρ`, `E'_ρ` and `E''_ρ` at one point, sharing the trigonometric work.
pub fn e_rho_all(rho: Pitch, z: Complex64) -> Result<ExpPoly> {
    check_guard(z)?;
    let r2 = rho.squared();
    let (sin_z, cos_z) = (z.sin(), z.cos());
    let four_sin_sq = if z.im.abs() < 1.0 {
        let s = (0.5 * z).sin();
        4.0 * s * s
    } else {
        2.0 - 2.0 * cos_z
    };
    Ok(ExpPoly {
        value: r2 * z * z + four_sin_sq,
        first: 2.0 * r2 * z + 2.0 * sin_z,
        second: 2.0 * r2 + 2.0 * cos_z,
    })
}

/// `E_ρ` through the factorization `(2 sin(z/2) + iρz)(2 sin(z/2) - iρz)`.
pub fn e_rho_factored(rho: Pitch, z: Complex64) -> Result<Complex64> {
    check_guard(z)?;
    let s = 2.0 * (0.5 * z).sin();
    let irz = Complex64::new(0.0, rho.value()) * z;
    Ok((s + irz) * (s - irz))
}

/// Meromorphic extension of `M_ρ`. The origin is a removable singularity;
/// the nonzero roots of `E_ρ` are poles and produce [`Error::Pole`].
pub fn m_rho_complex(rho: Pitch, z: Complex64) -> Result<Complex64> {
    check_guard(z)?;
    let r2 = rho.squared();
    if z.norm() < SERIES_CROSSOVER {
        let x = 0.5 * z;
        let x2 = x * x;
        return Ok(even_poly_complex(&DEFICIT_SERIES, x2)
            / (4.0 * (r2 + even_poly_complex(&SINC2_SERIES, x2))));
    }
    let rz = rho.value() * z;
    let sin_part = four_sin_half_sq(z);
    let mut e = rz * rz + sin_part;
    let scale = rz.norm_sqr() + sin_part.norm();
    if e.norm() < 1e-8 * scale {
        e = e_rho_factored(rho, z)?;
    }
    if e.norm() <= POLE_GUARD * scale {
        return Err(Error::Pole { re: z.re, im: z.im });
    }
    // (ρ²+1)/E - 1/z² = (z² - 4sin²(z/2))/(z² E), numerator without cancellation.
    let x = 0.5 * z;
    let numerator = 4.0 * x_minus_sin_complex(x) * (x + x.sin());
    Ok(numerator / (z * z * e))
}

/// `x - sin x` for complex `x`, by series inside the unit disk.
pub fn x_minus_sin_complex(x: Complex64) -> Complex64 {
    if x.norm() < 1.0 {
        let x2 = x * x;
        let mut term = x * x2 / 6.0;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut n = 3.0;
        for _ in 0..10 {
            acc += term;
            term *= -x2 / ((n + 1.0) * (n + 2.0));
            n += 2.0;
        }
        acc
    } else {
        x - x.sin()
    }
}

/// The unregularized density `1/E_ρ(z)` used for the contour estimates.
pub fn inverse_e_rho(rho: Pitch, z: Complex64) -> Result<Complex64> {
    let e = e_rho(rho, z)?;
    let scale = rho.squared() * z.norm_sqr() + four_sin_half_sq(z).norm();
    if e.norm() <= POLE_GUARD * scale {
        return Err(Error::Pole { re: z.re, im: z.im });
    }
    Ok(1.0 / e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p(r: f64) -> Pitch {
        Pitch::new(r).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pitch_rejects_nonpositive() {
        assert!(Pitch::new(0.0).is_err());
        assert!(Pitch::new(-1.0).is_err());
        assert!(Pitch::new(f64::INFINITY).is_err());
        assert!(Pitch::new(f64::NAN).is_err());
    }

    #[test]
    fn density_at_two_pi() {
        let v = m_rho_real(p(1.0), 2.0 * PI);
        assert!((v - 1.0 / (4.0 * PI * PI)).abs() < 1e-15);
    }

    #[test]
    fn density_at_origin_is_removable_limit() {
        for &rho in &[0.01, 1.0, 7.0] {
            let limit = 1.0 / (12.0 * (rho * rho + 1.0));
            assert!((m_rho_real(p(rho), 0.0) - limit).abs() < 1e-16);
        }
        assert!((m_rho_real(p(1.0), 0.0) - 1.0 / 24.0).abs() < 1e-16);
    }

    #[test]
    fn density_near_origin_against_extended_oracle() {
        // Oracle: M_1(1e-3) from the expansion of 2 - 2cos t to t^8 in
        // exact rational arithmetic; relative error of the truncation ~1e-20.
        let t: f64 = 1e-3;
        let t2 = t * t;
        // 4 sin²(t/2) = t² - t⁴/12 + t⁶/360 - t⁸/20160
        let chord = t2 * (1.0 - t2 / 12.0 + t2 * t2 / 360.0 - t2 * t2 * t2 / 20160.0);
        // M = (t² - chord)/(t²(t² + chord)) with the numerator formed from the series.
        let num = t2 * t2 * (1.0 / 12.0 - t2 / 360.0 + t2 * t2 / 20160.0);
        let oracle = num / (t2 * (t2 + chord));
        let v = m_rho_real(p(1.0), t);
        assert!(((v - oracle) / oracle).abs() < 1e-13, "{v} vs {oracle}");
    }

    #[test]
    fn density_at_pi_for_half_pitch() {
        let oracle = 1.25 / (0.25 * PI * PI + 4.0) - 1.0 / (PI * PI);
        let v = m_rho_real(p(0.5), PI);
        assert!((v - oracle).abs() < 1e-15);
        assert!((v - 0.0921).abs() < 2e-4);
    }

    #[test]
    fn branches_agree_at_crossover() {
        for &rho in &[0.001, 0.05, 1.0, 50.0] {
            let t = SERIES_CROSSOVER;
            let x = 0.5 * t;
            let series = sinc_deficit_series(x) / (4.0 * (rho * rho + sinc_squared_series(x)));
            let closed = m_rho_real(p(rho), t);
            assert!(((series - closed) / closed).abs() < 1e-10, "rho = {rho}");
        }
    }

    #[test]
    fn sinc_form_agrees_off_origin() {
        for &rho in &[0.05, 0.5, 3.0] {
            for &t in &[0.3f64, 1.0, 2.5, 6.0, 17.0, 123.4] {
                let s = (0.5 * t).sin() / (0.5 * t);
                let sinc_form = (1.0 - s * s) / (t * t * (s * s + rho * rho));
                let v = m_rho_real(p(rho), t);
                assert!(((v - sinc_form) / sinc_form).abs() < 1e-12, "rho {rho} t {t}");
            }
        }
    }

    #[test]
    fn x_minus_sin_matches_direct_form_away_from_zero() {
        for &x in &[0.5, 0.9, 0.999] {
            assert!((x_minus_sin(x) - (x - x.sin())).abs() < 1e-15);
        }
        let x: f64 = 1e-5;
        let oracle = x.powi(3) / 6.0 - x.powi(5) / 120.0;
        assert!((x_minus_sin(x) - oracle).abs() < 1e-31);
    }

    #[test]
    fn e_rho_basic_values() {
        let r = p(0.3);
        assert_eq!(e_rho(r, c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        let v = e_rho(p(1.0), c(2.0 * PI, 0.0)).unwrap();
        assert!((v.re - 4.0 * PI * PI).abs() < 1e-12 && v.im.abs() < 1e-12);
    }

    #[test]
    fn e_rho_overflow_guard() {
        let r = p(1.0);
        assert!(matches!(e_rho(r, c(1.0, 701.0)), Err(Error::Overflow { .. })));
        assert!(e_rho(r, c(1.0, 699.0)).is_ok());
        assert!(matches!(m_rho_complex(r, c(0.0, -800.0)), Err(Error::Overflow { .. })));
    }

    #[test]
    fn e_rho_at_approximant_matches_closed_form() {
        let rho = 0.05;
        let k = 1.0;
        let a = (k * PI * rho).asinh();
        let w = c(2.0 * PI * k, 2.0 * a);
        let closed = 4.0 * k * PI * rho * rho * c(-a * a / (k * PI), 2.0 * a);
        let v = e_rho(p(rho), w).unwrap();
        assert!((v - closed).norm() < 1e-14, "{v} vs {closed}");
        let dclosed = 4.0 * k * PI * rho
            * c(rho, rho * a / (k * PI) + ((k * PI * rho).powi(2) + 1.0).sqrt());
        let dv = e_rho_prime(p(rho), w).unwrap();
        assert!((dv - dclosed).norm() < 1e-13);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let r = p(0.7);
        for &z in &[c(1.0, 0.5), c(-3.0, 2.0), c(10.0, -1.5)] {
            let h = 1e-5;
            let fd1 = (e_rho(r, z + h).unwrap() - e_rho(r, z - h).unwrap()) / (2.0 * h);
            let fd2 = (e_rho_prime(r, z + h).unwrap() - e_rho_prime(r, z - h).unwrap()) / (2.0 * h);
            let all = e_rho_all(r, z).unwrap();
            assert!((fd1 - all.first).norm() < 1e-6 * (1.0 + all.first.norm()));
            assert!((fd2 - all.second).norm() < 1e-6 * (1.0 + all.second.norm()));
            assert_eq!(all.value, e_rho(r, z).unwrap());
        }
    }

    #[test]
    fn complex_density_restricts_to_real() {
        for &rho in &[0.05, 1.0, 4.0] {
            for &t in &[0.001, 0.02, 0.7, 3.0, 9.5, 40.0] {
                let zc = m_rho_complex(p(rho), c(t, 0.0)).unwrap();
                let r = m_rho_real(p(rho), t);
                assert!(zc.im.abs() < 1e-15 * (1.0 + r));
                assert!((zc.re - r).abs() <= 1e-11 * r.max(1e-300) + 1e-14, "rho {rho} t {t}: {} vs {r}", zc.re);
            }
        }
    }

    #[test]
    fn complex_density_off_pole_near_first_root() {
        let rho = 0.05;
        let w1 = c(2.0 * PI, 2.0 * (PI * rho).asinh());
        let v = m_rho_complex(p(rho), w1 + c(0.0, 0.5)).unwrap();
        assert!(v.re.is_finite() && v.im.is_finite());
    }

    #[test]
    fn factored_form_agrees() {
        let r = p(0.37);
        for &z in &[c(0.5, 0.1), c(7.0, 1.3), c(-20.0, 3.0), c(100.0, 0.2)] {
            let a = e_rho(r, z).unwrap();
            let b = e_rho_factored(r, z).unwrap();
            assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
        }
    }
}
