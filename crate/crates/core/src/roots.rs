//! Poles of `M_ρ` in the upper half-plane.
//!
//! For each `k ≥ 1` the strip `(2k-1)π ≤ Re z ≤ 2kπ` holds exactly one root
//! `z_k` of `E_ρ` with `Im z > 0`. It sits close to
//! `w_k = 2πk + 2i arcsinh(kπρ)`, and a Rouché argument on the disk of radius
//! `r_k = 2|E_ρ(w_k)|/|E'_ρ(w_k)|` around `w_k` pins it down. This module
//! provides the approximants, the radii, a guarded Newton refinement, an
//! argument-principle counter, and an independent real-variable root finder
//! built on the solution curves of `sin ζ = ±iρζ`.

use crate::error::{Error, Result};
use crate::kernel::{e_rho, e_rho_all, e_rho_prime, Pitch};
use crate::quadrature::{try_integrate, QuadOptions};
use crate::special::bisect;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// `2√5`, the constant in the Rouché error bound.
pub const ROUCHE_CONSTANT: f64 = 4.472_135_954_999_579;

/// Pitches below `2√5/55` are covered by the closed-form Rouché bound.
pub const CERTIFICATION_LIMIT: f64 = ROUCHE_CONSTANT / 55.0;

/// Inset of the argument-principle rectangles from the real axis and walls.
pub const CONTOUR_INSET: f64 = 1e-6;

const NEWTON_MAX_ITER: usize = 100;
const MAX_HALVINGS: usize = 60;

/// A refined root together with the data that certify it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripRoot {
    pub k: u64,
    /// Closed-form approximant `w_k`.
    pub w: Complex64,
    /// Refined root `z_k`.
    pub z: Complex64,
    pub rouche_radius: f64,
    /// `2√5 ρ arcsinh(kπρ)/√((kπρ)² + 1)`.
    pub error_bound: f64,
    /// Small-pitch certificate: `ρ < 2√5/55` and `|z - w| ≤ error_bound`.
    pub certified: bool,
    /// Newton steps taken.
    pub iterations: usize,
}

impl StripRoot {
    pub fn distance(&self) -> f64 {
        (self.z - self.w).norm()
    }
}

fn check_k(k: u64) -> Result<()> {
    if k == 0 {
        Err(Error::InvalidParameter("strip index k must be >= 1".into()))
    } else {
        Ok(())
    }
}

/// `w_k(ρ) = 2πk + 2i arcsinh(kπρ)`.
pub fn approx_root(rho: Pitch, k: u64) -> Complex64 {
    let kf = k as f64;
    Complex64::new(2.0 * PI * kf, 2.0 * (kf * PI * rho.value()).asinh())
}

/// `E_ρ(w_k)` and `E'_ρ(w_k)` from their closed forms
/// `4kπρ²[-a²/(kπ) + 2ia]` and `4kπρ[ρ + i(ρa/(kπ) + √(u² + 1))]`,
/// where `u = kπρ` and `a = arcsinh u`.
pub fn approx_values(rho: Pitch, k: u64) -> (Complex64, Complex64) {
    let r = rho.value();
    let kpi = k as f64 * PI;
    let u = kpi * r;
    let a = u.asinh();
    let e = 4.0 * kpi * r * r * Complex64::new(-a * a / kpi, 2.0 * a);
    let de = 4.0 * kpi * r * Complex64::new(r, r * a / kpi + u.hypot(1.0));
    (e, de)
}

/// `r_k = 2|E_ρ(w_k)|/|E'_ρ(w_k)|`.
pub fn rouche_radius(rho: Pitch, k: u64) -> f64 {
    let r = rho.value();
    let kpi = k as f64 * PI;
    let u = kpi * r;
    let a = u.asinh();
    // The common factor 4kπρ cancels.
    let num = r * (a * a / kpi).hypot(2.0 * a);
    let den = r.hypot(r * a / kpi + u.hypot(1.0));
    2.0 * num / den
}

/// `2√5 ρ arcsinh(kπρ)/√((kπρ)² + 1)`.
pub fn error_bound(rho: Pitch, k: u64) -> f64 {
    let u = k as f64 * PI * rho.value();
    ROUCHE_CONSTANT * rho.value() * u.asinh() / u.hypot(1.0)
}

/// Rouché certificate on the disk `|z - w_k| ≤ r_k` valid for every pitch.
///
/// With `M ≥ sup |E''|` on the disk, one root is certified whenever
/// `η = M r_k/|E'(w_k)| < 1`, and then `|E'(z_k)/E'(w_k) - 1| ≤ η`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskCertificate {
    pub radius: f64,
    pub second_derivative_bound: f64,
    pub eta: f64,
}

impl DiskCertificate {
    pub fn holds(&self) -> bool {
        self.eta < 1.0
    }
}

pub fn disk_certificate(rho: Pitch, k: u64) -> DiskCertificate {
    let r = rouche_radius(rho, k);
    let (_, de) = approx_values(rho, k);
    let im_w = approx_root(rho, k).im;
    // |cos z| ≤ cosh(Im z).
    let m = 2.0 * rho.squared() + 2.0 * (im_w + r).cosh();
    DiskCertificate {
        radius: r,
        second_derivative_bound: m,
        eta: m * r / de.norm(),
    }
}

/// Smallest relative margin `1 - |E - L|/|L|` of the Rouché inequality over
/// `samples` points of the circle `|z - w_k| = r_k`, with
/// `L(z) = E'_ρ(w_k)(z - w_k)`. Positive means the inequality held everywhere.
pub fn rouche_boundary_margin(rho: Pitch, k: u64, samples: usize) -> Result<f64> {
    check_k(k)?;
    let w = approx_root(rho, k);
    let r = rouche_radius(rho, k);
    let dw = e_rho_prime(rho, w)?;
    let mut margin = f64::INFINITY;
    for j in 0..samples.max(1) {
        let theta = 2.0 * PI * j as f64 / samples.max(1) as f64;
        let h = Complex64::from_polar(r, theta);
        let l = dw * h;
        let e = e_rho(rho, w + h)?;
        margin = margin.min(1.0 - (e - l).norm() / l.norm());
    }
    Ok(margin)
}

/// `true` when `Re z ∈ [(2k-1)π, 2kπ]` and `Im z > 0`.
pub fn in_strip(k: u64, z: Complex64) -> bool {
    let kf = k as f64;
    z.im > 0.0 && z.re >= (2.0 * kf - 1.0) * PI && z.re <= 2.0 * kf * PI
}

/// Damped Newton iteration on `E_ρ` from `start`, with every step capped at
/// `trust`. Returns the root and the number of steps.
pub fn newton(
    rho: Pitch,
    k: u64,
    start: Complex64,
    trust: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(Complex64, usize)> {
    let mut z = start;
    let mut vals = e_rho_all(rho, z)?;
    for it in 0..max_iter {
        if vals.first.norm() == 0.0 {
            return Err(Error::DerivativeUnderflow { k, modulus: 0.0 });
        }
        let mut step = -vals.value / vals.first;
        if step.norm() <= tol.max(4.0 * f64::EPSILON * z.norm()) {
            return Ok((z + step, it + 1));
        }
        if trust > 0.0 && step.norm() > trust {
            step *= trust / step.norm();
        }
        let current = vals.value.norm();
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let candidate = z + step;
            let next = e_rho_all(rho, candidate)?;
            if next.value.norm() < current {
                z = candidate;
                vals = next;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // No decrease from any damped step: |E| is at round-off level.
            let floor = 64.0 * f64::EPSILON * (rho.squared() * z.norm_sqr() + 4.0 * (0.5 * z).sin().norm_sqr());
            if current <= floor {
                return Ok((z, it + 1));
            }
            return Err(Error::NonConvergence { k, iterations: it + 1 });
        }
    }
    Err(Error::NonConvergence {
        k,
        iterations: max_iter,
    })
}

fn strip_root(rho: Pitch, k: u64, z: Complex64, iterations: usize) -> Result<StripRoot> {
    if !in_strip(k, z) {
        return Err(Error::StripViolation { k, re: z.re, im: z.im });
    }
    let w = approx_root(rho, k);
    let bound = error_bound(rho, k);
    Ok(StripRoot {
        k,
        w,
        z,
        rouche_radius: rouche_radius(rho, k),
        error_bound: bound,
        certified: rho.value() < CERTIFICATION_LIMIT && (z - w).norm() <= bound,
        iterations,
    })
}

/// Newton refinement of `z_k` from `w_k`, trust region `r_k`.
///
/// Convergence means the last Newton correction `|E/E'|` is at most `tol`.
pub fn refine_root(rho: Pitch, k: u64, tol: f64) -> Result<StripRoot> {
    refine_root_with_budget(rho, k, tol, NEWTON_MAX_ITER)
}

/// [`refine_root`] with an explicit iteration budget.
pub fn refine_root_with_budget(rho: Pitch, k: u64, tol: f64, max_iter: usize) -> Result<StripRoot> {
    check_k(k)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    let w = approx_root(rho, k);
    let trust = rouche_radius(rho, k).max(1e-3);
    let (z, iterations) = newton(rho, k, w, trust, tol, max_iter)?;
    strip_root(rho, k, z, iterations)
}

/// [`refine_root`], falling back to [`curve_oracle`] plus a Newton polish
/// when the iteration from `w_k` fails.
pub fn refine_root_robust(rho: Pitch, k: u64, tol: f64, max_iter: usize) -> Result<StripRoot> {
    match refine_root_with_budget(rho, k, tol, max_iter) {
        Ok(root) => Ok(root),
        Err(Error::NonConvergence { .. }) | Err(Error::StripViolation { .. }) => {
            let start = curve_oracle(rho, k, tol)?;
            let (z, iterations) = newton(rho, k, start, 0.0, tol, NEWTON_MAX_ITER)?;
            strip_root(rho, k, z, iterations)
        }
        Err(e) => Err(e),
    }
}

/// Roots `z_1, ..., z_kmax`, refined in parallel.
pub fn refine_roots(rho: Pitch, kmax: u64, tol: f64) -> Result<Vec<StripRoot>> {
    (1..=kmax)
        .into_par_iter()
        .map(|k| refine_root(rho, k, tol))
        .collect()
}

/// Result of an argument-principle count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroCount {
    pub count: u64,
    /// `(1/2πi)∮ E'/E dz` before rounding.
    pub winding: f64,
    /// Distance of the winding number from `count`.
    pub distance: f64,
}

/// Argument-principle count of zeros of `E_ρ` inside `[x0, x1] × [y0, y1]`.
pub fn count_zeros_in(rho: Pitch, x0: f64, x1: f64, y0: f64, y1: f64) -> Result<ZeroCount> {
    if !(x0 < x1 && y0 < y1) {
        return Err(Error::InvalidParameter(format!(
            "degenerate rectangle [{x0}, {x1}] × [{y0}, {y1}]"
        )));
    }
    let corners = [
        Complex64::new(x0, y0),
        Complex64::new(x1, y0),
        Complex64::new(x1, y1),
        Complex64::new(x0, y1),
    ];
    let log_derivative = |z: Complex64| -> Result<Complex64> {
        let v = e_rho_all(rho, z)?;
        if v.value.norm() == 0.0 {
            return Err(Error::IndeterminateCount {
                winding: f64::NAN,
                min_modulus: 0.0,
            });
        }
        Ok(v.first / v.value)
    };
    let opts = QuadOptions::absolute(1e-9).with_panel_width(0.5);
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..4 {
        let (a, b) = (corners[i], corners[(i + 1) % 4]);
        let dir = b - a;
        let edge = try_integrate(|s| Ok(log_derivative(a + dir * s)? * dir), 0.0, 1.0, opts)
            .map_err(|e| match e {
                Error::IndeterminateCount { .. } | Error::ToleranceNotReached { .. } | Error::Domain(_) => {
                    Error::IndeterminateCount {
                        winding: f64::NAN,
                        min_modulus: 0.0,
                    }
                }
                other => other,
            })?;
        total += edge.value;
    }
    let winding = total.im / (2.0 * PI);
    let rounded = winding.round().max(0.0);
    let distance = (winding - rounded).abs();
    if distance >= 0.25 || total.re.abs() / (2.0 * PI) >= 0.25 {
        return Err(Error::IndeterminateCount {
            winding,
            min_modulus: f64::NAN,
        });
    }
    Ok(ZeroCount {
        count: rounded as u64,
        winding,
        distance,
    })
}

/// Default rectangle height `2 arcsinh(kπρ) + 2`.
pub fn default_height(rho: Pitch, k: u64) -> f64 {
    2.0 * (k as f64 * PI * rho.value()).asinh() + 2.0
}

/// Zeros of `E_ρ` in `[(2k-1)π, 2kπ] × [δ, height]`.
pub fn count_zeros_rectangle(rho: Pitch, k: u64, height: f64) -> Result<ZeroCount> {
    check_k(k)?;
    let kf = k as f64;
    count_zeros_in(rho, (2.0 * kf - 1.0) * PI, 2.0 * kf * PI, CONTOUR_INSET, height)
}

/// Zeros of `E_ρ` in the complementary strip
/// `[(2k-2)π + δ, (2k-1)π - δ] × [δ, height]`, which holds none.
pub fn count_zeros_gap(rho: Pitch, k: u64, height: f64) -> Result<ZeroCount> {
    check_k(k)?;
    let kf = k as f64;
    count_zeros_in(
        rho,
        (2.0 * kf - 2.0) * PI + CONTOUR_INSET,
        (2.0 * kf - 1.0) * PI - CONTOUR_INSET,
        CONTOUR_INSET,
        height,
    )
}

/// Offset from the asymptote of `Γ_S` at the left end of the bracket.
const ORACLE_OFFSET: f64 = 1e-9;

/// Point `(x, Γ_S(x))` on the solution curve of `sρx = cos x sinh y`,
/// `s = (-1)^k`, returned as `(y, φ(x))` where
/// `φ(x) = sρΓ_S(x) + sin x cosh Γ_S(x)` vanishes at the root.
fn oracle_residual(rho: f64, s: f64, x: f64) -> (f64, f64) {
    let q = rho * x / x.cos();
    // sinh y = s q > 0 inside the strip, cosh y = √(1 + q²).
    let y = (s * q).asinh();
    let phi = s * rho * y + x.sin() * q.hypot(1.0);
    (y, phi)
}

/// Root `z_k` found without complex arithmetic.
///
/// With `ζ = z/2 = x + iy` and `s = (-1)^k`, the root in strip `k` solves
/// `sin ζ = s iρζ`,
/// i.e. `sρx = cos x sinh y` and `-sρy = sin x cosh y`. The first equation
/// gives `y = arcsinh(sρx sec x)`; substituting into the second leaves a
/// scalar equation bisected on `[(k - 1/2)π, kπ]`.
pub fn curve_oracle(rho: Pitch, k: u64, tol: f64) -> Result<Complex64> {
    check_k(k)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    let r = rho.value();
    let s = if k % 2 == 0 { 1.0 } else { -1.0 };
    let kf = k as f64;
    let lo = (kf - 0.5) * PI + ORACLE_OFFSET * kf.max(1.0);
    let hi = kf * PI;
    let x = bisect(|x| oracle_residual(r, s, x).1, lo, hi, 0.0).ok_or(Error::NoSignChange { k })?;
    let (y, _) = oracle_residual(r, s, x);
    Ok(Complex64::new(2.0 * x, 2.0 * y))
}

/// Residuals of the two real equations at `z = 2(x + iy)`, scaled by `ρ|ζ|`.
pub fn oracle_equations(rho: Pitch, k: u64, z: Complex64) -> (f64, f64) {
    let r = rho.value();
    let s = if k % 2 == 0 { 1.0 } else { -1.0 };
    let (x, y) = (0.5 * z.re, 0.5 * z.im);
    let scale = r * x.hypot(y);
    (
        (s * r * x - x.cos() * y.sinh()) / scale,
        (s * r * y + x.sin() * y.cosh()) / scale,
    )
}
