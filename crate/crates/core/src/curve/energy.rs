//! Pointwise and total O'Hara energies, and the Möbius gradient.

use super::{Curve, Helix, Vec3};
use crate::error::{Error, Result};
use crate::kernel::Pitch;
use crate::quadrature::{try_integrate, QuadOptions};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Below this value of `κD` the integrand is replaced by its Taylor model.
const TAYLOR_REACH: f64 = 1e-3;
/// Chords shorter than this fraction of the arc signal self-contact.
const CONTACT_GUARD: f64 = 1e-8;
/// Grid used to look for self-contact before integrating.
const CONTACT_SCAN: usize = 512;
/// Pairs closer than this (in units of `1/κ`) come from an even quadratic
/// fit; the chord loses about `ε h` there, so the pair loses `ε/h³`.
const GRADIENT_CUTOFF: f64 = 1e-2;

/// `E^{j,p}(γ, s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyDensityValue {
    pub s: f64,
    pub value: f64,
    pub j: f64,
    pub p: f64,
    /// Quadrature error estimate plus any truncation bound.
    pub error: f64,
}

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")))
    }
}

fn check_exponents(j: f64, p: f64) -> Result<()> {
    if !(j >= 1.0 && p >= 1.0 && j.is_finite() && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("need j, p >= 1, got ({j}, {p})")));
    }
    if p * (j - 2.0) >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "E^{{{j},{p}}} diverges on the diagonal: p(j - 2) >= 1"
        )));
    }
    Ok(())
}

fn check_parameter<C: Curve + ?Sized>(curve: &C, s: f64) -> Result<()> {
    let (a, b) = curve.domain();
    if !s.is_finite() || (!curve.is_closed() && !(a..=b).contains(&s)) {
        return Err(Error::InvalidParameter(format!(
            "parameter {s} outside the curve's domain [{a}, {b}]"
        )));
    }
    Ok(())
}

/// Intervals `t` runs over, split at `s`.
fn partner_ranges<C: Curve + ?Sized>(curve: &C, s: f64) -> [(f64, f64); 2] {
    let (a, b) = curve.domain();
    if curve.is_closed() {
        let half = 0.5 * (b - a);
        [(s - half, s), (s, s + half)]
    } else {
        [(a, s), (s, b)]
    }
}

/// Minimum of `|γ(t) - γ(s)|/D(t, s)` over partners away from the diagonal:
/// a grid scan, then golden-section refinement around the lowest points.
fn min_chord_ratio<C: Curve + ?Sized>(curve: &C, s: f64, reach: f64) -> (f64, f64) {
    let total = if curve.is_closed() { curve.length() } else { 0.0 };
    let ratio = |t: f64| -> f64 {
        let arc = curve.arc_length(s, t);
        let d = if curve.is_closed() { arc.min(total - arc) } else { arc };
        if d <= reach {
            return 1.0;
        }
        curve.chord(s, t).norm() / d
    };
    let mut best = (1.0, s);
    for (lo, hi) in partner_ranges(curve, s) {
        let h = (hi - lo) / CONTACT_SCAN as f64;
        let grid: Vec<f64> = (0..=CONTACT_SCAN).map(|i| ratio(lo + h * i as f64)).collect();
        for (i, &v) in grid.iter().enumerate() {
            if v < best.0 {
                best = (v, lo + h * i as f64);
            }
        }
        for i in 1..CONTACT_SCAN {
            if grid[i] <= grid[i - 1] && grid[i] <= grid[i + 1] && grid[i] < 1.0 {
                let t = golden_min(ratio, lo + h * (i - 1) as f64, lo + h * (i + 1) as f64);
                let v = ratio(t).min(grid[i]);
                if v < best.0 {
                    best = (v, t);
                }
            }
        }
    }
    best
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        x1
    } else {
        x2
    }
}

/// `E^{j,p}(γ, s) = ∫ (|γ(t) - γ(s)|^{-j} - D(t, s)^{-j})^p |γ̇(t)| dt`, with
/// `D` the intrinsic distance (the shorter arc on closed curves).
///
/// Within `κD < 10⁻³` of the diagonal the integrand is replaced by
/// `(jκ²D^{2-j}/24)^p |γ̇|`, the leading term of its expansion. Curves whose
/// chord/arc ratio drops below `10⁻⁴` away from the diagonal are rejected as
/// self-touching.
pub fn pointwise_energy<C: Curve + ?Sized>(
    curve: &C,
    s: f64,
    j: f64,
    p: f64,
    tol: f64,
) -> Result<EnergyDensityValue> {
    check_exponents(j, p)?;
    check_tol(tol)?;
    check_parameter(curve, s)?;
    let tail = curve.energy_tail(s, j, p)?;
    let kappa = curve.curvature(s);
    // At inflection points the curvature alone says nothing about how far the
    // Taylor model holds, so the reach is also capped by the curve's own size.
    let (a, b) = curve.domain();
    let scale = curve.speed(s) * (b - a);
    let reach = TAYLOR_REACH * scale.min(1.0 / kappa);
    let model = j * kappa * kappa / 24.0;
    let total = if curve.is_closed() { curve.length() } else { 0.0 };
    let (contact, at) = min_chord_ratio(curve, s, reach);
    if contact <= CONTACT_GUARD.sqrt() {
        return Err(Error::Degenerate(format!(
            "chord/arc ratio {contact:.3e} between s = {s} and t = {at}: the curve touches itself"
        )));
    }

    let integrand = |t: f64| -> Result<f64> {
        let arc = curve.arc_length(s, t);
        let d = if curve.is_closed() { arc.min(total - arc) } else { arc };
        let speed = curve.speed(t);
        if d < reach || d == 0.0 {
            return Ok((model * d.powf(2.0 - j)).powf(p) * speed);
        }
        let c = curve.chord(s, t).norm();
        if c <= CONTACT_GUARD * d {
            return Err(Error::Degenerate(format!(
                "chord vanishes between s = {s} and t = {t}: the curve touches itself"
            )));
        }
        let gap = if j == 2.0 {
            (d - c) * (d + c) / (c * c * d * d)
        } else {
            c.powf(-j) - d.powf(-j)
        };
        Ok(gap.max(0.0).powf(p) * speed)
    };

    let opts = QuadOptions::absolute(0.25 * tol).with_panel_width(curve.panel_width());
    let mut value = 0.0;
    let mut error = 0.0;
    for (lo, hi) in partner_ranges(curve, s) {
        let r = try_integrate(integrand, lo, hi, opts)?;
        value += r.value;
        error += r.error;
    }
    if let Some((estimate, bound)) = tail {
        value += estimate;
        error += bound;
    }
    Ok(EnergyDensityValue {
        s,
        value: value.max(0.0),
        j,
        p,
        error,
    })
}

/// `E^{j,p}(γ) = ∫ E^{j,p}(γ, s) |γ̇(s)| ds` over the curve's domain.
pub fn total_energy<C: Curve + ?Sized>(curve: &C, j: f64, p: f64, tol: f64) -> Result<f64> {
    check_exponents(j, p)?;
    check_tol(tol)?;
    if curve.is_unbounded() {
        return Err(Error::InvalidParameter(
            "total energy of an unbounded curve is infinite".into(),
        ));
    }
    let (a, b) = curve.domain();
    let inner = 0.25 * tol / curve.length();
    let r = try_integrate(
        |s| Ok(pointwise_energy(curve, s, j, p, inner)?.value * curve.speed(s)),
        a,
        b,
        QuadOptions::absolute(0.5 * tol).with_panel_width(curve.panel_width()),
    )?;
    Ok(r.value)
}

/// `2N (π/3) √(1+ρ²) / ρ³`, the bound on the energy of `H_ρ ∩ {|z| ≤ N}`.
pub fn truncated_helix_bound(rho: Pitch, half_height: f64) -> f64 {
    let r = rho.value();
    2.0 * half_height * (PI / 3.0) * (1.0 + r * r).sqrt() / r.powi(3)
}

/// Möbius energy of the helix piece `|ρt| ≤ N` by double quadrature.
pub fn truncated_helix_energy(rho: Pitch, half_height: f64, tol: f64) -> Result<f64> {
    check_tol(tol)?;
    if !(half_height.is_finite() && half_height > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "half height must be positive, got {half_height}"
        )));
    }
    let half_range = half_height / rho.value();
    let helix = Helix::truncated(rho, half_range)?;
    let per_axis = (2.0 * half_range / helix.panel_width()).ceil().max(1.0);
    if per_axis * per_axis > QuadOptions::DEFAULT_BUDGET as f64 {
        return Err(Error::CostGuard(format!(
            "N/ρ = {half_range} needs about {:.0} panels",
            per_axis * per_axis
        )));
    }
    total_energy(&helix, 2.0, 1.0, tol)
}

/// Integrand of the Möbius gradient at `t`, evaluated at partner `s`:
/// `2 [2 P(γ(s) - γ(t))/|γ(s) - γ(t)|² - κN(t)] |γ̇(s)| / |γ(s) - γ(t)|²`,
/// where `P` projects away the unit tangent at `t`.
pub fn gradient_integrand<C: Curve + ?Sized>(curve: &C, t: f64, s: f64) -> Result<Vec3> {
    let delta = curve.chord(t, s);
    let c2 = delta.norm_squared();
    if !(c2 > 0.0) {
        return Err(Error::Degenerate(format!(
            "chord vanishes between t = {t} and s = {s}"
        )));
    }
    let tan = curve.unit_tangent(t);
    let normal_part = delta - tan * delta.dot(&tan);
    let bracket = normal_part * (2.0 / c2) - curve.curvature_vector(t);
    Ok(bracket * (2.0 * curve.speed(s) / c2))
}

/// The Möbius gradient at `t` as a principal value: partners at `t ± h` are
/// summed before integrating in `h`, which cancels the odd `1/h` part.
/// The pair is even in `h`; below `h₀ = 10⁻²/(κ|γ̇|)` it is replaced by the
/// quadratic `a + bh²` through its values at `h₀` and `2h₀`.
pub fn mobius_gradient_field<C: Curve + ?Sized>(curve: &C, t: f64, tol: f64) -> Result<Vec3> {
    check_tol(tol)?;
    check_parameter(curve, t)?;
    let (a, b) = curve.domain();
    let reach = if curve.is_closed() { 0.5 * (b - a) } else { (t - a).min(b - t) };
    let scale = curve.curvature(t) * curve.speed(t);
    let cutoff = (GRADIENT_CUTOFF / scale.max(1.0 / (b - a))).min(0.25 * reach);
    let raw = |h: f64| -> Result<Vec3> {
        Ok(gradient_integrand(curve, t, t + h)? + gradient_integrand(curve, t, t - h)?)
    };
    let near = if cutoff > 0.0 {
        let (p1, p2) = (raw(cutoff)?, raw(2.0 * cutoff)?);
        Some(((4.0 * p1 - p2) / 3.0, (p2 - p1) / (3.0 * cutoff * cutoff)))
    } else {
        None
    };
    let pair = |h: f64| -> Result<Vec3> {
        match near {
            Some((a0, b0)) if h < cutoff => Ok(a0 + b0 * (h * h)),
            _ => raw(h),
        }
    };
    let opts = QuadOptions::absolute(0.5 * tol).with_panel_width(curve.panel_width());
    if curve.is_closed() {
        return Ok(try_integrate(pair, 0.0, reach, opts)?.value);
    }
    let mut total = if reach > 0.0 {
        try_integrate(pair, 0.0, reach, opts)?.value
    } else {
        Vec3::zeros()
    };
    let (lo, hi) = if b - t > t - a { (t + reach, b) } else { (a, t - reach) };
    if hi > lo {
        let one_sided = |s: f64| gradient_integrand(curve, t, s);
        total += try_integrate(one_sided, lo, hi, opts)?.value;
    }
    Ok(total)
}
