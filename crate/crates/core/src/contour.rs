//! The contours `Γ_R` used to close the real line, taken along
//! `R_k = (2k + 1/2)π` so they never meet a pole.
//!
//! `Γ_R` runs along `[-R, R]`, up the right side to `R + iR`, along the arc
//! `|z| = R√2` to `-R + iR`, and down the left side. The side and arc
//! estimates use the bare density `1/E_ρ(z)`, whose constant factor and
//! `-1/z²` correction do not affect the limits; the closed-contour check
//! uses the full `M_ρ`.

use crate::error::{Error, Result};
use crate::kernel::{inverse_e_rho, m_rho_complex, m_rho_real, Pitch};
use crate::quadrature::{integrate, try_integrate, QuadOptions};
use crate::residue::{residue_term, series_roots, weight};
use crate::roots::{count_zeros_in, default_height, CONTOUR_INSET};
use crate::sum::CompensatedSum;
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

const SIDE_TOL: f64 = 1e-13;
const SIDE_PANEL: f64 = 1.0;

/// `R_k = (2k + 1/2)π`.
pub fn contour_radius(k: u64) -> f64 {
    (2.0 * k as f64 + 0.5) * PI
}

fn check_k(k: u64) -> Result<()> {
    if k == 0 {
        Err(Error::InvalidParameter("contour index k must be >= 1".into()))
    } else {
        Ok(())
    }
}

fn side_integrals<F>(density: F, radius: f64, tol: f64) -> Result<(Complex64, Complex64)>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    let opts = QuadOptions::absolute(tol).with_panel_width(SIDE_PANEL);
    let i = Complex64::new(0.0, 1.0);
    // Γ_2: z = R + it, dz = i dt.
    let right = try_integrate(|t| Ok(density(Complex64::new(radius, t))? * i), 0.0, radius, opts)?;
    // Γ_4: z = -R + i(R - t), dz = -i dt.
    let left = try_integrate(
        |t| Ok(density(Complex64::new(-radius, radius - t))? * -i),
        0.0,
        radius,
        opts,
    )?;
    Ok((right.value, left.value))
}

fn arc_integral_of<F>(density: F, radius: f64, tol: f64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    let r = radius * SQRT_2;
    let opts = QuadOptions::absolute(tol).with_panel_width(1.0 / r);
    let i = Complex64::new(0.0, 1.0);
    // z = R√2 e^{iθ}, dz = iz dθ.
    Ok(try_integrate(
        |theta| {
            let z = Complex64::from_polar(r, theta);
            Ok(density(z)? * i * z)
        },
        FRAC_PI_4,
        3.0 * FRAC_PI_4,
        opts,
    )?
    .value)
}

/// Both side integrals of `1/E_ρ` on `Γ_{R_k}`, `(∫_{Γ_2}, ∫_{Γ_4})`.
pub fn side_integral_parts(rho: Pitch, k: u64) -> Result<(Complex64, Complex64)> {
    check_k(k)?;
    side_integrals(|z| inverse_e_rho(rho, z), contour_radius(k), SIDE_TOL)
}

/// `|∫_{Γ_2} + ∫_{Γ_4}|` of `1/E_ρ` on `Γ_{R_k}`.
pub fn side_integral(rho: Pitch, k: u64) -> Result<f64> {
    let (right, left) = side_integral_parts(rho, k)?;
    Ok((right + left).norm())
}

/// `2∫_0^R |Im 1/E_ρ(R + it)| dt`, which bounds [`side_integral`].
pub fn side_integral_bound(rho: Pitch, k: u64) -> Result<f64> {
    check_k(k)?;
    let radius = contour_radius(k);
    let opts = QuadOptions::absolute(SIDE_TOL).with_panel_width(SIDE_PANEL);
    let r = try_integrate(
        |t| Ok(inverse_e_rho(rho, Complex64::new(radius, t))?.im.abs()),
        0.0,
        radius,
        opts,
    )?;
    Ok(2.0 * r.value)
}

/// Side contribution of the correction `-1/z²` by quadrature; the exact
/// value is `-1/R_k`.
pub fn regularization_side_integral(k: u64) -> Result<Complex64> {
    check_k(k)?;
    let (right, left) = side_integrals(|z| Ok(-1.0 / (z * z)), contour_radius(k), SIDE_TOL)?;
    Ok(right + left)
}

/// `|∫_{Γ_3}|` of `1/E_ρ` along the arc of `Γ_{R_k}`.
pub fn arc_integral(rho: Pitch, k: u64) -> Result<f64> {
    check_k(k)?;
    let radius = contour_radius(k);
    // Scale-aware tolerance: the arc integral is exponentially small.
    let size = arc_magnitude(rho, k)?;
    let tol = (1e-10 * size).max(f64::MIN_POSITIVE);
    Ok(arc_integral_of(|z| inverse_e_rho(rho, z), radius, tol)?.norm())
}

/// `max |1/E_ρ|` on the arc times its length, a cheap upper estimate.
fn arc_magnitude(rho: Pitch, k: u64) -> Result<f64> {
    let r = contour_radius(k) * SQRT_2;
    let mut peak: f64 = 0.0;
    for j in 0..=64 {
        let theta = FRAC_PI_4 + 0.5 * PI * j as f64 / 64.0;
        peak = peak.max(inverse_e_rho(rho, Complex64::from_polar(r, theta))?.norm());
    }
    Ok(peak * 0.5 * PI * r)
}

/// `|1/E_ρ(iR_k√2)|`, the density at the top of the arc.
pub fn arc_apex_density(rho: Pitch, k: u64) -> Result<f64> {
    check_k(k)?;
    Ok(inverse_e_rho(rho, Complex64::new(0.0, contour_radius(k) * SQRT_2))?.norm())
}

/// Pieces of `∮_{Γ_{R_k}} M_ρ dz` and the residue sum it should equal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourReport {
    pub k: u64,
    pub radius: f64,
    pub bottom: f64,
    pub sides: Complex64,
    pub arc: Complex64,
    pub contour_total: Complex64,
    /// `2πi Σ Res` over the `2k` poles inside.
    pub residue_total: f64,
    pub poles_inside: u64,
    pub discrepancy: f64,
    pub passed: bool,
}

/// Compare `∮_{Γ_{R_k}} M_ρ dz` against `2πi` times the residues at
/// `z_j, -conj(z_j)`, `j ≤ k`. Passes when the two agree to
/// `tol · max(1, |residue_total|)`.
pub fn closed_contour_check(rho: Pitch, k: u64, tol: f64) -> Result<ContourReport> {
    check_k(k)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let radius = contour_radius(k);
    let quad_tol = 1e-3 * tol;
    let bottom = 2.0
        * integrate(
            |t| m_rho_real(rho, t),
            0.0,
            radius,
            QuadOptions::absolute(0.5 * quad_tol).with_panel_width(PI),
        )?
        .value;
    let density = |z: Complex64| m_rho_complex(rho, z);
    let (right, left) = side_integrals(density, radius, quad_tol)?;
    let arc = arc_integral_of(density, radius, quad_tol)?;
    let sides = right + left;
    let contour_total = bottom + sides + arc;

    let roots = series_roots(rho, k)?;
    let mut acc = CompensatedSum::new();
    for root in &roots {
        acc.add(weight(rho, residue_term(rho, root)?));
    }
    let residue_total = acc.value();
    let discrepancy = (contour_total - residue_total).norm();
    Ok(ContourReport {
        k,
        radius,
        bottom,
        sides,
        arc,
        contour_total,
        residue_total,
        poles_inside: 2 * roots.len() as u64,
        discrepancy,
        passed: discrepancy <= tol * residue_total.abs().max(1.0),
    })
}

/// Argument-principle count of roots with `0 < Re z < R_k` below the
/// default height of strip `k`; equals `k`, and doubling by symmetry gives
/// the number of poles inside `Γ_{R_k}`.
pub fn count_poles_right_half(rho: Pitch, k: u64) -> Result<u64> {
    check_k(k)?;
    let count = count_zeros_in(
        rho,
        CONTOUR_INSET,
        contour_radius(k),
        CONTOUR_INSET,
        default_height(rho, k),
    )?;
    Ok(count.count)
}
