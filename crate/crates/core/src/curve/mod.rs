//! Curves in ℝ³ and the O'Hara energies `E^{j,p}` on them.
//!
//! A [`Curve`] exposes position, derivatives, chords and arclength. Analytic
//! curves override [`Curve::chord`] with product formulas, so the chord-arc
//! difference near the diagonal keeps its digits.

mod energy;
mod sampled;

pub use energy::{
    gradient_integrand, mobius_gradient_field, pointwise_energy, total_energy,
    truncated_helix_bound, truncated_helix_energy, EnergyDensityValue,
};
pub use sampled::SampledCurve;

use crate::error::{Error, Result};
use crate::kernel::Pitch;
use crate::quadrature::density_cutoff;
use nalgebra::{Rotation3, Vector3};
use std::f64::consts::PI;

pub type Vec3 = Vector3<f64>;

pub trait Curve: Sync {
    /// Parameter interval; one period `[a, a + P)` for closed curves.
    fn domain(&self) -> (f64, f64);
    fn is_closed(&self) -> bool;
    fn position(&self, t: f64) -> Vec3;
    fn velocity(&self, t: f64) -> Vec3;
    fn acceleration(&self, t: f64) -> Vec3;

    /// `γ(t) - γ(s)`.
    fn chord(&self, s: f64, t: f64) -> Vec3 {
        self.position(t) - self.position(s)
    }

    /// Length of the parameter arc between `s` and `t`. Closed curves accept
    /// parameters outside one period.
    fn arc_length(&self, s: f64, t: f64) -> f64;

    fn length(&self) -> f64 {
        let (a, b) = self.domain();
        self.arc_length(a, b)
    }

    /// Largest quadrature panel, in parameter units.
    fn panel_width(&self) -> f64 {
        let (a, b) = self.domain();
        (b - a) / 16.0
    }

    /// True for finite pieces standing in for an infinite curve.
    fn is_unbounded(&self) -> bool {
        false
    }

    /// Contribution of the part of an unbounded curve outside the domain to
    /// the pointwise energy at `s`, as `(estimate, bound)`.
    fn energy_tail(&self, _s: f64, _j: f64, _p: f64) -> Result<Option<(f64, f64)>> {
        Ok(None)
    }

    fn speed(&self, t: f64) -> f64 {
        self.velocity(t).norm()
    }

    fn unit_tangent(&self, t: f64) -> Vec3 {
        self.velocity(t).normalize()
    }

    fn curvature(&self, t: f64) -> f64 {
        let v = self.velocity(t);
        v.cross(&self.acceleration(t)).norm() / v.norm().powi(3)
    }

    /// `κN` at `t`.
    fn curvature_vector(&self, t: f64) -> Vec3 {
        let v = self.velocity(t);
        let a = self.acceleration(t);
        let tan = v.normalize();
        (a - tan * a.dot(&tan)) / v.norm_squared()
    }
}

impl<C: Curve + ?Sized> Curve for &C {
    fn domain(&self) -> (f64, f64) {
        (**self).domain()
    }
    fn is_closed(&self) -> bool {
        (**self).is_closed()
    }
    fn position(&self, t: f64) -> Vec3 {
        (**self).position(t)
    }
    fn velocity(&self, t: f64) -> Vec3 {
        (**self).velocity(t)
    }
    fn acceleration(&self, t: f64) -> Vec3 {
        (**self).acceleration(t)
    }
    fn chord(&self, s: f64, t: f64) -> Vec3 {
        (**self).chord(s, t)
    }
    fn arc_length(&self, s: f64, t: f64) -> f64 {
        (**self).arc_length(s, t)
    }
    fn length(&self) -> f64 {
        (**self).length()
    }
    fn panel_width(&self) -> f64 {
        (**self).panel_width()
    }
    fn is_unbounded(&self) -> bool {
        (**self).is_unbounded()
    }
    fn energy_tail(&self, s: f64, j: f64, p: f64) -> Result<Option<(f64, f64)>> {
        (**self).energy_tail(s, j, p)
    }
}

/// `H_ρ(t) = (cos t, sin t, ρt)` on `[-L, L]`.
#[derive(Debug, Clone, Copy)]
pub struct Helix {
    rho: Pitch,
    half_range: f64,
    unbounded: bool,
}

impl Helix {
    /// The finite piece `|t| ≤ L`.
    pub fn truncated(rho: Pitch, half_range: f64) -> Result<Self> {
        if !(half_range.is_finite() && half_range > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "helix half range must be positive, got {half_range}"
            )));
        }
        Ok(Helix {
            rho,
            half_range,
            unbounded: false,
        })
    }

    /// The whole helix, integrated on `|t| ≤ T` with an analytic tail for
    /// `E^{2,1}`. `T` is chosen so that the tail error at `s = 0` is at most
    /// `tol/2`.
    pub fn unbounded(rho: Pitch, tol: f64) -> Result<Self> {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        let (cutoff, _) = density_cutoff(rho, tol * (rho.squared() + 1.0).sqrt());
        Ok(Helix {
            rho,
            half_range: cutoff,
            unbounded: true,
        })
    }

    pub fn rho(&self) -> Pitch {
        self.rho
    }

    pub fn half_range(&self) -> f64 {
        self.half_range
    }

    fn stretch(&self) -> f64 {
        (self.rho.squared() + 1.0).sqrt()
    }
}

impl Curve for Helix {
    fn domain(&self) -> (f64, f64) {
        (-self.half_range, self.half_range)
    }
    fn is_closed(&self) -> bool {
        false
    }
    fn position(&self, t: f64) -> Vec3 {
        Vec3::new(t.cos(), t.sin(), self.rho.value() * t)
    }
    fn velocity(&self, t: f64) -> Vec3 {
        Vec3::new(-t.sin(), t.cos(), self.rho.value())
    }
    fn acceleration(&self, t: f64) -> Vec3 {
        Vec3::new(-t.cos(), -t.sin(), 0.0)
    }
    fn chord(&self, s: f64, t: f64) -> Vec3 {
        let half = (0.5 * (t - s)).sin();
        let mid = 0.5 * (t + s);
        Vec3::new(-2.0 * mid.sin() * half, 2.0 * mid.cos() * half, self.rho.value() * (t - s))
    }
    fn arc_length(&self, s: f64, t: f64) -> f64 {
        self.stretch() * (t - s).abs()
    }
    fn panel_width(&self) -> f64 {
        PI
    }
    fn is_unbounded(&self) -> bool {
        self.unbounded
    }
    fn energy_tail(&self, s: f64, j: f64, p: f64) -> Result<Option<(f64, f64)>> {
        if !self.unbounded {
            return Ok(None);
        }
        if j != 2.0 || p != 1.0 {
            return Err(Error::InvalidParameter(
                "the helix tail is only available for (j, p) = (2, 1)".into(),
            ));
        }
        let r2 = self.rho.squared();
        let c = 4.0 * (r2 + 1.0) / (r2 * r2);
        let mut estimate = 0.0;
        let mut bound = 0.0;
        // Beyond parameter distance U the integrand is M_ρ(u)/√(ρ²+1), and
        // ∫_U^∞ M_ρ lies in [1/(ρ²U) - C/(3U³), 1/(ρ²U)].
        for reach in [self.half_range - s, self.half_range + s] {
            if reach <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "s = {s} lies outside the integrated range"
                )));
            }
            let slack = c / (6.0 * reach.powi(3));
            estimate += 1.0 / (r2 * reach) - slack;
            bound += slack;
        }
        let stretch = self.stretch();
        Ok(Some((estimate / stretch, bound / stretch)))
    }
}

/// Circle of the given radius in the xy-plane, `t ∈ [0, 2π)`.
#[derive(Debug, Clone, Copy)]
pub struct Circle {
    pub radius: f64,
}

impl Circle {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "radius must be positive, got {radius}"
            )));
        }
        Ok(Circle { radius })
    }
}

impl Curve for Circle {
    fn domain(&self) -> (f64, f64) {
        (0.0, 2.0 * PI)
    }
    fn is_closed(&self) -> bool {
        true
    }
    fn position(&self, t: f64) -> Vec3 {
        self.radius * Vec3::new(t.cos(), t.sin(), 0.0)
    }
    fn velocity(&self, t: f64) -> Vec3 {
        self.radius * Vec3::new(-t.sin(), t.cos(), 0.0)
    }
    fn acceleration(&self, t: f64) -> Vec3 {
        self.radius * Vec3::new(-t.cos(), -t.sin(), 0.0)
    }
    fn chord(&self, s: f64, t: f64) -> Vec3 {
        let half = (0.5 * (t - s)).sin();
        let mid = 0.5 * (t + s);
        2.0 * self.radius * half * Vec3::new(-mid.sin(), mid.cos(), 0.0)
    }
    fn arc_length(&self, s: f64, t: f64) -> f64 {
        self.radius * (t - s).abs()
    }
    fn length(&self) -> f64 {
        2.0 * PI * self.radius
    }
    fn panel_width(&self) -> f64 {
        PI / 4.0
    }
}

/// Straight segment `start + t (end - start)`, `t ∈ [0, 1]`.
#[derive(Debug, Clone, Copy)]
pub struct Segment {
    pub start: Vec3,
    pub end: Vec3,
}

impl Segment {
    pub fn new(start: Vec3, end: Vec3) -> Result<Self> {
        if (end - start).norm() == 0.0 {
            return Err(Error::Degenerate("segment endpoints coincide".into()));
        }
        Ok(Segment { start, end })
    }
}

impl Curve for Segment {
    fn domain(&self) -> (f64, f64) {
        (0.0, 1.0)
    }
    fn is_closed(&self) -> bool {
        false
    }
    fn position(&self, t: f64) -> Vec3 {
        self.start + (self.end - self.start) * t
    }
    fn velocity(&self, _t: f64) -> Vec3 {
        self.end - self.start
    }
    fn acceleration(&self, _t: f64) -> Vec3 {
        Vec3::zeros()
    }
    fn chord(&self, s: f64, t: f64) -> Vec3 {
        (self.end - self.start) * (t - s)
    }
    fn arc_length(&self, s: f64, t: f64) -> f64 {
        (self.end - self.start).norm() * (t - s).abs()
    }
}

/// A curve moved by a rotation and scaled by `λ > 0`.
#[derive(Debug, Clone)]
pub struct Similarity<C> {
    pub inner: C,
    pub rotation: Rotation3<f64>,
    pub scale: f64,
}

impl<C: Curve> Similarity<C> {
    pub fn new(inner: C, rotation: Rotation3<f64>, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "scale must be positive, got {scale}"
            )));
        }
        Ok(Similarity {
            inner,
            rotation,
            scale,
        })
    }

    fn map(&self, v: Vec3) -> Vec3 {
        self.scale * (self.rotation * v)
    }
}

impl<C: Curve> Curve for Similarity<C> {
    fn domain(&self) -> (f64, f64) {
        self.inner.domain()
    }
    fn is_closed(&self) -> bool {
        self.inner.is_closed()
    }
    fn position(&self, t: f64) -> Vec3 {
        self.map(self.inner.position(t))
    }
    fn velocity(&self, t: f64) -> Vec3 {
        self.map(self.inner.velocity(t))
    }
    fn acceleration(&self, t: f64) -> Vec3 {
        self.map(self.inner.acceleration(t))
    }
    fn chord(&self, s: f64, t: f64) -> Vec3 {
        self.map(self.inner.chord(s, t))
    }
    fn arc_length(&self, s: f64, t: f64) -> f64 {
        self.scale * self.inner.arc_length(s, t)
    }
    fn length(&self) -> f64 {
        self.scale * self.inner.length()
    }
    fn panel_width(&self) -> f64 {
        self.inner.panel_width()
    }
    fn is_unbounded(&self) -> bool {
        self.inner.is_unbounded()
    }
    fn energy_tail(&self, s: f64, j: f64, p: f64) -> Result<Option<(f64, f64)>> {
        // The pointwise integrand scales like λ^{1 - jp}.
        let factor = self.scale.powf(1.0 - j * p);
        Ok(self
            .inner
            .energy_tail(s, j, p)?
            .map(|(e, b)| (e * factor, b * factor)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn helix_chord_matches_positions() {
        let h = Helix::truncated(Pitch::new(0.7).unwrap(), 50.0).unwrap();
        let (s, t) = (1.3, -4.2);
        let d = h.chord(s, t) - (h.position(t) - h.position(s));
        assert!(d.norm() < 1e-14);
    }

    #[test]
    fn helix_curvature_is_constant() {
        let rho = 0.5f64;
        let h = Helix::truncated(Pitch::new(rho).unwrap(), 10.0).unwrap();
        let expected = 1.0 / (1.0 + rho * rho);
        for t in [-3.0, 0.0, 2.5] {
            assert!((h.curvature(t) - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn circle_curvature_vector_points_inward() {
        let c = Circle::new(2.0).unwrap();
        let k = c.curvature_vector(0.0);
        assert!((k - Vec3::new(-0.5, 0.0, 0.0)).norm() < 1e-15);
        assert!((c.length() - 4.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn similarity_scales_lengths() {
        let c = Similarity::new(
            Circle::new(1.0).unwrap(),
            Rotation3::from_euler_angles(0.3, -0.2, 1.1),
            3.0,
        )
        .unwrap();
        assert!((c.length() - 6.0 * PI).abs() < 1e-13);
        assert!((c.chord(0.0, PI).norm() - 6.0).abs() < 1e-13);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Circle::new(0.0).is_err());
        assert!(Segment::new(Vec3::zeros(), Vec3::zeros()).is_err());
        assert!(Helix::truncated(Pitch::new(1.0).unwrap(), -1.0).is_err());
    }
}
