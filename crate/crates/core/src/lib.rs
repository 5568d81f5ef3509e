//! Möbius energy density of the helix `H_ρ(t) = (cos t, sin t, ρt)`.
//!
//! The density `I(ρ) = ∫ M_ρ(t) dt` is computed three ways: adaptive
//! quadrature on the real line, the residue series over the roots of
//! `E_ρ(z) = ρ²z² + 4 sin²(z/2)`, and a closed-form approximation of those
//! roots. Supporting modules certify the roots, bracket the small-`ρ`
//! asymptotics, check the contours that justify the series, and evaluate
//! O'Hara energies on general curves.

pub mod asymptotics;
pub mod contour;
pub mod curve;
pub mod error;
pub mod kernel;
pub mod quadrature;
pub mod residue;
pub mod roots;
pub mod special;
pub mod sum;

pub use asymptotics::{asymptotic_report, report_at, AsymptoticReport, TransferReport};
pub use contour::{arc_integral, closed_contour_check, side_integral, ContourReport};
pub use curve::{
    mobius_gradient_field, pointwise_energy, total_energy, truncated_helix_energy, Circle, Curve,
    EnergyDensityValue, Helix, SampledCurve, Segment, Similarity, Vec3,
};
pub use error::{Error, Result};
pub use kernel::{ComplexPoint, Pitch};
pub use quadrature::{integrate_density, EnergyEstimate, Method};
pub use residue::{approx_series, residue_series, SeriesResult, SeriesTruncation};
pub use roots::{refine_root, StripRoot, ZeroCount};
pub use special::{AlphaBeta, CkConstant, SigmaBranch};
