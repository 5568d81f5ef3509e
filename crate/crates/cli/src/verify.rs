//! Self-checks grouped into suites. Every check reports the measured value,
//! the bounds it must respect and the signed margin to the nearer bound.

use clap::ValueEnum;
use helix_mobius::asymptotics::{
    g_bracket, g_series, magnitude, non_tangency_constant, perturbation_constant,
    small_pitch_ratio_band, transfer_check,
};
use helix_mobius::contour::closed_contour_check;
use helix_mobius::curve::{pointwise_energy, truncated_helix_bound, truncated_helix_energy, Helix};
use helix_mobius::kernel::e_rho_prime;
use helix_mobius::quadrature::{didrho, integrate_density, sinc_deficit_integral};
use helix_mobius::residue::{approx_term, residue_sum, residue_term};
use helix_mobius::roots::{count_zeros_rectangle, curve_oracle, default_height, refine_roots};
use helix_mobius::special::{alpha_beta, ck};
use helix_mobius::{Pitch, Result};
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::table::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    All,
    Sandwich,
    Roots,
    Transfer,
    Brackets,
    Cross,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::All => "all",
            Suite::Sandwich => "sandwich",
            Suite::Roots => "roots",
            Suite::Transfer => "transfer",
            Suite::Brackets => "brackets",
            Suite::Cross => "cross",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: &'static str,
    pub rho: Option<f64>,
    pub measured: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl Check {
    fn new(suite: Suite, name: &'static str, rho: Option<f64>, measured: f64) -> Self {
        Check { suite: suite.name(), name, rho, measured, lower: None, upper: None }
    }

    fn at_most(mut self, upper: f64) -> Self {
        self.upper = Some(upper);
        self
    }

    fn at_least(mut self, lower: f64) -> Self {
        self.lower = Some(lower);
        self
    }

    fn within(self, lower: f64, upper: f64) -> Self {
        self.at_least(lower).at_most(upper)
    }

    /// Distance to the nearer bound, negative when violated, NaN when the
    /// measurement itself is NaN.
    pub fn margin(&self) -> f64 {
        let lo = self.lower.map_or(f64::INFINITY, |l| self.measured - l);
        let hi = self.upper.map_or(f64::INFINITY, |u| u - self.measured);
        if self.measured.is_nan() {
            f64::NAN
        } else {
            lo.min(hi)
        }
    }

    pub fn passed(&self) -> bool {
        self.margin() >= 0.0
    }
}

fn p(r: f64) -> Result<Pitch> {
    Pitch::new(r)
}

fn sandwich() -> Result<Vec<Check>> {
    [2.0, 5.0, 10.0, 50.0]
        .into_iter()
        .map(|r| {
            let i = integrate_density(p(r)?, 1e-9)?.value;
            Ok(Check::new(Suite::Sandwich, "I(rho) between pi/(3(rho^2+1)) and pi/(3 rho^2)", Some(r), i)
                .within(PI / (3.0 * (r * r + 1.0)), PI / (3.0 * r * r)))
        })
        .collect()
}

fn roots() -> Result<Vec<Check>> {
    let s = Suite::Roots;
    let mut out = Vec::new();
    for r in [0.01, 0.05] {
        let rho = p(r)?;
        let found = refine_roots(rho, 10_000, 1e-13)?;
        let ratio = found.iter().map(|z| z.distance() / z.error_bound).fold(0.0, f64::max);
        out.push(Check::new(s, "max |z-w|/error_bound, k <= 10000", Some(r), ratio).at_most(1.0));
        let uncertified = found.iter().filter(|z| !z.certified).count() as f64;
        out.push(Check::new(s, "uncertified roots, k <= 10000", Some(r), uncertified).at_most(0.0));
        let gaps: Vec<f64> = found[..100]
            .par_iter()
            .map(|z| Ok((curve_oracle(rho, z.k, 1e-14)? - z.z).norm()))
            .collect::<Result<_>>()?;
        let gap = gaps.into_iter().fold(0.0, f64::max);
        out.push(Check::new(s, "max |newton - oracle|, k <= 100", Some(r), gap).at_most(1e-9));
    }
    for r in [0.05, 1.0, 2.0] {
        let rho = p(r)?;
        let counts: Vec<u64> = (1..=50u64)
            .into_par_iter()
            .map(|k| Ok(count_zeros_rectangle(rho, k, default_height(rho, k))?.count))
            .collect::<Result<_>>()?;
        let bad = counts.iter().filter(|&&c| c != 1).count() as f64;
        out.push(Check::new(s, "strips without exactly one zero, k <= 50", Some(r), bad).at_most(0.0));
    }
    Ok(out)
}

fn transfer() -> Result<Vec<Check>> {
    let s = Suite::Transfer;
    let c = non_tangency_constant();
    let mut out = Vec::new();
    for r in [0.01, 0.05, 0.5, 1.0] {
        let rho = p(r)?;
        let terms: Vec<_> = (1..=10_000u64).map(|k| approx_term(rho, k)).collect();
        let rep = transfer_check(&terms)?;
        let measured = if rep.sign_ok { rep.c_empirical } else { f64::NAN };
        out.push(Check::new(s, "w-series min |Im b|/|b| with one sign", Some(r), measured).at_least(c));
    }
    for r in [0.01, 0.05] {
        let rho = p(r)?;
        let eta = perturbation_constant(rho);
        let found = refine_roots(rho, 10_000, 1e-13)?;
        let terms: Vec<_> = found.iter().map(|z| residue_term(rho, z)).collect::<Result<_>>()?;
        let rep = transfer_check(&terms)?;
        let measured = if rep.sign_ok { rep.c_empirical } else { f64::NAN };
        out.push(
            Check::new(s, "z-series min |Im b|/|b| with one sign", Some(r), measured).at_least(c - eta),
        );
        let mut worst: f64 = 0.0;
        for z in &found {
            let exact = 1.0 / e_rho_prime(rho, z.z)?;
            let approx = 1.0 / e_rho_prime(rho, z.w)?;
            worst = worst.max((exact - approx).norm() / approx.norm());
        }
        out.push(Check::new(s, "max |1/E'(z) - 1/E'(w)|/|1/E'(w)|", Some(r), worst).at_most(eta));
    }
    Ok(out)
}

fn brackets() -> Result<Vec<Check>> {
    let s = Suite::Brackets;
    let mut out = Vec::new();
    for r in [1e-6, 1e-4, 1e-2, 1.0] {
        let rho = p(r)?;
        let (lo, hi) = g_bracket(rho);
        let shifted = g_series(rho, 1e-11)? + r.ln();
        out.push(Check::new(s, "G(rho) - log(1/rho) inside its bracket", Some(r), shifted).within(lo, hi));
    }
    for r in [1e-3, 1e-4, 1e-5, 1e-6] {
        let rho = p(r)?;
        let tol = if r < 1e-5 { 1e-4 } else { 1e-8 } * magnitude(rho);
        let ratio = residue_sum(rho, tol)?.value * r / -r.ln();
        let (lo, hi) = small_pitch_ratio_band(rho)?;
        out.push(Check::new(s, "I(rho) rho/log(1/rho) inside its band", Some(r), ratio).within(lo, hi));
    }
    let ab = alpha_beta();
    let c1 = ck(1)?.value;
    let c2 = ck(2)?.value;
    let constants = [
        ("c_1", c1, 2.7984, 5e-4),
        ("c_2^2 cos c_2", c2 * c2 * c2.cos(), 36.9794, 5e-3),
        ("beta", ab.beta, 1.1997, 5e-4),
        ("alpha", ab.alpha, 0.6627, 5e-4),
        ("arcsinh(c_2 sec c_2/alpha)", (c2 / (ab.alpha * c2.cos())).asinh(), 2.9323, 5e-3),
    ];
    for (name, v, want, tol) in constants {
        out.push(Check::new(s, name, None, v).within(want - tol, want + tol));
    }
    Ok(out)
}

fn cross() -> Result<Vec<Check>> {
    let s = Suite::Cross;
    let mut out = Vec::new();
    let v = sinc_deficit_integral(1e-10)?;
    out.push(Check::new(s, "|sinc deficit integral - 2pi/3|", None, (v - 2.0 * PI / 3.0).abs()).at_most(1e-8));
    for r in [0.05, 0.1, 0.5, 1.0] {
        let rho = p(r)?;
        let tol = 1e-10 * magnitude(rho);
        let q = integrate_density(rho, tol)?.value;
        let res = residue_sum(rho, tol)?.value;
        out.push(Check::new(s, "quadrature vs residues, relative", Some(r), (q - res).abs() / q).at_most(1e-6));
    }
    for r in [0.3, 0.5, 1.0] {
        for k in 2..=4 {
            let rep = closed_contour_check(p(r)?, k, 1e-7)?;
            let allowed = 1e-7 * rep.residue_total.abs().max(1.0);
            out.push(
                Check::new(s, "closed contour vs residues, k = 2..4", Some(r), rep.discrepancy)
                    .at_most(allowed),
            );
        }
    }
    for r in [0.5, 1.0] {
        let rho = p(r)?;
        let helix = Helix::unbounded(rho, 1e-9)?;
        let e = pointwise_energy(&helix, 0.0, 2.0, 1.0, 1e-9)?.value;
        let i = integrate_density(rho, 1e-11)?.value;
        let rel = ((r * r + 1.0f64).sqrt() * e - i).abs() / i;
        out.push(Check::new(s, "helix pointwise energy vs I(rho), relative", Some(r), rel).at_most(1e-5));
    }
    for r in [5.0, 10.0] {
        let rho = p(r)?;
        let v = truncated_helix_energy(rho, 1.0, 1e-10)?;
        out.push(
            Check::new(s, "truncated helix energy below its bound, N = 1", Some(r), v)
                .at_most(truncated_helix_bound(rho, 1.0)),
        );
    }
    for r in [0.5, 1.0, 2.0] {
        let d = didrho(p(r)?, 1e-12)?;
        let h = 1e-4 * r;
        let fd = (integrate_density(p(r + h)?, 1e-13)?.value - integrate_density(p(r - h)?, 1e-13)?.value)
            / (2.0 * h);
        out.push(Check::new(s, "dI/drho", Some(r), d).at_most(0.0));
        out.push(Check::new(s, "dI/drho vs central difference, relative", Some(r), (d - fd).abs() / d.abs()).at_most(1e-4));
    }
    Ok(out)
}

pub fn run(suite: Suite) -> Result<Vec<Check>> {
    let suites: Vec<fn() -> Result<Vec<Check>>> = match suite {
        Suite::All => vec![sandwich, roots, transfer, brackets, cross],
        Suite::Sandwich => vec![sandwich],
        Suite::Roots => vec![roots],
        Suite::Transfer => vec![transfer],
        Suite::Brackets => vec![brackets],
        Suite::Cross => vec![cross],
    };
    let mut out = Vec::new();
    for f in suites {
        out.extend(f()?);
    }
    Ok(out)
}

pub fn table(checks: &[Check]) -> Table {
    let mut t = Table::new(
        "verify",
        &["suite", "check", "rho", "measured", "lower", "upper", "margin", "passed"],
    );
    for c in checks {
        t.push(vec![
            c.suite.into(),
            c.name.into(),
            c.rho.into(),
            c.measured.into(),
            c.lower.into(),
            c.upper.into(),
            c.margin().into(),
            c.passed().into(),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margins_follow_the_nearer_bound() {
        let c = Check::new(Suite::Cross, "x", None, 0.3).within(0.0, 1.0);
        assert_eq!(c.margin(), 0.3);
        assert!(c.passed());
        let c = Check::new(Suite::Cross, "x", None, 2.0).at_most(1.0);
        assert_eq!(c.margin(), -1.0);
        assert!(!c.passed());
        let c = Check::new(Suite::Cross, "x", None, f64::NAN).at_least(0.0);
        assert!(!c.passed());
    }
}
