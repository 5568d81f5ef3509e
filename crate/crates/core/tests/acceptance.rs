//! End-to-end acceptance run: one line per criterion, then a single verdict.

use helix_mobius::asymptotics::{
    g_bracket, g_series, magnitude, non_tangency_constant, perturbation_constant,
    small_pitch_ratio_band, transfer_check,
};
use helix_mobius::contour::{arc_integral, closed_contour_check, contour_radius, side_integral};
use helix_mobius::curve::{pointwise_energy, truncated_helix_bound, truncated_helix_energy, Helix};
use helix_mobius::kernel::{e_rho_prime, Pitch};
use helix_mobius::quadrature::{didrho, integrate_density, sinc_deficit_integral};
use helix_mobius::residue::{approx_term, residue_sum, residue_term};
use helix_mobius::roots::{
    count_zeros_rectangle, curve_oracle, default_height, refine_roots, CERTIFICATION_LIMIT,
};
use helix_mobius::special::{alpha_beta, ck};
use std::f64::consts::PI;
use std::time::{Duration, Instant};

fn p(r: f64) -> Pitch {
    Pitch::new(r).unwrap()
}

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: String) -> Self {
        Outcome { passed, detail }
    }
}

type Check = fn() -> Outcome;

fn sandwich() -> Outcome {
    let mut worst = f64::INFINITY;
    let mut ok = true;
    for r in [2.0, 5.0, 10.0, 50.0] {
        let i = integrate_density(p(r), 1e-9).unwrap().value;
        let (lo, hi) = (PI / (3.0 * (r * r + 1.0)), PI / (3.0 * r * r));
        ok &= lo <= i && i <= hi;
        worst = worst.min((i - lo).min(hi - i));
    }
    Outcome::new(ok, format!("smallest margin to the band {worst:.3e}"))
}

fn sinc_integral() -> Outcome {
    let v = sinc_deficit_integral(1e-10).unwrap();
    let err = (v - 2.0 * PI / 3.0).abs();
    Outcome::new(err <= 1e-8, format!("|value - 2π/3| = {err:.3e}"))
}

fn cross_method() -> Outcome {
    let mut worst: f64 = 0.0;
    for r in [0.05, 0.1, 0.5, 1.0] {
        let rho = p(r);
        let tol = 1e-10 * magnitude(rho);
        let q = integrate_density(rho, tol).unwrap().value;
        let s = residue_sum(rho, tol).unwrap().value;
        worst = worst.max((q - s).abs() / q.abs());
    }
    Outcome::new(worst <= 1e-6, format!("max relative gap {worst:.3e}"))
}

fn root_certification() -> Outcome {
    let mut ok = true;
    let mut worst_ratio: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    for r in [0.01, 0.05] {
        let rho = p(r);
        let roots = refine_roots(rho, 10_000, 1e-13).unwrap();
        for root in &roots {
            let ratio = root.distance() / root.error_bound;
            worst_ratio = worst_ratio.max(ratio);
            ok &= ratio <= 1.0;
        }
        for root in roots.iter().take(100) {
            let z = curve_oracle(rho, root.k, 1e-14).unwrap();
            let gap = (z - root.z).norm();
            worst_oracle = worst_oracle.max(gap);
            ok &= gap <= 1e-9;
        }
    }
    Outcome::new(
        ok,
        format!("max |z-w|/bound {worst_ratio:.4}, max Newton/oracle gap {worst_oracle:.3e}"),
    )
}

fn strip_uniqueness() -> Outcome {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for r in [0.05, 1.0, 2.0] {
        let rho = p(r);
        for k in 1..=50 {
            let c = count_zeros_rectangle(rho, k, default_height(rho, k)).unwrap();
            ok &= c.count == 1;
            worst = worst.max(c.distance);
        }
    }
    Outcome::new(ok, format!("all counts 1, max distance from integer {worst:.3e}"))
}

fn constants() -> Outcome {
    let c1 = ck(1).unwrap().value;
    let c2 = ck(2).unwrap().value;
    let ab = alpha_beta();
    let lifted = (c2 / (ab.alpha * c2.cos())).asinh();
    let checks = [
        (c1, 2.7984, 5e-4),
        (c2 * c2 * c2.cos(), 36.9794, 5e-3),
        (ab.beta, 1.1997, 5e-4),
        (ab.alpha, 0.6627, 5e-4),
        (lifted, 2.9323, 5e-3),
    ];
    let ok = checks.iter().all(|&(v, want, tol)| (v - want).abs() <= tol);
    Outcome::new(
        ok,
        format!(
            "c1 {c1:.5}, c2²cos c2 {:.4}, β {:.5}, α {:.5}, arcsinh {lifted:.4}",
            c2 * c2 * c2.cos(),
            ab.beta,
            ab.alpha
        ),
    )
}

fn euler_maclaurin() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for r in [1e-6, 1e-4, 1e-2, 1.0] {
        let rho = p(r);
        let shifted = g_series(rho, 1e-11).unwrap() + r.ln();
        let (lo, hi) = g_bracket(rho);
        ok &= lo <= shifted && shifted <= hi;
        detail.push(format!("{shifted:.5}∈[{lo:.4},{hi:.4}]"));
    }
    Outcome::new(ok, detail.join(" "))
}

fn transfer() -> Outcome {
    let c = non_tangency_constant();
    let mut ok = true;
    let mut worst_w = f64::INFINITY;
    for r in [0.01, 0.05, 0.5, 1.0] {
        let rho = p(r);
        let terms: Vec<_> = (1..=10_000u64).map(|k| approx_term(rho, k)).collect();
        let rep = transfer_check(&terms).unwrap();
        ok &= rep.sign_ok && rep.c_empirical >= c;
        worst_w = worst_w.min(rep.c_empirical - c);
    }
    let mut worst_z = f64::INFINITY;
    for r in [0.01, 0.05] {
        let rho = p(r);
        let roots = refine_roots(rho, 10_000, 1e-13).unwrap();
        let terms: Vec<_> = roots.iter().map(|z| residue_term(rho, z).unwrap()).collect();
        let rep = transfer_check(&terms).unwrap();
        let floor = c - perturbation_constant(rho);
        ok &= rep.sign_ok && rep.c_empirical >= floor;
        worst_z = worst_z.min(rep.c_empirical - floor);
    }
    Outcome::new(
        ok,
        format!("w-series margin {worst_w:.3e}, z-series margin {worst_z:.3e}"),
    )
}

fn small_pitch() -> Outcome {
    let mut ok = true;
    let mut prev = f64::INFINITY;
    let mut detail = Vec::new();
    for r in [1e-3, 1e-4, 1e-5, 1e-6] {
        let rho = p(r);
        let tol = if r < 1e-5 { 1e-4 } else { 1e-8 } * magnitude(rho);
        let i = residue_sum(rho, tol).unwrap().value;
        let ratio = i * r / (-r.ln());
        let (lo, hi) = small_pitch_ratio_band(rho).unwrap();
        let dev = (ratio - 1.0).abs();
        ok &= dev < prev && lo <= ratio && ratio <= hi;
        prev = dev;
        detail.push(format!("{ratio:.5}∈[{lo:.4},{hi:.4}]"));
    }
    Outcome::new(ok, detail.join(" "))
}

fn perturbation() -> Outcome {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for r in [0.01, 0.05] {
        let rho = p(r);
        let eta = perturbation_constant(rho);
        for root in refine_roots(rho, 10_000, 1e-13).unwrap() {
            if !root.certified {
                ok = false;
                continue;
            }
            let exact = 1.0 / e_rho_prime(rho, root.z).unwrap();
            let approx = 1.0 / e_rho_prime(rho, root.w).unwrap();
            let ratio = (exact - approx).norm() / (eta * approx.norm());
            worst = worst.max(ratio);
            ok &= ratio <= 1.0;
        }
    }
    Outcome::new(
        ok && 0.05 < CERTIFICATION_LIMIT,
        format!("max |Δ(1/E')|/(11√5ρ|1/E'(w)|) = {worst:.4}"),
    )
}

fn contours() -> Outcome {
    let rho = p(0.5);
    let side = side_integral(rho, 12).unwrap();
    let arc = arc_integral(rho, 12).unwrap();
    let sides: Vec<f64> = (2..=12).map(|k| side_integral(rho, k).unwrap()).collect();
    let decreasing = sides.windows(2).all(|w| w[1] < w[0]);
    let mut closed_ok = true;
    let mut worst: f64 = 0.0;
    for r in [0.3, 0.5, 1.0] {
        for k in 2..=4 {
            let rep = closed_contour_check(p(r), k, 1e-7).unwrap();
            closed_ok &= rep.passed;
            worst = worst.max(rep.discrepancy);
        }
    }
    let ok = side < 1e-3 && arc < 1e-6 && decreasing && closed_ok;
    Outcome::new(
        ok,
        format!(
            "k=12 (R={:.2}): side {side:.3e} (need < 1e-3), arc {arc:.3e} (need < 1e-6); \
             sides decreasing {decreasing}; closed-contour max discrepancy {worst:.3e}",
            contour_radius(12)
        ),
    )
}

fn curve_energy() -> Outcome {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for r in [0.5, 1.0] {
        let rho = p(r);
        let tol = 1e-9;
        let helix = Helix::unbounded(rho, tol).unwrap();
        let e = pointwise_energy(&helix, 0.0, 2.0, 1.0, tol).unwrap().value;
        let i = integrate_density(rho, 1e-11).unwrap().value;
        let rel = ((r * r + 1.0f64).sqrt() * e - i).abs() / i;
        worst = worst.max(rel);
        ok &= rel <= 1e-5;
    }
    let mut margins = Vec::new();
    for r in [5.0, 10.0] {
        let v = truncated_helix_energy(p(r), 1.0, 1e-10).unwrap();
        let bound = truncated_helix_bound(p(r), 1.0);
        ok &= v <= bound;
        margins.push(format!("{v:.3e}≤{bound:.3e}"));
    }
    Outcome::new(
        ok,
        format!("density max rel gap {worst:.3e}; truncated {}", margins.join(", ")),
    )
}

fn monotonicity() -> Outcome {
    let grid: Vec<f64> = (0..20)
        .map(|i| (0.05f64.ln() + (1000f64).ln() * i as f64 / 19.0).exp())
        .collect();
    let values: Vec<f64> = grid
        .iter()
        .map(|&r| integrate_density(p(r), 1e-11 * magnitude(p(r))).unwrap().value)
        .collect();
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    let mut worst: f64 = 0.0;
    let mut negative = true;
    for r in [0.5, 1.0, 2.0] {
        let rho = p(r);
        let d = didrho(rho, 1e-12).unwrap();
        let h = 1e-4 * r;
        let tol = 1e-13;
        let fd = (integrate_density(p(r + h), tol).unwrap().value
            - integrate_density(p(r - h), tol).unwrap().value)
            / (2.0 * h);
        negative &= d < 0.0;
        worst = worst.max((d - fd).abs() / d.abs());
    }
    Outcome::new(
        decreasing && negative && worst <= 1e-4,
        format!("strictly decreasing {decreasing}; dI/dρ < 0 {negative}; max rel gap to differences {worst:.3e}"),
    )
}

#[test]
fn acceptance() {
    let criteria: [(u32, &str, Check, u64); 13] = [
        (1, "sandwich bound", sandwich, 5),
        (2, "sinc deficit integral", sinc_integral, 1),
        (3, "quadrature vs residue series", cross_method, 30),
        (4, "root certification", root_certification, 60),
        (5, "strip uniqueness", strip_uniqueness, 60),
        (6, "constants", constants, 1),
        (7, "Euler-Maclaurin bracket", euler_maclaurin, 10),
        (8, "transfer conditions", transfer, 30),
        (9, "small-pitch asymptotics", small_pitch, 120),
        (10, "perturbation control", perturbation, 30),
        (11, "contours", contours, 60),
        (12, "curve energy consistency", curve_energy, 60),
        (13, "monotonicity", monotonicity, 30),
    ];
    let mut failed = Vec::new();
    for (id, name, check, budget) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(budget);
        let passed = outcome.passed && in_time;
        println!(
            "criterion {id:>2} {} {name}: {} [{:.2}s of {budget}s]",
            if passed { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64()
        );
        if !passed {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
