//! Globally adaptive 21-point Gauss–Kronrod quadrature.
//!
//! The interval is first cut into panels no wider than
//! [`QuadOptions::max_panel_width`]; those are evaluated in parallel. Panels
//! with the largest error estimates are then bisected (also in parallel, in
//! batches) until the summed estimate drops below the requested tolerance.
//! The final value is a compensated sum taken left to right over the panel
//! list, so the result does not depend on the thread count.

use crate::error::{Error, Result};
use crate::sum::{CompensatedSum, Summand};
use nalgebra::Vector3;
use num_complex::Complex64;
use rayon::prelude::*;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::Mul;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_980_132_675,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Values the engine can integrate.
pub trait QuadValue: Summand + Send + Sync + Mul<f64, Output = Self> {
    fn modulus(self) -> f64;
}

impl QuadValue for f64 {
    #[inline]
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    #[inline]
    fn modulus(self) -> f64 {
        self.norm()
    }
}

impl QuadValue for Vector3<f64> {
    #[inline]
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Single-panel 21-point Kronrod estimate of `∫_a^b f`.
pub(crate) fn kronrod21<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = f(center) * WGK[10];
    for j in 0..10 {
        let dx = half * XGK[j];
        acc += (f(center - dx) + f(center + dx)) * WGK[j];
    }
    acc * half
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panel_width: f64,
    pub max_panels: usize,
}

impl QuadOptions {
    pub const DEFAULT_BUDGET: usize = 1_000_000;

    pub fn absolute(tol: f64) -> Self {
        QuadOptions {
            abs_tol: tol,
            rel_tol: 0.0,
            max_panel_width: f64::INFINITY,
            max_panels: Self::DEFAULT_BUDGET,
        }
    }

    pub fn with_panel_width(mut self, width: f64) -> Self {
        self.max_panel_width = width;
        self
    }

    pub fn with_rel_tol(mut self, rel: f64) -> Self {
        self.rel_tol = rel;
        self
    }

    pub fn with_budget(mut self, panels: usize) -> Self {
        self.max_panels = panels;
        self
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
    // True when the estimate is at round-off level or the panel cannot be split.
    settled: bool,
    // Settled only because it is too narrow to split, with a real error left.
    stuck: bool,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn rule<T, F>(f: &F, a: f64, b: f64) -> Result<Panel<T>>
where
    T: QuadValue,
    F: Fn(f64) -> Result<T>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kronrod = fc * WGK[10];
    let mut gauss = T::default();
    let mut abs_k = fc.modulus() * WGK[10];
    let mut values = [(T::default(), T::default()); 10];
    for (j, slot) in values.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        kronrod = kronrod + (f1 + f2) * WGK[j];
        abs_k += (f1.modulus() + f2.modulus()) * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * WG[j / 2];
        }
        *slot = (f1, f2);
    }
    let mean = kronrod * 0.5;
    let mut asc = (fc - mean).modulus() * WGK[10];
    for (j, &(f1, f2)) in values.iter().enumerate() {
        asc += ((f1 - mean).modulus() + (f2 - mean).modulus()) * WGK[j];
    }
    let width = half.abs();
    let value = kronrod * half;
    let res_abs = abs_k * width;
    let res_asc = asc * width;
    let mut error = ((kronrod - gauss) * half).modulus();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    let mut settled = false;
    if error <= floor {
        error = floor;
        settled = true;
    }
    let tiny = (b - a).abs() <= 1e3 * f64::EPSILON * a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    let stuck = tiny && !settled;
    if tiny {
        settled = true;
    }
    if !error.is_finite() {
        return Err(Error::Domain(format!("integrand is not finite on [{a}, {b}]")));
    }
    Ok(Panel {
        a,
        b,
        value,
        error,
        settled,
        stuck,
    })
}

/// Integrate a real or complex function on `[a, b]`.
pub fn integrate<T, F>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T + Sync,
{
    try_integrate(|x| Ok(f(x)), a, b, opts)
}

/// Like [`integrate`] for integrands that can fail at some points.
pub fn try_integrate<T, F>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> Result<T> + Sync,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "integration limits must be finite, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(QuadResult {
            value: T::default(),
            error: 0.0,
            panels: 0,
        });
    }
    if a > b {
        let r = try_integrate(f, b, a, opts)?;
        return Ok(QuadResult {
            value: r.value * -1.0,
            ..r
        });
    }

    let width = if opts.max_panel_width.is_finite() && opts.max_panel_width > 0.0 {
        opts.max_panel_width
    } else {
        b - a
    };
    let n0 = ((b - a) / width).ceil().max(1.0);
    if n0 > opts.max_panels as f64 {
        return Err(Error::ToleranceNotReached {
            requested: opts.abs_tol,
            achieved: f64::INFINITY,
            panels: opts.max_panels,
        });
    }
    let n0 = n0 as usize;
    let h = (b - a) / n0 as f64;
    let initial: Vec<Panel<T>> = (0..n0)
        .into_par_iter()
        .map(|i| {
            let lo = a + h * i as f64;
            let hi = if i + 1 == n0 { b } else { a + h * (i + 1) as f64 };
            rule(&f, lo, hi)
        })
        .collect::<Result<_>>()?;

    let mut done: Vec<Panel<T>> = Vec::new();
    let mut heap: BinaryHeap<Panel<T>> = BinaryHeap::new();
    let mut total_error = 0.0;
    for p in initial {
        total_error += p.error;
        if p.settled {
            done.push(p);
        } else {
            heap.push(p);
        }
    }

    let target = |done: &[Panel<T>], heap: &BinaryHeap<Panel<T>>| -> f64 {
        if opts.rel_tol > 0.0 {
            let mut acc = CompensatedSum::<T>::new();
            for p in done.iter().chain(heap.iter()) {
                acc.add(p.value);
            }
            opts.abs_tol.max(opts.rel_tol * acc.value().modulus())
        } else {
            opts.abs_tol
        }
    };

    let mut goal = target(&done, &heap);
    let mut rounds = 0usize;
    loop {
        if total_error <= goal {
            // Re-add from scratch to shed drift in the running total.
            total_error = done.iter().chain(heap.iter()).map(|p| p.error).sum();
            goal = target(&done, &heap);
            if total_error <= goal {
                break;
            }
        }
        if heap.is_empty() {
            // Everything left is at round-off level: nothing more to gain.
            if !done.iter().any(|p| p.stuck) {
                break;
            }
            return Err(Error::ToleranceNotReached {
                requested: goal,
                achieved: total_error,
                panels: done.len(),
            });
        }
        let count = done.len() + heap.len();
        if count >= opts.max_panels {
            return Err(Error::ToleranceNotReached {
                requested: goal,
                achieved: total_error,
                panels: count,
            });
        }
        let batch_size = (heap.len() / 8).clamp(1, 64).min(opts.max_panels - count);
        let mut batch = Vec::with_capacity(batch_size);
        let mut excess = total_error - goal;
        while batch.len() < batch_size && excess > 0.0 {
            match heap.pop() {
                Some(p) => {
                    excess -= 0.5 * p.error;
                    batch.push(p);
                }
                None => break,
            }
        }
        let children: Vec<(Panel<T>, Panel<T>)> = batch
            .par_iter()
            .map(|p| {
                let mid = 0.5 * (p.a + p.b);
                Ok((rule(&f, p.a, mid)?, rule(&f, mid, p.b)?))
            })
            .collect::<Result<_>>()?;
        for (parent, (left, right)) in batch.iter().zip(children) {
            total_error += left.error + right.error - parent.error;
            for child in [left, right] {
                if child.settled {
                    done.push(child);
                } else {
                    heap.push(child);
                }
            }
        }
        rounds += 1;
        if opts.rel_tol > 0.0 && rounds % 64 == 0 {
            goal = target(&done, &heap);
        }
    }

    let mut panels: Vec<Panel<T>> = done;
    panels.extend(heap);
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut acc = CompensatedSum::<T>::new();
    for p in &panels {
        acc.add(p.value);
    }
    Ok(QuadResult {
        value: acc.value(),
        error: total_error,
        panels: panels.len(),
    })
}
