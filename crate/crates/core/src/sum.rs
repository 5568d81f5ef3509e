//! Compensated accumulation.
//!
//! All reductions in the crate go through [`CompensatedSum`] in a fixed order,
//! so results do not depend on how the terms were produced (serially or by a
//! parallel map).

use nalgebra::Vector3;
use num_complex::Complex64;
use std::ops::{Add, Sub};

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    compensation: T,
}

/// Scalars the compensated accumulator works over.
pub trait Summand: Copy + Default + Add<Output = Self> + Sub<Output = Self> {
    /// Magnitude used to decide which operand lost low-order bits.
    fn size(self) -> f64;
}

impl Summand for f64 {
    #[inline]
    fn size(self) -> f64 {
        self.abs()
    }
}

impl Summand for Complex64 {
    #[inline]
    fn size(self) -> f64 {
        self.re.abs().max(self.im.abs())
    }
}

impl Summand for Vector3<f64> {
    #[inline]
    fn size(self) -> f64 {
        self.amax()
    }
}

impl<T: Summand> CompensatedSum<T> {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: T) {
        let t = self.sum + value;
        if self.sum.size() >= value.size() {
            self.compensation = self.compensation + ((self.sum - t) + value);
        } else {
            self.compensation = self.compensation + ((value - t) + self.sum);
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.compensation
    }
}

impl CompensatedSum<Complex64> {
    // Neumaier's branch is per-component for complex values; the generic
    // `size` comparison would mix the two.
    #[inline]
    pub fn add_complex(&mut self, value: Complex64) {
        let mut re = CompensatedSum { sum: self.sum.re, compensation: self.compensation.re };
        let mut im = CompensatedSum { sum: self.sum.im, compensation: self.compensation.im };
        re.add(value.re);
        im.add(value.im);
        self.sum = Complex64::new(re.sum, im.sum);
        self.compensation = Complex64::new(re.compensation, im.compensation);
    }
}

/// Sum an iterator of reals left to right with compensation.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for v in iter {
        acc.add(v);
    }
    acc.value()
}

/// Sum an iterator of complex values left to right with compensation.
pub fn compensated_sum_complex<I: IntoIterator<Item = Complex64>>(iter: I) -> Complex64 {
    let mut acc = CompensatedSum::<Complex64>::new();
    for v in iter {
        acc.add_complex(v);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_small_terms_lost_by_naive_sum() {
        let terms = [1.0, 1e100, 1.0, -1e100];
        let naive: f64 = terms.iter().sum();
        assert_eq!(naive, 0.0);
        assert_eq!(compensated_sum(terms), 2.0);
    }

    #[test]
    fn harmonic_partial_sum_matches_reversed_order() {
        let n = 1_000_000;
        let fwd = compensated_sum((1..=n).map(|k| 1.0 / k as f64));
        let rev = compensated_sum((1..=n).rev().map(|k| 1.0 / k as f64));
        assert!((fwd - rev).abs() <= 2.0 * f64::EPSILON * fwd);
    }

    #[test]
    fn complex_components_are_compensated_independently() {
        let terms = [
            Complex64::new(1.0, 1e100),
            Complex64::new(1e100, 1.0),
            Complex64::new(1.0, -1e100),
            Complex64::new(-1e100, 1.0),
        ];
        let s = compensated_sum_complex(terms);
        assert_eq!(s, Complex64::new(2.0, 2.0));
    }
}
