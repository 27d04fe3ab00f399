//! Truncated complex power series in one small parameter.
//!
//! The design objectives are products of 2x2 blocks whose only dependence
//! on the error is through `exp(i c delta)`, so their Taylor coefficients
//! at zero follow exactly from series arithmetic.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(test)]
use crate::linalg::cis;
use crate::linalg::C64;

/// Coefficients `c_k` of `sum_k c_k delta^k`, truncated at a fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    coeffs: Vec<C64>,
}

impl Series {
    pub fn zero(order: usize) -> Self {
        Self { coeffs: vec![C64::new(0.0, 0.0); order + 1] }
    }

    pub fn constant(c: C64, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// `a * exp(i b delta)`.
    pub fn phase(a: C64, b: f64, order: usize) -> Self {
        let mut s = Self::zero(order);
        let mut term = a;
        for (k, c) in s.coeffs.iter_mut().enumerate() {
            *c = term;
            term = term * C64::new(0.0, b) / (k + 1) as f64;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> C64 {
        self.coeffs[k]
    }

    /// `k`-th derivative at zero.
    pub fn derivative(&self, k: usize) -> C64 {
        let mut f = 1.0;
        for j in 2..=k {
            f *= j as f64;
        }
        self.coeffs[k] * f
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, k: C64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|a| a * k).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.coeffs.len().min(other.coeffs.len());
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (i, a) in self.coeffs.iter().enumerate().take(n) {
            for (j, b) in other.coeffs.iter().enumerate().take(n - i) {
                out[i + j] += a * b;
            }
        }
        Self { coeffs: out }
    }

    /// Series of the complex conjugate for real `delta`.
    pub fn conj(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(|a| a.conj()).collect() }
    }

    /// `|s|^2` as a series.
    pub fn norm_sqr(&self) -> Self {
        self.mul(&self.conj())
    }

    pub fn eval(&self, delta: f64) -> C64 {
        self.coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * delta + c)
    }
}

/// 2x2 matrix of series, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesMat2 {
    pub m: [[Series; 2]; 2],
}

impl SeriesMat2 {
    pub fn identity(order: usize) -> Self {
        let one = Series::constant(C64::new(1.0, 0.0), order);
        let zero = Series::zero(order);
        Self { m: [[one.clone(), zero.clone()], [zero, one]] }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let e = |i: usize, j: usize| self.m[i][0].mul(&o.m[0][j]).add(&self.m[i][1].mul(&o.m[1][j]));
        Self { m: [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]] }
    }

    /// Series of `self` applied to the constant vector `v`.
    pub fn apply(&self, v: [C64; 2]) -> [Series; 2] {
        let row = |i: usize| self.m[i][0].scale(v[0]).add(&self.m[i][1].scale(v[1]));
        [row(0), row(1)]
    }
}
