//! Operations shared by the exact polynomial representations, so trace
//! extraction and reconstruction can run on either of them.

use crate::error::Result;
use crate::lattice::{HyperRect, MultiIndex};

use super::{LegendreSeries, PiecewisePoly};

pub trait Calculus: Clone + Send + Sync + Sized {
    fn constant_on(domain: &HyperRect, c: f64) -> Self;
    fn domain(&self) -> &HyperRect;
    fn degree(&self) -> &MultiIndex;
    /// Interior breaks along `axis` (empty for a single cell).
    fn breaks(&self, axis: usize) -> &[f64];
    fn eval_unchecked(&self, s: &[f64]) -> f64;
    fn eval_grid(&self, nodes: &[Vec<f64>]) -> Vec<f64>;
    fn derivative(&self, axis: usize) -> Self;
    fn antiderivative(&self, axis: usize) -> Self;
    fn mul_kernel(&self, axis: usize, k: usize) -> Self;
    fn restrict_lower(&self, axis: usize) -> Self;
    fn axpy(&self, a: f64, other: &Self) -> Result<Self>;
    fn scale(&self, a: f64) -> Self;
    /// Largest jump across breaks along `axis`, with its location.
    fn max_jump(&self, axis: usize) -> (f64, f64);
    fn is_constant_along(&self, axis: usize, tol: f64) -> bool;
    fn max_abs_coeff(&self) -> f64;
    fn rel_coeff_diff(&self, other: &Self) -> Result<f64>;

    /// Applies `D^beta`.
    fn mixed_derivative(&self, beta: &MultiIndex) -> Self {
        let mut out = self.clone();
        for (axis, k) in beta.iter().enumerate() {
            for _ in 0..k {
                out = out.derivative(axis);
            }
        }
        out
    }
}

impl Calculus for PiecewisePoly {
    fn constant_on(domain: &HyperRect, c: f64) -> Self {
        PiecewisePoly::constant(domain.clone(), c)
    }
    fn domain(&self) -> &HyperRect {
        self.domain()
    }
    fn degree(&self) -> &MultiIndex {
        self.degree()
    }
    fn breaks(&self, axis: usize) -> &[f64] {
        self.breaks(axis)
    }
    fn eval_unchecked(&self, s: &[f64]) -> f64 {
        self.eval_unchecked(s)
    }
    fn eval_grid(&self, nodes: &[Vec<f64>]) -> Vec<f64> {
        self.eval_grid(nodes)
    }
    fn derivative(&self, axis: usize) -> Self {
        self.derivative(axis)
    }
    fn antiderivative(&self, axis: usize) -> Self {
        self.antiderivative(axis)
    }
    fn mul_kernel(&self, axis: usize, k: usize) -> Self {
        self.mul_kernel(axis, k)
    }
    fn restrict_lower(&self, axis: usize) -> Self {
        self.restrict_lower(axis)
    }
    fn axpy(&self, a: f64, other: &Self) -> Result<Self> {
        self.axpy(a, other)
    }
    fn scale(&self, a: f64) -> Self {
        self.scale(a)
    }
    fn max_jump(&self, axis: usize) -> (f64, f64) {
        self.max_jump(axis)
    }
    fn is_constant_along(&self, axis: usize, tol: f64) -> bool {
        self.is_constant_along(axis, tol)
    }
    fn max_abs_coeff(&self) -> f64 {
        self.max_abs_coeff()
    }
    fn rel_coeff_diff(&self, other: &Self) -> Result<f64> {
        self.rel_coeff_diff(other)
    }
}

impl Calculus for LegendreSeries {
    fn constant_on(domain: &HyperRect, c: f64) -> Self {
        LegendreSeries::constant(domain.clone(), c)
    }
    fn domain(&self) -> &HyperRect {
        self.domain()
    }
    fn degree(&self) -> &MultiIndex {
        self.degree()
    }
    fn breaks(&self, _axis: usize) -> &[f64] {
        &[]
    }
    fn eval_unchecked(&self, s: &[f64]) -> f64 {
        self.eval_unchecked(s)
    }
    fn eval_grid(&self, nodes: &[Vec<f64>]) -> Vec<f64> {
        self.eval_grid(nodes)
    }
    fn derivative(&self, axis: usize) -> Self {
        self.derivative(axis)
    }
    fn antiderivative(&self, axis: usize) -> Self {
        self.antiderivative(axis)
    }
    fn mul_kernel(&self, axis: usize, k: usize) -> Self {
        self.mul_kernel(axis, k)
    }
    fn restrict_lower(&self, axis: usize) -> Self {
        self.restrict_lower(axis)
    }
    fn axpy(&self, a: f64, other: &Self) -> Result<Self> {
        self.axpy(a, other)
    }
    fn scale(&self, a: f64) -> Self {
        self.scale(a)
    }
    fn max_jump(&self, _axis: usize) -> (f64, f64) {
        (0.0, f64::NAN)
    }
    fn is_constant_along(&self, axis: usize, tol: f64) -> bool {
        self.is_constant_along(axis, tol)
    }
    fn max_abs_coeff(&self) -> f64 {
        self.max_abs_coeff()
    }
    fn rel_coeff_diff(&self, other: &Self) -> Result<f64> {
        self.rel_coeff_diff(other)
    }
}
