//! Tensor Legendre series on a hyperrectangle.
//!
//! A [`LegendreSeries`] stores coefficients `a_k` of `prod_i P_{k_i}(x_i)` where
//! `P_n` is the unnormalized Legendre polynomial and `x_i` maps `[lo_i, hi_i]`
//! affinely onto `[-1, 1]`. All calculus stays in this basis, which remains
//! well conditioned at degrees in the hundreds where monomials do not.

use crate::error::{Error, Result};
use crate::lattice::{strides, HyperRect, MultiIndex};
use crate::tensor::{contract_axis, map_axis, tensor_dot};

use super::{PiecewisePoly, Poly1D};

/// Highest degree accepted by [`LegendreSeries::to_piecewise`].
pub const MONOMIAL_DEGREE_LIMIT: usize = 30;

/// `P_0(x), ..., P_n(x)` by the three-term recurrence.
pub fn legendre_values(n: usize, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(n + 1);
    p.push(1.0);
    if n >= 1 {
        p.push(x);
    }
    for k in 1..n {
        let next = ((2 * k + 1) as f64 * x * p[k] - k as f64 * p[k - 1]) / (k + 1) as f64;
        p.push(next);
    }
    p
}

/// Clenshaw evaluation of `sum_n a_n P_n(x)`.
pub fn clenshaw(a: &[f64], x: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for k in (0..a.len()).rev() {
        let alpha = (2 * k + 1) as f64 * x / (k + 1) as f64;
        let beta = -((k + 1) as f64) / (k + 2) as f64;
        let b0 = a[k] + alpha * b1 + beta * b2;
        b2 = b1;
        b1 = b0;
    }
    b1
}

/// Coefficients of `x -> int_{-1}^x f`.
fn antider_1d(a: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    out[0] += a[0];
    out[1] += a[0];
    for (n, &an) in a.iter().enumerate().skip(1) {
        let w = an / (2 * n + 1) as f64;
        out[n + 1] += w;
        out[n - 1] -= w;
    }
}

/// Coefficients of `f'`, with `out.len() == max(a.len() - 1, 1)`.
fn der_1d(a: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    let m = a.len();
    if m < 2 {
        return;
    }
    // b_n = (2n+1) (a_{n+1} + b_{n+2} / (2n+5))
    for n in (0..m - 1).rev() {
        let carry = if n + 2 < m - 1 { out[n + 2] / (2 * n + 5) as f64 } else { 0.0 };
        out[n] = (2 * n + 1) as f64 * (a[n + 1] + carry);
    }
}

/// Coefficients of `(x + 1) f`.
fn mul_xp1_1d(a: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for (n, &an) in a.iter().enumerate() {
        out[n] += an;
        let d = (2 * n + 1) as f64;
        out[n + 1] += an * (n + 1) as f64 / d;
        if n > 0 {
            out[n - 1] += an * n as f64 / d;
        }
    }
}

/// A tensor Legendre series on a box.
#[derive(Clone, Debug, PartialEq)]
pub struct LegendreSeries {
    domain: HyperRect,
    degree: MultiIndex,
    coeffs: Vec<f64>,
}

impl LegendreSeries {
    /// Builds from a coefficient tensor of shape `degree + 1`, first axis fastest.
    pub fn new(domain: HyperRect, degree: MultiIndex, coeffs: Vec<f64>) -> Result<Self> {
        if degree.dim() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                found: degree.dim(),
            });
        }
        if coeffs.len() != degree.lattice_size() {
            return Err(Error::InvalidPoly(format!(
                "expected {} Legendre coefficients, got {}",
                degree.lattice_size(),
                coeffs.len()
            )));
        }
        Ok(LegendreSeries {
            domain,
            degree,
            coeffs,
        })
    }

    pub fn constant(domain: HyperRect, c: f64) -> Self {
        let n = domain.dim();
        LegendreSeries {
            domain,
            degree: MultiIndex::zeros(n),
            coeffs: vec![c],
        }
    }

    pub fn domain(&self) -> &HyperRect {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn degree(&self) -> &MultiIndex {
        &self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    fn shape(&self) -> Vec<usize> {
        self.degree.iter().map(|d| d + 1).collect()
    }

    fn to_reference(&self, axis: usize, s: f64) -> f64 {
        let lo = self.domain.lo()[axis];
        2.0 * (s - lo) / self.domain.width(axis) - 1.0
    }

    pub fn eval(&self, s: &[f64]) -> Result<f64> {
        self.domain.ensure_contains(s)?;
        Ok(self.eval_unchecked(s))
    }

    pub fn eval_unchecked(&self, s: &[f64]) -> f64 {
        if self.dim() == 1 {
            return clenshaw(&self.coeffs, self.to_reference(0, s[0]));
        }
        let w: Vec<Vec<f64>> = (0..self.dim())
            .map(|i| legendre_values(self.degree[i], self.to_reference(i, s[i])))
            .collect();
        tensor_dot(&self.coeffs, &self.shape(), &w)
    }

    /// Values on a tensor grid (first axis fastest), by sum factorization.
    pub fn eval_grid(&self, nodes: &[Vec<f64>]) -> Vec<f64> {
        let mut data = self.coeffs.clone();
        let mut shape = self.shape();
        for (axis, xs) in nodes.iter().enumerate() {
            let deg = self.degree[axis];
            let mut mat = Vec::with_capacity(xs.len() * (deg + 1));
            for &s in xs {
                mat.extend(legendre_values(deg, self.to_reference(axis, s)));
            }
            data = contract_axis(&data, &shape, axis, &mat, xs.len());
            shape[axis] = xs.len();
        }
        data
    }

    fn map_1d(
        &self,
        axis: usize,
        new_deg: usize,
        scale: f64,
        f: impl Fn(&[f64], &mut [f64]),
    ) -> Self {
        let mut coeffs = map_axis(&self.coeffs, &self.shape(), axis, new_deg + 1, |_, fin, fout| {
            f(fin, fout)
        });
        if scale != 1.0 {
            coeffs.iter_mut().for_each(|c| *c *= scale);
        }
        LegendreSeries {
            domain: self.domain.clone(),
            degree: self.degree.with(axis, new_deg),
            coeffs,
        }
    }

    pub fn derivative(&self, axis: usize) -> Self {
        let d = self.degree[axis];
        let new_deg = d.saturating_sub(1);
        self.map_1d(axis, new_deg, 2.0 / self.domain.width(axis), der_1d)
    }

    /// `s -> int_{lo_axis}^{s_axis} f ds_axis`.
    pub fn antiderivative(&self, axis: usize) -> Self {
        let d = self.degree[axis];
        self.map_1d(axis, d + 1, 0.5 * self.domain.width(axis), antider_1d)
    }

    /// Multiplies by `p_k(s_axis - lo_axis)`.
    pub fn mul_kernel(&self, axis: usize, k: usize) -> Self {
        let mut out = self.clone();
        let half = 0.5 * self.domain.width(axis);
        for j in 1..=k {
            let d = out.degree[axis];
            out = out.map_1d(axis, d + 1, half / j as f64, mul_xp1_1d);
        }
        out
    }

    /// Pins `s_axis = lo_axis`.
    pub fn restrict_lower(&self, axis: usize) -> Self {
        self.map_1d(axis, 0, 1.0, |fin, fout| {
            fout[0] = fin
                .iter()
                .enumerate()
                .map(|(n, a)| if n % 2 == 0 { *a } else { -*a })
                .sum();
        })
    }

    /// Zero-pads to a larger degree.
    pub fn raise_degree(&self, cap: &MultiIndex) -> Self {
        assert!(self.degree.le(cap));
        let mut out = self.clone();
        for axis in 0..self.dim() {
            if cap[axis] != out.degree[axis] {
                out = out.map_1d(axis, cap[axis], 1.0, |fin, fout| {
                    fout[..fin.len()].copy_from_slice(fin)
                });
            }
        }
        out
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &LegendreSeries) -> Result<Self> {
        self.domain.ensure_same(&other.domain)?;
        let cap = self.degree.join(&other.degree);
        let mut x = self.raise_degree(&cap);
        let y = other.raise_degree(&cap);
        x.coeffs
            .iter_mut()
            .zip(&y.coeffs)
            .for_each(|(p, q)| *p += a * q);
        Ok(x)
    }

    pub fn scale(&self, a: f64) -> Self {
        let mut x = self.clone();
        x.coeffs.iter_mut().for_each(|c| *c *= a);
        x
    }

    /// Exact integral over the domain.
    pub fn integral(&self) -> f64 {
        self.coeffs[0] * self.domain.volume()
    }

    /// Exact `L_2` norm from orthogonality.
    pub fn l2_norm(&self) -> f64 {
        let st = strides(&self.shape());
        let jac = self.domain.volume() / 2f64.powi(self.dim() as i32);
        let mut acc = 0.0;
        for (flat, c) in self.coeffs.iter().enumerate() {
            let mut w = 1.0;
            for (&s, d) in st.iter().zip(self.degree.iter()) {
                let n = (flat / s) % (d + 1);
                w *= 2.0 / (2 * n + 1) as f64;
            }
            acc += c * c * w;
        }
        (acc * jac).sqrt()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn is_constant_along(&self, axis: usize, tol: f64) -> bool {
        let scale = self.max_abs_coeff().max(1.0);
        let st = strides(&self.shape());
        self.coeffs
            .iter()
            .enumerate()
            .all(|(flat, c)| (flat / st[axis]).is_multiple_of(self.degree[axis] + 1) || c.abs() <= tol * scale)
    }

    pub fn rel_coeff_diff(&self, other: &LegendreSeries) -> Result<f64> {
        self.domain.ensure_same(&other.domain)?;
        let cap = self.degree.join(&other.degree);
        let a = self.raise_degree(&cap);
        let b = other.raise_degree(&cap);
        let scale = a.max_abs_coeff().max(b.max_abs_coeff());
        let diff = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
        Ok(if scale > 0.0 { diff / scale } else { diff })
    }

    /// Converts to a single-cell monomial representation. Refused above
    /// [`MONOMIAL_DEGREE_LIMIT`], where the conversion loses all accuracy.
    pub fn to_piecewise(&self) -> Result<PiecewisePoly> {
        let top = self.degree.iter().max().unwrap_or(0);
        if top > MONOMIAL_DEGREE_LIMIT {
            return Err(Error::DegreeTooHigh {
                degree: top,
                limit: MONOMIAL_DEGREE_LIMIT,
            });
        }
        let mut data = self.coeffs.clone();
        let shape = self.shape();
        for axis in 0..self.dim() {
            let scale = 2.0 / self.domain.width(axis);
            data = map_axis(&data, &shape, axis, shape[axis], |_, fin, fout| {
                // Taylor coefficients at x = -1 are successive derivatives there.
                let mut cur = fin.to_vec();
                let mut factor = 1.0;
                for o in fout.iter_mut() {
                    *o = factor * clenshaw(&cur, -1.0);
                    let mut next = vec![0.0; cur.len().saturating_sub(1).max(1)];
                    der_1d(&cur, &mut next);
                    cur = next;
                    factor *= scale;
                }
            });
        }
        PiecewisePoly::single_cell(self.domain.clone(), self.degree.clone(), data)
    }

    /// Single-axis series from a polynomial in the factorial monomial basis.
    pub fn from_poly1d(domain: HyperRect, axis: usize, p: &Poly1D) -> Self {
        // Horner in the Legendre basis: f = c_0 + t (c_1 + t/2 (c_2 + ...)),
        // with t = s - lo = (h/2)(x + 1).
        let q = p.recenter(domain.lo()[axis]);
        let half = 0.5 * domain.width(axis);
        let c = q.coeffs();
        let mut acc = vec![c[c.len() - 1]];
        for k in (0..c.len() - 1).rev() {
            let mut next = vec![0.0; acc.len() + 1];
            mul_xp1_1d(&acc, &mut next);
            let w = half / (k + 1) as f64;
            next.iter_mut().for_each(|v| *v *= w);
            next[0] += c[k];
            acc = next;
        }
        let n = domain.dim();
        let degree = MultiIndex::zeros(n).with(axis, acc.len() - 1);
        LegendreSeries {
            domain,
            degree,
            coeffs: acc,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sym1() -> HyperRect {
        HyperRect::symmetric(1)
    }

    #[test]
    fn recurrence_values() {
        let p = legendre_values(3, 1.0);
        assert_eq!(p, vec![1.0, 1.0, 1.0, 1.0]);
        let x = 0.3;
        let p = legendre_values(2, x);
        assert_relative_eq!(p[2], (3.0 * x * x - 1.0) / 2.0, epsilon = 1e-15);
        let a = [0.3, -1.0, 0.25, 2.0, 0.5];
        let direct: f64 = legendre_values(4, x).iter().zip(&a).map(|(p, a)| p * a).sum();
        assert_relative_eq!(clenshaw(&a, x), direct, epsilon = 1e-14);
    }

    #[test]
    fn calculus_matches_monomials() {
        let dom = HyperRect::new(vec![0.5], vec![2.0]).unwrap();
        let p = Poly1D::new(0.0, vec![1.0, -2.0, 0.5, 3.0]);
        let l = LegendreSeries::from_poly1d(dom.clone(), 0, &p);
        let m = PiecewisePoly::from_poly1d(dom.clone(), 0, &p);
        let ops: Vec<(LegendreSeries, PiecewisePoly)> = vec![
            (l.clone(), m.clone()),
            (l.derivative(0), m.derivative(0)),
            (l.antiderivative(0), m.antiderivative(0)),
            (l.mul_kernel(0, 2), m.mul_kernel(0, 2)),
            (l.restrict_lower(0), m.restrict_lower(0)),
        ];
        for (a, b) in ops {
            for s in [0.5, 0.9, 1.7, 2.0] {
                assert_relative_eq!(a.eval(&[s]).unwrap(), b.eval(&[s]).unwrap(), epsilon = 1e-12);
            }
        }
        let back = l.to_piecewise().unwrap();
        assert!(back.rel_coeff_diff(&m).unwrap() < 1e-13);
        assert_relative_eq!(l.integral(), m.integral(), epsilon = 1e-13);
    }

    #[test]
    fn norm_from_orthogonality() {
        let mut c = vec![0.0; 4];
        c[3] = 1.0;
        let p3 = LegendreSeries::new(sym1(), MultiIndex::new(vec![3]).unwrap(), c).unwrap();
        assert_relative_eq!(p3.l2_norm(), (1.0f64 / 3.5).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn grid_matches_pointwise() {
        let dom = HyperRect::new(vec![-1.0, 0.0], vec![1.0, 3.0]).unwrap();
        let coeffs: Vec<f64> = (0..12).map(|k| 1.0 / (k as f64 + 1.0)).collect();
        let f = LegendreSeries::new(dom, MultiIndex::new(vec![2, 3]).unwrap(), coeffs).unwrap();
        let nodes = vec![vec![-0.5, 0.0, 0.7], vec![0.1, 2.9]];
        let g = f.eval_grid(&nodes);
        for (j, y) in nodes[1].iter().enumerate() {
            for (i, x) in nodes[0].iter().enumerate() {
                assert_relative_eq!(g[i + 3 * j], f.eval(&[*x, *y]).unwrap(), epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn monomial_conversion_is_capped() {
        let f = LegendreSeries::new(sym1(), MultiIndex::new(vec![40]).unwrap(), vec![0.0; 41]).unwrap();
        assert!(matches!(f.to_piecewise(), Err(Error::DegreeTooHigh { degree: 40, .. })));
    }
}
