//! Tensor-grid piecewise polynomials with exact calculus.
//!
//! Each cell stores coefficients in the factorial-scaled monomial basis
//! `prod_i (s_i - c_i)^{k_i} / k_i!` about the cell's lower corner `c`. In this
//! basis the kernels `p_k(z) = z^k / k!` are unit vectors, differentiation is
//! an index shift down and integration from the lower corner an index shift up.

mod calculus;
mod hexfloat;
mod legendre;
pub mod text;

pub use calculus::Calculus;
pub use hexfloat::{format_hex, parse_hex};
pub use legendre::{clenshaw, legendre_values, LegendreSeries, MONOMIAL_DEGREE_LIMIT};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{shape_iter, strides, HyperRect, MultiIndex};
use crate::tensor::{map_axis, tensor_dot};

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// A univariate polynomial `sum_k c_k (s - center)^k / k!`.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly1D {
    center: f64,
    coeffs: Vec<f64>,
}

impl Poly1D {
    pub fn new(center: f64, mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Poly1D { center, coeffs }
    }

    /// The kernel `p_k(z) = z^k / k!`, centered at zero.
    pub fn kernel(k: usize) -> Self {
        let mut c = vec![0.0; k + 1];
        c[k] = 1.0;
        Poly1D::new(0.0, c)
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, s: f64) -> f64 {
        let t = s - self.center;
        // Horner on c_k / k!: sum c_k t^k / k! = c_0 + t (c_1 + t/2 (c_2 + t/3 (...)))
        let mut acc = 0.0;
        for k in (0..self.coeffs.len()).rev() {
            acc = self.coeffs[k] + if k + 1 < self.coeffs.len() { acc * t / (k + 1) as f64 } else { 0.0 };
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Poly1D::new(self.center, vec![0.0]);
        }
        Poly1D::new(self.center, self.coeffs[1..].to_vec())
    }

    /// `s -> int_center^s f`.
    pub fn antiderivative(&self) -> Self {
        let mut c = Vec::with_capacity(self.coeffs.len() + 1);
        c.push(0.0);
        c.extend_from_slice(&self.coeffs);
        Poly1D::new(self.center, c)
    }

    /// The same polynomial expanded about `new_center`.
    pub fn recenter(&self, new_center: f64) -> Self {
        let h = new_center - self.center;
        Poly1D::new(new_center, taylor_shift(&self.coeffs, h))
    }

    pub fn mul(&self, other: &Poly1D) -> Self {
        let o = other.recenter(self.center);
        let mut c = vec![0.0; self.coeffs.len() + o.coeffs.len() - 1];
        for (a, ca) in self.coeffs.iter().enumerate() {
            for (b, cb) in o.coeffs.iter().enumerate() {
                c[a + b] += ca * cb * binomial(a + b, a);
            }
        }
        Poly1D::new(self.center, c)
    }
}

/// Re-expands factorial-basis coefficients about a point shifted by `h`.
pub(crate) fn taylor_shift(c: &[f64], h: f64) -> Vec<f64> {
    if h == 0.0 {
        return c.to_vec();
    }
    (0..c.len())
        .map(|j| {
            let mut acc = 0.0;
            let mut pw = 1.0;
            for (m, ck) in c[j..].iter().enumerate() {
                acc += ck * pw;
                pw *= h / (m + 1) as f64;
            }
            acc
        })
        .collect()
}

/// Weights `h^k / k!` for `k = 0..=deg`.
fn power_weights(h: f64, deg: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(deg + 1);
    let mut p = 1.0;
    for k in 0..=deg {
        w.push(p);
        p *= h / (k + 1) as f64;
    }
    w
}

/// A piecewise polynomial on a tensor grid over a hyperrectangle.
///
/// Coefficients form one dense tensor of shape `(degree + 1) ++ cells`, first
/// axis fastest: the coefficient tensor of each cell is contiguous. Cells are
/// half-open `[x_j, x_{j+1})` except the last along each axis, which is closed.
/// No continuity is implied across breaks.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewisePoly {
    domain: HyperRect,
    knots: Vec<Vec<f64>>,
    degree: MultiIndex,
    coeffs: Vec<f64>,
}

impl PiecewisePoly {
    /// Builds from interior breaks per axis and a coefficient vector laid out
    /// cell by cell.
    pub fn new(
        domain: HyperRect,
        breaks: Vec<Vec<f64>>,
        degree: MultiIndex,
        coeffs: Vec<f64>,
    ) -> Result<Self> {
        let n = domain.dim();
        if breaks.len() != n || degree.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: if breaks.len() != n { breaks.len() } else { degree.dim() },
            });
        }
        let mut knots = Vec::with_capacity(n);
        for (i, b) in breaks.into_iter().enumerate() {
            let (lo, hi) = (domain.lo()[i], domain.hi()[i]);
            let mut k = Vec::with_capacity(b.len() + 2);
            k.push(lo);
            for x in b {
                if !(x > *k.last().unwrap() && x < hi) {
                    return Err(Error::InvalidPoly(format!(
                        "axis {i}: breaks must be strictly increasing inside ({lo}, {hi})"
                    )));
                }
                k.push(x);
            }
            k.push(hi);
            knots.push(k);
        }
        let p = PiecewisePoly {
            domain,
            knots,
            degree,
            coeffs: Vec::new(),
        };
        let expected = p.ncells() * p.ncoef();
        if coeffs.len() != expected {
            return Err(Error::InvalidPoly(format!(
                "expected {expected} coefficients, got {}",
                coeffs.len()
            )));
        }
        Ok(PiecewisePoly { coeffs, ..p })
    }

    pub(crate) fn from_parts(
        domain: HyperRect,
        knots: Vec<Vec<f64>>,
        degree: MultiIndex,
        coeffs: Vec<f64>,
    ) -> Self {
        let p = PiecewisePoly {
            domain,
            knots,
            degree,
            coeffs,
        };
        debug_assert_eq!(p.coeffs.len(), p.ncells() * p.ncoef());
        p
    }

    pub fn constant(domain: HyperRect, c: f64) -> Self {
        let n = domain.dim();
        let knots = (0..n)
            .map(|i| vec![domain.lo()[i], domain.hi()[i]])
            .collect();
        PiecewisePoly::from_parts(domain, knots, MultiIndex::zeros(n), vec![c])
    }

    pub fn zero(domain: HyperRect) -> Self {
        Self::constant(domain, 0.0)
    }

    /// Single-cell polynomial from a coefficient tensor (shape `degree + 1`)
    /// in the factorial basis about the domain's lower corner.
    pub fn single_cell(domain: HyperRect, degree: MultiIndex, coeffs: Vec<f64>) -> Result<Self> {
        let breaks = vec![Vec::new(); domain.dim()];
        PiecewisePoly::new(domain, breaks, degree, coeffs)
    }

    /// Lifts a univariate polynomial in `s_axis` to the whole domain.
    pub fn from_poly1d(domain: HyperRect, axis: usize, p: &Poly1D) -> Self {
        let n = domain.dim();
        let q = p.recenter(domain.lo()[axis]);
        let mut degree = MultiIndex::zeros(n);
        degree = degree.with(axis, q.degree());
        let knots = (0..n)
            .map(|i| vec![domain.lo()[i], domain.hi()[i]])
            .collect();
        PiecewisePoly::from_parts(domain, knots, degree, q.coeffs().to_vec())
    }

    /// A function that is constant on each cell of the given grid.
    pub fn step(domain: HyperRect, breaks: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        let n = domain.dim();
        PiecewisePoly::new(domain, breaks, MultiIndex::zeros(n), values)
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

    /// All knots along `axis`, endpoints included.
    pub fn knots(&self, axis: usize) -> &[f64] {
        &self.knots[axis]
    }

    pub fn breaks(&self, axis: usize) -> &[f64] {
        let k = &self.knots[axis];
        &k[1..k.len() - 1]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn cell_shape(&self) -> Vec<usize> {
        self.knots.iter().map(|k| k.len() - 1).collect()
    }

    pub fn ncells(&self) -> usize {
        self.cell_shape().iter().product()
    }

    pub fn ncoef(&self) -> usize {
        self.degree.lattice_size()
    }

    fn coef_shape(&self) -> Vec<usize> {
        self.degree.iter().map(|d| d + 1).collect()
    }

    fn full_shape(&self) -> Vec<usize> {
        let mut s = self.coef_shape();
        s.extend(self.cell_shape());
        s
    }

    /// Coefficients of one cell, given its per-axis cell indices.
    pub fn cell_coeffs(&self, cell: &[usize]) -> &[f64] {
        let cs = strides(&self.cell_shape());
        let flat: usize = cell.iter().zip(&cs).map(|(c, s)| c * s).sum();
        let m = self.ncoef();
        &self.coeffs[flat * m..(flat + 1) * m]
    }

    /// Cell index along `axis` containing `x` (half-open, last cell closed).
    pub fn locate(&self, axis: usize, x: f64) -> usize {
        let k = &self.knots[axis];
        k[1..k.len() - 1].partition_point(|b| *b <= x)
    }

    pub fn eval(&self, s: &[f64]) -> Result<f64> {
        self.domain.ensure_contains(s)?;
        Ok(self.eval_unchecked(s))
    }

    /// Evaluation without the domain check; points outside are extrapolated
    /// from the nearest boundary cell.
    pub fn eval_unchecked(&self, s: &[f64]) -> f64 {
        let n = self.dim();
        let cell: Vec<usize> = (0..n).map(|i| self.locate(i, s[i])).collect();
        let pw: Vec<Vec<f64>> = (0..n)
            .map(|i| power_weights(s[i] - self.knots[i][cell[i]], self.degree[i]))
            .collect();
        let c = self.cell_coeffs(&cell);
        tensor_dot(c, &self.coef_shape(), &pw)
    }

    /// Values on a tensor grid of nodes (first axis fastest).
    pub fn eval_grid(&self, nodes: &[Vec<f64>]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(nodes.len(), n);
        let per_axis: Vec<Vec<(usize, Vec<f64>)>> = (0..n)
            .map(|i| {
                nodes[i]
                    .iter()
                    .map(|&x| {
                        let c = self.locate(i, x);
                        (c, power_weights(x - self.knots[i][c], self.degree[i]))
                    })
                    .collect()
            })
            .collect();
        // Contract one axis at a time. Before step i the layout (first axis
        // fastest) is [nodes 0..i) [coef i] [coef i+1..] [cell i] [cells i+1..].
        let cells = self.cell_shape();
        let mut data = self.coeffs.clone();
        let mut a = 1usize;
        for i in 0..n {
            let k = self.degree[i] + 1;
            let b: usize = (i + 1..n).map(|t| self.degree[t] + 1).product();
            let ci = cells[i];
            let dsz: usize = cells[i + 1..].iter().product();
            let m = nodes[i].len();
            let mut out = vec![0.0; a * m * b * dsz];
            let axis = &per_axis[i];
            out.par_chunks_mut(a * m * b).enumerate().for_each(|(d, chunk)| {
                for (j, (c, w)) in axis.iter().enumerate() {
                    for bb in 0..b {
                        let dst = a * (j + m * bb);
                        for (kk, &wk) in w.iter().enumerate() {
                            if wk == 0.0 {
                                continue;
                            }
                            let src = a * (kk + k * (bb + b * (c + ci * d)));
                            for (o, s) in chunk[dst..dst + a].iter_mut().zip(&data[src..src + a]) {
                                *o += wk * s;
                            }
                        }
                    }
                }
            });
            data = out;
            a *= m;
        }
        data
    }

    /// Cellwise partial derivative along `axis`.
    pub fn derivative(&self, axis: usize) -> Self {
        let d = self.degree[axis];
        if d == 0 {
            let mut z = self.clone();
            z.coeffs.iter_mut().for_each(|c| *c = 0.0);
            return z;
        }
        let shape = self.full_shape();
        let coeffs = map_axis(&self.coeffs, &shape, axis, d, |_, fin, fout| {
            fout.copy_from_slice(&fin[1..]);
        });
        PiecewisePoly::from_parts(
            self.domain.clone(),
            self.knots.clone(),
            self.degree.with(axis, d - 1),
            coeffs,
        )
    }

    /// `s -> int_{lo_axis}^{s_axis} f ds_axis`, continuous across axis breaks.
    pub fn antiderivative(&self, axis: usize) -> Self {
        let n = self.dim();
        let d = self.degree[axis];
        let shape = self.full_shape();
        let mut coeffs = map_axis(&self.coeffs, &shape, axis, d + 2, |_, fin, fout| {
            fout[1..].copy_from_slice(fin);
        });
        let degree = self.degree.with(axis, d + 1);
        let mut new_shape = shape.clone();
        new_shape[axis] = d + 2;
        let st = strides(&new_shape);
        let cell_axis = n + axis;
        let ncell = new_shape[cell_axis];
        if ncell > 1 {
            // Positions with coefficient index and cell index along `axis` both zero.
            let mut reduced = new_shape.clone();
            reduced[axis] = 1;
            reduced[cell_axis] = 1;
            let weights: Vec<Vec<f64>> = (0..ncell)
                .map(|j| {
                    power_weights(self.knots[axis][j + 1] - self.knots[axis][j], d + 1)
                })
                .collect();
            for pos in shape_iter(&reduced) {
                let base: usize = pos.iter().zip(&st).map(|(p, s)| p * s).sum();
                for j in 1..ncell {
                    let prev = base + (j - 1) * st[cell_axis];
                    let carry: f64 = (0..=d + 1)
                        .map(|k| coeffs[prev + k * st[axis]] * weights[j - 1][k])
                        .sum();
                    coeffs[base + j * st[cell_axis]] += carry;
                }
            }
        }
        PiecewisePoly::from_parts(self.domain.clone(), self.knots.clone(), degree, coeffs)
    }

    /// Multiplies by `p_k(s_axis - lo_axis)`.
    pub fn mul_kernel(&self, axis: usize, k: usize) -> Self {
        let mut kern = Poly1D::kernel(k);
        kern.center = self.domain.lo()[axis];
        self.mul_axis_poly(axis, &kern)
    }

    /// Multiplies by a polynomial in `s_axis` alone.
    pub fn mul_axis_poly(&self, axis: usize, p: &Poly1D) -> Self {
        let n = self.dim();
        let d = self.degree[axis];
        let pd = p.degree();
        let shape = self.full_shape();
        let factors: Vec<Vec<f64>> = (0..self.knots[axis].len() - 1)
            .map(|j| p.recenter(self.knots[axis][j]).coeffs().to_vec())
            .collect();
        let coeffs = map_axis(&self.coeffs, &shape, axis, d + pd + 1, |pos, fin, fout| {
            let f = &factors[pos[n + axis]];
            for (a, ca) in fin.iter().enumerate() {
                if *ca == 0.0 {
                    continue;
                }
                for (b, cb) in f.iter().enumerate() {
                    fout[a + b] += ca * cb * binomial(a + b, a);
                }
            }
        });
        PiecewisePoly::from_parts(
            self.domain.clone(),
            self.knots.clone(),
            self.degree.with(axis, d + pd),
            coeffs,
        )
    }

    /// Pins `s_axis = lo_axis`; the result is constant along `axis`.
    pub fn restrict_lower(&self, axis: usize) -> Self {
        let n = self.dim();
        let shape = self.full_shape();
        let c1 = map_axis(&self.coeffs, &shape, axis, 1, |_, fin, fout| {
            fout[0] = fin[0];
        });
        let mut s1 = shape.clone();
        s1[axis] = 1;
        let c2 = map_axis(&c1, &s1, n + axis, 1, |_, fin, fout| {
            fout[0] = fin[0];
        });
        let mut knots = self.knots.clone();
        knots[axis] = vec![self.domain.lo()[axis], self.domain.hi()[axis]];
        PiecewisePoly::from_parts(
            self.domain.clone(),
            knots,
            self.degree.with(axis, 0),
            c2,
        )
    }

    /// Largest jump of the function across the breaks along `axis`, measured
    /// coefficientwise on the shared face. Returns `(jump, break location)`.
    pub fn max_jump(&self, axis: usize) -> (f64, f64) {
        let n = self.dim();
        let ncell = self.knots[axis].len() - 1;
        if ncell == 1 {
            return (0.0, f64::NAN);
        }
        let shape = self.full_shape();
        let d = self.degree[axis];
        let st = strides(&shape);
        let cell_axis = n + axis;
        let mut reduced = shape.clone();
        reduced[axis] = 1;
        reduced[cell_axis] = 1;
        let mut worst = (0.0, f64::NAN);
        for j in 1..ncell {
            let w = power_weights(self.knots[axis][j] - self.knots[axis][j - 1], d);
            for pos in shape_iter(&reduced) {
                let base: usize = pos.iter().zip(&st).map(|(p, s)| p * s).sum();
                let left: f64 = (0..=d)
                    .map(|k| self.coeffs[base + (j - 1) * st[cell_axis] + k * st[axis]] * w[k])
                    .sum();
                let right = self.coeffs[base + j * st[cell_axis]];
                let jump = (left - right).abs();
                if jump > worst.0 {
                    worst = (jump, self.knots[axis][j]);
                }
            }
        }
        worst
    }

    /// True when the function does not vary along `axis` (up to `tol`
    /// relative to the largest coefficient).
    pub fn is_constant_along(&self, axis: usize, tol: f64) -> bool {
        let scale = self.max_abs_coeff().max(1.0);
        let shape = self.full_shape();
        let st = strides(&shape);
        let higher = shape_iter(&shape).enumerate().all(|(flat, pos)| {
            pos[axis] == 0 || self.coeffs[flat].abs() <= tol * scale
        });
        let _ = st;
        higher && self.max_jump(axis).0 <= tol * scale
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Zero-pads to a larger degree cap.
    pub fn raise_degree(&self, cap: &MultiIndex) -> Self {
        assert!(self.degree.le(cap));
        if &self.degree == cap {
            return self.clone();
        }
        let mut out = self.clone();
        let mut shape = self.full_shape();
        for axis in 0..self.dim() {
            let old = shape[axis];
            let new = cap[axis] + 1;
            if new != old {
                out.coeffs = map_axis(&out.coeffs, &shape, axis, new, |_, fin, fout| {
                    fout[..fin.len()].copy_from_slice(fin);
                });
                shape[axis] = new;
            }
        }
        out.degree = cap.clone();
        out
    }

    /// Re-expresses on a finer grid; `knots` must contain the current knots.
    pub fn refine(&self, knots: &[Vec<f64>]) -> Result<Self> {
        let n = self.dim();
        let mut out = self.clone();
        for axis in 0..n {
            if knots[axis] == out.knots[axis] {
                continue;
            }
            let old = &out.knots[axis];
            let new = &knots[axis];
            if new.first() != old.first() || new.last() != old.last() {
                return Err(Error::InvalidPoly("refinement changes the domain".into()));
            }
            for b in old {
                if !new.contains(b) {
                    return Err(Error::InvalidPoly(format!(
                        "refinement on axis {axis} drops knot {b}"
                    )));
                }
            }
            let parents: Vec<usize> = new[..new.len() - 1]
                .iter()
                .map(|&x| old[1..old.len() - 1].partition_point(|b| *b <= x))
                .collect();
            let offsets: Vec<f64> = new[..new.len() - 1]
                .iter()
                .zip(&parents)
                .map(|(&x, &p)| x - old[p])
                .collect();
            let shape = out.full_shape();
            let gathered = map_axis(&out.coeffs, &shape, n + axis, parents.len(), |_, fin, fout| {
                for (o, &p) in fout.iter_mut().zip(&parents) {
                    *o = fin[p];
                }
            });
            let mut gshape = shape.clone();
            gshape[n + axis] = parents.len();
            let shifted = map_axis(&gathered, &gshape, axis, gshape[axis], |pos, fin, fout| {
                let h = offsets[pos[n + axis]];
                fout.copy_from_slice(&taylor_shift(fin, h));
            });
            out.coeffs = shifted;
            out.knots[axis] = new.clone();
        }
        Ok(out)
    }

    fn common_knots(&self, other: &PiecewisePoly) -> Vec<Vec<f64>> {
        self.knots
            .iter()
            .zip(&other.knots)
            .map(|(a, b)| merge_knots(a, b))
            .collect()
    }

    /// Brings both operands onto a common grid and degree cap.
    pub fn align(&self, other: &PiecewisePoly) -> Result<(Self, Self)> {
        self.domain.ensure_same(&other.domain)?;
        let knots = self.common_knots(other);
        let cap = self.degree.join(&other.degree);
        Ok((
            self.refine(&knots)?.raise_degree(&cap),
            other.refine(&knots)?.raise_degree(&cap),
        ))
    }

    pub fn add(&self, other: &PiecewisePoly) -> Result<Self> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &PiecewisePoly) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &PiecewisePoly) -> Result<Self> {
        let (mut x, y) = self.align(other)?;
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

    /// Exact product on the common refinement of both grids.
    pub fn mul(&self, other: &PiecewisePoly) -> Result<Self> {
        self.domain.ensure_same(&other.domain)?;
        let knots = self.common_knots(other);
        let a = self.refine(&knots)?;
        let b = other.refine(&knots)?;
        let degree = a.degree.add(&b.degree);
        let ash = a.coef_shape();
        let bsh = b.coef_shape();
        let osh: Vec<usize> = degree.iter().map(|d| d + 1).collect();
        let ost = strides(&osh);
        let a_idx: Vec<Vec<usize>> = shape_iter(&ash).collect();
        let b_idx: Vec<Vec<usize>> = shape_iter(&bsh).collect();
        // Per coefficient pair: output slot and binomial weight.
        let mut plan = Vec::with_capacity(a_idx.len() * b_idx.len());
        for (ia, ka) in a_idx.iter().enumerate() {
            for (ib, kb) in b_idx.iter().enumerate() {
                let mut slot = 0;
                let mut w = 1.0;
                for i in 0..ka.len() {
                    slot += (ka[i] + kb[i]) * ost[i];
                    w *= binomial(ka[i] + kb[i], ka[i]);
                }
                plan.push((ia, ib, slot, w));
            }
        }
        let (ma, mb, mo) = (a.ncoef(), b.ncoef(), degree.lattice_size());
        let ncells = a.ncells();
        let mut coeffs = vec![0.0; ncells * mo];
        coeffs
            .par_chunks_mut(mo)
            .enumerate()
            .for_each(|(cell, out)| {
                let ca = &a.coeffs[cell * ma..(cell + 1) * ma];
                let cb = &b.coeffs[cell * mb..(cell + 1) * mb];
                for &(ia, ib, slot, w) in &plan {
                    out[slot] += ca[ia] * cb[ib] * w;
                }
            });
        Ok(PiecewisePoly::from_parts(
            self.domain.clone(),
            knots,
            degree,
            coeffs,
        ))
    }

    /// Exact integral over the domain.
    pub fn integral(&self) -> f64 {
        let n = self.dim();
        let cshape = self.cell_shape();
        let coef_shape = self.coef_shape();
        let m = self.ncoef();
        let cells: Vec<Vec<usize>> = shape_iter(&cshape).collect();
        let parts: Vec<f64> = cells
            .par_iter()
            .enumerate()
            .map(|(flat, cell)| {
                // int_0^h t^k/k! dt = h^{k+1}/(k+1)!
                let w: Vec<Vec<f64>> = (0..n)
                    .map(|i| {
                        let h = self.knots[i][cell[i] + 1] - self.knots[i][cell[i]];
                        power_weights(h, self.degree[i] + 1)[1..].to_vec()
                    })
                    .collect();
                tensor_dot(&self.coeffs[flat * m..(flat + 1) * m], &coef_shape, &w)
            })
            .collect();
        crate::tensor::pairwise_sum(&parts)
    }

    /// Exact `L_2` inner product.
    pub fn inner(&self, other: &PiecewisePoly) -> Result<f64> {
        Ok(self.mul(other)?.integral())
    }

    /// Exact `L_2` norm.
    pub fn l2_norm(&self) -> f64 {
        self.inner(self).expect("same domain").max(0.0).sqrt()
    }

    /// Largest coefficient difference after alignment, relative to the
    /// largest coefficient of either operand (absolute when both vanish).
    pub fn rel_coeff_diff(&self, other: &PiecewisePoly) -> Result<f64> {
        let (a, b) = self.align(other)?;
        let scale = a.max_abs_coeff().max(b.max_abs_coeff());
        let diff = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
        Ok(if scale > 0.0 { diff / scale } else { diff })
    }
}

fn merge_knots(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut m: Vec<f64> = a.iter().chain(b).copied().collect();
    m.sort_by(|x, y| x.partial_cmp(y).unwrap());
    m.dedup();
    m
}
