//! The reconstruction operator: per-axis multipliers and Volterra operators,
//! their tensor products, the map from trace bundles back to functions, and
//! its inverse.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::funcmodel::{TraceBundle, TraceFunction};
use crate::lattice::{face_spec, multiindex_range, MultiIndex};
use crate::polyrep::{Calculus, Poly1D};
use crate::quadnorm::QuadratureRule;

/// Relative tolerance for "constant along an inactive axis".
const CONSTANCY_TOL: f64 = 1e-10;
/// Absolute tolerance for derivative continuity across cell breaks.
const SMOOTHNESS_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// `alpha_i = delta_i = 0`.
    Identity,
    /// `alpha_i < delta_i`: multiplication by `p_{alpha_i}(s_i - a_i)`.
    Multiplier,
    /// `alpha_i = delta_i > 0`: `int_{a_i}^{s_i} p_{alpha_i - 1}(s_i - t) v dt`.
    Volterra,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AxisOperator {
    pub axis: usize,
    pub order_alpha: usize,
    pub order_delta: usize,
    pub mode: Mode,
}

impl AxisOperator {
    pub fn new(axis: usize, order_alpha: usize, order_delta: usize) -> Result<Self> {
        let mode = if order_alpha < order_delta {
            Mode::Multiplier
        } else if order_alpha == order_delta && order_delta > 0 {
            Mode::Volterra
        } else if order_alpha == 0 && order_delta == 0 {
            Mode::Identity
        } else {
            return Err(Error::NotDominated {
                alpha: order_alpha.to_string(),
                delta: order_delta.to_string(),
            });
        };
        Ok(AxisOperator {
            axis,
            order_alpha,
            order_delta,
            mode,
        })
    }
}

/// Applies one axis operator exactly. The Volterra case is the
/// `alpha_i`-fold antiderivative from `a_i`.
pub fn apply_axis_op<T: Calculus>(op: &AxisOperator, v: &T) -> T {
    match op.mode {
        Mode::Identity => v.clone(),
        Mode::Multiplier => v.mul_kernel(op.axis, op.order_alpha),
        Mode::Volterra => {
            let mut out = v.antiderivative(op.axis);
            for _ in 1..op.order_alpha {
                out = out.antiderivative(op.axis);
            }
            out
        }
    }
}

/// The tensor product of one axis operator per axis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorOperator {
    factors: Vec<AxisOperator>,
}

impl TensorOperator {
    pub fn new(alpha: &MultiIndex, delta: &MultiIndex) -> Result<Self> {
        alpha.ensure_le(delta)?;
        let factors = (0..alpha.dim())
            .map(|i| AxisOperator::new(i, alpha[i], delta[i]))
            .collect::<Result<_>>()?;
        Ok(TensorOperator { factors })
    }

    pub fn factors(&self) -> &[AxisOperator] {
        &self.factors
    }

    pub fn apply<T: Calculus>(&self, v: &T) -> T {
        self.factors
            .iter()
            .fold(v.clone(), |acc, op| apply_axis_op(op, &acc))
    }

    /// Pointwise action on a trace evaluator. Multipliers are evaluated
    /// directly; the Volterra factors become one integral over the box
    /// `prod [a_i, s_i]` with the Cauchy kernel.
    pub fn apply_at<F: Fn(&[f64]) -> f64 + Sync>(
        &self,
        v: F,
        lo: &[f64],
        s: &[f64],
        rule: &QuadratureRule,
    ) -> Result<f64> {
        let mut factor = 1.0;
        let mut bounds = Vec::with_capacity(s.len());
        for op in &self.factors {
            let i = op.axis;
            match op.mode {
                Mode::Identity => bounds.push((s[i], s[i])),
                Mode::Multiplier => {
                    factor *= Poly1D::kernel(op.order_alpha).eval(s[i] - lo[i]);
                    bounds.push((lo[i], lo[i]));
                }
                Mode::Volterra => {
                    if s[i] == lo[i] {
                        return Ok(0.0);
                    }
                    bounds.push((lo[i], s[i]));
                }
            }
        }
        if factor == 0.0 {
            return Ok(0.0);
        }
        let grid = rule.grid(&bounds);
        let integral = grid.integrate(|t| {
            let mut k = 1.0;
            for op in &self.factors {
                if op.mode == Mode::Volterra {
                    k *= Poly1D::kernel(op.order_alpha - 1).eval(s[op.axis] - t[op.axis]);
                }
            }
            k * v(t)
        })?;
        Ok(factor * integral)
    }
}

/// `G^delta v = sum_alpha G^delta_alpha v^alpha`. Each entry must already be
/// constant along the axes pinned by its face.
pub fn reconstruct<T: Calculus>(bundle: &TraceBundle<T>) -> Result<T> {
    let delta = bundle.delta();
    let first = bundle
        .entries()
        .first()
        .ok_or_else(|| Error::InvalidBundle("empty bundle".into()))?;
    let domain = first.domain().clone();
    let items: Vec<_> = bundle.iter().collect();
    for (alpha, spec, v) in &items {
        if v.domain() != &domain {
            return Err(Error::InvalidBundle(format!("entry {alpha} lives on a different domain")));
        }
        for axis in 0..delta.dim() {
            if !spec.is_active(axis) && !v.is_constant_along(axis, CONSTANCY_TOL) {
                return Err(Error::InvalidBundle(format!(
                    "entry {alpha} varies along pinned axis {axis} of face {spec}"
                )));
            }
        }
    }
    let summands: Vec<T> = items
        .par_iter()
        .map(|(alpha, _, v)| {
            TensorOperator::new(alpha, delta)
                .map(|op| op.apply(*v))
        })
        .collect::<Result<_>>()?;
    let mut iter = summands.into_iter();
    let mut acc = iter.next().expect("non-empty");
    for s in iter {
        acc = acc.axpy(1.0, &s)?;
    }
    Ok(acc)
}

/// `v^alpha = B^{alpha - delta} D^alpha u`, after checking that `u` has the
/// cross-break smoothness of `S_2^delta`.
pub fn extract_traces_poly<T: Calculus>(u: &T, delta: &MultiIndex) -> Result<TraceBundle<T>> {
    let n = u.domain().dim();
    if delta.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: delta.dim(),
        });
    }
    let mut entries = Vec::with_capacity(delta.lattice_size());
    for alpha in multiindex_range(delta) {
        let d = u.mixed_derivative(&alpha);
        for axis in 0..n {
            if alpha[axis] < delta[axis] {
                let (jump, at) = d.max_jump(axis);
                if jump > SMOOTHNESS_TOL {
                    return Err(Error::NotSmooth {
                        alpha: alpha.to_string(),
                        axis,
                        at,
                        jump,
                    });
                }
            }
        }
        let spec = face_spec(&alpha, delta)?;
        let mut v = d;
        for axis in 0..n {
            if !spec.is_active(axis) {
                v = v.restrict_lower(axis);
            }
        }
        entries.push(v);
    }
    TraceBundle::new(delta.clone(), entries)
}

/// The bundle of order `gamma - beta` whose reconstruction is
/// `D^beta G^gamma v`: entry `alpha'` is `v^{alpha' + beta}`.
pub fn derivative_bundle<T: Clone>(bundle: &TraceBundle<T>, beta: &MultiIndex) -> Result<TraceBundle<T>> {
    let gamma = bundle.delta();
    let order = gamma.checked_sub(beta).ok_or_else(|| Error::NotDominated {
        alpha: beta.to_string(),
        delta: gamma.to_string(),
    })?;
    let entries = multiindex_range(&order)
        .iter()
        .map(|a| bundle.get(&a.add(beta)).clone())
        .collect();
    TraceBundle::new(order, entries)
}

/// Both sides of `int_{a}^{s} G^{d}_{k} v = G^{d+1}_{k+1} v` along axis 0.
/// Below top order (`k < d`) the identity needs `v` constant along axis 0.
pub fn fund_int_check<T: Calculus>(delta1: usize, k: usize, v: &T) -> Result<(T, T)> {
    if k > delta1 {
        return Err(Error::NotDominated {
            alpha: k.to_string(),
            delta: delta1.to_string(),
        });
    }
    if k < delta1 && !v.is_constant_along(0, CONSTANCY_TOL) {
        return Err(Error::InvalidBundle(
            "below top order the integrand must be a lower-boundary value".into(),
        ));
    }
    let lhs = apply_axis_op(&AxisOperator::new(0, k, delta1)?, v).antiderivative(0);
    let rhs = apply_axis_op(&AxisOperator::new(0, k + 1, delta1 + 1)?, v);
    Ok((lhs, rhs))
}

/// One row of a trace table: the trace value at the face projection of `s`
/// and the summand `G^delta_alpha v^alpha (s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionTerm {
    pub alpha: MultiIndex,
    pub face: String,
    pub trace_value: f64,
    pub contribution: f64,
}

/// Evaluates every summand of the expansion of an analytic function at `s`.
pub fn expansion_terms(
    bundle: &TraceBundle<TraceFunction>,
    s: &[f64],
    rule: &QuadratureRule,
) -> Result<Vec<ExpansionTerm>> {
    let delta = bundle.delta();
    bundle
        .iter()
        .map(|(alpha, spec, t)| {
            t.domain().ensure_contains(s)?;
            let lo = t.domain().lo();
            let rule = rule.clone().for_function(t.source());
            let op = TensorOperator::new(&alpha, delta)?;
            Ok(ExpansionTerm {
                face: spec.to_string(),
                trace_value: t.eval(s),
                contribution: op.apply_at(|p| t.eval(p), lo, s, &rule)?,
                alpha,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcmodel::{example1, extract_traces, x2y};
    use crate::lattice::HyperRect;
    use crate::polyrep::PiecewisePoly;
    use approx::assert_relative_eq;

    fn mi(v: &[usize]) -> MultiIndex {
        MultiIndex::new(v.to_vec()).unwrap()
    }

    fn x2y_poly() -> PiecewisePoly {
        let mut c = vec![0.0; 6];
        c[5] = 2.0;
        PiecewisePoly::single_cell(HyperRect::unit(2), mi(&[2, 1]), c).unwrap()
    }

    #[test]
    fn axis_modes() {
        let one = PiecewisePoly::constant(HyperRect::unit(1), 1.0);
        let v = apply_axis_op(&AxisOperator::new(0, 2, 2).unwrap(), &one);
        assert_relative_eq!(v.eval(&[0.6]).unwrap(), 0.18, epsilon = 1e-15);
        let c = PiecewisePoly::constant(HyperRect::unit(1), 3.0);
        let m = apply_axis_op(&AxisOperator::new(0, 1, 2).unwrap(), &c);
        assert_relative_eq!(m.eval(&[0.6]).unwrap(), 1.8, epsilon = 1e-15);
        let id = AxisOperator::new(0, 0, 0).unwrap();
        assert_eq!(id.mode, Mode::Identity);
        assert_eq!(apply_axis_op(&id, &c), c);
        assert!(AxisOperator::new(0, 3, 2).is_err());
    }

    #[test]
    fn x2y_reconstruction() {
        let dom = HyperRect::unit(2);
        let delta = mi(&[2, 1]);
        let mut entries = vec![PiecewisePoly::zero(dom.clone()); 5];
        entries.push(PiecewisePoly::constant(dom.clone(), 2.0));
        let b = TraceBundle::new(delta.clone(), entries).unwrap();
        let u = reconstruct(&b).unwrap();
        assert!(u.rel_coeff_diff(&x2y_poly()).unwrap() < 1e-15);
        let back = extract_traces_poly(&x2y_poly(), &delta).unwrap();
        assert!(back.max_rel_diff(&b).unwrap() < 1e-15);
    }

    #[test]
    fn zero_order_is_identity() {
        let v = x2y_poly();
        let b = TraceBundle::new(mi(&[0, 0]), vec![v.clone()]).unwrap();
        assert_eq!(reconstruct(&b).unwrap(), v);
    }

    #[test]
    fn abs_value_traces() {
        let u = PiecewisePoly::new(
            HyperRect::symmetric(1),
            vec![vec![0.0]],
            mi(&[1]),
            vec![1.0, -1.0, 0.0, 1.0],
        )
        .unwrap();
        let b = extract_traces_poly(&u, &mi(&[1])).unwrap();
        assert_eq!(b.entries()[0].eval(&[0.3]).unwrap(), 1.0);
        assert_eq!(b.entries()[1].eval(&[-0.3]).unwrap(), -1.0);
        assert_eq!(b.entries()[1].eval(&[0.3]).unwrap(), 1.0);
        assert!(reconstruct(&b).unwrap().rel_coeff_diff(&u).unwrap() < 1e-15);
        assert!(matches!(extract_traces_poly(&u, &mi(&[2])), Err(Error::NotSmooth { .. })));
    }

    #[test]
    fn rejects_bad_bundles() {
        let b = TraceBundle::new(mi(&[1]), vec![x2y_poly()]);
        assert!(b.is_err());
        let entries = vec![x2y_poly(); 6];
        let b = TraceBundle::new(mi(&[2, 1]), entries).unwrap();
        assert!(matches!(reconstruct(&b), Err(Error::InvalidBundle(_))));
    }

    #[test]
    fn fund_int_examples() {
        let one = PiecewisePoly::constant(HyperRect::unit(1), 1.0);
        for (d, k) in [(1, 0), (1, 1), (0, 0), (3, 2)] {
            let (l, r) = fund_int_check(d, k, &one).unwrap();
            assert!(l.rel_coeff_diff(&r).unwrap() < 1e-15);
        }
        let (l, _) = fund_int_check(1, 1, &one).unwrap();
        assert_relative_eq!(l.eval(&[0.5]).unwrap(), 0.125);
        let p1 = PiecewisePoly::from_poly1d(HyperRect::unit(1), 0, &Poly1D::kernel(1));
        let (l, r) = fund_int_check(1, 1, &p1).unwrap();
        assert_relative_eq!(l.eval(&[0.9]).unwrap(), 0.9f64.powi(3) / 6.0, epsilon = 1e-15);
        assert!(l.rel_coeff_diff(&r).unwrap() < 1e-15);
        assert!(fund_int_check(2, 1, &p1).is_err());
    }

    #[test]
    fn commutation_with_derivatives() {
        let u = x2y_poly();
        let delta = mi(&[2, 1]);
        let b = extract_traces_poly(&u, &delta).unwrap();
        for beta in multiindex_range(&delta) {
            let lhs = u.mixed_derivative(&beta);
            let rhs = reconstruct(&derivative_bundle(&b, &beta).unwrap()).unwrap();
            assert!(lhs.rel_coeff_diff(&rhs).unwrap() < 1e-14, "beta={beta}");
        }
    }

    #[test]
    fn trace_table_sums_to_value() {
        let u = x2y();
        let rows = expansion_terms(&extract_traces(&u), &[1.0, 1.0], &QuadratureRule::default()).unwrap();
        assert_eq!(rows.len(), 6);
        let total: f64 = rows.iter().map(|r| r.contribution).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-13);
        let b0 = crate::funcmodel::extract_traces_order(&u, &mi(&[0, 0])).unwrap();
        let rows = expansion_terms(&b0, &[0.5, 0.8], &QuadratureRule::default()).unwrap();
        assert_eq!(rows.len(), 1);
        assert_relative_eq!(rows[0].contribution, 0.2, epsilon = 1e-15);
        let mixed = crate::funcmodel::extract_traces_order(&u, &mi(&[0, 1])).unwrap();
        let rows = expansion_terms(&mixed, &[0.5, 0.8], &QuadratureRule::default()).unwrap();
        let total: f64 = rows.iter().map(|r| r.contribution).sum();
        assert_relative_eq!(total, 0.2, epsilon = 1e-14);
        let e1 = example1();
        let rows = expansion_terms(&extract_traces(&e1), &[0.5], &QuadratureRule::default()).unwrap();
        let total: f64 = rows.iter().map(|r| r.contribution).sum();
        assert!((total - e1.eval(&[0.5]).unwrap()).abs() < 1e-8);
    }
}
