//! Legendre and step-function `L_2` projections, and their order-`gamma`
//! Sobolev counterparts obtained by projecting each trace and reconstructing.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expansion::{derivative_bundle, reconstruct};
use crate::funcmodel::{extract_traces_order, AnalyticFunction, TraceBundle, TraceFunction};
use crate::lattice::{shape_iter, HyperRect, MultiIndex, SubdomainSpec};
use crate::polyrep::{legendre_values, Calculus, LegendreSeries, PiecewisePoly};
use crate::quadnorm::{QuadratureRule, TensorGrid};
use crate::tensor::contract_axis;

/// Extra Gauss nodes per panel beyond the projection degree.
pub const EXTRA_NODES: usize = 8;

/// Normalized tensor Legendre function `prod_i sqrt(d_i + 1/2) P_{d_i}(s_i)`
/// on `[-1, 1]^N`.
pub fn legendre_eval(d: &MultiIndex, s: &[f64]) -> f64 {
    d.iter()
        .zip(s)
        .map(|(k, &x)| (k as f64 + 0.5).sqrt() * legendre_values(k, x)[k])
        .product()
}

/// `kappa_d^beta`: the degree cap restricted to the active axes of a face.
pub fn kappa(d: &MultiIndex, beta: &SubdomainSpec) -> MultiIndex {
    MultiIndex::new(
        d.iter()
            .enumerate()
            .map(|(i, k)| if beta.is_active(i) { k } else { 0 })
            .collect(),
    )
    .expect("non-empty")
}

/// Coefficients in the orthonormal Legendre basis of a face.
#[derive(Clone, Debug, PartialEq)]
pub struct LegendreCoeffs {
    domain: HyperRect,
    spec: SubdomainSpec,
    degree: MultiIndex,
    coeffs: Vec<f64>,
}

impl LegendreCoeffs {
    pub fn degree(&self) -> &MultiIndex {
        &self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `||P f||_{L_2(face)}` by Parseval.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// The projection as a series on the full box, constant along pinned axes.
    pub fn to_series(&self) -> LegendreSeries {
        let n = self.domain.dim();
        let norms: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..=self.degree[i])
                    .map(|k| {
                        if self.spec.is_active(i) {
                            ((2 * k + 1) as f64 / self.domain.width(i)).sqrt()
                        } else {
                            1.0
                        }
                    })
                    .collect()
            })
            .collect();
        let shape: Vec<usize> = self.degree.iter().map(|d| d + 1).collect();
        let a = shape_iter(&shape)
            .zip(&self.coeffs)
            .map(|(k, c)| c * k.iter().enumerate().map(|(i, &ki)| norms[i][ki]).product::<f64>())
            .collect();
        LegendreSeries::new(self.domain.clone(), self.degree.clone(), a).expect("consistent shape")
    }
}

/// Per-axis quadrature-weighted, normalized Legendre values as a row-major
/// `(degree + 1) x nodes` matrix.
fn weighted_basis(grid: &TensorGrid, axis: usize, deg: usize, lo: f64, width: f64, active: bool) -> Vec<f64> {
    let nodes = &grid.nodes[axis];
    let weights = &grid.weights[axis];
    let m = nodes.len();
    let mut mat = vec![0.0; (deg + 1) * m];
    for (j, (&s, &w)) in nodes.iter().zip(weights).enumerate() {
        if !active {
            mat[j] = w;
            continue;
        }
        let x = 2.0 * (s - lo) / width - 1.0;
        let p = legendre_values(deg, x);
        for k in 0..=deg {
            mat[k * m + j] = w * p[k] * ((2 * k + 1) as f64 / width).sqrt();
        }
    }
    mat
}

/// `c_alpha = int_face f phi^alpha` for all `alpha <= kappa_d^spec`.
pub fn project_legendre<F: Fn(&[f64]) -> f64 + Sync>(
    f: F,
    domain: &HyperRect,
    spec: &SubdomainSpec,
    d: &MultiIndex,
    rule: &QuadratureRule,
) -> Result<LegendreCoeffs> {
    let degree = kappa(d, spec);
    let top = degree.iter().max().unwrap_or(0);
    let grid = rule.clone().with_min_nodes(top + EXTRA_NODES).face_grid(domain, spec);
    let mut data = grid.eval(f)?;
    let mut shape = grid.shape();
    for axis in 0..domain.dim() {
        let deg = degree[axis];
        let mat = weighted_basis(
            &grid,
            axis,
            deg,
            domain.lo()[axis],
            domain.width(axis),
            spec.is_active(axis),
        );
        data = contract_axis(&data, &shape, axis, &mat, deg + 1);
        shape[axis] = deg + 1;
    }
    Ok(LegendreCoeffs {
        domain: domain.clone(),
        spec: spec.clone(),
        degree,
        coeffs: data,
    })
}

/// A uniform grid of cell averages on the active axes of a face.
#[derive(Clone, Debug, PartialEq)]
pub struct CellGrid {
    domain: HyperRect,
    counts: MultiIndex,
    values: Vec<f64>,
}

impl CellGrid {
    pub fn counts(&self) -> &MultiIndex {
        &self.counts
    }

    /// Cell averages, first axis fastest.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Volume of one cell in the full box.
    pub fn cell_volume(&self) -> f64 {
        (0..self.domain.dim())
            .map(|i| self.domain.width(i) / self.counts[i] as f64)
            .product()
    }

    pub fn breaks(&self, axis: usize) -> Vec<f64> {
        uniform_breaks(self.domain.lo()[axis], self.domain.hi()[axis], self.counts[axis])
    }

    pub fn to_piecewise(&self) -> PiecewisePoly {
        let breaks = (0..self.domain.dim()).map(|i| self.breaks(i)).collect();
        PiecewisePoly::step(self.domain.clone(), breaks, self.values.clone()).expect("consistent grid")
    }
}

fn uniform_breaks(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    (1..k).map(|j| lo + (hi - lo) * j as f64 / k as f64).collect()
}

/// `Q_K f`: cell averages over the uniform grid with `K_i` cells along each
/// active axis of the face.
pub fn project_step<F: Fn(&[f64]) -> f64 + Sync>(
    f: F,
    domain: &HyperRect,
    spec: &SubdomainSpec,
    k: &MultiIndex,
    rule: &QuadratureRule,
) -> Result<CellGrid> {
    let n = domain.dim();
    if k.iter().any(|c| c == 0) {
        return Err(Error::InvalidDomain("cell counts must be positive".into()));
    }
    let counts = MultiIndex::new(
        (0..n)
            .map(|i| if spec.is_active(i) { k[i] } else { 1 })
            .collect(),
    )?;
    let bounds = spec.face_bounds(domain);
    // One sub-rule per (axis, cell index).
    let axis_rules: Vec<Vec<(Vec<f64>, Vec<f64>)>> = (0..n)
        .map(|i| {
            let (lo, hi) = bounds[i];
            if lo == hi {
                return vec![(vec![lo], vec![1.0])];
            }
            let mut r = rule.clone();
            r.panels_per_axis = (rule.panels_per_axis / counts[i]).max(1);
            let edges: Vec<f64> = std::iter::once(lo)
                .chain(uniform_breaks(lo, hi, counts[i]))
                .chain(std::iter::once(hi))
                .collect();
            edges.windows(2).map(|w| r.axis_rule(i, w[0], w[1])).collect()
        })
        .collect();
    let cells: Vec<Vec<usize>> = shape_iter(counts.as_slice()).collect();
    let vol: f64 = (0..n)
        .filter(|&i| spec.is_active(i))
        .map(|i| domain.width(i) / counts[i] as f64)
        .product();
    let values = cells
        .par_iter()
        .map(|cell| {
            let grid = TensorGrid {
                nodes: (0..n).map(|i| axis_rules[i][cell[i]].0.clone()).collect(),
                weights: (0..n).map(|i| axis_rules[i][cell[i]].1.clone()).collect(),
            };
            Ok(grid.integrate(&f)? / vol)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(CellGrid {
        domain: domain.clone(),
        counts,
        values,
    })
}

/// An order-`gamma` Sobolev projection together with its projected traces,
/// which give exact access to derivatives up to order `gamma`.
#[derive(Clone, Debug)]
pub struct SobolevApprox<T> {
    traces: TraceBundle<T>,
    function: T,
}

impl<T: Calculus> SobolevApprox<T> {
    pub fn from_traces(traces: TraceBundle<T>) -> Result<Self> {
        let function = reconstruct(&traces)?;
        Ok(SobolevApprox { traces, function })
    }

    pub fn gamma(&self) -> &MultiIndex {
        self.traces.delta()
    }

    pub fn function(&self) -> &T {
        &self.function
    }

    pub fn traces(&self) -> &TraceBundle<T> {
        &self.traces
    }

    pub fn into_function(self) -> T {
        self.function
    }

    /// `D^beta` of the approximant. Orders within `gamma` go through the
    /// projected traces; any excess is differentiated cellwise.
    pub fn derivative(&self, beta: &MultiIndex) -> Result<T> {
        let inner = beta.meet(self.gamma());
        let rest = beta.checked_sub(&inner).expect("meet is dominated");
        let d = if inner.is_zero() {
            self.function.clone()
        } else {
            reconstruct(&derivative_bundle(&self.traces, &inner)?)?
        };
        Ok(d.mixed_derivative(&rest))
    }
}

fn check_gamma(u: &AnalyticFunction, gamma: &MultiIndex) -> Result<TraceBundle<TraceFunction>> {
    extract_traces_order(u, gamma)
}

/// `P_d^gamma u = sum_alpha G^gamma_alpha P_{kappa}[v^alpha]`, kept in
/// Legendre form; its degree is at most `d + gamma`.
pub fn sobolev_project_legendre(
    u: &AnalyticFunction,
    gamma: &MultiIndex,
    d: &MultiIndex,
    rule: &QuadratureRule,
) -> Result<SobolevApprox<LegendreSeries>> {
    let traces = check_gamma(u, gamma)?;
    let rule = rule.clone().for_function(u);
    let items: Vec<_> = traces.iter().collect();
    let projected = items
        .par_iter()
        .map(|(_, spec, t)| Ok(project_legendre(|s| t.eval(s), u.domain(), spec, d, &rule)?.to_series()))
        .collect::<Result<Vec<_>>>()?;
    SobolevApprox::from_traces(TraceBundle::new(gamma.clone(), projected)?)
}

/// `Q_K^gamma u = sum_alpha G^gamma_alpha Q_K[v^alpha]`; scalar traces pass
/// through unaveraged.
pub fn sobolev_project_step(
    u: &AnalyticFunction,
    gamma: &MultiIndex,
    k: &MultiIndex,
    rule: &QuadratureRule,
) -> Result<SobolevApprox<PiecewisePoly>> {
    let traces = check_gamma(u, gamma)?;
    let rule = rule.clone().for_function(u);
    let items: Vec<_> = traces.iter().collect();
    let projected = items
        .par_iter()
        .map(|(_, spec, t)| {
            if spec.num_active() == 0 {
                Ok(PiecewisePoly::constant(u.domain().clone(), t.eval(u.domain().lo())))
            } else {
                Ok(project_step(|s| t.eval(s), u.domain(), spec, k, &rule)?.to_piecewise())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    SobolevApprox::from_traces(TraceBundle::new(gamma.clone(), projected)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::extract_traces_poly;
    use crate::funcmodel::{example2, poly_random, x2y};
    use crate::polyrep::Poly1D;
    use approx::assert_relative_eq;

    fn mi(v: &[usize]) -> MultiIndex {
        MultiIndex::new(v.to_vec()).unwrap()
    }

    fn interior(n: usize) -> SubdomainSpec {
        SubdomainSpec::interior(n)
    }

    #[test]
    fn normalized_values() {
        assert_relative_eq!(legendre_values(2, 1.0)[2], 1.0);
        for x in [-0.9, 0.0, 0.4] {
            assert_relative_eq!(legendre_eval(&mi(&[0]), &[x]), 0.5f64.sqrt());
        }
    }

    #[test]
    fn kappa_examples() {
        let beta = SubdomainSpec::new(vec![-1, 0]).unwrap();
        assert_eq!(kappa(&mi(&[4, 7]), &beta), mi(&[0, 7]));
        assert_eq!(kappa(&mi(&[4, 7]), &interior(2)), mi(&[4, 7]));
        assert_eq!(kappa(&mi(&[4, 7]), &SubdomainSpec::lower_corner(2)), mi(&[0, 0]));
    }

    #[test]
    fn legendre_projection_examples() {
        let dom = HyperRect::symmetric(1);
        let rule = QuadratureRule::default();
        let p = project_legendre(|s| s[0] * s[0], &dom, &interior(1), &mi(&[2]), &rule).unwrap();
        let series = p.to_series();
        for x in [-0.7, 0.2, 1.0] {
            assert_relative_eq!(series.eval(&[x]).unwrap(), x * x, epsilon = 1e-14);
        }
        let rule0 = rule.clone().with_splits(0, &[0.0]);
        let a = project_legendre(|s| s[0].abs(), &dom, &interior(1), &mi(&[0]), &rule0).unwrap();
        assert_relative_eq!(a.to_series().eval(&[0.3]).unwrap(), 0.5, epsilon = 1e-14);
        let c = project_legendre(|_| 3.25, &dom, &SubdomainSpec::lower_corner(1), &mi(&[5]), &rule).unwrap();
        assert_eq!(c.coeffs(), &[3.25]);
        assert_relative_eq!(series.l2_norm(), p.l2_norm(), epsilon = 1e-14);
    }

    #[test]
    fn step_projection_examples() {
        let dom = HyperRect::symmetric(1);
        let rule = QuadratureRule::default();
        let g = project_step(|s| s[0], &dom, &interior(1), &mi(&[2]), &rule).unwrap();
        assert_relative_eq!(g.values()[0], -0.5, epsilon = 1e-15);
        assert_relative_eq!(g.values()[1], 0.5, epsilon = 1e-15);
        let w = example2();
        let t = extract_traces_order(&w, &mi(&[3, 3])).unwrap();
        let top = t.get(&mi(&[3, 3]));
        let g = project_step(|s| top.eval(s), w.domain(), top.spec(), &mi(&[4, 4]), &rule).unwrap();
        let expect_1d = [1.0, -1.0, -1.0, 1.0];
        for (j, b) in expect_1d.iter().enumerate() {
            for (i, a) in expect_1d.iter().enumerate() {
                assert_relative_eq!(g.values()[i + 4 * j], a * b, epsilon = 1e-14);
            }
        }
        let c = project_step(|_| 2.0, &dom, &interior(1), &mi(&[8]), &rule).unwrap();
        assert!(c.values().iter().all(|v| (v - 2.0).abs() < 1e-14));
    }

    #[test]
    fn polynomials_are_reproduced() {
        let dom = HyperRect::symmetric(2);
        let u = poly_random(&dom, &mi(&[2, 1]), 3);
        let rule = QuadratureRule::default();
        for gamma in [mi(&[0, 0]), mi(&[1, 1]), mi(&[2, 1])] {
            let p = sobolev_project_legendre(&u, &gamma, &mi(&[3, 2]), &rule).unwrap();
            let err = crate::quadnorm::l2_error_on_grid(
                |s| u.eval(s).unwrap(),
                p.function(),
                &rule.domain_grid(&dom),
            )
            .unwrap();
            assert!(err < 1e-13, "gamma={gamma}: {err}");
        }
    }

    #[test]
    fn degree_bookkeeping() {
        let u = poly_random(&HyperRect::symmetric(2), &mi(&[2, 1]), 4);
        let p = sobolev_project_legendre(&u, &mi(&[2, 1]), &mi(&[3, 3]), &QuadratureRule::default()).unwrap();
        assert!(p.function().degree().le(&mi(&[5, 4])));
    }

    #[test]
    fn exact_recovery_on_four_cells() {
        let w = example2();
        let rule = QuadratureRule::default();
        let q = sobolev_project_step(&w, &mi(&[3, 3]), &mi(&[4, 4]), &rule).unwrap();
        let grid = rule.clone().for_function(&w).for_calculus(q.function()).domain_grid(w.domain());
        let err = crate::quadnorm::l2_error_on_grid(|s| w.eval(s).unwrap(), q.function(), &grid).unwrap();
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn step_commutes_with_traces() {
        let u = x2y();
        let rule = QuadratureRule::default();
        let q = sobolev_project_step(&u, &mi(&[2, 1]), &mi(&[3, 5]), &rule).unwrap();
        let back = extract_traces_poly(q.function(), &mi(&[2, 1])).unwrap();
        assert!(back.max_rel_diff(q.traces()).unwrap() < 1e-10);
        let q0 = sobolev_project_step(&u, &mi(&[0, 0]), &mi(&[2, 2]), &rule).unwrap();
        assert_eq!(q0.function().degree(), &mi(&[0, 0]));
    }

    #[test]
    fn derivatives_through_traces() {
        let dom = HyperRect::symmetric(1);
        let u = crate::funcmodel::AnalyticFunction::from_calculus(
            "cubic",
            &PiecewisePoly::from_poly1d(dom, 0, &Poly1D::new(0.0, vec![0.5, 1.0, -2.0, 3.0])),
            mi(&[3]),
        )
        .unwrap();
        let p = sobolev_project_legendre(&u, &mi(&[2]), &mi(&[4]), &QuadratureRule::default()).unwrap();
        for k in 0..=3 {
            let via_traces = p.derivative(&mi(&[k])).unwrap();
            let direct = p.function().mixed_derivative(&mi(&[k]));
            assert!(via_traces.rel_coeff_diff(&direct).unwrap() < 1e-12, "k={k}");
        }
        assert!(sobolev_project_legendre(&u, &mi(&[4]), &mi(&[4]), &QuadratureRule::default()).is_err());
    }
}
