//! Composite Gauss–Legendre quadrature on boxes and faces, and the `L_2`,
//! mixed Sobolev and trace-space norms built on it.

mod gauss;

pub use gauss::gauss_legendre;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::funcmodel::{extract_traces_order, AnalyticFunction, TraceBundle, TraceFunction};
use crate::lattice::{multiindex_range, strides, HyperRect, MultiIndex, SubdomainSpec};
use crate::polyrep::Calculus;
use crate::tensor::pairwise_sum;

/// Composite tensor Gauss rule: uniform panels per axis, refined by
/// mandatory splits and geometric grading toward singular points.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub nodes_per_panel: usize,
    pub panels_per_axis: usize,
    /// Ratio of successive graded panels toward a singular point.
    pub grade: Option<f64>,
    /// Number of graded panels on each side of a singular point.
    pub levels: usize,
    splits: Vec<Vec<f64>>,
    singular: Vec<Vec<f64>>,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        QuadratureRule {
            nodes_per_panel: 16,
            panels_per_axis: 32,
            grade: Some(0.25),
            levels: 40,
            splits: Vec::new(),
            singular: Vec::new(),
        }
    }
}

impl QuadratureRule {
    pub fn new(nodes_per_panel: usize, panels_per_axis: usize, grade: Option<f64>) -> Result<Self> {
        if nodes_per_panel < 2 {
            return Err(Error::InvalidRule("need at least 2 nodes per panel".into()));
        }
        if panels_per_axis < 1 {
            return Err(Error::InvalidRule("need at least 1 panel per axis".into()));
        }
        if let Some(g) = grade {
            if !(g > 0.0 && g < 1.0) {
                return Err(Error::InvalidRule(format!("grading factor {g} is not in (0, 1)")));
            }
        }
        Ok(QuadratureRule {
            nodes_per_panel,
            panels_per_axis,
            grade,
            ..Default::default()
        })
    }

    pub fn splits(&self, axis: usize) -> &[f64] {
        self.splits.get(axis).map_or(&[], |v| v.as_slice())
    }

    pub fn singular_points(&self, axis: usize) -> &[f64] {
        self.singular.get(axis).map_or(&[], |v| v.as_slice())
    }

    /// Adds mandatory panel boundaries along `axis`.
    pub fn with_splits(mut self, axis: usize, points: &[f64]) -> Self {
        if self.splits.len() <= axis {
            self.splits.resize(axis + 1, Vec::new());
        }
        self.splits[axis].extend_from_slice(points);
        self
    }

    /// Adds points toward which panels are graded; they also become splits.
    pub fn with_singular(mut self, axis: usize, points: &[f64]) -> Self {
        if self.singular.len() <= axis {
            self.singular.resize(axis + 1, Vec::new());
        }
        self.singular[axis].extend_from_slice(points);
        self.with_splits(axis, points)
    }

    /// Adds the breakpoints of `u` as splits, grading toward singular ones.
    pub fn for_function(mut self, u: &AnalyticFunction) -> Self {
        for axis in 0..u.dim() {
            self = self
                .with_splits(axis, &u.break_locations(axis))
                .with_singular(axis, &u.singular_points(axis));
        }
        self
    }

    /// Adds the cell breaks of an exact approximant as splits.
    pub fn for_calculus<T: Calculus>(mut self, p: &T) -> Self {
        for axis in 0..p.domain().dim() {
            self = self.with_splits(axis, p.breaks(axis));
        }
        self
    }

    /// Raises the node count per panel to at least `n`.
    pub fn with_min_nodes(mut self, n: usize) -> Self {
        self.nodes_per_panel = self.nodes_per_panel.max(n);
        self
    }

    /// Panel boundaries on `[lo, hi]` along `axis`.
    pub fn panel_edges(&self, axis: usize, lo: f64, hi: f64) -> Vec<f64> {
        let p = self.panels_per_axis;
        let mut edges: Vec<f64> = (0..=p)
            .map(|j| if j == p { hi } else { lo + (hi - lo) * j as f64 / p as f64 })
            .collect();
        edges.extend(self.splits(axis).iter().filter(|&&x| x > lo && x < hi));
        sort_dedup(&mut edges);
        if let Some(r) = self.grade {
            let mut graded = Vec::new();
            for &s in self.singular_points(axis) {
                if s < lo || s > hi {
                    continue;
                }
                let idx = edges.partition_point(|&e| e < s);
                if s > lo {
                    let left = edges[idx - 1];
                    let mut h = s - left;
                    for _ in 0..self.levels {
                        h *= r;
                        graded.push(s - h);
                    }
                }
                if s < hi {
                    let right = if edges[idx] == s { edges[idx + 1] } else { edges[idx] };
                    let mut h = right - s;
                    for _ in 0..self.levels {
                        h *= r;
                        graded.push(s + h);
                    }
                }
            }
            edges.extend(graded.into_iter().filter(|&x| x > lo && x < hi));
            sort_dedup(&mut edges);
        }
        edges
    }

    /// Nodes and weights on `[lo, hi]` along `axis`; a degenerate interval
    /// yields the single node `lo` with weight 1.
    pub fn axis_rule(&self, axis: usize, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
        if lo == hi {
            return (vec![lo], vec![1.0]);
        }
        let edges = self.panel_edges(axis, lo, hi);
        let g = gauss_legendre(self.nodes_per_panel);
        let mut nodes = Vec::with_capacity((edges.len() - 1) * g.0.len());
        let mut weights = Vec::with_capacity(nodes.capacity());
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (x, wt) in g.0.iter().zip(&g.1) {
                nodes.push(mid + half * x);
                weights.push(half * wt);
            }
        }
        (nodes, weights)
    }

    /// Tensor grid over a box given as per-axis bounds.
    pub fn grid(&self, bounds: &[(f64, f64)]) -> TensorGrid {
        let (nodes, weights) = bounds
            .iter()
            .enumerate()
            .map(|(i, &(lo, hi))| self.axis_rule(i, lo, hi))
            .unzip();
        TensorGrid { nodes, weights }
    }

    pub fn domain_grid(&self, domain: &HyperRect) -> TensorGrid {
        let bounds: Vec<(f64, f64)> = (0..domain.dim())
            .map(|i| (domain.lo()[i], domain.hi()[i]))
            .collect();
        self.grid(&bounds)
    }

    /// Grid on the lower face selected by `spec`; pinned axes carry one node.
    pub fn face_grid(&self, domain: &HyperRect, spec: &SubdomainSpec) -> TensorGrid {
        self.grid(&spec.face_bounds(domain))
    }
}

fn sort_dedup(v: &mut Vec<f64>) {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup();
}

/// A tensor product of one-dimensional rules, first axis fastest.
#[derive(Clone, Debug)]
pub struct TensorGrid {
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<Vec<f64>>,
}

impl TensorGrid {
    pub fn shape(&self) -> Vec<usize> {
        self.nodes.iter().map(|n| n.len()).collect()
    }

    pub fn len(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        let shape = self.shape();
        let st = strides(&shape);
        (0..shape.len())
            .map(|i| self.nodes[i][(flat / st[i]) % shape[i]])
            .collect()
    }

    /// Evaluates `f` at every node in parallel; non-finite values are errors.
    pub fn eval<F: Fn(&[f64]) -> f64 + Sync>(&self, f: F) -> Result<Vec<f64>> {
        let shape = self.shape();
        let st = strides(&shape);
        let values: Vec<f64> = (0..self.len())
            .into_par_iter()
            .map_init(
                || vec![0.0; shape.len()],
                |buf, flat| {
                    for (i, x) in buf.iter_mut().enumerate() {
                        *x = self.nodes[i][(flat / st[i]) % shape[i]];
                    }
                    f(buf)
                },
            )
            .collect();
        self.check_finite(&values)?;
        Ok(values)
    }

    fn check_finite(&self, values: &[f64]) -> Result<()> {
        match values.iter().position(|v| !v.is_finite()) {
            Some(flat) => Err(Error::NonFinite {
                point: self.point(flat),
                value: values[flat],
            }),
            None => Ok(()),
        }
    }

    /// Quadrature sum of nodal values, in a fixed summation order.
    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        let shape = self.shape();
        let n = shape.len();
        // Contract the slowest axis with the weights in slabs, then recurse.
        let mut data: Vec<f64> = values.to_vec();
        let mut len = data.len();
        for axis in (1..n).rev() {
            let block = len / shape[axis];
            let w = &self.weights[axis];
            let next: Vec<f64> = (0..block)
                .into_par_iter()
                .map(|j| {
                    let terms: Vec<f64> = (0..shape[axis]).map(|k| w[k] * data[k * block + j]).collect();
                    pairwise_sum(&terms)
                })
                .collect();
            data = next;
            len = block;
        }
        let terms: Vec<f64> = data.iter().zip(&self.weights[0]).map(|(v, w)| v * w).collect();
        pairwise_sum(&terms)
    }

    pub fn integrate<F: Fn(&[f64]) -> f64 + Sync>(&self, f: F) -> Result<f64> {
        Ok(self.integrate_values(&self.eval(f)?))
    }
}

/// Tensor composite Gauss approximation of `int_domain f`.
pub fn integrate<F: Fn(&[f64]) -> f64 + Sync>(f: F, domain: &HyperRect, rule: &QuadratureRule) -> Result<f64> {
    rule.domain_grid(domain).integrate(f)
}

pub fn l2_norm<F: Fn(&[f64]) -> f64 + Sync>(f: F, domain: &HyperRect, rule: &QuadratureRule) -> Result<f64> {
    Ok(integrate(|s| f(s).powi(2), domain, rule)?.sqrt())
}

pub fn l2_error<F, G>(f: F, g: G, domain: &HyperRect, rule: &QuadratureRule) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
    G: Fn(&[f64]) -> f64 + Sync,
{
    Ok(integrate(|s| (f(s) - g(s)).powi(2), domain, rule)?.sqrt())
}

/// `||f - p||_{L_2}` on a grid, with `p` evaluated by sum factorization.
pub fn l2_error_on_grid<F, T>(f: F, p: &T, grid: &TensorGrid) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
    T: Calculus,
{
    let fv = grid.eval(f)?;
    let pv = p.eval_grid(&grid.nodes);
    grid.check_finite(&pv)?;
    let sq: Vec<f64> = fv.iter().zip(&pv).map(|(a, b)| (a - b).powi(2)).collect();
    Ok(grid.integrate_values(&sq).sqrt())
}

/// Which derivative orders a Sobolev norm sums over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    /// All `alpha <= gamma` (mixed dominating smoothness).
    Box,
    /// All `|alpha|_1 <= min_i gamma_i` (classical isotropic order).
    Simplex,
}

/// Derivative orders summed by the norm of the given kind.
pub fn norm_orders(gamma: &MultiIndex, kind: NormKind) -> Vec<MultiIndex> {
    match kind {
        NormKind::Box => multiindex_range(gamma),
        NormKind::Simplex => {
            let k = gamma.iter().min().unwrap_or(0);
            multiindex_range(&MultiIndex::splat(gamma.dim(), k))
                .into_iter()
                .filter(|a| a.norm1() <= k)
                .collect()
        }
    }
}

/// Sobolev norm of an analytic function.
pub fn sobolev_norm(
    u: &AnalyticFunction,
    gamma: &MultiIndex,
    kind: NormKind,
    rule: &QuadratureRule,
) -> Result<f64> {
    gamma
        .ensure_le(u.delta())
        .map_err(|_| Error::DerivativeUnavailable(gamma.to_string()))?;
    let grid = rule.clone().for_function(u).domain_grid(u.domain());
    let mut total = 0.0;
    for alpha in norm_orders(gamma, kind) {
        let v = grid.eval(|s| u.deriv_unchecked(&alpha, s).powi(2))?;
        total += grid.integrate_values(&v);
    }
    Ok(total.sqrt())
}

/// Sobolev norm of an exact polynomial representation (cellwise derivatives).
pub fn sobolev_norm_poly<T: Calculus>(
    p: &T,
    gamma: &MultiIndex,
    kind: NormKind,
    rule: &QuadratureRule,
) -> Result<f64> {
    let top = p.degree().iter().max().unwrap_or(0);
    let grid = rule
        .clone()
        .for_calculus(p)
        .with_min_nodes(top + 1)
        .domain_grid(p.domain());
    let mut total = 0.0;
    for alpha in norm_orders(gamma, kind) {
        let v = p.mixed_derivative(&alpha).eval_grid(&grid.nodes);
        let sq: Vec<f64> = v.iter().map(|x| x * x).collect();
        total += grid.integrate_values(&sq);
    }
    Ok(total.sqrt())
}

/// Squared `L_2` norm of one analytic trace over its face.
pub fn trace_norm_sq(t: &TraceFunction, rule: &QuadratureRule) -> Result<f64> {
    let grid = rule.clone().for_function(t.source()).face_grid(t.domain(), t.spec());
    let v = grid.eval(|s| t.eval(s).powi(2))?;
    Ok(grid.integrate_values(&v))
}

/// Squared `L_2` norm of one exact trace over its face.
pub fn poly_trace_norm_sq<T: Calculus>(p: &T, spec: &SubdomainSpec, rule: &QuadratureRule) -> f64 {
    let top = p.degree().iter().max().unwrap_or(0);
    let grid = rule
        .clone()
        .for_calculus(p)
        .with_min_nodes(top + 1)
        .face_grid(p.domain(), spec);
    let v: Vec<f64> = p.eval_grid(&grid.nodes).iter().map(|x| x * x).collect();
    grid.integrate_values(&v)
}

/// Trace-space norm of an analytic bundle.
pub fn dc_norm_traces(bundle: &TraceBundle<TraceFunction>, rule: &QuadratureRule) -> Result<f64> {
    let mut total = 0.0;
    for t in bundle.entries() {
        total += trace_norm_sq(t, rule)?;
    }
    Ok(total.sqrt())
}

/// Trace-space norm of an exact bundle.
pub fn dc_norm_poly<T: Calculus>(bundle: &TraceBundle<T>, rule: &QuadratureRule) -> f64 {
    bundle
        .iter()
        .map(|(_, spec, p)| poly_trace_norm_sq(p, &spec, rule))
        .sum::<f64>()
        .sqrt()
}

/// `||u||_{L_2^gamma}`: root sum of squares of all order-`gamma` trace norms.
pub fn dc_norm(u: &AnalyticFunction, gamma: &MultiIndex, rule: &QuadratureRule) -> Result<f64> {
    dc_norm_traces(&extract_traces_order(u, gamma)?, rule)
}

/// Trace-space distance between an analytic bundle and an exact one.
pub fn dc_distance<T: Calculus>(
    exact: &TraceBundle<TraceFunction>,
    approx: &TraceBundle<T>,
    rule: &QuadratureRule,
) -> Result<f64> {
    if exact.delta() != approx.delta() {
        return Err(Error::InvalidBundle("bundle orders differ".into()));
    }
    let mut total = 0.0;
    for (t, p) in exact.entries().iter().zip(approx.entries()) {
        let top = p.degree().iter().max().unwrap_or(0);
        let grid = rule
            .clone()
            .for_function(t.source())
            .for_calculus(p)
            .with_min_nodes(top + 1)
            .face_grid(t.domain(), t.spec());
        total += l2_error_on_grid(|s| t.eval(s), p, &grid)?.powi(2);
    }
    Ok(total.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcmodel::{example1, x2y};
    use crate::polyrep::{legendre_values, PiecewisePoly, Poly1D};
    use approx::assert_relative_eq;

    fn mi(v: &[usize]) -> MultiIndex {
        MultiIndex::new(v.to_vec()).unwrap()
    }

    #[test]
    fn two_point_exactness() {
        let rule = QuadratureRule::new(2, 1, None).unwrap();
        let v = integrate(|s| s[0] * s[0], &HyperRect::symmetric(1), &rule).unwrap();
        assert_relative_eq!(v, 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn legendre_orthogonality() {
        let rule = QuadratureRule::new(10, 1, None).unwrap();
        let dom = HyperRect::symmetric(1);
        for m in 0..=8 {
            for n in 0..=8 {
                let v = integrate(|s| {
                    let p = legendre_values(8, s[0]);
                    p[m] * p[n]
                }, &dom, &rule)
                .unwrap();
                let expect = if m == n { 1.0 / (m as f64 + 0.5) } else { 0.0 };
                assert!((v - expect).abs() < 1e-14, "m={m} n={n}: {v}");
            }
        }
    }

    #[test]
    fn singular_oracle() {
        let u = example1();
        let rule = QuadratureRule::default().for_function(&u);
        let five = mi(&[5]);
        let v = integrate(|s| u.deriv_unchecked(&five, s).powi(2), u.domain(), &rule).unwrap();
        assert!((v - 1.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn non_finite_is_reported() {
        let rule = QuadratureRule::default().with_splits(0, &[0.0]);
        let e = integrate(|s| if s[0] > 0.5 { f64::NAN } else { 1.0 }, &HyperRect::symmetric(1), &rule);
        match e {
            Err(Error::NonFinite { point, .. }) => assert!(point[0] > 0.5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rule_validation() {
        assert!(QuadratureRule::new(1, 4, None).is_err());
        assert!(QuadratureRule::new(4, 0, None).is_err());
        assert!(QuadratureRule::new(4, 4, Some(1.5)).is_err());
        let r = QuadratureRule::default().with_singular(0, &[0.0]);
        let e = r.panel_edges(0, -1.0, 1.0);
        assert_eq!(e.len(), 33 + 80);
        assert!(e.contains(&0.0));
    }

    #[test]
    fn norms() {
        let dom = HyperRect::symmetric(1);
        let rule = QuadratureRule::default();
        assert_relative_eq!(l2_norm(|s| s[0], &dom, &rule).unwrap(), (2.0f64 / 3.0).sqrt(), epsilon = 1e-14);
        assert_eq!(l2_norm(|_| 0.0, &dom, &rule).unwrap(), 0.0);
        let x = PiecewisePoly::from_poly1d(dom.clone(), 0, &Poly1D::new(0.0, vec![0.0, 1.0]));
        let s1 = sobolev_norm_poly(&x, &mi(&[1]), NormKind::Box, &rule).unwrap();
        assert_relative_eq!(s1 * s1, 8.0 / 3.0, epsilon = 1e-13);
        assert_eq!(norm_orders(&mi(&[3, 3]), NormKind::Box).len(), 16);
        assert_eq!(norm_orders(&mi(&[3, 3]), NormKind::Simplex).len(), 10);
        let u = x2y();
        assert_relative_eq!(dc_norm(&u, &mi(&[2, 1]), &rule).unwrap(), 2.0, epsilon = 1e-13);
        assert_relative_eq!(
            dc_norm(&u, &mi(&[0, 0]), &rule).unwrap(),
            sobolev_norm(&u, &mi(&[0, 0]), NormKind::Box, &rule).unwrap(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn quadrature_matches_exact_integral() {
        let p = PiecewisePoly::new(
            HyperRect::symmetric(2),
            vec![vec![-0.3, 0.4], vec![0.1]],
            mi(&[2, 3]),
            (0..72).map(|k| ((k * 37 % 11) as f64 - 5.0) / 7.0).collect(),
        )
        .unwrap();
        let rule = QuadratureRule::default().for_calculus(&p);
        let grid = rule.domain_grid(p.domain());
        let q = grid.integrate_values(&p.eval_grid(&grid.nodes));
        assert_relative_eq!(q, p.integral(), max_relative = 1e-12);
    }
}
