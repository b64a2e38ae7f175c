//! Target functions with exact derivative evaluators, their boundary traces,
//! and trace bundles.

mod registry;

pub use registry::{example1, example2, lookup, poly_random, x2y, EXAMPLE_NAMES};

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lattice::{face_spec, multiindex_range, HyperRect, MultiIndex, SubdomainSpec};
use crate::polyrep::Calculus;

/// A point evaluator `Omega -> R`.
pub type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// How smoothness degrades at a breakpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BreakKind {
    /// Some derivative jumps; all evaluators stay bounded.
    Jump,
    /// Some derivative is unbounded (but square integrable) near the point.
    Singular,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Breakpoint {
    pub at: f64,
    pub kind: BreakKind,
}

impl Breakpoint {
    pub fn jump(at: f64) -> Self {
        Breakpoint {
            at,
            kind: BreakKind::Jump,
        }
    }

    pub fn singular(at: f64) -> Self {
        Breakpoint {
            at,
            kind: BreakKind::Singular,
        }
    }
}

/// A function in `S_2^delta` with an exact evaluator for every `D^alpha`,
/// `alpha <= delta`.
#[derive(Clone)]
pub struct AnalyticFunction {
    name: String,
    domain: HyperRect,
    delta: MultiIndex,
    derivs: Vec<Evaluator>,
    breakpoints: Vec<Vec<Breakpoint>>,
}

impl fmt::Debug for AnalyticFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticFunction")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("delta", &self.delta)
            .field("breakpoints", &self.breakpoints)
            .finish()
    }
}

impl AnalyticFunction {
    /// `derivs` lists `D^alpha u` for every `alpha <= delta` in lattice order.
    pub fn new(
        name: impl Into<String>,
        domain: HyperRect,
        delta: MultiIndex,
        derivs: Vec<Evaluator>,
        breakpoints: Vec<Vec<Breakpoint>>,
    ) -> Result<Self> {
        let n = domain.dim();
        if delta.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: delta.dim(),
            });
        }
        if derivs.len() != delta.lattice_size() {
            return Err(Error::InvalidBundle(format!(
                "need {} derivative evaluators for delta = {delta}, got {}",
                delta.lattice_size(),
                derivs.len()
            )));
        }
        if breakpoints.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: breakpoints.len(),
            });
        }
        for (i, bs) in breakpoints.iter().enumerate() {
            for b in bs {
                if !(b.at > domain.lo()[i] && b.at < domain.hi()[i]) {
                    return Err(Error::InvalidDomain(format!(
                        "breakpoint {} is not strictly inside axis {i}",
                        b.at
                    )));
                }
            }
        }
        Ok(AnalyticFunction {
            name: name.into(),
            domain,
            delta,
            derivs,
            breakpoints,
        })
    }

    /// Wraps an exact polynomial; derivatives are taken exactly.
    pub fn from_calculus<T: Calculus + 'static>(
        name: impl Into<String>,
        p: &T,
        delta: MultiIndex,
    ) -> Result<Self> {
        let n = p.domain().dim();
        let derivs = multiindex_range(&delta)
            .iter()
            .map(|alpha| {
                let d = p.mixed_derivative(alpha);
                Arc::new(move |s: &[f64]| d.eval_unchecked(s)) as Evaluator
            })
            .collect();
        let breakpoints = (0..n)
            .map(|i| p.breaks(i).iter().map(|&b| Breakpoint::jump(b)).collect())
            .collect();
        AnalyticFunction::new(name, p.domain().clone(), delta, derivs, breakpoints)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &HyperRect {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn delta(&self) -> &MultiIndex {
        &self.delta
    }

    pub fn breakpoints(&self, axis: usize) -> &[Breakpoint] {
        &self.breakpoints[axis]
    }

    pub fn break_locations(&self, axis: usize) -> Vec<f64> {
        self.breakpoints[axis].iter().map(|b| b.at).collect()
    }

    pub fn singular_points(&self, axis: usize) -> Vec<f64> {
        self.breakpoints[axis]
            .iter()
            .filter(|b| b.kind == BreakKind::Singular)
            .map(|b| b.at)
            .collect()
    }

    pub fn eval(&self, s: &[f64]) -> Result<f64> {
        self.domain.ensure_contains(s)?;
        Ok((self.derivs[0])(s))
    }

    pub fn eval_derivative(&self, alpha: &MultiIndex, s: &[f64]) -> Result<f64> {
        alpha.ensure_le(&self.delta)?;
        self.domain.ensure_contains(s)?;
        Ok(self.deriv_unchecked(alpha, s))
    }

    /// `D^alpha u(s)` without precondition checks.
    pub fn deriv_unchecked(&self, alpha: &MultiIndex, s: &[f64]) -> f64 {
        (self.derivs[alpha.flat_index(&self.delta)])(s)
    }

    pub fn evaluator(&self, alpha: &MultiIndex) -> Result<Evaluator> {
        alpha
            .ensure_le(&self.delta)
            .map_err(|_| Error::DerivativeUnavailable(alpha.to_string()))?;
        Ok(self.derivs[alpha.flat_index(&self.delta)].clone())
    }
}

/// `v^alpha = B^{alpha - delta} D^alpha u`: the derivative restricted to a
/// lower face, extended constantly along the pinned axes.
#[derive(Clone, Debug)]
pub struct TraceFunction {
    spec: SubdomainSpec,
    alpha: MultiIndex,
    source: AnalyticFunction,
}

impl TraceFunction {
    pub fn spec(&self) -> &SubdomainSpec {
        &self.spec
    }

    pub fn alpha(&self) -> &MultiIndex {
        &self.alpha
    }

    pub fn domain(&self) -> &HyperRect {
        self.source.domain()
    }

    pub fn source(&self) -> &AnalyticFunction {
        &self.source
    }

    pub fn active_dims(&self) -> Vec<usize> {
        self.spec.active_axes()
    }

    /// Value at a full-dimensional point; inactive coordinates are ignored.
    pub fn eval(&self, s: &[f64]) -> f64 {
        let p = self.spec.pin(self.source.domain(), s);
        self.source.deriv_unchecked(&self.alpha, &p)
    }

    /// Value from the active coordinates alone, in axis order.
    pub fn eval_active(&self, coords: &[f64]) -> Result<f64> {
        let active = self.active_dims();
        if coords.len() != active.len() {
            return Err(Error::DimensionMismatch {
                expected: active.len(),
                found: coords.len(),
            });
        }
        let mut s: Vec<f64> = self.source.domain().lo().to_vec();
        for (&i, &c) in active.iter().zip(coords) {
            s[i] = c;
        }
        self.source.domain().ensure_contains(&s)?;
        Ok(self.eval(&s))
    }

    /// The scalar value when no axis is active.
    pub fn as_scalar(&self) -> Option<f64> {
        if self.spec.num_active() == 0 {
            Some(self.eval(self.source.domain().lo()))
        } else {
            None
        }
    }
}

/// An element of the trace space: one entry per `alpha <= delta`, stored in
/// lattice order.
#[derive(Clone, Debug)]
pub struct TraceBundle<T> {
    delta: MultiIndex,
    entries: Vec<T>,
}

impl<T> TraceBundle<T> {
    pub fn new(delta: MultiIndex, entries: Vec<T>) -> Result<Self> {
        if entries.len() != delta.lattice_size() {
            return Err(Error::InvalidBundle(format!(
                "expected {} entries for delta = {delta}, got {}",
                delta.lattice_size(),
                entries.len()
            )));
        }
        Ok(TraceBundle { delta, entries })
    }

    pub fn delta(&self) -> &MultiIndex {
        &self.delta
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<T> {
        self.entries
    }

    pub fn get(&self, alpha: &MultiIndex) -> &T {
        &self.entries[alpha.flat_index(&self.delta)]
    }

    /// `(alpha, face, entry)` in lattice order.
    pub fn iter(&self) -> impl Iterator<Item = (MultiIndex, SubdomainSpec, &T)> + '_ {
        multiindex_range(&self.delta)
            .into_iter()
            .zip(&self.entries)
            .map(move |(a, e)| {
                let spec = face_spec(&a, &self.delta).expect("alpha <= delta");
                (a, spec, e)
            })
    }

    pub fn map<U>(&self, mut f: impl FnMut(&MultiIndex, &SubdomainSpec, &T) -> Result<U>) -> Result<TraceBundle<U>> {
        let entries = self
            .iter()
            .map(|(a, s, e)| f(&a, &s, e))
            .collect::<Result<Vec<U>>>()?;
        Ok(TraceBundle {
            delta: self.delta.clone(),
            entries,
        })
    }
}

impl<T: Calculus> TraceBundle<T> {
    /// Entrywise `self + a * other`.
    pub fn axpy(&self, a: f64, other: &TraceBundle<T>) -> Result<Self> {
        if self.delta != other.delta {
            return Err(Error::InvalidBundle(format!(
                "orders differ: {} vs {}",
                self.delta, other.delta
            )));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(x, y)| x.axpy(a, y))
            .collect::<Result<Vec<T>>>()?;
        Ok(TraceBundle {
            delta: self.delta.clone(),
            entries,
        })
    }

    /// Largest coefficient difference over all entries, relative to the
    /// largest coefficient in either bundle.
    pub fn max_rel_diff(&self, other: &TraceBundle<T>) -> Result<f64> {
        let mut diff = 0.0f64;
        let mut scale = 0.0f64;
        for (x, y) in self.entries.iter().zip(&other.entries) {
            let s = x.max_abs_coeff().max(y.max_abs_coeff());
            diff = diff.max(x.rel_coeff_diff(y)? * s);
            scale = scale.max(s);
        }
        Ok(if scale > 0.0 { diff / scale } else { diff })
    }
}

/// Traces `v^alpha = B^{alpha - gamma} D^alpha u` for all `alpha <= gamma`.
pub fn extract_traces_order(u: &AnalyticFunction, gamma: &MultiIndex) -> Result<TraceBundle<TraceFunction>> {
    gamma
        .ensure_le(u.delta())
        .map_err(|_| Error::DerivativeUnavailable(format!("{gamma} (smoothness is {})", u.delta())))?;
    let entries = multiindex_range(gamma)
        .into_iter()
        .map(|alpha| {
            Ok(TraceFunction {
                spec: face_spec(&alpha, gamma)?,
                alpha,
                source: u.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    TraceBundle::new(gamma.clone(), entries)
}

/// The full trace bundle of `u` at its own smoothness order.
pub fn extract_traces(u: &AnalyticFunction) -> TraceBundle<TraceFunction> {
    extract_traces_order(u, u.delta()).expect("delta <= delta")
}
