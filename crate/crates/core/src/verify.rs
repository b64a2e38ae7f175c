//! Seeded property suites: reconstruction roundtrips, integration identities
//! and projection optimality.
//!
//! Every property runs a number of independent trials. A trial yields one
//! number (a relative error, a ratio or an improvement margin) and fails when
//! that number exceeds the property's tolerance or when the trial errors.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expansion::{derivative_bundle, extract_traces_poly, fund_int_check, reconstruct};
use crate::funcmodel::{example1, example2, extract_traces_order, AnalyticFunction, TraceBundle};
use crate::lattice::{face_spec, multiindex_range, HyperRect, MultiIndex, SubdomainSpec};
use crate::polyrep::{Calculus, LegendreSeries, PiecewisePoly};
use crate::projection::{project_legendre, project_step, sobolev_project_legendre, sobolev_project_step, EXTRA_NODES};
use crate::quadnorm::{QuadratureRule, TensorGrid};

/// Coefficientwise tolerance for exact polynomial identities.
pub const EXACT_TOL: f64 = 1e-10;
/// Allowed improvement of a perturbed projection.
pub const OPTIMALITY_SLACK: f64 = 1e-12;
/// Perturbation sizes tried for every random direction.
pub const EPSILONS: [f64; 4] = [1e-3, -1e-3, 1e-1, -1e-1];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Roundtrip,
    Identities,
    Optimality,
    All,
}

impl Suite {
    /// Trials per property when none are requested.
    pub fn default_trials(&self) -> usize {
        match self {
            Suite::Optimality => 50,
            _ => 100,
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "roundtrip" => Ok(Suite::Roundtrip),
            "identities" => Ok(Suite::Identities),
            "optimality" => Ok(Suite::Optimality),
            "all" => Ok(Suite::All),
            _ => Err(Error::Parse {
                line: 0,
                msg: format!("unknown suite '{s}' (expected roundtrip, identities, optimality or all)"),
            }),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Roundtrip => "roundtrip",
            Suite::Identities => "identities",
            Suite::Optimality => "optimality",
            Suite::All => "all",
        })
    }
}

/// Outcome of one property over all of its trials.
#[derive(Clone, Debug, PartialEq)]
pub struct Property {
    pub suite: Suite,
    pub name: String,
    pub trials: usize,
    pub failures: usize,
    /// Largest trial value; infinite when a trial errored.
    pub worst: f64,
    pub tol: f64,
    /// First error message raised by a trial, if any.
    pub error: Option<String>,
}

impl Property {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.trials > 0
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}/{} trials={} failures={} worst={:e} tol={:e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.suite,
            self.name,
            self.trials,
            self.failures,
            self.worst,
            self.tol
        )?;
        if let Some(e) = &self.error {
            write!(f, " error=\"{e}\"")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub seed: u64,
    pub properties: Vec<Property>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(Property::passed)
    }

    pub fn get(&self, name: &str) -> Option<&Property> {
        self.properties.iter().find(|p| p.name == name)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.properties {
            writeln!(f, "{p}")?;
        }
        let passed = self.properties.iter().filter(|p| p.passed()).count();
        write!(f, "{passed}/{} properties passed (seed {})", self.properties.len(), self.seed)
    }
}

/// Runs a suite. `trials` overrides the per-suite default.
pub fn run(suite: Suite, seed: u64, trials: Option<usize>) -> Result<VerifyReport> {
    let mut properties = Vec::new();
    let count = |s: Suite| trials.unwrap_or(s.default_trials());
    if matches!(suite, Suite::Roundtrip | Suite::All) {
        properties.extend(roundtrip(seed, count(Suite::Roundtrip)));
    }
    if matches!(suite, Suite::Identities | Suite::All) {
        properties.extend(identities(seed, count(Suite::Identities)));
    }
    if matches!(suite, Suite::Optimality | Suite::All) {
        properties.extend(optimality(seed, count(Suite::Optimality))?);
    }
    Ok(VerifyReport { seed, properties })
}

/// Runs `trials` independent trials in parallel. Trial `t` draws from the
/// ChaCha stream `(stream << 32) + t` of `seed`.
fn property<F>(suite: Suite, name: String, tol: f64, seed: u64, stream: u64, trials: usize, trial: F) -> Property
where
    F: Fn(&mut ChaCha8Rng, usize) -> Result<f64> + Sync,
{
    let outcomes: Vec<Result<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream((stream << 32) + t as u64);
            trial(&mut rng, t)
        })
        .collect();
    let mut worst = f64::NEG_INFINITY;
    let mut failures = 0;
    let mut error = None;
    for o in outcomes {
        match o {
            Ok(v) if v <= tol => worst = worst.max(v),
            Ok(v) => {
                failures += 1;
                worst = if v.is_nan() { f64::INFINITY } else { worst.max(v) };
            }
            Err(e) => {
                failures += 1;
                worst = f64::INFINITY;
                error.get_or_insert_with(|| e.to_string());
            }
        }
    }
    Property {
        suite,
        name,
        trials,
        failures,
        worst,
        tol,
        error,
    }
}

fn random_domain(rng: &mut ChaCha8Rng, n: usize) -> HyperRect {
    let lo: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..1.0)).collect();
    let hi = lo.iter().map(|l| l + rng.gen_range(0.5..2.5)).collect();
    HyperRect::new(lo, hi).expect("positive widths")
}

fn random_breaks(rng: &mut ChaCha8Rng, lo: f64, hi: f64, max: usize) -> Vec<f64> {
    let w = hi - lo;
    let mut b: Vec<f64> = (0..rng.gen_range(0..=max))
        .map(|_| rng.gen_range(lo + 0.05 * w..hi - 0.05 * w))
        .collect();
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.dedup();
    b
}

fn random_pw(rng: &mut ChaCha8Rng, domain: &HyperRect, degree: MultiIndex, breaks: Vec<Vec<f64>>) -> PiecewisePoly {
    let cells: usize = breaks.iter().map(|b| b.len() + 1).product();
    let coeffs = (0..degree.lattice_size() * cells)
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    PiecewisePoly::new(domain.clone(), breaks, degree, coeffs).expect("consistent sizes")
}

/// A piecewise polynomial that varies only along `axes`, breaking at a
/// random subset of `pool[i]` on each of them.
fn random_on_axes(
    rng: &mut ChaCha8Rng,
    domain: &HyperRect,
    axes: &[bool],
    max_degree: usize,
    pool: &[Vec<f64>],
) -> PiecewisePoly {
    let n = domain.dim();
    let degree = MultiIndex::new(
        (0..n)
            .map(|i| if axes[i] { rng.gen_range(0..=max_degree) } else { 0 })
            .collect(),
    )
    .expect("non-empty");
    let breaks = (0..n)
        .map(|i| {
            if axes[i] {
                pool[i].iter().copied().filter(|_| rng.gen_bool(0.5)).collect()
            } else {
                Vec::new()
            }
        })
        .collect();
    random_pw(rng, domain, degree, breaks)
}

/// Up to `max` candidate breaks per axis.
fn break_pool(rng: &mut ChaCha8Rng, domain: &HyperRect, max: usize) -> Vec<Vec<f64>> {
    (0..domain.dim())
        .map(|i| random_breaks(rng, domain.lo()[i], domain.hi()[i], max))
        .collect()
}

/// Random bundle of order `delta`: each entry varies only along the active
/// axes of its face and may jump there. All entries break within one small
/// pool so the reconstruction keeps few cells.
fn random_bundle(rng: &mut ChaCha8Rng, domain: &HyperRect, delta: &MultiIndex) -> TraceBundle<PiecewisePoly> {
    let pool = break_pool(rng, domain, 2);
    let entries = multiindex_range(delta)
        .iter()
        .map(|alpha| {
            let spec = face_spec(alpha, delta).expect("alpha <= delta");
            let active: Vec<bool> = (0..delta.dim()).map(|i| spec.is_active(i)).collect();
            random_on_axes(rng, domain, &active, 2, &pool)
        })
        .collect();
    TraceBundle::new(delta.clone(), entries).expect("full lattice")
}

/// All orders with entries in `0..=max` in `n` dimensions.
fn orders(n: usize, max: usize) -> Vec<MultiIndex> {
    multiindex_range(&MultiIndex::splat(n, max))
}

fn p_kernel_l2(k: usize, w: f64) -> f64 {
    let fact: f64 = (1..=k).map(|j| j as f64).product();
    w.powf(k as f64 + 0.5) / (fact * ((2 * k + 1) as f64).sqrt())
}

/// Constant `C` with `||G^delta v||_{S_2^delta} <= C ||v||_{L_2^delta}`,
/// from Young's inequality on each Volterra factor and Cauchy-Schwarz over
/// the summands.
pub fn reconstruction_bound(domain: &HyperRect, delta: &MultiIndex) -> f64 {
    let mut total = 0.0;
    for beta in multiindex_range(delta) {
        for alpha in multiindex_range(delta) {
            if !beta.le(&alpha) {
                continue;
            }
            let c: f64 = (0..delta.dim())
                .map(|i| {
                    let (a, g, w) = (alpha[i] - beta[i], delta[i] - beta[i], domain.width(i));
                    if a < g {
                        p_kernel_l2(a, w)
                    } else if a > 0 {
                        let fact: f64 = (1..=a).map(|j| j as f64).product();
                        w.powi(a as i32) / fact
                    } else {
                        1.0
                    }
                })
                .product();
            total += c * c;
        }
    }
    total.sqrt()
}

/// Exact `||b||_{L_2^delta}` of a bundle whose entries are constant along
/// their pinned axes.
fn bundle_norm(b: &TraceBundle<PiecewisePoly>) -> f64 {
    b.iter()
        .map(|(_, spec, v)| {
            let pinned: f64 = (0..spec.dim())
                .filter(|&i| !spec.is_active(i))
                .map(|i| v.domain().width(i))
                .product();
            v.l2_norm().powi(2) / pinned
        })
        .sum::<f64>()
        .sqrt()
}

/// Exact `||u||_{S_2^delta}` summed over the box `alpha <= delta`.
fn box_norm(u: &PiecewisePoly, delta: &MultiIndex) -> f64 {
    multiindex_range(delta)
        .iter()
        .map(|a| u.mixed_derivative(a).l2_norm().powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Forward and inverse reconstruction roundtrips for every order with
/// entries up to 3 in one to three dimensions, plus linearity and
/// boundedness of the reconstruction.
pub fn roundtrip(seed: u64, trials: usize) -> Vec<Property> {
    let mut out = Vec::new();
    for n in 1..=3usize {
        let configs = orders(n, 3);
        let nc = configs.len();
        let stream = 16 * n as u64;
        out.push(property(
            Suite::Roundtrip,
            format!("forward-n{n}"),
            EXACT_TOL,
            seed,
            stream,
            nc * trials,
            |rng, t| {
                let delta = &configs[t / trials];
                let dom = random_domain(rng, n);
                let degree = MultiIndex::new(delta.iter().map(|d| d + 2).collect())?;
                let breaks = (0..n)
                    .map(|i| {
                        if delta[i] == 0 {
                            random_breaks(rng, dom.lo()[i], dom.hi()[i], 2)
                        } else {
                            Vec::new()
                        }
                    })
                    .collect();
                let u = random_pw(rng, &dom, degree, breaks);
                reconstruct(&extract_traces_poly(&u, delta)?)?.rel_coeff_diff(&u)
            },
        ));
        out.push(property(
            Suite::Roundtrip,
            format!("inverse-n{n}"),
            EXACT_TOL,
            seed,
            stream + 1,
            nc * trials,
            |rng, t| {
                let delta = &configs[t / trials];
                let dom = random_domain(rng, n);
                let b = random_bundle(rng, &dom, delta);
                extract_traces_poly(&reconstruct(&b)?, delta)?.max_rel_diff(&b)
            },
        ));
        out.push(property(
            Suite::Roundtrip,
            format!("linearity-n{n}"),
            EXACT_TOL,
            seed,
            stream + 2,
            trials,
            |rng, t| {
                let delta = &configs[t % nc];
                let dom = random_domain(rng, n);
                let b1 = random_bundle(rng, &dom, delta);
                let b2 = random_bundle(rng, &dom, delta);
                let lambda = rng.gen_range(-3.0..3.0);
                let lhs = reconstruct(&b1.axpy(lambda, &b2)?)?;
                let rhs = reconstruct(&b1)?.axpy(lambda, &reconstruct(&b2)?)?;
                lhs.rel_coeff_diff(&rhs)
            },
        ));
        out.push(property(
            Suite::Roundtrip,
            format!("boundedness-n{n}"),
            1.0 + EXACT_TOL,
            seed,
            stream + 3,
            trials,
            |rng, t| {
                let delta = &configs[t % nc];
                let dom = random_domain(rng, n);
                let b = random_bundle(rng, &dom, delta);
                let u = reconstruct(&b)?;
                Ok(box_norm(&u, delta) / bundle_norm(&b) / reconstruction_bound(&dom, delta))
            },
        ));
    }
    out
}

/// The one-step integration identity of the expansion operators, the
/// first-order roundtrip along a single axis, and commutation of mixed
/// derivatives with reconstruction.
pub fn identities(seed: u64, trials: usize) -> Vec<Property> {
    let pairs: Vec<(usize, usize)> = (0..=4).flat_map(|d| (0..=d).map(move |k| (d, k))).collect();
    let np = pairs.len();
    let fund_int = property(
        Suite::Identities,
        "fund-int".into(),
        EXACT_TOL,
        seed,
        100,
        np * trials,
        |rng, t| {
            let (d, k) = pairs[t / trials];
            let dom = random_domain(rng, 2);
            let pool = break_pool(rng, &dom, 2);
            let v = random_on_axes(rng, &dom, &[k == d, true], 3, &pool);
            let (lhs, rhs) = fund_int_check(d, k, &v)?;
            lhs.rel_coeff_diff(&rhs)
        },
    );
    let ftc = property(
        Suite::Identities,
        "ftc".into(),
        EXACT_TOL,
        seed,
        101,
        3 * trials,
        |rng, t| {
            let n = 1 + t % 3;
            let axis = rng.gen_range(0..n);
            let dom = random_domain(rng, n);
            let pool = break_pool(rng, &dom, 2);
            let g = random_on_axes(rng, &dom, &vec![true; n], 3, &pool);
            let degree = MultiIndex::new((0..n).map(|_| rng.gen_range(0..=3)).collect())?;
            let breaks = (0..n)
                .map(|i| {
                    if i == axis {
                        Vec::new()
                    } else {
                        random_breaks(rng, dom.lo()[i], dom.hi()[i], 2)
                    }
                })
                .collect();
            let h = random_pw(rng, &dom, degree, breaks);
            let u = g.antiderivative(axis).add(&h)?;
            let delta = MultiIndex::unit(n, axis);
            reconstruct(&extract_traces_poly(&u, &delta)?)?.rel_coeff_diff(&u)
        },
    );
    let commutation = property(
        Suite::Identities,
        "commutation".into(),
        EXACT_TOL,
        seed,
        102,
        3 * trials,
        |rng, t| {
            let n = 1 + t % 3;
            let delta = MultiIndex::new((0..n).map(|_| rng.gen_range(0..=2)).collect())?;
            let beta = MultiIndex::new(delta.iter().map(|d| rng.gen_range(0..=d)).collect())?;
            let dom = random_domain(rng, n);
            let b = random_bundle(rng, &dom, &delta);
            let lhs = reconstruct(&b)?.mixed_derivative(&beta);
            let rhs = reconstruct(&derivative_bundle(&b, &beta)?)?;
            lhs.rel_coeff_diff(&rhs)
        },
    );
    vec![fund_int, ftc, commutation]
}

/// Squared residuals `f - p` on fixed quadrature grids; perturbation
/// directions are evaluated on the same grids.
struct Residuals {
    parts: Vec<(TensorGrid, Vec<f64>)>,
}

impl Residuals {
    fn sq_norm(&self, eps: f64, dirs: &[Vec<f64>]) -> f64 {
        self.parts
            .iter()
            .zip(dirs)
            .map(|((grid, r), q)| {
                let v: Vec<f64> = r.iter().zip(q).map(|(r, q)| (r - eps * q).powi(2)).collect();
                grid.integrate_values(&v)
            })
            .sum()
    }

    /// Largest improvement `||r|| - ||r - eps q||` over all `eps`.
    fn improvement(&self, dirs: &[Vec<f64>]) -> f64 {
        let base = self.sq_norm(0.0, dirs).sqrt();
        EPSILONS
            .iter()
            .map(|&e| base - self.sq_norm(e, dirs).sqrt())
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn residual_on<T: Calculus>(
    u: &AnalyticFunction,
    p: &T,
    spec: &SubdomainSpec,
    f: impl Fn(&[f64]) -> f64 + Sync,
    min_nodes: usize,
    rule: &QuadratureRule,
) -> Result<(TensorGrid, Vec<f64>)> {
    let grid = rule
        .clone()
        .for_function(u)
        .for_calculus(p)
        .with_min_nodes(min_nodes)
        .face_grid(u.domain(), spec);
    let fv = grid.eval(f)?;
    let pv = p.eval_grid(&grid.nodes);
    Ok((grid, fv.iter().zip(&pv).map(|(a, b)| a - b).collect()))
}

fn random_series(rng: &mut ChaCha8Rng, domain: &HyperRect, degree: &MultiIndex) -> LegendreSeries {
    let coeffs = (0..degree.lattice_size()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    LegendreSeries::new(domain.clone(), degree.clone(), coeffs).expect("consistent sizes")
}

struct OptCase {
    label: &'static str,
    u: AnalyticFunction,
    param: MultiIndex,
    gamma: MultiIndex,
}

fn opt_cases() -> Vec<OptCase> {
    let e1 = example1();
    let e2 = example2();
    let mi = |v: &[usize]| MultiIndex::new(v.to_vec()).expect("non-empty");
    vec![
        OptCase {
            label: "example1",
            u: e1,
            param: mi(&[16]),
            gamma: mi(&[5]),
        },
        OptCase {
            label: "example2",
            u: e2,
            param: mi(&[6, 6]),
            gamma: mi(&[2, 2]),
        },
    ]
}

/// Perturbation tests of the `L_2` projections and of the order-`gamma`
/// Legendre projection in the trace norm, with idempotence and commutation
/// of the projections with trace extraction.
pub fn optimality(seed: u64, trials: usize) -> Result<Vec<Property>> {
    let rule = QuadratureRule::default();
    let mut out = Vec::new();
    for (ci, case) in opt_cases().iter().enumerate() {
        let u = &case.u;
        let n = u.dim();
        let dom = u.domain();
        let interior = SubdomainSpec::interior(n);
        let f = u.evaluator(&MultiIndex::zeros(n))?;
        let r = rule.clone().for_function(u);
        let stream = 200 + 16 * ci as u64;

        let d = &case.param;
        let pd = project_legendre(|s| f(s), dom, &interior, d, &r)?.to_series();
        let top = d.iter().max().unwrap_or(0);
        let res = Residuals {
            parts: vec![residual_on(u, &pd, &interior, |s| f(s), top + EXTRA_NODES, &rule)?],
        };
        out.push(property(
            Suite::Optimality,
            format!("l2-legendre-{}", case.label),
            OPTIMALITY_SLACK,
            seed,
            stream,
            trials,
            |rng, _| {
                let q = random_series(rng, dom, d);
                Ok(res.improvement(&[q.eval_grid(&res.parts[0].0.nodes)]))
            },
        ));
        let again = project_legendre(|s| pd.eval_unchecked(s), dom, &interior, d, &r)?.to_series();
        out.push(single(
            format!("idempotence-legendre-{}", case.label),
            again.rel_coeff_diff(&pd),
        ));

        let k = &case.param;
        let qk = project_step(|s| f(s), dom, &interior, k, &r)?.to_piecewise();
        let res = Residuals {
            parts: vec![residual_on(u, &qk, &interior, |s| f(s), 1, &rule)?],
        };
        let breaks: Vec<Vec<f64>> = (0..n).map(|i| qk.breaks(i).to_vec()).collect();
        out.push(property(
            Suite::Optimality,
            format!("l2-step-{}", case.label),
            OPTIMALITY_SLACK,
            seed,
            stream + 1,
            trials,
            |rng, _| {
                let values = (0..qk.ncells()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let q = PiecewisePoly::step(dom.clone(), breaks.clone(), values)?;
                Ok(res.improvement(&[q.eval_grid(&res.parts[0].0.nodes)]))
            },
        ));
        let again = project_step(|s| qk.eval_unchecked(s), dom, &interior, k, &r)?.to_piecewise();
        out.push(single(format!("idempotence-step-{}", case.label), again.rel_coeff_diff(&qk)));

        let gamma = &case.gamma;
        let approx = sobolev_project_legendre(u, gamma, d, &rule)?;
        let exact = extract_traces_order(u, gamma)?;
        let top = d.add(gamma).iter().max().unwrap_or(0);
        let parts = exact
            .entries()
            .iter()
            .zip(approx.traces().entries())
            .map(|(t, p)| residual_on(u, p, t.spec(), |s| t.eval(s), top + 1, &rule))
            .collect::<Result<Vec<_>>>()?;
        let res = Residuals { parts };
        let cap = d.add(gamma);
        out.push(property(
            Suite::Optimality,
            format!("dc-legendre-{}", case.label),
            OPTIMALITY_SLACK,
            seed,
            stream + 2,
            trials,
            |rng, _| {
                let q = random_series(rng, dom, &cap);
                let dirs: Vec<Vec<f64>> = extract_traces_poly(&q, gamma)?
                    .entries()
                    .iter()
                    .zip(&res.parts)
                    .map(|(e, (grid, _))| e.eval_grid(&grid.nodes))
                    .collect();
                Ok(res.improvement(&dirs))
            },
        ));
        out.push(single(
            format!("commutation-legendre-{}", case.label),
            extract_traces_poly(approx.function(), gamma).and_then(|b| b.max_rel_diff(approx.traces())),
        ));
        let step = sobolev_project_step(u, gamma, k, &rule)?;
        out.push(single(
            format!("commutation-step-{}", case.label),
            extract_traces_poly(step.function(), gamma).and_then(|b| b.max_rel_diff(step.traces())),
        ));
    }
    Ok(out)
}

fn single(name: String, value: Result<f64>) -> Property {
    property(Suite::Optimality, name, EXACT_TOL, 0, 0, 1, |_, _| value.clone())
}
