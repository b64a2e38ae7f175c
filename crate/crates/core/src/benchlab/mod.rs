//! Convergence sweeps over projection degree or cell count, log-log slope
//! fits, CSV output, and the figure reproductions built on them.

mod figures;

pub use figures::{reproduce, Check, Figure, FigureReport};

pub use crate::funcmodel::{example1, example2};

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::funcmodel::AnalyticFunction;
use crate::lattice::MultiIndex;
use crate::polyrep::Calculus;
use crate::projection::{sobolev_project_legendre, sobolev_project_step, SobolevApprox, EXTRA_NODES};
use crate::quadnorm::{l2_error_on_grid, norm_orders, NormKind, QuadratureRule};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Legendre,
    Step,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Legendre => "legendre",
            Method::Step => "step",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "legendre" => Ok(Method::Legendre),
            "step" => Ok(Method::Step),
            _ => Err(Error::Parse {
                line: 0,
                msg: format!("unknown method '{s}' (expected legendre or step)"),
            }),
        }
    }
}

/// Which error norm a slope or ratio refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Norm {
    L2,
    Sobolev,
    W,
}

/// Error norms of one approximant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Errors {
    pub l2: f64,
    /// Mixed Sobolev norm over all `alpha <= delta`.
    pub s: f64,
    /// Isotropic Sobolev norm over `|alpha|_1 <= min_i delta_i`.
    pub w: f64,
}

/// `u - A` in `L_2`, in the mixed Sobolev norm of order `u.delta()` and in
/// the isotropic norm of order `min_i delta_i`.
pub fn approximation_errors<T: Calculus>(
    u: &AnalyticFunction,
    approx: &SobolevApprox<T>,
    rule: &QuadratureRule,
) -> Result<Errors> {
    let top = approx.function().degree().iter().max().unwrap_or(0);
    let grid = rule
        .clone()
        .for_function(u)
        .for_calculus(approx.function())
        .with_min_nodes(top + EXTRA_NODES)
        .domain_grid(u.domain());
    let delta = u.delta();
    let simplex = norm_orders(delta, NormKind::Simplex);
    let mut s = 0.0;
    let mut w = 0.0;
    let mut l2 = 0.0;
    for alpha in norm_orders(delta, NormKind::Box) {
        let d = approx.derivative(&alpha)?;
        let e = l2_error_on_grid(|p| u.deriv_unchecked(&alpha, p), &d, &grid)?;
        s += e * e;
        if simplex.contains(&alpha) {
            w += e * e;
        }
        if alpha.is_zero() {
            l2 = e;
        }
    }
    Ok(Errors {
        l2,
        s: s.sqrt(),
        w: w.sqrt(),
    })
}

/// Builds `P_d^gamma u` or `Q_K^gamma u` with `d` or `K` equal to `param` on
/// every axis, and measures its errors.
pub fn sweep_point(
    u: &AnalyticFunction,
    method: Method,
    gamma: &MultiIndex,
    param: usize,
    rule: &QuadratureRule,
) -> Result<Errors> {
    let p = MultiIndex::splat(u.dim(), param);
    match method {
        Method::Legendre => approximation_errors(u, &sobolev_project_legendre(u, gamma, &p, rule)?, rule),
        Method::Step => approximation_errors(u, &sobolev_project_step(u, gamma, &p, rule)?, rule),
    }
}

/// Errors of a family of approximants indexed by `d` or `K`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub example: String,
    pub method: Method,
    pub gamma: MultiIndex,
    pub params: Vec<usize>,
    pub errors: Vec<Errors>,
    pub runtime_s: Vec<f64>,
    /// Parameters whose evaluation failed, with the reason.
    pub failures: Vec<(usize, String)>,
}

impl SweepResult {
    pub fn values(&self, norm: Norm) -> Vec<f64> {
        self.errors
            .iter()
            .map(|e| match norm {
                Norm::L2 => e.l2,
                Norm::Sobolev => e.s,
                Norm::W => e.w,
            })
            .collect()
    }

    /// Error at the last parameter over error at the first.
    pub fn ratio(&self, norm: Norm) -> f64 {
        let v = self.values(norm);
        match (v.first(), v.last()) {
            (Some(a), Some(b)) => b / a,
            _ => f64::NAN,
        }
    }

    /// Largest ratio `e[i+1] / e[i]` between consecutive errors, ignoring
    /// steps that land at or below `floor`.
    pub fn max_uptick(&self, norm: Norm, floor: f64) -> f64 {
        self.values(norm)
            .windows(2)
            .filter(|w| w[1] > floor)
            .map(|w| w[1] / w[0])
            .fold(0.0, f64::max)
    }

    pub fn error_at(&self, param: usize) -> Option<&Errors> {
        self.params.iter().position(|&p| p == param).map(|i| &self.errors[i])
    }

    /// Writes `param,l2_error,s_error,w_error,runtime_s`. Runtimes are
    /// written as 0 unless `timings` is set, keeping output reproducible.
    pub fn write_csv<W: Write>(&self, out: W, timings: bool) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["param", "l2_error", "s_error", "w_error", "runtime_s"])?;
        for (i, p) in self.params.iter().enumerate() {
            let e = &self.errors[i];
            let rt = if timings { format!("{:.6}", self.runtime_s[i]) } else { "0".into() };
            w.write_record([
                p.to_string(),
                format!("{:e}", e.l2),
                format!("{:e}", e.s),
                format!("{:e}", e.w),
                rt,
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// File name encoding example, method and order.
    pub fn file_name(&self) -> String {
        let g: Vec<String> = self.gamma.iter().map(|k| k.to_string()).collect();
        format!("{}_{}_gamma{}.csv", self.example, self.method, g.join("-"))
    }

    pub fn save(&self, dir: &Path, timings: bool) -> Result<std::path::PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(self.file_name());
        self.write_csv(std::fs::File::create(&path)?, timings)?;
        Ok(path)
    }
}

/// Runs one sweep in parallel. Failed points are recorded and skipped.
pub fn run_sweep(
    u: &AnalyticFunction,
    method: Method,
    gamma: &MultiIndex,
    params: &[usize],
    rule: &QuadratureRule,
) -> Result<SweepResult> {
    gamma
        .ensure_le(u.delta())
        .map_err(|_| Error::DerivativeUnavailable(format!("{gamma} (smoothness is {})", u.delta())))?;
    if params.windows(2).any(|w| w[0] >= w[1]) || params.contains(&0) {
        return Err(Error::InvalidWindow("parameters must be positive and strictly increasing".into()));
    }
    let outcomes: Vec<(usize, Result<Errors>, f64)> = params
        .par_iter()
        .map(|&p| {
            let start = Instant::now();
            let r = sweep_point(u, method, gamma, p, rule);
            (p, r, start.elapsed().as_secs_f64())
        })
        .collect();
    let mut result = SweepResult {
        example: u.name().to_string(),
        method,
        gamma: gamma.clone(),
        params: Vec::new(),
        errors: Vec::new(),
        runtime_s: Vec::new(),
        failures: Vec::new(),
    };
    for (p, r, t) in outcomes {
        match r {
            Ok(e) => {
                result.params.push(p);
                result.errors.push(e);
                result.runtime_s.push(t);
            }
            Err(e) => result.failures.push((p, e.to_string())),
        }
    }
    Ok(result)
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_loglog(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::InvalidWindow(format!("need at least 3 points, got {}", x.len())));
    }
    if let Some(bad) = x.iter().chain(y).find(|v| **v <= 0.0 || !v.is_finite()) {
        return Err(Error::InvalidWindow(format!("non-positive value {bad} in window")));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Slope of the chosen error norm over parameters in `[lo, hi]`.
pub fn fit_slope(result: &SweepResult, norm: Norm, lo: usize, hi: usize) -> Result<f64> {
    let v = result.values(norm);
    let (x, y): (Vec<f64>, Vec<f64>) = result
        .params
        .iter()
        .zip(&v)
        .filter(|(p, _)| **p >= lo && **p <= hi)
        .map(|(p, e)| (*p as f64, *e))
        .unzip();
    fit_loglog(&x, &y)
}

/// Powers of two from `lo` to `hi` inclusive.
pub fn doubling(lo: usize, hi: usize) -> Vec<usize> {
    std::iter::successors(Some(lo), |p| Some(p * 2))
        .take_while(|p| *p <= hi)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcmodel::poly_random;
    use crate::lattice::HyperRect;
    use approx::assert_relative_eq;

    #[test]
    fn exact_power_law() {
        let x: Vec<f64> = doubling(2, 256).iter().map(|&v| v as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v.powi(-5)).collect();
        assert!((fit_loglog(&x, &y).unwrap() + 5.0).abs() < 1e-8);
        assert!(fit_loglog(&x[..2], &y[..2]).is_err());
        let mut z = y.clone();
        z[3] = 0.0;
        assert!(matches!(fit_loglog(&x, &z), Err(Error::InvalidWindow(_))));
    }

    #[test]
    fn polynomial_is_reproduced() {
        let u = poly_random(&HyperRect::symmetric(1), &MultiIndex::splat(1, 2), 9);
        let r = run_sweep(&u, Method::Legendre, &MultiIndex::zeros(1), &[3, 4, 6], &QuadratureRule::default()).unwrap();
        assert!(r.failures.is_empty());
        for e in &r.errors {
            assert!(e.l2 < 1e-13 && e.s < 1e-12, "{e:?}");
        }
    }

    #[test]
    fn csv_layout() {
        let r = SweepResult {
            example: "ex".into(),
            method: Method::Step,
            gamma: MultiIndex::splat(2, 3),
            params: vec![2, 4],
            errors: vec![
                Errors { l2: 0.5, s: 1.0, w: 0.75 },
                Errors { l2: 0.125, s: 0.5, w: 0.25 },
            ],
            runtime_s: vec![0.1, 0.2],
            failures: vec![],
        };
        let mut buf = Vec::new();
        r.write_csv(&mut buf, false).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "param,l2_error,s_error,w_error,runtime_s\n2,5e-1,1e0,7.5e-1,0\n4,1.25e-1,5e-1,2.5e-1,0\n");
        assert_eq!(r.file_name(), "ex_step_gamma3-3.csv");
        assert_relative_eq!(r.ratio(Norm::L2), 0.25);
    }

    #[test]
    fn rejects_bad_sweeps() {
        let u = example1();
        let rule = QuadratureRule::default();
        assert!(run_sweep(&u, Method::Step, &MultiIndex::splat(1, 6), &[2, 4], &rule).is_err());
        assert!(run_sweep(&u, Method::Step, &MultiIndex::zeros(1), &[4, 2], &rule).is_err());
        assert_eq!("step".parse::<Method>().unwrap(), Method::Step);
        assert!("spline".parse::<Method>().is_err());
    }
}
