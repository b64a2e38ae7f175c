//! The four convergence experiments and their pass/fail checks.

use std::fmt;
use std::str::FromStr;

use super::{doubling, fit_slope, run_sweep, Method, Norm, SweepResult};
use crate::error::{Error, Result};
use crate::funcmodel::{example1, example2, AnalyticFunction};
use crate::lattice::MultiIndex;
use crate::quadnorm::QuadratureRule;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    /// Example 1, Legendre projections.
    Fig1,
    /// Example 1, step-function projections.
    Fig2,
    /// Example 2, Legendre projections.
    Fig3,
    /// Example 2, step-function projections.
    Fig4,
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(Figure::Fig1),
            "fig2" => Ok(Figure::Fig2),
            "fig3" => Ok(Figure::Fig3),
            "fig4" => Ok(Figure::Fig4),
            _ => Err(Error::Parse {
                line: 0,
                msg: format!("unknown figure '{s}' (expected fig1..fig4)"),
            }),
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = match self {
            Figure::Fig1 => 1,
            Figure::Fig2 => 2,
            Figure::Fig3 => 3,
            Figure::Fig4 => 4,
        };
        write!(f, "fig{n}")
    }
}

impl Figure {
    pub const ALL: [Figure; 4] = [Figure::Fig1, Figure::Fig2, Figure::Fig3, Figure::Fig4];

    pub fn example(&self) -> AnalyticFunction {
        match self {
            Figure::Fig1 | Figure::Fig2 => example1(),
            Figure::Fig3 | Figure::Fig4 => example2(),
        }
    }

    pub fn method(&self) -> Method {
        match self {
            Figure::Fig1 | Figure::Fig3 => Method::Legendre,
            Figure::Fig2 | Figure::Fig4 => Method::Step,
        }
    }

    /// Orders shown in the figure.
    pub fn gammas(&self) -> Vec<MultiIndex> {
        match self {
            Figure::Fig1 | Figure::Fig2 => [0, 1, 3, 5].iter().map(|&g| MultiIndex::splat(1, g)).collect(),
            Figure::Fig3 | Figure::Fig4 => (0..=3).map(|g| MultiIndex::splat(2, g)).collect(),
        }
    }

    /// Default degrees or cell counts.
    pub fn default_params(&self) -> Vec<usize> {
        match self {
            Figure::Fig1 | Figure::Fig2 => doubling(2, 256),
            Figure::Fig3 => doubling(2, 32),
            Figure::Fig4 => doubling(2, 64),
        }
    }
}

/// One pass/fail criterion with the measured value.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub target: String,
    pub pass: bool,
}

impl Check {
    fn within(name: String, value: Result<f64>, center: f64, tol: f64) -> Check {
        let v = value.unwrap_or(f64::NAN);
        Check {
            name,
            value: v,
            target: format!("{center} ± {tol}"),
            pass: (v - center).abs() <= tol,
        }
    }

    fn below(name: String, value: f64, bound: f64) -> Check {
        Check {
            name,
            value,
            target: format!("< {bound}"),
            pass: value < bound,
        }
    }

    fn at_most(name: String, value: f64, bound: f64) -> Check {
        Check {
            name,
            value,
            target: format!("<= {bound:e}"),
            pass: value <= bound,
        }
    }

    fn at_least(name: String, value: f64, bound: f64) -> Check {
        Check {
            name,
            value,
            target: format!(">= {bound}"),
            pass: value >= bound,
        }
    }
}

/// Errors at or below this level count as converged when judging trends.
pub const ERROR_FLOOR: f64 = 1e-12;
/// Largest tolerated growth between consecutive errors above the floor.
pub const MAX_UPTICK: f64 = 1.05;

impl Check {
    /// L2 errors never grow by more than 5% above the floor, and the last
    /// is at least ten times below the first.
    fn trend(s: &SweepResult) -> Check {
        let up = s.max_uptick(Norm::L2, ERROR_FLOOR);
        let ratio = s.ratio(Norm::L2);
        Check {
            name: format!("gamma={} L2 largest uptick (last/first {ratio:.3e})", label(&s.gamma)),
            value: up,
            target: format!("<= {MAX_UPTICK} and last/first < 0.1"),
            pass: up <= MAX_UPTICK && ratio < 0.1,
        }
    }
}

fn label(gamma: &MultiIndex) -> String {
    if gamma.dim() == 1 {
        gamma[0].to_string()
    } else {
        let g: Vec<String> = gamma.iter().map(|k| k.to_string()).collect();
        format!("({})", g.join(","))
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}: {:.4e} (target {})",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.target
        )
    }
}

/// Sweeps and checks for one figure.
#[derive(Clone, Debug)]
pub struct FigureReport {
    pub figure: Figure,
    pub sweeps: Vec<SweepResult>,
    pub checks: Vec<Check>,
}

impl FigureReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass) && self.sweeps.iter().all(|s| s.failures.is_empty())
    }

    fn sweep(&self, gamma: usize) -> &SweepResult {
        &self.sweeps[self.sweeps.iter().position(|s| s.gamma[0] == gamma).expect("swept order")]
    }
}

impl fmt::Display for FigureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: {} projections of {}", self.figure, self.figure.method(), self.figure.example().name())?;
        writeln!(f, "{:>8} {:>10} {:>10} {:>10} {:>12}", "gamma", "L2 slope", "S slope", "W slope", "S last/first")?;
        for s in &self.sweeps {
            let (lo, hi) = (s.params[0], *s.params.last().unwrap_or(&0));
            let fmt_slope = |norm| {
                fit_slope(s, norm, lo, hi).map_or_else(|_| "n/a".to_string(), |v| format!("{v:.3}"))
            };
            writeln!(
                f,
                "{:>8} {:>10} {:>10} {:>10} {:>12.4}",
                s.gamma.to_string(),
                fmt_slope(Norm::L2),
                fmt_slope(Norm::Sobolev),
                fmt_slope(Norm::W),
                s.ratio(Norm::Sobolev)
            )?;
            for (p, e) in &s.failures {
                writeln!(f, "  failed at {p}: {e}")?;
            }
        }
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Runs every sweep of a figure and evaluates its checks. The L2 trend
/// checks apply only to the default parameter lists.
pub fn reproduce(figure: Figure, params: Option<&[usize]>, rule: &QuadratureRule) -> Result<FigureReport> {
    let u = figure.example();
    let defaults = figure.default_params();
    let full = params.is_none();
    let params = params.unwrap_or(&defaults);
    let sweeps = figure
        .gammas()
        .iter()
        .map(|g| run_sweep(&u, figure.method(), g, params, rule))
        .collect::<Result<Vec<_>>>()?;
    let mut report = FigureReport {
        figure,
        sweeps,
        checks: Vec::new(),
    };
    let first = params[0];
    let last = *params.last().unwrap();
    let mut checks = Vec::new();
    match figure {
        Figure::Fig1 => {
            for g in [0, 5] {
                let s = report.sweep(g);
                checks.push(Check::within(
                    format!("gamma={g} L2 slope over [16,256]"),
                    fit_slope(s, Norm::L2, 16, 256),
                    -5.0,
                    0.5,
                ));
            }
            checks.push(Check::within(
                "gamma=5 S slope over [16,256]".into(),
                fit_slope(report.sweep(5), Norm::Sobolev, 16, 256),
                -0.25,
                0.15,
            ));
            checks.push(Check::at_least(
                "gamma=0 S last/first".into(),
                report.sweep(0).ratio(Norm::Sobolev),
                0.5,
            ));
        }
        Figure::Fig2 => {
            for (g, center) in [(0, -1.0), (1, -2.0), (3, -2.0), (5, -2.0)] {
                let tol = if g == 0 { 0.3 } else { 0.4 };
                checks.push(Check::within(
                    format!("gamma={g} L2 slope over [16,256]"),
                    fit_slope(report.sweep(g), Norm::L2, 16, 256),
                    center,
                    tol,
                ));
            }
            for g in [0, 1, 3, 5] {
                let r = report.sweep(g).ratio(Norm::Sobolev);
                let name = format!("gamma={g} S last/first");
                checks.push(if g == 5 { Check::below(name, r, 1.0) } else { Check::at_least(name, r, 0.5) });
            }
        }
        Figure::Fig3 => {
            for g in 0..=3 {
                let s = report.sweep(g);
                checks.push(Check::within(
                    format!("gamma=({g},{g}) L2 slope over [{first},{last}]"),
                    fit_slope(s, Norm::L2, first, last),
                    -3.0,
                    0.6,
                ));
                let r = s.ratio(Norm::Sobolev);
                let name = format!("gamma=({g},{g}) S last/first");
                checks.push(if g >= 2 { Check::below(name, r, 1.0) } else { Check::at_least(name, r, 0.5) });
            }
        }
        Figure::Fig4 => {
            let s = report.sweep(3);
            let at4 = s.error_at(4).copied();
            checks.push(Check::at_most(
                "gamma=(3,3) K=4 L2 error".into(),
                at4.map_or(f64::NAN, |e| e.l2),
                1e-12,
            ));
            checks.push(Check::at_most(
                "gamma=(3,3) K=4 S error".into(),
                at4.map_or(f64::NAN, |e| e.s),
                1e-12,
            ));
            let worst = s
                .params
                .iter()
                .zip(&s.errors)
                .filter(|(p, _)| **p >= 4 && **p % 4 == 0)
                .map(|(_, e)| e.l2.max(e.s))
                .fold(0.0f64, f64::max);
            checks.push(Check::at_most(
                "gamma=(3,3) worst error for aligned K >= 4".into(),
                worst,
                1e-12,
            ));
        }
    }
    if full {
        checks.extend(report.sweeps.iter().map(Check::trend));
    }
    report.checks = checks;
    Ok(report)
}
