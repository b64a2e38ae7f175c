//! Command-line front end: figure reproductions, verification suites,
//! expansion tables and free-form convergence sweeps.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sobolev_recon::benchlab::{doubling, reproduce, run_sweep, Figure, Method};
use sobolev_recon::expansion::expansion_terms;
use sobolev_recon::funcmodel::{extract_traces_order, lookup, EXAMPLE_NAMES};
use sobolev_recon::quadnorm::QuadratureRule;
use sobolev_recon::verify::{self, Suite};
use sobolev_recon::{Error, MultiIndex};

const THREADS_VAR: &str = "SOBOLEV_RECON_THREADS";

/// Reconstruction of mixed-smoothness Sobolev functions from boundary traces,
/// and Sobolev-convergent projections built on it.
#[derive(Debug, Parser)]
#[command(name = "sobolev-recon", version, about)]
struct RunConfig {
    #[command(flatten)]
    quad: QuadArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct QuadArgs {
    /// Gauss nodes per panel.
    #[arg(long, global = true, default_value_t = 16)]
    quad_nodes: usize,

    /// Panels per axis before splitting at breakpoints.
    #[arg(long, global = true, default_value_t = 32)]
    quad_panels: usize,

    /// Geometric grading ratio toward singular points, or `none`.
    #[arg(long, global = true, default_value = "0.25")]
    quad_grade: String,
}

impl QuadArgs {
    fn rule(&self) -> Result<QuadratureRule, Error> {
        let grade = match self.quad_grade.as_str() {
            "none" | "off" => None,
            g => Some(g.parse::<f64>().map_err(|e| Error::Parse {
                line: 0,
                msg: format!("bad --quad-grade '{g}': {e}"),
            })?),
        };
        QuadratureRule::new(self.quad_nodes, self.quad_panels, grade)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every sweep of a figure, write CSVs and check the expected rates.
    Reproduce {
        /// fig1, fig2, fig3 or fig4.
        figure: Figure,

        /// Override the degrees or cell counts (comma list or `lo:hi` doubling).
        #[arg(long, alias = "cells", value_parser = parse_params)]
        degrees: Option<Params>,

        #[arg(long, default_value = "results")]
        out: PathBuf,

        /// Record wall-clock times in the CSV files.
        #[arg(long)]
        timings: bool,
    },

    /// Run seeded property suites.
    Verify {
        /// roundtrip, identities, optimality or all.
        suite: Suite,

        #[arg(long, default_value_t = 42)]
        seed: u64,

        /// Trials per property (suite default when omitted).
        #[arg(long)]
        trials: Option<usize>,
    },

    /// Print each expansion term of an example at one point.
    Expand {
        #[arg(long)]
        example: String,

        /// Expansion order (defaults to the example's smoothness).
        #[arg(long)]
        delta: Option<MultiIndex>,

        /// Comma-separated coordinates.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        point: Vec<f64>,

        #[arg(long, default_value_t = 42)]
        seed: u64,
    },

    /// Free-form convergence sweep of one example, method and order.
    Sweep {
        #[arg(long)]
        example: String,

        /// legendre or step.
        #[arg(long)]
        method: Method,

        #[arg(long)]
        gamma: MultiIndex,

        /// Legendre degrees (comma list or `lo:hi` doubling).
        #[arg(long, value_parser = parse_params, conflicts_with = "cells")]
        degrees: Option<Params>,

        /// Cell counts per axis (comma list or `lo:hi` doubling).
        #[arg(long, value_parser = parse_params)]
        cells: Option<Params>,

        #[arg(long, default_value_t = 42)]
        seed: u64,

        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,

        #[arg(long)]
        timings: bool,
    },
}

#[derive(Clone, Debug)]
struct Params(Vec<usize>);

fn parse_params(s: &str) -> Result<Params, String> {
    if let Some((lo, hi)) = s.split_once(':') {
        let lo: usize = lo.trim().parse().map_err(|e| format!("bad start '{lo}': {e}"))?;
        let hi: usize = hi.trim().parse().map_err(|e| format!("bad end '{hi}': {e}"))?;
        if lo == 0 || hi < lo {
            return Err(format!("empty range {lo}:{hi}"));
        }
        return Ok(Params(doubling(lo, hi)));
    }
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("bad value '{t}': {e}")))
        .collect::<Result<Vec<_>, _>>()
        .map(Params)
}

fn configure_threads() -> Result<(), Error> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|e| Error::Parse {
        line: 0,
        msg: format!("bad {THREADS_VAR} '{raw}': {e}"),
    })?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Io(e.to_string()))?;
    }
    Ok(())
}

/// Runs the command; `Ok(false)` means a check or property failed.
fn run(config: RunConfig) -> Result<bool, Error> {
    configure_threads()?;
    let rule = config.quad.rule()?;
    match config.command {
        Command::Reproduce {
            figure,
            degrees,
            out,
            timings,
        } => {
            let report = reproduce(figure, degrees.as_ref().map(|p| p.0.as_slice()), &rule)?;
            for s in &report.sweeps {
                let path = s.save(&out, timings)?;
                println!("wrote {}", path.display());
            }
            print!("{report}");
            Ok(report.passed())
        }
        Command::Verify { suite, seed, trials } => {
            let report = verify::run(suite, seed, trials)?;
            println!("{report}");
            Ok(report.passed())
        }
        Command::Expand {
            example,
            delta,
            point,
            seed,
        } => {
            let u = lookup(&example, seed)?;
            let delta = delta.unwrap_or_else(|| u.delta().clone());
            let value = u.eval(&point)?;
            let terms = expansion_terms(&extract_traces_order(&u, &delta)?, &point, &rule)?;
            println!("{:<12} {:<16} {:>24} {:>24}", "alpha", "face", "trace", "contribution");
            for t in &terms {
                println!(
                    "{:<12} {:<16} {:>24.16e} {:>24.16e}",
                    t.alpha.to_string(),
                    t.face,
                    t.trace_value,
                    t.contribution
                );
            }
            let total: f64 = terms.iter().map(|t| t.contribution).sum();
            println!("sum {total:.16e}");
            println!("u   {value:.16e}");
            println!("difference {:.3e}", (total - value).abs());
            Ok(true)
        }
        Command::Sweep {
            example,
            method,
            gamma,
            degrees,
            cells,
            seed,
            out,
            timings,
        } => {
            let u = lookup(&example, seed)?;
            let params = match (method, degrees, cells) {
                (_, Some(p), None) | (_, None, Some(p)) => p.0,
                (Method::Legendre, None, None) => doubling(2, 64),
                (Method::Step, None, None) => doubling(2, 128),
                (_, Some(_), Some(_)) => unreachable!("clap rejects both"),
            };
            let result = run_sweep(&u, method, &gamma, &params, &rule)?;
            match out {
                Some(dir) => println!("wrote {}", result.save(&dir, timings)?.display()),
                None => result.write_csv(std::io::stdout().lock(), timings)?,
            }
            for (p, e) in &result.failures {
                eprintln!("failed at {p}: {e}");
            }
            Ok(result.failures.is_empty())
        }
    }
}

fn main() -> ExitCode {
    let config = RunConfig::parse();
    match run(config) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::UnknownExample(_) = e {
                eprintln!("known examples: {}", EXAMPLE_NAMES.join(", "));
            }
            ExitCode::from(2)
        }
    }
}
