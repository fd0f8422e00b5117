//! `gemmax`: sampling campaigns, exact and limit tables, the tie classifier
//! and the verification suite. Tables go to `--out` or standard output as CSV.
//!
//! Exit codes: 0 success, 1 criterion failure, 2 usage error, 3 numeric-range
//! error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gemmax::acceptance::{run_suite, Suite};
use gemmax::campaign::sample_campaign;
use gemmax::exact::{convolve_geometrics, taus_for_beta_mixed, taus_for_max};
use gemmax::gem::Construction;
use gemmax::limit::{
    estimate_diversity, frechet_mixture_point, limit_cdf_closedform_half, limit_cdf_quadrature, CdfMethod,
};
use gemmax::tables::{write_cdf, write_pmf, write_samples};
use gemmax::ties::classify_limsup;
use gemmax::{Error, GemParams};

#[derive(Debug, Parser)]
#[command(name = "gemmax", version, about = "Sample maxima of GEM(alpha, theta) samples")]
struct Cli {
    /// Master seed; every output is a pure function of the flags and this seed.
    #[arg(long, global = true, env = "GEMMAX_SEED", default_value_t = 1)]
    seed: u64,

    /// Worker threads (0 = all cores). Does not affect any output.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Output file (default: standard output).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-replica M_n, K_n, L_n from one construction.
    Sample {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        reps: u64,
        #[arg(long, default_value = "stickbreak")]
        construction: Construction,
    },
    /// Exact pmf of M_n - 1 (alpha = 0), or of the cut-point count at a
    /// Beta(n, b) point when --b is given.
    ExactPmf {
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        b: Option<f64>,
        #[arg(long, default_value_t = 1e-12)]
        tail_eps: f64,
    },
    /// Limit cdf of M_n / n^{alpha/(1-alpha)} on a grid of x.
    LimitCdf {
        #[arg(long)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        /// Inclusive grid `start:stop:step`.
        #[arg(long)]
        x_grid: String,
        #[arg(long, default_value = "quadrature")]
        method: CdfMethod,
        /// Quadrature tolerance.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Sample size for the diversity draws (mc only).
        #[arg(long)]
        n: Option<u64>,
        /// Number of diversity draws (mc only).
        #[arg(long)]
        reps: Option<u64>,
    },
    /// Runs the acceptance criteria and prints one block per criterion.
    Verify {
        #[arg(long, default_value = "fast")]
        suite: Suite,
    },
    /// Almost-sure limsup of the multiplicity of the maximum.
    Classify {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
    },
}

enum Failure {
    Usage(String),
    Range(String),
    Criteria(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Parse(_) | Error::Io(_) => Failure::Usage(e.to_string()),
            _ => Failure::Range(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Usage(format!("--x-grid must look like start:stop:step with 0 < start <= stop, step > 0; got '{spec}'"));
    let parts: Vec<f64> = spec.split(':').map(|s| s.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    let [start, stop, step] = parts[..] else { return Err(bad()) };
    if !(start > 0.0 && stop >= start && step > 0.0 && stop.is_finite()) {
        return Err(bad());
    }
    let count = ((stop - start) / step + 1e-9).floor() as u64 + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let threads = cli.threads;
    match cli.command {
        Command::Sample { alpha, theta, n, reps, construction } => {
            let params = GemParams::new(alpha, theta)?;
            let rows = sample_campaign(construction, params, n, reps, cli.seed, threads)?;
            let mut w = output(&cli.out)?;
            write_samples(&mut w, &rows)?;
            w.flush()?;
        }
        Command::ExactPmf { theta, n, b, tail_eps } => {
            if n == 0 {
                return Err(Failure::Usage("--n must be >= 1".into()));
            }
            if !(tail_eps > 0.0 && tail_eps <= 0.01) {
                return Err(Failure::Usage(format!("--tail-eps must lie in (0, 0.01], got {tail_eps}")));
            }
            let spec = match b {
                Some(b) => taus_for_beta_mixed(theta, b, n)?,
                None => taus_for_max(theta, n)?,
            };
            let pmf = convolve_geometrics(&spec, tail_eps)?;
            let mut w = output(&cli.out)?;
            write_pmf(&mut w, &pmf)?;
            w.flush()?;
        }
        Command::LimitCdf { alpha, theta, x_grid, method, tol, n, reps } => {
            let params = GemParams::new(alpha, theta)?;
            let grid = parse_grid(&x_grid)?;
            let points = match method {
                CdfMethod::Quadrature => {
                    grid.iter().map(|&x| limit_cdf_quadrature(params, x, tol)).collect::<Result<Vec<_>, _>>()?
                }
                CdfMethod::ClosedForm => {
                    if alpha != 0.5 {
                        return Err(Failure::Usage(format!("the closed form requires --alpha 0.5, got {alpha}")));
                    }
                    grid.iter().map(|&x| limit_cdf_closedform_half(theta, x)).collect::<Result<Vec<_>, _>>()?
                }
                CdfMethod::MonteCarlo => {
                    let (Some(n), Some(reps)) = (n, reps) else {
                        return Err(Failure::Usage("--method mc requires --n and --reps".into()));
                    };
                    let draws = estimate_diversity(params, n, reps, cli.seed)?;
                    grid.iter().map(|&x| frechet_mixture_point(params, x, &draws)).collect::<Result<Vec<_>, _>>()?
                }
            };
            let mut w = output(&cli.out)?;
            write_cdf(&mut w, &points)?;
            w.flush()?;
        }
        Command::Verify { suite } => {
            let mut w = output(&cli.out)?;
            let mut failed = 0;
            for outcome in run_suite(suite, cli.seed, threads) {
                writeln!(w, "{outcome}")?;
                w.flush()?;
                failed += usize::from(!outcome.passed());
            }
            if failed > 0 {
                return Err(Failure::Criteria(failed));
            }
        }
        Command::Classify { alpha, theta } => {
            let c = classify_limsup(GemParams::new(alpha, theta)?);
            let mut w = output(&cli.out)?;
            writeln!(w, "{c} [{}]", c.basis)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        // the global pool serves the campaigns that do not take a thread count
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Criteria(k)) => {
            eprintln!("gemmax: {k} criterion(s) failed");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("gemmax: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Range(m)) => {
            eprintln!("gemmax: {m}");
            ExitCode::from(3)
        }
    }
}
