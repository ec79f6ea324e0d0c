use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tailcert::polycert::{build_claim1_poly, verify_paper_case_analysis, verify_positive_on_open_ray};
use tailcert::rademacher::{
    comparison_ratio, exact_tail, exact_tail_abs, exact_tails_abs, gram_spectrum, rank2_comparator_tail,
    WeightConfig,
};
use tailcert::spheresim::{estimate_exceed, Convention, Family, MatrixCoefficients, SimConfig};
use tailcert::{CertificateReport, Density};
use tailcert_cli::verify::{self, VerifyOptions};
use tailcert_cli::{CliError, DEFAULT_SEED, EXIT_PASS, EXIT_VIOLATION};

#[derive(Parser)]
#[command(name = "tailcert", version, about = "Certificates, exact enumeration and Monte Carlo for Rademacher-Gaussian tail comparison")]
struct Cli {
    /// Seed for every random input and Monte Carlo stream.
    #[arg(long, global = true, env = "TAILCERT_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full claim suite and print a JSON report.
    Verify {
        /// Monte Carlo samples per experiment (at least 10^4).
        #[arg(long, default_value_t = verify::DEFAULT_SAMPLES)]
        samples: u64,
        /// Quadrature tolerance for the tangent-bound check.
        #[arg(long, default_value_t = verify::DEFAULT_TOLERANCE)]
        tol: f64,
        /// Comma-separated check ids to run.
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        /// Write to this file instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Exact positivity certificate for the log-concavity polynomial.
    Certify {
        #[arg(long, value_enum, default_value_t = Which::All)]
        which: Which,
        /// Write to this file instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Exact tail probability of a weighted Rademacher sum.
    Enumerate {
        /// Real coefficients, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "input")]
        coeffs: Vec<f64>,
        /// JSON file `{"vectors": [[..], ..], "t": .., "strict": ..}`.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Threshold in units of sigma (or absolute with --absolute).
        #[arg(long)]
        t: Option<f64>,
        /// Count `|S| > t` instead of `|S| >= t`.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        absolute: bool,
        /// Write to this file instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// CSV of density, tail and hazard of the rank-two comparator.
    Density {
        #[arg(long)]
        lambda: f64,
        /// Comma-separated t values; overrides the range options.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long, default_value_t = 0.0)]
        t_min: f64,
        #[arg(long, default_value_t = 5.0)]
        t_max: f64,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        /// Relative quadrature tolerance for the tail.
        #[arg(long)]
        tol: Option<f64>,
        /// Write to this file instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Monte Carlo estimate of `P(|sum_j A_j xi_j|^2 >= sum_j ||A_j||_F^2 / d)`.
    Simulate {
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, conflicts_with = "matrices")]
        family: Option<String>,
        /// JSON file `{"matrices": [[[row], ..], ..]}`.
        #[arg(long)]
        matrices: Option<PathBuf>,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, value_enum, default_value_t = ConventionArg::Ge)]
        convention: ConventionArg,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        out: Format,
        #[arg(long)]
        workers: Option<usize>,
        /// Write to this file instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// CSV tables for plotting.
    Report {
        #[command(subcommand)]
        table: Table,
    },
}

#[derive(Subcommand)]
enum Table {
    /// Rows `(t, rademacher tail, comparator tail, ratio)`.
    Ratio {
        /// Real coefficients, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1,1")]
        coeffs: Vec<f64>,
        /// Comma-separated absolute thresholds; empty for a header only.
        #[arg(long)]
        grid: Option<String>,
        /// Write to this file instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Rows `(lambda, f_lambda(t))`.
    Density {
        /// Comma-separated lambda values; empty for a header only.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Write to this file instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Ray,
    Cases,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    Ge,
    Gt,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("tailcert: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let seed = cli.seed;
    match cli.command {
        Command::Verify { samples, tol, only, output } => {
            let opts = VerifyOptions {
                seed,
                samples,
                tolerance: tol,
                only,
            };
            let report = verify::run_verify(&opts)?;
            write_json(output.as_deref(), &report)?;
            if report.pass {
                Ok(EXIT_PASS)
            } else {
                eprintln!("tailcert: failed checks: {}", report.failing().join(", "));
                Ok(EXIT_VIOLATION)
            }
        }
        Command::Certify { which, output } => {
            let mut report = CertificateReport::new();
            if matches!(which, Which::Ray | Which::All) {
                report.absorb("ray: ", verify_positive_on_open_ray(&build_claim1_poly()?));
            }
            if matches!(which, Which::Cases | Which::All) {
                report.absorb("cases: ", verify_paper_case_analysis());
            }
            let pass = report.overall();
            write_json(output.as_deref(), &json!({ "pass": pass, "checks": report.checks }))?;
            Ok(if pass { EXIT_PASS } else { EXIT_VIOLATION })
        }
        Command::Enumerate {
            coeffs,
            input,
            t,
            strict,
            absolute,
            output,
        } => {
            let (w, t, strict) = enumerate_input(coeffs, input.as_deref(), t, strict)?;
            let tail = if absolute {
                exact_tail_abs(&w, t, strict)?
            } else {
                exact_tail(&w, t, strict)?
            };
            let p = tail.probability();
            let doc = json!({
                "n": w.n(),
                "dim": w.dim(),
                "sigma": w.sigma(),
                "t": t,
                "threshold": if absolute { "absolute" } else { "relative" },
                "strict": strict,
                "hits": tail.hits,
                "patterns": tail.patterns,
                "probability": p.to_string(),
                "decimal": p.to_f64(),
                "near_boundary": tail.near_boundary,
            });
            write_json(output.as_deref(), &doc)?;
            Ok(EXIT_PASS)
        }
        Command::Density {
            lambda,
            grid,
            t_min,
            t_max,
            steps,
            tol,
            output,
        } => {
            let ts = match grid {
                Some(g) => parse_list(&g)?,
                None => linear_grid(t_min, t_max, steps)?,
            };
            let mut model = Density::new(lambda)?;
            if let Some(tol) = tol {
                if !(tol > 0.0 && tol < 1e-3) {
                    return Err(CliError::Config(format!("--tol must lie in (0, 1e-3), got {tol}")));
                }
                model = model.with_tolerance(tol);
            }
            let mut rows = Vec::with_capacity(ts.len());
            for t in ts {
                let f = model.density_f(t).value;
                let h = model.tail_h(t)?.value;
                let a = model.hazard_a(t)?.value;
                rows.push([t, f, h, a].map(|x| x.to_string()));
            }
            write_csv(output.as_deref(), &["t", "f", "h", "a"], rows)?;
            Ok(EXIT_PASS)
        }
        Command::Simulate {
            d,
            n,
            family,
            matrices,
            samples,
            convention,
            out,
            workers,
            output,
        } => {
            let (label, mc) = simulate_input(d, n, family, matrices.as_deref(), seed)?;
            let mut cfg = SimConfig::new(samples, seed);
            if let Some(k) = workers {
                cfg = cfg.with_workers(k);
            }
            let convention = match convention {
                ConventionArg::Ge => Convention::Ge,
                ConventionArg::Gt => Convention::Gt,
            };
            let mu = mc.mu();
            let est = estimate_exceed(&mc, mu.sqrt(), convention, &cfg)?;
            let summary = SimSummary {
                source: label,
                d: mc.d(),
                n: mc.n(),
                p_hat: est.p_hat,
                hits: est.hits,
                samples: est.samples,
                ci: [est.ci_low, est.ci_high],
                seed,
                mu,
                convention: convention.symbol(),
                ties: est.ties,
            };
            match out {
                Format::Json => write_json(output.as_deref(), &summary)?,
                Format::Csv => write_csv(
                    output.as_deref(),
                    &["source", "d", "n", "p_hat", "hits", "samples", "ci_low", "ci_high", "seed", "mu", "convention", "ties"],
                    [[
                        summary.source.clone(),
                        summary.d.to_string(),
                        summary.n.to_string(),
                        summary.p_hat.to_string(),
                        summary.hits.to_string(),
                        summary.samples.to_string(),
                        summary.ci[0].to_string(),
                        summary.ci[1].to_string(),
                        seed.to_string(),
                        mu.to_string(),
                        summary.convention.to_string(),
                        summary.ties.to_string(),
                    ]],
                )?,
            }
            Ok(EXIT_PASS)
        }
        Command::Report { table } => {
            match table {
                Table::Ratio { coeffs, grid, output } => {
                    let w = WeightConfig::from_reals(&coeffs)?;
                    let ts = match grid {
                        Some(g) => parse_list(&g)?,
                        None => vec![0.5, 1.0, 1.5, 2.0, 2.5, 3.0],
                    };
                    let spec = gram_spectrum(&w)?;
                    let tails = exact_tails_abs(&w, &ts, false)?;
                    let mut rows = Vec::with_capacity(ts.len());
                    for (t, tail) in ts.iter().zip(tails) {
                        let g = rank2_comparator_tail(&spec, *t)?;
                        let ratio = match comparison_ratio(&w, *t) {
                            Ok(r) => r.to_string(),
                            Err(tailcert::Error::NotEvaluable(_)) => String::new(),
                            Err(e) => return Err(e.into()),
                        };
                        rows.push([
                            t.to_string(),
                            (t / w.sigma()).to_string(),
                            tail.to_f64().to_string(),
                            g.value.to_string(),
                            ratio,
                        ]);
                    }
                    write_csv(
                        output.as_deref(),
                        &["t", "t_over_sigma", "rademacher_tail", "comparator_tail", "ratio"],
                        rows,
                    )?;
                }
                Table::Density { grid, t, output } => {
                    let lambdas = match grid {
                        Some(g) => parse_list(&g)?,
                        None => vec![1.0, 1.5, 2.0, 5.0, 10.0, 100.0, 1e4, 1e6],
                    };
                    let mut rows = Vec::with_capacity(lambdas.len());
                    for l in lambdas {
                        rows.push([l.to_string(), Density::new(l)?.density_f(t).value.to_string()]);
                    }
                    write_csv(output.as_deref(), &["lambda", "f"], rows)?;
                }
            }
            Ok(EXIT_PASS)
        }
    }
}

#[derive(Serialize)]
struct SimSummary {
    source: String,
    d: usize,
    n: usize,
    p_hat: f64,
    hits: u64,
    samples: u64,
    ci: [f64; 2],
    seed: u64,
    mu: f64,
    convention: &'static str,
    ties: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VectorsFile {
    vectors: Vec<Vec<f64>>,
    t: Option<f64>,
    strict: Option<bool>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MatricesFile {
    matrices: Vec<Vec<Vec<f64>>>,
}

fn enumerate_input(
    coeffs: Vec<f64>,
    input: Option<&Path>,
    t: Option<f64>,
    strict: bool,
) -> Result<(WeightConfig, f64, bool), CliError> {
    match input {
        Some(path) => {
            let file: VectorsFile = serde_json::from_reader(open(path)?)?;
            let t = t.or(file.t).unwrap_or(1.0);
            Ok((WeightConfig::new(file.vectors)?, t, strict || file.strict.unwrap_or(false)))
        }
        None if coeffs.is_empty() => Err(CliError::Config("give --coeffs or --input".into())),
        None => Ok((WeightConfig::from_reals(&coeffs)?, t.unwrap_or(1.0), strict)),
    }
}

fn simulate_input(
    d: Option<usize>,
    n: Option<usize>,
    family: Option<String>,
    matrices: Option<&Path>,
    seed: u64,
) -> Result<(String, MatrixCoefficients), CliError> {
    if let Some(path) = matrices {
        let file: MatricesFile = serde_json::from_reader(open(path)?)?;
        let dim = file.matrices.first().map_or(0, |m| m.len());
        let mut flat = Vec::with_capacity(file.matrices.len());
        for (j, m) in file.matrices.into_iter().enumerate() {
            if m.len() != dim || m.iter().any(|row| row.len() != dim) {
                return Err(CliError::Config(format!("matrix {j} is not {dim} x {dim}")));
            }
            flat.push(m.into_iter().flatten().collect());
        }
        if d.is_some_and(|d| d != dim) || n.is_some_and(|n| n != flat.len()) {
            return Err(CliError::Config("--d/--n disagree with the matrices file".into()));
        }
        return Ok((path.display().to_string(), MatrixCoefficients::new(dim, flat)?));
    }
    let (Some(d), Some(n)) = (d, n) else {
        return Err(CliError::Config("give --d and --n, or --matrices".into()));
    };
    let family = Family::parse(family.as_deref().unwrap_or("gaussian"))
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok((family.name().to_string(), MatrixCoefficients::from_family(family, d, n, seed)?))
}

fn parse_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<f64>().map_err(|e| CliError::Config(format!("bad number {x:?}: {e}"))))
        .collect()
}

fn linear_grid(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(CliError::Config(format!("bad range [{lo}, {hi}]")));
    }
    if steps == 0 {
        return Ok(vec![lo]);
    }
    Ok((0..=steps).map(|k| lo + (hi - lo) * k as f64 / steps as f64).collect())
}

fn open(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match out {
        Some(p) => Ok(Box::new(
            File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn write_json(out: Option<&Path>, value: &impl Serialize) -> Result<(), CliError> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_csv<R, I>(out: Option<&Path>, header: &[&str], rows: R) -> Result<(), CliError>
where
    R: IntoIterator<Item = I>,
    I: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(sink(out)?);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

