//! dslab: run the verification suites, print exact laws, expand generating
//! functions, and simulate walks against their exact distributions.
//!
//! Exit codes: 0 all checks passed, 1 at least one check failed, 2 usage or
//! configuration error. Reports go to stdout or --output; diagnostics to
//! stderr.

mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use dslab_core::exact::{fraction_string, parse_rational, to_f64_lossy};
use dslab_core::integrals::{default_convolution_grid, default_laplace_grid, IntegralCase};
use dslab_core::montecarlo::{
    bridge_report, passage_report, position_report, simulate_bridge_return,
    simulate_first_passage, simulate_position, SimConfig,
};
use dslab_core::report::{summarize, write_csv, write_json, VerificationReport};
use dslab_core::series::{genfun_first_passage, genfun_position, TruncatedSeries};
use dslab_core::suites;
use dslab_core::walks::{
    bridge_first_passage_law, bridge_return_law, pmf_first_passage, pmf_negative_binomial,
    pmf_position, Pmf, WalkKind, WalkParams,
};
use dslab_core::Rational;

use config::FileConfig;

#[derive(Parser)]
#[command(
    name = "dslab",
    version,
    about = "Verification toolkit for Bessel convolution integrals, Gamma identities, and random-walk first-passage laws"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write results here instead of stdout
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,

    /// Output format for reports and tables
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// TOML run configuration; command-line flags override file values
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for sweeps and simulation
    #[arg(long, global = true, env = "DSLAB_THREADS")]
    threads: Option<usize>,

    /// Simulation seed, overriding config and defaults
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    /// Sign walk with steps +1/-1
    Pm,
    /// Counting walk with steps +1/0
    Nd,
}

impl From<KindArg> for WalkKind {
    fn from(k: KindArg) -> WalkKind {
        match k {
            KindArg::Pm => WalkKind::PlusMinus,
            KindArg::Nd => WalkKind::NonDecreasing,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteName {
    Integrals,
    Laplace,
    Gamma,
    Walks,
    Genfun,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and report every check
    Verify {
        #[arg(value_enum)]
        suite: SuiteName,
        /// Largest first order in the exact Gamma sweep
        #[arg(long)]
        mu_max: Option<u64>,
        /// Largest second order in the exact Gamma sweep
        #[arg(long)]
        nu_max: Option<u64>,
        /// Largest index in the exact Gamma sweep
        #[arg(long)]
        r_max: Option<u64>,
        /// Relative tolerance for the integral identity checks
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Print an exact probability mass table
    Pmf {
        #[command(subcommand)]
        law: PmfLaw,
    },
    /// Simulate a law and test it against the exact one
    Simulate {
        #[command(subcommand)]
        law: SimLaw,
    },
    /// Expand a generating function and dump its coefficients
    Series {
        #[command(subcommand)]
        series: SeriesKind,
    },
}

#[derive(Subcommand)]
enum PmfLaw {
    /// Position after n steps
    S {
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Step probability as num/den
        #[arg(long)]
        p: String,
        #[arg(long)]
        n: u64,
    },
    /// First time at a level, truncated at the horizon
    T {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        p: String,
        #[arg(long)]
        a: i64,
        #[arg(long)]
        horizon: u64,
    },
    /// Conditioned-walk first-passage law; with --mu 1 --nu 0 the table is
    /// the first-return law of the length-2r bridge keyed by return time
    Bridge {
        #[arg(long)]
        mu: u64,
        #[arg(long)]
        nu: u64,
        #[arg(long)]
        r: u64,
        /// Accepted for symmetry; the law does not depend on it
        #[arg(long)]
        p: Option<String>,
    },
    /// Negative binomial law with the given order and success probability
    Negbin {
        #[arg(long)]
        mu: u64,
        #[arg(long)]
        p: String,
        #[arg(long)]
        horizon: u64,
    },
}

#[derive(Subcommand)]
enum SimLaw {
    /// Sample the position after n steps
    S {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        p: String,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Sample the first-passage time, censored at the horizon
    T {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        p: String,
        #[arg(long)]
        a: i64,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        horizon: Option<u64>,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Sample the first return of an endpoint-conditioned sign walk
    Bridge {
        #[arg(long)]
        p: String,
        #[arg(long)]
        r: u64,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        alpha: Option<f64>,
    },
}

#[derive(Subcommand)]
enum SeriesKind {
    /// Generating function of the position law at a level
    Position {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        p: String,
        #[arg(long, allow_hyphen_values = true)]
        level: i64,
        #[arg(long)]
        order: usize,
    },
    /// Generating function of the first-passage time to a level
    Passage {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        p: String,
        #[arg(long, allow_hyphen_values = true)]
        level: i64,
        #[arg(long)]
        order: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

/// Ok(true) = success, Ok(false) = at least one check failed.
fn run(cli: &Cli) -> Result<bool, String> {
    let file_cfg = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    match &cli.command {
        Command::Verify { suite, mu_max, nu_max, r_max, tolerance } => {
            let reports = gather_suite(*suite, &file_cfg, *mu_max, *nu_max, *r_max, *tolerance)?;
            emit_reports(cli, &reports)?;
            let summary = summarize(&reports);
            eprintln!(
                "{} checks, {} failures, worst numeric residual {:.3e}",
                summary.total, summary.failures, summary.max_residual
            );
            Ok(summary.failures == 0)
        }
        Command::Pmf { law } => {
            let table = pmf_table(law)?;
            emit_value(cli, &table)?;
            Ok(true)
        }
        Command::Simulate { law } => {
            let (empirical, report) = run_simulation(cli, law, &file_cfg)?;
            match cli.format {
                Format::Json => {
                    let combined = json!({ "empirical": empirical, "report": report });
                    emit_string(cli, &format!("{:#}\n", combined))?;
                }
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_csv(std::slice::from_ref(&report), &mut buf)
                        .map_err(|e| format!("cannot write report: {e}"))?;
                    emit_string(cli, &String::from_utf8_lossy(&buf))?;
                }
            }
            eprintln!(
                "chi-square statistic {} against threshold {} (alpha {})",
                report.lhs, report.rhs, report.params["alpha"]
            );
            Ok(report.pass)
        }
        Command::Series { series } => {
            let expansion = expand_series(series)?;
            emit_series(cli, &expansion)?;
            Ok(true)
        }
    }
}

fn gather_suite(
    suite: SuiteName,
    cfg: &FileConfig,
    mu_max: Option<u64>,
    nu_max: Option<u64>,
    r_max: Option<u64>,
    tolerance: Option<f64>,
) -> Result<Vec<VerificationReport>, String> {
    let quad = cfg.quadrature();
    let identity_tol = tolerance.or(cfg.integrals.identity_tol);
    let integral_sweep = |cases: Vec<IntegralCase>| {
        dslab_core::integrals::sweep(&with_tolerance(cases, identity_tol), &quad)
    };
    let gamma = |cfg: &FileConfig| {
        suites::gamma_suite(
            mu_max.or(cfg.gamma.mu_max).unwrap_or(20),
            nu_max.or(cfg.gamma.nu_max).unwrap_or(20),
            r_max.or(cfg.gamma.r_max).unwrap_or(50),
        )
    };
    let walks = |cfg: &FileConfig| -> Result<Vec<VerificationReport>, String> {
        let mut reports = suites::walk_suite(&cfg.walk_grid()?).map_err(|e| e.to_string())?;
        reports.extend(suites::bridge_suite(&cfg.bridge_grid()?).map_err(|e| e.to_string())?);
        Ok(reports)
    };
    let genfun = |cfg: &FileConfig| {
        suites::genfun_suite(&cfg.genfun_grid()?).map_err(|e| e.to_string())
    };
    Ok(match suite {
        SuiteName::Integrals => integral_sweep(default_convolution_grid()),
        SuiteName::Laplace => integral_sweep(default_laplace_grid()),
        SuiteName::Gamma => gamma(cfg),
        SuiteName::Walks => walks(cfg)?,
        SuiteName::Genfun => genfun(cfg)?,
        SuiteName::All => {
            let mut all = integral_sweep(default_convolution_grid());
            all.extend(integral_sweep(default_laplace_grid()));
            all.extend(gamma(cfg));
            all.extend(walks(cfg)?);
            all.extend(genfun(cfg)?);
            all
        }
    })
}

fn with_tolerance(cases: Vec<IntegralCase>, tol: Option<f64>) -> Vec<IntegralCase> {
    let Some(t) = tol else { return cases };
    cases
        .into_iter()
        .map(|case| match case {
            IntegralCase::Convolution { identity, mu, nu, a, .. } => {
                IntegralCase::Convolution { identity, mu, nu, a, rel_tolerance: Some(t) }
            }
            IntegralCase::Laplace { identity, nu, alpha, beta, .. } => {
                IntegralCase::Laplace { identity, nu, alpha, beta, rel_tolerance: Some(t) }
            }
        })
        .collect()
}

struct PmfTable {
    kind: String,
    p: String,
    law: &'static str,
    params: serde_json::Value,
    masses: Vec<(i64, Rational)>,
    tail_bound: Option<Rational>,
}

fn walk_params(kind: KindArg, p: &str) -> Result<WalkParams<Rational>, String> {
    let p = parse_rational(p).map_err(|e| e.to_string())?;
    WalkParams::new(kind.into(), p).map_err(|e| e.to_string())
}

fn sorted_masses(pmf: &Pmf<Rational>) -> Vec<(i64, Rational)> {
    pmf.mass.iter().map(|(k, v)| (*k, v.clone())).collect()
}

fn pmf_table(law: &PmfLaw) -> Result<PmfTable, String> {
    match law {
        PmfLaw::S { kind, p, n } => {
            let params = walk_params(*kind, p)?;
            let pmf = pmf_position(&params, *n);
            Ok(PmfTable {
                kind: params.kind.label().to_string(),
                p: fraction_string(&params.up),
                law: "position",
                params: json!({ "n": n }),
                masses: sorted_masses(&pmf),
                tail_bound: pmf.tail,
            })
        }
        PmfLaw::T { kind, p, a, horizon } => {
            let params = walk_params(*kind, p)?;
            let pmf = pmf_first_passage(&params, *a, *horizon).map_err(|e| e.to_string())?;
            Ok(PmfTable {
                kind: params.kind.label().to_string(),
                p: fraction_string(&params.up),
                law: "first_passage",
                params: json!({ "a": a, "horizon": horizon }),
                masses: sorted_masses(&pmf),
                tail_bound: pmf.tail,
            })
        }
        PmfLaw::Bridge { mu, nu, r, p } => {
            let p_label = match p {
                Some(s) => fraction_string(&parse_rational(s).map_err(|e| e.to_string())?),
                None => "any".to_string(),
            };
            // the first-return special case reads best keyed by return time
            let (law_name, masses) = if *mu == 1 && *nu == 0 {
                let law = bridge_return_law(*r).map_err(|e| e.to_string())?;
                let keyed = law
                    .into_iter()
                    .enumerate()
                    .map(|(idx, q)| (2 * (idx as i64 + 1), q))
                    .collect();
                ("bridge_first_return", keyed)
            } else {
                let law = bridge_first_passage_law(*mu, *nu, *r).map_err(|e| e.to_string())?;
                let keyed = law.into_iter().enumerate().map(|(k, q)| (k as i64, q)).collect();
                ("bridge_first_passage", keyed)
            };
            Ok(PmfTable {
                kind: "plus_minus".to_string(),
                p: p_label,
                law: law_name,
                params: json!({ "mu": mu, "nu": nu, "r": r }),
                masses,
                tail_bound: None,
            })
        }
        PmfLaw::Negbin { mu, p, horizon } => {
            let theta = parse_rational(p).map_err(|e| e.to_string())?;
            let pmf =
                pmf_negative_binomial(*mu, &theta, *horizon).map_err(|e| e.to_string())?;
            Ok(PmfTable {
                kind: "negative_binomial".to_string(),
                p: fraction_string(&theta),
                law: "negative_binomial",
                params: json!({ "mu": mu, "horizon": horizon }),
                masses: sorted_masses(&pmf),
                tail_bound: pmf.tail,
            })
        }
    }
}

fn emit_value(cli: &Cli, table: &PmfTable) -> Result<(), String> {
    match cli.format {
        Format::Json => {
            let v = json!({
                "kind": table.kind,
                "p": table.p,
                "law": table.law,
                "params": table.params,
                "masses": table.masses.iter().map(|(n, m)| json!({"n": n, "mass": fraction_string(m)})).collect::<Vec<_>>(),
                "tail_bound": table.tail_bound.as_ref().map(fraction_string),
            });
            emit_string(cli, &format!("{v:#}\n"))
        }
        Format::Csv => {
            let mut text = String::from("n,mass_rational,mass_float\n");
            for (n, m) in &table.masses {
                text.push_str(&format!("{n},{},{}\n", fraction_string(m), to_f64_lossy(m)));
            }
            emit_string(cli, &text)
        }
    }
}

fn sim_defaults(cli: &Cli, cfg: &FileConfig) -> (u64, u64, u64, f64) {
    let seed = cli.seed.or(cfg.simulate.seed).unwrap_or(42);
    let samples = cfg.simulate.samples.unwrap_or(1_000_000);
    let horizon = cfg.simulate.horizon.unwrap_or(1_000);
    let alpha = cfg.simulate.alpha.unwrap_or(1e-3);
    (seed, samples, horizon, alpha)
}

fn run_simulation(
    cli: &Cli,
    law: &SimLaw,
    cfg: &FileConfig,
) -> Result<(serde_json::Value, VerificationReport), String> {
    let (seed, default_samples, default_horizon, default_alpha) = sim_defaults(cli, cfg);
    match law {
        SimLaw::S { kind, p, n, samples, alpha } => {
            let params = walk_params(*kind, p)?;
            let float = float_walk(&params)?;
            let sim =
                SimConfig { seed, samples: samples.unwrap_or(default_samples), horizon: *n };
            let law = simulate_position(&float, *n, &sim);
            let report = position_report(&params, *n, &law, alpha.unwrap_or(default_alpha))
                .map_err(|e| e.to_string())?;
            Ok((law.to_json(), report))
        }
        SimLaw::T { kind, p, a, samples, horizon, alpha } => {
            let horizon = horizon.unwrap_or(default_horizon);
            if horizon == 0 {
                return Err("horizon must be at least 1".to_string());
            }
            if horizon < a.unsigned_abs() {
                return Err(format!("horizon {horizon} cannot reach level {a}"));
            }
            let params = walk_params(*kind, p)?;
            let float = float_walk(&params)?;
            let sim = SimConfig { seed, samples: samples.unwrap_or(default_samples), horizon };
            let law = simulate_first_passage(&float, *a, &sim).map_err(|e| e.to_string())?;
            let report = passage_report(&params, *a, &law, alpha.unwrap_or(default_alpha))
                .map_err(|e| e.to_string())?;
            Ok((law.to_json(), report))
        }
        SimLaw::Bridge { p, r, samples, alpha } => {
            let params = walk_params(KindArg::Pm, p)?;
            let float = float_walk(&params)?;
            let sim = SimConfig {
                seed,
                samples: samples.unwrap_or(default_samples),
                horizon: 2 * r,
            };
            let law = simulate_bridge_return(&float, *r, &sim).map_err(|e| e.to_string())?;
            let report =
                bridge_report(&params, *r, &law, sim.samples, alpha.unwrap_or(default_alpha))
                    .map_err(|e| e.to_string())?;
            Ok((law.to_json(), report))
        }
    }
}

fn float_walk(params: &WalkParams<Rational>) -> Result<WalkParams<f64>, String> {
    WalkParams::new(params.kind, to_f64_lossy(&params.up)).map_err(|e| e.to_string())
}

fn expand_series(series: &SeriesKind) -> Result<TruncatedSeries<Rational>, String> {
    match series {
        SeriesKind::Position { kind, p, level, order } => {
            let params = walk_params(*kind, p)?;
            genfun_position(&params, *level, *order).map_err(|e| e.to_string())
        }
        SeriesKind::Passage { kind, p, level, order } => {
            let params = walk_params(*kind, p)?;
            genfun_first_passage(&params, *level, *order).map_err(|e| e.to_string())
        }
    }
}

fn emit_series(cli: &Cli, series: &TruncatedSeries<Rational>) -> Result<(), String> {
    match cli.format {
        Format::Json => {
            let v = json!({
                "order": series.order(),
                "coefficients": series.coefficients().iter().map(fraction_string).collect::<Vec<_>>(),
            });
            emit_string(cli, &format!("{v:#}\n"))
        }
        Format::Csv => {
            let mut text = String::from("power,coefficient\n");
            for (k, c) in series.coefficients().iter().enumerate() {
                text.push_str(&format!("{k},{}\n", fraction_string(c)));
            }
            emit_string(cli, &text)
        }
    }
}

fn emit_reports(cli: &Cli, reports: &[VerificationReport]) -> Result<(), String> {
    let mut buf = Vec::new();
    match cli.format {
        Format::Json => write_json(reports, &mut buf),
        Format::Csv => write_csv(reports, &mut buf),
    }
    .map_err(|e| format!("cannot serialize reports: {e}"))?;
    emit_bytes(cli, &buf)
}

fn emit_string(cli: &Cli, text: &str) -> Result<(), String> {
    emit_bytes(cli, text.as_bytes())
}

fn emit_bytes(cli: &Cli, bytes: &[u8]) -> Result<(), String> {
    match &cli.output {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| format!("cannot write to stdout: {e}")),
    }
}
