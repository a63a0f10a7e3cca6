#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(a < b)` rejects NaN on purpose

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use gaussian_kahler::dombrowski::TangentPoint;
use gaussian_kahler::dynamics::{integrate_flow, schrodinger_evolve, schrodinger_residual, DEFAULT_DT, DEFAULT_T_END};
use gaussian_kahler::jacobi_group::{AlgebraElement, GroupElement};
use gaussian_kahler::momentum::{kahler_value, spectral_measure, spectrum, ObservableDecomposition, Spectrum};
use gaussian_kahler::numerics::{Grid1D, Interval, Polynomial2};
use gaussian_kahler::parallel::Parallelism;
use gaussian_kahler::verify::{run_verify, Suite, VerifyConfig, DEFAULT_SEED};

mod parse;

const EXIT_FAILED_CHECK: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_ESCAPED: u8 = 3;

/// Numerical verification of the Kahler geometry of the Gaussian tangent bundle.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and print a JSON report.
    Verify(VerifyArgs),
    /// Integrate the Hamiltonian flow of J^L and write it as CSV.
    Flow(FlowArgs),
    /// Spectrum and spectral measures of f = k(x) composed with g.
    Spectrum(SpectrumArgs),
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "all", value_parser = parse_suite)]
    suite: Suite,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Tolerance override `check=value`; repeatable.
    #[arg(long = "tol", value_name = "CHECK=VALUE", value_parser = parse_tolerance)]
    tolerances: Vec<(String, f64)>,
    /// Evaluate sample sets on the calling thread only.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct FlowArgs {
    /// Generator, e.g. `G-1*F` or `2P + 0.5Q`.
    #[arg(long = "L", value_name = "L", allow_hyphen_values = true)]
    generator: String,
    /// Initial point theta1,theta2,thetadot1,thetadot2.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true, default_value = "0,-0.5,0,0")]
    p0: TangentPoint,
    #[arg(long = "t", value_name = "T_END", default_value_t = DEFAULT_T_END)]
    t_end: f64,
    #[arg(long, default_value_t = DEFAULT_DT)]
    dt: f64,
    /// CSV destination; stdout when omitted, with the summary on stderr.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SpectrumArgs {
    /// Coefficients alpha,beta,gamma of k(x) = alpha x^2 + beta x + gamma.
    #[arg(long, value_parser = parse::floats::<3>, allow_hyphen_values = true)]
    k: [f64; 3],
    /// Jacobi group element a,b,c,d,lambda,mu,kappa; identity when omitted.
    #[arg(long, value_parser = parse_group, allow_hyphen_values = true)]
    g: Option<GroupElement>,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true, default_value = "0,-0.5,0,0")]
    p0: TangentPoint,
    /// Borel set piece such as `(-inf,0]`, `[1,2]` or `{-0.25}`; repeatable.
    #[arg(long = "interval", value_parser = parse_interval, allow_hyphen_values = true)]
    intervals: Vec<Interval>,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse()
        .map_err(|e| format!("{e}; expected one of {}", Suite::NAMES.join(", ")))
}

fn parse_tolerance(s: &str) -> Result<(String, f64), String> {
    parse::tolerance(s).map_err(|e| format!("{e:#}"))
}

fn parse_point(s: &str) -> Result<TangentPoint, String> {
    let c = parse::floats::<4>(s).map_err(|e| format!("{e:#}"))?;
    TangentPoint::from_array(c).map_err(|e| e.to_string())
}

fn parse_group(s: &str) -> Result<GroupElement, String> {
    parse::group_element(s).map_err(|e| format!("{e:#}"))
}

fn parse_interval(s: &str) -> Result<Interval, String> {
    parse::interval(s).map_err(|e| format!("{e:#}"))
}

/// Either a usage problem (exit 2) or one of the outcome codes.
enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
    Code(u8),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn print_json(value: &impl Serialize) -> Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<(), Failure> {
    let config = VerifyConfig {
        seed: args.seed,
        parallelism: if args.sequential { Parallelism::Sequential } else { Parallelism::default() },
        tolerances: args.tolerances.into_iter().collect(),
    };
    let records = run_verify(args.suite, &config).map_err(|e| Failure::Usage(e.into()))?;
    print_json(&records)?;
    if records.iter().all(|r| r.pass) {
        Ok(())
    } else {
        Err(Failure::Code(EXIT_FAILED_CHECK))
    }
}

fn flow(args: FlowArgs) -> Result<(), Failure> {
    let l: AlgebraElement = parse::generator(&args.generator).map_err(Failure::Usage)?;
    let traj = integrate_flow(&l, &args.p0, args.t_end, args.dt).map_err(|e| Failure::Usage(e.into()))?;
    let waves = schrodinger_evolve(&traj);

    let sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(File::create(path).with_context(|| format!("creating {}", path.display()))?),
        None => Box::new(io::stdout()),
    };
    let mut csv = BufWriter::new(sink);
    writeln!(csv, "t,theta1,theta2,thetadot1,thetadot2,JL,phase").context("writing CSV")?;
    for ((t, p), w) in traj.samples().iter().zip(&waves.samples) {
        let [a, b, c, d] = p.as_array();
        writeln!(csv, "{t},{a},{b},{c},{d},{},{}", kahler_value(&l, p), w.phase.re).context("writing CSV")?;
    }
    csv.flush().context("writing CSV")?;
    drop(csv);

    let grid = Grid1D::new(-6.0, 6.0, 121).expect("valid grid");
    let residual = schrodinger_residual(&waves, &grid).ok();
    let (t_last, p_last) = traj.last();
    let summary = json!({
        "generator": l.to_string(),
        "p0": args.p0.as_array(),
        "t_end": args.t_end,
        "dt": args.dt,
        "samples": traj.samples().len(),
        "final": { "t": t_last, "point": p_last.as_array() },
        "energy_drift": traj.energy_drift(),
        "schrodinger_residual": residual,
        "max_phase_imag": waves.samples.iter().map(|w| w.phase.im.abs()).fold(0.0, f64::max),
        "escaped": traj.escaped_at().is_some(),
        "escaped_at": traj.escaped_at(),
        "out": args.out.as_ref().map(|p| p.display().to_string()),
    });
    if args.out.is_some() {
        print_json(&summary)?;
    } else {
        eprintln!("{}", serde_json::to_string_pretty(&summary).context("encoding summary")?);
    }
    match traj.escaped_at() {
        Some(t) => {
            eprintln!("warning: trajectory left the domain at t = {t}; CSV is truncated");
            Err(Failure::Code(EXIT_ESCAPED))
        }
        None => Ok(()),
    }
}

fn endpoint_json(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn interval_json(iv: &Interval) -> Value {
    json!({
        "text": iv.to_string(),
        "endpoints": [endpoint_json(iv.lo), endpoint_json(iv.hi)],
    })
}

fn spectrum_kind(s: &Spectrum) -> &'static str {
    match s {
        Spectrum::Point { .. } => "point",
        Spectrum::LowerRay { .. } => "lower_ray",
        Spectrum::UpperRay { .. } => "upper_ray",
        Spectrum::Line => "line",
    }
}

fn spectrum_report(args: SpectrumArgs) -> Result<(), Failure> {
    let [alpha, beta, gamma] = args.k;
    let obs = ObservableDecomposition::new(
        args.g.unwrap_or_else(GroupElement::identity),
        Polynomial2::new(alpha, beta, gamma),
    );
    let spec = spectrum(&obs);
    let spec_iv = spec.as_interval();
    let mut measures = Vec::with_capacity(args.intervals.len());
    for iv in &args.intervals {
        let mass = spectral_measure(&obs, &args.p0, std::slice::from_ref(iv)).map_err(|e| Failure::Usage(e.into()))?;
        let warnings: Vec<String> = mass
            .outside_spectrum
            .iter()
            .map(|piece| format!("{piece} lies outside the spectrum {spec} and carries no mass"))
            .collect();
        let clipped = if warnings.is_empty() {
            Value::Null
        } else {
            iv.intersect(&spec_iv).as_ref().map_or(Value::Null, interval_json)
        };
        measures.push(json!({
            "interval": interval_json(iv),
            "probability": mass.probability,
            "clipped": clipped,
            "warnings": warnings,
        }));
    }
    let mut report = interval_json(&spec_iv);
    report["kind"] = json!(spectrum_kind(&spec));
    print_json(&json!({ "spectrum": report, "measures": measures }))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Verify(args) => verify(args),
        Command::Flow(args) => flow(args),
        Command::Spectrum(args) => spectrum_report(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Code(code)) => ExitCode::from(code),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
