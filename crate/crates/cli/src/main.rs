//! `steiner`: Steiner–Minkowski coefficients, zeros, limit convergence and
//! Monte Carlo validation from the command line.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use steiner_core::angles::QuadratureConfig;
use steiner_core::limits::{convergence_profile, DEFAULT_SAMPLES};
use steiner_core::mc::{validate_family, McConfig};
use steiner_core::numfmt::fmt17;
use steiner_core::polynomials::coefficient_table;
use steiner_core::zeros::{classify_zeros, find_family_roots, RootConfig, RootSet, ZeroLocationReport, DEFAULT_IMAG_TOL};
use steiner_core::{Error, FamilyInstance, Kind};

const EXIT_IO: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_QUADRATURE: u8 = 3;
const EXIT_ROOTS: u8 = 4;
const EXIT_VALIDATION: u8 = 5;

/// Steiner–Minkowski polynomials of balls, cubes, cross-polytopes and simplexes.
///
/// Lengths (ρ, t) are in the body's length unit; τ = σ_K t is dimensionless.
/// Numbers are written as decimal strings with 17 significant digits.
#[derive(Parser, Debug)]
#[command(name = "steiner", version)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "STEINER_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Coefficient table: m_l (length^{n-l}), W_l (length^{n-l}), V_l (length^l), c_l and μ_l (dimensionless).
    Coeffs(CoeffsArgs),
    /// Zeros of the renormalized polynomial in τ (dimensionless), with a location summary per n.
    Zeros(ZerosArgs),
    /// Sup distance d_n between the renormalized polynomial and its n → ∞ limit on |τ| = radius.
    Converge(ConvergeArgs),
    /// Compares M_K(t) with a Monte Carlo estimate of Vol_n(K + tB^n) (volume in length^n). Exit 5 if any |z| > 4.
    McValidate(McArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct Common {
    /// Body family: ball, cube, crosspolytope or simplex.
    #[arg(long, value_parser = parse_kind)]
    family: Kind,

    /// Output format.
    #[arg(long, value_enum, default_value = "json")]
    format: Format,

    /// Write to this file instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,

    /// Absolute tolerance of each angle integral.
    #[arg(long)]
    abs_tol: Option<f64>,

    /// Relative tolerance of each angle integral.
    #[arg(long)]
    rel_tol: Option<f64>,
}

impl Common {
    fn quadrature(&self) -> QuadratureConfig {
        let mut q = QuadratureConfig::default();
        if let Some(a) = self.abs_tol {
            q.abs_tol = a;
        }
        if let Some(r) = self.rel_tol {
            q.rel_tol = r;
        }
        q
    }
}

#[derive(Args, Debug)]
struct CoeffsArgs {
    #[command(flatten)]
    common: Common,
    /// Dimension n ≥ 1.
    #[arg(long)]
    dim: usize,
    /// Size parameter ρ (length): radius, half-edge, l1-radius or coordinate sum.
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
}

#[derive(Args, Debug)]
struct ZerosArgs {
    #[command(flatten)]
    common: Common,
    /// Dimension n, or an inclusive range a..b.
    #[arg(long, value_parser = parse_dims)]
    dim: DimRange,
    /// Residual bound relative to Σ|c_l||τ|^l.
    #[arg(long)]
    residual_tol: Option<f64>,
    /// Largest working precision in bits.
    #[arg(long)]
    max_precision_bits: Option<usize>,
    /// Imaginary parts up to this are treated as zero in the summary.
    #[arg(long, default_value_t = DEFAULT_IMAG_TOL)]
    imag_tol: f64,
}

#[derive(Args, Debug)]
struct ConvergeArgs {
    #[command(flatten)]
    common: Common,
    /// Strictly increasing dimensions, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    dims: Vec<usize>,
    /// Circle radius r = |τ| (dimensionless).
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Grid points on the circle (at least 64).
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples_circle: usize,
}

#[derive(Args, Debug)]
struct McArgs {
    #[command(flatten)]
    common: Common,
    /// Dimension n, 1 ≤ n ≤ 6.
    #[arg(long)]
    dim: usize,
    /// Size parameter ρ (length).
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    /// Tube radii t ≥ 0 (length), comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    t: Vec<f64>,
    /// Monte Carlo samples per t.
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 0x5EED)]
    seed: u64,
    /// Samples per random substream.
    #[arg(long, default_value_t = 1 << 16)]
    chunk_size: u64,
}

#[derive(Clone, Copy, Debug)]
struct DimRange {
    lo: usize,
    hi: usize,
}

fn parse_kind(s: &str) -> Result<Kind, String> {
    s.parse::<Kind>().map_err(|e| e.to_string())
}

fn parse_dims(s: &str) -> Result<DimRange, String> {
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("{x:?}: {e}"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
        None => {
            let n = parse(s)?;
            (n, n)
        }
    };
    if lo == 0 || lo > hi {
        return Err(format!("need 1 <= a <= b, got {s}"));
    }
    Ok(DimRange { lo, hi })
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Usage(String),
    Validation(String),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(io::Error::other(e))
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Validation(_) => EXIT_VALIDATION,
            Failure::Io(_) => EXIT_IO,
            Failure::Core(e) => match e {
                Error::Domain(_) | Error::UnsupportedKind(_) => EXIT_USAGE,
                Error::Quadrature { .. } | Error::Angle { .. } => EXIT_QUADRATURE,
                Error::RootsNotConverged { .. } => EXIT_ROOTS,
            },
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Usage(m) | Failure::Validation(m) => f.write_str(m),
            Failure::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

fn sink(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json<T: Serialize>(common: &Common, value: &T) -> Result<(), Failure> {
    let mut out = sink(&common.output)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(io::Error::other)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn write_csv(common: &Common, header: &[&str], rows: Vec<Vec<String>>) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(sink(&common.output)?);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_coeffs(a: &CoeffsArgs) -> Result<(), Failure> {
    let instance = FamilyInstance::new(a.common.family, a.dim, a.rho)?;
    let table = coefficient_table(&instance, &a.common.quadrature())?;
    match a.common.format {
        Format::Json => write_json(&a.common, &table),
        Format::Csv => write_csv(
            &a.common,
            &["l", "m", "W", "V", "c", "mu"],
            table
                .rows
                .iter()
                .map(|r| vec![r.l.to_string(), fmt17(r.m), fmt17(r.w), fmt17(r.v), fmt17(r.c), fmt17(r.mu)])
                .collect(),
        ),
    }
}

#[derive(Serialize)]
struct ZerosEntry {
    n: usize,
    roots: RootSet,
    report: ZeroLocationReport,
}

#[derive(Serialize)]
struct SummaryRow {
    n: usize,
    max_real_part: String,
    all_negative_real: bool,
    all_left_half_plane: bool,
    max_abs_imag: String,
    precision_bits: usize,
}

#[derive(Serialize)]
struct ZerosOutput {
    family: Kind,
    summary: Vec<SummaryRow>,
    results: Vec<ZerosEntry>,
}

fn cmd_zeros(a: &ZerosArgs) -> Result<(), Failure> {
    let mut cfg = RootConfig::default();
    if let Some(r) = a.residual_tol {
        cfg.residual_tol = r;
    }
    if let Some(b) = a.max_precision_bits {
        cfg.max_precision_bits = b;
    }
    let q = a.common.quadrature();
    let mut results = Vec::new();
    for n in a.dim.lo..=a.dim.hi {
        let roots = find_family_roots(a.common.family, n, &q, &cfg)?;
        let report = classify_zeros(&roots, a.imag_tol);
        results.push(ZerosEntry { n, roots, report });
    }
    let summary: Vec<SummaryRow> = results
        .iter()
        .map(|e| SummaryRow {
            n: e.n,
            max_real_part: fmt17(e.report.max_real_part),
            all_negative_real: e.report.all_negative_real,
            all_left_half_plane: e.report.all_left_half_plane,
            max_abs_imag: fmt17(e.report.max_abs_imag_among_roots),
            precision_bits: e.roots.precision_bits,
        })
        .collect();
    match a.common.format {
        Format::Json => write_json(
            &a.common,
            &ZerosOutput {
                family: a.common.family,
                summary,
                results,
            },
        ),
        Format::Csv => write_csv(
            &a.common,
            &["n", "max_real_part", "all_negative_real", "all_left_half_plane", "max_abs_imag", "precision_bits"],
            summary
                .into_iter()
                .map(|s| {
                    vec![
                        s.n.to_string(),
                        s.max_real_part,
                        s.all_negative_real.to_string(),
                        s.all_left_half_plane.to_string(),
                        s.max_abs_imag,
                        s.precision_bits.to_string(),
                    ]
                })
                .collect(),
        ),
    }
}

fn cmd_converge(a: &ConvergeArgs) -> Result<(), Failure> {
    let profile = convergence_profile(a.common.family, &a.dims, a.radius, a.samples_circle, &a.common.quadrature())?;
    match a.common.format {
        Format::Json => write_json(&a.common, &profile),
        Format::Csv => write_csv(
            &a.common,
            &["n", "d_n"],
            profile
                .dims
                .iter()
                .zip(&profile.distances)
                .map(|(n, d)| vec![n.to_string(), fmt17(*d)])
                .collect(),
        ),
    }
}

fn cmd_mc_validate(a: &McArgs) -> Result<(), Failure> {
    let instance = FamilyInstance::new(a.common.family, a.dim, a.rho)?;
    let cfg = McConfig {
        samples: a.samples,
        seed: a.seed,
        chunk_size: a.chunk_size,
    };
    let table = validate_family(&instance, &a.t, &cfg, &a.common.quadrature())?;
    match a.common.format {
        Format::Json => write_json(&a.common, &table)?,
        Format::Csv => write_csv(
            &a.common,
            &["t", "poly", "mc", "stderr", "z"],
            table
                .rows
                .iter()
                .map(|r| vec![fmt17(r.t), fmt17(r.poly), fmt17(r.mc), fmt17(r.stderr), fmt17(r.z)])
                .collect(),
        )?,
    }
    if table.all_within() {
        Ok(())
    } else {
        let bad: Vec<String> = table.rows.iter().filter(|r| r.flagged).map(|r| format!("t={} z={:.2}", r.t, r.z)).collect();
        Err(Failure::Validation(format!("|z| > 4 at {}", bad.join(", "))))
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Failure::Usage("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    match &cli.command {
        Command::Coeffs(a) => cmd_coeffs(a),
        Command::Zeros(a) => cmd_zeros(a),
        Command::Converge(a) => cmd_converge(a),
        Command::McValidate(a) => cmd_mc_validate(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("steiner: {e}");
            ExitCode::from(e.code())
        }
    }
}
