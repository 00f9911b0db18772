//! `fpent`: entropy of quantized random variables from the command line.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 bad flags or parameters,
//! 3 numerical failure (the message names the failing component).

mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use fpent::bounds::{default_t_grid, kl_bounds, smoothing_epsilon};
use fpent::entropy::{exact_entropy, full_report};
use fpent::mc::{mc_entropy, mc_entropy_mvg, McConfig, McEstimate};
use fpent::sweep::{run_sweep, Quantities, SweepMode, SweepSpec, TOOL_NAME};
use fpent::{Distribution, FpFormat, MultivariateGaussian, Quantizer};

use output::{csv_writer, emit, emit_with, metadata_block, num};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "fpent", version, about = "Entropy of random variables rounded to a floating-point format")]
struct Cli {
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true, env = "FPENT_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dump the representable values and their rounding bins.
    Grid {
        #[command(flatten)]
        format: FormatArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exact entropy, both approximations, and their ingredients.
    Entropy {
        #[arg(long)]
        dist: Distribution,
        #[command(flatten)]
        format: FormatArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Entropy against scale, precision, or exponent bits.
    Sweep(SweepArgs),
    /// KL divergence bounds and the smoothing error term.
    Bounds {
        #[arg(long)]
        dist: Distribution,
        #[command(flatten)]
        format: FormatArgs,
        /// Also write per-bin terms as CSV to this path.
        #[arg(long)]
        per_bin: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Monte-Carlo estimate of the quantized entropy.
    Mc {
        #[arg(long, required_unless_present = "cov", conflicts_with = "cov")]
        dist: Option<Distribution>,
        /// Covariance of a zero-mean Gaussian vector, rows separated by ';'
        /// (e.g. "1,0.5;0.5,1"). Each coordinate is rounded separately.
        #[arg(long)]
        cov: Option<String>,
        #[command(flatten)]
        format: FormatArgs,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args, Clone, Copy)]
struct FormatArgs {
    /// Significand bits p, counting the implicit leading one.
    #[arg(long = "precision", visible_alias = "p")]
    precision: u32,
    /// Exponent bits E.
    #[arg(long = "exponent-bits", visible_alias = "E")]
    exponent_bits: u32,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file, written atomically; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutFormat>,
}

#[derive(Args, Clone, Copy)]
struct McArgs {
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Add the Miller–Madow correction.
    #[arg(long)]
    bias_correction: bool,
}

impl From<McArgs> for McConfig {
    fn from(a: McArgs) -> Self {
        McConfig {
            samples: a.samples,
            seed: a.seed,
            bias_correction: a.bias_correction,
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    /// Repeat to sweep several distributions into one file.
    #[arg(long = "dist", required = true)]
    dists: Vec<Distribution>,
    /// Fixed precision (scale and exponent modes).
    #[arg(long = "precision", visible_alias = "p")]
    precision: Option<u32>,
    /// Fixed exponent bits (scale and precision modes).
    #[arg(long = "exponent-bits", visible_alias = "E")]
    exponent_bits: Option<u32>,
    /// Number of log-spaced scales.
    #[arg(long, default_value_t = 500)]
    points: usize,
    /// Smallest scale.
    #[arg(long)]
    min: Option<f64>,
    /// Largest scale.
    #[arg(long)]
    max: Option<f64>,
    #[arg(long)]
    p_min: Option<u32>,
    #[arg(long)]
    p_max: Option<u32>,
    #[arg(long)]
    e_min: Option<u32>,
    #[arg(long)]
    e_max: Option<u32>,
    /// Columns to compute.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "exact,approx-s,approx-tilde")]
    quantities: Vec<Quantity>,
    #[command(flatten)]
    mc: McArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Scale,
    Precision,
    Exponent,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum Quantity {
    Exact,
    ApproxS,
    ApproxTilde,
    Bounds,
    Mc,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum OutFormat {
    Csv,
    Json,
}

/// A library error raised while computing, tagged with the stage it came
/// from. Maps to exit code 3.
#[derive(Debug)]
struct NumericalFailure {
    component: &'static str,
    source: fpent::Error,
}

impl fmt::Display for NumericalFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "numerical failure in {}: {}", self.component, self.source)
    }
}

impl std::error::Error for NumericalFailure {}

fn numeric<T>(component: &'static str, r: fpent::Result<T>) -> Result<T> {
    r.map_err(|source| NumericalFailure { component, source }.into())
}

fn usage_error(kind: ErrorKind, msg: impl fmt::Display) -> ! {
    Cli::command().error(kind, msg).exit()
}

fn make_format(p: u32, e: u32) -> FpFormat {
    FpFormat::new(p, e).unwrap_or_else(|e| usage_error(ErrorKind::ValueValidation, e))
}

fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

fn base_metadata(mode: &str, f: &FpFormat) -> Vec<(&'static str, String)> {
    vec![
        ("tool", TOOL_NAME.to_string()),
        ("version", VERSION.to_string()),
        ("mode", mode.to_string()),
        ("format", format!("p={},E={}", f.precision(), f.exponent_bits())),
    ]
}

fn write_json<T: Serialize>(out: &OutputArgs, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(out.out.as_deref(), &text)
}

fn cmd_grid(fa: FormatArgs, out: OutputArgs) -> Result<()> {
    let f = make_format(fa.precision, fa.exponent_bits);
    let as_json = out.format == Some(OutFormat::Json);
    emit_with(out.out.as_deref(), |w| {
        if as_json {
            write!(w, "{{\"precision\":{},\"exponent_bits\":{},\"bins\":[", f.precision(), f.exponent_bits())?;
            for i in 0..f.bin_count() {
                let b = f.bin(i);
                let sep = if i == 0 { "\n" } else { ",\n" };
                let row = json!({"index": i, "value": b.value, "lower": b.lower, "upper": b.upper, "width": b.width()});
                write!(w, "{sep}{row}")?;
            }
            writeln!(w, "\n]}}")?;
            return Ok(());
        }
        let mut meta = base_metadata("grid", &f);
        meta.push(("timestamp", timestamp()));
        w.write_all(metadata_block(&meta).as_bytes())?;
        let mut c = csv_writer(w);
        c.write_record(["index", "value", "lower", "upper", "width"])?;
        for i in 0..f.bin_count() {
            let b = f.bin(i);
            c.write_record([i.to_string(), num(b.value), num(b.lower), num(b.upper), num(b.width())])?;
        }
        c.flush()?;
        Ok(())
    })
}

fn cmd_entropy(dist: Distribution, fa: FormatArgs, out: OutputArgs) -> Result<()> {
    let f = make_format(fa.precision, fa.exponent_bits);
    let r = numeric("entropy report", full_report(&dist, &f))?;
    if out.format == Some(OutFormat::Csv) {
        let mut meta = base_metadata("entropy", &f);
        meta.push(("dist", dist.to_string()));
        meta.push(("timestamp", timestamp()));
        let c = &r.components;
        let cols = [
            ("exact_H", Some(r.exact_H)),
            ("approx_H_tilde", Some(r.approx_H_tilde)),
            ("approx_H_s", Some(r.approx_H_s)),
            ("closed_form_H_s", r.closed_form_H_s),
            ("p_overflow", Some(r.p_overflow)),
            ("p_underflow", Some(r.p_underflow)),
            ("differential_entropy", Some(c.differential_entropy)),
            ("expected_log_bin_size", Some(c.expected_log_bin_size)),
            ("expected_log_smooth_bin_size", Some(c.expected_log_smooth_bin_size)),
            ("abs_log_moment", Some(c.abs_log_moment)),
        ];
        return emit_with(out.out.as_deref(), |w| {
            w.write_all(metadata_block(&meta).as_bytes())?;
            let mut c = csv_writer(w);
            c.write_record(cols.iter().map(|(k, _)| *k))?;
            c.write_record(cols.iter().map(|(_, v)| v.map(num).unwrap_or_default()))?;
            c.flush()?;
            Ok(())
        });
    }
    let mut value = json!({
        "tool": TOOL_NAME,
        "version": VERSION,
        "dist": dist.to_string(),
        "precision": f.precision(),
        "exponent_bits": f.exponent_bits(),
    });
    merge(&mut value, serde_json::to_value(r)?);
    write_json(&out, &value)
}

fn merge(into: &mut serde_json::Value, from: serde_json::Value) {
    if let (Some(a), serde_json::Value::Object(b)) = (into.as_object_mut(), from) {
        a.extend(b);
    }
}

fn cmd_sweep(a: SweepArgs) -> Result<()> {
    let missing = |what: &str| -> ! { usage_error(ErrorKind::MissingRequiredArgument, format!("{what} is required for this mode")) };
    let quantities = Quantities {
        exact: a.quantities.contains(&Quantity::Exact),
        approx_s: a.quantities.contains(&Quantity::ApproxS),
        approx_tilde: a.quantities.contains(&Quantity::ApproxTilde),
        bounds: a.quantities.contains(&Quantity::Bounds),
        mc: a.quantities.contains(&Quantity::Mc).then(|| a.mc.into()),
    };
    let spec = match a.mode {
        Mode::Scale => SweepSpec::scale(
            a.dists,
            a.precision.unwrap_or_else(|| missing("--precision")),
            a.exponent_bits.unwrap_or_else(|| missing("--exponent-bits")),
            a.min.unwrap_or_else(|| missing("--min")),
            a.max.unwrap_or_else(|| missing("--max")),
            a.points,
        ),
        Mode::Precision => SweepSpec::precision(
            a.dists,
            a.exponent_bits.unwrap_or_else(|| missing("--exponent-bits")),
            a.p_min.unwrap_or_else(|| missing("--p-min")),
            a.p_max.unwrap_or_else(|| missing("--p-max")),
        ),
        Mode::Exponent => SweepSpec::exponent(
            a.dists,
            a.precision.unwrap_or_else(|| missing("--precision")),
            a.e_min.unwrap_or_else(|| missing("--e-min")),
            a.e_max.unwrap_or_else(|| missing("--e-max")),
        ),
    }
    .with_quantities(quantities);
    let values = spec.values().unwrap_or_else(|e| usage_error(ErrorKind::ValueValidation, e));
    for v in values {
        match spec.mode {
            SweepMode::Scale => make_format(spec.precision, spec.exponent_bits),
            SweepMode::Precision => make_format(v as u32, spec.exponent_bits),
            SweepMode::Exponent => make_format(spec.precision, v as u32),
        };
    }
    let mut result = numeric("sweep", run_sweep(&spec))?;
    result.metadata.push(("timestamp".into(), timestamp()));
    if a.output.format == Some(OutFormat::Json) {
        return write_json(&a.output, &result);
    }
    emit(a.output.out.as_deref(), &result.to_csv())
}

fn cmd_bounds(dist: Distribution, fa: FormatArgs, per_bin: Option<PathBuf>, out: OutputArgs) -> Result<()> {
    if out.format == Some(OutFormat::Csv) {
        usage_error(ErrorKind::ValueValidation, "bounds writes JSON; use --per-bin for CSV");
    }
    let f = make_format(fa.precision, fa.exponent_bits);
    let mut kl = numeric("kl_bounds", kl_bounds(&dist, &f, &default_t_grid(), per_bin.is_some()))?;
    let smoothing = numeric("smoothing_epsilon", smoothing_epsilon(&dist, &f))?;
    if let (Some(path), Some(bins)) = (&per_bin, kl.per_bin.take()) {
        let mut meta = base_metadata("bounds", &f);
        meta.push(("dist", dist.to_string()));
        meta.push(("timestamp", timestamp()));
        emit_with(Some(path), |w| {
            w.write_all(metadata_block(&meta).as_bytes())?;
            let mut c = csv_writer(w);
            c.write_record(["index", "lower", "upper", "p", "g", "lambda", "kl", "upper_bound", "lower_bound"])?;
            for b in &bins {
                c.write_record([
                    b.index.to_string(),
                    num(b.lower),
                    num(b.upper),
                    num(b.p),
                    num(b.g),
                    num(b.lambda),
                    num(b.kl),
                    num(b.upper_bound),
                    num(b.lower_bound),
                ])?;
            }
            c.flush()?;
            Ok(())
        })?;
    }
    write_json(
        &out,
        &json!({
            "tool": TOOL_NAME,
            "version": VERSION,
            "dist": dist.to_string(),
            "precision": f.precision(),
            "exponent_bits": f.exponent_bits(),
            "kl_bounds": kl,
            "smoothing": smoothing,
        }),
    )
}

fn parse_cov(text: &str) -> MultivariateGaussian {
    fn bad(text: &str, e: impl fmt::Display) -> ! {
        usage_error(ErrorKind::ValueValidation, format!("invalid --cov '{text}': {e}"))
    }
    let rows: Vec<Vec<f64>> = text
        .split(';')
        .map(|r| r.split(',').map(|v| v.trim().parse::<f64>().map_err(|e| e.to_string())).collect())
        .collect::<std::result::Result<_, _>>()
        .unwrap_or_else(|e| bad(text, e));
    let d = rows.len();
    if rows.iter().any(|r| r.len() != d) {
        bad(text, format!("expected a square matrix with {d} entries per row"));
    }
    MultivariateGaussian::new(d, rows.concat()).unwrap_or_else(|e| bad(text, e))
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct McOutput {
    tool: &'static str,
    version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    dist: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    covariance: Option<String>,
    precision: u32,
    exponent_bits: u32,
    seed: u64,
    bias_correction: bool,
    #[serde(flatten)]
    estimate: McEstimate,
    /// Exact entropy for comparison, when it is cheap to get.
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_H: Option<f64>,
}

fn cmd_mc(dist: Option<Distribution>, cov: Option<String>, fa: FormatArgs, mc: McArgs, out: OutputArgs) -> Result<()> {
    let f = make_format(fa.precision, fa.exponent_bits);
    let cfg: McConfig = mc.into();
    if cfg.samples == 0 {
        usage_error(ErrorKind::ValueValidation, "--samples must be positive");
    }
    let (estimate, exact) = match (&dist, &cov) {
        (Some(d), _) => (numeric("monte carlo", mc_entropy(d, &f, &cfg))?, Some(exact_entropy(d, &f))),
        (None, Some(c)) => (numeric("monte carlo", mc_entropy_mvg(&parse_cov(c), &f, &cfg))?, None),
        (None, None) => unreachable!("clap requires --dist or --cov"),
    };
    if out.format == Some(OutFormat::Csv) {
        let mut meta = base_metadata("mc", &f);
        meta.push(("dist", dist.map(|d| d.to_string()).or(cov).unwrap_or_default()));
        meta.push(("timestamp", timestamp()));
        return emit_with(out.out.as_deref(), |w| {
            w.write_all(metadata_block(&meta).as_bytes())?;
            let mut c = csv_writer(w);
            c.write_record(["estimate", "std_error", "plug_in", "occupied_bins", "samples", "seed", "exact_H"])?;
            c.write_record([
                num(estimate.estimate),
                num(estimate.std_error),
                num(estimate.plug_in),
                estimate.occupied_bins.to_string(),
                estimate.samples.to_string(),
                cfg.seed.to_string(),
                exact.map(num).unwrap_or_default(),
            ])?;
            c.flush()?;
            Ok(())
        });
    }
    write_json(
        &out,
        &McOutput {
            tool: TOOL_NAME,
            version: VERSION,
            dist: dist.map(|d| d.to_string()),
            covariance: cov,
            precision: f.precision(),
            exponent_bits: f.exponent_bits(),
            seed: cfg.seed,
            bias_correction: cfg.bias_correction,
            estimate,
            exact_H: exact,
        },
    )
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("cannot start the worker pool")?;
    }
    match cli.command {
        Command::Grid { format, output } => cmd_grid(format, output),
        Command::Entropy { dist, format, output } => cmd_entropy(dist, format, output),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Bounds {
            dist,
            format,
            per_bin,
            output,
        } => cmd_bounds(dist, format, per_bin, output),
        Command::Mc {
            dist,
            cov,
            format,
            mc,
            output,
        } => cmd_mc(dist, cov, format, mc, output),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fpent: {e:#}");
            if e.downcast_ref::<NumericalFailure>().is_some() {
                ExitCode::from(3)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
