//! `gaussmet`: phase-estimation bounds, figure datasets, self-checks and
//! Monte-Carlo experiments for single-mode Gaussian states.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gaussmet_core::estimator::run_experiment;
use gaussmet_core::figures::{figure, Axis, FigureGrid, FigureName};
use gaussmet_core::fisher::{available_types, optimize_gaussian_fi};
use gaussmet_core::state::apply_thermal_channel;
use gaussmet_core::verify::{self, Suite};
use gaussmet_core::{ChannelParams, ExperimentConfig, MeasurementKind, MeasurementSpec, StateParams};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

const OUT_DIR_ENV: &str = "GAUSSMET_OUT_DIR";

#[derive(Parser)]
#[command(name = "gaussmet", version, about = "Gaussian phase-estimation bounds and experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// QFI, best Gaussian FI and the measurement achieving it.
    Bound {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        phi: f64,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Plot-ready CSV for one of the figure datasets.
    Figure {
        name: String,
        #[command(flatten)]
        grid: GridArgs,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run a named self-check suite.
    Verify {
        /// fi, sld, reductions, appendixD or all
        suite: String,
    },
    /// Maximum-likelihood Monte-Carlo experiment.
    Simulate {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        channel: ChannelArgs,
        /// True phase.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        phi: f64,
        #[arg(long, value_enum, default_value_t = MeasurementChoice::Optimal)]
        measurement: MeasurementChoice,
        /// Seed squeezing for `general`.
        #[arg(long)]
        s: Option<f64>,
        /// Seed angle for `general` and `homodyne`.
        #[arg(long, allow_negative_numbers = true)]
        psi: Option<f64>,
        #[arg(long, default_value_t = 1000)]
        shots: usize,
        #[arg(long, default_value_t = 2000)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = ExperimentConfig::DEFAULT_HALFWIDTH)]
        halfwidth: f64,
        /// Output directory; defaults to $GAUSSMET_OUT_DIR, then `.`.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Args, Clone, Copy)]
struct StateArgs {
    #[arg(long, allow_negative_numbers = true)]
    alpha: f64,
    /// Coherent phase; defaults to the QFI-maximizing `(π + θs)/2`.
    #[arg(long, allow_negative_numbers = true)]
    theta_c: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    r: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    theta_s: f64,
    #[arg(long, allow_negative_numbers = true)]
    nth: f64,
}

#[derive(Args, Clone, Copy)]
struct ChannelArgs {
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    eta: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    ne: f64,
}

#[derive(Args, Clone, Copy)]
struct GridArgs {
    #[arg(long)]
    x_min: Option<f64>,
    #[arg(long)]
    x_max: Option<f64>,
    #[arg(long)]
    x_points: Option<usize>,
    #[arg(long)]
    nth_min: Option<f64>,
    #[arg(long)]
    nth_max: Option<f64>,
    #[arg(long)]
    nth_points: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum MeasurementChoice {
    Optimal,
    Homodyne,
    Heterodyne,
    General,
}

/// Bad flag values, reported with exit code 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage<T, E: std::fmt::Display>(r: std::result::Result<T, E>) -> Result<T> {
    r.map_err(|e| Usage(e.to_string()).into())
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    parameters: BTreeMap<String, Value>,
    tool_version: String,
    seed: Option<u64>,
    timestamp: String,
}

impl RunManifest {
    fn new(command: &str, parameters: BTreeMap<String, Value>, seed: Option<u64>) -> Self {
        // SOURCE_DATE_EPOCH keeps manifests reproducible
        let timestamp = match std::env::var("SOURCE_DATE_EPOCH") {
            Ok(v) => v,
            Err(_) => std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs().to_string())
                .unwrap_or_default(),
        };
        Self {
            command: command.into(),
            parameters,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            seed,
            timestamp,
        }
    }

    /// Hash of everything but the timestamp, so reruns hash identically.
    fn content_hash(&self) -> String {
        let body = json!({
            "command": self.command,
            "parameters": self.parameters,
            "tool_version": self.tool_version,
            "seed": self.seed,
        });
        hex::encode(Sha256::digest(body.to_string().as_bytes()))
    }
}

impl StateArgs {
    fn params(&self) -> Result<StateParams> {
        let theta_c = self.theta_c.unwrap_or(0.5 * (std::f64::consts::PI + self.theta_s));
        usage(StateParams::new(self.alpha, theta_c, self.r, self.theta_s, self.nth))
    }

    fn record(&self, m: &mut BTreeMap<String, Value>) {
        m.insert("alpha".into(), json!(self.alpha));
        m.insert("theta_c".into(), json!(self.theta_c));
        m.insert("r".into(), json!(self.r));
        m.insert("theta_s".into(), json!(self.theta_s));
        m.insert("nth".into(), json!(self.nth));
    }
}

impl ChannelArgs {
    fn params(&self) -> Result<ChannelParams> {
        usage(ChannelParams::new(self.eta, self.ne))
    }

    fn record(&self, m: &mut BTreeMap<String, Value>) {
        m.insert("eta".into(), json!(self.eta));
        m.insert("ne".into(), json!(self.ne));
    }
}

fn spec_json(spec: &MeasurementSpec) -> Value {
    match spec.kind() {
        MeasurementKind::Homodyne => json!({
            "kind": "homodyne",
            "psi": spec.psi(),
            "quadrature_angle": spec.quadrature_angle(),
        }),
        MeasurementKind::GeneralDyne => json!({
            "kind": "general-dyne",
            "s": spec.s(),
            "psi": spec.psi(),
        }),
    }
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn emit(output: Option<&Path>, body: &[u8]) -> Result<()> {
    match output {
        Some(path) => fs::write(path, body).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(body)?;
            Ok(())
        }
    }
}

/// `out.csv` gets `out.csv.manifest.json`; stdout output gets none.
fn write_manifest_beside(output: Option<&Path>, manifest: &RunManifest) -> Result<()> {
    let Some(path) = output else { return Ok(()) };
    let mut name = path.as_os_str().to_owned();
    name.push(".manifest.json");
    fs::write(PathBuf::from(name), to_json(manifest)?).context("writing manifest")
}

fn to_json(v: &impl Serialize) -> Result<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(v)?;
    s.push(b'\n');
    Ok(s)
}

/// CSV with the manifest hash on a leading comment line.
fn csv_bytes(manifest: &RunManifest, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut buf = format!("# manifest-sha256: {}\n", manifest.content_hash()).into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush()?;
    }
    Ok(buf)
}

fn cmd_bound(state: StateArgs, channel: ChannelArgs, phi: f64, output: Option<PathBuf>) -> Result<()> {
    if !phi.is_finite() {
        return Err(Usage("--phi must be finite".into()).into());
    }
    let input = state.params()?;
    let p = apply_thermal_channel(&input, &channel.params()?);
    let rep = optimize_gaussian_fi(&p, phi);
    let closed: BTreeMap<String, f64> =
        available_types(&p).into_iter().map(|(t, f)| (format!("type_{t}"), f)).collect();
    let mut params = BTreeMap::new();
    state.record(&mut params);
    channel.record(&mut params);
    params.insert("phi".into(), json!(phi));
    let manifest = RunManifest::new("bound", params, None);
    let body = json!({
        "state": p,
        "qfi": rep.qfi,
        "fi": rep.fi,
        "ratio": rep.ratio,
        "measurement": spec_json(&rep.spec),
        "type_used": rep.type_used.map(|t| t.to_string()),
        "closed_form_fi": closed,
        "manifest_sha256": manifest.content_hash(),
    });
    emit(output.as_deref(), &to_json(&body)?)?;
    write_manifest_beside(output.as_deref(), &manifest)
}

fn axis(default: Axis, lo: Option<f64>, hi: Option<f64>, n: Option<usize>) -> Result<Axis> {
    usage(Axis::new(lo.unwrap_or(default.lo), hi.unwrap_or(default.hi), n.unwrap_or(default.points)))
}

fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        v.to_string()
    }
}

fn cmd_figure(name: &str, g: GridArgs, output: Option<PathBuf>) -> Result<()> {
    let name: FigureName = usage(name.parse())?;
    let d = FigureGrid::default_for(name);
    let grid = FigureGrid {
        x: axis(d.x, g.x_min, g.x_max, g.x_points)?,
        n_th: axis(d.n_th, g.nth_min, g.nth_max, g.nth_points)?,
    };
    let table = figure(name, &grid)?;
    let mut params = BTreeMap::new();
    params.insert("name".into(), json!(name.as_str()));
    params.insert("grid".into(), json!(grid));
    let manifest = RunManifest::new("figure", params, None);
    let rows = table.rows.iter().map(|r| r.iter().map(|&v| fmt_f64(v)).collect());
    emit(output.as_deref(), &csv_bytes(&manifest, &table.columns, rows)?)?;
    write_manifest_beside(output.as_deref(), &manifest)
}

fn cmd_verify(suite: &str) -> Result<bool> {
    let suite: Suite = usage(suite.parse())?;
    let checks = verify::run(suite);
    let mut out = std::io::stdout().lock();
    for c in &checks {
        writeln!(
            out,
            "{} {} [{}] value={:.3e} tol={:.1e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.point,
            c.value,
            c.tolerance
        )?;
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    writeln!(out, "{} checks, {failed} failed", checks.len())?;
    Ok(failed == 0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    state: StateArgs,
    channel: ChannelArgs,
    phi: f64,
    measurement: MeasurementChoice,
    s: Option<f64>,
    psi: Option<f64>,
    shots: usize,
    trials: usize,
    seed: u64,
    halfwidth: f64,
    out: Option<PathBuf>,
) -> Result<()> {
    let p = state.params()?;
    let ch = channel.params()?;
    let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| Usage(format!("--{flag} is required for this measurement")));
    let spec = match measurement {
        MeasurementChoice::Optimal => optimize_gaussian_fi(&apply_thermal_channel(&p, &ch), phi).spec,
        MeasurementChoice::Homodyne => usage(MeasurementSpec::homodyne(need(psi, "psi")?))?,
        MeasurementChoice::Heterodyne => MeasurementSpec::heterodyne(),
        MeasurementChoice::General => usage(MeasurementSpec::general_dyne(need(s, "s")?, need(psi, "psi")?))?,
    };
    let config = ExperimentConfig { channel: ch, search_halfwidth: halfwidth, ..ExperimentConfig::new(p, spec, phi, shots, trials, seed) };
    usage(config.validate())?;
    let report = run_experiment(&config)?;

    let mut params = BTreeMap::new();
    state.record(&mut params);
    channel.record(&mut params);
    params.insert("phi".into(), json!(phi));
    params.insert("measurement".into(), spec_json(&spec));
    params.insert("shots".into(), json!(shots));
    params.insert("trials".into(), json!(trials));
    params.insert("halfwidth".into(), json!(halfwidth));
    let manifest = RunManifest::new("simulate", params, Some(seed));

    let dir = out_dir(out);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let summary = json!({
        "mse": report.mse,
        "bias": report.bias,
        "cr_bound": report.cr_bound,
        "saturation_ratio": report.saturation_ratio,
        "fi_used": report.fi_used,
        "mse_std_error": report.mse_std_error,
        "boundary_hits": report.boundary_hits,
        "shots": report.shots,
        "trials": report.trials,
        "manifest_sha256": manifest.content_hash(),
    });
    let rows = report.estimates.iter().enumerate().map(|(i, e)| vec![i.to_string(), fmt_f64(*e)]);
    fs::write(dir.join("simulate_estimates.csv"), csv_bytes(&manifest, &["trial", "phi_hat"], rows)?)?;
    fs::write(dir.join("simulate_report.json"), to_json(&summary)?)?;
    fs::write(dir.join("simulate_manifest.json"), to_json(&manifest)?)?;
    emit(None, &to_json(&summary)?)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Bound { state, channel, phi, output } => cmd_bound(state, channel, phi, output).map(|_| true),
        Command::Figure { name, grid, output } => cmd_figure(&name, grid, output).map(|_| true),
        Command::Verify { suite } => cmd_verify(&suite),
        Command::Simulate { state, channel, phi, measurement, s, psi, shots, trials, seed, halfwidth, out_dir } => {
            cmd_simulate(state, channel, phi, measurement, s, psi, shots, trials, seed, halfwidth, out_dir).map(|_| true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if e.is::<Usage>() { 2 } else { 1 })
        }
    }
}
