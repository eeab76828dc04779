//! Batch command-line front end. Every subcommand is fully described by its
//! arguments, which round-trip through a JSON run configuration.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value, json};

use crate::constants::{BRANCH_THETA, COMMUTATOR_GAMMA, TARTAR_C1};
use crate::constructions::{ConstructionParams, construct};
use crate::energy::{EnergyBreakdown, evaluate, grid_surface, spectral_elastic};
use crate::error::Error;
use crate::fourier_lab::{Cone, ProbeRadii, commutator_probe, cone_split, low_frequency_mass};
use crate::geometry::{GridField, parse_field, rasterize, scene_svg, write_field, write_sidecar};
use crate::scaling::{
    Fit, PredictKey, ScalingReport, SweepConfig, decades, deficit_power_fit, power_fit,
    predicted_scaling, stretched_fit, sweep_lenient, to_csv,
};
use crate::spectral::nyquist;
use crate::wells::{
    Family, Polynomial, WellSet, format_rational, lamination_order_of_zero, make_well_set,
    parse_rational, rat_to_f64, verify_relation,
};

#[derive(Debug, Parser)]
#[command(name = "nuclab", version, about = "Nucleation energies, constructions and Fourier diagnostics")]
pub struct Cli {
    /// JSON run configuration. Its keys override the flags; with no
    /// subcommand, its "command" key selects one.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for sweeps (0: one per core). Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Build a construction, print its exact energy and write the requested files.
    Construct(ConstructArgs),
    /// Exact energy of a scene or parameter file, or spectral energy of a field file.
    Energy(EnergyArgs),
    /// Optimize a family over a volume grid and fit the scaling law.
    Sweep(SweepArgs),
    /// Fit a scaling law to a sweep CSV.
    Fit(FitArgs),
    /// Fourier cone, low-frequency and commutator diagnostics of a field file.
    Diagnose(DiagnoseArgs),
    /// Predicted scaling exponents.
    Predict(PredictArgs),
    /// Well set data, lamination order of zero and relation checks.
    Wells(WellsArgs),
}

/// Construction family parameters shared by `construct`.
#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct FamilyArgs {
    /// One of ball, lens21, diamond_nd, branch_rect21, branch_rect_nd,
    /// lens_branch_4w, double_branch_4w, tartar_k.
    #[arg(long)]
    pub family: Option<String>,
    /// Two-well volume fraction, decimal or p/q [default: 1/2].
    #[arg(long)]
    pub lambda: Option<String>,
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub l: Option<f64>,
    #[arg(long = "H")]
    #[serde(rename = "H")]
    pub h: Option<f64>,
    /// Lens size of lens_branch_4w, finest period of tartar_k.
    #[arg(long)]
    pub r: Option<f64>,
    /// Laminate order of tartar_k [default: round(sqrt(log L))].
    #[arg(long)]
    pub k: Option<usize>,
    /// Dimension [default: 2 for ball, 3 for diamond_nd and branch_rect_nd].
    #[arg(long)]
    pub n: Option<usize>,
    /// Refinement length fraction of double_branch_4w.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Volume of ball.
    #[arg(long = "V")]
    #[serde(rename = "V")]
    pub volume: Option<f64>,
}

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct ConstructArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub family: FamilyArgs,
    /// Read the parameters from a JSON file instead of the flags.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Surface weight [default: 1].
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Write the scene as JSON.
    #[arg(long)]
    pub scene: Option<PathBuf>,
    /// Write the rasterized field (with a JSON sidecar).
    #[arg(long)]
    pub field: Option<PathBuf>,
    /// Grid points per axis for --field [default: 256].
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Periodic box side over inclusion diameter for --field [default: 2].
    #[arg(long)]
    pub padding: Option<f64>,
    /// Write an SVG figure (planar scenes only).
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct EnergyArgs {
    /// Scene JSON written by `construct --scene`, a parameter JSON, or a field file.
    pub input: Option<PathBuf>,
    /// Surface weight [default: 1].
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepArgs {
    #[arg(long)]
    pub family: Option<String>,
    /// Decade range `a:b` of log10 V.
    #[arg(long)]
    pub decades: Option<String>,
    /// Grid points per decade [default: 1].
    #[arg(long)]
    pub per_decade: Option<usize>,
    /// Explicit volumes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub grid: Vec<f64>,
    /// Models to fit: power, stretched, deficit (repeatable) [default: power].
    #[arg(long)]
    pub fit: Vec<String>,
    #[arg(long)]
    pub lambda: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub theta: Option<f64>,
    /// Coefficient of the tartar_k order rule k = round(c sqrt(log L)).
    #[arg(long)]
    pub tartar_c1: Option<f64>,
    /// Coordinate-descent rounds.
    #[arg(long)]
    pub rounds: Option<usize>,
    /// Golden-section steps per coordinate.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Recorded in the output; the optimizer is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the rows as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct FitArgs {
    /// Sweep CSV with `V` and `E_total` columns.
    pub csv: Option<PathBuf>,
    /// power, stretched or deficit (repeatable) [default: power].
    #[arg(long)]
    pub model: Vec<String>,
    #[arg(long)]
    pub vmin: Option<f64>,
    #[arg(long)]
    pub vmax: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Diagnostic {
    Cones,
    Lowfreq,
    Commutator,
}

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct DiagnoseArgs {
    #[arg(value_enum)]
    pub kind: Option<Diagnostic>,
    /// Field file.
    pub field: Option<PathBuf>,
    /// Cone aperture [default: 0.3].
    #[arg(long)]
    pub mu: Option<f64>,
    /// Outer cone radius. `cones` and `lowfreq` take their single radius
    /// from here, else from --mu2 [default: Nyquist/2, lowfreq four lattice steps].
    #[arg(long)]
    pub mu1: Option<f64>,
    /// Inner radius of the commutator probe [default: mu1/4].
    #[arg(long)]
    pub mu2: Option<f64>,
    /// Exponent of the commutator's psi term.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Cone axis; every axis when absent.
    #[arg(long)]
    pub axis: Option<usize>,
    /// Constant of the cone-control inequality check [default: 1].
    #[arg(long)]
    pub constant: Option<f64>,
    /// Well set whose relations the commutator probe uses [default: from the sidecar].
    #[arg(long)]
    pub well_set: Option<String>,
    /// Explicit relation: source components (0-based, comma separated).
    #[arg(long, value_delimiter = ',')]
    pub from: Vec<usize>,
    #[arg(long)]
    pub to: Option<usize>,
    /// Explicit relation polynomial, ascending rational coefficients.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub poly: Vec<String>,
}

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct PredictArgs {
    /// Construction family.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Lamination order of the chain.
    #[arg(long)]
    pub m: Option<usize>,
    /// The one-plus-one well configuration in dimension n.
    #[arg(long)]
    pub one_plus_one: bool,
}

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct WellsArgs {
    /// two_well, four_well_2d, four_well_3d, eight_well_3d, tartar,
    /// single_well_rank1, symmetric_pair.
    #[arg(long)]
    pub set: Option<String>,
    #[arg(long)]
    pub lambda: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Largest lamination order tried [default: 10].
    #[arg(long)]
    pub max_order: Option<usize>,
}

/// Failure of a command, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Malformed invocation; exit code 2.
    Usage(String),
    /// The command ran and failed; exit code 1.
    Run(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::UnknownFamily(_) => CliError::Usage(e.to_string()),
            e => CliError::Run(e),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Run(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Run(e.into())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Run(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Run(e) => write!(f, "{e}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn need<T: Copy>(v: Option<T>, flag: &str, family: &str) -> CliResult<T> {
    v.ok_or_else(|| usage(format!("missing required parameter {flag} for {family}")))
}

fn parse_lambda(s: Option<&str>) -> CliResult<f64> {
    match s {
        None => Ok(0.5),
        Some(s) => parse_rational(s).map(|r| rat_to_f64(&r)).map_err(|e| usage(format!("--lambda: {e}"))),
    }
}

/// Parse argv, merge the configuration file and run. Returns the exit code.
pub fn main_with(args: impl IntoIterator<Item = impl Into<OsString> + Clone>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match resolve(cli).and_then(|(cmd, jobs)| dispatch(cmd, jobs, &mut out)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Command after applying the configuration file, and the worker count.
pub fn resolve(cli: Cli) -> CliResult<(Command, usize)> {
    let mut jobs = cli.jobs;
    let Some(path) = cli.config else {
        return cli.command.map(|c| (c, jobs)).ok_or_else(|| usage("no subcommand given (see --help)"));
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let Value::Object(mut cfg) = serde_json::from_str(&text)
        .map_err(|e| usage(format!("config {} is not JSON: {e}", path.display())))?
    else {
        return Err(usage("config must be a JSON object"));
    };
    if let Some(j) = cfg.remove("jobs") {
        jobs = j.as_u64().ok_or_else(|| usage("config key `jobs` must be a non-negative integer"))? as usize;
    }
    let mut merged = match cli.command {
        Some(c) => match serde_json::to_value(c)? {
            Value::Object(m) => m,
            _ => Map::new(),
        },
        None => Map::new(),
    };
    if let (Some(a), Some(b)) = (merged.get("command"), cfg.get("command")) {
        if a != b {
            return Err(usage(format!("config is for command {b}, command line runs {a}")));
        }
    }
    merged.extend(cfg);
    if !merged.contains_key("command") {
        return Err(usage("no subcommand given and the config has no `command` key"));
    }
    let cmd = serde_json::from_value(Value::Object(merged)).map_err(|e| usage(format!("bad config: {e}")))?;
    Ok((cmd, jobs))
}

pub fn dispatch(cmd: Command, jobs: usize, out: &mut dyn Write) -> CliResult<()> {
    match cmd {
        Command::Construct(a) => cmd_construct(&a, out),
        Command::Energy(a) => cmd_energy(&a, out),
        Command::Sweep(a) => cmd_sweep(&a, jobs, out),
        Command::Fit(a) => cmd_fit(&a, out),
        Command::Diagnose(a) => cmd_diagnose(&a, out),
        Command::Predict(a) => cmd_predict(&a, out),
        Command::Wells(a) => cmd_wells(&a, out),
    }
}

fn emit(out: &mut dyn Write, v: &impl Serialize) -> CliResult<()> {
    let s = serde_json::to_string_pretty(v)?;
    writeln!(out, "{s}")?;
    Ok(())
}

/// Construction parameters from family flags.
pub fn params_from_flags(a: &FamilyArgs) -> CliResult<ConstructionParams> {
    let fam = a.family.as_deref().ok_or_else(|| usage("missing required parameter --family"))?;
    let lambda = || parse_lambda(a.lambda.as_deref());
    let (l, h) = (|| need(a.l, "--L", fam), || need(a.h, "--H", fam));
    Ok(match fam {
        "ball" => ConstructionParams::Ball { n: a.n.unwrap_or(2), lambda: lambda()?, volume: need(a.volume, "--V", fam)? },
        "lens21" => ConstructionParams::Lens21 { lambda: lambda()?, l: l()?, h: h()? },
        "diamond_nd" => ConstructionParams::DiamondNd { n: a.n.unwrap_or(3), l: l()?, h: h()? },
        "branch_rect21" => ConstructionParams::BranchRect21 { lambda: lambda()?, l: l()?, h: h()? },
        "branch_rect_nd" => {
            ConstructionParams::BranchRectNd { n: a.n.unwrap_or(3), lambda: lambda()?, l: l()?, h: h()? }
        }
        "lens_branch_4w" => ConstructionParams::LensBranch4w { l: l()?, h: h()?, r: need(a.r, "--r", fam)? },
        "double_branch_4w" => {
            ConstructionParams::DoubleBranch4w { l: l()?, h: h()?, theta: a.theta.unwrap_or(BRANCH_THETA) }
        }
        "tartar_k" => {
            let l = l()?;
            let k = a.k.unwrap_or_else(|| ((TARTAR_C1 * l.ln().max(0.0).sqrt()).round() as usize).max(1));
            ConstructionParams::Tartar { l, h: h()?, r: need(a.r, "--r", fam)?, k }
        }
        other => return Err(Error::UnknownFamily(other.to_string()).into()),
    })
}

fn read_params(path: &Path) -> CliResult<ConstructionParams> {
    let v: Value = serde_json::from_str(&fs::read_to_string(path)?)?;
    let v = match v {
        Value::Object(mut m) if m.contains_key("params") => m.remove("params").unwrap_or(Value::Null),
        v => v,
    };
    serde_json::from_value(v).map_err(|e| CliError::Run(Error::Format(format!("{}: {e}", path.display()))))
}

fn cmd_construct(a: &ConstructArgs, out: &mut dyn Write) -> CliResult<()> {
    let params = match &a.params {
        Some(p) => read_params(p)?,
        None => params_from_flags(&a.family)?,
    };
    if a.svg.is_some() && params.dim() != 2 {
        return Err(Error::UnsupportedRender(format!("SVG export is 2D only, {} has n = {}", params.family(), params.dim())).into());
    }
    let c = construct(&params)?;
    let (energy, _) = evaluate(&c.scene, a.epsilon.unwrap_or(1.0))?;
    if let Some(path) = &a.scene {
        fs::write(path, serde_json::to_string_pretty(&c)?)?;
    }
    if let Some(path) = &a.field {
        let raster = rasterize(&c.scene, a.resolution.unwrap_or(256), a.padding.unwrap_or(2.0))?;
        write_field(&raster.field, path)?;
        let meta = json!({
            "well_set": c.scene.wells.name(),
            "family": params.family(),
            "params": params,
            "raster": raster.meta,
        });
        write_sidecar(path, &meta)?;
    }
    if let Some(path) = &a.svg {
        fs::write(path, scene_svg(&c.scene)?)?;
    }
    emit(out, &energy)
}

fn cmd_energy(a: &EnergyArgs, out: &mut dyn Write) -> CliResult<()> {
    let path = a.input.as_deref().ok_or_else(|| usage("missing input file"))?;
    let eps = a.epsilon.unwrap_or(1.0);
    let bytes = fs::read(path)?;
    if bytes.starts_with(b"NUCF") {
        let field = parse_field(&bytes)?;
        let s = spectral_elastic(&field)?;
        let mut e = EnergyBreakdown::new(s.elastic, grid_surface(&field), eps, field.support_volume());
        e.k0_term = Some(s.k0_term);
        e.resolution = Some(field.resolution);
        return emit(out, &e);
    }
    let params = read_params(path)?;
    let c = construct(&params)?;
    emit(out, &evaluate(&c.scene, eps)?.0)
}

fn parse_decades(s: &str) -> CliResult<(f64, f64)> {
    let bad = || usage(format!("--decades expects a:b, got `{s}`"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn fit_named(name: &str, pts: &[(f64, f64)]) -> CliResult<Fit> {
    match name {
        "power" => Ok(power_fit(pts)?),
        "stretched" => Ok(stretched_fit(pts)?),
        "deficit" => Ok(deficit_power_fit(pts)?),
        other => Err(usage(format!("unknown fit model `{other}` (power, stretched, deficit)"))),
    }
}

fn fits(models: &[String], pts: &[(f64, f64)]) -> CliResult<BTreeMap<String, Fit>> {
    let names: Vec<String> = if models.is_empty() { vec!["power".into()] } else { models.to_vec() };
    for m in &names {
        if !matches!(m.as_str(), "power" | "stretched" | "deficit") {
            return Err(usage(format!("unknown fit model `{m}` (power, stretched, deficit)")));
        }
    }
    names.iter().map(|m| fit_named(m, pts).map(|f| (m.clone(), f))).collect()
}

fn cmd_sweep(a: &SweepArgs, jobs: usize, out: &mut dyn Write) -> CliResult<()> {
    let family = a.family.as_deref().ok_or_else(|| usage("missing required parameter --family"))?;
    let grid = match (&a.decades, a.grid.is_empty()) {
        (Some(_), false) => return Err(usage("give either --decades or --grid, not both")),
        (Some(d), true) => {
            let (lo, hi) = parse_decades(d)?;
            if !(hi >= lo) {
                return Err(usage(format!("empty V grid: decades {lo}:{hi}")));
            }
            decades(lo, hi, a.per_decade.unwrap_or(1).max(1))
        }
        (None, _) => a.grid.clone(),
    };
    if grid.is_empty() {
        return Err(usage("empty V grid (use --decades a:b or --grid v1,v2,..)"));
    }
    let d = SweepConfig::default();
    let cfg = SweepConfig {
        rounds: a.rounds.unwrap_or(d.rounds),
        steps: a.steps.unwrap_or(d.steps),
        lambda: parse_lambda(a.lambda.as_deref())?,
        n: a.n,
        theta: a.theta.unwrap_or(d.theta),
        tartar_c1: a.tartar_c1.unwrap_or(d.tartar_c1),
        seed: a.seed.unwrap_or(d.seed),
        ..d
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Run(Error::param(format!("--jobs: {e}"))))?;
    let report: ScalingReport = pool.install(|| sweep_lenient(family, &grid, &cfg)).map_err(|e| match e {
        Error::Parameter(m) => usage(m),
        e => e.into(),
    })?;
    let pts: Vec<(f64, f64)> = report.rows.iter().map(|r| (r.volume, r.total)).collect();
    if let Some(path) = &a.csv {
        fs::write(path, to_csv(&report)?)?;
    }
    let fitted = fits(&a.fit, &pts)?;
    emit(
        out,
        &json!({
            "family": report.family,
            "well_set": report.well_set,
            "config": cfg,
            "rows": report.rows,
            "failures": report.failures,
            "fits": fitted,
        }),
    )
}

/// `(V, E_total)` pairs of a sweep CSV; rows without an energy are skipped.
pub fn read_sweep_csv(path: &Path) -> CliResult<Vec<(f64, f64)>> {
    let fmt = |m: String| CliError::Run(Error::Format(format!("{}: {m}", path.display())));
    let mut rd = csv::Reader::from_path(path).map_err(|e| fmt(e.to_string()))?;
    let headers = rd.headers().map_err(|e| fmt(e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name).ok_or_else(|| fmt(format!("no `{name}` column")));
    let (iv, ie) = (col("V")?, col("E_total")?);
    let mut pts = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| fmt(e.to_string()))?;
        let (v, e) = (rec.get(iv).unwrap_or(""), rec.get(ie).unwrap_or(""));
        if e.is_empty() {
            continue;
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| fmt(format!("not a number: `{s}`")));
        pts.push((num(v)?, num(e)?));
    }
    Ok(pts)
}

fn cmd_fit(a: &FitArgs, out: &mut dyn Write) -> CliResult<()> {
    let path = a.csv.as_deref().ok_or_else(|| usage("missing CSV file"))?;
    let lo = a.vmin.unwrap_or(f64::NEG_INFINITY);
    let hi = a.vmax.unwrap_or(f64::INFINITY);
    let pts: Vec<(f64, f64)> = read_sweep_csv(path)?.into_iter().filter(|p| p.0 >= lo && p.0 <= hi).collect();
    emit(out, &fits(&a.model, &pts)?)
}

fn read_sidecar(path: &Path) -> Option<Value> {
    let text = fs::read_to_string(path.with_extension("json")).ok()?;
    serde_json::from_str(&text).ok()
}

fn axes(field: &GridField, axis: Option<usize>) -> CliResult<Vec<usize>> {
    match axis {
        Some(j) if j >= field.n => Err(Error::DimensionMismatch { expected: field.n, got: j + 1 }.into()),
        Some(j) => Ok(vec![j]),
        None => Ok((0..field.n).collect()),
    }
}

/// Relation used by the commutator probe: explicit, or the first one of
/// the well set that verifies exactly.
fn probe_relation(a: &DiagnoseArgs, path: &Path) -> CliResult<(Vec<usize>, usize, Polynomial, String)> {
    if !a.poly.is_empty() {
        let to = a.to.ok_or_else(|| usage("--poly needs --to"))?;
        if a.from.is_empty() {
            return Err(usage("--poly needs --from"));
        }
        let p = Polynomial::from_strings(&a.poly).map_err(|e| usage(format!("--poly: {e}")))?;
        return Ok((a.from.clone(), to, p, "explicit".into()));
    }
    let name = a
        .well_set
        .clone()
        .or_else(|| read_sidecar(path)?.get("well_set")?.as_str().map(String::from))
        .ok_or_else(|| {
            CliError::Run(Error::Precondition(
                "no verified relation: give --well-set, --poly, or a field with a sidecar".into(),
            ))
        })?;
    let ws: WellSet = make_well_set(&Family::parse(&name, None, None)?)?;
    for rel in ws.relations() {
        if verify_relation(&ws, &rel.from, rel.to, &rel.coeffs).passed {
            return Ok((rel.from.clone(), rel.to, rel.coeffs.clone(), name));
        }
    }
    Err(CliError::Run(Error::Precondition(format!("no verified relation: well set {name} carries none"))))
}

fn cmd_diagnose(a: &DiagnoseArgs, out: &mut dyn Write) -> CliResult<()> {
    let kind = a.kind.ok_or_else(|| usage("missing diagnostic (cones, lowfreq, commutator)"))?;
    let path = a.field.as_deref().ok_or_else(|| usage("missing field file"))?;
    let field = parse_field(&fs::read(path)?)?;
    let mu = a.mu.unwrap_or(0.3);
    let nq = nyquist(&field);
    let mut rows = Vec::new();
    match kind {
        Diagnostic::Cones => {
            let radius = a.mu1.or(a.mu2).unwrap_or(nq / 2.0);
            let elastic = spectral_elastic(&field)?.elastic;
            let surface = grid_surface(&field);
            let rhs = elastic / (mu * mu) + surface / radius;
            let c = a.constant.unwrap_or(1.0);
            for j in axes(&field, a.axis)? {
                let s = cone_split(&field, &Cone::new(j, mu, radius)?, j)?;
                rows.push(json!({
                    "component": j, "axis": j, "mu": mu, "mu1": radius,
                    "inside": s.inside, "residual": s.residual, "total": s.total,
                    "elastic": elastic, "surface": surface, "rhs": rhs,
                    "ratio": if rhs > 0.0 { Some(s.residual / rhs) } else { None },
                    "constant": c, "holds": s.residual <= c * rhs,
                }));
            }
        }
        Diagnostic::Lowfreq => {
            let radius = a.mu1.or(a.mu2).unwrap_or(4.0 * 2.0 * std::f64::consts::PI / field.side);
            for j in axes(&field, a.axis)? {
                let lf = low_frequency_mass(&field, &Cone::new(j, mu, radius)?)?;
                rows.push(json!({
                    "component": j, "mu": mu, "radius": radius,
                    "mass": lf.mass, "sharp_mass": lf.sharp_mass, "bound": lf.bound,
                    "holds": lf.mass <= lf.bound,
                }));
            }
        }
        Diagnostic::Commutator => {
            let (from, to, p, source) = probe_relation(a, path)?;
            let mu1 = a.mu1.unwrap_or(nq / 2.0);
            let radii = ProbeRadii {
                mu: a.mu.unwrap_or(0.1),
                mu1,
                mu2: a.mu2.unwrap_or(mu1 / 4.0),
                gamma: a.gamma.unwrap_or(COMMUTATOR_GAMMA),
            };
            let rep = commutator_probe(&field, &from, to, &p, radii)?;
            rows.push(json!({
                "relation": source, "from": from, "to": to, "polynomial": p.coeff_strings(),
                "radii": radii, "report": rep,
            }));
        }
    }
    emit(out, &rows)
}

fn cmd_predict(a: &PredictArgs, out: &mut dyn Write) -> CliResult<()> {
    let key = match (&a.family, a.one_plus_one) {
        (Some(_), true) => return Err(usage("give either --family or --one-plus-one")),
        (Some(f), false) => PredictKey::Family { family: f.clone(), n: a.n },
        (None, true) => PredictKey::OnePlusOne { n: need(a.n, "--n", "one-plus-one")? },
        (None, false) => PredictKey::Chain { n: need(a.n, "--n", "a chain")?, m: need(a.m, "--m", "a chain")? },
    };
    let p = predicted_scaling(&key)?;
    let show = |r: num_rational::Rational64| {
        if *r.denom() == 1 { r.numer().to_string() } else { format!("{}/{}", r.numer(), r.denom()) }
    };
    emit(
        out,
        &json!({
            "key": key,
            "n": p.n,
            "small_volume": show(p.small_volume),
            "large_volume": p.large_volume.map(show),
            "epsilon_exponent": p.epsilon_exponent.map(show),
            "law": p.law,
            "status": p.status,
        }),
    )
}

fn cmd_wells(a: &WellsArgs, out: &mut dyn Write) -> CliResult<()> {
    let name = a.set.as_deref().ok_or_else(|| usage("missing required parameter --set"))?;
    let lambda = a.lambda.as_deref().map(parse_rational).transpose().map_err(|e| usage(format!("--lambda: {e}")))?;
    let ws = make_well_set(&Family::parse(name, lambda, a.n)?)?;
    let max_order = a.max_order.unwrap_or(10);
    let order = match lamination_order_of_zero(&ws, max_order) {
        Some(m) => json!(m),
        None => json!(format!("not reached({max_order})")),
    };
    let wells: Vec<Vec<String>> = ws.wells().iter().map(|w| w.iter().map(format_rational).collect()).collect();
    let relations: Vec<_> = ws.relations().iter().map(|r| verify_relation(&ws, &r.from, r.to, &r.coeffs)).collect();
    emit(
        out,
        &json!({
            "name": ws.name(),
            "n": ws.n(),
            "wells": wells,
            "lamination_order_of_zero": order,
            "relations": relations,
        }),
    )
}
