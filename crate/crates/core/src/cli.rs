//! Command-line front end: parameter resolution, dispatch and file emission.
//!
//! Every data file starts with a JSON header carrying the tool version, schema version,
//! subcommand and the full resolved parameter set. CSV files put the header on a first line
//! prefixed by `# `; JSON files wrap it as `{"header": .., "columns": .., "rows": ..}`.
//! Numbers are written in shortest round-trip form, so identical runs give identical bytes.
//!
//! Parameters come from flags, then from an optional JSON config file, then from defaults.
//! The output directory falls back to `FIVEVERTEX_OUT` and then to the working directory.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bethe::{verify_against_oracle, ModelParams, VerificationRecord, ORACLE_MAX_N};
use crate::identities::identity_suite;
use crate::limitshape::{
    arctic_boundary, boundary_svg, bpp_g_sheet, default_grid, shape_grid, ArcticCurve, BoundaryFunction,
    FacetHeights, LimitShapeSample, Piece, Sheet,
};
use crate::mcmc::{sample_mean_height_parallel, ChainConfig, HexDomain, RunManifest};
use crate::thermo::{free_energy, surface_tension, SlopePoint};
use crate::{Error, Result};

/// Version of the file layouts written by this module.
pub const SCHEMA_VERSION: u32 = 1;
/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "FIVEVERTEX_OUT";
/// Exit status of a verification run whose checks did not all pass.
pub const EXIT_VERIFY_FAILED: i32 = 1;
/// Relative tolerance for the Bethe-versus-oracle comparison.
pub const BETHE_TOL: f64 = 1e-9;

const MAX_GRID: usize = 2001;
const MAX_CHAINS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    /// `g(u) = (1-u)(u-r^2)/r^2`.
    Quadratic,
    /// Boxed plane partition.
    Bpp,
    /// `g = 0`.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Bethe,
    Identities,
}

#[derive(Debug, Parser)]
#[command(name = "fivevertex", version, about = "Five-vertex model computations")]
pub struct Cli {
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON file of parameter defaults; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Surface tension on a slope grid.
    Tension(TensionArgs),
    /// Free energy on a field grid.
    FreeEnergy(FreeEnergyArgs),
    /// Arctic boundary polylines.
    Arctic(ArcticArgs),
    /// Interior limit-shape samples.
    Shape(ShapeArgs),
    /// Heat-bath Monte Carlo on a hexagon.
    Simulate(SimulateArgs),
    /// Verification suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct TensionArgs {
    #[arg(long)]
    pub r: Option<f64>,
    /// Points per slope axis.
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FreeEnergyArgs {
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_max: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y_max: Option<f64>,
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ArcticArgs {
    #[arg(long, value_enum)]
    pub shape: Option<ShapeKind>,
    #[arg(long)]
    pub r: Option<f64>,
    /// Samples per piece.
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ShapeArgs {
    #[arg(long, value_enum)]
    pub shape: Option<ShapeKind>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub re_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub re_max: Option<f64>,
    #[arg(long)]
    pub im_max: Option<f64>,
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub shape: Option<ShapeKind>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub sweeps: Option<u64>,
    #[arg(long)]
    pub burnin: Option<u64>,
    #[arg(long)]
    pub thinning: Option<u64>,
    /// Independent chains, run on separate threads.
    #[arg(long)]
    pub chains: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Option<Suite>,
    /// Ring size.
    #[arg(long = "N")]
    pub big_n: Option<usize>,
    /// Number of paths.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long = "X", allow_hyphen_values = true)]
    pub x: Option<f64>,
    #[arg(long = "Y", allow_hyphen_values = true)]
    pub y: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random points per identity.
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensionParams {
    pub r: f64,
    pub grid: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeEnergyParams {
    pub r: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub grid: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcticParams {
    pub shape: ShapeKind,
    pub r: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeParams {
    pub shape: ShapeKind,
    pub r: f64,
    pub re_min: f64,
    pub re_max: f64,
    pub im_max: f64,
    pub grid: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateParams {
    pub shape: ShapeKind,
    pub n: usize,
    pub r: f64,
    pub seed: u64,
    pub sweeps: u64,
    pub burnin: u64,
    pub thinning: u64,
    pub chains: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyParams {
    pub suite: Suite,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub n: usize,
    pub r: f64,
    #[serde(rename = "X")]
    pub x: f64,
    #[serde(rename = "Y")]
    pub y: f64,
    pub seed: u64,
    pub samples: usize,
}

/// A validated subcommand with all parameters resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "params", rename_all = "kebab-case")]
pub enum Task {
    Tension(TensionParams),
    FreeEnergy(FreeEnergyParams),
    Arctic(ArcticParams),
    Shape(ShapeParams),
    Simulate(SimulateParams),
    Verify(VerifyParams),
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Tension(_) => "tension",
            Task::FreeEnergy(_) => "free-energy",
            Task::Arctic(_) => "arctic",
            Task::Shape(_) => "shape",
            Task::Simulate(_) => "simulate",
            Task::Verify(_) => "verify",
        }
    }

    fn params_value(&self) -> Value {
        serde_json::to_value(self).expect("parameters serialize")["params"].clone()
    }
}

/// Everything needed for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunPlan {
    pub task: Task,
    pub out: PathBuf,
    pub format: Format,
}

/// Result of a run: files written and, for verification, whether every check passed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub command: String,
    pub files: Vec<PathBuf>,
    pub passed: bool,
}

/// The JSON header block at the top of every data file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileHeader {
    pub tool: String,
    pub version: String,
    pub schema: u32,
    pub command: String,
    pub params: Value,
    pub columns: Vec<String>,
}

/// A numeric table with named columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

fn check_r(r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid(format!("r must be positive and finite, got {r}")));
    }
    Ok(())
}

fn check_grid(name: &str, v: usize, min: usize) -> Result<()> {
    if v < min || v > MAX_GRID {
        return Err(invalid(format!("{name} must lie in [{min}, {MAX_GRID}], got {v}")));
    }
    Ok(())
}

impl Task {
    /// Range checks applied before dispatch.
    pub fn validate(&self) -> Result<()> {
        match self {
            Task::Tension(p) => {
                check_r(p.r)?;
                check_grid("grid", p.grid, 2)
            }
            Task::FreeEnergy(p) => {
                check_r(p.r)?;
                check_grid("grid", p.grid, 1)?;
                if !(p.x_min <= p.x_max && p.y_min <= p.y_max) || ![p.x_min, p.x_max, p.y_min, p.y_max].iter().all(|v| v.is_finite()) {
                    return Err(invalid("field ranges must be finite and ordered"));
                }
                let ceiling = ModelParams::new(p.r, 0.0, 0.0)?.y_ceiling();
                if p.y_max >= ceiling {
                    return Err(Error::Range(format!("Y up to {} reaches the ceiling {ceiling}", p.y_max)));
                }
                Ok(())
            }
            Task::Arctic(p) => {
                check_r(p.r)?;
                check_grid("points", p.points, 2)?;
                if p.shape == ShapeKind::Zero {
                    return Err(Error::Unsupported("the zero boundary function has no arctic curve".into()));
                }
                Ok(())
            }
            Task::Shape(p) => {
                check_r(p.r)?;
                check_grid("grid", p.grid, 1)?;
                if !(p.re_min <= p.re_max && p.im_max > 0.0) || !(p.re_min.is_finite() && p.re_max.is_finite() && p.im_max.is_finite()) {
                    return Err(invalid("u ranges must be finite and ordered with im_max > 0"));
                }
                Ok(())
            }
            Task::Simulate(p) => {
                check_r(p.r)?;
                if p.shape != ShapeKind::Bpp {
                    return Err(Error::Unsupported("simulation is implemented for the hexagon only".into()));
                }
                HexDomain::new(p.n)?;
                if p.chains == 0 || p.chains > MAX_CHAINS {
                    return Err(invalid(format!("chains must lie in [1, {MAX_CHAINS}]")));
                }
                self.chain_config().expect("simulate").validate()
            }
            Task::Verify(p) => {
                if p.suite == Suite::Bethe {
                    ModelParams::new(p.r, p.x, p.y)?.regime()?;
                    if p.big_n == 0 || p.big_n > ORACLE_MAX_N || p.n > p.big_n {
                        return Err(Error::Size(format!(
                            "need 0 <= n <= N <= {ORACLE_MAX_N}, got N = {}, n = {}",
                            p.big_n, p.n
                        )));
                    }
                } else if p.samples == 0 {
                    return Err(invalid("samples must be positive"));
                }
                Ok(())
            }
        }
    }

    fn chain_config(&self) -> Option<ChainConfig> {
        match self {
            Task::Simulate(p) => Some(ChainConfig {
                r: p.r,
                sweeps: p.sweeps,
                burnin: p.burnin,
                seed: p.seed,
                thinning: p.thinning,
            }),
            _ => None,
        }
    }
}

/// Config-file values by parameter name, consumed as they are resolved.
struct Resolver {
    config: BTreeMap<String, Value>,
}

impl Resolver {
    fn new(config: Option<&Path>) -> Result<Self> {
        let config = match config {
            None => BTreeMap::new(),
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                match serde_json::from_str::<Value>(&text) {
                    Ok(Value::Object(m)) => m.into_iter().collect(),
                    Ok(_) => return Err(invalid("config file must hold a JSON object")),
                    Err(e) => return Err(invalid(format!("config file: {e}"))),
                }
            }
        };
        Ok(Resolver { config })
    }

    fn take<T: DeserializeOwned>(&mut self, key: &str) -> Result<Option<T>> {
        match self.config.remove(key) {
            None => Ok(None),
            Some(v) => serde_json::from_value(v).map(Some).map_err(|e| invalid(format!("config key {key}: {e}"))),
        }
    }

    fn get<T: DeserializeOwned>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T> {
        let from_config = self.take(key)?;
        Ok(flag.or(from_config).unwrap_or(default))
    }

    fn finish(self) -> Result<()> {
        if let Some(k) = self.config.keys().next() {
            return Err(invalid(format!("unknown config key {k}")));
        }
        Ok(())
    }
}

impl RunPlan {
    /// Resolves flags against the config file, the environment and the defaults.
    pub fn from_cli(cli: Cli, env_out: Option<PathBuf>) -> Result<RunPlan> {
        let mut cfg = Resolver::new(cli.config.as_deref())?;
        let out_cfg: Option<PathBuf> = cfg.take("out")?;
        let out = cli.out.or(out_cfg).or(env_out).unwrap_or_else(|| PathBuf::from("."));
        let format_cfg: Option<Format> = cfg.take("format")?;
        let format_given = cli.format.or(format_cfg);
        let task = match cli.command {
            CliCommand::Tension(a) => Task::Tension(TensionParams {
                r: cfg.get("r", a.r, 0.7)?,
                grid: cfg.get("grid", a.grid, 21)?,
            }),
            CliCommand::FreeEnergy(a) => {
                let r = cfg.get("r", a.r, 0.7)?;
                let ceiling = if r < 1.0 && r > 0.0 { -(1.0 - r * r).ln() } else { f64::INFINITY };
                Task::FreeEnergy(FreeEnergyParams {
                    r,
                    x_min: cfg.get("x_min", a.x_min, -2.0)?,
                    x_max: cfg.get("x_max", a.x_max, 2.0)?,
                    y_min: cfg.get("y_min", a.y_min, -2.0)?,
                    y_max: cfg.get("y_max", a.y_max, (ceiling - 0.05).min(2.0))?,
                    grid: cfg.get("grid", a.grid, 21)?,
                })
            }
            CliCommand::Arctic(a) => Task::Arctic(ArcticParams {
                shape: cfg.get("shape", a.shape, ShapeKind::Quadratic)?,
                r: cfg.get("r", a.r, 0.7)?,
                points: cfg.get("points", a.points, 100)?,
            }),
            CliCommand::Shape(a) => Task::Shape(ShapeParams {
                shape: cfg.get("shape", a.shape, ShapeKind::Quadratic)?,
                r: cfg.get("r", a.r, 0.7)?,
                re_min: cfg.get("re_min", a.re_min, -2.0)?,
                re_max: cfg.get("re_max", a.re_max, 3.0)?,
                im_max: cfg.get("im_max", a.im_max, 2.0)?,
                grid: cfg.get("grid", a.grid, 41)?,
            }),
            CliCommand::Simulate(a) => {
                let n = cfg.get("n", a.n, 16)?;
                let sweeps = cfg.get("sweeps", a.sweeps, (20 * n * n) as u64)?;
                let burnin = cfg.get("burnin", a.burnin, ((10 * n * n) as u64).min(sweeps / 2))?;
                Task::Simulate(SimulateParams {
                    shape: cfg.get("shape", a.shape, ShapeKind::Bpp)?,
                    n,
                    r: cfg.get("r", a.r, 0.7)?,
                    seed: cfg.get("seed", a.seed, 42)?,
                    sweeps,
                    burnin,
                    thinning: cfg.get("thinning", a.thinning, n.max(1) as u64)?,
                    chains: cfg.get("chains", a.chains, 1)?,
                })
            }
            CliCommand::Verify(a) => Task::Verify(VerifyParams {
                suite: cfg.get("suite", a.suite, Suite::Bethe)?,
                big_n: cfg.get("N", a.big_n, 8)?,
                n: cfg.get("n", a.n, 4)?,
                r: cfg.get("r", a.r, 0.7)?,
                x: cfg.get("X", a.x, 0.0)?,
                y: cfg.get("Y", a.y, 0.0)?,
                seed: cfg.get("seed", a.seed, 1)?,
                samples: cfg.get("samples", a.samples, 200)?,
            }),
        };
        cfg.finish()?;
        let format = match (&task, format_given) {
            (Task::Verify(_), None | Some(Format::Json)) => Format::Json,
            (Task::Verify(_), Some(f)) => return Err(invalid(format!("verify writes JSON only, not {f:?}"))),
            (Task::Shape(_), Some(Format::Svg)) => return Err(invalid("shape has no SVG output")),
            (_, f) => f.unwrap_or(Format::Csv),
        };
        task.validate()?;
        Ok(RunPlan { task, out, format })
    }
}

/// Shortest decimal that parses back to the same value.
fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn header_for(task: &Task, columns: &[String]) -> FileHeader {
    FileHeader {
        tool: "fivevertex".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        schema: SCHEMA_VERSION,
        command: task.name().into(),
        params: task.params_value(),
        columns: columns.to_vec(),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    f.write_all(bytes)?;
    Ok(())
}

/// Writes a table as `<stem>.csv` or `<stem>.json` and returns the path.
pub fn write_table(dir: &Path, stem: &str, task: &Task, table: &Table, format: Format) -> Result<PathBuf> {
    let header = header_for(task, &table.columns);
    match format {
        Format::Json => {
            let path = dir.join(format!("{stem}.json"));
            let rows: Vec<Vec<Value>> = table
                .rows
                .iter()
                .map(|r| r.iter().map(|&v| if v.is_finite() { json!(v) } else { Value::Null }).collect())
                .collect();
            let doc = json!({ "header": header, "columns": table.columns, "rows": rows });
            let mut text = serde_json::to_string_pretty(&doc).expect("serializable");
            text.push('\n');
            write_file(&path, text.as_bytes())?;
            Ok(path)
        }
        _ => {
            let path = dir.join(format!("{stem}.csv"));
            let mut text = format!("# {}\n", serde_json::to_string(&header).expect("serializable"));
            text.push_str(&table.columns.join(","));
            text.push('\n');
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(|&v| fmt_num(v)).collect();
                text.push_str(&cells.join(","));
                text.push('\n');
            }
            write_file(&path, text.as_bytes())?;
            Ok(path)
        }
    }
}

/// Parses a file written by [`write_table`].
pub fn read_table(path: &Path) -> Result<(FileHeader, Table)> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let bad = |m: String| Error::Io(format!("{}: {m}", path.display()));
    if path.extension().is_some_and(|e| e == "json") {
        let doc: Value = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
        let header: FileHeader = serde_json::from_value(doc["header"].clone()).map_err(|e| bad(e.to_string()))?;
        let columns: Vec<String> = serde_json::from_value(doc["columns"].clone()).map_err(|e| bad(e.to_string()))?;
        let rows: Vec<Vec<Option<f64>>> =
            serde_json::from_value(doc["rows"].clone()).map_err(|e| bad(e.to_string()))?;
        let rows = rows.into_iter().map(|r| r.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect()).collect();
        return Ok((header, Table { columns, rows }));
    }
    let mut lines = text.lines();
    let first = lines.next().ok_or_else(|| bad("empty file".into()))?;
    let json_part = first.strip_prefix("# ").ok_or_else(|| bad("missing header line".into()))?;
    let header: FileHeader = serde_json::from_str(json_part).map_err(|e| bad(e.to_string()))?;
    let columns: Vec<String> =
        lines.next().ok_or_else(|| bad("missing column line".into()))?.split(',').map(str::to_string).collect();
    if columns != header.columns {
        return Err(bad("column line disagrees with the header".into()));
    }
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        let row: Vec<f64> = line
            .split(',')
            .map(|c| c.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| bad(format!("row {k}: {e}")))?;
        if row.len() != columns.len() {
            return Err(bad(format!("row {k} has {} cells", row.len())));
        }
        rows.push(row);
    }
    Ok((header, Table { columns, rows }))
}

/// Heatmap of values on a rectangular lattice of cells centred at the given points.
pub fn heatmap_svg(cells: &[(f64, f64, f64)], cell_w: f64, cell_h: f64) -> String {
    let finite: Vec<&(f64, f64, f64)> = cells.iter().filter(|c| c.2.is_finite()).collect();
    let (lo, hi) = finite.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), c| (a.min(c.2), b.max(c.2)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for c in cells {
        x0 = x0.min(c.0 - 0.5 * cell_w);
        x1 = x1.max(c.0 + 0.5 * cell_w);
        y0 = y0.min(c.1 - 0.5 * cell_h);
        y1 = y1.max(c.1 + 0.5 * cell_h);
    }
    if cells.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{:.6} {:.6} {:.6} {:.6}\">\n",
        x0,
        -y1,
        x1 - x0,
        y1 - y0
    );
    for &&(x, y, v) in &finite {
        let t = (v - lo) / span;
        let (rr, gg, bb) = (
            (255.0 * t) as u8,
            (255.0 * (1.0 - (2.0 * t - 1.0).abs())) as u8,
            (255.0 * (1.0 - t)) as u8,
        );
        s.push_str(&format!(
            "<rect x=\"{:.6}\" y=\"{:.6}\" width=\"{:.6}\" height=\"{:.6}\" fill=\"rgb({rr},{gg},{bb})\"/>\n",
            x - 0.5 * cell_w,
            -(y + 0.5 * cell_h),
            cell_w,
            cell_h
        ));
    }
    s.push_str("</svg>\n");
    s
}

fn emit_grid(
    plan: &RunPlan,
    stem: &str,
    table: &Table,
    value_col: usize,
    cell: (f64, f64),
) -> Result<Vec<PathBuf>> {
    if plan.format == Format::Svg {
        let cells: Vec<(f64, f64, f64)> = table.rows.iter().map(|r| (r[0], r[1], r[value_col])).collect();
        let path = plan.out.join(format!("{stem}.svg"));
        write_file(&path, heatmap_svg(&cells, cell.0, cell.1).as_bytes())?;
        return Ok(vec![path]);
    }
    Ok(vec![write_table(&plan.out, stem, &plan.task, table, plan.format)?])
}

fn grid_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![lo];
    }
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn run_tension(plan: &RunPlan, p: &TensionParams) -> Result<Vec<PathBuf>> {
    let params = ModelParams::new(p.r, 0.0, 0.0)?;
    params.regime()?;
    let mut table = Table::new(&["s", "t", "sigma"]);
    let m = p.grid - 1;
    for i in 0..=m {
        for j in 0..=(m - i) {
            let (s, t) = (i as f64 / m as f64, j as f64 / m as f64);
            let st = SlopePoint::new(s, (1.0 - s).min(t))?;
            table.rows.push(vec![st.s, st.t, surface_tension(st, params)?]);
        }
    }
    let step = 1.0 / m as f64;
    emit_grid(plan, "tension", &table, 2, (step, step))
}

fn run_free_energy(plan: &RunPlan, p: &FreeEnergyParams) -> Result<Vec<PathBuf>> {
    let mut table = Table::new(&["X", "Y", "F", "s_star"]);
    let xs = grid_points(p.x_min, p.x_max, p.grid);
    let ys = grid_points(p.y_min, p.y_max, p.grid);
    for &x in &xs {
        for &y in &ys {
            let fe = free_energy(ModelParams::new(p.r, x, y)?)?;
            table.rows.push(vec![x, y, fe.value, fe.s_star]);
        }
    }
    let cell = |lo: f64, hi: f64| if p.grid > 1 { (hi - lo) / (p.grid - 1) as f64 } else { 1.0 };
    emit_grid(plan, "free_energy", &table, 2, (cell(p.x_min, p.x_max).max(1e-9), cell(p.y_min, p.y_max).max(1e-9)))
}

/// Arctic curves of a run, one per sheet; the quadratic example has a single sheet.
pub fn arctic_curves(p: &ArcticParams) -> Result<Vec<(Option<Sheet>, ArcticCurve)>> {
    let params = ModelParams::new(p.r, 0.0, 0.0)?;
    match p.shape {
        ShapeKind::Quadratic => {
            let g = BoundaryFunction::quadratic(p.r);
            let grid = default_grid(&g, p.r, p.points);
            Ok(vec![(None, arctic_boundary(&g, params, &grid, FacetHeights::all_zero())?)])
        }
        ShapeKind::Bpp => [Sheet::Plus, Sheet::Minus]
            .into_iter()
            .map(|sheet| {
                let g = bpp_g_sheet(params, sheet)?;
                let grid = default_grid(&g, p.r, p.points);
                Ok((Some(sheet), arctic_boundary(&g, params, &grid, FacetHeights::bpp(sheet))?))
            })
            .collect(),
        ShapeKind::Zero => Err(Error::Unsupported("the zero boundary function has no arctic curve".into())),
    }
}

fn sheet_name(s: Sheet) -> &'static str {
    match s {
        Sheet::Plus => "plus",
        Sheet::Minus => "minus",
    }
}

fn run_arctic(plan: &RunPlan, p: &ArcticParams) -> Result<Vec<PathBuf>> {
    let curves = arctic_curves(p)?;
    if plan.format == Format::Svg {
        let path = plan.out.join("arctic.svg");
        let only: Vec<ArcticCurve> = curves.iter().map(|(_, c)| c.clone()).collect();
        write_file(&path, boundary_svg(&only).as_bytes())?;
        return Ok(vec![path]);
    }
    let mut files = Vec::new();
    for (sheet, curve) in &curves {
        for piece in Piece::ALL {
            let mut table = Table::new(&["p", "x", "y", "H"]);
            table.rows = curve.piece_samples(piece).map(|s| vec![s.p, s.x, s.y, s.h]).collect();
            let stem = match sheet {
                None => format!("arctic_{}", piece.name()),
                Some(s) => format!("arctic_{}_{}", sheet_name(*s), piece.name()),
            };
            files.push(write_table(&plan.out, &stem, &plan.task, &table, plan.format)?);
        }
    }
    Ok(files)
}

/// Interior samples of a shape run.
pub fn shape_samples(p: &ShapeParams) -> Result<Vec<LimitShapeSample>> {
    let params = ModelParams::new(p.r, 0.0, 0.0)?;
    let gs = match p.shape {
        ShapeKind::Quadratic => vec![BoundaryFunction::quadratic(p.r)],
        ShapeKind::Zero => vec![BoundaryFunction::Zero],
        ShapeKind::Bpp => vec![bpp_g_sheet(params, Sheet::Plus)?, bpp_g_sheet(params, Sheet::Minus)?],
    };
    let mut out = Vec::new();
    for g in &gs {
        out.extend(shape_grid(g, params, (p.re_min, p.re_max), (0.0, p.im_max), (p.grid, p.grid))?);
    }
    Ok(out)
}

fn run_shape(plan: &RunPlan, p: &ShapeParams) -> Result<Vec<PathBuf>> {
    let mut table = Table::new(&["u_re", "u_im", "x", "y", "H"]);
    table.rows = shape_samples(p)?.iter().map(|s| vec![s.u.re, s.u.im, s.x, s.y, s.h]).collect();
    Ok(vec![write_table(&plan.out, "shape", &plan.task, &table, plan.format)?])
}

fn run_simulate(plan: &RunPlan, p: &SimulateParams) -> Result<Vec<PathBuf>> {
    let cfg = plan.task.chain_config().expect("simulate task");
    let domain = HexDomain::new(p.n)?;
    let field = sample_mean_height_parallel(&domain, &cfg, p.chains)?;
    let n = p.n as f64;
    let mut table = Table::new(&["i", "j", "x", "y", "mean", "stderr", "H"]);
    let side = domain.side();
    for j in 0..side {
        for i in 0..side {
            if domain.contains(i as isize, j as isize) {
                let (x, y) = domain.to_plane(i, j);
                let m = field.at(i, j);
                table.rows.push(vec![i as f64, j as f64, x, y, m, field.stderr_at(i, j), m / n - 0.5]);
            }
        }
    }
    let mut files = emit_grid(plan, "heights", &table, 6, (1.0 / n, 1.0 / n))?;
    let manifest = RunManifest::of(&cfg, &field);
    let doc = json!({ "header": header_for(&plan.task, &[]), "manifest": manifest });
    let path = plan.out.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&doc).expect("serializable");
    text.push('\n');
    write_file(&path, text.as_bytes())?;
    files.push(path);
    Ok(files)
}

/// Outcome of `verify --suite bethe`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetheReport {
    pub record: VerificationRecord,
    pub tolerance: f64,
    pub passed: bool,
}

fn run_verify(plan: &RunPlan, p: &VerifyParams) -> Result<(Vec<PathBuf>, bool)> {
    let (body, passed) = match p.suite {
        Suite::Bethe => {
            let record = verify_against_oracle(p.big_n, p.n, ModelParams::new(p.r, p.x, p.y)?)?;
            let passed = record.rel_err < BETHE_TOL;
            (serde_json::to_value(BetheReport { record, tolerance: BETHE_TOL, passed }), passed)
        }
        Suite::Identities => {
            let rep = identity_suite(p.seed, p.samples)?;
            let passed = rep.passed;
            (serde_json::to_value(rep), passed)
        }
    };
    let doc = json!({ "header": header_for(&plan.task, &[]), "report": body.expect("serializable") });
    let path = plan.out.join("verify.json");
    let mut text = serde_json::to_string_pretty(&doc).expect("serializable");
    text.push('\n');
    write_file(&path, text.as_bytes())?;
    Ok((vec![path], passed))
}

/// Executes a resolved run and writes its files.
pub fn run(plan: &RunPlan) -> Result<RunOutcome> {
    plan.task.validate()?;
    fs::create_dir_all(&plan.out).map_err(|e| Error::Io(format!("{}: {e}", plan.out.display())))?;
    let (files, passed) = match &plan.task {
        Task::Tension(p) => (run_tension(plan, p)?, true),
        Task::FreeEnergy(p) => (run_free_energy(plan, p)?, true),
        Task::Arctic(p) => (run_arctic(plan, p)?, true),
        Task::Shape(p) => (run_shape(plan, p)?, true),
        Task::Simulate(p) => (run_simulate(plan, p)?, true),
        Task::Verify(p) => run_verify(plan, p)?,
    };
    Ok(RunOutcome { command: plan.task.name().into(), files, passed })
}

/// Parses arguments, resolves them and runs.
pub fn run_args<I, T>(args: I) -> Result<RunOutcome>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| invalid(e.to_string()))?;
    let env_out = std::env::var_os(OUT_ENV).map(PathBuf::from);
    run(&RunPlan::from_cli(cli, env_out)?)
}

/// Machine-readable error report written to stderr.
pub fn error_json(e: &Error) -> Value {
    json!({ "error": e.category(), "code": e.code(), "message": e.to_string() })
}

/// Entry point of the binary; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(std::io::stdout(), "{e}");
                return 0;
            }
            let err = invalid(e.to_string().trim_end().to_string());
            eprintln!("{}", error_json(&err));
            return err.code();
        }
    };
    let env_out = std::env::var_os(OUT_ENV).map(PathBuf::from);
    match RunPlan::from_cli(cli, env_out).and_then(|plan| run(&plan)) {
        Ok(outcome) => {
            let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string(&outcome).expect("serializable"));
            if outcome.passed {
                0
            } else {
                EXIT_VERIFY_FAILED
            }
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            e.code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(args: &[&str], out: &Path) -> Result<RunPlan> {
        let mut full = vec!["fivevertex", "--out", out.to_str().unwrap()];
        full.extend_from_slice(args);
        let cli = Cli::try_parse_from(full).map_err(|e| invalid(e.to_string()))?;
        RunPlan::from_cli(cli, None)
    }

    #[test]
    fn number_format_round_trips() {
        for v in [0.0, -0.0, 0.7, 1e-7, -3.25e-300, 123456.789, 1e20, f64::MIN_POSITIVE, 1.0 / 3.0] {
            let s = fmt_num(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert!(fmt_num(f64::NAN).parse::<f64>().unwrap().is_nan());
    }

    #[test]
    fn flags_beat_config_and_config_beats_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        fs::write(&cfg, r#"{"r": 0.5, "grid": 7}"#).unwrap();
        let s = plan(&["--config", cfg.to_str().unwrap(), "tension", "--r", "0.6"], dir.path()).unwrap();
        assert_eq!(s.task, Task::Tension(TensionParams { r: 0.6, grid: 7 }));
        let s = plan(&["tension"], dir.path()).unwrap();
        assert_eq!(s.task, Task::Tension(TensionParams { r: 0.7, grid: 21 }));
    }

    #[test]
    fn unknown_config_key_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        fs::write(&cfg, r#"{"rr": 0.5}"#).unwrap();
        let e = plan(&["--config", cfg.to_str().unwrap(), "tension"], dir.path()).unwrap_err();
        assert_eq!(e.code(), 10);
    }

    #[test]
    fn environment_supplies_default_out() {
        let cli = Cli::try_parse_from(["fivevertex", "tension"]).unwrap();
        let s = RunPlan::from_cli(cli, Some(PathBuf::from("/tmp/x"))).unwrap();
        assert_eq!(s.out, PathBuf::from("/tmp/x"));
        let cli = Cli::try_parse_from(["fivevertex", "--out", "/tmp/y", "tension"]).unwrap();
        let s = RunPlan::from_cli(cli, Some(PathBuf::from("/tmp/x"))).unwrap();
        assert_eq!(s.out, PathBuf::from("/tmp/y"));
    }

    #[test]
    fn error_classes_have_distinct_codes() {
        let dir = tempfile::tempdir().unwrap();
        let bad = plan(&["tension", "--r", "-1"], dir.path()).unwrap_err();
        let unsupported = plan(&["simulate", "--shape", "quadratic"], dir.path()).unwrap_err();
        let size = plan(&["verify", "--N", "40"], dir.path()).unwrap_err();
        let range = plan(&["free-energy", "--r", "0.5", "--y-max", "5"], dir.path()).unwrap_err();
        let codes = [bad.code(), unsupported.code(), size.code(), range.code()];
        assert_eq!(codes, [10, 9, 7, 5]);
    }

    #[test]
    fn table_round_trip_csv_and_json() {
        let dir = tempfile::tempdir().unwrap();
        let task = Task::Tension(TensionParams { r: 0.7, grid: 3 });
        let mut t = Table::new(&["a", "b"]);
        t.rows = vec![vec![0.1, -2.5e-9], vec![1.0 / 3.0, 7.0]];
        for f in [Format::Csv, Format::Json] {
            let path = write_table(dir.path(), "t", &task, &t, f).unwrap();
            let (h, back) = read_table(&path).unwrap();
            assert_eq!(back, t);
            assert_eq!(h.command, "tension");
            assert_eq!(h.params["r"], json!(0.7));
        }
    }

    #[test]
    fn heatmap_has_one_rect_per_finite_cell() {
        let svg = heatmap_svg(&[(0.0, 0.0, 1.0), (1.0, 0.0, 2.0), (2.0, 0.0, f64::NAN)], 1.0, 1.0);
        assert_eq!(svg.matches("<rect").count(), 2);
    }
}
