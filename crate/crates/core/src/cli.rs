//! Command-line frontend.
//!
//! ```text
//! bichroma <command> [--config FILE] [flags]
//! ```
//!
//! Commands: `dscan`, `pbar-scan`, `dynamics`, `resonance`, `bandmap`,
//! `benchmark`. Frequencies and amplitudes are read in the unit of `--omega1`
//! (default 1) and normalized to ω₁ internally; times are `ω₁t`. Grids are
//! written `start:stop:count`, endpoints included. A config file holds flat
//! `key = value` lines using the long flag names; flags on the command line
//! win over the file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{CommandFactory, Parser, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::chrw::XiMethod;
use crate::error::Error;
use crate::model::DriveParams;
use crate::resonance::{band_map_with, find_resonances_with, linspace, ResonanceOptions, ScanTemplate};

use crate::solvers::{
    full_dimension, gft_converged, rk_transient, FloquetOptions, FrameSolution, GftOptions, Method,
    TwoModeFloquetSolution, GFT_DIMENSION_CAP, GFT_SCHEDULE,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;
pub const EXIT_OVERFLOW: i32 = 4;
pub const EXIT_IO: i32 = 5;

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "BICHROMA_WORKERS";
/// Default GFT dimension cap for `benchmark`.
pub const BENCHMARK_GFT_CAP: usize = 4000;
/// Full dimension of the heavy GFT run enabled by `--full`.
pub const HEAVY_GFT_DIMENSION: usize = 16562;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Dscan,
    PbarScan,
    Dynamics,
    Resonance,
    Bandmap,
    Benchmark,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum XiArg {
    Exact,
    Taylor,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "bichroma", version, about = "Bichromatically driven qubit simulator", args_override_self = true)]
struct Cli {
    /// What to compute.
    #[arg(value_enum)]
    command: Option<Command>,
    /// Flat key=value file with defaults for any long flag.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Qubit frequency: a value, or a grid start:stop:count for scans.
    #[arg(long, allow_hyphen_values = true)]
    omega0: Option<String>,
    /// First-tone amplitude: a value, or a grid for bandmap.
    #[arg(long)]
    a1: Option<String>,
    /// Second-tone amplitude (exclusive with --r).
    #[arg(long)]
    a2: Option<f64>,
    /// Amplitude ratio A2/A1.
    #[arg(long)]
    r: Option<f64>,
    /// First-tone frequency; sets the unit of all other frequencies.
    #[arg(long)]
    omega1: Option<f64>,
    /// Second-tone frequency (exclusive with --delta).
    #[arg(long)]
    omega2: Option<f64>,
    /// Beat frequency omega2 - omega1.
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    phi1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    phi2: Option<f64>,
    /// Comma-separated backends: chrw, rwa, gft, rk.
    #[arg(long)]
    method: Option<String>,
    /// Initial time (units of 1/omega1).
    #[arg(long, allow_hyphen_values = true)]
    t0: Option<f64>,
    /// Final time (units of 1/omega1).
    #[arg(long)]
    tmax: Option<f64>,
    /// Number of time points, endpoints included.
    #[arg(long)]
    points: Option<usize>,
    /// Output CSV path; a .json sidecar is written next to it.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Fixed Floquet truncation N for chrw/rwa.
    #[arg(long)]
    truncation: Option<usize>,
    /// Fixed symmetric GFT truncation N1 = N2.
    #[arg(long)]
    gft_truncation: Option<usize>,
    /// Largest GFT matrix dimension.
    #[arg(long)]
    gft_cap: Option<usize>,
    /// Quasienergy convergence tolerance for chrw/rwa.
    #[arg(long)]
    tol: Option<f64>,
    /// Bisection stop tolerance on |d|.
    #[arg(long)]
    d_tol: Option<f64>,
    /// How the CHRW parameters xi are obtained.
    #[arg(long, value_enum)]
    xi: Option<XiArg>,
    /// Benchmark: include the full heavy GFT run.
    #[arg(long)]
    full: bool,
    /// Worker threads (default: BICHROMA_WORKERS or the processor count).
    #[arg(long)]
    workers: Option<usize>,
}

/// Usage or runtime failure with its exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError { code: EXIT_USAGE, message: msg.into() }
    }

    fn io(msg: impl Into<String>) -> Self {
        CliError { code: EXIT_IO, message: msg.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError { code: e.exit_code(), message: e.to_string() }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

/// Inclusive uniform axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn single(v: f64) -> Self {
        Grid { start: v, stop: v, count: 1 }
    }

    pub fn values(&self) -> Vec<f64> {
        linspace(self.start, self.stop, self.count)
    }

    fn scaled(&self, s: f64) -> Grid {
        Grid { start: self.start / s, stop: self.stop / s, count: self.count }
    }
}

impl FromStr for Grid {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("bad number `{x}` in `{s}`"));
        let g = match parts.as_slice() {
            [v] => Grid::single(num(v)?),
            [a, b, c] => Grid {
                start: num(a)?,
                stop: num(b)?,
                count: c.trim().parse().map_err(|_| format!("bad count in `{s}`"))?,
            },
            _ => return Err(format!("grid `{s}` must be a value or start:stop:count")),
        };
        if g.count < 1 {
            return Err(format!("grid `{s}` needs count >= 1"));
        }
        if g.count > 1 && !(g.start < g.stop) {
            return Err(format!("grid `{s}` needs start < stop"));
        }
        if !g.start.is_finite() || !g.stop.is_finite() {
            return Err(format!("grid `{s}` is not finite"));
        }
        Ok(g)
    }
}

/// Fully resolved run description, in units of ω₁.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    /// Drive parameters; `omega0` and `a1` hold the first grid values.
    pub params: DriveParams,
    /// `A₂ = r·A₁` when set; otherwise `params.a2` is used as is.
    pub r: Option<f64>,
    pub omega0: Grid,
    pub a1: Grid,
    pub methods: Vec<Method>,
    pub t0: f64,
    pub tmax: f64,
    pub points: usize,
    pub output: PathBuf,
    pub truncation: Option<usize>,
    pub gft_truncation: Option<usize>,
    pub gft_cap: usize,
    pub tol: Option<f64>,
    pub d_tol: f64,
    pub xi: XiMethod,
    pub full: bool,
    pub workers: usize,
    /// Unit the raw inputs were given in.
    pub omega1_unit: f64,
}

impl RunConfig {
    pub fn template(&self) -> ScanTemplate {
        ScanTemplate { params: self.params, r: self.r }
    }

    pub fn floquet_options(&self) -> FloquetOptions {
        FloquetOptions { truncation: self.truncation, tol: self.tol, xi: self.xi, ..FloquetOptions::default() }
    }

    pub fn gft_options(&self, cross_check: bool) -> GftOptions {
        let base = match self.command {
            Command::PbarScan | Command::Bandmap => GftOptions::scan(),
            _ => GftOptions::default(),
        };
        GftOptions { truncation: self.gft_truncation.map(|n| (n, n)), cap: self.gft_cap, cross_check, ..base }
    }

    pub fn time_grid(&self) -> Vec<f64> {
        linspace(self.t0, self.tmax, self.points)
    }
}

fn known_keys() -> Vec<String> {
    Cli::command()
        .get_arguments()
        .filter_map(|a| a.get_long().map(str::to_string))
        .filter(|k| k != "config" && k != "help" && k != "version")
        .collect()
}

fn bool_keys() -> [&'static str; 1] {
    ["full"]
}

/// Read a flat `key = value` file. Blank lines and `#` comments are skipped.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
    parse_config_text(&text)
}

pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let known = known_keys();
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("config line {}: expected key = value", lineno + 1)))?;
        let key = k.trim().replace('_', "-");
        if key != "command" && !known.contains(&key) {
            return Err(CliError::usage(format!("config line {}: unknown key `{}`", lineno + 1, k.trim())));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

fn config_path_in(argv: &[String]) -> Option<PathBuf> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

/// Merge the optional config file with argv and resolve everything into a [`RunConfig`].
pub fn parse_config(argv: &[String]) -> Result<RunConfig, CliError> {
    let file = match config_path_in(argv) {
        Some(p) => read_config_file(&p)?,
        None => BTreeMap::new(),
    };
    let mut merged = vec![argv.first().cloned().unwrap_or_else(|| "bichroma".into())];
    for (k, v) in &file {
        if k == "command" {
            continue;
        }
        if bool_keys().contains(&k.as_str()) {
            match v.as_str() {
                "true" | "1" | "yes" => merged.push(format!("--{k}")),
                "false" | "0" | "no" => {}
                _ => return Err(CliError::usage(format!("config key `{k}` expects true or false"))),
            }
        } else {
            merged.push(format!("--{k}={v}"));
        }
    }
    merged.extend(argv.iter().skip(1).cloned());
    let cli = Cli::try_parse_from(&merged).map_err(|e| {
        let code = match e.kind() {
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
            _ => EXIT_USAGE,
        };
        let text = e.to_string();
        let message = if code == EXIT_OK { text } else { text.lines().next().unwrap_or("usage error").to_string() };
        CliError { code, message }
    })?;
    let command = match cli.command {
        Some(c) => c,
        None => match file.get("command") {
            Some(v) => Command::from_str(v, true).map_err(|_| CliError::usage(format!("unknown command `{v}`")))?,
            None => return Err(CliError::usage("missing command")),
        },
    };
    resolve(command, cli)
}

fn grid_arg(name: &str, v: &Option<String>) -> Result<Grid, CliError> {
    let s = v.as_ref().ok_or_else(|| CliError::usage(format!("missing required --{name}")))?;
    s.parse::<Grid>().map_err(|e| CliError::usage(format!("--{name}: {e}")))
}

fn resolve(command: Command, cli: Cli) -> Result<RunConfig, CliError> {
    let unit = cli.omega1.unwrap_or(1.0);
    if !(unit > 0.0) || !unit.is_finite() {
        return Err(CliError::usage("--omega1 must be positive"));
    }
    let omega0 = grid_arg("omega0", &cli.omega0)?.scaled(unit);
    let a1 = grid_arg("a1", &cli.a1)?.scaled(unit);
    let wants_grid_omega0 = matches!(command, Command::Dscan | Command::PbarScan | Command::Resonance | Command::Bandmap);
    if !wants_grid_omega0 && omega0.count != 1 {
        return Err(CliError::usage("--omega0 must be a single value for this command"));
    }
    if command != Command::Bandmap && a1.count != 1 {
        return Err(CliError::usage("--a1 must be a single value for this command"));
    }
    let omega2 = match (cli.omega2, cli.delta) {
        (Some(_), Some(_)) => return Err(CliError::usage("give either --omega2 or --delta, not both")),
        (Some(w2), None) => w2 / unit,
        (None, Some(d)) => 1.0 + d / unit,
        (None, None) => return Err(CliError::usage("missing required --delta or --omega2")),
    };
    let (a2, r) = match (cli.a2, cli.r) {
        (Some(_), Some(_)) => return Err(CliError::usage("give either --a2 or --r, not both")),
        (Some(a2), None) => (a2 / unit, None),
        (None, Some(r)) => (r * a1.start, Some(r)),
        (None, None) => (0.0, None),
    };
    let params = DriveParams {
        omega0: omega0.start,
        a1: a1.start,
        a2,
        omega1: 1.0,
        omega2,
        phi1: cli.phi1.unwrap_or(0.0),
        phi2: cli.phi2.unwrap_or(0.0),
    };
    params.validate().map_err(|e| CliError::usage(e.to_string()))?;
    if a1.start < 0.0 || omega0.start <= 0.0 {
        return Err(CliError::usage("grids must stay in the physical range (omega0 > 0, a1 >= 0)"));
    }
    let default_methods = match command {
        Command::Dynamics => "chrw",
        Command::PbarScan => "chrw,gft,rwa",
        Command::Benchmark => "chrw,gft,rk",
        _ => "chrw",
    };
    let methods: Vec<Method> = cli
        .method
        .as_deref()
        .unwrap_or(default_methods)
        .split(',')
        .map(|m| m.parse::<Method>().map_err(|e| CliError::usage(e.to_string())))
        .collect::<Result<_, _>>()?;
    if methods.is_empty() {
        return Err(CliError::usage("--method needs at least one backend"));
    }
    let frame_only = matches!(command, Command::Dscan | Command::Resonance);
    if frame_only && methods.iter().any(|m| !matches!(m, Method::Chrw | Method::Rwa)) {
        return Err(CliError::usage("this command supports only chrw and rwa"));
    }
    if matches!(command, Command::PbarScan | Command::Bandmap) && methods.contains(&Method::Rk) {
        return Err(CliError::usage("rk has no time-averaged form"));
    }
    if command == Command::Resonance && omega0.count < 16 {
        return Err(CliError::usage("resonance needs an --omega0 grid with at least 16 points"));
    }
    let t0 = cli.t0.unwrap_or(0.0);
    let tmax = match (command, cli.tmax) {
        (_, Some(t)) => t,
        (Command::Benchmark, None) => 1500.0,
        (Command::Dynamics, None) => return Err(CliError::usage("missing required --tmax")),
        _ => t0,
    };
    let points = cli.points.unwrap_or(if command == Command::Benchmark { 751 } else { 1000 });
    if matches!(command, Command::Dynamics | Command::Benchmark) && (points < 1 || (points > 1 && tmax <= t0)) {
        return Err(CliError::usage("need --tmax > --t0 and --points >= 1"));
    }
    let workers = match cli.workers {
        Some(0) => return Err(CliError::usage("--workers must be positive")),
        Some(w) => w,
        None => std::env::var(WORKERS_ENV)
            .ok()
            .and_then(|v| v.parse().ok())
            .filter(|&w: &usize| w > 0)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
    };
    let gft_cap = cli.gft_cap.unwrap_or(match command {
        Command::Benchmark if cli.full => GFT_DIMENSION_CAP,
        Command::Benchmark => BENCHMARK_GFT_CAP,
        Command::PbarScan | Command::Bandmap => GftOptions::scan().cap,
        _ => GFT_DIMENSION_CAP,
    });
    let output = cli.output.unwrap_or_else(|| {
        let name = Command::to_possible_value(&command).map_or("run".to_string(), |v| v.get_name().to_string());
        PathBuf::from(format!("{name}.csv"))
    });
    Ok(RunConfig {
        command,
        params,
        r,
        omega0,
        a1,
        methods,
        t0,
        tmax,
        points,
        output,
        truncation: cli.truncation,
        gft_truncation: cli.gft_truncation,
        gft_cap,
        tol: cli.tol,
        d_tol: cli.d_tol.unwrap_or(crate::resonance::D_TOL),
        xi: match cli.xi {
            Some(XiArg::Taylor) => XiMethod::Taylor,
            _ => XiMethod::Exact,
        },
        full: cli.full,
        workers,
        omega1_unit: unit,
    })
}

/// Everything a command produced.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub csv: String,
    pub metadata: serde_json::Value,
    /// First per-point failure, if any.
    pub failure: Option<CliError>,
}

fn clean(msg: &str) -> String {
    msg.replace([',', '\n', '"'], ";")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

/// Execute a configuration and return the CSV text and metadata without
/// touching the file system.
pub fn execute(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let started = Instant::now();
    let mut timings = serde_json::Map::new();
    let mut extra = serde_json::Map::new();
    let mut failure: Option<CliError> = None;
    let note_failure = |e: &Error, failure: &mut Option<CliError>| {
        if failure.is_none() {
            *failure = Some(CliError::from(e.clone()));
        }
    };
    let template = cfg.template();
    let mut csv = String::new();
    match cfg.command {
        Command::Dynamics => {
            let grid = cfg.time_grid();
            let mut columns = Vec::new();
            for &m in &cfg.methods {
                let t = Instant::now();
                let (series, info) = dynamics_series(cfg, m, &grid)?;
                timings.insert(m.name().into(), json!(t.elapsed().as_secs_f64()));
                extra.insert(m.name().into(), info);
                columns.push(series);
            }
            let names: Vec<String> = if cfg.methods.len() == 1 {
                vec!["P".into()]
            } else {
                cfg.methods.iter().map(|m| format!("P_{m}")).collect()
            };
            let _ = writeln!(csv, "t_omega1,{}", names.join(","));
            for (k, t) in grid.iter().enumerate() {
                let row: Vec<String> = columns.iter().map(|c| c[k].to_string()).collect();
                let _ = writeln!(csv, "{t},{}", row.join(","));
            }
        }
        Command::PbarScan | Command::Dscan => {
            let grid = cfg.omega0.values();
            let is_d = cfg.command == Command::Dscan;
            let prefix = if is_d { "d" } else { "pbar" };
            let mut columns = Vec::new();
            for &m in &cfg.methods {
                let t = Instant::now();
                let col: Vec<Result<f64, Error>> = grid
                    .par_iter()
                    .map(|&w| {
                        let p = template.at(w);
                        if is_d {
                            Ok(FrameSolution::new(m, &p, &cfg.floquet_options())?.indicator().re)
                        } else {
                            crate::resonance::pbar_value(&p, m, &cfg.floquet_options(), &cfg.gft_options(false))
                        }
                    })
                    .collect();
                timings.insert(m.name().into(), json!(t.elapsed().as_secs_f64()));
                columns.push(col);
            }
            let names: Vec<String> = cfg.methods.iter().map(|m| format!("{prefix}_{m}")).collect();
            let _ = writeln!(csv, "omega0,{},status", names.join(","));
            for (k, w) in grid.iter().enumerate() {
                let mut status = String::from("ok");
                let mut cells = Vec::new();
                for col in &columns {
                    match &col[k] {
                        Ok(v) => cells.push(v.to_string()),
                        Err(e) => {
                            note_failure(e, &mut failure);
                            if status == "ok" {
                                status = clean(&e.to_string());
                            }
                            cells.push(String::new());
                        }
                    }
                }
                let _ = writeln!(csv, "{w},{},{status}", cells.join(","));
            }
        }
        Command::Resonance => {
            let _ = writeln!(csv, "omega0_star,a1,method,photon_order,bracket_width,d,resolved");
            for &m in &cfg.methods {
                let t = Instant::now();
                let opts = ResonanceOptions {
                    method: m,
                    d_tol: cfg.d_tol,
                    floquet: cfg.floquet_options(),
                    ..ResonanceOptions::default()
                };
                let pts = find_resonances_with(&template, (cfg.omega0.start, cfg.omega0.stop), cfg.omega0.count, &opts)?;
                timings.insert(m.name().into(), json!(t.elapsed().as_secs_f64()));
                for p in pts {
                    let order = p.photon_order.map_or("unknown".to_string(), |o| o.to_string());
                    let _ = writeln!(
                        csv,
                        "{},{},{},{},{},{},{}",
                        p.omega0_star, p.a1, p.method, order, p.bracket_width_final, p.d_value, p.resolved
                    );
                }
            }
        }
        Command::Bandmap => {
            let m = cfg.methods[0];
            let t = Instant::now();
            let map = band_map_with(
                &template,
                &cfg.omega0.values(),
                &cfg.a1.values(),
                m,
                &cfg.floquet_options(),
                &cfg.gft_options(false),
            )?;
            timings.insert(m.name().into(), json!(t.elapsed().as_secs_f64()));
            let _ = writeln!(csv, "omega0,a1,pbar,status");
            for (i, a) in map.a1.iter().enumerate() {
                for (j, w) in map.omega0.iter().enumerate() {
                    let k = i * map.omega0.len() + j;
                    if let Some(e) = &map.errors[k] {
                        note_failure(e, &mut failure);
                    }
                    let _ = writeln!(csv, "{w},{a},{},{}", fmt_opt(map.pbar[k]), clean(&map.status[k]));
                }
            }
        }
        Command::Benchmark => {
            let report = run_benchmark(&cfg.params, &cfg.time_grid(), cfg.gft_cap, cfg.full, &cfg.floquet_options())?;
            let _ = writeln!(csv, "method,truncation,dimension,wall_seconds,max_dev_vs_rk,norm_defect,status");
            for row in &report.rows {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{},{}",
                    row.method,
                    row.truncation,
                    row.dimension,
                    row.wall_seconds,
                    fmt_opt(row.max_dev_vs_rk),
                    fmt_opt(row.norm_defect),
                    clean(&row.status)
                );
            }
            extra.insert("benchmark".into(), serde_json::to_value(&report).unwrap_or_default());
        }
    }
    let metadata = json!({
        "version": crate::VERSION,
        "command": cfg.command,
        "config": cfg,
        "ratio": cfg.params.ratio(),
        "timings_seconds": timings,
        "total_seconds": started.elapsed().as_secs_f64(),
        "details": extra,
        "status": failure.as_ref().map_or("ok".to_string(), |f| f.message.clone()),
    });
    Ok(RunOutput { csv, metadata, failure })
}

fn dynamics_series(cfg: &RunConfig, m: Method, grid: &[f64]) -> Result<(Vec<f64>, serde_json::Value), CliError> {
    let p = &cfg.params;
    Ok(match m {
        Method::Chrw | Method::Rwa => {
            let sol = FrameSolution::new(m, p, &cfg.floquet_options())?;
            let info = json!({
                "truncation": sol.floquet.truncation,
                "dimension": sol.floquet.dimension(),
                "quasienergies": sol.floquet.quasienergies,
                "chrw": sol.chrw,
            });
            (sol.transient(cfg.t0, grid).values, info)
        }
        Method::Gft => {
            let sol = gft_converged(p, &cfg.gft_options(false))?;
            let series = sol.transient_checked(cfg.t0, grid)?;
            (series.values, json!({ "truncation": [sol.n1, sol.n2], "dimension": sol.dimension() }))
        }
        Method::Rk => {
            let series = rk_transient(p, cfg.t0, grid)?;
            (series.values, json!({ "step": crate::solvers::rk_step_size(p) }))
        }
    })
}

/// One line of the benchmark table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkRow {
    pub method: Method,
    pub truncation: usize,
    pub dimension: usize,
    pub wall_seconds: f64,
    pub max_dev_vs_rk: Option<f64>,
    pub norm_defect: Option<f64>,
    pub status: String,
}

/// CHRW versus GFT cost at matched accuracy targets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkReport {
    pub rows: Vec<BenchmarkRow>,
    pub chrw_dimension: usize,
    pub chrw_seconds: f64,
    pub largest_gft_dimension: usize,
    pub largest_gft_seconds: f64,
    /// GFT time at its largest run over CHRW time.
    pub speedup: f64,
    /// Power-law fit `t ∝ dim^α` over the GFT runs.
    pub gft_time_exponent: Option<f64>,
    /// Fitted GFT time at [`HEAVY_GFT_DIMENSION`].
    pub extrapolated_heavy_gft_seconds: Option<f64>,
}

/// Run CHRW, the GFT schedule up to `cap`, and RK on the same grid.
pub fn run_benchmark(
    p: &DriveParams,
    grid: &[f64],
    cap: usize,
    full: bool,
    floquet: &FloquetOptions,
) -> Result<BenchmarkReport, CliError> {
    let mut rows = Vec::new();
    let t = Instant::now();
    let rk = rk_transient(p, grid[0].min(0.0), grid)?;
    rows.push(BenchmarkRow {
        method: Method::Rk,
        truncation: 0,
        dimension: 2,
        wall_seconds: t.elapsed().as_secs_f64(),
        max_dev_vs_rk: Some(0.0),
        norm_defect: None,
        status: "ok".into(),
    });
    let t0 = grid[0].min(0.0);
    let t = Instant::now();
    let sol = FrameSolution::chrw(p, floquet)?;
    let chrw = sol.transient(t0, grid);
    let chrw_seconds = t.elapsed().as_secs_f64();
    rows.push(BenchmarkRow {
        method: Method::Chrw,
        truncation: sol.floquet.truncation,
        dimension: sol.floquet.dimension(),
        wall_seconds: chrw_seconds,
        max_dev_vs_rk: Some(chrw.max_deviation(&rk)),
        norm_defect: None,
        status: "ok".into(),
    });
    let mut truncations: Vec<usize> = GFT_SCHEDULE.iter().copied().filter(|&n| full_dimension(n, n) <= cap).collect();
    let largest = crate::solvers::largest_symmetric_truncation(cap);
    if !truncations.contains(&largest) && largest >= 1 {
        truncations.push(largest);
    }
    if full {
        let heavy = crate::solvers::largest_symmetric_truncation(HEAVY_GFT_DIMENSION);
        if full_dimension(heavy, heavy) <= cap && !truncations.contains(&heavy) {
            truncations.push(heavy);
        }
    }
    truncations.sort_unstable();
    let mut fit = Vec::new();
    let (mut largest_dim, mut largest_secs) = (0, 0.0);
    for n in truncations {
        let t = Instant::now();
        let built = TwoModeFloquetSolution::new(p, n, n, cap);
        let row = match built {
            Ok(g) => {
                let (series, defect) = g.transient_unchecked(t0, grid);
                let secs = t.elapsed().as_secs_f64();
                fit.push((g.dimension() as f64, secs));
                if g.dimension() >= largest_dim {
                    largest_dim = g.dimension();
                    largest_secs = secs;
                }
                BenchmarkRow {
                    method: Method::Gft,
                    truncation: n,
                    dimension: g.dimension(),
                    wall_seconds: secs,
                    max_dev_vs_rk: Some(series.max_deviation(&rk)),
                    norm_defect: Some(defect),
                    status: if defect > 1e-6 { "unconverged".into() } else { "ok".into() },
                }
            }
            Err(e) => BenchmarkRow {
                method: Method::Gft,
                truncation: n,
                dimension: full_dimension(n, n),
                wall_seconds: t.elapsed().as_secs_f64(),
                max_dev_vs_rk: None,
                norm_defect: None,
                status: e.to_string(),
            },
        };
        rows.push(row);
    }
    let exponent = power_fit(&fit);
    let extrapolated = exponent.and_then(|(a, c)| {
        let v = c * (HEAVY_GFT_DIMENSION as f64).powf(a);
        v.is_finite().then_some(v)
    });
    Ok(BenchmarkReport {
        rows,
        chrw_dimension: sol.floquet.dimension(),
        chrw_seconds,
        largest_gft_dimension: largest_dim,
        largest_gft_seconds: largest_secs,
        speedup: largest_secs / chrw_seconds.max(1e-9),
        gft_time_exponent: exponent.map(|e| e.0),
        extrapolated_heavy_gft_seconds: extrapolated,
    })
}

fn power_fit(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|p| p.1 > 0.0).map(|&(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let a = sxy / sxx;
    Some((a, (my - a * mx).exp()))
}

fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Run a configuration, writing the CSV and its JSON sidecar; returns the exit code.
pub fn run(cfg: &RunConfig) -> Result<i32, CliError> {
    let out = execute(cfg)?;
    fs::write(&cfg.output, &out.csv).map_err(|e| CliError::io(format!("cannot write {}: {e}", cfg.output.display())))?;
    let side = sidecar_path(&cfg.output);
    let json = serde_json::to_string_pretty(&out.metadata).map_err(|e| CliError::io(e.to_string()))?;
    fs::write(&side, json).map_err(|e| CliError::io(format!("cannot write {}: {e}", side.display())))?;
    Ok(out.failure.map_or(EXIT_OK, |f| {
        eprintln!("bichroma: {}", f.message);
        f.code
    }))
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args(argv: Vec<String>) -> i32 {
    let cfg = match parse_config(&argv) {
        Ok(c) => c,
        Err(e) if e.code == EXIT_OK => {
            print!("{}", e.message);
            return EXIT_OK;
        }
        Err(e) => {
            eprintln!("bichroma: {}", e.message);
            return e.code;
        }
    };
    // a global pool can only be installed once per process
    let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build_global();
    match run(&cfg) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("bichroma: {}", e.message);
            e.code
        }
    }
}
