//! Command-line driver: experiment selection, parameter sweeps and output
//! tables.
//!
//! An [`ExperimentConfig`] names one experiment, a fully resolved parameter
//! map and zero or more sweep axes. [`execute`] evaluates the cartesian
//! product of the sweep axes in parallel and assembles a [`Table`] in sweep
//! order: axis columns first, then the experiment's outputs alphabetically.
//! [`render`] writes the table as CSV, JSON or SVG. Outputs depend only on
//! the configuration and seed, so reruns are byte-identical.

use crate::chains::{
    self, average_fidelity, bound_state_analysis, heisenberg_crossing_time, nonuniform_positions, ring_transfer_sites, robustness_mc, ChainSpec,
    Geometry, TransferChannel,
};
use crate::entmeas::{eof_from_concurrence, log_negativity};
use crate::error::{Error, Result};
use crate::multiscatter::{pair_concurrence, polarized_oracle};
use crate::optimize::linspace;
use crate::qcore::re;
use crate::scatter::{self, run_protocol, Initial, ScatterConfig};
use crate::{barrier, entmeas};
use clap::Parser;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

/// Version of the JSON layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Crate version recorded in every artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Raw command-line arguments.
#[derive(Debug, Clone, Default, Parser)]
#[command(name = "spinlab", version, about = "Spin-dynamics experiments: neutron scattering entanglement and spin-chain state transfer")]
pub struct Cli {
    /// scatter-two, scatter-many, barrier, chain-transfer, ring-transfer or robustness.
    pub experiment: Option<String>,
    /// Extra parameters given as bare `key=value` words.
    #[arg(value_name = "KEY=VALUE")]
    pub assignments: Vec<String>,
    /// Parameter assignment `key=value` (repeatable).
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    /// Sweep axis `name:start:stop:steps` (repeatable; steps counts points).
    #[arg(long = "sweep", value_name = "NAME:START:STOP:STEPS")]
    pub sweeps: Vec<String>,
    /// Output directory.
    #[arg(long = "out", value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Comma-separated output formats: csv, json, svg.
    #[arg(long = "format", value_delimiter = ',')]
    pub formats: Vec<String>,
    /// Seed for Monte Carlo experiments.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Flat `key = value` configuration file; command-line flags override it.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

/// The experiments the driver can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Experiment {
    ScatterTwo,
    ScatterMany,
    Barrier,
    ChainTransfer,
    RingTransfer,
    Robustness,
}

impl Experiment {
    /// Every experiment, in documentation order.
    pub const ALL: [Experiment; 6] = [
        Experiment::ScatterTwo,
        Experiment::ScatterMany,
        Experiment::Barrier,
        Experiment::ChainTransfer,
        Experiment::RingTransfer,
        Experiment::Robustness,
    ];

    /// Command-line name.
    pub fn name(self) -> &'static str {
        match self {
            Experiment::ScatterTwo => "scatter-two",
            Experiment::ScatterMany => "scatter-many",
            Experiment::Barrier => "barrier",
            Experiment::ChainTransfer => "chain-transfer",
            Experiment::RingTransfer => "ring-transfer",
            Experiment::Robustness => "robustness",
        }
    }

    /// Parses a command-line name.
    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == name)
            .ok_or_else(|| Error::config("experiment", format!("unknown experiment `{name}`")))
    }

    fn schema(self) -> &'static [ParamSpec] {
        match self {
            Experiment::ScatterTwo => SCATTER_TWO,
            Experiment::ScatterMany => SCATTER_MANY,
            Experiment::Barrier => BARRIER,
            Experiment::ChainTransfer => CHAIN_TRANSFER,
            Experiment::RingTransfer => RING_TRANSFER,
            Experiment::Robustness => ROBUSTNESS,
        }
    }

    /// Names of the parameters the experiment accepts.
    pub fn parameter_names(self) -> Vec<&'static str> {
        self.schema().iter().map(|p| p.name).collect()
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A resolved parameter value.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Number(f64),
    Text(String),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Number(x) => write!(f, "{x}"),
            ParamValue::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Real,
    Int,
    /// A real number or one of the listed keywords.
    RealOr(&'static [&'static str]),
    Choice(&'static [&'static str]),
}

#[derive(Debug, Clone, Copy)]
enum Default {
    Required,
    Num(f64),
    Text(&'static str),
}

#[derive(Debug, Clone, Copy)]
struct ParamSpec {
    name: &'static str,
    kind: Kind,
    default: Default,
}

const fn spec(name: &'static str, kind: Kind, default: Default) -> ParamSpec {
    ParamSpec { name, kind, default }
}

const INITIALS: &[&str] = &["A", "B"];
const SCATTER_COUPLINGS: &[&str] = &["isotropic", "xy"];
const GEOMETRIES: &[&str] = &["open", "ring"];
const CHAIN_COUPLINGS: &[&str] = &["dipolar", "heisenberg"];

const SCATTER_TWO: &[ParamSpec] = &[
    spec("N", Kind::Int, Default::Required),
    spec("lambda", Kind::Real, Default::Num(1.0)),
    spec("B", Kind::RealOr(&["bstar"]), Default::Num(0.0)),
    spec("tau", Kind::RealOr(&["taustar"]), Default::Num(0.0)),
    spec("tau_f", Kind::Real, Default::Num(0.0)),
    spec("alpha", Kind::Real, Default::Num(1.0)),
    spec("initial", Kind::Choice(INITIALS), Default::Text("A")),
    spec("coupling", Kind::Choice(SCATTER_COUPLINGS), Default::Text("isotropic")),
];

const SCATTER_MANY: &[ParamSpec] = &[
    spec("N", Kind::Int, Default::Required),
    spec("lambda", Kind::Real, Default::Num(1.0)),
    spec("B", Kind::RealOr(&["bstar"]), Default::Num(0.0)),
    spec("tau", Kind::RealOr(&["taustar"]), Default::Num(0.0)),
    spec("tau_f", Kind::Real, Default::Num(0.0)),
    spec("alpha", Kind::Real, Default::Num(1.0)),
    spec("initial", Kind::Choice(INITIALS), Default::Text("A")),
    spec("coupling", Kind::Choice(SCATTER_COUPLINGS), Default::Text("isotropic")),
    spec("m", Kind::Int, Default::Num(1.0)),
    spec("n", Kind::Int, Default::Num(2.0)),
];

const BARRIER: &[ParamSpec] = &[
    spec("L", Kind::Real, Default::Num(40.0)),
    spec("l", Kind::Real, Default::Num(10.0)),
    spec("B", Kind::Real, Default::Num(0.0)),
    spec("k0", Kind::Real, Default::Num(std::f64::consts::FRAC_PI_4)),
    spec("x0", Kind::Real, Default::Num(-8.0)),
    spec("w", Kind::Real, Default::Num(1.0)),
    spec("modes", Kind::Int, Default::Num(257.0)),
    spec("x_out", Kind::Real, Default::Num(16.0)),
];

const CHAIN_TRANSFER: &[ParamSpec] = &[
    spec("N", Kind::Int, Default::Required),
    spec("geometry", Kind::Choice(GEOMETRIES), Default::Text("open")),
    spec("coupling", Kind::Choice(CHAIN_COUPLINGS), Default::Text("dipolar")),
    spec("J", Kind::Real, Default::Num(1.0)),
    spec("epsilon", Kind::Real, Default::Num(1.0)),
    spec("a", Kind::Real, Default::Num(1.0)),
    spec("B", Kind::Real, Default::Num(0.0)),
    spec("s", Kind::Int, Default::Num(1.0)),
    spec("r", Kind::Int, Default::Num(0.0)),
    spec("k", Kind::Int, Default::Num(1.0)),
    spec("i", Kind::Int, Default::Num(0.0)),
    spec("f", Kind::Int, Default::Num(0.0)),
    spec("delta", Kind::Real, Default::Num(1.0)),
    spec("t", Kind::Real, Default::Num(0.0)),
    spec("cutoff", Kind::Real, Default::Num(0.0)),
];

const RING_TRANSFER: &[ParamSpec] = &[
    spec("N", Kind::Int, Default::Required),
    spec("geometry", Kind::Choice(GEOMETRIES), Default::Text("ring")),
    spec("coupling", Kind::Choice(CHAIN_COUPLINGS), Default::Text("dipolar")),
    spec("J", Kind::Real, Default::Num(1.0)),
    spec("epsilon", Kind::Real, Default::Num(1.0)),
    spec("a", Kind::Real, Default::Num(1.0)),
    spec("B", Kind::Real, Default::Num(0.0)),
    spec("t", Kind::Real, Default::Num(0.0)),
    spec("cutoff", Kind::Real, Default::Num(0.0)),
    spec("closed", Kind::Int, Default::Num(0.0)),
];

const ROBUSTNESS: &[ParamSpec] = &[
    spec("l", Kind::Real, Default::Num(1.0)),
    spec("p", Kind::Real, Default::Num(0.03)),
    spec("iterations", Kind::Int, Default::Num(1000.0)),
    spec("threshold", Kind::Real, Default::Num(2.0 / 3.0)),
];

/// One sweep axis: `steps` points from `start` to `stop` inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl SweepAxis {
    /// Parses `name:start:stop:steps`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::config("sweep", format!("`{text}` is not name:start:stop:steps")));
        }
        let number = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::config("sweep", format!("`{s}` is not a finite number")))
        };
        let steps: usize = parts[3]
            .parse()
            .map_err(|_| Error::config("sweep", format!("`{}` is not a step count", parts[3])))?;
        if steps == 0 {
            return Err(Error::config("sweep", "steps must be at least 1"));
        }
        Ok(SweepAxis {
            name: parts[0].to_string(),
            start: number(parts[1])?,
            stop: number(parts[2])?,
            steps,
        })
    }

    /// Grid values of the axis.
    pub fn values(&self) -> Vec<f64> {
        linspace(self.start, self.stop, self.steps)
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}:{}", self.name, self.start, self.stop, self.steps)
    }
}

/// Output artifact formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(Error::config("format", format!("unknown format `{other}`"))),
        }
    }

    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }
}

/// A validated experiment request.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Every parameter of the experiment, with defaults applied.
    pub params: BTreeMap<String, ParamValue>,
    pub sweeps: Vec<SweepAxis>,
    pub formats: Vec<Format>,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    /// Validated configuration from explicit parts.
    pub fn new(experiment: Experiment, assignments: &[(String, String)], sweeps: Vec<SweepAxis>) -> Result<Self> {
        let mut given = BTreeMap::new();
        for (k, v) in assignments {
            given.insert(k.clone(), v.clone());
        }
        let params = resolve_params(experiment, &given)?;
        let cfg = ExperimentConfig {
            experiment,
            params,
            sweeps,
            formats: vec![Format::Csv],
            seed: 0,
            output_dir: PathBuf::from("."),
        };
        cfg.check_sweeps()?;
        check_conflicts(&cfg)?;
        Ok(cfg)
    }

    fn check_sweeps(&self) -> Result<()> {
        for (idx, axis) in self.sweeps.iter().enumerate() {
            let Some(p) = self.experiment.schema().iter().find(|p| p.name == axis.name) else {
                return Err(Error::config(
                    axis.name.clone(),
                    format!("`{}` is not a parameter of {}", axis.name, self.experiment),
                ));
            };
            if self.sweeps[..idx].iter().any(|a| a.name == axis.name) {
                return Err(Error::config(axis.name.clone(), "swept more than once"));
            }
            match p.kind {
                Kind::Choice(_) => return Err(Error::config(axis.name.clone(), "only numeric parameters can be swept")),
                Kind::Int => {
                    for v in axis.values() {
                        if (v - v.round()).abs() > 1e-9 || v < 0.0 {
                            return Err(Error::config(axis.name.clone(), format!("sweep value {v} is not a non-negative integer")));
                        }
                    }
                }
                Kind::Real | Kind::RealOr(_) => {}
            }
        }
        Ok(())
    }
}

fn parse_value(p: &ParamSpec, raw: &str) -> Result<ParamValue> {
    let raw = raw.trim();
    let number = raw.parse::<f64>().ok().filter(|x| x.is_finite());
    match p.kind {
        Kind::Real => number
            .map(ParamValue::Number)
            .ok_or_else(|| Error::config(p.name, format!("`{raw}` is not a real number"))),
        Kind::Int => match number {
            Some(x) if x >= 0.0 && (x - x.round()).abs() < 1e-9 => Ok(ParamValue::Number(x.round())),
            _ => Err(Error::config(p.name, format!("`{raw}` is not a non-negative integer"))),
        },
        Kind::RealOr(words) => match number {
            Some(x) => Ok(ParamValue::Number(x)),
            None if words.contains(&raw) => Ok(ParamValue::Text(raw.to_string())),
            None => Err(Error::config(p.name, format!("`{raw}` is neither a number nor one of {words:?}"))),
        },
        Kind::Choice(words) => words
            .iter()
            .find(|w| w.eq_ignore_ascii_case(raw))
            .map(|w| ParamValue::Text(w.to_string()))
            .ok_or_else(|| Error::config(p.name, format!("`{raw}` is not one of {words:?}"))),
    }
}

fn resolve_params(experiment: Experiment, given: &BTreeMap<String, String>) -> Result<BTreeMap<String, ParamValue>> {
    let schema = experiment.schema();
    if let Some(unknown) = given.keys().find(|k| !schema.iter().any(|p| &p.name == k)) {
        return Err(Error::config(
            unknown.clone(),
            format!("unknown parameter for {experiment}; accepted: {}", experiment.parameter_names().join(", ")),
        ));
    }
    let mut out = BTreeMap::new();
    for p in schema {
        let value = match (given.get(p.name), p.default) {
            (Some(raw), _) => parse_value(p, raw)?,
            (None, Default::Num(x)) => ParamValue::Number(x),
            (None, Default::Text(s)) => ParamValue::Text(s.to_string()),
            (None, Default::Required) => return Err(Error::config(p.name, format!("required by {experiment}"))),
        };
        out.insert(p.name.to_string(), value);
    }
    Ok(out)
}

fn check_conflicts(cfg: &ExperimentConfig) -> Result<()> {
    let geometry = cfg.params.get("geometry").map(|v| v.to_string());
    match (cfg.experiment, geometry.as_deref()) {
        (Experiment::ChainTransfer, Some("ring")) => Err(Error::config("geometry", "chain-transfer runs open chains; use ring-transfer")),
        (Experiment::RingTransfer, Some("open")) => Err(Error::config("geometry", "ring-transfer runs rings; use chain-transfer")),
        _ => Ok(()),
    }
}

fn split_assignment(text: &str) -> Result<(String, String)> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| Error::config("param", format!("`{text}` is not key=value")))?;
    let key = k.trim();
    if key.is_empty() {
        return Err(Error::config("param", format!("`{text}` has an empty key")));
    }
    Ok((key.to_string(), v.trim().to_string()))
}

/// Settings read from a flat configuration file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileSettings {
    pub experiment: Option<String>,
    pub params: Vec<(String, String)>,
    pub sweeps: Vec<String>,
    pub out: Option<PathBuf>,
    pub formats: Vec<String>,
    pub seed: Option<u64>,
}

/// Parses `key = value` lines; `#` starts a comment. The keys
/// `experiment`, `seed`, `out`, `format` and `sweep` are settings, every
/// other key is a parameter.
pub fn parse_config_text(text: &str) -> Result<FileSettings> {
    let mut s = FileSettings::default();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = split_assignment(line).map_err(|_| Error::config(format!("line {}", lineno + 1), format!("`{line}` is not key = value")))?;
        match key.as_str() {
            "experiment" => s.experiment = Some(value),
            "seed" => s.seed = Some(value.parse().map_err(|_| Error::config("seed", format!("`{value}` is not an unsigned integer")))?),
            "out" => s.out = Some(PathBuf::from(value)),
            "format" => s.formats = value.split(',').map(|f| f.trim().to_string()).collect(),
            "sweep" => s.sweeps.push(value),
            _ => s.params.push((key, value)),
        }
    }
    Ok(s)
}

/// Builds a validated configuration from parsed arguments. Flags override
/// the configuration file; command-line sweeps replace the file's sweeps.
pub fn config_from_cli(cli: &Cli) -> Result<ExperimentConfig> {
    let file = match &cli.config {
        Some(path) => parse_config_text(&std::fs::read_to_string(path)?)?,
        None => FileSettings::default(),
    };
    let mut positional = cli.assignments.clone();
    let mut named = cli.experiment.clone();
    if let Some(word) = named.as_ref().filter(|w| w.contains('=')) {
        positional.insert(0, word.clone());
        named = None;
    }
    let name = named
        .or(file.experiment.clone())
        .ok_or_else(|| Error::config("experiment", "no experiment given"))?;
    let experiment = Experiment::from_name(&name)?;
    let mut assignments = file.params.clone();
    for a in positional.iter().chain(&cli.params) {
        assignments.push(split_assignment(a)?);
    }
    let sweep_text = if cli.sweeps.is_empty() { &file.sweeps } else { &cli.sweeps };
    let sweeps = sweep_text.iter().map(|s| SweepAxis::parse(s)).collect::<Result<Vec<_>>>()?;
    let mut cfg = ExperimentConfig::new(experiment, &assignments, sweeps)?;
    let format_text = if cli.formats.is_empty() { &file.formats } else { &cli.formats };
    if !format_text.is_empty() {
        let mut formats = format_text.iter().map(|f| Format::parse(f)).collect::<Result<Vec<_>>>()?;
        formats.sort();
        formats.dedup();
        cfg.formats = formats;
    }
    cfg.seed = cli.seed.or(file.seed).unwrap_or(0);
    cfg.output_dir = cli.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from("."));
    Ok(cfg)
}

/// Parses an argument list (program name first) into a validated
/// configuration.
pub fn parse_config<I, T>(args: I) -> Result<ExperimentConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::config("arguments", e.to_string().trim().to_string()))?;
    config_from_cli(&cli)
}

/// Numeric table with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    /// Values of one column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

/// Table plus the metadata needed to reproduce it.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub table: Table,
}

struct Params<'a>(&'a BTreeMap<String, ParamValue>);

impl Params<'_> {
    fn value(&self, key: &str) -> &ParamValue {
        &self.0[key]
    }

    fn real(&self, key: &str) -> f64 {
        match self.value(key) {
            ParamValue::Number(x) => *x,
            ParamValue::Text(_) => f64::NAN,
        }
    }

    fn int(&self, key: &str) -> usize {
        self.real(key).round() as usize
    }

    fn text(&self, key: &str) -> String {
        self.value(key).to_string()
    }
}

type Outputs = BTreeMap<&'static str, f64>;

fn scatter_config(p: &Params) -> Result<ScatterConfig> {
    let n = p.int("N");
    let lambda = p.real("lambda");
    let b = match p.value("B") {
        ParamValue::Text(_) => lambda * (1.0 - 1.0 / n as f64),
        ParamValue::Number(x) => *x,
    };
    let tau = match p.value("tau") {
        ParamValue::Text(_) => (n as f64).sqrt() / (4.0 * lambda) * (-1.0_f64 / 3.0).acos(),
        ParamValue::Number(x) => *x,
    };
    let alpha = p.real("alpha");
    if !(-1.0..=1.0).contains(&alpha) {
        return Err(Error::config("alpha", "must lie in [-1, 1]"));
    }
    let beta = (1.0 - alpha * alpha).max(0.0).sqrt();
    let initial = if p.text("initial") == "B" { Initial::B } else { Initial::A };
    let coupling = if p.text("coupling") == "xy" {
        scatter::Coupling::XY
    } else {
        scatter::Coupling::Isotropic
    };
    let cfg = ScatterConfig::new(n)
        .lambda(lambda)
        .field(b)
        .tau(tau)
        .tau_f_prime(p.real("tau_f"))
        .polarization(re(alpha), re(beta))
        .initial(initial)
        .coupling(coupling);
    cfg.validate()?;
    Ok(cfg)
}

fn run_scatter_two(p: &Params) -> Result<Outputs> {
    let cfg = scatter_config(p)?;
    let (_, rho) = run_protocol(&cfg)?;
    let c = entmeas::concurrence(&rho)?;
    Ok(Outputs::from([
        ("concurrence", c),
        ("eof", eof_from_concurrence(c)?),
        ("log_negativity", log_negativity(&rho, 1)?),
    ]))
}

fn run_scatter_many(p: &Params) -> Result<Outputs> {
    let cfg = scatter_config(p)?;
    let (m, n) = (p.int("m"), p.int("n"));
    let c = match cfg.initial {
        Initial::A => pair_concurrence(&cfg, m, n)?,
        Initial::B => polarized_oracle(&cfg, n, m, n)?,
    };
    Ok(Outputs::from([("concurrence", c), ("zeta", (m + n) as f64)]))
}

fn run_barrier(p: &Params) -> Result<Outputs> {
    let cfg = barrier::BarrierConfig {
        big_l: p.real("L"),
        l: p.real("l"),
        b_z: p.real("B"),
        k0: p.real("k0"),
        x0: p.real("x0"),
        w: p.real("w"),
        n_modes: p.int("modes"),
    };
    cfg.validate()?;
    let c = barrier::clock_comparison(&cfg, p.real("x_out"))?;
    Ok(Outputs::from([
        ("consistent", if c.consistent { 1.0 } else { 0.0 }),
        ("expected_phi", c.expected_phi),
        ("peak_time", c.peak_time),
        ("phi_max", c.measured_phi_range.1),
        ("phi_min", c.measured_phi_range.0),
        ("t_b", c.t_b),
        ("window_end", c.window.1),
        ("window_start", c.window.0),
    ]))
}

fn chain_coupling(p: &Params) -> chains::Coupling {
    if p.text("coupling") == "heisenberg" {
        chains::Coupling::Heisenberg { j: p.real("J") }
    } else {
        chains::Coupling::Dipolar { epsilon: p.real("epsilon") }
    }
}

fn transfer_outputs(channel: &TransferChannel, t: f64, cutoff: f64, out: &mut Outputs) {
    let f_abs = channel.amplitude(t).norm();
    out.insert("f_abs", f_abs);
    out.insert("fidelity", average_fidelity(f_abs));
    if cutoff > 0.0 {
        let (t_star, best) = channel.max_abs(0.0, cutoff);
        out.insert("f_max", average_fidelity(best));
        out.insert("t_star", t_star);
    }
}

fn run_chain_transfer(p: &Params) -> Result<Outputs> {
    let n = p.int("N");
    let a = p.real("a");
    if !(a > 0.0) {
        return Err(Error::config("a", "must be positive"));
    }
    let positions = nonuniform_positions(n, p.int("i"), p.int("f"), p.real("delta"))?
        .into_iter()
        .map(|x| a * x)
        .collect();
    let spec = ChainSpec::with_positions(Geometry::Open, positions, chain_coupling(p))?.with_field(p.real("B"));
    let r = match p.int("r") {
        0 => n,
        r => r,
    };
    let k = p.int("k");
    let channel = TransferChannel::between(&spec, p.int("s"), r, (k > 1).then_some(k))?;
    let mut out = Outputs::new();
    transfer_outputs(&channel, p.real("t"), p.real("cutoff"), &mut out);
    match spec.coupling {
        chains::Coupling::Dipolar { .. } => {
            let bound = bound_state_analysis(&spec)?;
            out.insert("t0", bound.t0);
            out.insert("t0_star", bound.t0_star);
        }
        chains::Coupling::Heisenberg { j } => {
            out.insert("t0", heisenberg_crossing_time(n, j));
        }
    }
    Ok(out)
}

fn run_ring_transfer(p: &Params) -> Result<Outputs> {
    let n = p.int("N");
    let a = p.real("a");
    if !(a > 0.0) {
        return Err(Error::config("a", "must be positive"));
    }
    let positions = (0..n).map(|j| a * j as f64).collect();
    let spec = ChainSpec::with_positions(Geometry::Ring, positions, chain_coupling(p))?.with_field(p.real("B"));
    let (s, r) = ring_transfer_sites(n);
    let channel = match p.int("closed") {
        0 => TransferChannel::between(&spec, s, r, None)?,
        1 => TransferChannel::closed_ring(&spec, s, r)?,
        _ => return Err(Error::config("closed", "must be 0 or 1")),
    };
    let mut out = Outputs::new();
    transfer_outputs(&channel, p.real("t"), p.real("cutoff"), &mut out);
    Ok(out)
}

fn run_robustness(p: &Params, seed: u64) -> Result<Outputs> {
    let r = robustness_mc(p.real("l"), p.real("p"), p.int("iterations"), p.real("threshold"), seed)?;
    Ok(Outputs::from([
        ("failure_rate", r.failure_rate),
        ("failures", r.failures as f64),
        ("t0", r.t0),
    ]))
}

fn run_point(experiment: Experiment, params: &BTreeMap<String, ParamValue>, seed: u64) -> Result<Outputs> {
    let p = Params(params);
    match experiment {
        Experiment::ScatterTwo => run_scatter_two(&p),
        Experiment::ScatterMany => run_scatter_many(&p),
        Experiment::Barrier => run_barrier(&p),
        Experiment::ChainTransfer => run_chain_transfer(&p),
        Experiment::RingTransfer => run_ring_transfer(&p),
        Experiment::Robustness => run_robustness(&p, seed),
    }
}

/// Cartesian product of the sweep axes, first axis slowest.
fn sweep_points(sweeps: &[SweepAxis]) -> Vec<Vec<f64>> {
    sweeps.iter().fold(vec![Vec::new()], |acc, axis| {
        let values = axis.values();
        acc.into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |&v| {
                    let mut point = prefix.clone();
                    point.push(v);
                    point
                })
            })
            .collect()
    })
}

/// Runs the experiment over every sweep point.
pub fn execute(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let context = |e: Error| Error::Experiment {
        experiment: cfg.experiment.name().to_string(),
        source: Box::new(e),
    };
    let points = sweep_points(&cfg.sweeps);
    let outputs = points
        .par_iter()
        .map(|point| {
            let mut params = cfg.params.clone();
            for (axis, &v) in cfg.sweeps.iter().zip(point) {
                params.insert(axis.name.clone(), ParamValue::Number(v));
            }
            run_point(cfg.experiment, &params, cfg.seed)
        })
        .collect::<Result<Vec<_>>>()
        .map_err(context)?;
    let output_names: Vec<&str> = outputs[0].keys().copied().collect();
    let mut columns: Vec<String> = cfg.sweeps.iter().map(|a| a.name.clone()).collect();
    columns.extend(output_names.iter().map(|s| s.to_string()));
    let rows = points
        .into_iter()
        .zip(outputs)
        .map(|(mut row, out)| {
            row.extend(output_names.iter().map(|k| out[k]));
            row
        })
        .collect();
    Ok(ExperimentResult {
        config: cfg.clone(),
        table: Table { columns, rows },
    })
}

fn metadata(result: &ExperimentResult) -> Vec<(String, String)> {
    let cfg = &result.config;
    let mut meta = vec![
        ("experiment".to_string(), cfg.experiment.name().to_string()),
        ("version".to_string(), VERSION.to_string()),
        ("schema_version".to_string(), SCHEMA_VERSION.to_string()),
        ("seed".to_string(), cfg.seed.to_string()),
    ];
    for (k, v) in &cfg.params {
        meta.push((format!("param.{k}"), v.to_string()));
    }
    for axis in &cfg.sweeps {
        meta.push(("sweep".to_string(), axis.to_string()));
    }
    meta
}

fn format_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// CSV text: `# key: value` metadata lines, a header row, then one row per
/// sweep point with 17 significant digits.
pub fn render_csv(result: &ExperimentResult) -> String {
    let mut out = String::new();
    for (k, v) in metadata(result) {
        out.push_str(&format!("# {k}: {v}\n"));
    }
    out.push_str(&result.table.columns.join(","));
    out.push('\n');
    for row in &result.table.rows {
        let cells: Vec<String> = row.iter().map(|&x| format_real(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Reads back the table written by [`render_csv`].
pub fn parse_csv(text: &str) -> Result<Table> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::config("csv", "missing header row"))?;
    let columns: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    let mut rows = Vec::new();
    for line in lines {
        let row = line
            .split(',')
            .map(|cell| {
                cell.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::config("csv", format!("`{cell}` is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != columns.len() {
            return Err(Error::config("csv", format!("row has {} cells, header has {}", row.len(), columns.len())));
        }
        rows.push(row);
    }
    Ok(Table { columns, rows })
}

/// JSON document `{schema_version, experiment, version, params, seed,
/// sweeps, columns, rows}`.
pub fn render_json(result: &ExperimentResult) -> String {
    let cfg = &result.config;
    let params: serde_json::Map<String, serde_json::Value> = cfg
        .params
        .iter()
        .map(|(k, v)| {
            let value = match v {
                ParamValue::Number(x) => serde_json::json!(x),
                ParamValue::Text(s) => serde_json::json!(s),
            };
            (k.clone(), value)
        })
        .collect();
    let rows: Vec<serde_json::Value> = result
        .table
        .rows
        .iter()
        .map(|row| {
            let obj: serde_json::Map<String, serde_json::Value> = result
                .table
                .columns
                .iter()
                .zip(row)
                .map(|(c, &x)| (c.clone(), serde_json::json!(x)))
                .collect();
            serde_json::Value::Object(obj)
        })
        .collect();
    let doc = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "experiment": cfg.experiment.name(),
        "version": VERSION,
        "params": params,
        "seed": cfg.seed,
        "sweeps": cfg.sweeps.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
        "columns": result.table.columns,
        "rows": rows,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("JSON values are always serializable");
    text.push('\n');
    text
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

/// Static SVG line plot: the first sweep axis (or the row index) on the
/// horizontal axis and one polyline per remaining column.
pub fn render_svg(result: &ExperimentResult) -> String {
    let (width, height, margin) = (720.0, 440.0, 60.0);
    let table = &result.table;
    let axis_cols = result.config.sweeps.len().min(1);
    let (x_label, xs): (String, Vec<f64>) = if axis_cols == 1 {
        (table.columns[0].clone(), table.rows.iter().map(|r| r[0]).collect())
    } else {
        ("row".to_string(), (0..table.rows.len()).map(|i| i as f64).collect())
    };
    let skip = result.config.sweeps.len();
    let series: Vec<(String, Vec<f64>)> = table.columns[skip..]
        .iter()
        .enumerate()
        .map(|(j, name)| (name.clone(), table.rows.iter().map(|r| r[skip + j]).collect()))
        .collect();
    let finite = |v: &[f64]| v.iter().copied().filter(|x| x.is_finite()).collect::<Vec<_>>();
    let bounds = |v: Vec<f64>| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        match (lo.is_finite(), hi > lo) {
            (true, true) => (lo, hi),
            (true, false) => (lo - 0.5, lo + 0.5),
            _ => (0.0, 1.0),
        }
    };
    let (x_lo, x_hi) = bounds(finite(&xs));
    let (y_lo, y_hi) = bounds(series.iter().flat_map(|(_, v)| finite(v)).collect());
    let sx = |x: f64| margin + (x - x_lo) / (x_hi - x_lo) * (width - 2.0 * margin);
    let sy = |y: f64| height - margin - (y - y_lo) / (y_hi - y_lo) * (height - 2.0 * margin);
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    );
    svg.push_str(&format!(
        "<title>{} (spinlab {VERSION}, seed {})</title>\n",
        result.config.experiment, result.config.seed
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<line x1=\"{margin}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n<line x1=\"{margin}\" y1=\"{margin}\" x2=\"{margin}\" y2=\"{b}\" stroke=\"black\"/>\n",
        b = height - margin,
        r = width - margin
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"14\">{} (natural units)</text>\n",
        width / 2.0,
        height - 15.0,
        xml_escape(&x_label)
    ));
    svg.push_str(&format!(
        "<text x=\"15\" y=\"{}\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 15 {})\">value (natural units)</text>\n",
        height / 2.0,
        height / 2.0
    ));
    for (label, x, anchor) in [(x_lo, sx(x_lo), "start"), (x_hi, sx(x_hi), "end")] {
        svg.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"{anchor}\" font-size=\"11\">{label:.4}</text>\n",
            height - margin + 15.0
        ));
    }
    for (label, y) in [(y_lo, sy(y_lo)), (y_hi, sy(y_hi))] {
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{y:.2}\" text-anchor=\"end\" font-size=\"11\">{label:.4}</text>\n",
            margin - 5.0
        ));
    }
    for (idx, (name, ys)) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let points: Vec<String> = xs
            .iter()
            .zip(ys)
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(&x, &y)| format!("{:.3},{:.3}", sx(x), sy(y)))
            .collect();
        svg.push_str(&format!(
            "<polyline data-series=\"{n}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            points.join(" "),
            n = xml_escape(name)
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" fill=\"{color}\">{}</text>\n",
            width - margin + 5.0,
            margin + 15.0 * idx as f64,
            xml_escape(name)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Writes `<experiment>.<ext>` for each requested format into `dir` and
/// returns the paths written.
pub fn render(result: &ExperimentResult, formats: &[Format], dir: &Path) -> Result<Vec<PathBuf>> {
    if result.table.rows.is_empty() {
        return Err(Error::config("sweep", "the result table has no rows; nothing to render"));
    }
    if formats.is_empty() {
        return Err(Error::config("format", "no output format requested"));
    }
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for &format in formats {
        let text = match format {
            Format::Csv => render_csv(result),
            Format::Json => render_json(result),
            Format::Svg => render_svg(result),
        };
        let path = dir.join(format!("{}.{}", result.config.experiment.name(), format.extension()));
        std::fs::write(&path, text)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(list: &[&str]) -> Vec<String> {
        std::iter::once("spinlab").chain(list.iter().copied()).map(String::from).collect()
    }

    #[test]
    fn minimal_scatter_two_fills_defaults() {
        let cfg = parse_config(args(&["scatter-two", "N=10"])).unwrap();
        assert_eq!(cfg.experiment, Experiment::ScatterTwo);
        assert_eq!(cfg.params["N"], ParamValue::Number(10.0));
        assert_eq!(cfg.params["lambda"], ParamValue::Number(1.0));
        assert_eq!(cfg.params["B"], ParamValue::Number(0.0));
        assert_eq!(cfg.params["initial"], ParamValue::Text("A".into()));
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.formats, vec![Format::Csv]);
    }

    #[test]
    fn chain_defaults_use_unit_coupling_and_spacing() {
        let cfg = parse_config(args(&["chain-transfer", "--param", "N=5"])).unwrap();
        assert_eq!(cfg.params["epsilon"], ParamValue::Number(1.0));
        assert_eq!(cfg.params["a"], ParamValue::Number(1.0));
    }

    #[test]
    fn sweep_steps_count_points() {
        let cfg = parse_config(args(&["scatter-two", "N=10", "--sweep", "tau:0:20:2000"])).unwrap();
        let values = cfg.sweeps[0].values();
        assert_eq!(values.len(), 2000);
        assert_eq!(values[0], 0.0);
        assert_eq!(values[1999], 20.0);
        assert!(parse_config(args(&["scatter-two", "N=10", "--sweep", "tau:0:20:0"])).is_err());
        assert!(parse_config(args(&["scatter-two", "N=10", "--sweep", "initial:0:1:2"])).is_err());
        assert!(parse_config(args(&["scatter-two", "N=10", "--sweep", "N:2:3:3"])).is_err());
        assert!(parse_config(args(&["scatter-two", "N=10", "--sweep", "tau:0:1"])).is_err());
    }

    #[test]
    fn unknown_and_missing_keys_are_rejected() {
        let err = parse_config(args(&["scatter-two", "N=10", "colour=blue"])).unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field == "colour"));
        assert!(matches!(parse_config(args(&["scatter-two"])), Err(Error::Config { .. })));
        assert!(parse_config(args(&["no-such-thing"])).is_err());
        assert!(parse_config(args(&["scatter-two", "N=ten"])).is_err());
        assert!(parse_config(args(&["scatter-two", "N=2.5"])).is_err());
        assert!(parse_config(args(&["scatter-two", "N=4", "initial=C"])).is_err());
    }

    #[test]
    fn conflicting_geometry_is_rejected() {
        assert!(matches!(
            parse_config(args(&["chain-transfer", "N=5", "geometry=ring"])),
            Err(Error::Config { ref field, .. }) if field == "geometry"
        ));
        assert!(parse_config(args(&["ring-transfer", "N=5", "geometry=open"])).is_err());
    }

    #[test]
    fn config_file_is_read_and_overridden() {
        let text = "# comment\nexperiment = robustness\np = 0.09  # trailing\niterations = 50\nseed = 9\nformat = json,csv\nsweep = threshold:0.5:0.9:3\n";
        let s = parse_config_text(text).unwrap();
        assert_eq!(s.experiment.as_deref(), Some("robustness"));
        assert_eq!(s.seed, Some(9));
        let dir = std::env::temp_dir().join(format!("spinlab-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.cfg");
        std::fs::write(&path, text).unwrap();
        let cfg = parse_config(args(&["--config", path.to_str().unwrap(), "--seed", "3", "iterations=20"])).unwrap();
        assert_eq!(cfg.experiment, Experiment::Robustness);
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.params["iterations"], ParamValue::Number(20.0));
        assert_eq!(cfg.params["p"], ParamValue::Number(0.09));
        assert_eq!(cfg.formats, vec![Format::Csv, Format::Json]);
        assert_eq!(cfg.sweeps.len(), 1);
        assert!(parse_config_text("just words").is_err());
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn columns_are_axes_then_sorted_outputs() {
        let cfg = parse_config(args(&["scatter-two", "N=6", "--sweep", "tau:0:2:5", "--sweep", "B:0:0.5:2"])).unwrap();
        let result = execute(&cfg).unwrap();
        assert_eq!(result.table.columns, vec!["tau", "B", "concurrence", "eof", "log_negativity"]);
        assert_eq!(result.table.rows.len(), 10);
        assert_eq!(result.table.rows[1][0], 0.0);
        assert_eq!(result.table.rows[1][1], 0.5);
        assert_eq!(result.table.rows[2][0], 0.5);
    }

    #[test]
    fn scatter_two_reproduces_the_optimal_point() {
        let cfg = parse_config(args(&["scatter-two", "N=10", "B=bstar", "tau=taustar"])).unwrap();
        let c = execute(&cfg).unwrap().table.column("concurrence").unwrap()[0];
        assert!((c - scatter::C_INSIDE).abs() < 1e-6);
    }

    #[test]
    fn scatter_two_tau_sweep_has_the_expected_maximum() {
        let cfg = parse_config(args(&["scatter-two", "N=10", "B=bstar", "--sweep", "tau:0:20:2000"])).unwrap();
        let c = execute(&cfg).unwrap().table.column("concurrence").unwrap();
        let best = c.iter().cloned().fold(0.0, f64::max);
        assert!((best - 0.77).abs() < 0.01, "{best}");
    }

    #[test]
    fn chain_transfer_peaks_near_the_crossing_time() {
        let cfg = parse_config(args(&["chain-transfer", "N=27", "coupling=heisenberg", "J=0.5", "--sweep", "t:20:32:241"])).unwrap();
        let table = execute(&cfg).unwrap().table;
        let t = table.column("t").unwrap();
        let f = table.column("fidelity").unwrap();
        assert!(table.column("t0").unwrap().iter().all(|&x| x == 26.0));
        let (i, _) = f.iter().enumerate().fold((0, 0.0), |a, (i, &v)| if v > a.1 { (i, v) } else { a });
        assert!((t[i] - 26.0).abs() < 0.15 * 26.0, "{}", t[i]);
        assert!(t[i] > 26.0);
    }

    #[test]
    fn every_experiment_runs() {
        let cases: &[&[&str]] = &[
            &["scatter-two", "N=4", "tau=1.3", "initial=B", "alpha=0.6", "B=0.2"],
            &["scatter-many", "N=8", "tau=2", "m=2", "n=4"],
            &["scatter-many", "N=6", "tau=2", "m=1", "n=3", "initial=B", "alpha=0.5", "B=0.3"],
            &["barrier", "w=2", "B=0.05", "modes=129"],
            &["chain-transfer", "N=6", "t=50", "cutoff=200", "k=2"],
            &["chain-transfer", "N=10", "i=3", "f=3", "delta=0.5", "t=10"],
            &["ring-transfer", "N=7", "t=5", "cutoff=100", "closed=1"],
            &["ring-transfer", "N=6", "coupling=heisenberg", "J=1", "t=5"],
            &["robustness", "iterations=40"],
        ];
        for case in cases {
            let cfg = parse_config(args(case)).unwrap();
            let result = execute(&cfg).unwrap();
            assert_eq!(result.table.rows.len(), 1, "{case:?}");
            assert!(result.table.rows[0].iter().all(|x| x.is_finite()), "{case:?}");
        }
    }

    #[test]
    fn module_errors_carry_the_experiment_name() {
        let cfg = parse_config(args(&["chain-transfer", "N=5", "s=9"])).unwrap();
        let err = execute(&cfg).unwrap_err();
        assert!(matches!(err, Error::Experiment { ref experiment, .. } if experiment == "chain-transfer"));
        assert!(err.to_string().starts_with("chain-transfer: "));
    }

    #[test]
    fn robustness_sweep_is_seeded() {
        let run = |seed: &str| {
            let cfg = parse_config(args(&["robustness", "iterations=100", "--seed", seed, "--sweep", "p:0.03:0.09:3"])).unwrap();
            execute(&cfg).unwrap().table
        };
        assert_eq!(run("4"), run("4"));
        let rates = run("4").column("failure_rate").unwrap();
        assert!(rates[2] >= rates[0]);
    }

    #[test]
    fn csv_round_trips() {
        let cfg = parse_config(args(&["scatter-two", "N=5", "--sweep", "tau:0:3:7"])).unwrap();
        let result = execute(&cfg).unwrap();
        let text = render_csv(&result);
        assert!(text.contains("# experiment: scatter-two\n"));
        assert!(text.contains(&format!("# version: {VERSION}\n")));
        assert!(text.contains("# seed: 0\n"));
        assert_eq!(parse_csv(&text).unwrap(), result.table);
        let odd = Table {
            columns: vec!["x".into()],
            rows: vec![vec![0.1 + 0.2], vec![-1e-300], vec![std::f64::consts::PI]],
        };
        let mut r2 = result.clone();
        r2.table = odd.clone();
        assert_eq!(parse_csv(&render_csv(&r2)).unwrap(), odd);
    }

    #[test]
    fn json_has_the_documented_top_level_keys() {
        let cfg = parse_config(args(&["robustness", "iterations=10", "--seed", "12"])).unwrap();
        let result = execute(&cfg).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&render_json(&result)).unwrap();
        for key in ["schema_version", "experiment", "params", "seed", "rows"] {
            assert!(doc.get(key).is_some(), "{key}");
        }
        assert_eq!(doc["seed"], 12);
        assert_eq!(doc["experiment"], "robustness");
        assert_eq!(doc["params"]["iterations"], 10.0);
        assert_eq!(doc["rows"].as_array().unwrap().len(), 1);
    }

    #[test]
    fn svg_has_one_polyline_per_series() {
        let cfg = parse_config(args(&["scatter-two", "N=5", "--sweep", "tau:0:3:7"])).unwrap();
        let result = execute(&cfg).unwrap();
        let svg = render_svg(&result);
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert!(svg.contains("tau (natural units)"));
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn render_refuses_empty_tables_and_writes_identical_files() {
        let cfg = parse_config(args(&["scatter-two", "N=5", "--sweep", "tau:0:3:4"])).unwrap();
        let mut result = execute(&cfg).unwrap();
        let dir = std::env::temp_dir().join(format!("spinlab-render-{}", std::process::id()));
        let formats = [Format::Csv, Format::Json, Format::Svg];
        let first = render(&result, &formats, &dir).unwrap();
        let bytes: Vec<Vec<u8>> = first.iter().map(|p| std::fs::read(p).unwrap()).collect();
        let again = execute(&cfg).unwrap();
        render(&again, &formats, &dir).unwrap();
        for (p, b) in first.iter().zip(&bytes) {
            assert_eq!(&std::fs::read(p).unwrap(), b);
        }
        result.table.rows.clear();
        assert!(matches!(render(&result, &formats, &dir), Err(Error::Config { .. })));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
