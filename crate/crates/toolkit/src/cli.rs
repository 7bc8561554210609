//! The `stealth` command line.
//!
//! Every command that writes files takes `--out-dir` and records a
//! [`RunManifest`](crate::manifest::RunManifest) there; `replay` re-runs a
//! manifest into a fresh directory and compares output digests.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use stealth_core::attack::{plan_plain_attack, plan_targeted_attack};
use stealth_core::bounds::{success_bound, BoundQuery, BoundReport};
use stealth_core::geometry::{estimate_radius, positive_support, sample_sphere, sample_subsphere};
use stealth_core::planting::{plant_scenario1, plant_scenario2, plant_scenario3, rank_neurons, victim_contribution};
use stealth_core::trigger::search_trigger;
use stealth_core::verify::{
    verify_stealth, verify_stealth_latents, Displacement, LatentModel, McConfig, McReport, DEFAULT_CHUNK_TRIALS,
};
use stealth_core::{
    AttackParams, ErrorKind, GKind, LatentSplit, Network, Sign, StealthReport, TriggerResult, TriggerSearchConfig,
};

use crate::canonical::{format_f64, to_canonical};
use crate::error::{exit, Result, ToolError};
use crate::formats::{
    load_model, load_neuron, load_vectors, read_json, save_model, write_json, NeuronFile, Provenance, TriggerFile,
    VectorSet, Victim,
};
use crate::hash::{file_digest, hash_model_path, network_digest};
use crate::manifest::{output_mismatches, with_out_dir, Recorder, RunManifest, MANIFEST_FILE};
use crate::mc::{linspace, mc_parallel};
use crate::synth::{generate, SynthConfig};

/// Parses a real number, accepting exact rationals such as `1/3` (rounded
/// to the nearest double).
pub fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let v = match s.split_once('/') {
        Some((num, den)) => {
            let n: f64 = num.trim().parse().map_err(|e| format!("bad numerator {num:?}: {e}"))?;
            let d: f64 = den.trim().parse().map_err(|e| format!("bad denominator {den:?}: {e}"))?;
            if d == 0.0 {
                return Err("division by zero".into());
            }
            n / d
        }
        None => s.trim().parse().map_err(|e| format!("bad number {s:?}: {e}"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

/// Parses a count, also accepting integral floats such as `1e6`.
pub fn parse_count(s: &str) -> std::result::Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let f = parse_real(s)?;
    if f >= 0.0 && f.fract() == 0.0 && f <= 2f64.powi(53) {
        Ok(f as u64)
    } else {
        Err(format!("{s:?} is not a non-negative integer"))
    }
}

fn parse_sign(s: &str) -> std::result::Result<Sign, String> {
    match s {
        "+1" | "1" | "+" | "positive" => Ok(Sign::Positive),
        "-1" | "-" | "negative" => Ok(Sign::Negative),
        _ => Err(format!("sign must be +1 or -1, got {s:?}")),
    }
}

#[derive(Debug, Parser)]
#[command(name = "stealth", version, about = "Plant, verify and quantify single-neuron stealth attacks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Success-probability bounds, optionally swept over one parameter.
    Bounds(BoundsArgs),
    /// Search a trigger and build the attack neuron.
    Attack(AttackArgs),
    /// Plant an attack neuron into a model.
    Plant(PlantArgs),
    /// Check the stealth constraints of a planted model.
    Verify(VerifyArgs),
    /// Rank a layer's neurons by the L1 norm of their outgoing weights.
    Rank(RankArgs),
    /// Monte Carlo estimate of the geometric success event.
    Mc(McArgs),
    /// SHA-256 of a model's canonical serialization.
    Hash(HashArgs),
    /// Generate a synthetic model with validation and held-out inputs.
    Gen(GenArgs),
    /// Re-run a manifest into a new directory and compare outputs.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GKindArg {
    Relu,
    Sigmoid,
}

impl From<GKindArg> for GKind {
    fn from(g: GKindArg) -> Self {
        match g {
            GKindArg::Relu => GKind::Relu,
            GKindArg::Sigmoid => GKind::Sigmoid,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SplitArgs {
    /// Layer whose post-activation output is the latent representation.
    #[arg(long, default_value_t = 0)]
    pub cut: usize,
    /// Index of the monitored final-layer output.
    #[arg(long, default_value_t = 0)]
    pub head: usize,
}

impl SplitArgs {
    fn split(&self, net: &Network) -> Result<LatentSplit> {
        Ok(LatentSplit::new(net, self.cut, self.head)?)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ParamArgs {
    #[arg(long, value_parser = parse_real, default_value = "0.9")]
    pub gamma: f64,
    #[arg(long, value_parser = parse_real, default_value = "1/3")]
    pub delta: f64,
    /// Required trigger response `Delta`.
    #[arg(long, alias = "Delta", value_parser = parse_real, default_value = "50")]
    pub response: f64,
    /// Validation tolerance `epsilon`.
    #[arg(long, value_parser = parse_real, default_value = "0")]
    pub eps: f64,
    #[arg(long, value_enum, default_value_t = GKindArg::Relu)]
    pub g_kind: GKindArg,
    #[arg(long, value_parser = parse_sign, default_value = "+1", allow_hyphen_values = true)]
    #[serde(serialize_with = "ser_sign")]
    pub sign: Sign,
    #[arg(long, value_parser = parse_real, default_value = "2.302585092994046")]
    pub kappa_margin: f64,
}

fn ser_sign<S: serde::Serializer>(s: &Sign, ser: S) -> std::result::Result<S::Ok, S::Error> {
    ser.serialize_i8(if *s == Sign::Positive { 1 } else { -1 })
}

impl ParamArgs {
    fn params(&self, max_validation: usize) -> AttackParams {
        AttackParams {
            gamma: self.gamma,
            delta: self.delta,
            response: self.response,
            tolerance: self.eps,
            g_kind: self.g_kind.into(),
            sign: self.sign,
            kappa_margin: self.kappa_margin,
            max_validation,
            ..AttackParams::default()
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SearchArgs {
    #[arg(long, value_parser = parse_real, default_value = "10")]
    pub lambda1: f64,
    #[arg(long, value_parser = parse_real, default_value = "10")]
    pub lambda2: f64,
    #[arg(long, value_parser = parse_real, default_value = "2")]
    pub p1: f64,
    #[arg(long, value_parser = parse_real, default_value = "2")]
    pub p2: f64,
    #[arg(long, value_parser = parse_count, default_value = "100000")]
    pub max_iters: u64,
    /// Initial step; defaults to 1% of the widest input-box side.
    #[arg(long, value_parser = parse_real)]
    pub step0: Option<f64>,
    #[arg(long, value_parser = parse_real, default_value = "1e-3")]
    pub step_decay: f64,
    /// Stop once a feasible iterate reaches this accuracy.
    #[arg(long, value_parser = parse_real)]
    pub alpha_target: Option<f64>,
    /// Round the trigger to integers (then recompute the accuracy).
    #[arg(long)]
    pub round_to_integers: bool,
}

impl SearchArgs {
    fn config(&self, seed: u64) -> TriggerSearchConfig {
        TriggerSearchConfig {
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            p1: self.p1,
            p2: self.p2,
            max_iters: self.max_iters as usize,
            step0: self.step0,
            step_decay: self.step_decay,
            alpha_target: self.alpha_target,
            seed,
            round_to_integers: self.round_to_integers,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BoundsArgs {
    /// Validation-set size bound.
    #[arg(long = "M", default_value_t = 1)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub n_p: Option<usize>,
    #[arg(long, value_parser = parse_real, default_value = "0.9")]
    pub gamma: f64,
    #[arg(long, value_parser = parse_real, default_value = "1/3")]
    pub delta: f64,
    #[arg(long, value_parser = parse_real, default_value = "0")]
    pub alpha: f64,
    /// Non-degeneracy constant of the clustered data model.
    #[arg(long = "C", value_parser = parse_real)]
    pub c: Option<f64>,
    #[arg(long, value_parser = parse_real)]
    pub eps_collapse: Option<f64>,
    /// Sweep one parameter: `NAME=START:END:COUNT` with NAME one of alpha,
    /// gamma, delta, n, n_p, M.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Print JSON instead of a table.
    #[arg(long)]
    pub json: bool,
    /// Also write the rows as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subspace {
    /// Positive coordinates of the target latent for targeted attacks, all
    /// coordinates otherwise.
    Auto,
    Positive,
    Full,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AttackArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub split: SplitArgs,
    /// Target inputs `u*` (vector-set file). Without it a plain attack is run.
    #[arg(long)]
    pub target: Option<PathBuf>,
    /// Use only this entry of the target file instead of all of them.
    #[arg(long)]
    pub target_index: Option<usize>,
    /// Inputs used to estimate the latent radius `R`.
    #[arg(long)]
    pub sample: Option<PathBuf>,
    /// The sample file holds latents rather than inputs.
    #[arg(long)]
    pub sample_latents: bool,
    /// Explicit radius, overriding the estimate.
    #[arg(long, value_parser = parse_real)]
    pub radius: Option<f64>,
    #[arg(long, value_parser = parse_real, default_value = "1")]
    pub radius_safety: f64,
    /// Validation-set size bound used for the reported success bound.
    #[arg(long = "M", default_value_t = 1)]
    pub m: usize,
    #[arg(long, value_enum, default_value_t = Subspace::Auto)]
    pub subspace: Subspace,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long, env = "STEALTH_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PlantArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub neuron: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub scenario: u8,
    #[command(flatten)]
    pub split: SplitArgs,
    /// Scenario 3 host layer; defaults to the layer after the cut.
    #[arg(long)]
    pub layer: Option<usize>,
    /// Scenario 3 victim neuron; defaults to susceptibility rank 1.
    #[arg(long)]
    pub victim: Option<usize>,
    /// Inputs on which the victim's former contribution is measured.
    #[arg(long)]
    pub validation: Option<PathBuf>,
    /// Tie-break seed of the susceptibility ranking.
    #[arg(long, env = "STEALTH_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub original: PathBuf,
    #[arg(long)]
    pub planted: PathBuf,
    #[arg(long)]
    pub validation: PathBuf,
    /// The validation file holds latents at the cut rather than inputs.
    #[arg(long)]
    pub latents: bool,
    /// Trigger file written by `attack`.
    #[arg(long)]
    pub trigger: PathBuf,
    /// Attack neuron, for the silent count and pre-activation histogram.
    #[arg(long)]
    pub neuron: Option<PathBuf>,
    #[command(flatten)]
    pub split: SplitArgs,
    #[arg(long, value_parser = parse_real, default_value = "0")]
    pub eps: f64,
    #[arg(long, alias = "Delta", value_parser = parse_real, default_value = "50")]
    pub response: f64,
    #[arg(long, default_value_t = 50)]
    pub bins: usize,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RankArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub layer: usize,
    #[arg(long, env = "STEALTH_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LatentModelArg {
    UniformBall,
    FixedList,
    AdversarialShell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DisplacementArg {
    Random,
    WorstCase,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct McArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub n_p: Option<usize>,
    #[arg(long, value_parser = parse_real, default_value = "0.9")]
    pub gamma: f64,
    #[arg(long, value_parser = parse_real, default_value = "1/3")]
    pub delta: f64,
    #[arg(long, value_parser = parse_real, default_value = "0")]
    pub alpha: f64,
    #[arg(long = "M", default_value_t = 1)]
    pub m: usize,
    #[arg(long, value_parser = parse_count, default_value = "100000")]
    pub trials: u64,
    #[arg(long, value_enum, default_value_t = LatentModelArg::UniformBall)]
    pub latent_model: LatentModelArg,
    /// Latents for the fixed-list model.
    #[arg(long)]
    pub latents: Option<PathBuf>,
    /// Angular radius of the adversarial-shell cap.
    #[arg(long, value_parser = parse_real, default_value = "0")]
    pub cap_angle: f64,
    #[arg(long, value_enum, default_value_t = DisplacementArg::Random)]
    pub displacement: DisplacementArg,
    #[arg(long, value_parser = parse_count, default_value_t = DEFAULT_CHUNK_TRIALS)]
    pub chunk_trials: u64,
    #[arg(long, env = "STEALTH_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HashArgs {
    pub model: PathBuf,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenArgs {
    #[arg(long, default_value_t = 784)]
    pub input_dim: usize,
    /// Hidden ReLU widths; the first is the latent layer (cut 0).
    #[arg(long, value_delimiter = ',', default_value = "200,100")]
    pub hidden: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub classes: usize,
    #[arg(long, default_value_t = 2500)]
    pub samples: usize,
    #[arg(long, default_value_t = 25)]
    pub holdout: usize,
    #[arg(long, value_parser = parse_real, default_value = "0.15")]
    pub noise: f64,
    #[arg(long, env = "STEALTH_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// Parses `args` (without the program name), runs the command and returns
/// the process exit code. Normal output goes to `out`, errors to stderr.
pub fn run_with(args: &[String], out: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(std::iter::once("stealth".to_string()).chain(args.iter().cloned())) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command, args, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(args: &[String]) -> i32 {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    run_with(args, &mut lock)
}

fn dispatch(command: Command, argv: &[String], out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Bounds(a) => cmd_bounds(&a, argv, out),
        Command::Attack(a) => cmd_attack(&a, argv, out),
        Command::Plant(a) => cmd_plant(&a, argv, out),
        Command::Verify(a) => cmd_verify(&a, argv, out),
        Command::Rank(a) => cmd_rank(&a, argv, out),
        Command::Mc(a) => cmd_mc(&a, argv, out),
        Command::Hash(a) => cmd_hash(&a, argv, out),
        Command::Gen(a) => cmd_gen(&a, argv, out),
        Command::Replay(a) => cmd_replay(&a, out),
    }
}

fn say(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| ToolError::io("<stdout>", e))
}

fn params_value<T: Serialize>(args: &T) -> Value {
    serde_json::to_value(args).unwrap_or(Value::Null)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| ToolError::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| ToolError::io(path, e))
}

/// Compact display: fixed notation for moderate magnitudes, exponent form
/// otherwise.
fn fmt_num(v: f64) -> String {
    if v == 0.0 || (v.abs() >= 1e-3 && v.abs() < 1e6) {
        format!("{v:.6}")
    } else {
        format!("{v:.6e}")
    }
}

fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.len());
        }
    }
    let mut s = String::new();
    let line = |cells: Vec<&str>, s: &mut String| {
        let parts: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
        s.push_str(parts.join("  ").trim_end());
        s.push('\n');
    };
    line(header.to_vec(), &mut s);
    for r in rows {
        line(r.iter().map(String::as_str).collect(), &mut s);
    }
    s
}

// ---------------------------------------------------------------- bounds

fn bound_report_json(q: &BoundQuery, r: &std::result::Result<BoundReport, stealth_core::Error>) -> Value {
    let mut v = json!({
        "M": q.max_validation,
        "n": q.n,
        "n_p": q.sampling_dim(),
        "gamma": q.gamma,
        "delta": q.delta,
        "alpha": q.alpha,
        "C": q.c,
        "eps_collapse": q.eps_collapse,
    });
    let obj = v.as_object_mut().expect("object literal");
    match r {
        Ok(r) => {
            obj.insert("phi".into(), json!(r.phi));
            obj.insert("theta_max".into(), json!(r.theta_max));
            obj.insert("p1_integral".into(), json!(r.p1_integral));
            obj.insert("p1_closed".into(), json!(r.p1_closed));
            obj.insert("bound_integral".into(), json!(r.bound_integral));
            obj.insert("bound_closed".into(), json!(r.bound_closed));
            obj.insert("bound_alpha0".into(), json!(r.bound_alpha0));
            obj.insert("bound_collapse".into(), json!(r.bound_collapse));
            obj.insert(
                "collapse".into(),
                r.collapse.map_or(Value::Null, |c| {
                    json!({
                        "event1": c.event1,
                        "event2": c.event2,
                        "event2_factor": c.event2_factor,
                        "event3": c.event3,
                        "value": c.value,
                    })
                }),
            );
            obj.insert("quadrature_error_estimate".into(), json!(r.quadrature_error_estimate));
            obj.insert("error".into(), Value::Null);
        }
        Err(e) => {
            obj.insert("error".into(), json!(e.to_string()));
        }
    }
    v
}

fn sweep_queries(base: &BoundQuery, text: &str) -> Result<Vec<BoundQuery>> {
    let bad = || ToolError::Usage(format!("bad sweep {text:?}; expected NAME=START:END:COUNT"));
    let (name, range) = text.split_once('=').ok_or_else(bad)?;
    let parts: Vec<&str> = range.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let start = parse_real(parts[0]).map_err(ToolError::Usage)?;
    let end = parse_real(parts[1]).map_err(ToolError::Usage)?;
    let count: usize = parts[2].parse().map_err(|_| bad())?;
    let mut out = Vec::with_capacity(count);
    for v in linspace(start, end, count) {
        let mut q = base.clone();
        match name {
            "alpha" => q.alpha = v,
            "gamma" => q.gamma = v,
            "delta" => q.delta = v,
            "M" => q.max_validation = v.round(),
            "n" => q.n = v.round() as usize,
            "n_p" => q.n_p = Some(v.round() as usize),
            _ => return Err(ToolError::Usage(format!("cannot sweep {name:?}"))),
        }
        out.push(q);
    }
    Ok(out)
}

const BOUND_COLUMNS: [&str; 12] = [
    "M",
    "n",
    "n_p",
    "gamma",
    "delta",
    "alpha",
    "phi",
    "p1_integral",
    "p1_closed",
    "bound_integral",
    "bound_closed",
    "bound_alpha0",
];

fn bound_cells(
    q: &BoundQuery,
    r: &std::result::Result<BoundReport, stealth_core::Error>,
    fmt: fn(f64) -> String,
) -> Vec<String> {
    let mut row = vec![
        fmt(q.max_validation),
        q.n.to_string(),
        q.sampling_dim().to_string(),
        fmt(q.gamma),
        fmt(q.delta),
        fmt(q.alpha),
    ];
    match r {
        Ok(r) => {
            row.extend([r.phi, r.p1_integral, r.p1_closed, r.bound_integral, r.bound_closed, r.bound_alpha0].map(fmt));
            if let Some(c) = r.collapse {
                row.extend([c.event1, c.event2, c.event3, c.value].map(fmt));
            }
        }
        Err(e) => row.push(format!("({e})")),
    }
    row
}

pub fn cmd_bounds(a: &BoundsArgs, argv: &[String], out: &mut dyn Write) -> Result<i32> {
    let base = BoundQuery {
        max_validation: a.m as f64,
        n: a.n,
        n_p: a.n_p,
        gamma: a.gamma,
        delta: a.delta,
        alpha: a.alpha,
        eps_collapse: a.eps_collapse,
        c: a.c,
    };
    let queries = match &a.sweep {
        None => vec![base],
        Some(s) => sweep_queries(&base, s)?,
    };
    let results: Vec<_> = queries.iter().map(success_bound).collect();
    if a.sweep.is_none() {
        if let Err(e) = &results[0] {
            return Err(e.clone().into());
        }
    }
    for r in results.iter().flatten() {
        info!("quadrature error estimate {:e}", r.quadrature_error_estimate);
    }
    // input errors anywhere in a sweep are fatal; hypothesis violations are
    // reported per row
    if let Some(Err(e)) = results.iter().find(|r| matches!(r, Err(e) if e.kind() == ErrorKind::Input)) {
        return Err(e.clone().into());
    }
    let rows_json: Vec<Value> = queries.iter().zip(&results).map(|(q, r)| bound_report_json(q, r)).collect();
    let doc = if a.sweep.is_none() {
        rows_json[0].clone()
    } else {
        Value::Array(rows_json)
    };
    let with_collapse = results.iter().any(|r| matches!(r, Ok(r) if r.collapse.is_some()));
    let mut header = BOUND_COLUMNS.to_vec();
    if with_collapse {
        header.extend(["collapse_event1", "collapse_event2", "collapse_event3", "bound_collapse"]);
    }
    let csv = {
        let mut s = header.join(",");
        s.push('\n');
        for (q, r) in queries.iter().zip(&results) {
            s.push_str(&bound_cells(q, r, format_f64).join(","));
            s.push('\n');
        }
        s
    };
    if a.json {
        say(out, &format!("{}\n", to_canonical(&doc)?))?;
    } else {
        let rows: Vec<Vec<String>> = queries.iter().zip(&results).map(|(q, r)| bound_cells(q, r, fmt_num)).collect();
        say(out, &table(&header, &rows))?;
    }
    if let Some(path) = &a.csv {
        write_text(path, &csv)?;
    }
    if let Some(dir) = &a.out_dir {
        create_dir(dir)?;
        let mut rec = Recorder::new("bounds", argv, params_value(a));
        write_json(&dir.join("bounds.json"), &doc)?;
        rec.output(dir, "bounds.json")?;
        write_text(&dir.join("bounds.csv"), &csv)?;
        rec.output(dir, "bounds.csv")?;
        rec.finish(dir)?;
    }
    let violated = results.iter().any(|r| matches!(r, Err(e) if e.kind() == ErrorKind::Hypothesis));
    Ok(if violated { exit::HYPOTHESIS } else { exit::OK })
}

// ---------------------------------------------------------------- attack

fn latents_of(net: &Network, split: &LatentSplit, set: &VectorSet, are_latents: bool) -> Result<Vec<Vec<f64>>> {
    if are_latents {
        if set.dim != split.latent_dim {
            return Err(stealth_core::Error::DimensionMismatch {
                context: "latent file",
                expected: split.latent_dim,
                found: set.dim,
            }
            .into());
        }
        Ok(set.vectors.clone())
    } else {
        set.vectors
            .par_iter()
            .map(|u| net.latent(split, u).map_err(ToolError::from))
            .collect()
    }
}

struct Candidate {
    index: Option<usize>,
    u_star: Option<Vec<f64>>,
    phi_star: Option<Vec<f64>>,
}

fn run_candidate(
    net: &Network,
    split: &LatentSplit,
    a: &AttackArgs,
    params: &AttackParams,
    cfg: &TriggerSearchConfig,
    sample: Option<&[Vec<f64>]>,
    c: &Candidate,
) -> Result<TriggerResult> {
    let radius = match (a.radius, sample) {
        (Some(r), _) => r,
        (None, Some(s)) => estimate_radius(s, c.phi_star.as_deref(), a.radius_safety)?,
        (None, None) => return Err(ToolError::Usage("need --sample or --radius to fix the latent radius".into())),
    };
    let n = split.latent_dim;
    let positive = match a.subspace {
        Subspace::Auto => c.phi_star.is_some(),
        Subspace::Positive => true,
        Subspace::Full => false,
    };
    let x = if positive {
        let anchor = c
            .phi_star
            .as_deref()
            .ok_or_else(|| ToolError::Usage("--subspace positive needs a target input".into()))?;
        sample_subsphere(n, &positive_support(anchor), params.delta, a.seed)?
    } else {
        sample_sphere(n, params.delta, a.seed)?
    };
    info!(
        "candidate {:?}: R = {radius}, subspace dimension {}",
        c.index,
        x.effective_dim()
    );
    Ok(search_trigger(net, split, &x, c.u_star.as_deref(), radius, params, cfg)?)
}

pub fn cmd_attack(a: &AttackArgs, argv: &[String], out: &mut dyn Write) -> Result<i32> {
    let net = load_model(&a.model)?;
    let split = a.split.split(&net)?;
    let params = a.params.params(a.m);
    params.validate()?;
    let cfg = a.search.config(a.seed);
    cfg.validate()?;
    let mut rec = Recorder::new("attack", argv, params_value(a));
    rec.seed("seed", a.seed);
    rec.input(&a.model)?;

    let mut candidates = Vec::new();
    if let Some(path) = &a.target {
        rec.input(path)?;
        let set = load_vectors(path)?;
        if set.dim != net.input_dim() {
            return Err(ToolError::parse(path, format!("expected {}-dimensional inputs, got {}", net.input_dim(), set.dim)));
        }
        let indices: Vec<usize> = match a.target_index {
            Some(i) if i < set.vectors.len() => vec![i],
            Some(i) => return Err(ToolError::Usage(format!("target index {i} out of range for {} targets", set.vectors.len()))),
            None => (0..set.vectors.len()).collect(),
        };
        if indices.is_empty() {
            return Err(ToolError::parse(path, "no target inputs"));
        }
        for i in indices {
            let u = set.vectors[i].clone();
            candidates.push(Candidate {
                index: Some(i),
                phi_star: Some(net.latent(&split, &u)?),
                u_star: Some(u),
            });
        }
    } else {
        candidates.push(Candidate {
            index: None,
            u_star: None,
            phi_star: None,
        });
    }
    let sample = match &a.sample {
        Some(path) => {
            rec.input(path)?;
            Some(latents_of(&net, &split, &load_vectors(path)?, a.sample_latents)?)
        }
        None => None,
    };

    let results: Vec<TriggerResult> = candidates
        .par_iter()
        .map(|c| run_candidate(&net, &split, a, &params, &cfg, sample.as_deref(), c))
        .collect::<Result<_>>()?;
    // feasible first, then smallest accuracy; ties keep the earliest
    let mut best = 0;
    for (i, r) in results.iter().enumerate() {
        let b = &results[best];
        if (r.feasible && !b.feasible) || (r.feasible == b.feasible && r.alpha < b.alpha) {
            best = i;
        }
    }
    let result = &results[best];
    let chosen = &candidates[best];

    create_dir(&a.out_dir)?;
    write_json(&a.out_dir.join("trigger.json"), &TriggerFile::from_result(result, &cfg))?;
    rec.output(&a.out_dir, "trigger.json")?;

    let mut text = String::new();
    let _ = writeln!(text, "candidate      {}", chosen.index.map_or("-".into(), |i| i.to_string()));
    let _ = writeln!(text, "alpha          {}", fmt_num(result.alpha));
    let _ = writeln!(text, "feasible       {}", result.feasible);
    let _ = writeln!(text, "iterations     {}", result.iterations);
    let _ = writeln!(text, "R              {}", fmt_num(result.radius));
    let _ = writeln!(text, "n_p            {}", result.x.effective_dim());

    if !result.feasible {
        let gx: f64 = params.gamma * result.x_prime.iter().map(|v| v * v).sum::<f64>().sqrt();
        let _ = writeln!(text, "gamma*|x'|     {}", fmt_num(gx));
        say(out, &text)?;
        rec.finish(&a.out_dir)?;
        return Err(ToolError::Infeasible(format!(
            "best accuracy {} after {} iterations does not satisfy the trigger constraints",
            result.alpha, result.iterations
        )));
    }

    let neuron = match &chosen.phi_star {
        Some(phi_star) => plan_targeted_attack(&params, &result.x_prime, result.radius, phi_star)?,
        None => plan_plain_attack(&params, &result.x_prime, result.radius)?,
    };
    write_json(&a.out_dir.join("neuron.json"), &NeuronFile::from_neuron(&neuron))?;
    rec.output(&a.out_dir, "neuron.json")?;

    let query = BoundQuery {
        max_validation: a.m as f64,
        n: split.latent_dim,
        n_p: Some(result.x.effective_dim()),
        gamma: params.gamma,
        delta: params.delta,
        alpha: result.alpha,
        eps_collapse: None,
        c: None,
    };
    let bound = success_bound(&query);
    match &bound {
        Ok(b) => {
            let _ = writeln!(text, "phi            {}", fmt_num(b.phi));
            let _ = writeln!(text, "bound_integral {}", fmt_num(b.bound_integral));
            let _ = writeln!(text, "bound_closed   {}", fmt_num(b.bound_closed));
        }
        Err(e) => {
            let _ = writeln!(text, "bound          unavailable ({e})");
        }
    }
    let summary = json!({
        "candidate": chosen.index,
        "alpha": result.alpha,
        "feasible": result.feasible,
        "iterations": result.iterations,
        "R": result.radius,
        "n": split.latent_dim,
        "n_p": result.x.effective_dim(),
        "bound": bound_report_json(&query, &bound),
    });
    write_json(&a.out_dir.join("attack.json"), &summary)?;
    rec.output(&a.out_dir, "attack.json")?;
    rec.finish(&a.out_dir)?;
    say(out, &text)?;
    Ok(exit::OK)
}

// ---------------------------------------------------------------- plant

pub fn cmd_plant(a: &PlantArgs, argv: &[String], out: &mut dyn Write) -> Result<i32> {
    let net = load_model(&a.model)?;
    let neuron = load_neuron(&a.neuron)?;
    let split = a.split.split(&net)?;
    let mut rec = Recorder::new("plant", argv, params_value(a));
    rec.seed("seed", a.seed);
    rec.input(&a.model)?;
    rec.input(&a.neuron)?;
    let validation = match &a.validation {
        Some(p) => {
            rec.input(p)?;
            Some(load_vectors(p)?)
        }
        None => None,
    };

    let (planted, victim) = match a.scenario {
        1 => (plant_scenario1(&net, &split, &neuron)?, None),
        2 => (plant_scenario2(&net, &split, &neuron)?, None),
        _ => {
            let layer = a.layer.unwrap_or(split.cut + 1);
            let ranking = rank_neurons(&net, layer, a.seed)?;
            let index = a.victim.unwrap_or(ranking.order[0]);
            let planted = plant_scenario3(&net, layer, index, &neuron, a.split.head)?;
            let rank = ranking.rank_of(index);
            let outgoing_l1 = rank.map_or(f64::NAN, |r| ranking.norms[r - 1]);
            let contribution = match &validation {
                Some(v) => Some(victim_contribution(&net, layer, index, a.split.head, &v.vectors)?),
                None => None,
            };
            let victim = Victim {
                layer,
                index,
                head_index: a.split.head,
                rank,
                outgoing_l1,
                former_contribution_max: contribution.map(|c| c.max_abs),
                former_contribution_mean: contribution.map(|c| c.mean_abs),
            };
            (planted, Some(victim))
        }
    };

    create_dir(&a.out_dir)?;
    save_model(&a.out_dir.join("planted.json"), &planted)?;
    rec.output(&a.out_dir, "planted.json")?;
    let provenance = Provenance {
        scenario: a.scenario,
        victim: victim.clone(),
        neuron: NeuronFile::from_neuron(&neuron),
        neuron_sha256: file_digest(&a.neuron)?,
        original_model_sha256: network_digest(&net)?,
        seed: a.seed,
    };
    write_json(&a.out_dir.join("provenance.json"), &provenance)?;
    rec.output(&a.out_dir, "provenance.json")?;
    rec.finish(&a.out_dir)?;

    let mut text = format!(
        "scenario {}: {} -> {} parameters\n",
        a.scenario,
        net.param_count(),
        planted.param_count()
    );
    if let Some(v) = &victim {
        let _ = writeln!(
            text,
            "victim layer {} neuron {} (rank {}, outgoing L1 {})",
            v.layer,
            v.index,
            v.rank.map_or("-".into(), |r| r.to_string()),
            fmt_num(v.outgoing_l1)
        );
        if let Some(m) = v.former_contribution_max {
            let _ = writeln!(text, "former contribution max {}", fmt_num(m));
        }
    }
    say(out, &text)?;
    Ok(exit::OK)
}

// ---------------------------------------------------------------- verify

fn stealth_report_json(r: &StealthReport) -> Value {
    json!({
        "max_validation_deviation": r.max_validation_deviation,
        "trigger_deviation": r.trigger_deviation,
        "eps_ok": r.eps_ok,
        "delta_ok": r.delta_ok,
        "silent_count": r.silent_count,
        "validation_size": r.validation_size,
        "histogram": r.histogram.as_ref().map(|h| json!({"edges": h.edges, "counts": h.counts})),
        "max_occupied_edge": r.histogram.as_ref().and_then(|h| h.max_occupied_edge()),
    })
}

pub fn cmd_verify(a: &VerifyArgs, argv: &[String], out: &mut dyn Write) -> Result<i32> {
    let original = load_model(&a.original)?;
    let planted = load_model(&a.planted)?;
    let split = a.split.split(&original)?;
    let validation = load_vectors(&a.validation)?;
    let trigger: TriggerFile = read_json(&a.trigger)?;
    let neuron = a.neuron.as_deref().map(load_neuron).transpose()?;
    let params = AttackParams {
        tolerance: a.eps,
        response: a.response,
        ..AttackParams::default()
    };
    let report = if a.latents {
        let latents = latents_of(&original, &split, &validation, true)?;
        let z = original.latent(&split, &trigger.u_prime)?;
        verify_stealth_latents(&original, &planted, &split, &latents, &z, neuron.as_ref(), &params, a.bins)?
    } else {
        verify_stealth(
            &original,
            &planted,
            &split,
            &validation.vectors,
            &trigger.u_prime,
            neuron.as_ref(),
            &params,
            a.bins,
        )?
    };
    let doc = stealth_report_json(&report);
    if let Some(dir) = &a.out_dir {
        create_dir(dir)?;
        let mut rec = Recorder::new("verify", argv, params_value(a));
        for p in [&a.original, &a.planted, &a.validation, &a.trigger] {
            rec.input(p)?;
        }
        if let Some(p) = &a.neuron {
            rec.input(p)?;
        }
        write_json(&dir.join("report.json"), &doc)?;
        rec.output(dir, "report.json")?;
        if let Some(h) = &report.histogram {
            let mut csv = String::from("lower,upper,count\n");
            for (i, c) in h.counts.iter().enumerate() {
                let _ = writeln!(csv, "{},{},{c}", format_f64(h.edges[i]), format_f64(h.edges[i + 1]));
            }
            write_text(&dir.join("histogram.csv"), &csv)?;
            rec.output(dir, "histogram.csv")?;
        }
        rec.finish(dir)?;
    }
    let mut text = String::new();
    let _ = writeln!(text, "validation size          {}", report.validation_size);
    let _ = writeln!(text, "max validation deviation {:e}", report.max_validation_deviation);
    let _ = writeln!(text, "trigger deviation        {}", fmt_num(report.trigger_deviation));
    if let Some(s) = report.silent_count {
        let _ = writeln!(text, "silent                   {s}");
    }
    let _ = writeln!(text, "eps_ok {} delta_ok {}", report.eps_ok, report.delta_ok);
    say(out, &text)?;
    if report.eps_ok && report.delta_ok {
        Ok(exit::OK)
    } else {
        Err(ToolError::Verification(format!(
            "max validation deviation {:e} (eps {}), trigger deviation {} (Delta {})",
            report.max_validation_deviation, a.eps, report.trigger_deviation, a.response
        )))
    }
}

// ---------------------------------------------------------------- rank

pub fn cmd_rank(a: &RankArgs, argv: &[String], out: &mut dyn Write) -> Result<i32> {
    let net = load_model(&a.model)?;
    let ranking = rank_neurons(&net, a.layer, a.seed)?;
    let doc = json!({
        "layer": ranking.layer,
        "order": ranking.order,
        "norms": ranking.norms,
        "tie_seed": ranking.tie_seed,
    });
    if a.json {
        say(out, &format!("{}\n", to_canonical(&doc)?))?;
    } else {
        let rows: Vec<Vec<String>> = ranking
            .order
            .iter()
            .zip(&ranking.norms)
            .enumerate()
            .map(|(r, (i, n))| vec![(r + 1).to_string(), i.to_string(), fmt_num(*n)])
            .collect();
        say(out, &table(&["rank", "neuron", "outgoing_l1"], &rows))?;
    }
    if let Some(dir) = &a.out_dir {
        create_dir(dir)?;
        let mut rec = Recorder::new("rank", argv, params_value(a));
        rec.seed("seed", a.seed);
        rec.input(&a.model)?;
        write_json(&dir.join("ranking.json"), &doc)?;
        rec.output(dir, "ranking.json")?;
        rec.finish(dir)?;
    }
    Ok(exit::OK)
}

// ---------------------------------------------------------------- mc

fn mc_report_json(cfg: &McConfig, r: &McReport, cap: Option<f64>) -> Value {
    let m = cfg.validation_count() as f64;
    json!({
        "n": cfg.n,
        "n_p": cfg.sampling_dim(),
        "gamma": cfg.gamma,
        "delta": cfg.delta,
        "alpha": cfg.alpha,
        "M": cfg.validation_count(),
        "latent_model": cfg.model.name(),
        "displacement": match cfg.displacement { Displacement::Random => "random", Displacement::WorstCase => "worst-case" },
        "trials": r.trials,
        "failures": r.failures,
        "success_frequency": r.success_frequency,
        "success_interval": [r.success_interval.0, r.success_interval.1],
        "failure_frequency": r.failure_frequency,
        "failure_interval": [r.failure_interval.0, r.failure_interval.1],
        "chunks": r.chunks,
        "chunk_trials": r.chunk_trials,
        "seed": r.seed,
        "p1_integral": cap,
        "failure_bound": cap.map(|p| m * p),
        "bound_respected": cap.map(|p| r.failure_interval.0 <= m * p),
    })
}

pub fn cmd_mc(a: &McArgs, argv: &[String], out: &mut dyn Write) -> Result<i32> {
    let model = match a.latent_model {
        LatentModelArg::UniformBall => LatentModel::UniformBall,
        LatentModelArg::AdversarialShell => LatentModel::AdversarialShell { cap_angle: a.cap_angle },
        LatentModelArg::FixedList => {
            let path = a
                .latents
                .as_ref()
                .ok_or_else(|| ToolError::Usage("the fixed-list model needs --latents".into()))?;
            LatentModel::FixedList(load_vectors(path)?.vectors)
        }
    };
    let cfg = McConfig {
        n: a.n,
        n_p: a.n_p,
        gamma: a.gamma,
        delta: a.delta,
        alpha: a.alpha,
        model,
        m: a.m,
        trials: a.trials,
        seed: a.seed,
        displacement: match a.displacement {
            DisplacementArg::Random => Displacement::Random,
            DisplacementArg::WorstCase => Displacement::WorstCase,
        },
        chunk_trials: a.chunk_trials,
    };
    let report = mc_parallel(&cfg)?;
    let query = BoundQuery {
        max_validation: cfg.validation_count() as f64,
        n: a.n,
        n_p: a.n_p,
        gamma: a.gamma,
        delta: a.delta,
        alpha: a.alpha,
        eps_collapse: None,
        c: None,
    };
    let cap = success_bound(&query).ok().map(|b| b.p1_integral);
    let doc = mc_report_json(&cfg, &report, cap);
    if a.json {
        say(out, &format!("{}\n", to_canonical(&doc)?))?;
    } else {
        let mut text = String::new();
        let _ = writeln!(text, "trials             {}", report.trials);
        let _ = writeln!(text, "failures           {}", report.failures);
        let _ = writeln!(
            text,
            "failure frequency  {} [{}, {}]",
            fmt_num(report.failure_frequency),
            fmt_num(report.failure_interval.0),
            fmt_num(report.failure_interval.1)
        );
        match cap {
            Some(p) => {
                let bound = cfg.validation_count() as f64 * p;
                let _ = writeln!(text, "M * P1             {}", fmt_num(bound));
                let _ = writeln!(text, "bound respected    {}", report.failure_interval.0 <= bound);
            }
            None => {
                let _ = writeln!(text, "M * P1             unavailable");
            }
        }
        say(out, &text)?;
    }
    if let Some(dir) = &a.out_dir {
        create_dir(dir)?;
        let mut rec = Recorder::new("mc", argv, params_value(a));
        rec.seed("seed", a.seed);
        if let Some(p) = &a.latents {
            rec.input(p)?;
        }
        write_json(&dir.join("mc.json"), &doc)?;
        rec.output(dir, "mc.json")?;
        rec.finish(dir)?;
    }
    Ok(exit::OK)
}

// ---------------------------------------------------------------- hash, gen

pub fn cmd_hash(a: &HashArgs, argv: &[String], out: &mut dyn Write) -> Result<i32> {
    let digest = hash_model_path(&a.model)?;
    say(out, &format!("{digest}\n"))?;
    if let Some(dir) = &a.out_dir {
        create_dir(dir)?;
        let mut rec = Recorder::new("hash", argv, params_value(a));
        rec.input(&a.model)?;
        write_text(&dir.join("hash.txt"), &format!("{digest}\n"))?;
        rec.output(dir, "hash.txt")?;
        rec.finish(dir)?;
    }
    Ok(exit::OK)
}

pub fn cmd_gen(a: &GenArgs, argv: &[String], out: &mut dyn Write) -> Result<i32> {
    let cfg = SynthConfig {
        input_dim: a.input_dim,
        hidden: a.hidden.clone(),
        classes: a.classes,
        samples: a.samples,
        holdout: a.holdout,
        noise: a.noise,
        seed: a.seed,
    };
    let s = generate(&cfg)?;
    create_dir(&a.out_dir)?;
    let mut rec = Recorder::new("gen", argv, params_value(a));
    rec.seed("seed", a.seed);
    save_model(&a.out_dir.join("model.json"), &s.model)?;
    rec.output(&a.out_dir, "model.json")?;
    write_json(&a.out_dir.join("validation.json"), &VectorSet::new(a.input_dim, s.validation.clone()))?;
    rec.output(&a.out_dir, "validation.json")?;
    write_json(&a.out_dir.join("heldout.json"), &VectorSet::new(a.input_dim, s.heldout.clone()))?;
    rec.output(&a.out_dir, "heldout.json")?;
    rec.finish(&a.out_dir)?;
    say(
        out,
        &format!(
            "model {} parameters, {} validation and {} held-out inputs\n",
            s.model.param_count(),
            s.validation.len(),
            s.heldout.len()
        ),
    )?;
    Ok(exit::OK)
}

// ---------------------------------------------------------------- replay

pub fn cmd_replay(a: &ReplayArgs, out: &mut dyn Write) -> Result<i32> {
    let original: RunManifest = read_json(&a.manifest)?;
    let mut argv = with_out_dir(&original.argv, &a.out_dir)
        .ok_or_else(|| ToolError::Usage("the manifest's command has no --out-dir to replay into".into()))?;
    if let Some(seed) = original.seeds.get("seed") {
        if !argv.iter().any(|s| s == "--seed" || s.starts_with("--seed=")) {
            argv.push(format!("--seed={seed}"));
        }
    }
    let mut changed_inputs = Vec::new();
    for (path, digest) in &original.inputs {
        if file_digest(Path::new(path))? != *digest {
            changed_inputs.push(path.clone());
        }
    }
    if !changed_inputs.is_empty() {
        return Err(ToolError::Verification(format!("inputs changed since the run: {}", changed_inputs.join(", "))));
    }
    let mut sink = Vec::new();
    let code = run_with(&argv, &mut sink);
    let replayed: RunManifest = read_json(&a.out_dir.join(MANIFEST_FILE))?;
    let mismatches = output_mismatches(&original, &replayed);
    if mismatches.is_empty() {
        say(
            out,
            &format!("replayed {} (exit {code}): {} outputs identical\n", original.command, original.outputs.len()),
        )?;
        Ok(exit::OK)
    } else {
        Err(ToolError::Verification(format!("outputs differ: {}", mismatches.join(", "))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_parse_to_nearest_double() {
        assert_eq!(parse_real("1/3").unwrap(), 1.0 / 3.0);
        assert_eq!(parse_real(" 0.9 ").unwrap(), 0.9);
        assert_eq!(parse_real("-2/4").unwrap(), -0.5);
        assert!(parse_real("1/0").is_err());
        assert!(parse_real("abc").is_err());
        assert!(parse_real("inf").is_err());
    }

    #[test]
    fn counts_accept_exponent_form() {
        assert_eq!(parse_count("1e6").unwrap(), 1_000_000);
        assert_eq!(parse_count("42").unwrap(), 42);
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
    }

    #[test]
    fn signs() {
        assert_eq!(parse_sign("-1").unwrap(), Sign::Negative);
        assert_eq!(parse_sign("+1").unwrap(), Sign::Positive);
        assert!(parse_sign("2").is_err());
    }

    #[test]
    fn sweep_expansion() {
        let base = BoundQuery {
            max_validation: 1.0,
            n: 10,
            n_p: None,
            gamma: 0.9,
            delta: 0.5,
            alpha: 0.0,
            eps_collapse: None,
            c: None,
        };
        let qs = sweep_queries(&base, "alpha=0:0.4:5").unwrap();
        assert_eq!(qs.len(), 5);
        assert_eq!(qs[4].alpha, 0.4);
        let ns = sweep_queries(&base, "n=10:20:3").unwrap();
        assert_eq!(ns.iter().map(|q| q.n).collect::<Vec<_>>(), vec![10, 15, 20]);
        assert!(sweep_queries(&base, "beta=0:1:2").is_err());
        assert!(sweep_queries(&base, "alpha=0:1").is_err());
    }

    #[test]
    fn table_aligns_columns() {
        let t = table(&["a", "bb"], &[vec!["100".into(), "1".into()]]);
        assert_eq!(t, "  a  bb\n100   1\n");
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
