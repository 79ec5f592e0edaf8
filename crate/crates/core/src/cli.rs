//! Command-line front end: config parsing, subcommands and output files.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::harness::{sweep_p, verify_linear_rates, RateOptions, SweepOptions, SweepResult, Tracked};
use crate::kernel::{eval_psi, eval_psi_zero_mode, eval_psi_zero_mode_dt, ode_oracle, ZoneLabel};
use crate::predictor::{critical_exponent, existence_verdict, linear_decay, semilinear_decay, Quantity};
use crate::solver::{
    linear_trajectory, make_initial_data, points_for, semilinear_solve, write_field, Controls,
    DataSpec, Grid, Scheme, Status, Trajectory, BOX_FACTOR,
};
use crate::ModelParams;

pub const EXIT_OK: i32 = 0;
/// Runtime failure that is neither a bad config nor a solver verdict.
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;
pub const EXIT_BLOWUP: i32 = 4;
pub const EXIT_TOLERANCE: i32 = 5;

/// Caps the rayon pool when set to a positive integer.
pub const THREADS_ENV: &str = "SIGMA_EVOLVE_THREADS";

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    fn failure(message: impl ToString) -> Self {
        Self {
            code: EXIT_FAILURE,
            message: message.to_string(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "sigma-evolve", version, about = "Damped sigma-evolution laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Critical exponents, linear decay rates and existence verdicts.
    Predict(CommonArgs),
    /// One kernel value as a single JSON line.
    Kernel(KernelArgs),
    /// Linear or semilinear trajectory with a manifest.
    Simulate(CommonArgs),
    /// Classify behaviour over a list of p.
    Sweep(CommonArgs),
    /// Fit linear decay rates and compare with the predictions.
    Verify(CommonArgs),
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides output.directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated q exponents; `inf` is accepted.
    #[arg(long, value_delimiter = ',', value_parser = parse_exponent)]
    pub q: Option<Vec<f64>>,
    /// Seed for random initial data.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Clone)]
pub struct KernelArgs {
    #[arg(long)]
    pub t: f64,
    #[arg(long, default_value_t = 0.0)]
    pub s: f64,
    #[arg(long)]
    pub xi: f64,
    #[arg(long, default_value_t = 0)]
    pub j: u8,
    #[arg(long, default_value_t = 0)]
    pub k: u8,
    /// Params are read from here unless given as flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    /// Compare with the mode ODE integrated directly.
    #[arg(long)]
    pub check: bool,
}

fn parse_exponent(s: &str) -> Result<f64, String> {
    match s.trim() {
        "inf" | "infinity" | "Infinity" => Ok(f64::INFINITY),
        v => v.parse::<f64>().map_err(|e| format!("{v}: {e}")),
    }
}

/// A q exponent that round-trips ∞ as the string "inf".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent(pub f64);

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Exponent(v)),
            Raw::Str(s) => parse_exponent(&s).map(Exponent).map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum BoxSize {
    #[default]
    Auto,
    HalfLength(f64),
}

impl Serialize for BoxSize {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            BoxSize::Auto => s.serialize_str("auto"),
            BoxSize::HalfLength(l) => s.serialize_f64(*l),
        }
    }
}

impl<'de> Deserialize<'de> for BoxSize {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(BoxSize::HalfLength(v)),
            Raw::Str(s) if s == "auto" => Ok(BoxSize::Auto),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "box must be \"auto\" or a half-length (got {s:?})"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Defaults to params.n.
    pub dim: Option<usize>,
    /// Defaults to the smallest admissible power of two for the box.
    pub points: Option<usize>,
    #[serde(rename = "box")]
    pub box_size: BoxSize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Predict,
    Simulate,
    Sweep,
    Verify,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Option<Kind>,
    /// Nonlinearity power; a simulation without it is linear.
    pub p: Option<f64>,
    pub p_list: Vec<f64>,
    pub q_list: Vec<Exponent>,
    pub gamma_list: Vec<f64>,
    #[serde(rename = "T", alias = "t_final")]
    pub t_final: f64,
    pub data: DataSpec,
    pub scheme: Scheme,
    pub controls: Controls,
    /// Fit window; defaults to [T/10, T].
    pub window: Option<(f64, f64)>,
    pub tracked: Tracked,
    pub max_box_doublings: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: None,
            p: None,
            p_list: Vec::new(),
            q_list: Vec::new(),
            gamma_list: Vec::new(),
            t_final: 1000.0,
            data: DataSpec::default(),
            scheme: Scheme::default(),
            controls: Controls::default(),
            window: None,
            tracked: Tracked::default(),
            max_box_doublings: RateOptions::default().max_box_doublings,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Json],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub params: ModelParams,
    pub grid: GridConfig,
    pub experiment: ExperimentConfig,
    pub output: OutputConfig,
}

fn section<T: for<'de> Deserialize<'de> + Default>(root: &Value, name: &str) -> CliResult<T> {
    match root.get(name) {
        None | Some(Value::Null) => Ok(T::default()),
        Some(v) => T::deserialize(v).map_err(|e| CliError::config(format!("{name}: {e}"))),
    }
}

fn params_from(root: &Value) -> CliResult<ModelParams> {
    let p = root
        .get("params")
        .and_then(Value::as_object)
        .ok_or_else(|| CliError::config("params required"))?;
    if let Some(key) = p.keys().find(|k| !matches!(k.as_str(), "n" | "sigma" | "mu")) {
        return Err(CliError::config(format!("params.{key} is not a known field")));
    }
    let num = |key: &str| -> CliResult<f64> {
        match p.get(key) {
            None | Some(Value::Null) => Err(CliError::config(format!("params.{key} required"))),
            Some(v) => v
                .as_f64()
                .ok_or_else(|| CliError::config(format!("params.{key} must be a number"))),
        }
    };
    let n = num("n")?;
    if !(n >= 1.0 && n.fract() == 0.0 && n <= u32::MAX as f64) {
        return Err(CliError::config(format!("params.n must be a positive integer (got {n})")));
    }
    ModelParams::new(n as u32, num("sigma")?, num("mu")?)
        .map_err(|e| CliError::config(e.to_string()))
}

impl RunConfig {
    pub fn from_value(root: &Value) -> CliResult<Self> {
        if !root.is_object() {
            return Err(CliError::config("config must be a JSON object"));
        }
        let known = ["params", "grid", "experiment", "output"];
        if let Some(key) = root.as_object().unwrap().keys().find(|k| !known.contains(&k.as_str())) {
            return Err(CliError::config(format!("{key} is not a known section")));
        }
        Ok(Self {
            params: params_from(root)?,
            grid: section(root, "grid")?,
            experiment: section(root, "experiment")?,
            output: section(root, "output")?,
        })
    }

    pub fn load(path: &Path) -> CliResult<(Self, Value)> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let root: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        Ok((Self::from_value(&root)?, root))
    }

    fn apply(&mut self, args: &CommonArgs) {
        if let Some(out) = &args.out {
            self.output.directory = out.clone();
        }
        if let Some(q) = &args.q {
            self.experiment.q_list = q.iter().map(|&v| Exponent(v)).collect();
        }
        if let Some(seed) = args.seed {
            if let DataSpec::Random { seed: s, .. } = &mut self.experiment.data {
                *s = seed;
            }
        }
    }

    fn q_values(&self) -> Vec<f64> {
        self.experiment.q_list.iter().map(|e| e.0).collect()
    }

    /// Finite q for the extra trajectory columns; L^∞ is always recorded.
    fn extra_q(&self) -> Vec<f64> {
        self.q_values().into_iter().filter(|q| q.is_finite()).collect()
    }

    /// Grid for horizon T; `box = auto` applies L = 16·(1+T)^{1/σ}.
    pub fn build_grid(&self) -> CliResult<Grid> {
        let dim = self.grid.dim.unwrap_or(self.params.n() as usize);
        let t = self.experiment.t_final.max(0.0);
        let l = match self.grid.box_size {
            BoxSize::Auto => BOX_FACTOR * (1.0 + t).powf(1.0 / self.params.sigma()),
            BoxSize::HalfLength(l) => l,
        };
        let points = self.grid.points.unwrap_or_else(|| points_for(l));
        Grid::new(dim, points, l).map_err(|e| CliError::config(format!("grid: {e}")))
    }

    fn explicit_grid(&self) -> bool {
        self.grid != GridConfig::default()
    }

    fn wants(&self, f: Format) -> bool {
        self.output.formats.contains(&f)
    }

    fn check_kind(&self, kind: Kind) -> CliResult<()> {
        match self.experiment.kind {
            Some(k) if k != kind => Err(CliError::config(format!(
                "experiment.kind is {k:?} but the subcommand is {kind:?}"
            ))),
            _ => Ok(()),
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn out_dir(cfg: &RunConfig) -> CliResult<PathBuf> {
    let dir = cfg.output.directory.clone();
    fs::create_dir_all(&dir).map_err(|e| CliError::config(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

fn write(dir: &Path, name: &str, contents: &str) -> CliResult<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

fn mass_positive(cfg: &RunConfig) -> CliResult<bool> {
    let grid = Arc::new(cfg.build_grid()?);
    let u1 = make_initial_data(&cfg.experiment.data, &grid)
        .map_err(|e| CliError::config(format!("experiment.data: {e}")))?;
    Ok(u1.mass() > 0.0)
}

fn quantity_of(q: f64) -> Quantity {
    if q.is_infinite() {
        Quantity::Linf
    } else {
        Quantity::Lq { q }
    }
}

pub fn cmd_predict(cfg: &RunConfig) -> CliResult<Value> {
    cfg.check_kind(Kind::Predict)?;
    let params = &cfg.params;
    let exps = critical_exponent(params).map_err(CliError::failure)?;
    let mut qs = cfg.q_values();
    if qs.is_empty() {
        qs = vec![2.0, f64::INFINITY];
    }
    let mut gammas = cfg.experiment.gamma_list.clone();
    if gammas.is_empty() {
        gammas = vec![0.0, params.sigma()];
    }
    let quantities: Vec<Quantity> = qs
        .iter()
        .map(|&q| quantity_of(q))
        .chain(gammas.iter().map(|&gamma| Quantity::HdotGamma { gamma }))
        .chain([Quantity::UtL2])
        .collect();
    let row = |q: Quantity, r: Result<_, crate::predictor::PredictError>| match r {
        Ok(p) => json!({ "quantity": q.to_string(), "prediction": p }),
        Err(e) => json!({ "quantity": q.to_string(), "error": e.to_string() }),
    };
    let linear: Vec<Value> = quantities
        .iter()
        .map(|&q| row(q, linear_decay(q, 0.0, params)))
        .collect();
    let semilinear: Vec<Value> = quantities
        .iter()
        .map(|&q| row(q, semilinear_decay(q, params)))
        .collect();

    let mut ps = cfg.experiment.p_list.clone();
    ps.extend(cfg.experiment.p);
    let verdicts = if ps.is_empty() {
        Vec::new()
    } else {
        let positive = mass_positive(cfg)?;
        ps.iter()
            .map(|&p| match existence_verdict(p, params, positive) {
                Ok(v) => json!({ "p": p, "verdict": v }),
                Err(e) => json!({ "p": p, "error": e.to_string() }),
            })
            .collect()
    };
    Ok(json!({
        "params": params,
        "exponents": exps,
        "linear_decay": linear,
        "semilinear_decay": semilinear,
        "verdicts": verdicts,
    }))
}

fn kernel_params(args: &KernelArgs) -> CliResult<ModelParams> {
    let file = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
            let root: Value = serde_json::from_str(&text)
                .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
            root.get("params").cloned().unwrap_or(Value::Null)
        }
        None => Value::Null,
    };
    let mut p = file.as_object().cloned().unwrap_or_default();
    if let Some(n) = args.n {
        p.insert("n".into(), json!(n));
    }
    if let Some(s) = args.sigma {
        p.insert("sigma".into(), json!(s));
    }
    if let Some(m) = args.mu {
        p.insert("mu".into(), json!(m));
    }
    p.entry("n").or_insert(json!(1));
    params_from(&json!({ "params": p }))
}

pub fn cmd_kernel(args: &KernelArgs) -> CliResult<Value> {
    let params = kernel_params(args)?;
    let bad = |e: crate::kernel::KernelError| CliError::config(e.to_string());
    if args.j + args.k > 1 {
        return Err(CliError::config("j + k must be at most 1"));
    }
    let (psi, zone, form) = if args.xi == 0.0 {
        let v = match (args.j, args.k) {
            (1, _) => {
                // |ξ|^σ ψ vanishes at ξ = 0; still validate the times.
                eval_psi_zero_mode(args.t, args.s, &params).map_err(bad)?;
                0.0
            }
            (_, 1) => eval_psi_zero_mode_dt(args.t, args.s, &params).map_err(bad)?,
            _ => eval_psi_zero_mode(args.t, args.s, &params).map_err(bad)?,
        };
        (v, ZoneLabel::Zero, Value::Null)
    } else {
        let e = eval_psi(args.t, args.s, args.xi, args.j, args.k, &params).map_err(bad)?;
        (e.psi.re, e.zone, json!(e.form))
    };
    let mut doc = json!({
        "t": args.t,
        "s": args.s,
        "xi": args.xi,
        "j": args.j,
        "k": args.k,
        "psi": psi,
        "zone": zone,
        "form": form,
    });
    if args.check {
        let oracle = if args.xi == 0.0 {
            psi
        } else {
            let (v, vt) = ode_oracle(args.t, args.s, args.xi, &params).map_err(CliError::failure)?;
            let base = if args.k == 1 { vt } else { v };
            base * args.xi.powf(params.sigma() * args.j as f64)
        };
        doc["oracle"] = json!(oracle);
        doc["oracle_delta"] = json!((psi - oracle).abs());
    }
    Ok(doc)
}

fn trajectory_summary(traj: &Trajectory) -> Value {
    json!({
        "status": traj.status,
        "records": traj.len(),
        "final_time": traj.final_time(),
        "final_record": traj.records.last(),
        "data_norms": traj.data_norms,
        "edge_ratio": traj.edge_ratio,
        "picard_sweeps": traj.residual_history.len(),
    })
}

pub fn cmd_simulate(cfg: &RunConfig, raw: &Value) -> CliResult<i32> {
    cfg.check_kind(Kind::Simulate)?;
    let exp = &cfg.experiment;
    let mut controls = exp.controls.clone();
    controls.q_list = cfg.extra_q();
    let grid = Arc::new(cfg.build_grid()?);
    let u1 = make_initial_data(&exp.data, &grid)
        .map_err(|e| CliError::config(format!("experiment.data: {e}")))?;
    let traj = match exp.p {
        Some(p) => semilinear_solve(&u1, p, exp.t_final, &cfg.params, exp.scheme, &controls),
        None => linear_trajectory(&u1, exp.t_final, &cfg.params, &controls),
    }
    .map_err(|e| match e {
        crate::solver::SolverError::Input(m) => CliError::config(m),
        e => CliError::failure(e),
    })?;

    let dir = out_dir(cfg)?;
    let mut files = Vec::new();
    // An empty horizon leaves a single record, which the manifest carries.
    if exp.t_final > 0.0 && cfg.wants(Format::Csv) {
        write(&dir, "trajectory.csv", &traj.to_csv())?;
        files.push("trajectory.csv".to_string());
    }
    for snap in &traj.snapshots {
        let idx = traj.times.iter().position(|&t| t == snap.time).unwrap_or(0);
        let name = format!("snapshot_{idx:05}.csv");
        write_field(&dir.join(&name), &snap.u).map_err(|e| CliError::config(e.to_string()))?;
        files.push(name);
    }
    let mut manifest = json!({
        "command": "simulate",
        "config": raw,
        "resolved": cfg,
        "grid": grid.spec(),
        "linear": exp.p.is_none(),
        "trajectory": trajectory_summary(&traj),
        "files": files,
    });
    if exp.t_final <= 0.0 {
        manifest["times"] = json!(traj.times);
        manifest["records"] = json!(traj.records);
    }
    if traj.status == Status::ToleranceAbort {
        manifest["residual_history"] = json!(traj.residual_history);
    }
    write(&dir, "manifest.json", &to_json(&manifest))?;
    Ok(match traj.status {
        Status::Completed => EXIT_OK,
        Status::BlowupAbort => EXIT_BLOWUP,
        Status::ToleranceAbort => EXIT_TOLERANCE,
    })
}

fn sweep_csv(res: &SweepResult) -> String {
    let mut out = String::from("p,observed,predicted,max_norm_ratio,end_time,status,late_slope,error\n");
    let tag = |v: Value| v.as_str().map(str::to_string).unwrap_or_default();
    for r in &res.records {
        let _ = writeln!(
            out,
            "{:e},{},{},{:e},{:e},{},{},{}",
            r.p,
            tag(json!(r.observed)),
            tag(json!(r.predicted.as_ref().map(|v| v.kind))),
            r.max_norm_ratio,
            r.end_time,
            tag(json!(r.status)),
            r.late_slope.map(|s| format!("{s:e}")).unwrap_or_default(),
            r.error.as_deref().unwrap_or("").replace([',', '\n'], ";")
        );
    }
    out
}

pub fn cmd_sweep(cfg: &RunConfig, raw: &Value) -> CliResult<i32> {
    cfg.check_kind(Kind::Sweep)?;
    let exp = &cfg.experiment;
    let mut ps = exp.p_list.clone();
    if ps.is_empty() {
        ps.extend(exp.p);
    }
    if ps.is_empty() {
        return Err(CliError::config("experiment.p_list required"));
    }
    let mut controls = exp.controls.clone();
    controls.q_list = cfg.extra_q();
    let opts = SweepOptions {
        grid: Some(cfg.build_grid()?.spec()),
        scheme: exp.scheme,
        controls,
        tracked: exp.tracked,
    };
    let res = sweep_p(&ps, &cfg.params, &exp.data, exp.t_final, &opts).map_err(CliError::failure)?;
    let dir = out_dir(cfg)?;
    if cfg.wants(Format::Csv) {
        write(&dir, "sweep.csv", &sweep_csv(&res))?;
    }
    write(
        &dir,
        "sweep.json",
        &to_json(&json!({ "config": raw, "resolved": cfg, "result": res })),
    )?;
    Ok(EXIT_OK)
}

pub fn cmd_verify(cfg: &RunConfig, raw: &Value) -> CliResult<i32> {
    cfg.check_kind(Kind::Verify)?;
    let exp = &cfg.experiment;
    let mut qs = cfg.q_values();
    if qs.is_empty() && exp.gamma_list.is_empty() {
        qs.push(2.0);
    }
    let opts = RateOptions {
        grid: if cfg.explicit_grid() {
            Some(cfg.build_grid()?.spec())
        } else {
            None
        },
        data: exp.data.clone(),
        window: exp.window,
        m_steps: exp.controls.m_steps,
        max_box_doublings: exp.max_box_doublings,
    };
    let report = verify_linear_rates(&cfg.params, &qs, &exp.gamma_list, exp.t_final, &opts)
        .map_err(CliError::failure)?;
    let dir = out_dir(cfg)?;
    if cfg.wants(Format::Csv) {
        write(&dir, "verify.csv", &report.to_csv())?;
    }
    write(
        &dir,
        "verify.json",
        &to_json(&json!({ "config": raw, "resolved": cfg, "report": report })),
    )?;
    Ok(if report.all_pass() { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::config(format!("{THREADS_ENV} must be a positive integer (got {v:?})")))?;
    // A pool that already exists (a second call in one process) is kept.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn dispatch(cli: Cli) -> CliResult<i32> {
    configure_threads()?;
    let load = |args: &CommonArgs| -> CliResult<(RunConfig, Value)> {
        let (mut cfg, raw) = RunConfig::load(&args.config)?;
        cfg.apply(args);
        Ok((cfg, raw))
    };
    match cli.command {
        Command::Predict(args) => {
            let (cfg, raw) = load(&args)?;
            let mut doc = cmd_predict(&cfg)?;
            doc["config"] = raw;
            let text = to_json(&doc);
            if cfg.wants(Format::Json) {
                write(&out_dir(&cfg)?, "exponents.json", &text)?;
            }
            print!("{text}");
            Ok(EXIT_OK)
        }
        Command::Kernel(args) => {
            println!("{}", cmd_kernel(&args)?);
            Ok(EXIT_OK)
        }
        Command::Simulate(args) => {
            let (cfg, raw) = load(&args)?;
            cmd_simulate(&cfg, &raw)
        }
        Command::Sweep(args) => {
            let (cfg, raw) = load(&args)?;
            cmd_sweep(&cfg, &raw)
        }
        Command::Verify(args) => {
            let (cfg, raw) = load(&args)?;
            cmd_verify(&cfg, &raw)
        }
    }
}

/// Parses arguments, runs the subcommand and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
