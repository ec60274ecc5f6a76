//! Command-line front end: argument parsing, run configuration, command
//! dispatch and CSV/JSON emission.
//!
//! Every command produces a [`Report`]: a fixed column list, rows, free-form
//! diagnostics and optional artifacts (cocycle documents). The CSV is the
//! rows alone; the JSON envelope is `{command, config_digest, columns, rows,
//! diagnostics}`.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::acceptance;
use crate::cocycle::{degree, CocycleDoc, MapExpr, QpCocycle, Sl2Map, DEFAULT_GRID};
use crate::complex_rotation::boundary_scan;
use crate::cone_monitors::{bound_constant, cone_recursion, decay_monitor, decompose_eta0, integrated_quantities, monotone_gaps};
use crate::config::Settings;
use crate::continued_fractions::{expand, expand_partial};
use crate::error::{Error, Result};
use crate::invariants::{fibered_rotation_number, lyapunov_exponent};
use crate::reducibility::{hyperbolic_neighbor, kam_reduce_local, neighbor_cone_test, schrodinger_destabilizer};
use crate::renormalization::{proximity_to_rotation_model, renormalize, rescaled_pair};

pub const DEFAULT_SEED: u64 = 20240611;
const COMMUTATION_NODES: usize = 2049;
const MONOTONE_TOL: f64 = 1e-8;
const CONSTANT_TOL: f64 = 1e-12;

#[derive(Parser, Debug, Clone)]
#[command(name = "qpcocycle", version, about = "Invariants, renormalization and reducibility of quasi-periodic SL(2,R) cocycles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug, Clone, Default)]
pub struct CommonArgs {
    /// Frequency: a number, `golden` or `silver`. Overrides the map document.
    #[arg(long, global = true)]
    pub alpha: Option<String>,
    /// Cocycle document (JSON).
    #[arg(long, global = true)]
    pub map: Option<PathBuf>,
    /// Settings document (JSON); missing fields take their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory receiving `<command>.csv`, `<command>.json` and artifacts.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Sample grid of the map (power of two).
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Degree, fibered rotation number and Lyapunov exponent.
    Invariants,
    /// Continued-fraction table of `alpha`.
    Cf,
    /// Renormalization sequence with commutation and proximity monitors.
    Renorm,
    /// Cone recursion functionals and decay monitor.
    Monitors,
    /// Radial scan of the complex rotation number toward the unit circle.
    ZetaScan {
        /// `start:end:count`, inclusive.
        #[arg(long, default_value = "-0.7:0.7:8", allow_hyphen_values = true)]
        betas: String,
        #[arg(long, default_value = "0.9,0.99,0.999")]
        radii: String,
    },
    /// Local KAM reduction to a constant cocycle.
    Reduce,
    /// Uniformly hyperbolic neighbor of a constant elliptic cocycle.
    #[command(alias = "perturb-hyperbolic")]
    Perturb {
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 2)]
        s: u32,
    },
    /// Schrodinger destabilizing integrals for a conjugacy of nonzero degree.
    #[command(alias = "destabilize-schrodinger")]
    Destabilize {
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Run the acceptance suite.
    Selftest,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Invariants => "invariants",
            Command::Cf => "cf",
            Command::Renorm => "renorm",
            Command::Monitors => "monitors",
            Command::ZetaScan { .. } => "zeta-scan",
            Command::Reduce => "reduce",
            Command::Perturb { .. } => "perturb",
            Command::Destabilize { .. } => "destabilize",
            Command::Selftest => "selftest",
        }
    }

    fn default_depth(&self) -> usize {
        match self {
            Command::Cf => 20,
            Command::Monitors => 6,
            _ => 8,
        }
    }

    fn params(&self) -> Value {
        match self {
            Command::ZetaScan { betas, radii } => json!({ "betas": betas, "radii": radii }),
            Command::Perturb { eps, s } => json!({ "eps": eps, "s": s }),
            Command::Destabilize { delta } => json!({ "delta": delta }),
            _ => json!({}),
        }
    }
}

/// Fully resolved inputs of one run; its JSON form is what gets digested.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub cocycle: Option<CocycleDoc>,
    pub alpha: Option<f64>,
    pub grid: usize,
    pub depth: usize,
    pub tol: f64,
    pub seed: u64,
    pub params: Value,
    pub settings: Settings,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

pub fn parse_alpha(s: &str) -> Result<f64> {
    let v = match s.trim() {
        "golden" => (5f64.sqrt() - 1.0) / 2.0,
        "silver" => 2f64.sqrt() - 1.0,
        t => t.parse::<f64>().map_err(|_| Error::ConfigInvalid(format!("cannot parse alpha `{t}`")))?,
    };
    if !v.is_finite() {
        return Err(Error::ConfigInvalid("alpha must be finite".into()));
    }
    Ok(v)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::ConfigInvalid(format!("cannot read {}: {e}", path.display())))
}

fn check_grid(name: &str, n: usize) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::ConfigInvalid(format!("{name} = {n} is not a power of two")));
    }
    Ok(())
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::ConfigInvalid(format!("{name} = {x} must be positive")));
    }
    Ok(())
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let a = &cli.common;
        let settings: Settings = match &a.config {
            Some(p) => serde_json::from_str(&read(p)?).map_err(|e| Error::ConfigInvalid(format!("settings: {e}")))?,
            None => Settings::default(),
        };
        let alpha = a.alpha.as_deref().map(parse_alpha).transpose()?;
        let mut cocycle = match &a.map {
            Some(p) => Some(CocycleDoc::from_json(&read(p)?)?),
            None => None,
        };
        let grid = a.grid.or(cocycle.as_ref().and_then(|d| d.grid)).unwrap_or(DEFAULT_GRID);
        if let Some(doc) = cocycle.as_mut() {
            if let Some(al) = alpha {
                doc.alpha = al;
            }
            doc.grid = Some(grid);
        }
        let cfg = RunConfig {
            command: cli.command.name().to_string(),
            cocycle,
            alpha,
            grid,
            depth: a.depth.unwrap_or(cli.command.default_depth()),
            tol: a.tol.unwrap_or(settings.section_tol),
            seed: a.seed.unwrap_or(DEFAULT_SEED),
            params: cli.command.params(),
            settings,
            out: a.out.clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.settings;
        check_grid("grid", self.grid)?;
        check_grid("settings.grid", s.grid)?;
        check_grid("settings.renorm_grid", s.renorm_grid)?;
        check_grid("settings.section_grid", s.section_grid)?;
        check_positive("tol", self.tol)?;
        check_positive("settings.section_tol", s.section_tol)?;
        check_positive("settings.cone_margin", s.cone_margin)?;
        check_positive("settings.normal_form_a", s.normal_form_a)?;
        check_positive("settings.normal_form_eps0", s.normal_form_eps0)?;
        check_positive("settings.bump_delta", s.bump_delta)?;
        if s.rotation_iterations == 0 || s.lyapunov_iterations == 0 || s.lyapunov_samples == 0 {
            return Err(Error::ConfigInvalid("iteration counts must be positive".into()));
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        let text = serde_json::to_string(self).expect("run config serializes");
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    fn frequency(&self) -> Result<f64> {
        self.alpha
            .or(self.cocycle.as_ref().map(|d| d.alpha))
            .ok_or_else(|| Error::ConfigInvalid(format!("`{}` needs --alpha or --map", self.command)))
    }

    fn doc(&self) -> Result<&CocycleDoc> {
        self.cocycle.as_ref().ok_or_else(|| Error::ConfigInvalid(format!("`{}` needs --map", self.command)))
    }

    fn cocycle(&self) -> Result<QpCocycle> {
        self.doc()?.build()
    }
}

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i128),
    Float(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:e}"),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => i64::try_from(*v).map(Value::from).unwrap_or_else(|_| Value::String(v.to_string())),
            Cell::Float(v) => json!(v),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}
impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v as i128)
    }
}
impl From<i128> for Cell {
    fn from(v: i128) -> Self {
        Cell::Int(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i128)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}
impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}
impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$(Cell::from($x)),*] };
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub config_digest: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub diagnostics: Value,
    /// `(file name, contents)` written next to the CSV.
    pub artifacts: Vec<(String, String)>,
    /// Set when the command ran but its verdict is negative (`selftest`).
    pub failed: bool,
}

impl Report {
    fn new(columns: &[&'static str]) -> Self {
        Report {
            command: String::new(),
            config_digest: String::new(),
            columns: columns.to_vec(),
            rows: Vec::new(),
            diagnostics: json!({}),
            artifacts: Vec::new(),
            failed: false,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::csv)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }

    pub fn envelope(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let m: Map<String, Value> = self.columns.iter().zip(r).map(|(c, v)| (c.to_string(), v.json())).collect();
                Value::Object(m)
            })
            .collect();
        json!({
            "command": self.command,
            "config_digest": self.config_digest,
            "columns": self.columns,
            "rows": rows,
            "diagnostics": self.diagnostics,
        })
    }

    /// Write the CSV, envelope and artifacts into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        let io = |e: std::io::Error| Error::ConfigInvalid(format!("cannot write to {}: {e}", dir.display()));
        fs::create_dir_all(dir).map_err(io)?;
        fs::write(dir.join(format!("{}.csv", self.command)), self.to_csv()).map_err(io)?;
        let env = serde_json::to_string_pretty(&self.envelope()).expect("envelope serializes");
        fs::write(dir.join(format!("{}.json", self.command)), env + "\n").map_err(io)?;
        for (name, text) in &self.artifacts {
            fs::write(dir.join(name), text).map_err(io)?;
        }
        Ok(())
    }
}

pub fn run(command: &Command, cfg: &RunConfig) -> Result<Report> {
    let result = match command {
        Command::Invariants => invariants(cfg),
        Command::Cf => cf_table(cfg),
        Command::Renorm => renorm(cfg),
        Command::Monitors => monitors(cfg),
        Command::ZetaScan { betas, radii } => zeta_scan(cfg, betas, radii),
        Command::Reduce => reduce(cfg),
        Command::Perturb { eps, s } => perturb(cfg, *eps, *s),
        Command::Destabilize { delta } => destabilize(cfg, *delta),
        Command::Selftest => selftest(cfg),
    };
    let mut report = result.map_err(|e| match e {
        Error::ConfigInvalid(_) | Error::CommandFailed { .. } => e,
        e => e.context(cfg.command.clone()),
    })?;
    report.command = cfg.command.clone();
    report.config_digest = cfg.digest();
    Ok(report)
}

/// Parse, run and emit. Returns the process exit status.
pub fn main_with(cli: &Cli) -> i32 {
    let outcome = RunConfig::from_cli(cli).and_then(|cfg| {
        let report = run(&cli.command, &cfg)?;
        match &cfg.out {
            Some(dir) => report.write_to(dir)?,
            None => print!("{}", report.to_csv()),
        }
        Ok(report)
    });
    match outcome {
        Ok(r) if r.failed => 1,
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.code());
            2
        }
    }
}

fn invariants(cfg: &RunConfig) -> Result<Report> {
    let c = cfg.cocycle()?;
    let s = &cfg.settings;
    let deg = degree(&c.map)?;
    let rot = if deg == 0 { Some(fibered_rotation_number(&c, s.rotation_iterations, 0.0, 0.0)?) } else { None };
    let lyap = lyapunov_exponent(&c, s.lyapunov_iterations, s.lyapunov_samples);
    let mut rep = Report::new(&["alpha", "degree", "rotation", "rotation_residual", "lyapunov", "lyapunov_residual"]);
    rep.rows.push(row![c.alpha, deg, rot.map(|r| r.value), rot.map(|r| r.residual), lyap.value, lyap.residual]);
    rep.diagnostics = json!({
        "rotation_iterations": s.rotation_iterations,
        "lyapunov_iterations": lyap.n,
        "lyapunov_mean": lyap.mean,
        "lyapunov_median": lyap.median,
        "lyapunov_backward": lyap.backward,
    });
    Ok(rep)
}

fn cf_table(cfg: &RunConfig) -> Result<Report> {
    let cf = expand_partial(cfg.frequency()?, cfg.depth)?;
    let mut rep = Report::new(&["k", "a_k", "p_k", "q_k", "beta_k", "alpha_k"]);
    for k in 0..=cf.depth() {
        let ki = k as i64;
        rep.rows.push(row![k, cf.a(k), cf.p(ki), cf.q(ki), cf.beta(ki), cf.alpha_k(k)]);
    }
    let (num, den) = cf.rational();
    rep.diagnostics = json!({ "truncated": cf.truncated, "rational": [num.to_string(), den.to_string()] });
    Ok(rep)
}

fn renorm(cfg: &RunConfig) -> Result<Report> {
    let c = cfg.cocycle()?;
    let cf = Arc::new(expand(c.alpha, cfg.depth + 2)?);
    let states = renormalize(&c, cf, cfg.depth, 0.0)?;
    let mut rep = Report::new(&["k", "beta_prev", "alpha_k", "commutation_defect", "distance_to_E_r", "r"]);
    let mut notes = Vec::new();
    for s in &states {
        let comm = match rescaled_pair(s) {
            Ok(p) => Some(p.commutation_defect(COMMUTATION_NODES)),
            Err(e) => {
                notes.push(format!("k = {}: rescaling: {e}", s.k));
                None
            }
        };
        let prox = match proximity_to_rotation_model(s) {
            Ok(p) => Some(p),
            Err(e) => {
                notes.push(format!("k = {}: proximity: {e}", s.k));
                None
            }
        };
        rep.rows.push(row![s.k, s.beta_prev(), s.alpha_k(), comm, prox.map(|p| p.distance), prox.map(|p| p.r)]);
    }
    let freq = states.iter().map(|s| s.frequency_defect()).fold(0.0, f64::max);
    rep.diagnostics = json!({ "frequency_defect": freq, "notes": notes });
    Ok(rep)
}

fn monitors(cfg: &RunConfig) -> Result<Report> {
    let c = cfg.cocycle()?;
    let cf = expand(c.alpha, cfg.depth + 2)?;
    let dec = decompose_eta0(&c, cfg.settings.cone_margin)?;
    let rec = cone_recursion(&dec, &c, &cf, cfg.depth)?;
    let qs: Vec<_> = rec.levels.iter().map(|l| integrated_quantities(l, &cf)).collect();
    let gaps = monotone_gaps(&qs);
    let decay = decay_monitor(&rec, &c, &cf);
    let two_m = 2.0 * bound_constant(rec.sup_norm, &dec);
    let mut rep = Report::new(&[
        "k", "e_plus", "e_minus", "f_plus", "f_minus", "u_plus", "u_minus", "ubar", "epsilon", "flags",
    ]);
    for q in &qs {
        let d = decay.iter().find(|d| d.k == q.k);
        let mut flags = Vec::new();
        if gaps.iter().any(|g| g.k == q.k && g.plus.min(g.minus) < -MONOTONE_TOL) {
            flags.push("nonmonotone");
        }
        if q.ubar_plus.max(q.ubar_minus) > two_m {
            flags.push("above_2m");
        }
        if d.is_some_and(|d| d.sigma_window) {
            flags.push("sigma_window");
        }
        rep.rows.push(row![
            q.k,
            q.e_plus,
            q.e_minus,
            q.f_plus,
            q.f_minus,
            q.u_plus,
            q.u_minus,
            q.ubar,
            d.map(|d| d.epsilon),
            flags.join(";"),
        ]);
    }
    rep.diagnostics = json!({ "two_m": two_m, "sup_norm": rec.sup_norm, "decay": decay, "gaps": gaps });
    Ok(rep)
}

pub fn parse_betas(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::ConfigInvalid(format!("betas `{spec}` is not start:end:count"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    match n {
        0 => Err(bad()),
        1 => Ok(vec![a]),
        _ => Ok((0..n).map(|j| a + (b - a) * j as f64 / (n - 1) as f64).collect()),
    }
}

pub fn parse_radii(spec: &str) -> Result<Vec<f64>> {
    spec.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::ConfigInvalid(format!("cannot parse radius `{t}`"))))
        .collect()
}

fn zeta_scan(cfg: &RunConfig, betas: &str, radii: &str) -> Result<Report> {
    let c = cfg.cocycle()?;
    let betas = parse_betas(betas)?;
    let radii = parse_radii(radii)?;
    let scan = boundary_scan(&c, &betas, &radii, cfg.settings.section_grid, cfg.tol, &cfg.settings)?;
    let mut rep = Report::new(&["beta", "r", "re_zeta", "im_zeta", "lyap_direct", "rot_direct"]);
    for p in &scan.points {
        for r in &p.rows {
            rep.rows.push(row![p.beta, r.r, r.zeta.re, r.zeta.im, p.lyap_direct, p.rot_direct]);
        }
        rep.rows.push(row![p.beta, 1.0, p.boundary.re, p.boundary.im, p.lyap_direct, p.rot_direct]);
    }
    let rotation: Vec<f64> = scan.points.iter().map(|p| p.rotation).collect();
    rep.diagnostics = json!({
        "boundary_rows": "r = 1 rows are Richardson extrapolations over the radii",
        "boundary_rotation": rotation,
        "max_im_jump": scan.max_im_jump,
        "im_variation": scan.im_variation,
    });
    Ok(rep)
}

fn map_doc(alpha: f64, map: &Sl2Map) -> String {
    CocycleDoc { alpha, map: map.expr().clone(), grid: Some(map.grid_len()) }.to_json() + "\n"
}

fn reduce(cfg: &RunConfig) -> Result<Report> {
    let c = cfg.cocycle()?;
    let out = kam_reduce_local(&c, cfg.settings.kam_max_steps, &cfg.settings)?;
    let mut rep = Report::new(&["step", "truncation", "defect", "correction"]);
    for s in &out.steps {
        rep.rows.push(row![s.step, s.truncation, s.defect, s.correction]);
    }
    rep.diagnostics = json!({
        "constant": out.constant,
        "angle": out.angle,
        "final_defect": out.final_defect,
        "check": out.check,
    });
    rep.artifacts.push(("conjugacy.json".into(), map_doc(c.alpha, &out.conjugacy)));
    rep.artifacts.push(("constant.json".into(), map_doc(c.alpha, &Sl2Map::constant(out.constant))));
    Ok(rep)
}

fn perturb(cfg: &RunConfig, eps: f64, s: u32) -> Result<Report> {
    check_positive("eps", eps)?;
    let doc = cfg.doc()?;
    let m = Sl2Map::with_grid(doc.map.clone(), cfg.grid)?;
    let a0 = m.samples()[0];
    if m.samples().iter().any(|x| (*x - a0).op_norm() > CONSTANT_TOL) {
        return Err(Error::ConfigInvalid("`perturb` needs a constant map".into()));
    }
    let nb = hyperbolic_neighbor(&a0, doc.alpha, eps, s, cfg.grid)?;
    let slope = neighbor_cone_test(&nb, doc.alpha, 512);
    let mut rep = Report::new(&["k", "log_spec_h", "angle", "distance", "cone_slope"]);
    rep.rows.push(row![nb.k, nb.h, nb.angle, nb.distance, slope]);
    rep.diagnostics = json!({ "eps": eps, "s": s, "rotation_conjugacy": nb.conj });
    rep.artifacts.push(("neighbor.json".into(), map_doc(doc.alpha, &nb.map)));
    Ok(rep)
}

fn destabilize(cfg: &RunConfig, delta: Option<f64>) -> Result<Report> {
    let b = cfg.cocycle()?.map;
    let out = schrodinger_destabilizer(&b, delta.unwrap_or(cfg.settings.bump_delta))?;
    let mut rep = Report::new(&["x", "y", "delta", "lambda", "mu", "nu", "margin", "mu_limit", "nu_limit"]);
    rep.rows.push(row![out.x, out.y, out.delta, out.lambda, out.mu, out.nu, out.margin, out.mu_limit, out.nu_limit]);
    rep.diagnostics = json!({ "w": out.w });
    Ok(rep)
}

fn selftest(cfg: &RunConfig) -> Result<Report> {
    let mut rep = Report::new(&["id", "name", "pass", "detail"]);
    let mut seconds = Vec::new();
    for c in acceptance::criteria() {
        let o = c.run(cfg.seed);
        eprintln!("{}", o.line());
        rep.failed |= !o.pass;
        seconds.push(o.seconds);
        rep.rows.push(row![o.id, o.name, if o.pass { "true" } else { "false" }, o.detail]);
    }
    rep.diagnostics = json!({ "seconds": seconds });
    Ok(rep)
}

/// Cocycle document for `R_ψ` over `α`, the simplest CLI input.
pub fn rotation_doc(alpha: f64, psi: f64) -> CocycleDoc {
    CocycleDoc { alpha, map: MapExpr::Const { m: crate::sl2_geometry::Mat2R::rotation_turns(psi) }, grid: None }
}
