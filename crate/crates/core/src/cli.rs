//! Scenario-file driven command line front end.
//!
//! Every command reads a JSON [`ScenarioFile`], runs one part of the solver and
//! writes CSV or JSON. Floats in CSV use 17 significant digits and rows come
//! in a fixed order, so identical inputs give byte-identical outputs.
//!
//! Exit codes: `0` success, `1` invalid configuration, `2` numeric failure
//! (including a failed `verify`), `3` the solution breaks down before the
//! requested time; the shock report then goes to standard error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::analysis::{effective_velocity_coefficient, quantum_potential, HBAR_SI};
use crate::characteristics::{
    arrival_time, collapse_times, layer_point, layer_speed, shock_time, speed_asymptote, Asymptote,
    ShockReport,
};
use crate::density::{snapshot, PointStatus};
use crate::error::Error;
use crate::kernels::{Interaction, KernelKind, Regime, Symmetry};
use crate::model::{geometric_grid, layer_coefficients, InitialProfile, LayerCoefficients, Scenario};
use crate::oracle::{integrate_layer_ode_at, radius_from_time_of_flight};

/// Physical constants; in nondimensional mode missing values default to one.
#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub interaction: Interaction,
    pub symmetry: Symmetry,
    pub regime: Regime,
    #[serde(default)]
    pub q: Option<f64>,
    #[serde(default)]
    pub m: Option<f64>,
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub eps0: Option<f64>,
    #[serde(default, rename = "G")]
    pub g: Option<f64>,
    #[serde(default)]
    pub slab_height_ell: Option<f64>,
}

/// Lagrangian radii of the layers to follow.
#[derive(Debug, Clone, Default, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GridSpec {
    /// Geometric grid over the profile's support.
    #[default]
    Support,
    Geometric { r_min: f64, r_max: f64 },
    Linear { r_min: f64, r_max: f64 },
    Explicit { radii: Vec<f64> },
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Local error tolerance of the ODE integrator.
    pub ode: f64,
    /// Allowed `|R_closed − R_ode| / R₀` in `verify`.
    pub verify_ode: f64,
    /// Allowed `|R_closed − R_quadrature| / R₀` in `verify`.
    pub verify_quadrature: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            ode: 1e-11,
            verify_ode: 1e-6,
            verify_quadrature: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    /// Snapshot time for the quantum potential (default `t_max`).
    pub t: Option<f64>,
    /// Particle mass (default: the scenario's `m`).
    pub mass: Option<f64>,
    /// Reduced Planck constant (default 1, or the SI value when not nondimensional).
    pub hbar: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Constants default to one; otherwise all of them must be given.
    pub nondimensionalize: bool,
    /// End of the time window. Default: `10/λ` of the outermost layer for
    /// expansion, `0.95×` the earliest center arrival for collapse.
    pub t_max: Option<f64>,
    pub n_layers: usize,
    pub n_time_samples: usize,
    pub r_grid: GridSpec,
    /// Explicit snapshot times for `density` (default: evenly spaced).
    pub snapshot_times: Option<Vec<f64>>,
    pub tolerances: Tolerances,
    pub analysis: AnalysisConfig,
    /// Output file per command name, relative to the scenario file.
    pub outputs: BTreeMap<String, PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            nondimensionalize: true,
            t_max: None,
            n_layers: 32,
            n_time_samples: 41,
            r_grid: GridSpec::Support,
            snapshot_times: None,
            tolerances: Tolerances::default(),
            analysis: AnalysisConfig::default(),
            outputs: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub scenario: ScenarioSpec,
    pub profile: InitialProfile,
    #[serde(default)]
    pub run: RunConfig,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Numeric(Error),
    #[error("solution breaks down at t = {t} before the requested time {requested}")]
    Shock {
        t: f64,
        requested: f64,
        report: Box<ShockReport>,
        /// Output produced up to the breakdown.
        partial: Vec<Output>,
    },
    #[error("verification failed")]
    VerifyFailed(Vec<Output>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 1,
            Self::Numeric(_) | Self::VerifyFailed(_) => 2,
            Self::Shock { .. } => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(msg) => Self::Config(msg),
            Error::NotApplicable(_) | Error::QuasiRelativism { .. } => Self::Config(e.to_string()),
            e => Self::Numeric(e),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    Rel,
    Classical,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Scenario file (JSON).
    #[arg(long)]
    pub scenario: PathBuf,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Number of layers.
    #[arg(long)]
    pub layers: Option<usize>,
    /// Number of time samples.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, value_enum)]
    pub regime: Option<RegimeArg>,
    /// Accepted for interface stability; every algorithm is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Layer trajectories: t, r0, R, beta.
    Characteristics(RunArgs),
    /// Density snapshots: t, r0, R, rho, jac, near_caustic.
    Density(RunArgs),
    /// Layer speeds and their limits: t, r0, beta, beta_inf.
    Velocity(RunArgs),
    /// Earliest crossing of characteristics (JSON).
    Shock(RunArgs),
    /// Collapse times of a uniform classical body (JSON).
    Collapse(RunArgs),
    /// Quantum potential of a snapshot and the linear velocity coefficient.
    Analyze(RunArgs),
    /// Compare the closed forms with ODE integration and time-of-flight quadrature.
    Verify {
        #[command(flatten)]
        run: RunArgs,
        /// Check all eight kernel kinds with the file's constants and profile.
        #[arg(long)]
        all_kinds: bool,
    },
    /// Print the JSON schema of scenario files.
    Schema {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Parser)]
#[command(name = "radyn", version, about = "Exact radial expansion and collapse of self-interacting densities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// One emitted document and where it goes (`None` = standard output).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub path: Option<PathBuf>,
    pub contents: String,
}

/// Scenario file resolved against command line overrides.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub scenario: Scenario,
    pub profile: InitialProfile,
    pub run: RunConfig,
    pub grid: Vec<f64>,
    pub t_max: f64,
    pub out: Option<PathBuf>,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn json<T: Serialize>(v: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Config(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| if i == n - 1 { b } else { a + (b - a) * i as f64 / (n - 1) as f64 })
        .collect()
}

impl ScenarioSpec {
    pub fn to_scenario(&self, nondimensional: bool) -> CliResult<Scenario> {
        let get = |name: &str, v: Option<f64>| -> CliResult<f64> {
            match (v, nondimensional) {
                (Some(v), _) => Ok(v),
                (None, true) => Ok(1.0),
                (None, false) => Err(CliError::Config(format!(
                    "`{name}` is required unless run.nondimensionalize is set"
                ))),
            }
        };
        let s = Scenario {
            interaction: self.interaction,
            symmetry: self.symmetry,
            regime: self.regime,
            q: get("q", self.q)?,
            m: get("m", self.m)?,
            c: get("c", self.c)?,
            eps0: get("eps0", self.eps0)?,
            g: get("G", self.g)?,
            slab_height_ell: get("slab_height_ell", self.slab_height_ell)?,
        };
        s.validate()?;
        Ok(s)
    }
}

impl ScenarioFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Apply overrides, validate, and fix the layer grid and time window.
    pub fn resolve(mut self, args: &RunArgs, base: Option<&Path>, command: &str) -> CliResult<Resolved> {
        if let Some(n) = args.layers {
            self.run.n_layers = n;
        }
        if let Some(n) = args.samples {
            self.run.n_time_samples = n;
        }
        if let Some(r) = args.regime {
            self.scenario.regime = match r {
                RegimeArg::Rel => Regime::Relativistic,
                RegimeArg::Classical => Regime::Classical,
            };
        }
        let run = &self.run;
        if run.n_layers < 2 {
            return Err(CliError::Config(format!("n_layers must be >= 2, got {}", run.n_layers)));
        }
        if run.n_time_samples < 2 {
            return Err(CliError::Config(format!(
                "n_time_samples must be >= 2, got {}",
                run.n_time_samples
            )));
        }
        let tol = &run.tolerances;
        for (name, v) in [
            ("ode", tol.ode),
            ("verify_ode", tol.verify_ode),
            ("verify_quadrature", tol.verify_quadrature),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("tolerance `{name}` must be positive, got {v}")));
            }
        }
        let scenario = self.scenario.to_scenario(run.nondimensionalize)?;
        self.profile.validate()?;

        let grid = match &run.r_grid {
            GridSpec::Support => self.profile.default_grid(run.n_layers),
            GridSpec::Geometric { r_min, r_max } | GridSpec::Linear { r_min, r_max } => {
                if !(*r_min > 0.0 && r_max > r_min && r_max.is_finite()) {
                    return Err(CliError::Config(format!("need 0 < r_min < r_max, got {r_min}, {r_max}")));
                }
                if matches!(run.r_grid, GridSpec::Linear { .. }) {
                    linspace(*r_min, *r_max, run.n_layers)
                } else {
                    geometric_grid(*r_min, *r_max, run.n_layers)
                }
            }
            GridSpec::Explicit { radii } => {
                if radii.len() < 2 || radii.windows(2).any(|w| !(w[1] > w[0])) || !(radii[0] > 0.0) {
                    return Err(CliError::Config(
                        "explicit radii must be positive, increasing, and at least two".into(),
                    ));
                }
                radii.clone()
            }
        };

        let t_max = match args.t_max.or(run.t_max) {
            Some(t) if t > 0.0 && t.is_finite() => t,
            Some(t) => return Err(CliError::Config(format!("t_max must be positive, got {t}"))),
            None => default_t_max(&self.profile, &scenario, &grid)?,
        };
        let out = args.out.clone().or_else(|| {
            run.outputs.get(command).map(|p| match base {
                Some(dir) if p.is_relative() => dir.join(p),
                _ => p.clone(),
            })
        });
        Ok(Resolved {
            scenario,
            profile: self.profile,
            run: self.run,
            grid,
            t_max,
            out,
        })
    }
}

fn default_t_max(profile: &InitialProfile, scenario: &Scenario, grid: &[f64]) -> CliResult<f64> {
    let t = match scenario.interaction {
        Interaction::Em => {
            let outer = layer_coefficients(profile, scenario, grid[grid.len() - 1])?;
            10.0 / outer.lam
        }
        Interaction::Gravity => {
            let mut first = f64::INFINITY;
            for &r in grid {
                first = first.min(arrival_time(&layer_coefficients(profile, scenario, r)?)?);
            }
            0.95 * first
        }
    };
    if !(t > 0.0 && t.is_finite()) {
        return Err(CliError::Config("cannot infer t_max for an empty profile; set run.t_max".into()));
    }
    Ok(t)
}

impl Resolved {
    fn coefficients(&self) -> CliResult<Vec<LayerCoefficients>> {
        self.grid
            .par_iter()
            .map(|&r| layer_coefficients(&self.profile, &self.scenario, r))
            .collect::<crate::Result<Vec<_>>>()
            .map_err(CliError::from)
    }

    fn times(&self) -> Vec<f64> {
        linspace(0.0, self.t_max, self.run.n_time_samples)
    }

    fn output(&self, contents: String) -> Vec<Output> {
        vec![Output {
            path: self.out.clone(),
            contents,
        }]
    }
}

// Row per (t, layer) while the layer has not reached the center.
fn layer_rows<F>(res: &Resolved, header: &str, row: F) -> CliResult<String>
where
    F: Fn(&LayerCoefficients, f64) -> crate::Result<Option<String>> + Sync,
{
    let coeffs = res.coefficients()?;
    let times = res.times();
    let per_layer = coeffs
        .par_iter()
        .map(|c| times.iter().map(|&t| row(c, t)).collect::<crate::Result<Vec<_>>>())
        .collect::<crate::Result<Vec<_>>>()?;
    let mut out = String::from(header);
    out.push('\n');
    for i in 0..times.len() {
        for layer in &per_layer {
            if let Some(line) = &layer[i] {
                out.push_str(line);
                out.push('\n');
            }
        }
    }
    Ok(out)
}

fn past_collapse<T>(r: crate::Result<T>) -> crate::Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::PastCollapse { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn cmd_characteristics(res: &Resolved) -> CliResult<Vec<Output>> {
    let csv = layer_rows(res, "t,r0,R,beta", |c, t| {
        let Some(p) = past_collapse(layer_point(c, t))? else {
            return Ok(None);
        };
        let beta = if p.x == 0.0 { f64::NAN } else { layer_speed(c, t)?.beta };
        Ok(Some(format!("{},{},{},{}", num(t), num(c.r), num(c.r * p.x), num(beta))))
    })?;
    Ok(res.output(csv))
}

fn cmd_velocity(res: &Resolved) -> CliResult<Vec<Output>> {
    let csv = layer_rows(res, "t,r0,beta,beta_inf", |c, t| {
        let Some(p) = past_collapse(layer_point(c, t))? else {
            return Ok(None);
        };
        if p.x == 0.0 {
            return Ok(None);
        }
        let beta_inf = match speed_asymptote(c) {
            Ok(Asymptote::Beta(b)) => b,
            Ok(Asymptote::Velocity(v)) => v / c.c,
            Ok(Asymptote::Unbounded) => f64::INFINITY,
            Err(_) => f64::NAN,
        };
        Ok(Some(format!("{},{},{},{}", num(t), num(c.r), num(layer_speed(c, t)?.beta), num(beta_inf))))
    })?;
    Ok(res.output(csv))
}

fn shock_report(res: &Resolved, t_max: f64) -> CliResult<ShockReport> {
    Ok(shock_time(&res.profile, &res.scenario, &res.grid, t_max)?)
}

fn cmd_density(res: &Resolved) -> CliResult<Vec<Output>> {
    let mut times = res.run.snapshot_times.clone().unwrap_or_else(|| res.times());
    if times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(CliError::Config("snapshot times must be finite and >= 0".into()));
    }
    times.sort_by(f64::total_cmp);
    let t_last = times.last().copied().unwrap_or(0.0);
    let report = if t_last > 0.0 { Some(shock_report(res, t_last)?) } else { None };
    let breakdown = report.as_ref().and_then(|r| r.breakdown_time());

    let mut csv = String::from("t,r0,R,rho,jac,near_caustic\n");
    for &t in &times {
        if breakdown.is_some_and(|tb| t >= tb) {
            break;
        }
        let snap = snapshot(&res.profile, &res.scenario, &res.grid, t)?;
        for p in &snap.points {
            let near = u8::from(p.status == PointStatus::NearCaustic);
            let _ = writeln!(csv, "{},{},{},{},{},{}", num(t), num(p.r0), num(p.r), num(p.rho), num(p.jac), near);
        }
    }
    if let (Some(tb), Some(report)) = (breakdown, report) {
        return Err(CliError::Shock {
            t: tb,
            requested: t_last,
            report: Box::new(report),
            partial: res.output(csv),
        });
    }
    Ok(res.output(csv))
}

fn cmd_shock(res: &Resolved) -> CliResult<Vec<Output>> {
    Ok(res.output(json(&shock_report(res, res.t_max)?)?))
}

fn cmd_collapse(res: &Resolved) -> CliResult<Vec<Output>> {
    Ok(res.output(json(&collapse_times(&res.profile, &res.scenario)?)?))
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}{suffix}"),
    };
    path.with_file_name(name)
}

fn cmd_analyze(res: &Resolved) -> CliResult<Vec<Output>> {
    let a = &res.run.analysis;
    let t = a.t.unwrap_or(res.t_max);
    if !(t >= 0.0 && t.is_finite()) {
        return Err(CliError::Config(format!("analysis time must be >= 0, got {t}")));
    }
    if t > 0.0 {
        let report = shock_report(res, t)?;
        if let Some(tb) = report.breakdown_time() {
            return Err(CliError::Shock {
                t: tb,
                requested: t,
                report: Box::new(report),
                partial: vec![],
            });
        }
    }
    let mass = a.mass.unwrap_or(res.scenario.m);
    let hbar = a.hbar.unwrap_or(if res.run.nondimensionalize { 1.0 } else { HBAR_SI });
    let snap = snapshot(&res.profile, &res.scenario, &res.grid, t)?;
    let q = quantum_potential(&snap, mass, hbar)?;
    let mut q_csv = String::from("R,Q,low_confidence\n");
    for p in &q.points {
        let _ = writeln!(q_csv, "{},{},{}", num(p.r), num(p.value), u8::from(p.low_confidence));
    }
    let mut outputs = res.output(q_csv);

    let applicable = matches!(res.profile, InitialProfile::Uniform { .. })
        && res.scenario.regime == Regime::Classical
        && res.scenario.symmetry == Symmetry::Sphere;
    if applicable {
        let mut b_csv = String::from("t,b,b_dot,stiffness\n");
        for t in res.times() {
            let v = effective_velocity_coefficient(&res.profile, &res.scenario, t)?;
            let _ = writeln!(b_csv, "{},{},{},{}", num(t), num(v.b), num(v.b_dot), num(v.stiffness));
        }
        outputs.push(Output {
            path: res.out.as_deref().map(|p| sibling(p, "_b")),
            contents: b_csv,
        });
    } else {
        eprintln!("note: b(t) needs a uniform classical sphere; skipped");
    }
    Ok(outputs)
}

#[derive(Debug, Clone, Serialize)]
pub struct KindReport {
    pub kind: String,
    pub t_end: f64,
    pub layers: usize,
    pub max_ode_error: f64,
    pub max_quadrature_error: f64,
    pub max_invariant_drift: f64,
    pub pass: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub tolerances: Tolerances,
    pub kinds: Vec<KindReport>,
    pub pass: bool,
}

fn verify_kind(res: &Resolved, kind: KernelKind) -> crate::Result<KindReport> {
    let scenario = Scenario {
        interaction: kind.interaction,
        symmetry: kind.symmetry,
        regime: kind.regime,
        ..res.scenario
    };
    scenario.validate()?;
    let report = shock_time(&res.profile, &scenario, &res.grid, res.t_max)?;
    let t_end = report.breakdown_time().map_or(res.t_max, |tb| 0.95 * tb.min(res.t_max));
    let times = linspace(0.0, t_end, res.run.n_time_samples);
    let tol = &res.run.tolerances;
    let per_layer = res
        .grid
        .par_iter()
        .map(|&r| -> crate::Result<(f64, f64, f64)> {
            let c = layer_coefficients(&res.profile, &scenario, r)?;
            let ode = integrate_layer_ode_at(&c, &times, tol.ode)?;
            let mut quad_err: f64 = 0.0;
            for &t in &times[1..] {
                let closed = crate::characteristics::layer_radius(&c, t)?;
                let rq = radius_from_time_of_flight(&c, t)?;
                quad_err = quad_err.max((rq - closed).abs() / r);
            }
            Ok((ode.max_rel_err_vs_closed_form, quad_err, ode.max_invariant_drift))
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let max = |f: fn(&(f64, f64, f64)) -> f64| per_layer.iter().map(f).fold(0.0, f64::max);
    let (ode, quad, drift) = (max(|x| x.0), max(|x| x.1), max(|x| x.2));
    Ok(KindReport {
        kind: kind.to_string(),
        t_end,
        layers: res.grid.len(),
        max_ode_error: ode,
        max_quadrature_error: quad,
        max_invariant_drift: drift,
        pass: ode <= tol.verify_ode && quad <= tol.verify_quadrature,
        error: None,
    })
}

fn cmd_verify(res: &Resolved, all_kinds: bool) -> CliResult<Vec<Output>> {
    let kinds: Vec<KernelKind> = if all_kinds {
        KernelKind::all().to_vec()
    } else {
        vec![res.scenario.kind()]
    };
    let reports: Vec<KindReport> = kinds
        .into_iter()
        .map(|k| {
            verify_kind(res, k).unwrap_or_else(|e| KindReport {
                kind: k.to_string(),
                t_end: f64::NAN,
                layers: res.grid.len(),
                max_ode_error: f64::NAN,
                max_quadrature_error: f64::NAN,
                max_invariant_drift: f64::NAN,
                pass: false,
                error: Some(e.to_string()),
            })
        })
        .collect();
    let pass = reports.iter().all(|r| r.pass);
    let out = res.output(json(&VerifyReport {
        tolerances: res.run.tolerances.clone(),
        kinds: reports,
        pass,
    })?);
    if pass {
        Ok(out)
    } else {
        Err(CliError::VerifyFailed(out))
    }
}

/// JSON schema of [`ScenarioFile`].
pub fn scenario_schema() -> String {
    let schema = schemars::schema_for!(ScenarioFile);
    let mut s = serde_json::to_string_pretty(&schema).expect("schema serializes");
    s.push('\n');
    s
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Characteristics(_) => "characteristics",
        Command::Density(_) => "density",
        Command::Velocity(_) => "velocity",
        Command::Shock(_) => "shock",
        Command::Collapse(_) => "collapse",
        Command::Analyze(_) => "analyze",
        Command::Verify { .. } => "verify",
        Command::Schema { .. } => "schema",
    }
}

/// Run a parsed command and return the documents it produces.
pub fn execute(cmd: &Command) -> CliResult<Vec<Output>> {
    let args = match cmd {
        Command::Schema { out } => {
            return Ok(vec![Output {
                path: out.clone(),
                contents: scenario_schema(),
            }])
        }
        Command::Characteristics(a)
        | Command::Density(a)
        | Command::Velocity(a)
        | Command::Shock(a)
        | Command::Collapse(a)
        | Command::Analyze(a)
        | Command::Verify { run: a, .. } => a,
    };
    let file = ScenarioFile::load(&args.scenario)?;
    let res = file.resolve(args, args.scenario.parent(), command_name(cmd))?;
    match cmd {
        Command::Characteristics(_) => cmd_characteristics(&res),
        Command::Density(_) => cmd_density(&res),
        Command::Velocity(_) => cmd_velocity(&res),
        Command::Shock(_) => cmd_shock(&res),
        Command::Collapse(_) => cmd_collapse(&res),
        Command::Analyze(_) => cmd_analyze(&res),
        Command::Verify { all_kinds, .. } => cmd_verify(&res, *all_kinds),
        Command::Schema { .. } => unreachable!(),
    }
}

fn emit(outputs: &[Output]) -> std::io::Result<()> {
    let mut first = true;
    for o in outputs {
        match &o.path {
            Some(p) => std::fs::write(p, &o.contents)?,
            None => {
                // separate successive documents on standard output
                if !first {
                    println!();
                }
                print!("{}", o.contents);
                first = false;
            }
        }
    }
    Ok(())
}

/// Parse `argv` (including the program name), run, and return the exit code.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (outputs, code) = match execute(&cli.command) {
        Ok(o) => (o, 0),
        Err(e) => {
            let code = e.exit_code();
            match e {
                CliError::Shock {
                    t,
                    requested,
                    report,
                    partial,
                } => {
                    eprintln!("error: solution breaks down at t = {t} before the requested time {requested}");
                    if let Ok(s) = json(&*report) {
                        eprint!("{s}");
                    }
                    (partial, code)
                }
                CliError::VerifyFailed(out) => {
                    eprintln!("error: verification failed");
                    (out, code)
                }
                e => {
                    eprintln!("error: {e}");
                    (vec![], code)
                }
            }
        }
    };
    if let Err(e) = emit(&outputs) {
        eprintln!("error: cannot write output: {e}");
        return code.max(1);
    }
    code
}
