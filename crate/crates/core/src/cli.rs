//! `dualframe` command line: analyze, construct, verify, sweep and nogo.
//!
//! Every command returns an [`Outcome`] whose `code` is the process exit
//! status; `main` only prints and exits.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::approx_dual::{self, ApproxDualPlan, PlanOptions};
use crate::error::{Error, Result};
use crate::frame::{self, AnnulusGrid, FrameParams};
use crate::generators;
use crate::nogo;
use crate::reconstruct::{self, ReconstructionEngine, ReconstructionReport};
use crate::spectrum::{DecayEnvelope, SampledGrid, Spectrum};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NO_TAIL_CONTROL: i32 = 3;
pub const EXIT_FRAME_CONDITION: i32 = 4;
pub const EXIT_TARGET_UNREACHABLE: i32 = 5;
pub const EXIT_BOUND_VIOLATED: i32 = 6;

/// Step of the `dual.csv` grid.
pub const DUAL_CSV_STEP: f64 = 1.0 / 256.0;
const DUAL_CSV_MAX_HALF: f64 = (1u64 << 21) as f64;
/// `dual.csv` must reproduce the recomputed dual to this relative accuracy.
const DUAL_CSV_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "dualframe", version, about = "Certified approximately dual wavelet frames")]
pub struct Cli {
    /// JSON run configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides the config)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Base seed for test signals (overrides the config)
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Frame bound estimates, decay envelope and feasibility
    Analyze {
        #[arg(long = "K")]
        k: Option<u64>,
    },
    /// Build a plan and the dual generator
    Construct {
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long = "K")]
        k: Option<u64>,
    },
    /// Reconstruct seeded test signals and check the plan's bound
    Verify {
        /// Plan file; defaults to `<out>/plan.json`. `dual.csv` is read from the same directory.
        #[arg(long)]
        plan: Option<PathBuf>,
    },
    /// Bound and measured error over a list of K
    Sweep {
        /// Comma-separated ascending K values
        #[arg(long, value_delimiter = ',')]
        ks: Option<Vec<u64>>,
    },
    /// No-go floors for a list of η
    Nogo {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        eta: Option<Vec<f64>>,
    },
}

fn default_a() -> f64 {
    2.0
}
fn default_b() -> f64 {
    1.0
}
fn default_signals() -> usize {
    10
}
fn default_omega() -> f64 {
    2.0
}
fn default_step() -> f64 {
    reconstruct::DEFAULT_STEP
}
fn default_tol() -> f64 {
    1e-10
}
fn default_sum_tol() -> f64 {
    1e-3
}
fn default_feasibility_tol() -> f64 {
    1e-6
}
fn default_grid_count() -> usize {
    frame::DEFAULT_ANNULUS_COUNT
}
fn default_analyze_grid() -> usize {
    256
}
fn default_k_cap() -> u64 {
    approx_dual::DEFAULT_K_CAP
}
fn default_sigma() -> f64 {
    1.0
}

/// Run configuration, read from the `--config` JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Registry name, e.g. `battle-lemarie:2` or `perturbed:battle-lemarie:2:0.5`.
    pub generator: Option<String>,
    #[serde(default = "default_a")]
    pub a: f64,
    #[serde(default = "default_b")]
    pub b: f64,
    /// Lower frame bound; defaults exist for the orthonormal generators and their perturbations.
    #[serde(rename = "A", default)]
    pub a_lower: Option<f64>,
    /// Decay envelope override.
    #[serde(default)]
    pub envelope: Option<DecayEnvelope>,
    /// σ used when the envelope has to be fitted.
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default)]
    pub target_eps: Option<f64>,
    #[serde(rename = "K", default)]
    pub k: Option<u64>,
    #[serde(default = "default_k_cap")]
    pub k_cap: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_signals")]
    pub signals: usize,
    /// Band edge Ω of the test signals.
    #[serde(default = "default_omega")]
    pub omega_max: f64,
    /// Lower band edge; defaults to Ω/4.
    #[serde(default)]
    pub omega_min: Option<f64>,
    /// Spectral grid step of the test signals.
    #[serde(default = "default_step")]
    pub step: f64,
    /// Reconstruction truncation tolerance.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Tolerance of the lattice sums in `analyze`.
    #[serde(default = "default_sum_tol")]
    pub sum_tol: f64,
    #[serde(default = "default_feasibility_tol")]
    pub feasibility_tol: f64,
    /// Annulus grid size for feasibility and the dual denominator.
    #[serde(default = "default_grid_count")]
    pub grid_count: usize,
    /// Annulus grid size for the frame-bound estimates in `analyze`.
    #[serde(default = "default_analyze_grid")]
    pub analyze_grid: usize,
    #[serde(default)]
    pub ks: Option<Vec<u64>>,
    #[serde(default)]
    pub eta: Option<Vec<f64>>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }

    pub fn params(&self) -> Result<FrameParams> {
        FrameParams::new(self.a, self.b)
    }

    pub fn generator_name(&self) -> Result<&str> {
        self.generator
            .as_deref()
            .ok_or_else(|| Error::InvalidParams("config needs a `generator`".into()))
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        generators::from_name(self.generator_name()?)
    }

    /// Lower frame bound: the config value, else the closed-form default.
    pub fn lower_bound(&self) -> Result<f64> {
        let a = match self.a_lower {
            Some(a) => a,
            None => {
                let name = self.generator_name()?;
                if self.a != 2.0 || self.b != 1.0 {
                    return Err(Error::InvalidParams(format!("`A` is required for {name} unless a = 2, b = 1")));
                }
                generators::default_lower_bound(name)
                    .ok_or_else(|| Error::InvalidParams(format!("`A` is required for {name}")))?
            }
        };
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidParams(format!("`A` must be > 0, got {a}")));
        }
        Ok(a)
    }

    /// Envelope override, else the generator's own, else a certified fit.
    pub fn envelope_for(&self, spec: &Spectrum) -> Result<DecayEnvelope> {
        if let Some(e) = self.envelope {
            return DecayEnvelope::new(e.c, e.sigma);
        }
        if let Some(e) = spec.envelope() {
            return Ok(e);
        }
        Ok(frame::fit_decay_envelope(spec, self.sigma, generators::ENVELOPE_PROBE_MAX)?.envelope)
    }

    pub fn plan_options(&self) -> PlanOptions {
        PlanOptions { k_cap: self.k_cap, grid_count: self.grid_count, feasibility_tol: self.feasibility_tol }
    }

    pub fn signals(&self) -> Result<Vec<reconstruct::BandlimitedSignal>> {
        let lo = self.omega_min.unwrap_or(self.omega_max / 4.0);
        let band = reconstruct::Band::new(lo, self.omega_max)?;
        reconstruct::random_bandlimited_in(self.seed, band, self.step, self.signals, 4.0)
    }

    fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    fn validate(&self) -> Result<()> {
        self.params()?;
        let positive = [("tol", self.tol), ("sum_tol", self.sum_tol), ("feasibility_tol", self.feasibility_tol), ("step", self.step), ("omega_max", self.omega_max), ("sigma", self.sigma)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParams(format!("`{name}` must be > 0, got {v}")));
            }
        }
        if self.grid_count < 2 || self.analyze_grid < 2 {
            return Err(Error::InvalidParams("grid sizes must be >= 2".into()));
        }
        Ok(())
    }
}

/// Exit status plus what to print.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { code: EXIT_OK, stdout, stderr: String::new() }
    }

    fn from_error(e: &Error) -> Self {
        Self { code: exit_code(e), stdout: String::new(), stderr: format!("error: {e}\n") }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParams(_)
        | Error::UnknownGenerator(_)
        | Error::Io(_)
        | Error::Format(_)
        | Error::GridMisaligned(_)
        | Error::OutOfRange { .. }
        | Error::BoundInapplicable { .. } => EXIT_CONFIG,
        Error::NoTailControl(_) | Error::EnvelopeUnsound { .. } => EXIT_NO_TAIL_CONTROL,
        Error::FrameConditionViolated { .. } | Error::DenominatorVanishes { .. } => EXIT_FRAME_CONDITION,
        Error::TargetUnreachable { .. } => EXIT_TARGET_UNREACHABLE,
        Error::TruncationBudgetExceeded { .. } => EXIT_RUNTIME,
    }
}

/// Parses nothing from the environment: resolves the config and runs the command.
pub fn run(cli: Cli) -> Outcome {
    let config = match &cli.config {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    };
    let mut config = match config {
        Ok(c) => c,
        Err(e) => return Outcome::from_error(&e),
    };
    if let Some(out) = cli.out {
        config.out = Some(out);
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let result = config.validate().and_then(|_| match cli.command {
        Command::Analyze { k } => {
            if k.is_some() {
                config.k = k;
            }
            cmd_analyze(&config)
        }
        Command::Construct { eps, k } => {
            if eps.is_some() || k.is_some() {
                config.target_eps = eps;
                config.k = k;
            }
            cmd_construct(&config)
        }
        Command::Verify { plan } => {
            let plan = plan.unwrap_or_else(|| config.out_dir().join("plan.json"));
            cmd_verify(&config, &plan)
        }
        Command::Sweep { ks } => {
            let ks = ks.or_else(|| config.ks.clone()).unwrap_or_default();
            cmd_sweep(&config, &ks)
        }
        Command::Nogo { eta } => {
            let etas = eta.or_else(|| config.eta.clone()).unwrap_or_else(|| vec![0.25, 0.5]);
            cmd_nogo(&config, &etas)
        }
    });
    result.unwrap_or_else(|e| Outcome::from_error(&e))
}

fn write_file(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

/// Frame-bound estimates on the annulus, the envelope and a feasibility
/// check at `K` (config value, default 8). Feasibility failures are
/// reported, not fatal.
pub fn cmd_analyze(config: &RunConfig) -> Result<Outcome> {
    let spec = config.spectrum()?;
    let params = config.params()?;
    let grid = AnnulusGrid::new(params.a, config.analyze_grid)?;
    let bounds = frame::frame_bound_estimates(&spec, &params, &grid, config.sum_tol)?;
    let envelope = config.envelope_for(&spec);
    let k = config.k.unwrap_or(8);
    let fgrid = approx_dual::feasibility_grid(&spec, &params, k as f64, config.grid_count)?;
    let feasibility = approx_dual::check_feasibility(&spec, &params, k as f64, &fgrid, config.feasibility_tol)?;
    let report = json!({
        "generator": config.generator_name()?,
        "params": params,
        "lower_bound_estimate": bounds.lower,
        "bessel_bound_estimate": bounds.upper,
        "envelope": envelope.as_ref().ok(),
        "envelope_error": envelope.as_ref().err().map(|e| e.to_string()),
        "feasibility": feasibility,
    });
    let text = to_json(&report)?;
    if config.out.is_some() {
        write_file(&config.out_dir(), "analyze.json", text.as_bytes())?;
    }
    let mut out = Outcome::ok(text);
    if !feasibility.pass {
        out.stderr = format!(
            "warning: truncated Calderon sum drops to {:e} at gamma = {} (K = {k}); no plan can be built\n",
            feasibility.min, feasibility.argmin
        );
    }
    Ok(out)
}

/// `plan.json` layout: the plan plus generator identification and a timestamp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanFile {
    pub generator: String,
    pub timestamp: String,
    #[serde(flatten)]
    pub plan: ApproxDualPlan,
}

fn build_plan(config: &RunConfig, spec: &Spectrum) -> Result<ApproxDualPlan> {
    let params = config.params()?;
    let opts = config.plan_options();
    match (config.target_eps, config.k) {
        (Some(_), Some(_)) | (None, None) => {
            Err(Error::InvalidParams("construct needs exactly one of `target_eps` and `K`".into()))
        }
        (None, Some(k)) => {
            if k == 0 {
                return Err(Error::InvalidParams("K must be >= 1".into()));
            }
            approx_dual::require_feasible(spec, &params, k as f64, &opts)?;
            let env = config.envelope_for(spec)?;
            approx_dual::plan_for_k(spec, &params, config.lower_bound()?, &env, k, &opts)
        }
        (Some(eps), None) => {
            let env = config.envelope_for(spec)?;
            approx_dual::plan_for_target(spec, &params, config.lower_bound()?, &env, eps, &opts)
        }
    }
}

fn dual_csv_grid(dual: &Spectrum, k: u64) -> Result<SampledGrid> {
    let mut step = DUAL_CSV_STEP;
    while k as f64 / step > DUAL_CSV_MAX_HALF {
        step *= 2.0;
    }
    dual.sample((k as f64 / step).round() as usize, step)
}

/// Writes `plan.json` and `dual.csv` (the dual generator on `[−K, K]`).
pub fn cmd_construct(config: &RunConfig) -> Result<Outcome> {
    let spec = config.spectrum()?;
    let plan = build_plan(config, &spec)?;
    let dual = approx_dual::plan_dual(&spec, &plan, config.grid_count)?;
    let file = PlanFile {
        generator: config.generator_name()?.to_string(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        plan,
    };
    let dir = config.out_dir();
    let text = to_json(&file)?;
    write_file(&dir, "plan.json", text.as_bytes())?;
    let mut csv = Vec::new();
    dual_csv_grid(&dual, plan.k)?.write_csv(&mut csv)?;
    write_file(&dir, "dual.csv", &csv)?;
    Ok(Outcome::ok(text))
}

/// Reads and validates a plan file.
pub fn load_plan(path: &Path) -> Result<PlanFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let file: PlanFile =
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    file.plan.validate()?;
    Ok(file)
}

fn check_dual_csv(path: &Path, dual: &Spectrum) -> Result<()> {
    let f = fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let grid = SampledGrid::read_csv(f).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let scale = grid.values.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for (i, v) in grid.values.iter().enumerate() {
        let g = grid.gamma(i);
        let expected = dual.eval(g)?;
        if (expected - v).norm() > DUAL_CSV_TOL * scale {
            return Err(Error::Format(format!(
                "{}: value at gamma = {g} does not match the plan's dual generator",
                path.display()
            )));
        }
    }
    Ok(())
}

fn verify_batch(
    config: &RunConfig,
    spec: &Spectrum,
    dual: &Spectrum,
    plan: &ApproxDualPlan,
    bound: f64,
) -> Result<Vec<ReconstructionReport>> {
    let signals = config.signals()?;
    let mut engine =
        ReconstructionEngine::new(dual, spec, &plan.params, plan.n, config.omega_max, config.step, config.tol)?;
    signals.iter().map(|f| engine.run(f, bound)).collect()
}

/// CSV line for one verify row.
fn verify_row(seed: u64, plan: &ApproxDualPlan, r: &ReconstructionReport) -> [String; 7] {
    [
        seed.to_string(),
        plan.k.to_string(),
        plan.n.to_string(),
        r.relative_error.to_string(),
        r.tail_budget.to_string(),
        r.theoretical_bound.to_string(),
        r.pass.to_string(),
    ]
}

/// Recomputes the dual from the plan, checks `dual.csv` against it, runs the
/// seeded batch and writes `verify.csv`. Exit 6 when any row fails.
pub fn cmd_verify(config: &RunConfig, plan_path: &Path) -> Result<Outcome> {
    let file = load_plan(plan_path)?;
    let spec = generators::from_name(&file.generator)?;
    let plan = file.plan;
    let dual = approx_dual::plan_dual(&spec, &plan, config.grid_count)?;
    let dir = plan_path.parent().map(Path::to_path_buf).unwrap_or_default();
    check_dual_csv(&dir.join("dual.csv"), &dual)?;
    let reports = verify_batch(config, &spec, &dual, &plan, plan.error_bound)?;
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["seed", "K", "N", "relative_error", "tail_budget", "theoretical_bound", "pass"])?;
    for (i, r) in reports.iter().enumerate() {
        wtr.write_record(verify_row(config.seed.wrapping_add(i as u64), &plan, r))?;
    }
    let bytes = wtr.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    write_file(&config.out_dir(), "verify.csv", &bytes)?;
    let failed = reports.iter().filter(|r| !r.pass).count();
    let mut out = Outcome::ok(String::from_utf8_lossy(&bytes).into_owned());
    if failed > 0 {
        out.code = EXIT_BOUND_VIOLATED;
        out.stderr = format!("error: {failed} of {} signals exceed the certified bound\n", reports.len());
    }
    Ok(out)
}

/// One `sweep.csv` row per K: the certificate and the worst measured error.
/// An inapplicable bound is written as `inf`. Exit 6 when a measurement
/// exceeds its bound.
pub fn cmd_sweep(config: &RunConfig, ks: &[u64]) -> Result<Outcome> {
    if ks.is_empty() {
        return Err(Error::InvalidParams("sweep needs a nonempty K list".into()));
    }
    if ks[0] == 0 || ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParams("K list must be ascending and >= 1".into()));
    }
    let spec = config.spectrum()?;
    let params = config.params()?;
    let opts = config.plan_options();
    for &k in ks {
        approx_dual::require_feasible(&spec, &params, k as f64, &opts)?;
    }
    let a_lower = config.lower_bound()?;
    let env = config.envelope_for(&spec)?;
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["K", "N", "epsilon_K", "bound", "measured", "tail_budget"])?;
    let mut violations = 0;
    for &k in ks {
        let exact = approx_dual::exact_at(&spec, k as f64);
        let (eps, bound) = if exact {
            (0.0, 0.0)
        } else {
            let eps = approx_dual::compute_epsilon_k(&env, &params, k);
            (eps, approx_dual::error_bound(eps, a_lower, params.b).unwrap_or(f64::INFINITY))
        };
        let n = approx_dual::select_oversampling(params.b, k as f64);
        let trunc = approx_dual::truncate_spectrum(&spec, approx_dual::TruncationParams::new(k as f64)?)?;
        let grid = approx_dual::feasibility_grid(&spec, &params, k as f64, config.grid_count)?;
        let dual = approx_dual::dual_spectrum(&trunc, &params, n, approx_dual::default_denom_tol(params.b, n), &grid)?;
        let signals = config.signals()?;
        let mut engine = ReconstructionEngine::new(&dual, &spec, &params, n, config.omega_max, config.step, config.tol)?;
        let mut measured: f64 = 0.0;
        let mut tail: f64 = 0.0;
        for f in &signals {
            let r = engine.run(f, bound)?;
            measured = measured.max(r.relative_error);
            tail = tail.max(r.tail_budget);
            if !r.pass {
                violations += 1;
            }
        }
        wtr.write_record([
            k.to_string(),
            n.to_string(),
            eps.to_string(),
            bound.to_string(),
            measured.to_string(),
            tail.to_string(),
        ])?;
    }
    let bytes = wtr.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    write_file(&config.out_dir(), "sweep.csv", &bytes)?;
    let mut out = Outcome::ok(String::from_utf8_lossy(&bytes).into_owned());
    if violations > 0 {
        out.code = EXIT_BOUND_VIOLATED;
        out.stderr = format!("error: {violations} measurements exceed the certified bound\n");
    }
    Ok(out)
}

/// Writes `nogo.json`: one `{eta, A, delta, floor, sqrt_floor}` per η.
pub fn cmd_nogo(config: &RunConfig, etas: &[f64]) -> Result<Outcome> {
    let rows = etas.iter().map(|&e| nogo::nogo_row(e)).collect::<Result<Vec<_>>>()?;
    let text = to_json(&rows)?;
    write_file(&config.out_dir(), "nogo.json", text.as_bytes())?;
    Ok(Outcome::ok(text))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::InvalidParams("x".into())), 2);
        assert_eq!(exit_code(&Error::NoTailControl("x".into())), 3);
        assert_eq!(exit_code(&Error::FrameConditionViolated { gamma: 1.0, min: 0.0 }), 4);
        assert_eq!(exit_code(&Error::TargetUnreachable { cap: 1 }), 5);
    }

    #[test]
    fn config_defaults_and_unknown_fields() {
        let c = RunConfig::default();
        assert_eq!((c.a, c.b, c.signals, c.step), (2.0, 1.0, 10, 1.0 / 1024.0));
        assert!(serde_json::from_str::<RunConfig>(r#"{"generatr": "shannon"}"#).is_err());
        let c: RunConfig = serde_json::from_str(r#"{"generator": "perturbed:battle-lemarie:2:0.5", "K": 8}"#).unwrap();
        assert_eq!(c.lower_bound().unwrap(), 0.25);
        let c: RunConfig = serde_json::from_str(r#"{"generator": "bspline:2"}"#).unwrap();
        assert!(c.lower_bound().is_err());
    }

    #[test]
    fn construct_needs_exactly_one_target() {
        let mut c: RunConfig = serde_json::from_str(r#"{"generator": "shannon"}"#).unwrap();
        assert!(matches!(build_plan(&c, &c.spectrum().unwrap()), Err(Error::InvalidParams(_))));
        c.k = Some(1);
        c.target_eps = Some(0.1);
        assert!(matches!(build_plan(&c, &c.spectrum().unwrap()), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn plan_file_round_trip() {
        let c: RunConfig = serde_json::from_str(r#"{"generator": "battle-lemarie:2", "K": 8}"#).unwrap();
        let spec = c.spectrum().unwrap();
        let plan = ApproxDualPlan::at(8, &c.params().unwrap(), 1.0, &c.envelope_for(&spec).unwrap(), false).unwrap();
        let file = PlanFile { generator: "battle-lemarie:2".into(), timestamp: "t".into(), plan };
        let text = serde_json::to_string(&file).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["K", "N", "A", "R_K", "epsilon_K", "error_bound", "generator", "timestamp"] {
            assert!(v.get(key).is_some(), "{key} missing");
        }
        assert_eq!(serde_json::from_str::<PlanFile>(&text).unwrap(), file);
    }
}
