//! Configuration loading and the commands behind the `delayed-wc` binary.
//!
//! Every command reads an optional JSON [`RunConfig`]; command-line flags
//! override the file. Errors map to process exit codes through
//! [`Error::exit_code`].

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::dde::{self, BehaviorThresholds, Engine, HistoryFunction, SimConfig};
use crate::kernel::KernelSpec;
use crate::model::{self, Equilibrium, ModelSpec};
use crate::stability::{self, StabilityConfig};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanRange {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub beta_min: f64,
    pub beta_max: f64,
    pub n_alpha: usize,
    pub n_beta: usize,
}

impl Default for ScanRange {
    fn default() -> Self {
        ScanRange { alpha_min: -5.0, alpha_max: 3.0, beta_min: -3.0, beta_max: 5.0, n_alpha: 50, n_beta: 50 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateOptions {
    pub dt: f64,
    pub t_end: f64,
    pub record_stride: usize,
    pub quadrature_cutoff_mass: f64,
    /// Offset of the constant history from the equilibrium, in both components.
    pub perturbation: f64,
    pub settle_fraction: f64,
    pub engine: Engine,
}

impl Default for SimulateOptions {
    fn default() -> Self {
        let sim = SimConfig::default();
        SimulateOptions {
            dt: sim.dt,
            t_end: sim.t_end,
            record_stride: sim.record_stride,
            quadrature_cutoff_mass: sim.quadrature_cutoff_mass,
            perturbation: 1e-3,
            settle_fraction: 0.5,
            engine: Engine::Auto,
        }
    }
}

impl SimulateOptions {
    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            dt: self.dt,
            t_end: self.t_end,
            record_stride: self.record_stride,
            quadrature_cutoff_mass: self.quadrature_cutoff_mass,
        }
    }
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<ModelSpec>,
    pub kernel: Option<KernelSpec>,
    pub tau: Option<f64>,
    pub equilibrium_index: Option<usize>,
    pub grid_n: Option<usize>,
    pub tau_max: Option<f64>,
    pub arc_tol: Option<f64>,
    pub scan: ScanRange,
    pub simulate: SimulateOptions,
    /// Same keys as `--tol-override`.
    pub tolerances: BTreeMap<String, f64>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::Config(match e.classify() {
                serde_json::error::Category::Data => e.to_string(),
                _ => format!("malformed JSON at line {}, column {}: {e}", e.line(), e.column()),
            })
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}

/// Stability and behaviour tolerances after applying overrides.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Tolerances {
    pub stability: StabilityConfig,
    pub behavior: BehaviorThresholds,
}

impl Tolerances {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = || {
            value
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
        };
        match key {
            "decay_tol" => self.behavior.decay_tol = num()?,
            "min_peaks" => self.behavior.min_peaks = num()? as usize,
            "period_variation" => self.behavior.period_variation = num()?,
            "amplitude_variation" => self.behavior.amplitude_variation = num()?,
            _ => self.stability.set(key, value)?,
        }
        Ok(())
    }
}

#[derive(Debug, Parser)]
#[command(name = "delayed-wc", version, about = "Stability analysis and simulation of Wilson-Cowan systems with distributed delays")]
pub struct Cli {
    /// JSON run configuration; flags override its fields
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output file (stdout when omitted)
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Output format
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Reserved; every algorithm is deterministic
    #[arg(long, global = true, value_name = "INT")]
    pub seed: Option<u64>,
    /// Override a tolerance, e.g. `marginal_tol=1e-8` (repeatable)
    #[arg(long = "tol-override", global = true, value_name = "KEY=VALUE")]
    pub tol_override: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Args)]
pub struct ModelArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub d: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta_u: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta_v: Option<f64>,
    /// Sigmoid steepness
    #[arg(long)]
    pub delta: Option<f64>,
    /// Equilibrium-search lattice size per axis
    #[arg(long)]
    pub grid_n: Option<usize>,
}

#[derive(Debug, Default, Args)]
pub struct KernelArgs {
    /// Kernel: `dirac`, `gamma:p=<int>` or `uniform:eps=<real>`
    #[arg(long)]
    pub kernel: Option<String>,
    /// Mean delay
    #[arg(long)]
    pub tau: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List all equilibria with activation slopes and characteristic parameters
    Equilibria {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Stability-region boundary and codimension-2 points for a kernel and delay
    Boundary {
        #[command(flatten)]
        kernel: KernelArgs,
        /// Maximal chord length between Hopf-curve samples
        #[arg(long)]
        arc_tol: Option<f64>,
    },
    /// Smallest mean delay destabilising an equilibrium
    CriticalTau {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        kernel: KernelArgs,
        /// Which equilibrium (in the `equilibria` ordering)
        #[arg(long)]
        equilibrium_index: Option<usize>,
        /// Upper end of the delay search interval
        #[arg(long)]
        tau_max: Option<f64>,
    },
    /// Integrate the delayed system from a perturbed equilibrium
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long)]
        equilibrium_index: Option<usize>,
        /// Step size
        #[arg(long)]
        dt: Option<f64>,
        /// Final time
        #[arg(long)]
        t_end: Option<f64>,
        /// Record every n-th step
        #[arg(long)]
        record_stride: Option<usize>,
        /// Offset of the constant history from the equilibrium
        #[arg(long, allow_hyphen_values = true)]
        perturbation: Option<f64>,
        /// Fraction of samples ignored by the behaviour diagnosis
        #[arg(long)]
        settle_fraction: Option<f64>,
        /// Integration engine for distributed kernels
        #[arg(long, value_enum)]
        engine: Option<EngineArg>,
        /// Kernel tail mass dropped by the quadrature engine
        #[arg(long)]
        quadrature_cutoff_mass: Option<f64>,
        /// Where to write the behaviour report (JSON)
        #[arg(long, value_name = "PATH")]
        behavior: Option<PathBuf>,
    },
    /// Classify a rectangular lattice of (alpha, beta) points
    Scan {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long, allow_hyphen_values = true)]
        alpha_min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        alpha_max: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        beta_min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        beta_max: Option<f64>,
        #[arg(long)]
        n_alpha: Option<usize>,
        #[arg(long)]
        n_beta: Option<usize>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Auto,
    Quadrature,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Auto => Engine::Auto,
            EngineArg::Quadrature => Engine::Quadrature,
        }
    }
}

/// Resolved inputs shared by the commands.
struct Context {
    cfg: RunConfig,
    tol: Tolerances,
    output: Option<PathBuf>,
    format: Option<Format>,
}

impl Context {
    fn new(cli: &Cli) -> Result<Self> {
        let cfg = match &cli.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let mut tol = Tolerances::default();
        for (k, v) in &cfg.tolerances {
            tol.set(k, &v.to_string())?;
        }
        for item in &cli.tol_override {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--tol-override expects key=value, got `{item}`")))?;
            tol.set(k.trim(), v.trim())?;
        }
        let output = cli.output.clone().or_else(|| cfg.output.clone());
        let format = cli.format.or(cfg.format);
        Ok(Context { cfg, tol, output, format })
    }

    fn model(&self, args: &ModelArgs) -> Result<ModelSpec> {
        let base = self.cfg.model;
        let pick = |flag: Option<f64>, from: fn(&ModelSpec) -> f64, name: &str| {
            flag.or(base.as_ref().map(from))
                .ok_or_else(|| Error::Config(format!("model parameter `{name}` missing (config `model` or --{name})")))
        };
        Ok(ModelSpec {
            a: pick(args.a, |m| m.a, "a")?,
            b: pick(args.b, |m| m.b, "b")?,
            c: pick(args.c, |m| m.c, "c")?,
            d: pick(args.d, |m| m.d, "d")?,
            theta_u: pick(args.theta_u, |m| m.theta_u, "theta-u")?,
            theta_v: pick(args.theta_v, |m| m.theta_v, "theta-v")?,
            delta: pick(args.delta, |m| m.delta, "delta")?,
        })
    }

    fn grid_n(&self, args: &ModelArgs) -> usize {
        args.grid_n.or(self.cfg.grid_n).unwrap_or(64)
    }

    fn kernel(&self, args: &KernelArgs) -> Result<(KernelSpec, f64)> {
        let kernel = match &args.kernel {
            Some(s) => s.parse()?,
            None => self.cfg.kernel.ok_or_else(|| Error::Config("kernel missing (config `kernel` or --kernel)".into()))?,
        };
        kernel.validate()?;
        let tau = args
            .tau
            .or(self.cfg.tau)
            .ok_or_else(|| Error::Config("tau missing (config `tau` or --tau)".into()))?;
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::Config(format!("tau must be a finite non-negative number, got {tau}")));
        }
        Ok((kernel, tau))
    }

    fn equilibrium(&self, model: &ModelArgs, index: Option<usize>) -> Result<(ModelSpec, Equilibrium)> {
        let spec = self.model(model)?;
        let eqs = model::find_equilibria(&spec.params(), &spec.activation()?, self.grid_n(model))?;
        let i = index.or(self.cfg.equilibrium_index).unwrap_or(0);
        let eq = *eqs.get(i).ok_or_else(|| {
            Error::Config(format!("equilibrium_index {i} out of range ({} equilibria)", eqs.len()))
        })?;
        Ok((spec, eq))
    }

    fn writer(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.output {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    /// Path next to the main output with `suffix` replacing the extension.
    fn sibling(&self, suffix: &str) -> Option<PathBuf> {
        self.output.as_ref().map(|p| {
            let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            p.with_file_name(format!("{stem}{suffix}"))
        })
    }
}

fn write_json<W: Write>(mut w: W, value: &serde_json::Value) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value).map_err(io::Error::from)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_side_json(path: Option<PathBuf>, value: &serde_json::Value) -> Result<()> {
    match path {
        Some(p) => write_json(BufWriter::new(File::create(p)?), value),
        None => write_json(io::stderr().lock(), value),
    }
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    let ctx = Context::new(&cli)?;
    match &cli.command {
        Command::Equilibria { model } => cmd_equilibria(&ctx, model),
        Command::Boundary { kernel, arc_tol } => cmd_boundary(&ctx, kernel, *arc_tol),
        Command::CriticalTau { model, kernel, equilibrium_index, tau_max } => {
            cmd_critical_tau(&ctx, model, kernel, *equilibrium_index, *tau_max)
        }
        Command::Simulate {
            model,
            kernel,
            equilibrium_index,
            dt,
            t_end,
            record_stride,
            perturbation,
            settle_fraction,
            engine,
            quadrature_cutoff_mass,
            behavior,
        } => {
            let mut opts = ctx.cfg.simulate.clone();
            opts.dt = dt.unwrap_or(opts.dt);
            opts.t_end = t_end.unwrap_or(opts.t_end);
            opts.record_stride = record_stride.unwrap_or(opts.record_stride);
            opts.quadrature_cutoff_mass = quadrature_cutoff_mass.unwrap_or(opts.quadrature_cutoff_mass);
            opts.perturbation = perturbation.unwrap_or(opts.perturbation);
            opts.settle_fraction = settle_fraction.unwrap_or(opts.settle_fraction);
            if let Some(e) = engine {
                opts.engine = (*e).into();
            }
            cmd_simulate(&ctx, model, kernel, *equilibrium_index, &opts, behavior.clone())
        }
        Command::Scan { kernel, alpha_min, alpha_max, beta_min, beta_max, n_alpha, n_beta } => {
            let mut r = ctx.cfg.scan.clone();
            r.alpha_min = alpha_min.unwrap_or(r.alpha_min);
            r.alpha_max = alpha_max.unwrap_or(r.alpha_max);
            r.beta_min = beta_min.unwrap_or(r.beta_min);
            r.beta_max = beta_max.unwrap_or(r.beta_max);
            r.n_alpha = n_alpha.unwrap_or(r.n_alpha);
            r.n_beta = n_beta.unwrap_or(r.n_beta);
            cmd_scan(&ctx, kernel, &r)
        }
    }
}

fn cmd_equilibria(ctx: &Context, args: &ModelArgs) -> Result<()> {
    let spec = ctx.model(args)?;
    let eqs = model::find_equilibria(&spec.params(), &spec.activation()?, ctx.grid_n(args))?;
    let mut w = ctx.writer()?;
    match ctx.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            writeln!(w, "index,u_star,v_star,phi1,phi2,alpha,beta")?;
            for (i, e) in eqs.iter().enumerate() {
                writeln!(w, "{i},{},{},{},{},{},{}", e.u_star, e.v_star, e.phi1, e.phi2, e.alpha, e.beta)?;
            }
            w.flush()?;
            Ok(())
        }
        Format::Json => write_json(w, &json!(eqs)),
    }
}

fn cmd_boundary(ctx: &Context, args: &KernelArgs, arc_tol: Option<f64>) -> Result<()> {
    let (kernel, tau) = ctx.kernel(args)?;
    let mut cfg = ctx.tol.stability.clone();
    if let Some(t) = arc_tol.or(ctx.cfg.arc_tol) {
        cfg.arc_tol = t;
    }
    let boundary = stability::build_boundary_with(kernel, tau, &cfg)?;
    let codim2 = boundary.codim2_json();
    match ctx.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut w = ctx.writer()?;
            boundary.write_csv(&mut w)?;
            w.flush()?;
            write_side_json(ctx.sibling("_codim2.json"), &codim2)
        }
        Format::Json => {
            let mut csv = Vec::new();
            boundary.write_csv(&mut csv)?;
            let rows: Vec<serde_json::Value> = String::from_utf8_lossy(&csv)
                .lines()
                .skip(1)
                .map(|line| {
                    let f: Vec<&str> = line.split(',').collect();
                    json!({
                        "segment": f[0],
                        "omega": f[1].parse::<f64>().ok(),
                        "alpha": f[2].parse::<f64>().ok(),
                        "beta": f[3].parse::<f64>().ok(),
                    })
                })
                .collect();
            let mut value = codim2;
            value["samples"] = json!(rows);
            write_json(ctx.writer()?, &value)
        }
    }
}

fn cmd_critical_tau(
    ctx: &Context,
    model: &ModelArgs,
    args: &KernelArgs,
    index: Option<usize>,
    tau_max: Option<f64>,
) -> Result<()> {
    let kernel = match &args.kernel {
        Some(s) => s.parse()?,
        None => ctx.cfg.kernel.ok_or_else(|| Error::Config("kernel missing (config `kernel` or --kernel)".into()))?,
    };
    let (_, eq) = ctx.equilibrium(model, index)?;
    let tau_max = tau_max.or(ctx.cfg.tau_max).unwrap_or(10.0);
    let crit = stability::critical_delay(kernel, eq.alpha, eq.beta, tau_max, &ctx.tol.stability)?;
    let mut w = ctx.writer()?;
    match ctx.format.unwrap_or(Format::Json) {
        Format::Json => {
            let value = json!({
                "kernel": kernel.to_string(),
                "alpha": eq.alpha,
                "beta": eq.beta,
                "tau_max": tau_max,
                "tau_star": crit.as_ref().map(|c| c.tau_star),
                "crossing_omega": crit.as_ref().map(|c| c.crossing_omega),
                "crossing_type": crit.as_ref().map(|c| c.crossing_type),
                "direct_tau": crit.as_ref().and_then(|c| c.direct_tau),
            });
            write_json(w, &value)
        }
        Format::Csv => {
            writeln!(w, "kernel,alpha,beta,tau_star,crossing_omega,crossing_type")?;
            match crit {
                Some(c) => writeln!(
                    w,
                    "{kernel},{},{},{},{},{:?}",
                    eq.alpha, eq.beta, c.tau_star, c.crossing_omega, c.crossing_type
                )?,
                None => writeln!(w, "{kernel},{},{},,,", eq.alpha, eq.beta)?,
            }
            w.flush()?;
            Ok(())
        }
    }
}

fn cmd_simulate(
    ctx: &Context,
    model: &ModelArgs,
    args: &KernelArgs,
    index: Option<usize>,
    opts: &SimulateOptions,
    behavior_path: Option<PathBuf>,
) -> Result<()> {
    let (kernel, tau) = ctx.kernel(args)?;
    let (spec, eq) = ctx.equilibrium(model, index)?;
    let history = HistoryFunction::perturbed(&eq, opts.perturbation);
    let traj = dde::simulate(&spec.params(), &spec.activation()?, kernel, tau, &history, &opts.sim_config(), opts.engine)?;
    let report =
        dde::detect_behavior_with(&traj, (eq.u_star, eq.v_star), opts.settle_fraction, &ctx.tol.behavior)?;
    match ctx.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut w = ctx.writer()?;
            traj.write_csv(&mut w)?;
            w.flush()?;
            write_side_json(behavior_path.or_else(|| ctx.sibling("_behavior.json")), &json!(report))
        }
        Format::Json => {
            let value = json!({ "behavior": report, "trajectory": traj });
            write_json(ctx.writer()?, &value)?;
            match behavior_path {
                Some(p) => write_side_json(Some(p), &json!(report)),
                None => Ok(()),
            }
        }
    }
}

fn cmd_scan(ctx: &Context, args: &KernelArgs, r: &ScanRange) -> Result<()> {
    let (kernel, tau) = ctx.kernel(args)?;
    let raster = stability::region_scan(
        kernel,
        tau,
        (r.alpha_min, r.alpha_max),
        (r.beta_min, r.beta_max),
        (r.n_alpha, r.n_beta),
        &ctx.tol.stability,
    )?;
    let mut w = ctx.writer()?;
    match ctx.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            raster.write_csv(&mut w)?;
            w.flush()?;
            Ok(())
        }
        Format::Json => write_json(w, &json!(raster)),
    }
}
