//! Argument parsing and resolution of flags + config file into [`Settings`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use statpres_core::schemes::DiffusionParams;
use statpres_core::{Family, GridSpec, SchemeKind};

use crate::config::{GridValue, OneOrMany, RunConfig};
use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "statpres", version, about = "Stationarity-preserving schemes for linear acoustics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fourier kernel analysis of one scheme; exit 0 iff the verdict matches its claim.
    #[command(allow_negative_numbers = true)]
    Analyze(Opts),
    /// Exact certification of divergence discretizations.
    #[command(allow_negative_numbers = true)]
    Certify(Opts),
    /// Time-dependent run: series, field dumps and a summary, or a CFL sweep.
    #[command(allow_negative_numbers = true)]
    Simulate(Opts),
    /// Vortex runs over schemes x Mach numbers, optionally in parallel.
    #[command(allow_negative_numbers = true)]
    Sweep(Opts),
    /// List the scheme catalog.
    #[command(allow_negative_numbers = true)]
    Catalog(Opts),
}

impl Command {
    pub fn opts(&self) -> &Opts {
        match self {
            Command::Analyze(o) | Command::Certify(o) | Command::Simulate(o) | Command::Sweep(o) | Command::Catalog(o) => o,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Analyze(_) => "analyze",
            Command::Certify(_) => "certify",
            Command::Simulate(_) => "simulate",
            Command::Sweep(_) => "sweep",
            Command::Catalog(_) => "catalog",
        }
    }
}

/// Shared flags; each command reads the ones it needs.
#[derive(Debug, Clone, Default, Args)]
pub struct Opts {
    /// Flat JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Scheme name (comma-separated list for sweep).
    #[arg(long, value_delimiter = ',')]
    pub scheme: Option<Vec<String>>,
    /// Diffusion entries of the dimensionally split scheme.
    #[arg(long)]
    pub a1: Option<f64>,
    #[arg(long)]
    pub a2: Option<f64>,
    #[arg(long)]
    pub a3: Option<f64>,
    #[arg(long)]
    pub a4: Option<f64>,
    /// Consistent-diffusion coefficients checked by certify.
    #[arg(long)]
    pub c1: Option<f64>,
    #[arg(long)]
    pub c2: Option<f64>,
    /// Mach number (comma-separated list for sweep).
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// Sound speed.
    #[arg(long)]
    pub c: Option<f64>,
    /// NX or NX,NY.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub dx: Option<f64>,
    #[arg(long)]
    pub dy: Option<f64>,
    /// nu = (c/eps) dt / min(dx, dy).
    #[arg(long)]
    pub cfl: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub k_samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory for artifacts.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweep.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// certify: central | averaged | dimsplit.
    #[arg(long)]
    pub divergence: Option<String>,
    /// certify: stencil radius of the search.
    #[arg(long)]
    pub radius: Option<i32>,
    /// certify: only the two operator identities.
    #[arg(long)]
    pub identity_only: bool,
    /// simulate: report the largest stable CFL number instead of a run.
    #[arg(long)]
    pub cfl_sweep: bool,
    /// simulate: vortex | stream.
    #[arg(long)]
    pub init: Option<String>,
    /// Probe cadence in steps.
    #[arg(long)]
    pub probe_every: Option<usize>,
}

impl Opts {
    fn to_config(&self) -> RunConfig {
        RunConfig {
            scheme: self.scheme.clone().map(OneOrMany::Many),
            a1: self.a1,
            a2: self.a2,
            a3: self.a3,
            a4: self.a4,
            c1: self.c1,
            c2: self.c2,
            eps: self.eps.clone().map(OneOrMany::Many),
            c: self.c,
            grid: self.grid.clone().map(GridValue::Text),
            dx: self.dx,
            dy: self.dy,
            cfl: self.cfl,
            t_end: self.t_end,
            k_samples: self.k_samples,
            seed: self.seed,
            out: self.out.clone(),
            jobs: self.jobs,
            divergence: self.divergence.clone(),
            radius: self.radius,
            identity_only: self.identity_only.then_some(true),
            cfl_sweep: self.cfl_sweep.then_some(true),
            init: self.init.clone(),
            probe_every: self.probe_every,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    Vortex,
    Stream,
}

impl Init {
    pub fn name(self) -> &'static str {
        match self {
            Init::Vortex => "vortex",
            Init::Stream => "stream",
        }
    }
}

pub const DEFAULT_EPS: f64 = 0.01;
pub const DEFAULT_GRID: usize = 50;
pub const DEFAULT_CFL: f64 = 0.2;
pub const DEFAULT_K_SAMPLES: usize = 256;

/// Fully resolved settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub schemes: Option<Vec<String>>,
    pub a: [Option<f64>; 4],
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub eps: Option<Vec<f64>>,
    pub c: f64,
    pub grid: GridSpec,
    pub cfl: f64,
    pub t_end: Option<f64>,
    pub k_samples: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub jobs: usize,
    pub divergence: Option<String>,
    pub radius: i32,
    pub identity_only: bool,
    pub cfl_sweep: bool,
    pub init: Init,
    pub probe_every: usize,
}

fn positive(name: &str, x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Usage(format!("--{name} must be positive, got {x}")))
    }
}

impl Settings {
    pub fn resolve(opts: &Opts) -> Result<Settings> {
        let file = match &opts.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        Self::from_config(opts.to_config().over(file))
    }

    pub fn from_config(cfg: RunConfig) -> Result<Settings> {
        let (nx, ny) = match &cfg.grid {
            Some(g) => g.dims()?,
            None => (DEFAULT_GRID, DEFAULT_GRID),
        };
        if nx == 0 || ny == 0 {
            return Err(Error::Usage("grid dimensions must be positive".into()));
        }
        let dx = positive("dx", cfg.dx.unwrap_or(1.0 / nx as f64))?;
        let dy = positive("dy", cfg.dy.unwrap_or(1.0 / ny as f64))?;
        let grid = GridSpec::new(nx, ny, dx, dy).map_err(|e| Error::Usage(e.to_string()))?;
        let init = match cfg.init.as_deref() {
            None | Some("vortex") => Init::Vortex,
            Some("stream") => Init::Stream,
            Some(other) => return Err(Error::Usage(format!("unknown init {other:?} (vortex | stream)"))),
        };
        let eps = cfg.eps.map(|e| e.to_vec());
        if let Some(list) = &eps {
            if list.is_empty() {
                return Err(Error::Usage("--eps needs at least one value".into()));
            }
            for &e in list {
                positive("eps", e)?;
            }
        }
        let k_samples = cfg.k_samples.unwrap_or(DEFAULT_K_SAMPLES);
        if k_samples == 0 {
            return Err(Error::Usage("--k-samples must be at least 1".into()));
        }
        if let Some(t) = cfg.t_end {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::Usage(format!("--t-end must be non-negative, got {t}")));
            }
        }
        Ok(Settings {
            schemes: cfg.scheme.map(|s| s.to_vec()),
            a: [cfg.a1, cfg.a2, cfg.a3, cfg.a4],
            c1: cfg.c1,
            c2: cfg.c2,
            eps,
            c: positive("c", cfg.c.unwrap_or(1.0))?,
            grid,
            cfl: positive("cfl", cfg.cfl.unwrap_or(DEFAULT_CFL))?,
            t_end: cfg.t_end,
            k_samples,
            seed: cfg.seed.unwrap_or(0),
            out: cfg.out,
            jobs: cfg.jobs.unwrap_or(1).max(1),
            divergence: cfg.divergence,
            radius: cfg.radius.unwrap_or(1),
            identity_only: cfg.identity_only.unwrap_or(false),
            cfl_sweep: cfg.cfl_sweep.unwrap_or(false),
            init,
            probe_every: cfg.probe_every.unwrap_or(1).max(1),
        })
    }

    /// The single scheme a command operates on.
    pub fn scheme(&self) -> Result<&str> {
        match self.schemes.as_deref() {
            Some([one]) => Ok(one),
            Some(_) => Err(Error::Usage("exactly one --scheme expected".into())),
            None => Err(Error::Usage("--scheme is required".into())),
        }
    }

    /// The single Mach number a command operates on.
    pub fn single_eps(&self) -> Result<f64> {
        match self.eps.as_deref() {
            None => Ok(DEFAULT_EPS),
            Some([e]) => Ok(*e),
            Some(_) => Err(Error::Usage("exactly one --eps expected".into())),
        }
    }

    pub fn has_diffusion(&self) -> bool {
        self.a.iter().any(Option::is_some)
    }

    /// Unset diffusion entries are zero.
    pub fn diffusion(&self) -> DiffusionParams {
        let [a1, a2, a3, a4] = self.a.map(|x| x.unwrap_or(0.0));
        DiffusionParams::new(a1, a2, a3, a4)
    }

    pub fn kind(&self, name: &str) -> Result<SchemeKind> {
        let family = Family::from_name(name).ok_or_else(|| {
            let names: Vec<&str> = Family::ALL.iter().map(|f| f.name()).collect();
            Error::Usage(format!("unknown scheme {name:?} (expected one of {})", names.join(", ")))
        })?;
        if family != Family::Dimsplit && self.has_diffusion() {
            return Err(Error::Usage(format!("--a1..--a4 apply to dimsplit only, not {name}")));
        }
        Ok(match family {
            Family::Central => SchemeKind::Central,
            Family::Dimsplit if self.has_diffusion() => SchemeKind::Dimsplit(self.diffusion()),
            Family::Dimsplit => SchemeKind::Dimsplit(DiffusionParams::new(0.0, 1.0, 1.0, 1.0)),
            Family::Roe => SchemeKind::Roe,
            Family::LowMach1 => SchemeKind::LowMach(1),
            Family::LowMach2 => SchemeKind::LowMach(2),
            Family::LowMach3 => SchemeKind::LowMach(3),
            Family::Multid => SchemeKind::Multid,
        })
    }

    /// Command line reproducing a single run.
    pub fn rerun(&self, command: &str, scheme: &str, eps: f64) -> String {
        let g = &self.grid;
        let mut s = format!(
            "statpres {command} --scheme {scheme} --eps {eps} --c {} --grid {},{} --dx {} --dy {} --cfl {} --seed {} --probe-every {}",
            self.c, g.nx, g.ny, g.dx, g.dy, self.cfl, self.seed, self.probe_every
        );
        if let Some(t) = self.t_end {
            s += &format!(" --t-end {t}");
        }
        if scheme == Family::Dimsplit.name() {
            let d = match self.kind(scheme) {
                Ok(SchemeKind::Dimsplit(d)) => d,
                _ => self.diffusion(),
            };
            s += &format!(" --a1 {} --a2 {} --a3 {} --a4 {}", d.a1, d.a2, d.a3, d.a4);
        }
        if self.init != Init::Vortex {
            s += &format!(" --init {}", self.init.name());
        }
        if self.cfl_sweep {
            s += " --cfl-sweep";
        }
        s
    }
}
