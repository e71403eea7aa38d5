//! Run options shared by the command line and TOML configuration files.
//!
//! Every flag has a config-file key of the same (kebab-case) name. Values
//! given on the command line take precedence over the file, and anything
//! left unset falls back to the case defaults.

use std::path::{Path, PathBuf};

use afr_core::cases::{Case, CaseKind};
use afr_core::time_march::CflMode;
use afr_core::{Dissipation, Scheme, SensorUpdate, SensorVariable, SolverConfig, TwoPointFlux};
use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use serde::Deserialize;

/// Options describing one simulation.
#[derive(Args, Clone, Debug, Default, PartialEq)]
pub struct RunOptions {
    /// Benchmark case: gaussian-pulse, leblanc, shock-diffraction, dmr, density-wave.
    #[arg(long)]
    pub case: Option<String>,
    /// Scheme: dg, fr or afr.
    #[arg(long)]
    pub scheme: Option<String>,
    /// Polynomial degree (1..=5).
    #[arg(long)]
    pub p: Option<usize>,
    /// Element counts, `NX` or `NXxNY`.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub cfl: Option<f64>,
    #[arg(long)]
    pub final_time: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Volume two-point flux (ec-ra).
    #[arg(long)]
    pub flux: Option<String>,
    /// Interface dissipation: roe, llf or none.
    #[arg(long)]
    pub dissipation: Option<String>,
    /// Positivity limiter: on or off.
    #[arg(long)]
    pub limiter: Option<String>,
    /// Half-width of the sensor transition band (decades).
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Wave speed used for the time step: initial or adaptive.
    #[arg(long)]
    pub cfl_mode: Option<String>,
    /// When the sensor is refreshed: step or stage.
    #[arg(long)]
    pub sensor_update: Option<String>,
    /// Sensed quantity: density, pressure or density-pressure.
    #[arg(long)]
    pub sensor_variable: Option<String>,
    /// Relative bound for keeping entropy-projected facet states (0 = trace only).
    #[arg(long)]
    pub projection_tolerance: Option<f64>,
    /// Ratio of specific heats.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Record every n-th step in the run log.
    #[arg(long)]
    pub log_every: Option<usize>,
    #[arg(long)]
    pub max_steps: Option<usize>,
}

macro_rules! prefer {
    ($flags:expr, $file:expr, $($field:ident),+ $(,)?) => {
        RunOptions { $($field: $flags.$field.clone().or_else(|| $file.$field.clone())),+ }
    };
}

impl RunOptions {
    /// Field-wise merge: `self` (command line) wins over `file`.
    pub fn merged_over(&self, file: &RunOptions) -> RunOptions {
        prefer!(
            self,
            file,
            case,
            scheme,
            p,
            grid,
            cfl,
            final_time,
            out,
            flux,
            dissipation,
            limiter,
            kappa,
            cfl_mode,
            sensor_update,
            sensor_variable,
            projection_tolerance,
            gamma,
            log_every,
            max_steps,
        )
    }

    pub fn case(&self) -> Result<Case> {
        let name = self.case.as_deref().ok_or_else(|| anyhow!("no case given (--case or `case = ...`)"))?;
        let mut case = Case::new(name.parse::<CaseKind>().map_err(|e| anyhow!("{e}"))?);
        if let Some(g) = self.gamma {
            case.gamma = g;
        }
        Ok(case)
    }

    pub fn degree(&self) -> usize {
        self.p.unwrap_or(3)
    }

    /// Element counts, defaulting to the case grid for the chosen degree.
    pub fn cells(&self, case: &Case) -> Result<[usize; 2]> {
        match &self.grid {
            Some(g) => parse_grid(g, case.dim()),
            None => Ok(case.default_grid(self.degree())),
        }
    }

    /// Solver configuration for `case`; unset values take the case defaults.
    pub fn solver_config(&self, case: &Case) -> Result<SolverConfig> {
        let mut cfg = SolverConfig::new(self.degree()).map_err(|e| anyhow!("{e}"))?;
        cfg.flux.gamma = case.gamma;
        cfg.time.cfl = self.cfl.unwrap_or_else(|| case.default_cfl());
        cfg.time.final_time = self.final_time.unwrap_or_else(|| case.default_final_time());
        if let Some(s) = &self.scheme {
            cfg.scheme = parse::<Scheme>(s)?;
        }
        if let Some(s) = &self.flux {
            cfg.flux.two_point = parse::<TwoPointFlux>(s)?;
        }
        if let Some(s) = &self.dissipation {
            cfg.flux.dissipation = parse::<Dissipation>(s)?;
        }
        if let Some(s) = &self.limiter {
            cfg.limiter.enabled = parse_switch(s)?;
        }
        if let Some(k) = self.kappa {
            cfg.sensor.kappa = k;
        }
        if let Some(s) = &self.cfl_mode {
            cfg.time.cfl_mode = parse::<CflMode>(s)?;
        }
        if let Some(s) = &self.sensor_update {
            cfg.sensor.update = parse::<SensorUpdate>(s)?;
        }
        if let Some(s) = &self.sensor_variable {
            cfg.sensor.variable = parse::<SensorVariable>(s)?;
        }
        if let Some(t) = self.projection_tolerance {
            cfg.flux.projection_tolerance = t;
        }
        if let Some(n) = self.log_every {
            cfg.time.log_every = n;
        }
        if let Some(n) = self.max_steps {
            cfg.time.max_steps = n;
        }
        cfg.validate().map_err(|e| anyhow!("{e}"))?;
        Ok(cfg)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("afr-out"))
    }
}

fn parse<T: std::str::FromStr>(s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(|e| anyhow!("{e}"))
}

fn parse_switch(s: &str) -> Result<bool> {
    match s.to_ascii_lowercase().as_str() {
        "on" | "true" | "yes" | "1" => Ok(true),
        "off" | "false" | "no" | "0" => Ok(false),
        other => bail!("expected on or off, got `{other}`"),
    }
}

/// Parse `NX` or `NXxNY`; 1D cases accept only `NX` (or `NXx1`).
pub fn parse_grid(s: &str, dim: usize) -> Result<[usize; 2]> {
    let parts: Vec<&str> = s.split(['x', 'X']).collect();
    let num = |t: &str| t.trim().parse::<usize>().with_context(|| format!("bad grid `{s}`"));
    let cells = match parts.as_slice() {
        [nx] if dim == 1 => [num(nx)?, 1],
        [n] => {
            let n = num(n)?;
            [n, n]
        }
        [nx, ny] => [num(nx)?, num(ny)?],
        _ => bail!("grid must be NX or NXxNY, got `{s}`"),
    };
    if cells[0] == 0 || cells[1] == 0 || (dim == 1 && cells[1] != 1) {
        bail!("grid `{s}` is not valid for a {dim}D case");
    }
    Ok(cells)
}

/// Comma-separated list, e.g. `8,16,32`.
pub fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',').filter(|t| !t.trim().is_empty()).map(|t| parse::<T>(t.trim())).collect()
}

/// Everything a config file may contain: the run options plus the keys of
/// the search, ladder, sweep and operator-dump subcommands. Key names are the
/// flag names.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub case: Option<String>,
    pub scheme: Option<String>,
    pub p: Option<usize>,
    #[serde(default, deserialize_with = "grid_value")]
    pub grid: Option<String>,
    pub cfl: Option<f64>,
    pub final_time: Option<f64>,
    pub out: Option<PathBuf>,
    pub flux: Option<String>,
    pub dissipation: Option<String>,
    #[serde(default, deserialize_with = "switch_value")]
    pub limiter: Option<String>,
    pub kappa: Option<f64>,
    pub cfl_mode: Option<String>,
    pub sensor_update: Option<String>,
    pub sensor_variable: Option<String>,
    pub projection_tolerance: Option<f64>,
    pub gamma: Option<f64>,
    pub log_every: Option<usize>,
    pub max_steps: Option<usize>,
    pub grids: Option<String>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub tol: Option<f64>,
    pub schemes: Option<String>,
    pub degrees: Option<String>,
    pub dofs: Option<usize>,
    pub dim: Option<usize>,
    pub c: Option<f64>,
    pub line: Option<String>,
    pub samples: Option<usize>,
}

impl FileConfig {
    /// The run options contained in the file.
    pub fn run(&self) -> RunOptions {
        RunOptions {
            case: self.case.clone(),
            scheme: self.scheme.clone(),
            p: self.p,
            grid: self.grid.clone(),
            cfl: self.cfl,
            final_time: self.final_time,
            out: self.out.clone(),
            flux: self.flux.clone(),
            dissipation: self.dissipation.clone(),
            limiter: self.limiter.clone(),
            kappa: self.kappa,
            cfl_mode: self.cfl_mode.clone(),
            sensor_update: self.sensor_update.clone(),
            sensor_variable: self.sensor_variable.clone(),
            projection_tolerance: self.projection_tolerance,
            gamma: self.gamma,
            log_every: self.log_every,
            max_steps: self.max_steps,
        }
    }
}

/// `grid = "64x64"` or `grid = 240`.
fn grid_value<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Grid {
        Text(String),
        Count(usize),
    }
    Ok(Option::<Grid>::deserialize(d)?.map(|g| match g {
        Grid::Text(s) => s,
        Grid::Count(n) => n.to_string(),
    }))
}

/// `limiter = "on"` or `limiter = true`.
fn switch_value<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Switch {
        Text(String),
        Flag(bool),
    }
    Ok(Option::<Switch>::deserialize(d)?.map(|s| match s {
        Switch::Text(s) => s,
        Switch::Flag(b) => if b { "on" } else { "off" }.to_string(),
    }))
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }
}
