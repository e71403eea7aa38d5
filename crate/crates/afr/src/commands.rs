//! The subcommands: single runs, convergence ladders, maximum-CFL searches,
//! scheme/degree sweeps and operator dumps.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use afr_core::cases::{convergence_study, max_cfl_bisect, run_completes, Case, ConvergenceRow};
use afr_core::reference::default_c_plus;
use afr_core::{ReferenceOperators, Scheme, Simulation, SolverConfig};
use anyhow::{anyhow, Context, Result};
use serde::Serialize;

use crate::config::RunOptions;
use crate::output::{self, Line, RunLog};

/// Default number of samples of a line extraction.
pub const DEFAULT_SAMPLES: usize = 2048;

fn core_err(e: afr_core::Error) -> anyhow::Error {
    anyhow!("{e}")
}

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))
}

fn simulation(case: &Case, cells: [usize; 2], config: SolverConfig) -> Result<Simulation> {
    let mesh = case.build_mesh(cells).map_err(core_err)?;
    Simulation::new(mesh, config, |x, y| case.initial_condition(x, y)).map_err(core_err)
}

/// What a completed `run` produced.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub steps: usize,
    pub time: f64,
    pub files: Vec<PathBuf>,
}

/// Run one simulation and write `line.csv`, `solution.vtk` and `run.ndjson`
/// into the output directory. If the run aborts, the log (ending in an
/// `end` record carrying the error) is still written and the error returned.
pub fn run(opts: &RunOptions, line: Option<Line>, samples: usize) -> Result<RunReport> {
    let case = opts.case()?;
    let cells = opts.cells(&case)?;
    let config = opts.solver_config(&case)?;
    let out = opts.out_dir();
    prepare_out(&out)?;

    let mut sim = simulation(&case, cells, config)?;
    let log_path = out.join("run.ndjson");
    let mut log = RunLog::create(&log_path)?;
    log.start(&case, &sim)?;
    let clock = Instant::now();
    let mut write_error = None;
    let result = sim.run_with(|rec, _| {
        if rec.totals.is_some() && write_error.is_none() {
            if let Err(e) = log.step(rec) {
                write_error = Some(e);
            }
        }
    });
    if let Some(e) = write_error {
        return Err(e);
    }
    let elapsed = clock.elapsed().as_secs_f64();
    if let Err(e) = result {
        log.end(&sim, Some(e.to_string()), elapsed)?;
        return Err(core_err(e)).with_context(|| format!("run aborted; log written to {}", log_path.display()));
    }
    log.end(&sim, None, elapsed)?;

    let line = line.unwrap_or_else(|| Line::default_for(&case));
    let line_path = out.join("line.csv");
    output::write_line_csv(&line_path, &output::extract_line(&sim, line, samples), case.dim())?;
    let vtk_path = out.join("solution.vtk");
    output::write_vtk(&vtk_path, &sim)?;
    Ok(RunReport { steps: sim.steps(), time: sim.time(), files: vec![line_path, vtk_path, log_path] })
}

/// Convergence ladder over `grids`; writes `convergence.csv`.
pub fn converge(opts: &RunOptions, grids: &[[usize; 2]]) -> Result<Vec<ConvergenceRow>> {
    let case = opts.case()?;
    let mut config = opts.solver_config(&case)?;
    config.time.log_every = usize::MAX;
    let out = opts.out_dir();
    prepare_out(&out)?;
    let rows = convergence_study(&case, &config, grids).map_err(core_err)?;
    output::write_convergence_csv(&out.join("convergence.csv"), &config.scheme.to_string(), config.degree, &rows)?;
    Ok(rows)
}

/// Bracket of a maximum-CFL search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CflSearch {
    pub lo: f64,
    pub hi: f64,
    pub tol: f64,
}

impl Default for CflSearch {
    fn default() -> Self {
        Self { lo: 0.0, hi: 2.0, tol: 0.01 }
    }
}

/// Largest CFL for which the run reaches its final time without a loss of
/// positivity, by bisection.
pub fn max_cfl_for(case: &Case, cells: [usize; 2], config: SolverConfig, search: CflSearch) -> Result<f64> {
    let mut config = config;
    config.time.log_every = usize::MAX;
    max_cfl_bisect(search.lo, search.hi, search.tol, |cfl| {
        let mut cfg = config;
        cfg.time.cfl = cfl;
        let mut sim = Simulation::new(case.build_mesh(cells)?, cfg, |x, y| case.initial_condition(x, y))?;
        run_completes(&mut sim)
    })
    .map_err(core_err)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CflRow {
    pub case: String,
    pub scheme: String,
    pub p: usize,
    pub nx: usize,
    pub ny: usize,
    pub cfl_mode: String,
    pub max_cfl: f64,
}

fn cfl_row(case: &Case, cells: [usize; 2], config: &SolverConfig, max_cfl: f64) -> CflRow {
    CflRow {
        case: case.kind.name().to_string(),
        scheme: config.scheme.to_string(),
        p: config.degree,
        nx: cells[0],
        ny: cells[1],
        cfl_mode: config.time.cfl_mode.to_string(),
        max_cfl,
    }
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Maximum-CFL search for one configuration; writes `max_cfl.csv`.
pub fn max_cfl(opts: &RunOptions, search: CflSearch) -> Result<CflRow> {
    let case = opts.case()?;
    let cells = opts.cells(&case)?;
    let config = opts.solver_config(&case)?;
    let out = opts.out_dir();
    prepare_out(&out)?;
    let row = cfl_row(&case, cells, &config, max_cfl_for(&case, cells, config, search)?);
    write_rows(&out.join("max_cfl.csv"), std::slice::from_ref(&row))?;
    Ok(row)
}

/// Maximum CFL for every scheme and degree. With `dofs` set, each degree
/// gets `dofs / (p + 1)` elements per direction so that all runs have the
/// same number of solution nodes; otherwise the grid option (or the case
/// default for the degree) is used. Writes `sweep.csv`.
pub fn sweep(
    opts: &RunOptions,
    schemes: &[Scheme],
    degrees: &[usize],
    dofs: Option<usize>,
    search: CflSearch,
) -> Result<Vec<CflRow>> {
    let case = opts.case()?;
    let out = opts.out_dir();
    prepare_out(&out)?;
    let mut rows = Vec::new();
    for &p in degrees {
        let at_p = RunOptions { p: Some(p), ..opts.clone() };
        let cells = match dofs {
            Some(n) => {
                let k = (n / (p + 1)).max(1);
                if case.dim() == 1 {
                    [k, 1]
                } else {
                    [k, k]
                }
            }
            None => at_p.cells(&case)?,
        };
        for &scheme in schemes {
            let mut config = at_p.solver_config(&case)?;
            config.scheme = scheme;
            rows.push(cfl_row(&case, cells, &config, max_cfl_for(&case, cells, config, search)?));
        }
    }
    write_rows(&out.join("sweep.csv"), &rows)?;
    Ok(rows)
}

/// Write the reference operators of degree `p` in `dim` dimensions to CSV
/// files in `out`. `c` defaults to the degree's `c_+`.
pub fn dump_operators(p: usize, dim: usize, c: Option<f64>, out: &Path) -> Result<Vec<String>> {
    let c = match c {
        Some(c) => c,
        None => default_c_plus(p).ok_or_else(|| anyhow!("no default c_+ for degree {p}; pass --c"))?,
    };
    prepare_out(out)?;
    let ops = ReferenceOperators::new(p, dim).map_err(core_err)?;
    output::dump_operators(out, &ops, c)
}
