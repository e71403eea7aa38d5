//! Convergence studies and maximum-CFL searches.

use alloc::vec::Vec;
use num_traits::Float;

use super::{error_norms, Case, ErrorReport};
use crate::error::{Error, Result};
use crate::solver::{Simulation, SolverConfig};

/// Run `sim` to its final time; `Ok(false)` if it aborted on a loss of positivity.
pub fn run_completes(sim: &mut Simulation) -> Result<bool> {
    match sim.run() {
        Ok(_) => Ok(true),
        Err(e) if e.is_positivity() => Ok(false),
        Err(e) => Err(e),
    }
}

/// Largest CFL in `[lo, hi]` for which `passes` holds, by bisection until the
/// bracket is narrower than `tol`. `hi` must fail; `lo` must pass unless it is 0.
pub fn max_cfl_bisect<F>(mut lo: f64, mut hi: f64, tol: f64, mut passes: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<bool>,
{
    if !(lo >= 0.0 && hi > lo && tol > 0.0) {
        return Err(Error::invalid("CFL bracket must satisfy 0 <= lo < hi and tol > 0"));
    }
    if passes(hi)? {
        return Err(Error::Bracket("upper bracket passes; widen the bracket"));
    }
    if lo > 0.0 && !passes(lo)? {
        return Err(Error::Bracket("lower bracket fails"));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if passes(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub cells: [usize; 2],
    pub dofs: usize,
    pub errors: ErrorReport,
    /// Observed orders `log2(e_coarse / e_fine)` against the previous row.
    pub order_l1: Option<f64>,
    pub order_l2: Option<f64>,
    pub order_linf: Option<f64>,
}

/// Run `case` on each grid in turn and measure density errors at the final
/// time against the exact solution.
pub fn convergence_study(case: &Case, config: &SolverConfig, grids: &[[usize; 2]]) -> Result<Vec<ConvergenceRow>> {
    if !case.has_exact_solution() {
        return Err(Error::NoExactSolution(case.kind.name()));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &cells in grids {
        let mesh = case.build_mesh(cells)?;
        let dofs = mesh.num_dofs(config.degree);
        let mut sim = Simulation::new(mesh, *config, |x, y| case.initial_condition(x, y))?;
        sim.run()?;
        let t = sim.time();
        let errors = error_norms(sim.field(), sim.mesh(), sim.ops(), config.degree + 3, |x, y| case.exact_solution(x, y, t))?;
        let order = |f: fn(&ErrorReport) -> f64| rows.last().map(|r: &ConvergenceRow| Float::log2(f(&r.errors) / f(&errors)));
        rows.push(ConvergenceRow {
            cells,
            dofs,
            errors,
            order_l1: order(|e| e.l1),
            order_l2: order(|e| e.l2),
            order_linf: order(|e| e.linf),
        });
    }
    Ok(rows)
}
