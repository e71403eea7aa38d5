//! Acceptance suite for the adaptive flux reconstruction solver.
//!
//! Prints one `PASS` / `FAIL` line per criterion and exits non-zero if any
//! criterion fails. Thresholds are pinned below and are never relaxed to make
//! a run pass. Set `AFR_LONG=1` to add the long-running configurations
//! (full-resolution Leblanc CFL table, the p = 5 failure mode and the
//! pulse convergence ladder to `T = 1`).
//!
//! Run with `cargo test -p afr-core --test acceptance` (optionally followed by
//! `-- <criterion id or name fragment>` to run a subset).

use std::process::ExitCode;
use std::time::Instant;

use afr_core::cases::{
    convergence_study, max_cfl_bisect, run_completes, sample_state, Case, CaseKind, ConvergenceRow,
};
use afr_core::limiter::{cell_average, limit_element, limit_field, LimiterConfig, LimiterWorkspace};
use afr_core::mesh::{BoundaryKind, BoundarySpec};
use afr_core::reference::default_c_plus;
use afr_core::solver::relative_drift;
use afr_core::time_march::CflMode;
use afr_core::{
    CartesianMesh, Dissipation, EulerState, ReferenceOperators, Scheme, Simulation, SolutionField, SolverConfig,
};
use nalgebra::DVector;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

// ── Pinned thresholds ────────────────────────────────────────────────

/// Operator identities: `1^T K(c) = 0`, `Q~ 1 = 0`.
const OPERATOR_TOL: f64 = 1e-12;
/// Scheme recovery: relative residual mismatch allowed ("machine precision").
const RECOVERY_TOL: f64 = 1e-14;
/// Relative drift of mass, momentum and energy over the pulse run.
const CONSERVATION_TOL: f64 = 1e-11;
/// Entropy drift ratio per time-step halving.
const ENTROPY_RATIO: (f64, f64) = (6.0, 10.0);
/// Observed L2 order between the two finest grids must reach `p + ORDER_MARGIN`.
const ORDER_MARGIN: f64 = 0.5;
/// `e(AFR)` must lie in `[e(DG) * AFR_LOW, e(FR) * AFR_HIGH]`.
const AFR_LOW: f64 = 0.95;
const AFR_HIGH: f64 = 1.05;
/// Bisection resolution of the maximum CFL search.
const CFL_RESOLUTION: f64 = 0.01;
/// `maxCFL(AFR) >= CFL_FR_FRACTION * maxCFL(FR)`.
const CFL_FR_FRACTION: f64 = 0.8;
/// Published Leblanc maximum CFL values (DG / AFR / FR) at 1920 nodes, p = 3.
const PAPER_CFL: [f64; 3] = [0.1, 0.29, 0.3];
const PAPER_CFL_TOL: f64 = 0.05;
/// Share of elements that must stay essentially DG at the end of the Leblanc run.
const SENSOR_DG_SHARE: f64 = 0.8;
const SENSOR_DG_EPS: f64 = 0.05;
/// Limiter: average preservation and idempotence.
const LIMITER_TOL: f64 = 1e-12;
/// Free-stream residual bound.
const FREESTREAM_TOL: f64 = 1e-12;
/// Shock front position, relative to the analytic incident shock.
const SHOCK_POSITION_TOL: f64 = 0.05;

// ── Reporting ────────────────────────────────────────────────────────

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

type Check = fn() -> Result<Outcome, String>;

fn long_mode() -> bool {
    std::env::var("AFR_LONG").map(|v| v == "1" || v.eq_ignore_ascii_case("true")).unwrap_or(false)
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn config(p: usize, scheme: Scheme) -> Result<SolverConfig, String> {
    let mut cfg = SolverConfig::new(p).map_err(err)?;
    cfg.scheme = scheme;
    cfg.time.log_every = usize::MAX;
    Ok(cfg)
}

const SCHEMES: [Scheme; 3] = [Scheme::Dg, Scheme::Afr, Scheme::Fr];

// ── 1. Operator identities ───────────────────────────────────────────

fn operator_identities() -> Result<Outcome, String> {
    let mut worst_k1 = 0.0f64;
    let mut worst_q1 = 0.0f64;
    let mut min_m = f64::INFINITY;
    let mut min_k = f64::INFINITY;
    let mut skew_exact = true;
    let mut cases = 0;
    for dim in [1, 2] {
        for p in 1..=5 {
            let ops = ReferenceOperators::new(p, dim).map_err(err)?;
            let m = ops.mass();
            let asym = (m - m.transpose()).amax();
            let m_eig = m.clone().symmetric_eigen().eigenvalues.min();
            if asym > OPERATOR_TOL * m.amax() || m.clone().cholesky().is_none() {
                return Ok(outcome(false, format!("mass matrix not SPD (dim {dim}, p {p})")));
            }
            min_m = min_m.min(m_eig);
            let ones = ops.constant_mode();
            let cp = default_c_plus(p).ok_or("missing c_+")?;
            for c in [0.0, 0.5 * cp, cp] {
                let k = ops.fr_filter(c).map_err(err)?;
                let k_eig = k.clone().symmetric_eigen().eigenvalues.min();
                // PSD up to roundoff on the scale of the matrix.
                min_k = min_k.min(k_eig / k.amax().max(1.0));
                worst_k1 = worst_k1.max((k.transpose() * &ones).amax());
                cases += 1;
            }
            for st in ops.stacked() {
                let q = st.hybridized().map_err(err)?;
                let s = &q - q.transpose();
                skew_exact &= (&s + s.transpose()).amax() == 0.0;
                // Q~ 1 = 0, hence (Q~ - Q~^T) 1 = -Q~^T 1 = [0; -B 1].
                let ones_h = DVector::from_element(s.ncols(), 1.0);
                let nq = st.stiffness.nrows();
                let mut expected = DVector::zeros(s.nrows());
                expected.rows_mut(nq, st.boundary.len()).copy_from(&(-&st.boundary));
                worst_q1 = worst_q1.max((&q * &ones_h).amax()).max((&s * &ones_h - expected).amax());
            }
        }
    }
    let pass = min_m > 0.0 && min_k >= -OPERATOR_TOL && worst_k1 <= OPERATOR_TOL && skew_exact && worst_q1 <= OPERATOR_TOL;
    Ok(outcome(
        pass,
        format!(
            "{cases} (dim, p, c) cases: min eig M = {min_m:.3e}, min eig K / |K| = {min_k:.2e}, \
             max |1^T K| = {worst_k1:.2e}, skew exact = {skew_exact}, max |Q~ 1|, |(Q~-Q~^T) 1 - [0; -B 1]| = {worst_q1:.2e}"
        ),
    ))
}

// ── 2. Scheme recovery ───────────────────────────────────────────────

fn random_field(mesh: &CartesianMesh, p: usize, rng: &mut StdRng) -> SolutionField {
    let dim = mesh.dim();
    let mut field = SolutionField::zeros(dim, p, mesh.num_elements());
    for e in 0..mesh.num_elements() {
        for i in 0..field.nodes_per_element() {
            let rho = rng.random_range(0.8..1.2);
            let vel = [rng.random_range(-0.3..0.3), if dim == 2 { rng.random_range(-0.3..0.3) } else { 0.0 }];
            let pr = rng.random_range(0.8..1.2);
            field.set_state(e, i, EulerState::from_primitive(rho, vel, pr, 1.4));
        }
    }
    field
}

fn residual_with(mesh: &CartesianMesh, cfg: SolverConfig, field: &SolutionField) -> Result<SolutionField, String> {
    let mut sim = Simulation::from_field(mesh.clone(), cfg, field.clone()).map_err(err)?;
    sim.update_sensor().map_err(err)?;
    sim.residual().map_err(err)
}

fn max_rel_diff(a: &SolutionField, b: &SolutionField) -> f64 {
    let scale = b.data().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    a.data().iter().zip(b.data()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

fn scheme_recovery() -> Result<Outcome, String> {
    let mut rng = StdRng::seed_from_u64(0x5eed_0002);
    let mut worst_dg = 0.0f64;
    let mut worst_fr = 0.0f64;
    let mut runs = 0;
    for (dim, p) in [(1, 2), (1, 4), (2, 2), (2, 3)] {
        let mesh = if dim == 1 {
            CartesianMesh::interval(0.0, 1.0, 6, &BoundarySpec::periodic(1)).map_err(err)?
        } else {
            CartesianMesh::new(2, &[afr_core::mesh::Block { lo: [0.0, 0.0], hi: [1.0, 1.0] }], [4, 3], &BoundarySpec::periodic(2))
                .map_err(err)?
        };
        let field = random_field(&mesh, p, &mut rng);
        let dg = residual_with(&mesh, config(p, Scheme::Dg)?, &field)?;
        let fr = residual_with(&mesh, config(p, Scheme::Fr)?, &field)?;
        // Sensor forced to 0 / 1 through the threshold centre.
        let mut off = config(p, Scheme::Afr)?;
        off.sensor.s0 = 1e300;
        let mut on = config(p, Scheme::Afr)?;
        on.sensor.s0 = -1e300;
        worst_dg = worst_dg.max(max_rel_diff(&residual_with(&mesh, off, &field)?, &dg));
        worst_fr = worst_fr.max(max_rel_diff(&residual_with(&mesh, on, &field)?, &fr));
        runs += 1;
    }
    Ok(outcome(
        worst_dg <= RECOVERY_TOL && worst_fr <= RECOVERY_TOL,
        format!("{runs} random fields: |AFR(eps=0) - DG| = {worst_dg:.2e}, |AFR(eps=1) - FR| = {worst_fr:.2e} (relative)"),
    ))
}

// ── 3. Conservation ──────────────────────────────────────────────────

fn conservation() -> Result<Outcome, String> {
    let case = Case::new(CaseKind::GaussianPulse);
    let mut parts = Vec::new();
    let mut pass = true;
    for scheme in SCHEMES {
        let mut cfg = config(2, scheme)?;
        cfg.time.final_time = 1.0;
        cfg.time.cfl = case.default_cfl();
        let mesh = case.build_mesh([16, 16]).map_err(err)?;
        let mut sim = Simulation::new(mesh, cfg, |x, y| case.initial_condition(x, y)).map_err(err)?;
        let summary = sim.run().map_err(err)?;
        let drift = relative_drift(&summary.initial_totals, &summary.final_totals, 1e-300);
        let worst = drift.iter().cloned().fold(0.0, f64::max);
        pass &= worst <= CONSERVATION_TOL && summary.final_time == 1.0;
        parts.push(format!("{scheme} {worst:.2e} ({} steps)", summary.steps));
    }
    Ok(outcome(pass, format!("max relative drift of (rho, m, E) at T = 1: {}", parts.join(", "))))
}

// ── 4. Entropy conservation ──────────────────────────────────────────

fn entropy_drift(cfl: f64) -> Result<f64, String> {
    let case = Case::new(CaseKind::DensityWave);
    let mut cfg = config(3, Scheme::Dg)?;
    cfg.flux.dissipation = Dissipation::None;
    cfg.limiter.enabled = false;
    cfg.time.cfl = cfl;
    cfg.time.cfl_mode = CflMode::Initial;
    cfg.time.final_time = ENTROPY_FINAL_TIME;
    let mesh = case.build_mesh([ENTROPY_CELLS, 1]).map_err(err)?;
    let mut sim = Simulation::new(mesh, cfg, |x, y| case.initial_condition(x, y)).map_err(err)?;
    let s0 = sim.entropy();
    sim.run().map_err(err)?;
    Ok((sim.entropy() - s0).abs())
}

const ENTROPY_CELLS: usize = 8;
const ENTROPY_FINAL_TIME: f64 = 1.0;

fn entropy_conservation() -> Result<Outcome, String> {
    let cfls = [0.4, 0.2, 0.1];
    let drifts = cfls.iter().map(|&c| entropy_drift(c)).collect::<Result<Vec<_>, _>>()?;
    let ratios: Vec<f64> = drifts.windows(2).map(|w| w[0] / w[1]).collect();
    let pass = ratios.iter().all(|r| (ENTROPY_RATIO.0..=ENTROPY_RATIO.1).contains(r));
    Ok(outcome(
        pass,
        format!(
            "DG p=3, EC flux, no dissipation, limiter off, CFL {cfls:?}: drifts {:.3e} / {:.3e} / {:.3e}, ratios {:.2} / {:.2}",
            drifts[0], drifts[1], drifts[2], ratios[0], ratios[1]
        ),
    ))
}

// ── 5. Convergence ───────────────────────────────────────────────────

fn convergence() -> Result<Outcome, String> {
    let case = Case::new(CaseKind::GaussianPulse);
    let grids = [[8, 8], [16, 16], [32, 32], [64, 64]];
    let final_time = if long_mode() { 1.0 } else { CONVERGENCE_FINAL_TIME };
    let mut pass = true;
    let mut lines = Vec::new();
    for p in [2, 3] {
        let mut rows: Vec<Vec<ConvergenceRow>> = Vec::new();
        for scheme in SCHEMES {
            let mut cfg = config(p, scheme)?;
            cfg.time.cfl = case.default_cfl();
            cfg.time.final_time = final_time;
            rows.push(convergence_study(&case, &cfg, &grids).map_err(err)?);
        }
        let (dg, afr, fr) = (&rows[0], &rows[1], &rows[2]);
        let mut fails = Vec::new();
        for (scheme, r) in SCHEMES.iter().zip(&rows) {
            let order = r.last().and_then(|row| row.order_l2).unwrap_or(f64::NAN);
            if !(order >= p as f64 + ORDER_MARGIN) {
                fails.push(format!("{scheme} order {order:.2}"));
            }
        }
        for g in 0..grids.len() {
            let (ed, ea, ef) = (dg[g].errors.l2, afr[g].errors.l2, fr[g].errors.l2);
            if !(ef >= ed) {
                fails.push(format!("{}^2: e(FR) < e(DG)", grids[g][0]));
            }
            if !(ea >= AFR_LOW * ed && ea <= AFR_HIGH * ef) {
                fails.push(format!("{}^2: e(AFR) outside band", grids[g][0]));
            }
        }
        pass &= fails.is_empty();
        let fmt = |r: &[ConvergenceRow]| {
            let last = r.last().expect("grids");
            format!("{:.3e} (order {:.2})", last.errors.l2, last.order_l2.unwrap_or(f64::NAN))
        };
        lines.push(format!(
            "p={p}: 64^2 L2 DG {} AFR {} FR {}{}",
            fmt(dg),
            fmt(afr),
            fmt(fr),
            if fails.is_empty() { String::new() } else { format!(" [{}]", fails.join("; ")) }
        ));
        for g in 0..grids.len() {
            println!(
                "      p={p} {:>2}^2: L2 DG {:.4e}  AFR {:.4e}  FR {:.4e}",
                grids[g][0], dg[g].errors.l2, afr[g].errors.l2, fr[g].errors.l2
            );
        }
    }
    Ok(outcome(pass, format!("pulse to T = {final_time}: {}", lines.join("; "))))
}

const CONVERGENCE_FINAL_TIME: f64 = 0.1;

// ── 6. Leblanc maximum CFL ───────────────────────────────────────────

fn leblanc_passes(scheme: Scheme, p: usize, cells: usize, cfl: f64) -> Result<bool, afr_core::Error> {
    let case = Case::new(CaseKind::Leblanc);
    let mut cfg = SolverConfig::new(p)?;
    cfg.scheme = scheme;
    cfg.time.cfl = cfl;
    cfg.time.cfl_mode = CflMode::Initial;
    cfg.time.final_time = case.default_final_time();
    cfg.time.log_every = usize::MAX;
    let mesh = case.build_mesh([cells, 1])?;
    let mut sim = match Simulation::new(mesh, cfg, |x, y| case.initial_condition(x, y)) {
        Ok(sim) => sim,
        Err(e) if e.is_positivity() => return Ok(false),
        Err(e) => return Err(e),
    };
    run_completes(&mut sim)
}

fn leblanc_max_cfl(p: usize, cells: usize) -> Result<[f64; 3], String> {
    let mut out = [0.0; 3];
    for (slot, scheme) in out.iter_mut().zip(SCHEMES) {
        *slot = max_cfl_bisect(0.0, 2.0, CFL_RESOLUTION, |c| leblanc_passes(scheme, p, cells, c)).map_err(err)?;
    }
    Ok(out)
}

fn leblanc_cfl_ordering() -> Result<Outcome, String> {
    let [dg, afr, fr] = leblanc_max_cfl(3, 240)?;
    Ok(outcome(
        dg < afr && afr >= CFL_FR_FRACTION * fr,
        format!(
            "N=240, p=3: max CFL DG {dg:.3}, AFR {afr:.3}, FR {fr:.3}; DG < AFR: {}, AFR >= {CFL_FR_FRACTION} FR ({:.3}): {}",
            dg < afr,
            CFL_FR_FRACTION * fr,
            afr >= CFL_FR_FRACTION * fr
        ),
    ))
}

fn leblanc_paper_cfl() -> Result<Outcome, String> {
    let got = leblanc_max_cfl(3, 1920 / 4)?;
    let pass = got.iter().zip(PAPER_CFL).all(|(g, r)| (g - r).abs() <= PAPER_CFL_TOL);
    Ok(outcome(
        pass,
        format!(
            "1920 nodes, p=3: DG {:.3}, AFR {:.3}, FR {:.3} vs published {:?} (+-{PAPER_CFL_TOL})",
            got[0], got[1], got[2], PAPER_CFL
        ),
    ))
}

// ── 7. p = 5 DG failure mode ─────────────────────────────────────────

fn leblanc_p5() -> Result<Outcome, String> {
    let cells = 1920 / 6;
    let dg = leblanc_passes(Scheme::Dg, 5, cells, 0.005).map_err(err)?;
    let afr = leblanc_passes(Scheme::Afr, 5, cells, 0.15).map_err(err)?;
    Ok(outcome(!dg && afr, format!("p=5, {cells} elements: DG at CFL 0.005 completes = {dg}, AFR at CFL 0.15 completes = {afr}")))
}

// ── 8. Sensor localization ───────────────────────────────────────────

fn sensor_localization() -> Result<Outcome, String> {
    let case = Case::new(CaseKind::Leblanc);
    let mut cfg = config(3, Scheme::Afr)?;
    cfg.time.cfl = case.default_cfl();
    cfg.time.final_time = case.default_final_time();
    let c_plus = cfg.sensor.c_plus;
    let mesh = case.build_mesh([240, 1]).map_err(err)?;
    let mut sim = Simulation::new(mesh, cfg, |x, y| case.initial_condition(x, y)).map_err(err)?;
    let mut max_c = 0.0f64;
    let mut min_c = f64::INFINITY;
    sim.run_with(|rec, s| {
        max_c = max_c.max(rec.max_c);
        min_c = min_c.min(s.c_field().values().iter().cloned().fold(f64::INFINITY, f64::min));
    })
    .map_err(err)?;
    let values = sim.c_field().values();
    let dg_like = values.iter().filter(|&&c| c < SENSOR_DG_EPS * c_plus).count();
    let share = dg_like as f64 / values.len() as f64;
    let active = values.iter().filter(|&&c| c > 0.0).count();
    Ok(outcome(
        max_c <= c_plus && min_c >= 0.0 && share >= SENSOR_DG_SHARE,
        format!(
            "N=240, p=3, {} steps: max c / c_+ = {:.3}, final share with c < {SENSOR_DG_EPS} c_+ = {:.1}% ({active} elements with c > 0)",
            sim.steps(),
            max_c / c_plus,
            100.0 * share
        ),
    ))
}

// ── 9. Limiter properties ────────────────────────────────────────────

fn limiter_properties() -> Result<Outcome, String> {
    let mut rng = StdRng::seed_from_u64(0x5eed_0009);
    let gamma = 1.4;
    let cfg = LimiterConfig::default();
    let mut work = LimiterWorkspace::default();
    let mut tested = 0;
    let mut activated = 0;
    let mut worst_avg = 0.0f64;
    let mut worst_idem = 0.0f64;
    let mut admissible = true;
    for dim in [1, 2] {
        for p in 1..=5 {
            let ops = ReferenceOperators::new(p, dim).map_err(err)?;
            let nvar = dim + 2;
            let np = ops.nodes_per_element();
            let (interp, npts) = ops.enforcement();
            for _ in 0..200 {
                let base = EulerState::from_primitive(
                    rng.random_range(0.01..2.0),
                    [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)],
                    rng.random_range(0.01..2.0),
                    gamma,
                );
                let amp = rng.random_range(0.0..3.0);
                let mut values = vec![0.0; np * nvar];
                for i in 0..np {
                    let mut u = base.to_array();
                    for (v, x) in u.iter_mut().enumerate() {
                        let scale = if v == 3 { base.energy } else { base.rho.max(base.mom[0].abs()).max(base.mom[1].abs()) };
                        *x += amp * scale * rng.random_range(-1.0..1.0);
                    }
                    if dim == 1 {
                        u[2] = 0.0;
                    }
                    EulerState::from_array(u).write(&mut values[i * nvar..], dim);
                }
                let avg = cell_average(&values, &ops);
                if !EulerState::from_array(avg).is_admissible(gamma) || EulerState::from_array(avg).pressure(gamma) <= cfg.eps {
                    continue;
                }
                tested += 1;
                let first = limit_element(&mut values, 0, &ops, &cfg, gamma, &mut work).map_err(err)?;
                activated += first.activated() as usize;
                let after = cell_average(&values, &ops);
                let scale = avg.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                worst_avg = worst_avg.max((0..4).map(|v| (after[v] - avg[v]).abs()).fold(0.0, f64::max) / scale);
                for k in 0..npts + np {
                    let u = if k < npts {
                        let mut u = [0.0; 4];
                        for i in 0..np {
                            let s = EulerState::read(&values[i * nvar..], dim).to_array();
                            for v in 0..4 {
                                u[v] += interp[k * np + i] * s[v];
                            }
                        }
                        EulerState::from_array(u)
                    } else {
                        EulerState::read(&values[(k - npts) * nvar..], dim)
                    };
                    admissible &= u.rho > 0.0 && u.pressure(gamma) > 0.0;
                }
                let before = values.clone();
                limit_element(&mut values, 0, &ops, &cfg, gamma, &mut work).map_err(err)?;
                let vscale = before.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                worst_idem = worst_idem.max(before.iter().zip(&values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / vscale);
            }
        }
    }
    // No-op on the smooth pulse.
    let case = Case::new(CaseKind::GaussianPulse);
    let mut smooth_ok = true;
    for p in [2, 3] {
        let cfg_off = {
            let mut c = config(p, Scheme::Afr)?;
            c.limiter.enabled = false;
            c
        };
        let sim = Simulation::new(case.build_mesh([16, 16]).map_err(err)?, cfg_off, |x, y| case.initial_condition(x, y))
            .map_err(err)?;
        let mut field = sim.field().clone();
        let count = limit_field(&mut field, sim.ops(), &cfg, gamma, &mut work).map_err(err)?;
        smooth_ok &= count == 0 && field.data() == sim.field().data();
    }
    Ok(outcome(
        worst_avg <= LIMITER_TOL && worst_idem <= LIMITER_TOL && admissible && smooth_ok && activated > 0,
        format!(
            "{tested} random elements ({activated} limited): average drift {worst_avg:.2e}, idempotence {worst_idem:.2e}, \
             admissible after = {admissible}; smooth pulse untouched = {smooth_ok}"
        ),
    ))
}

// ── 10. Free-stream preservation ─────────────────────────────────────

fn with_boundaries(spec: &BoundarySpec, f: impl Fn(&BoundaryKind) -> BoundaryKind) -> BoundarySpec {
    let mut out = spec.clone();
    for s in &mut out.segments {
        s.kind = f(&s.kind);
    }
    out
}

fn freestream_run(mesh: CartesianMesh, state: EulerState, scheme: Scheme) -> Result<f64, String> {
    let mut cfg = config(3, scheme)?;
    cfg.time.final_time = 1e9;
    let mut sim = Simulation::new(mesh, cfg, |_, _| Ok(state)).map_err(err)?;
    let mut worst = 0.0f64;
    for _ in 0..10 {
        sim.update_sensor().map_err(err)?;
        let r = sim.residual().map_err(err)?;
        worst = worst.max(r.data().iter().fold(0.0f64, |m, v| m.max(v.abs())));
        sim.step().map_err(err)?;
    }
    Ok(worst)
}

fn freestream() -> Result<Outcome, String> {
    let rest = EulerState::from_primitive(1.4, [0.0, 0.0], 1.0, 1.4);
    let moving = EulerState::from_primitive(1.0, [0.3, -0.2], 1.0, 1.4);
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for kind in [CaseKind::GaussianPulse, CaseKind::Leblanc, CaseKind::ShockDiffraction, CaseKind::DoubleMachReflection] {
        let case = Case::new(kind);
        let cells = case.default_grid(3);
        let cells = if kind == CaseKind::Leblanc { [240, 1] } else { cells };
        let spec = case.boundaries();
        // 1D states carry no transverse momentum.
        let moving = if case.dim() == 1 { EulerState::from_primitive(1.0, [0.3, 0.0], 1.0, 1.4) } else { moving };
        let mut variants: Vec<(BoundarySpec, EulerState)> = Vec::new();
        if spec.segments.is_empty() {
            variants.push((spec.clone(), moving));
        } else {
            // The case's own walls and outflows around a state at rest ...
            variants.push((
                with_boundaries(&spec, |k| match k {
                    BoundaryKind::Inflow(_) | BoundaryKind::PostShock(_) => BoundaryKind::Inflow(rest),
                    other => other.clone(),
                }),
                rest,
            ));
            // ... and a moving state with far-field data on every segment.
            variants.push((with_boundaries(&spec, |_| BoundaryKind::Inflow(moving)), moving));
        }
        let mut case_worst = 0.0f64;
        for (spec, state) in variants {
            for scheme in SCHEMES {
                let mesh = CartesianMesh::new(case.dim(), &case.blocks(), cells, &spec).map_err(err)?;
                case_worst = case_worst.max(freestream_run(mesh, state, scheme)?);
            }
        }
        worst = worst.max(case_worst);
        parts.push(format!("{kind} {case_worst:.1e}"));
    }
    Ok(outcome(worst <= FREESTREAM_TOL, format!("max |du/dt| over 10 steps, p=3, all schemes: {}", parts.join(", "))))
}

// ── 2D smoke runs ────────────────────────────────────────────────────

/// Rightmost `x` on the line `y` where density crosses `threshold`.
fn shock_front(sim: &Simulation, case: &Case, y: f64, threshold: f64, x_range: (f64, f64)) -> Option<f64> {
    let samples = 4000;
    let mut prev: Option<(f64, f64)> = None;
    for k in (0..=samples).rev() {
        let x = x_range.0 + (x_range.1 - x_range.0) * k as f64 / samples as f64;
        if !case.contains(x, y) {
            continue;
        }
        let rho = sample_state(sim.field(), sim.mesh(), sim.ops(), x, y)?.rho;
        if let Some((xp, rp)) = prev {
            if rho >= threshold && rp < threshold {
                return Some(x + (xp - x) * (rho - threshold) / (rho - rp));
            }
        }
        prev = Some((x, rho));
    }
    None
}

fn smoke(kind: CaseKind, p: usize, final_time: f64, y: f64, pre_post: (f64, f64)) -> Result<Outcome, String> {
    let case = Case::new(kind);
    let mut cfg = config(p, Scheme::Afr)?;
    cfg.time.cfl = case.default_cfl();
    cfg.time.final_time = final_time;
    let c_plus = cfg.sensor.c_plus;
    let mesh = case.build_mesh(case.default_grid(p)).map_err(err)?;
    let elements = mesh.num_elements();
    let mut sim = Simulation::new(mesh, cfg, |x, y| case.initial_condition(x, y)).map_err(err)?;
    let mut max_c = 0.0f64;
    let result = sim.run_with(|rec, _| max_c = max_c.max(rec.max_c));
    if let Err(e) = result {
        return Ok(outcome(false, format!("aborted after {} steps: {e}", sim.steps())));
    }
    let (lo, hi) = sim.mesh().bounds();
    let threshold = 0.5 * (pre_post.0 + pre_post.1);
    let exact = case.incident_shock_x(y, final_time).ok_or("no analytic shock position")?;
    let found = shock_front(&sim, &case, y, threshold, (lo[0], hi[0]));
    let rel = found.map(|x| (x - exact).abs() / exact).unwrap_or(f64::INFINITY);
    let bounded = max_c <= c_plus && sim.c_field().values().iter().all(|&c| (0.0..=c_plus).contains(&c));
    Ok(outcome(
        bounded && rel <= SHOCK_POSITION_TOL,
        format!(
            "{elements} elements, p={p}, t={final_time}: {} steps, max c / c_+ = {:.3}, shock at y={y}: {} vs {exact:.3} ({:.1}%)",
            sim.steps(),
            max_c / c_plus,
            found.map(|x| format!("{x:.3}")).unwrap_or_else(|| "none".into()),
            100.0 * rel
        ),
    ))
}

fn diffraction_smoke() -> Result<Outcome, String> {
    let (rho, _, _) = afr_core::cases::DIFFRACTION_LEFT;
    smoke(CaseKind::ShockDiffraction, 2, 1.0, 10.0, (1.4, rho))
}

fn dmr_smoke() -> Result<Outcome, String> {
    smoke(CaseKind::DoubleMachReflection, 2, 0.2, DMR_PROBE_Y, (1.4, 8.0))
}

/// Probe height for the DMR incident shock: above the Mach stem and the
/// reflected structure, below the disturbance from the top wall.
const DMR_PROBE_Y: f64 = 1.5;

fn main() -> ExitCode {
    let mut checks: Vec<(&str, &str, Check)> = vec![
        ("1", "operator identities", operator_identities),
        ("2", "scheme recovery", scheme_recovery),
        ("3", "conservation", conservation),
        ("4", "entropy conservation", entropy_conservation),
        ("5", "convergence order", convergence),
        ("6", "Leblanc max-CFL ordering", leblanc_cfl_ordering),
        ("8", "sensor localization", sensor_localization),
        ("9", "limiter properties", limiter_properties),
        ("10", "free-stream preservation", freestream),
        ("2D-a", "shock diffraction smoke run", diffraction_smoke),
        ("2D-b", "double Mach reflection smoke run", dmr_smoke),
    ];
    if long_mode() {
        checks.push(("6-full", "Leblanc max CFL at 1920 nodes", leblanc_paper_cfl));
        checks.push(("7", "Leblanc p=5 DG failure mode", leblanc_p5));
    } else {
        println!("note: criteria 6-full and 7 run only with AFR_LONG=1; criterion 5 uses T = {CONVERGENCE_FINAL_TIME}");
    }
    let filter = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failures = 0;
    let mut run = 0;
    for (id, name, check) in checks {
        if let Some(f) = &filter {
            if !name.contains(f.as_str()) && id != f {
                continue;
            }
        }
        run += 1;
        let start = Instant::now();
        let result = check().unwrap_or_else(|e| outcome(false, format!("error: {e}")));
        let secs = start.elapsed().as_secs_f64();
        failures += !result.pass as usize;
        println!("{} [{id}] {name} ({secs:.1}s): {}", if result.pass { "PASS" } else { "FAIL" }, result.detail);
    }
    println!("{} of {run} criteria passed", run - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
