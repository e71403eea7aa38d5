//! File formats: line extractions and tables as CSV, element fields as
//! legacy VTK structured grids, and the step log as NDJSON.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use afr_core::cases::{sample_state, Case, CaseKind, ConvergenceRow};
use afr_core::limiter::cell_average;
use afr_core::time_march::StepRecord;
use afr_core::nalgebra::DMatrix;
use afr_core::{EulerState, ReferenceOperators, Simulation};
use anyhow::{Context, Result};
use serde::Serialize;

/// One sample of a line extraction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LineSample {
    pub x: f64,
    pub y: f64,
    pub rho: f64,
    pub p: f64,
    pub c: f64,
}

/// Straight sampling line from `a` to `b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Line {
    pub a: [f64; 2],
    pub b: [f64; 2],
}

impl Line {
    /// Default extraction line of each case: the whole interval in 1D, the
    /// horizontal centre line of the pulse, the diagonal of the diffraction
    /// domain and a horizontal cut through the DMR reflection region.
    pub fn default_for(case: &Case) -> Line {
        match case.kind {
            CaseKind::Leblanc => Line { a: [-10.0, 0.0], b: [10.0, 0.0] },
            CaseKind::DensityWave => Line { a: [0.0, 0.0], b: [1.0, 0.0] },
            CaseKind::GaussianPulse => Line { a: [-0.5, 0.0], b: [0.5, 0.0] },
            CaseKind::ShockDiffraction => Line { a: [1.0, 0.0], b: [13.0, 11.0] },
            CaseKind::DoubleMachReflection => Line { a: [0.0, 0.5], b: [4.0, 0.5] },
        }
    }

    /// Parse `x0,y0,x1,y1`.
    pub fn parse(s: &str) -> Result<Line> {
        let v: Vec<f64> = crate::config::parse_list(s)?;
        anyhow::ensure!(v.len() == 4, "line must be x0,y0,x1,y1");
        Ok(Line { a: [v[0], v[1]], b: [v[2], v[3]] })
    }
}

/// Sample density, pressure and the element's `c` at `n` evenly spaced
/// points of `line`; points outside the mesh are skipped.
pub fn extract_line(sim: &Simulation, line: Line, n: usize) -> Vec<LineSample> {
    let gamma = sim.config().flux.gamma;
    let mesh = sim.mesh();
    let dim = mesh.dim();
    (0..n)
        .filter_map(|k| {
            let t = if n > 1 { k as f64 / (n - 1) as f64 } else { 0.0 };
            let x = line.a[0] + t * (line.b[0] - line.a[0]);
            let y = if dim == 1 { 0.0 } else { line.a[1] + t * (line.b[1] - line.a[1]) };
            let (e, _) = mesh.locate([x, y])?;
            let u = sample_state(sim.field(), mesh, sim.ops(), x, y)?;
            Some(LineSample { x, y, rho: u.rho, p: u.pressure(gamma), c: sim.c_field().values()[e] })
        })
        .collect()
}

pub fn write_line_csv(path: &Path, samples: &[LineSample], dim: usize) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    if dim == 1 {
        w.write_record(["x", "rho", "p", "c"])?;
        for s in samples {
            w.serialize((s.x, s.rho, s.p, s.c))?;
        }
    } else {
        w.write_record(["x", "y", "rho", "p", "c"])?;
        for s in samples {
            w.serialize((s.x, s.y, s.rho, s.p, s.c))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Per-element cell-average density, pressure and `c` on the element lattice
/// of the bounding box, as a legacy VTK structured grid. Lattice cells that
/// are not part of the domain (the notch of an L-shaped domain) carry zeros
/// and `in_domain = 0`.
pub fn write_vtk(path: &Path, sim: &Simulation) -> Result<()> {
    let mesh = sim.mesh();
    let ops: &ReferenceOperators = sim.ops();
    let gamma = sim.config().flux.gamma;
    let [nx, ny] = mesh.cells();
    let (lo, _) = mesh.bounds();
    let h = mesh.h();
    let hy = if mesh.dim() == 1 { 1.0 } else { h[1] };
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "afr solution t={:.9e}", sim.time())?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET STRUCTURED_GRID")?;
    writeln!(w, "DIMENSIONS {} {} 1", nx + 1, ny + 1)?;
    writeln!(w, "POINTS {} double", (nx + 1) * (ny + 1))?;
    for j in 0..=ny {
        for i in 0..=nx {
            writeln!(w, "{:.12e} {:.12e} 0", lo[0] + i as f64 * h[0], lo[1] + j as f64 * hy)?;
        }
    }
    let mut rho = Vec::with_capacity(nx * ny);
    let mut pressure = Vec::with_capacity(nx * ny);
    let mut c = Vec::with_capacity(nx * ny);
    let mut inside = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            match mesh.element_at_lattice(i, j) {
                Some(e) => {
                    let avg = EulerState::from_array(cell_average(sim.field().element(e), ops));
                    rho.push(avg.rho);
                    pressure.push(avg.pressure(gamma));
                    c.push(sim.c_field().values()[e]);
                    inside.push(1.0);
                }
                None => {
                    rho.push(0.0);
                    pressure.push(0.0);
                    c.push(0.0);
                    inside.push(0.0);
                }
            }
        }
    }
    writeln!(w, "CELL_DATA {}", nx * ny)?;
    for (name, values) in [("density", &rho), ("pressure", &pressure), ("c", &c), ("in_domain", &inside)] {
        writeln!(w, "SCALARS {name} double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for v in values.iter() {
            writeln!(w, "{v:.12e}")?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_convergence_csv(path: &Path, scheme: &str, degree: usize, rows: &[ConvergenceRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["scheme", "p", "nx", "ny", "dofs", "l1", "l2", "linf", "order_l1", "order_l2", "order_linf"])?;
    let opt = |o: Option<f64>| o.map(|v| format!("{v:.6}")).unwrap_or_default();
    for r in rows {
        w.write_record([
            scheme.to_string(),
            degree.to_string(),
            r.cells[0].to_string(),
            r.cells[1].to_string(),
            r.dofs.to_string(),
            format!("{:.10e}", r.errors.l1),
            format!("{:.10e}", r.errors.l2),
            format!("{:.10e}", r.errors.linf),
            opt(r.order_l1),
            opt(r.order_l2),
            opt(r.order_linf),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Newline-delimited JSON run log.
pub struct RunLog {
    out: BufWriter<File>,
}

#[derive(Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
enum LogLine<'a> {
    Start {
        case: &'a str,
        scheme: String,
        p: usize,
        grid: [usize; 2],
        elements: usize,
        cfl: f64,
        cfl_mode: String,
        final_time: f64,
        dissipation: String,
        limiter: bool,
        kappa: f64,
        c_plus: f64,
    },
    Step {
        step: usize,
        time: f64,
        dt: f64,
        lambda_max: f64,
        mass: Option<f64>,
        momentum: Option<[f64; 2]>,
        energy: Option<f64>,
        entropy: Option<f64>,
        limiter_activations: usize,
        max_c: f64,
        max_eps: f64,
    },
    End {
        steps: usize,
        time: f64,
        completed: bool,
        error: Option<String>,
        wall_seconds: f64,
    },
}

impl RunLog {
    pub fn create(path: &Path) -> Result<Self> {
        Ok(Self { out: BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?) })
    }

    fn line(&mut self, l: &LogLine) -> Result<()> {
        serde_json::to_writer(&mut self.out, l)?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn start(&mut self, case: &Case, sim: &Simulation) -> Result<()> {
        let cfg = sim.config();
        self.line(&LogLine::Start {
            case: case.kind.name(),
            scheme: cfg.scheme.to_string(),
            p: cfg.degree,
            grid: sim.mesh().cells(),
            elements: sim.mesh().num_elements(),
            cfl: cfg.time.cfl,
            cfl_mode: cfg.time.cfl_mode.to_string(),
            final_time: cfg.time.final_time,
            dissipation: cfg.flux.dissipation.to_string(),
            limiter: cfg.limiter.enabled,
            kappa: cfg.sensor.kappa,
            c_plus: cfg.sensor.c_plus,
        })
    }

    pub fn step(&mut self, r: &StepRecord) -> Result<()> {
        self.line(&LogLine::Step {
            step: r.step,
            time: r.time,
            dt: r.dt,
            lambda_max: r.lambda_max,
            mass: r.totals.map(|t| t[0]),
            momentum: r.totals.map(|t| [t[1], t[2]]),
            energy: r.totals.map(|t| t[3]),
            entropy: r.entropy,
            limiter_activations: r.limiter_activations,
            max_c: r.max_c,
            max_eps: r.max_eps,
        })
    }

    pub fn end(&mut self, sim: &Simulation, error: Option<String>, wall_seconds: f64) -> Result<()> {
        self.line(&LogLine::End {
            steps: sim.steps(),
            time: sim.time(),
            completed: error.is_none(),
            error,
            wall_seconds,
        })?;
        self.out.flush()?;
        Ok(())
    }
}

/// Write a dense matrix as CSV without a header.
fn write_matrix(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for i in 0..m.nrows() {
        w.write_record((0..m.ncols()).map(|j| format!("{:.17e}", m[(i, j)])))?;
    }
    w.flush()?;
    Ok(())
}

/// Dump the reference operators of degree `p` in `dim` dimensions with FR
/// parameter `c`: nodes and weights, mass, FR filter, modified lifting and
/// the hybridized skew operators. Returns the file names written.
pub fn dump_operators(dir: &Path, ops: &ReferenceOperators, c: f64) -> Result<Vec<String>> {
    let basis = ops.basis();
    let mut w = csv::Writer::from_path(dir.join("nodes.csv"))?;
    w.write_record(["kind", "index", "xi", "weight"])?;
    for (i, x) in basis.nodes().iter().enumerate() {
        w.write_record(["solution", &i.to_string(), &format!("{x:.17e}"), ""])?;
    }
    for (i, (x, wq)) in basis.quad_nodes().iter().zip(basis.quad_weights()).enumerate() {
        w.write_record(["quadrature", &i.to_string(), &format!("{x:.17e}"), &format!("{wq:.17e}")])?;
    }
    w.flush()?;

    let mut named = vec![
        ("mass.csv".to_string(), ops.mass().clone()),
        ("filter.csv".to_string(), ops.fr_filter(c)?),
        ("lifting.csv".to_string(), ops.lifting(c)?),
    ];
    for (axis, s) in ops.hybridized_skew()?.into_iter().enumerate() {
        named.push((format!("skew_{}.csv", ["x", "y"][axis]), s));
    }
    let mut written = vec!["nodes.csv".to_string()];
    for (name, m) in named {
        write_matrix(&dir.join(&name), &m)?;
        written.push(name);
    }
    Ok(written)
}
