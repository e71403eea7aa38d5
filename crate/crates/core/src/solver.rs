//! Simulation driver: residual, sensor, limiter and SSPRK3 stepping.

use alloc::vec::Vec;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::euler::{max_wavespeed, EulerState, FluxConfig};
use crate::field::SolutionField;
use crate::limiter::{limit_field, LimiterConfig, LimiterWorkspace};
use crate::mesh::CartesianMesh;
use crate::reference::ReferenceOperators;
use crate::residual::{compute_residual, ResidualWorkspace};
use crate::sensor::{update_c_field, CParameterField, Scheme, SensorConfig, SensorUpdate};
use crate::time_march::{compute_dt, dx_tilde, ssprk3_step, CflMode, StepRecord, TimeConfig};

/// Everything that defines a discretization and its time integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub degree: usize,
    pub scheme: Scheme,
    pub flux: FluxConfig,
    pub limiter: LimiterConfig,
    pub sensor: SensorConfig,
    pub time: TimeConfig,
}

impl SolverConfig {
    /// Defaults for degree `p`: adaptive scheme, Roe dissipation, limiter on.
    pub fn new(degree: usize) -> Result<Self> {
        Ok(Self {
            degree,
            scheme: Scheme::Afr,
            flux: FluxConfig::default(),
            limiter: LimiterConfig::default(),
            sensor: SensorConfig::for_degree(degree)?,
            time: TimeConfig::default(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.flux.validate()?;
        self.limiter.validate()?;
        self.sensor.validate()?;
        self.time.validate()
    }
}

/// Result of [`Simulation::run`].
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub final_time: f64,
    pub initial_totals: [f64; 4],
    pub final_totals: [f64; 4],
    pub limiter_activations: usize,
}

#[derive(Clone, Debug)]
pub struct Simulation {
    mesh: CartesianMesh,
    ops: ReferenceOperators,
    config: SolverConfig,
    field: SolutionField,
    c_field: CParameterField,
    residual_work: ResidualWorkspace,
    limiter_work: LimiterWorkspace,
    u0: SolutionField,
    k: SolutionField,
    step: usize,
    initial_lambda: f64,
    log: Vec<StepRecord>,
}

impl Simulation {
    /// Set up from an initial condition sampled at the solution nodes. The
    /// limiter (when enabled) is applied once to the sampled field.
    pub fn new<F>(mesh: CartesianMesh, config: SolverConfig, initial: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Result<EulerState>,
    {
        let ops = ReferenceOperators::new(config.degree, mesh.dim())?;
        let mut field = SolutionField::zeros(mesh.dim(), config.degree, mesh.num_elements());
        let n = ops.line().n;
        let nodes = ops.basis().nodes().to_vec();
        for e in 0..mesh.num_elements() {
            for i in 0..ops.nodes_per_element() {
                let xi = if mesh.dim() == 1 { [nodes[i], 0.0] } else { [nodes[i % n], nodes[i / n]] };
                let x = mesh.physical(e, xi);
                field.set_state(e, i, initial(x[0], x[1])?);
            }
        }
        Self::from_field(mesh, config, field)
    }

    pub fn from_field(mesh: CartesianMesh, config: SolverConfig, mut field: SolutionField) -> Result<Self> {
        config.validate()?;
        let ops = ReferenceOperators::new(config.degree, mesh.dim())?;
        if field.num_elements() != mesh.num_elements() || field.dim() != mesh.dim() || field.degree() != config.degree {
            return Err(Error::invalid("initial field does not match mesh and degree"));
        }
        let mut limiter_work = LimiterWorkspace::default();
        limit_field(&mut field, &ops, &config.limiter, config.flux.gamma, &mut limiter_work)?;
        let initial_lambda = max_wavespeed(&field, config.flux.gamma)?;
        let mut c_field = CParameterField::uniform(mesh.num_elements(), 0.0);
        update_c_field(&field, &ops, config.scheme, &config.sensor, config.flux.gamma, &mut c_field)?;
        Ok(Self {
            residual_work: ResidualWorkspace::new(&mesh, &ops),
            u0: field.clone(),
            k: field.clone(),
            mesh,
            ops,
            config,
            field,
            c_field,
            limiter_work,
            step: 0,
            initial_lambda,
            log: Vec::new(),
        })
    }

    pub fn mesh(&self) -> &CartesianMesh {
        &self.mesh
    }
    pub fn ops(&self) -> &ReferenceOperators {
        &self.ops
    }
    pub fn config(&self) -> &SolverConfig {
        &self.config
    }
    pub fn field(&self) -> &SolutionField {
        &self.field
    }
    pub fn c_field(&self) -> &CParameterField {
        &self.c_field
    }
    pub fn time(&self) -> f64 {
        self.field.time
    }
    pub fn steps(&self) -> usize {
        self.step
    }
    pub fn log(&self) -> &[StepRecord] {
        &self.log
    }

    /// Refresh the `c` field from the current solution.
    pub fn update_sensor(&mut self) -> Result<()> {
        let cfg = &self.config;
        update_c_field(&self.field, &self.ops, cfg.scheme, &cfg.sensor, cfg.flux.gamma, &mut self.c_field)
    }

    /// `du/dt` of the current solution with the current `c` field.
    pub fn residual(&mut self) -> Result<SolutionField> {
        let mut out = self.field.clone();
        compute_residual(
            &self.field,
            &self.c_field,
            &self.mesh,
            &self.ops,
            &self.config.flux,
            &mut self.residual_work,
            &mut out,
        )?;
        Ok(out)
    }

    /// Domain integrals of the conserved variables.
    pub fn totals(&self) -> [f64; 4] {
        conserved_totals(&self.field, &self.mesh, &self.ops)
    }

    /// Domain integral of the mathematical entropy at the volume quadrature points.
    pub fn entropy(&self) -> f64 {
        entropy_integral(&self.field, &self.mesh, &self.ops, self.config.flux.gamma)
    }

    /// Step size the next step would take.
    pub fn next_dt(&self) -> Result<f64> {
        let lambda = self.lambda()?;
        let remaining = self.config.time.final_time - self.field.time;
        compute_dt(self.config.time.cfl, dx_tilde(&self.mesh, self.config.degree), lambda, remaining)
    }

    fn lambda(&self) -> Result<f64> {
        match self.config.time.cfl_mode {
            CflMode::Initial => Ok(self.initial_lambda),
            CflMode::Adaptive => max_wavespeed(&self.field, self.config.flux.gamma),
        }
    }

    /// Advance by one step of at most the CFL-limited size.
    pub fn step(&mut self) -> Result<StepRecord> {
        let step = self.step + 1;
        let gamma = self.config.flux.gamma;
        if self.config.sensor.update == SensorUpdate::Step || self.step == 0 {
            self.update_sensor().map_err(|e| e.at_stage(step, 1))?;
        }
        let lambda = self.lambda().map_err(|e| e.at_stage(step, 1))?;
        let remaining = self.config.time.final_time - self.field.time;
        let dt = compute_dt(self.config.time.cfl, dx_tilde(&self.mesh, self.config.degree), lambda, remaining)?;

        let Self { mesh, ops, config, field, c_field, residual_work, limiter_work, u0, k, .. } = self;
        let mut activations = 0;
        let mut max_c = c_field.max();
        ssprk3_step(
            field,
            dt,
            u0,
            k,
            |u, out, stage| {
                if config.sensor.update == SensorUpdate::Stage && stage > 1 {
                    update_c_field(u, ops, config.scheme, &config.sensor, gamma, c_field)
                        .map_err(|e| e.at_stage(step, stage))?;
                    max_c = max_c.max(c_field.max());
                }
                compute_residual(u, c_field, mesh, ops, &config.flux, residual_work, out)
                    .map_err(|e| e.at_stage(step, stage))
            },
            |u, stage| {
                activations += limit_field(u, ops, &config.limiter, gamma, limiter_work).map_err(|e| e.at_stage(step, stage))?;
                Ok(())
            },
        )?;
        let t = self.field.time + dt;
        self.field.time = if dt == remaining { self.config.time.final_time } else { t };
        self.step = step;
        let logged = step % self.config.time.log_every == 0 || self.field.time >= self.config.time.final_time;
        let record = StepRecord {
            step,
            time: self.field.time,
            dt,
            lambda_max: lambda,
            totals: logged.then(|| self.totals()),
            entropy: logged.then(|| self.entropy()),
            limiter_activations: activations,
            max_c,
            max_eps: max_c / self.config.sensor.c_plus,
        };
        Ok(record)
    }

    /// Run to the configured final time. `observer` sees every step record;
    /// records are also kept in [`Simulation::log`] at the configured cadence.
    pub fn run_with<O: FnMut(&StepRecord, &Self)>(&mut self, mut observer: O) -> Result<RunSummary> {
        let initial_totals = self.totals();
        let mut activations = 0;
        let t_end = self.config.time.final_time;
        while self.field.time < t_end {
            if self.step >= self.config.time.max_steps {
                return Err(Error::StepLimit(self.config.time.max_steps));
            }
            let rec = self.step()?;
            activations += rec.limiter_activations;
            if rec.totals.is_some() {
                self.log.push(rec);
            }
            observer(&rec, self);
        }
        if self.config.sensor.update == SensorUpdate::Step {
            // Report the c field that belongs to the final solution.
            self.update_sensor()?;
        }
        Ok(RunSummary {
            steps: self.step,
            final_time: self.field.time,
            initial_totals,
            final_totals: self.totals(),
            limiter_activations: activations,
        })
    }

    pub fn run(&mut self) -> Result<RunSummary> {
        self.run_with(|_, _| {})
    }
}

/// Domain integrals of the conserved variables of `field`.
pub fn conserved_totals(field: &SolutionField, mesh: &CartesianMesh, ops: &ReferenceOperators) -> [f64; 4] {
    let h = mesh.h();
    let volume = if mesh.dim() == 1 { h[0] } else { h[0] * h[1] };
    let mut total = [0.0; 4];
    for e in 0..field.num_elements() {
        let mut avg = [0.0; 4];
        for (i, &w) in ops.line().average.iter().enumerate() {
            let u = field.state(e, i).to_array();
            for v in 0..4 {
                avg[v] += w * u[v];
            }
        }
        for v in 0..4 {
            total[v] += volume * avg[v];
        }
    }
    total
}

/// Domain integral of `-rho s / (gamma - 1)` with the volume quadrature.
pub fn entropy_integral(field: &SolutionField, mesh: &CartesianMesh, ops: &ReferenceOperators, gamma: f64) -> f64 {
    let line = ops.line();
    let n = line.n;
    let jac = mesh.jacobian();
    let mut total = 0.0;
    for e in 0..field.num_elements() {
        if mesh.dim() == 1 {
            for q in 0..n {
                let u = interp_state(field, e, |i| line.vq[q * n + i]);
                total += jac * line.weights[q] * u.entropy(gamma);
            }
        } else {
            for q2 in 0..n {
                for q1 in 0..n {
                    let u = interp_state(field, e, |i| line.vq[q1 * n + i % n] * line.vq[q2 * n + i / n]);
                    total += jac * line.weights[q1] * line.weights[q2] * u.entropy(gamma);
                }
            }
        }
    }
    total
}

fn interp_state(field: &SolutionField, e: usize, weight: impl Fn(usize) -> f64) -> EulerState {
    let mut u = [0.0; 4];
    for i in 0..field.nodes_per_element() {
        let s = field.state(e, i).to_array();
        let w = weight(i);
        for v in 0..4 {
            u[v] += w * s[v];
        }
    }
    EulerState::from_array(u)
}

/// Relative drift `|b - a| / max(|a|, floor)` per component.
pub fn relative_drift(a: &[f64; 4], b: &[f64; 4], floor: f64) -> [f64; 4] {
    let mut d = [0.0; 4];
    for v in 0..4 {
        d[v] = Float::abs(b[v] - a[v]) / Float::max(Float::abs(a[v]), floor);
    }
    d
}
