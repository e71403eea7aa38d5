//! Explicit SSPRK3 time stepping with convective CFL step selection.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::field::SolutionField;
use crate::mesh::CartesianMesh;

/// Which wave speed enters the CFL condition.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CflMode {
    /// `lambda_max` of the initial condition, frozen for the whole run.
    Initial,
    /// `lambda_max` of the current solution, refreshed every step.
    #[default]
    Adaptive,
}

impl FromStr for CflMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "initial" => Ok(Self::Initial),
            "adaptive" => Ok(Self::Adaptive),
            other => Err(Error::InvalidArgument(alloc::format!("unknown cfl mode '{other}' (initial|adaptive)"))),
        }
    }
}

impl fmt::Display for CflMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Initial => "initial",
            Self::Adaptive => "adaptive",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeConfig {
    pub cfl: f64,
    pub final_time: f64,
    pub cfl_mode: CflMode,
    /// Abort if the final time is not reached within this many steps.
    pub max_steps: usize,
    /// Keep every `log_every`-th step record (the last step is always kept).
    pub log_every: usize,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self { cfl: 0.1, final_time: 1.0, cfl_mode: CflMode::Adaptive, max_steps: 1_000_000, log_every: 1 }
    }
}

impl TimeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0) || !(self.final_time > 0.0) || !self.final_time.is_finite() {
            return Err(Error::invalid("CFL and final time must be positive"));
        }
        if self.max_steps == 0 || self.log_every == 0 {
            return Err(Error::invalid("step guard and log cadence must be positive"));
        }
        Ok(())
    }
}

/// Characteristic spacing `(x_max - x_min) / DOF^(1/d)` with `DOF` the
/// number of solution nodes.
pub fn dx_tilde(mesh: &CartesianMesh, degree: usize) -> f64 {
    let (lo, hi) = mesh.bounds();
    let dof = mesh.num_dofs(degree) as f64;
    (hi[0] - lo[0]) / Float::powf(dof, 1.0 / mesh.dim() as f64)
}

/// `CFL * dx / lambda_max`, shortened so that a step never passes the final time.
pub fn compute_dt(cfl: f64, dx: f64, lambda_max: f64, remaining: f64) -> Result<f64> {
    if !(lambda_max > 0.0) || !lambda_max.is_finite() {
        return Err(Error::invalid("maximum wave speed must be positive and finite"));
    }
    let dt = cfl * dx / lambda_max;
    Ok(if dt >= remaining { remaining } else { dt })
}

/// Storage that the Runge–Kutta stages combine linearly.
pub trait StageVector {
    fn values(&self) -> &[f64];
    fn values_mut(&mut self) -> &mut [f64];
}

impl StageVector for Vec<f64> {
    fn values(&self) -> &[f64] {
        self
    }
    fn values_mut(&mut self) -> &mut [f64] {
        self
    }
}

impl StageVector for SolutionField {
    fn values(&self) -> &[f64] {
        self.data()
    }
    fn values_mut(&mut self) -> &mut [f64] {
        self.data_mut()
    }
}

/// One step of the three-stage, third-order SSP Runge–Kutta scheme in
/// Shu–Osher form, with the convex combinations written as increments of the
/// step's initial state (`3/4 a + 1/4 b = a + 1/4 (b - a)`) so that a steady
/// state with zero residual is reproduced bit for bit. `rhs(u, k, stage)` writes `du/dt` into `k`; `post(u, stage)`
/// runs after each stage update (limiting). `u0` and `k` are scratch of the
/// same shape as `u`.
pub fn ssprk3_step<V, R, P>(u: &mut V, dt: f64, u0: &mut V, k: &mut V, mut rhs: R, mut post: P) -> Result<()>
where
    V: StageVector,
    R: FnMut(&V, &mut V, u8) -> Result<()>,
    P: FnMut(&mut V, u8) -> Result<()>,
{
    u0.values_mut().copy_from_slice(u.values());

    rhs(u0, k, 1)?;
    for ((x, &a), &r) in u.values_mut().iter_mut().zip(u0.values()).zip(k.values()) {
        *x = a + dt * r;
    }
    post(u, 1)?;

    rhs(u, k, 2)?;
    for ((x, &a), &r) in u.values_mut().iter_mut().zip(u0.values()).zip(k.values()) {
        *x = a + 0.25 * (*x - a + dt * r);
    }
    post(u, 2)?;

    rhs(u, k, 3)?;
    for ((x, &a), &r) in u.values_mut().iter_mut().zip(u0.values()).zip(k.values()) {
        *x = a + 2.0 / 3.0 * (*x - a + dt * r);
    }
    post(u, 3)
}

/// Diagnostics recorded after a completed step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    pub dt: f64,
    pub lambda_max: f64,
    /// Domain integrals of `(rho, m_x, m_y, E)`; present on logged steps
    /// (every `log_every` steps and the last one).
    pub totals: Option<[f64; 4]>,
    /// Domain integral of the mathematical entropy `-rho s / (gamma - 1)`,
    /// present on logged steps.
    pub entropy: Option<f64>,
    /// Element-stage limiter activations during the step.
    pub limiter_activations: usize,
    /// Largest `c` in use during the step.
    pub max_c: f64,
    /// Largest sensor-derived scaling `c / c_+` during the step.
    pub max_eps: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::BoundarySpec;
    use alloc::vec;

    fn decay_step(u: f64, dt: f64) -> f64 {
        let mut x = vec![u];
        let (mut u0, mut k) = (vec![0.0], vec![0.0]);
        ssprk3_step(
            &mut x,
            dt,
            &mut u0,
            &mut k,
            |u: &Vec<f64>, k: &mut Vec<f64>, _| {
                k[0] = -u[0];
                Ok(())
            },
            |_, _| Ok(()),
        )
        .unwrap();
        x[0]
    }

    #[test]
    fn one_step_is_cubic_taylor_polynomial() {
        let expected = 1.0 - 0.1 + 0.005 - 0.1f64.powi(3) / 6.0;
        assert!((decay_step(1.0, 0.1) - expected).abs() < 1e-15);
    }

    #[test]
    fn third_order_convergence() {
        let err = |steps: usize| {
            let dt = 1.0 / steps as f64;
            let mut u = 1.0;
            for _ in 0..steps {
                u = decay_step(u, dt);
            }
            (u - (-1.0f64).exp()).abs()
        };
        let (e1, e2, e3) = (err(10), err(20), err(40));
        for r in [e1 / e2, e2 / e3] {
            assert!((r - 8.0).abs() < 0.5, "ratio {r}");
        }
    }

    #[test]
    fn zero_rhs_is_identity_and_post_sees_every_stage() {
        let mut x = vec![1.0, -2.0, 3.5];
        let before = x.clone();
        let (mut u0, mut k) = (vec![0.0; 3], vec![0.0; 3]);
        let mut stages = vec![];
        ssprk3_step(
            &mut x,
            0.3,
            &mut u0,
            &mut k,
            |_, k: &mut Vec<f64>, _| {
                k.iter_mut().for_each(|v| *v = 0.0);
                Ok(())
            },
            |_, s| {
                stages.push(s);
                Ok(())
            },
        )
        .unwrap();
        assert_eq!(x, before);
        assert_eq!(stages, [1, 2, 3]);
    }

    #[test]
    fn stage_errors_propagate() {
        let mut x = vec![1.0];
        let (mut u0, mut k) = (vec![0.0], vec![0.0]);
        let r = ssprk3_step(
            &mut x,
            0.1,
            &mut u0,
            &mut k,
            |_, _, s| if s == 2 { Err(Error::StepLimit(0)) } else { Ok(()) },
            |_, _| Ok(()),
        );
        assert!(r.is_err());
    }

    #[test]
    fn dt_formula() {
        assert!((compute_dt(0.5, 0.1, 1.0, 10.0).unwrap() - 0.05).abs() < 1e-17);
        assert_eq!(compute_dt(0.5, 0.1, 1.0, 0.03).unwrap(), 0.03);
        assert_eq!(compute_dt(0.25, 0.1, 1.0, 10.0).unwrap() * 2.0, compute_dt(0.5, 0.1, 1.0, 10.0).unwrap());
        assert!(compute_dt(0.5, 0.1, 0.0, 1.0).is_err());
    }

    #[test]
    fn characteristic_spacing_counts_all_nodes() {
        let spec = BoundarySpec::periodic(1);
        let mesh = CartesianMesh::interval(-10.0, 10.0, 900, &spec).unwrap();
        assert!((dx_tilde(&mesh, 3) - 20.0 / 3600.0).abs() < 1e-15);
    }
}
