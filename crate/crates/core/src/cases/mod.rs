//! Benchmark cases: geometry, boundary conditions, initial and exact
//! solutions, plus error norms, convergence studies and CFL searches.

mod harness;
mod norms;
pub mod riemann;

pub use harness::{convergence_study, max_cfl_bisect, run_completes, ConvergenceRow};
pub use norms::{error_norms, sample_state, ErrorReport};

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::euler::{EulerState, DEFAULT_GAMMA};
use crate::mesh::{Block, BoundaryKind, BoundarySegment, BoundarySpec, CartesianMesh};
use riemann::{Primitive1D, RiemannSolution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CaseKind {
    /// Density pulse advected diagonally across a periodic square.
    GaussianPulse,
    /// Shock tube with a `10^9` pressure ratio.
    Leblanc,
    /// Mach 5.09 shock diffracting around a backward-facing corner.
    ShockDiffraction,
    /// Mach 10 oblique shock reflecting off a wall.
    DoubleMachReflection,
    /// Smooth one-dimensional periodic density wave.
    DensityWave,
}

impl CaseKind {
    pub const ALL: [CaseKind; 5] =
        [Self::GaussianPulse, Self::Leblanc, Self::ShockDiffraction, Self::DoubleMachReflection, Self::DensityWave];

    pub fn name(&self) -> &'static str {
        match self {
            Self::GaussianPulse => "gaussian-pulse",
            Self::Leblanc => "leblanc",
            Self::ShockDiffraction => "shock-diffraction",
            Self::DoubleMachReflection => "dmr",
            Self::DensityWave => "density-wave",
        }
    }
}

impl FromStr for CaseKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidArgument(alloc::format!("unknown case '{s}'")))
    }
}

impl fmt::Display for CaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Left state of the shock-diffraction case (post-shock of a Mach 5.09 shock).
pub const DIFFRACTION_LEFT: (f64, f64, f64) = (7.041132906907898, 4.07794695481336, 30.05945);
/// Incident shock speed of the shock-diffraction case.
pub const DIFFRACTION_SHOCK_SPEED: f64 = 5.09;

/// A benchmark case with its physical parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Case {
    pub kind: CaseKind,
    pub gamma: f64,
    /// Pulse strength of the Gaussian pulse.
    pub sigma: f64,
}

impl Case {
    pub fn new(kind: CaseKind) -> Self {
        Self { kind, gamma: DEFAULT_GAMMA, sigma: 500.0 }
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            CaseKind::Leblanc | CaseKind::DensityWave => 1,
            _ => 2,
        }
    }

    /// Default element counts for degree `p`.
    pub fn default_grid(&self, p: usize) -> [usize; 2] {
        match self.kind {
            CaseKind::GaussianPulse => [16, 16],
            // 1920 solution nodes regardless of degree.
            CaseKind::Leblanc => [1920 / (p + 1), 1],
            CaseKind::ShockDiffraction => [52, 44],
            CaseKind::DoubleMachReflection => [96, 72],
            CaseKind::DensityWave => [16, 1],
        }
    }

    pub fn default_final_time(&self) -> f64 {
        match self.kind {
            CaseKind::GaussianPulse | CaseKind::DensityWave => 1.0,
            CaseKind::Leblanc => 1e-4,
            CaseKind::ShockDiffraction => 2.3,
            CaseKind::DoubleMachReflection => 0.2,
        }
    }

    pub fn default_cfl(&self) -> f64 {
        match self.kind {
            CaseKind::GaussianPulse | CaseKind::DensityWave => 0.2,
            CaseKind::Leblanc => 0.1,
            CaseKind::ShockDiffraction => 0.4,
            CaseKind::DoubleMachReflection => 0.3,
        }
    }

    fn state(&self, rho: f64, vel: [f64; 2], p: f64) -> EulerState {
        EulerState::from_primitive(rho, vel, p, self.gamma)
    }

    fn dmr_post_shock(&self) -> EulerState {
        let s3 = Float::sqrt(3.0);
        self.state(8.0, [33.0 * s3 / 8.0, -33.0 / 8.0], 116.5)
    }

    /// Axis-aligned blocks making up the domain.
    pub fn blocks(&self) -> Vec<Block> {
        match self.kind {
            CaseKind::GaussianPulse => vec![Block { lo: [-0.5, -0.5], hi: [0.5, 0.5] }],
            CaseKind::Leblanc => vec![Block { lo: [-10.0, 0.0], hi: [10.0, 1.0] }],
            CaseKind::DensityWave => vec![Block { lo: [0.0, 0.0], hi: [1.0, 1.0] }],
            CaseKind::ShockDiffraction => vec![
                Block { lo: [0.0, 6.0], hi: [1.0, 11.0] },
                Block { lo: [1.0, 0.0], hi: [13.0, 11.0] },
            ],
            CaseKind::DoubleMachReflection => vec![Block { lo: [0.0, 0.0], hi: [4.0, 3.0] }],
        }
    }

    pub fn boundaries(&self) -> BoundarySpec {
        use BoundaryKind::*;
        let seg = BoundarySegment::new;
        match self.kind {
            CaseKind::GaussianPulse => BoundarySpec::periodic(2),
            CaseKind::DensityWave => BoundarySpec::periodic(1),
            CaseKind::Leblanc => BoundarySpec {
                periodic: [false; 2],
                segments: vec![seg(0, -1.0, -10.0, (-1.0, 2.0), Outflow), seg(0, 1.0, 10.0, (-1.0, 2.0), Outflow)],
            },
            CaseKind::ShockDiffraction => {
                let (rho, u, p) = DIFFRACTION_LEFT;
                BoundarySpec {
                    periodic: [false; 2],
                    segments: vec![
                        seg(0, -1.0, 0.0, (6.0, 11.0), Inflow(self.state(rho, [u, 0.0], p))),
                        seg(0, -1.0, 1.0, (0.0, 6.0), SlipWall),
                        seg(1, -1.0, 6.0, (0.0, 1.0), SlipWall),
                        seg(1, -1.0, 0.0, (1.0, 13.0), Outflow),
                        seg(0, 1.0, 13.0, (0.0, 11.0), Outflow),
                        seg(1, 1.0, 11.0, (0.0, 13.0), SlipWall),
                    ],
                }
            }
            CaseKind::DoubleMachReflection => BoundarySpec {
                periodic: [false; 2],
                segments: vec![
                    seg(0, -1.0, 0.0, (0.0, 3.0), Inflow(self.dmr_post_shock())),
                    seg(0, 1.0, 4.0, (0.0, 3.0), Outflow),
                    seg(1, -1.0, 0.0, (0.0, 1.0 / 6.0), PostShock(self.dmr_post_shock())),
                    seg(1, -1.0, 0.0, (1.0 / 6.0, 4.0), SlipWall),
                    seg(1, 1.0, 3.0, (0.0, 4.0), SlipWall),
                ],
            },
        }
    }

    pub fn build_mesh(&self, cells: [usize; 2]) -> Result<CartesianMesh> {
        if cells[0] == 0 || cells[1] == 0 {
            return Err(Error::invalid("element counts must be positive"));
        }
        let cells = if self.dim() == 1 { [cells[0], 1] } else { cells };
        CartesianMesh::new(self.dim(), &self.blocks(), cells, &self.boundaries())
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.blocks().iter().any(|b| {
            x >= b.lo[0] && x <= b.hi[0] && (self.dim() == 1 || (y >= b.lo[1] && y <= b.hi[1]))
        })
    }

    pub fn initial_condition(&self, x: f64, y: f64) -> Result<EulerState> {
        if !self.contains(x, y) {
            return Err(Error::OutsideDomain { x, y });
        }
        Ok(match self.kind {
            CaseKind::GaussianPulse => {
                self.state(0.01 + Float::exp(-self.sigma * (x * x + y * y)), [1.0, 1.0], 1.0)
            }
            CaseKind::Leblanc => {
                if x < 0.0 {
                    self.state(2.0, [0.0, 0.0], 1e9)
                } else {
                    self.state(0.001, [0.0, 0.0], 1.0)
                }
            }
            CaseKind::ShockDiffraction => {
                if x < 0.5 {
                    let (rho, u, p) = DIFFRACTION_LEFT;
                    self.state(rho, [u, 0.0], p)
                } else {
                    self.state(1.4, [0.0, 0.0], 1.0)
                }
            }
            CaseKind::DoubleMachReflection => {
                if y > Float::sqrt(3.0) * (x - 1.0 / 6.0) {
                    self.dmr_post_shock()
                } else {
                    self.state(1.4, [0.0, 0.0], 1.0)
                }
            }
            CaseKind::DensityWave => {
                let rho = 1.0 + 0.5 * Float::sin(2.0 * core::f64::consts::PI * x);
                self.state(rho, [1.0, 0.0], 1.0)
            }
        })
    }

    pub fn has_exact_solution(&self) -> bool {
        matches!(self.kind, CaseKind::GaussianPulse | CaseKind::Leblanc | CaseKind::DensityWave)
    }

    /// Exact solution at time `t`.
    pub fn exact_solution(&self, x: f64, y: f64, t: f64) -> Result<EulerState> {
        let wrap = |v: f64, lo: f64, len: f64| {
            let r = (v - lo) % len;
            lo + if r < 0.0 { r + len } else { r }
        };
        match self.kind {
            CaseKind::GaussianPulse => self.initial_condition(wrap(x - t, -0.5, 1.0), wrap(y - t, -0.5, 1.0)),
            CaseKind::DensityWave => self.initial_condition(wrap(x - t, 0.0, 1.0), 0.0),
            CaseKind::Leblanc => {
                if !self.contains(x, y) {
                    return Err(Error::OutsideDomain { x, y });
                }
                if t <= 0.0 {
                    return self.initial_condition(x, y);
                }
                let sol = self.leblanc_riemann()?;
                let s = sol.sample(x / t);
                Ok(self.state(s.rho, [s.u, 0.0], s.p))
            }
            _ => Err(Error::NoExactSolution(self.kind.name())),
        }
    }

    /// Exact Riemann solution of the Leblanc shock tube.
    pub fn leblanc_riemann(&self) -> Result<RiemannSolution> {
        RiemannSolution::solve(Primitive1D::new(2.0, 0.0, 1e9), Primitive1D::new(0.001, 0.0, 1.0), self.gamma)
    }

    /// Analytic position of the incident shock along the horizontal line at
    /// height `y` (2D shock cases only).
    pub fn incident_shock_x(&self, y: f64, t: f64) -> Option<f64> {
        match self.kind {
            CaseKind::ShockDiffraction => Some(0.5 + DIFFRACTION_SHOCK_SPEED * t),
            CaseKind::DoubleMachReflection => {
                let s3 = Float::sqrt(3.0);
                Some(1.0 / 6.0 + y / s3 + 20.0 * t / s3)
            }
            _ => None,
        }
    }
}
