//! Compressible Euler state algebra, entropy-conserving two-point flux and
//! interface dissipation.

use core::fmt;
use core::str::FromStr;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::field::SolutionField;

pub const DEFAULT_GAMMA: f64 = 1.4;

/// Conserved variables `(rho, m_x, m_y, E)`; 1D problems carry `m_y = 0`.
pub type Conserved = [f64; 4];

/// Conserved state at a point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EulerState {
    pub rho: f64,
    pub mom: [f64; 2],
    pub energy: f64,
}

impl EulerState {
    pub const fn new(rho: f64, mom: [f64; 2], energy: f64) -> Self {
        Self { rho, mom, energy }
    }

    pub fn from_primitive(rho: f64, vel: [f64; 2], pressure: f64, gamma: f64) -> Self {
        let kinetic = 0.5 * rho * (vel[0] * vel[0] + vel[1] * vel[1]);
        Self {
            rho,
            mom: [rho * vel[0], rho * vel[1]],
            energy: pressure / (gamma - 1.0) + kinetic,
        }
    }

    pub fn from_array(u: Conserved) -> Self {
        Self { rho: u[0], mom: [u[1], u[2]], energy: u[3] }
    }

    pub fn to_array(self) -> Conserved {
        [self.rho, self.mom[0], self.mom[1], self.energy]
    }

    /// Read `dim + 2` conserved components.
    pub fn read(values: &[f64], dim: usize) -> Self {
        if dim == 1 {
            Self { rho: values[0], mom: [values[1], 0.0], energy: values[2] }
        } else {
            Self { rho: values[0], mom: [values[1], values[2]], energy: values[3] }
        }
    }

    /// Write `dim + 2` conserved components.
    pub fn write(self, out: &mut [f64], dim: usize) {
        out[0] = self.rho;
        out[1] = self.mom[0];
        if dim == 1 {
            out[2] = self.energy;
        } else {
            out[2] = self.mom[1];
            out[3] = self.energy;
        }
    }

    pub fn velocity(&self) -> [f64; 2] {
        [self.mom[0] / self.rho, self.mom[1] / self.rho]
    }

    pub fn pressure(&self, gamma: f64) -> f64 {
        let kinetic = 0.5 * (self.mom[0] * self.mom[0] + self.mom[1] * self.mom[1]) / self.rho;
        (gamma - 1.0) * (self.energy - kinetic)
    }

    pub fn sound_speed(&self, gamma: f64) -> f64 {
        Float::sqrt(gamma * self.pressure(gamma) / self.rho)
    }

    /// `|v| + a`.
    pub fn wavespeed(&self, gamma: f64) -> f64 {
        let v = self.velocity();
        Float::sqrt(v[0] * v[0] + v[1] * v[1]) + self.sound_speed(gamma)
    }

    /// Specific entropy `s = ln(P rho^-gamma)`.
    pub fn specific_entropy(&self, gamma: f64) -> f64 {
        Float::ln(self.pressure(gamma)) - gamma * Float::ln(self.rho)
    }

    /// Mathematical entropy `S = -rho s / (gamma - 1)`.
    pub fn entropy(&self, gamma: f64) -> f64 {
        -self.rho * self.specific_entropy(gamma) / (gamma - 1.0)
    }

    pub fn is_admissible(&self, gamma: f64) -> bool {
        let p = self.pressure(gamma);
        self.rho > 0.0 && p > 0.0 && self.rho.is_finite() && p.is_finite()
    }

    pub fn check(&self, gamma: f64) -> Result<()> {
        if self.is_admissible(gamma) {
            Ok(())
        } else {
            Err(Error::InadmissibleState { rho: self.rho, pressure: self.pressure(gamma) })
        }
    }

    /// Analytic flux `f(u) . n`.
    pub fn flux(&self, gamma: f64, normal: [f64; 2]) -> Conserved {
        let v = self.velocity();
        let p = self.pressure(gamma);
        let vn = v[0] * normal[0] + v[1] * normal[1];
        [
            self.rho * vn,
            self.mom[0] * vn + p * normal[0],
            self.mom[1] * vn + p * normal[1],
            (self.energy + p) * vn,
        ]
    }
}

/// Entropy variables `w = dS/du` for `S = -rho s / (gamma - 1)`.
pub fn entropy_variables(u: &EulerState, gamma: f64) -> Conserved {
    let v = u.velocity();
    let p = u.pressure(gamma);
    let s = u.specific_entropy(gamma);
    let beta = u.rho / p;
    [
        (gamma - s) / (gamma - 1.0) - 0.5 * beta * (v[0] * v[0] + v[1] * v[1]),
        beta * v[0],
        beta * v[1],
        -beta,
    ]
}

/// Inverse of [`entropy_variables`]. Fails when `w` does not map to an
/// admissible state.
pub fn from_entropy_variables(w: &Conserved, gamma: f64) -> Result<EulerState> {
    if !(w[3] < 0.0) {
        return Err(Error::InadmissibleState { rho: f64::NAN, pressure: f64::NAN });
    }
    let beta = -w[3];
    let vel = [w[1] / beta, w[2] / beta];
    let vsq = vel[0] * vel[0] + vel[1] * vel[1];
    let s = gamma - (gamma - 1.0) * (w[0] + 0.5 * beta * vsq);
    // p rho^-gamma = e^s with rho = beta p.
    let p = Float::exp((s + gamma * Float::ln(beta)) / (1.0 - gamma));
    let u = EulerState::from_primitive(beta * p, vel, p, gamma);
    u.check(gamma)?;
    Ok(u)
}

/// Entropy flux potential `psi = rho v . n`.
pub fn entropy_potential(u: &EulerState, normal: [f64; 2]) -> f64 {
    u.mom[0] * normal[0] + u.mom[1] * normal[1]
}

/// Logarithmic mean `(a - b) / (ln a - ln b)`.
pub fn log_mean(a: f64, b: f64) -> f64 {
    log_mean_with_logs(a, b, Float::ln(a), Float::ln(b))
}

// Ranocha's series branch: with f2 = ((a - b) / (a + b))^2,
// (a + b) / (2 + 2/3 f2 + 2/5 f2^2 + 2/7 f2^3) is accurate to ~1e-17 for f2 < 1e-4.
#[inline]
fn log_mean_with_logs(a: f64, b: f64, ln_a: f64, ln_b: f64) -> f64 {
    let s = a + b;
    let d = a - b;
    let f2 = (d * d) / (s * s);
    if f2 < 1e-4 {
        s / (2.0 + f2 * (2.0 / 3.0 + f2 * (2.0 / 5.0 + f2 * (2.0 / 7.0))))
    } else {
        d / (ln_a - ln_b)
    }
}

/// Point data reused by every two-point flux evaluation involving the point.
#[derive(Clone, Copy, Debug, Default)]
pub struct FluxPoint {
    pub rho: f64,
    pub vel: [f64; 2],
    pub p: f64,
    ln_rho: f64,
    /// `rho / p`.
    z: f64,
    ln_z: f64,
}

impl FluxPoint {
    #[inline]
    pub fn new(u: &EulerState, gamma: f64) -> Self {
        let vel = u.velocity();
        let p = u.pressure(gamma);
        let z = u.rho / p;
        Self { rho: u.rho, vel, p, ln_rho: Float::ln(u.rho), z, ln_z: Float::ln(z) }
    }
}

/// Entropy-conserving, kinetic-energy-preserving flux of Ranocha along a
/// coordinate axis (`axis` = 0 or 1).
#[inline]
pub fn ranocha_axis(l: &FluxPoint, r: &FluxPoint, axis: usize, inv_gm1: f64) -> Conserved {
    let rho_mean = log_mean_with_logs(l.rho, r.rho, l.ln_rho, r.ln_rho);
    let z_mean = log_mean_with_logs(l.z, r.z, l.ln_z, r.ln_z);
    let vn_avg = 0.5 * (l.vel[axis] + r.vel[axis]);
    let f1 = rho_mean * vn_avg;
    let mut f = [
        f1,
        f1 * 0.5 * (l.vel[0] + r.vel[0]),
        f1 * 0.5 * (l.vel[1] + r.vel[1]),
        0.0,
    ];
    f[1 + axis] += 0.5 * (l.p + r.p);
    let vv = 0.5 * (l.vel[0] * r.vel[0] + l.vel[1] * r.vel[1]);
    f[3] = f1 * (vv + inv_gm1 / z_mean) + 0.5 * (l.p * r.vel[axis] + r.p * l.vel[axis]);
    f
}

#[inline]
fn ranocha_normal(l: &FluxPoint, r: &FluxPoint, n: [f64; 2], inv_gm1: f64) -> Conserved {
    let rho_mean = log_mean_with_logs(l.rho, r.rho, l.ln_rho, r.ln_rho);
    let z_mean = log_mean_with_logs(l.z, r.z, l.ln_z, r.ln_z);
    let vnl = l.vel[0] * n[0] + l.vel[1] * n[1];
    let vnr = r.vel[0] * n[0] + r.vel[1] * n[1];
    let f1 = rho_mean * 0.5 * (vnl + vnr);
    let p_avg = 0.5 * (l.p + r.p);
    let vv = 0.5 * (l.vel[0] * r.vel[0] + l.vel[1] * r.vel[1]);
    [
        f1,
        f1 * 0.5 * (l.vel[0] + r.vel[0]) + p_avg * n[0],
        f1 * 0.5 * (l.vel[1] + r.vel[1]) + p_avg * n[1],
        f1 * (vv + inv_gm1 / z_mean) + 0.5 * (l.p * vnr + r.p * vnl),
    ]
}

/// Volume two-point flux selector.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TwoPointFlux {
    /// Ranocha's entropy-conserving, kinetic-energy-preserving flux.
    #[default]
    EntropyConservingRa,
}

/// Interface dissipation selector.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Dissipation {
    #[default]
    Roe,
    LocalLaxFriedrichs,
    None,
}

impl FromStr for TwoPointFlux {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ec-ra" | "ranocha" => Ok(Self::EntropyConservingRa),
            _ => Err(Error::invalid(alloc::format!("unknown two-point flux `{s}`"))),
        }
    }
}

impl fmt::Display for TwoPointFlux {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ec-ra")
    }
}

impl FromStr for Dissipation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "roe" => Ok(Self::Roe),
            "llf" | "rusanov" => Ok(Self::LocalLaxFriedrichs),
            "none" => Ok(Self::None),
            _ => Err(Error::invalid(alloc::format!("unknown dissipation `{s}`"))),
        }
    }
}

impl fmt::Display for Dissipation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Roe => "roe",
            Self::LocalLaxFriedrichs => "llf",
            Self::None => "none",
        })
    }
}

/// Default bound on `|q_projected / q_trace - 1|` (for density and pressure)
/// beyond which an entropy-projected facet state is replaced by the trace.
pub const DEFAULT_PROJECTION_TOLERANCE: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FluxConfig {
    pub two_point: TwoPointFlux,
    pub dissipation: Dissipation,
    pub gamma: f64,
    /// Entropy-projected facet states are used while their density and
    /// pressure stay within this relative distance of the polynomial trace;
    /// `0` always uses the trace, `inf` always projects (when admissible).
    pub projection_tolerance: f64,
}

impl Default for FluxConfig {
    fn default() -> Self {
        Self {
            two_point: TwoPointFlux::default(),
            dissipation: Dissipation::default(),
            gamma: DEFAULT_GAMMA,
            projection_tolerance: DEFAULT_PROJECTION_TOLERANCE,
        }
    }
}

impl FluxConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 1.0) {
            return Err(Error::invalid("gamma must exceed 1"));
        }
        if !(self.projection_tolerance >= 0.0) {
            return Err(Error::invalid("projection tolerance must be non-negative"));
        }
        Ok(())
    }
}

/// Symmetric, consistent, entropy-conserving two-point flux in direction `normal`.
pub fn two_point_flux(ul: &EulerState, ur: &EulerState, normal: [f64; 2], gamma: f64) -> Result<Conserved> {
    ul.check(gamma)?;
    ur.check(gamma)?;
    Ok(ranocha_normal(&FluxPoint::new(ul, gamma), &FluxPoint::new(ur, gamma), normal, 1.0 / (gamma - 1.0)))
}

/// Numerical interface flux `f* = f_ec(uL, uR) - 1/2 D (uR - uL)`.
pub fn interface_flux(ul: &EulerState, ur: &EulerState, normal: [f64; 2], cfg: &FluxConfig) -> Result<Conserved> {
    let gamma = cfg.gamma;
    ul.check(gamma)?;
    ur.check(gamma)?;
    interface_flux_unchecked(ul, ur, normal, cfg)
}

/// [`interface_flux`] for states already known to be admissible.
#[inline]
pub(crate) fn interface_flux_unchecked(
    ul: &EulerState,
    ur: &EulerState,
    normal: [f64; 2],
    cfg: &FluxConfig,
) -> Result<Conserved> {
    let gamma = cfg.gamma;
    let pl = FluxPoint::new(ul, gamma);
    let pr = FluxPoint::new(ur, gamma);
    let mut f = ranocha_normal(&pl, &pr, normal, 1.0 / (gamma - 1.0));
    let d = match cfg.dissipation {
        Dissipation::None => return Ok(f),
        Dissipation::LocalLaxFriedrichs => {
            let lam = |p: &FluxPoint| {
                Float::abs(p.vel[0] * normal[0] + p.vel[1] * normal[1]) + Float::sqrt(gamma * p.p / p.rho)
            };
            let lambda = Float::max(lam(&pl), lam(&pr));
            let (a, b) = (ul.to_array(), ur.to_array());
            [
                lambda * (b[0] - a[0]),
                lambda * (b[1] - a[1]),
                lambda * (b[2] - a[2]),
                lambda * (b[3] - a[3]),
            ]
        }
        Dissipation::Roe => roe_dissipation(&pl, &pr, ul, ur, normal, gamma)?,
    };
    for k in 0..4 {
        f[k] -= 0.5 * d[k];
    }
    Ok(f)
}

/// Entropy-fix floor on acoustic eigenvalues, relative to the local `|q_n| + a`.
pub const ROE_ENTROPY_FIX: f64 = 0.05;

/// `|A(u_roe)| (uR - uL)` with a Harten entropy fix on the acoustic waves.
fn roe_dissipation(
    pl: &FluxPoint,
    pr: &FluxPoint,
    ul: &EulerState,
    ur: &EulerState,
    n: [f64; 2],
    gamma: f64,
) -> Result<Conserved> {
    let sl = Float::sqrt(pl.rho);
    let sr = Float::sqrt(pr.rho);
    let inv = 1.0 / (sl + sr);
    let u = (sl * pl.vel[0] + sr * pr.vel[0]) * inv;
    let v = (sl * pl.vel[1] + sr * pr.vel[1]) * inv;
    let hl = (ul.energy + pl.p) / pl.rho;
    let hr = (ur.energy + pr.p) / pr.rho;
    let h = (sl * hl + sr * hr) * inv;
    let q2 = u * u + v * v;
    let a2 = (gamma - 1.0) * (h - 0.5 * q2);
    if !(a2 > 0.0) {
        return Err(Error::RoeAverage(a2));
    }
    let a = Float::sqrt(a2);
    let rho = sl * sr;
    let qn = u * n[0] + v * n[1];

    let drho = pr.rho - pl.rho;
    let dp = pr.p - pl.p;
    let du = pr.vel[0] - pl.vel[0];
    let dv = pr.vel[1] - pl.vel[1];
    let dqn = du * n[0] + dv * n[1];

    let delta = ROE_ENTROPY_FIX * (Float::abs(qn) + a);
    let fix = |l: f64| {
        let l = Float::abs(l);
        if l < delta { (l * l + delta * delta) / (2.0 * delta) } else { l }
    };
    let l1 = fix(qn - a);
    let l2 = Float::abs(qn);
    let l3 = fix(qn + a);

    let a1 = l1 * (dp - rho * a * dqn) / (2.0 * a2);
    let a2w = l2 * (drho - dp / a2);
    let a3 = l3 * (dp + rho * a * dqn) / (2.0 * a2);
    let dut = du - dqn * n[0];
    let dvt = dv - dqn * n[1];
    let shear = l2 * rho;

    Ok([
        a1 + a2w + a3,
        a1 * (u - a * n[0]) + a2w * u + a3 * (u + a * n[0]) + shear * dut,
        a1 * (v - a * n[1]) + a2w * v + a3 * (v + a * n[1]) + shear * dvt,
        a1 * (h - qn * a) + a2w * 0.5 * q2 + a3 * (h + qn * a) + shear * (u * dut + v * dvt),
    ])
}

/// Maximum of `|v| + a` over all solution nodes of `field`.
pub fn max_wavespeed(field: &SolutionField, gamma: f64) -> Result<f64> {
    let mut lambda: f64 = 0.0;
    for e in 0..field.num_elements() {
        for i in 0..field.nodes_per_element() {
            let u = field.state(e, i);
            if !u.is_admissible(gamma) {
                return Err(Error::Positivity {
                    element: e,
                    site: crate::error::Site::Node(i),
                    rho: u.rho,
                    pressure: u.pressure(gamma),
                    context: Default::default(),
                });
            }
            lambda = Float::max(lambda, u.wavespeed(gamma));
        }
    }
    Ok(lambda)
}
