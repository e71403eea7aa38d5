//! Modal shock sensor and the map from sensor value to the per-element flux
//! reconstruction parameter `c`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::field::SolutionField;
use crate::reference::{default_c_plus, ReferenceOperators};

/// How `c` is chosen per element.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Scheme {
    /// `c = 0` everywhere.
    Dg,
    /// `c = c_+` everywhere.
    Fr,
    /// `c = eps(sensor) * c_+` per element.
    #[default]
    Afr,
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dg" => Ok(Self::Dg),
            "fr" => Ok(Self::Fr),
            "afr" => Ok(Self::Afr),
            other => Err(Error::InvalidArgument(alloc::format!("unknown scheme '{other}' (dg|fr|afr)"))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Dg => "dg",
            Self::Fr => "fr",
            Self::Afr => "afr",
        })
    }
}

/// When the sensor is re-evaluated during a time step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SensorUpdate {
    /// Once per step, before the first stage.
    #[default]
    Step,
    /// Before every Runge–Kutta stage.
    Stage,
}

impl FromStr for SensorUpdate {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "step" => Ok(Self::Step),
            "stage" => Ok(Self::Stage),
            other => Err(Error::InvalidArgument(alloc::format!("unknown sensor update '{other}' (step|stage)"))),
        }
    }
}

impl fmt::Display for SensorUpdate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Step => "step",
            Self::Stage => "stage",
        })
    }
}

/// Scalar whose modal content drives the sensor.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SensorVariable {
    #[default]
    Density,
    Pressure,
    /// The product `rho * p`, which sees both contacts and pressure waves.
    DensityPressure,
}

impl SensorVariable {
    fn eval(self, u: &crate::euler::EulerState, gamma: f64) -> f64 {
        match self {
            Self::Density => u.rho,
            Self::Pressure => u.pressure(gamma),
            Self::DensityPressure => u.rho * u.pressure(gamma),
        }
    }
}

impl FromStr for SensorVariable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "density" => Ok(Self::Density),
            "pressure" => Ok(Self::Pressure),
            "density-pressure" => Ok(Self::DensityPressure),
            other => Err(Error::InvalidArgument(alloc::format!(
                "unknown sensor variable '{other}' (density|pressure|density-pressure)"
            ))),
        }
    }
}

impl fmt::Display for SensorVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Density => "density",
            Self::Pressure => "pressure",
            Self::DensityPressure => "density-pressure",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SensorConfig {
    /// Half-width of the transition band in decades.
    pub kappa: f64,
    /// Largest admissible `c` for the active degree.
    pub c_plus: f64,
    /// Threshold centre `-4 log10 p`.
    pub s0: f64,
    pub update: SensorUpdate,
    pub variable: SensorVariable,
}

impl SensorConfig {
    /// Defaults for degree `p`: `kappa = 1`, tabulated `c_+`.
    pub fn for_degree(p: usize) -> Result<Self> {
        let c_plus = default_c_plus(p).ok_or_else(|| Error::invalid("no tabulated c_+ for this degree"))?;
        Ok(Self { kappa: 1.0, c_plus, s0: -4.0 * Float::log10(p as f64), update: SensorUpdate::Step, variable: SensorVariable::Density })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0) || !(self.c_plus > 0.0) || !self.s0.is_finite() {
            return Err(Error::invalid("sensor needs kappa > 0, c_+ > 0 and finite s0"));
        }
        Ok(())
    }
}

/// One `c` value per element.
#[derive(Clone, Debug, PartialEq)]
pub struct CParameterField {
    values: Vec<f64>,
}

impl CParameterField {
    pub fn uniform(num_elements: usize, c: f64) -> Self {
        Self { values: vec![c; num_elements] }
    }
    pub fn from_values(values: Vec<f64>) -> Self {
        Self { values }
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// Fraction of modal energy carried by the highest modes (those whose largest
/// per-direction degree equals `p`). Returns 0 for an identically zero element.
pub fn modal_sensor(values: &[f64], ops: &ReferenceOperators) -> f64 {
    let line = ops.line();
    let n = line.n;
    let inv = &line.modal_inv;
    let (mut top, mut total) = (0.0, 0.0);
    if ops.dim() == 1 {
        for k in 0..n {
            let a: f64 = (0..n).map(|j| inv[k * n + j] * values[j]).sum();
            total += a * a;
            if k == n - 1 {
                top += a * a;
            }
        }
    } else {
        // Transform along xi, then eta.
        let mut half = vec![0.0; n * n];
        for b in 0..n {
            for k in 0..n {
                half[k + n * b] = (0..n).map(|a| inv[k * n + a] * values[a + n * b]).sum();
            }
        }
        for l in 0..n {
            for k in 0..n {
                let c: f64 = (0..n).map(|b| inv[l * n + b] * half[k + n * b]).sum();
                total += c * c;
                if k == n - 1 || l == n - 1 {
                    top += c * c;
                }
            }
        }
    }
    if total > 0.0 { top / total } else { 0.0 }
}

/// Smooth ramp from 0 to 1 across `log10(S_e) in [s0 - kappa, s0 + kappa]`.
pub fn smooth_scale(sensor: f64, config: &SensorConfig) -> f64 {
    if !(sensor > 0.0) {
        return 0.0;
    }
    let s = Float::log10(sensor);
    if s < config.s0 - config.kappa {
        0.0
    } else if s > config.s0 + config.kappa {
        1.0
    } else {
        let arg = core::f64::consts::PI * (s - config.s0) / (2.0 * config.kappa);
        (0.5 * (1.0 + Float::sin(arg))).clamp(0.0, 1.0)
    }
}

/// Recompute the `c` field from the current solution, sensing on `config.variable`.
pub fn update_c_field(
    field: &SolutionField,
    ops: &ReferenceOperators,
    scheme: Scheme,
    config: &SensorConfig,
    gamma: f64,
    out: &mut CParameterField,
) -> Result<()> {
    let ne = field.num_elements();
    if out.values.len() != ne {
        out.values.resize(ne, 0.0);
    }
    match scheme {
        Scheme::Dg => out.values.iter_mut().for_each(|c| *c = 0.0),
        Scheme::Fr => out.values.iter_mut().for_each(|c| *c = config.c_plus),
        Scheme::Afr => {
            let np = field.nodes_per_element();
            let mut rho = vec![0.0; np];
            for e in 0..ne {
                for i in 0..np {
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
                    rho[i] = config.variable.eval(&u, gamma);
                }
                out.values[e] = smooth_scale(modal_sensor(&rho, ops), config) * config.c_plus;
            }
        }
    }
    Ok(())
}
