//! Positivity-preserving limiter: linear squeeze of each element's nodal
//! solution toward its cell average.
//!
//! Density is squeezed first; the full state is then squeezed with the
//! linear bound implied by concavity of pressure,
//! `P(u_bar + t (u - u_bar)) >= (1 - t) P(u_bar) + t P(u)`, which avoids
//! root finding and stays robust for near-vacuum states.

use alloc::vec::Vec;

use crate::error::{Error, Result, Site};
use crate::euler::{Conserved, EulerState};
use crate::field::SolutionField;
use crate::reference::ReferenceOperators;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimiterConfig {
    pub enabled: bool,
    /// Absolute floor for density and pressure.
    pub eps: f64,
}

impl Default for LimiterConfig {
    fn default() -> Self {
        Self { enabled: true, eps: 1e-13 }
    }
}

impl LimiterConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(Error::invalid("limiter floor must be positive"));
        }
        Ok(())
    }
}

/// Squeeze factors applied to one element; `1.0` means untouched.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimiterOutcome {
    pub theta_rho: f64,
    pub theta_p: f64,
}

impl LimiterOutcome {
    pub fn activated(&self) -> bool {
        self.theta_rho < 1.0 || self.theta_p < 1.0
    }
}

/// Scratch storage reused across elements.
#[derive(Clone, Debug, Default)]
pub struct LimiterWorkspace {
    points: Vec<Conserved>,
}

fn pressure(u: &Conserved, gamma: f64) -> f64 {
    EulerState::from_array(*u).pressure(gamma)
}

/// Cell average of an element's nodal values (quadrature mass).
pub fn cell_average(values: &[f64], ops: &ReferenceOperators) -> Conserved {
    let dim = ops.dim();
    let nvar = dim + 2;
    let mut avg = [0.0; 4];
    for (i, &w) in ops.line().average.iter().enumerate() {
        let u = EulerState::read(&values[i * nvar..], dim).to_array();
        for v in 0..4 {
            avg[v] += w * u[v];
        }
    }
    avg
}

/// Limit one element in place. The enforcement set is the volume quadrature
/// points, the facet quadrature points and the solution nodes.
pub fn limit_element(
    values: &mut [f64],
    element: usize,
    ops: &ReferenceOperators,
    config: &LimiterConfig,
    gamma: f64,
    work: &mut LimiterWorkspace,
) -> Result<LimiterOutcome> {
    let dim = ops.dim();
    let nvar = dim + 2;
    let np = ops.nodes_per_element();
    let eps = config.eps;
    let avg = cell_average(values, ops);
    let p_avg = pressure(&avg, gamma);
    if !(avg[0] > eps && p_avg > eps) {
        return Err(Error::Positivity {
            element,
            site: Site::Average,
            rho: avg[0],
            pressure: p_avg,
            context: Default::default(),
        });
    }

    let (interp, npts) = ops.enforcement();
    let points = &mut work.points;
    points.clear();
    for k in 0..npts {
        let row = &interp[k * np..(k + 1) * np];
        let mut u = [0.0; 4];
        for (i, &w) in row.iter().enumerate() {
            let s = EulerState::read(&values[i * nvar..], dim).to_array();
            for v in 0..4 {
                u[v] += w * s[v];
            }
        }
        points.push(u);
    }
    for i in 0..np {
        points.push(EulerState::read(&values[i * nvar..], dim).to_array());
    }

    let rho_min = points.iter().map(|u| u[0]).fold(f64::INFINITY, f64::min);
    let theta_rho = if rho_min < eps { ((avg[0] - eps) / (avg[0] - rho_min)).clamp(0.0, 1.0) } else { 1.0 };
    if theta_rho < 1.0 {
        for u in points.iter_mut() {
            u[0] = avg[0] + theta_rho * (u[0] - avg[0]);
        }
    }

    let mut theta_p = 1.0f64;
    for u in points.iter() {
        let pk = pressure(u, gamma);
        if pk < eps {
            theta_p = theta_p.min(((p_avg - eps) / (p_avg - pk)).clamp(0.0, 1.0));
        }
    }

    if theta_rho < 1.0 || theta_p < 1.0 {
        for i in 0..np {
            let node = &mut values[i * nvar..(i + 1) * nvar];
            let mut u = EulerState::read(node, dim).to_array();
            u[0] = avg[0] + theta_rho * (u[0] - avg[0]);
            if theta_p < 1.0 {
                for v in 0..4 {
                    u[v] = avg[v] + theta_p * (u[v] - avg[v]);
                }
            }
            EulerState::from_array(u).write(node, dim);
        }
    }
    Ok(LimiterOutcome { theta_rho, theta_p })
}

/// Limit every element; returns the number of elements modified.
pub fn limit_field(
    field: &mut SolutionField,
    ops: &ReferenceOperators,
    config: &LimiterConfig,
    gamma: f64,
    work: &mut LimiterWorkspace,
) -> Result<usize> {
    if !config.enabled {
        return Ok(0);
    }
    let mut active = 0;
    for e in 0..field.num_elements() {
        if limit_element(field.element_mut(e), e, ops, config, gamma, work)?.activated() {
            active += 1;
        }
    }
    Ok(active)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const GAMMA: f64 = 1.4;

    fn element(ops: &ReferenceOperators, f: impl Fn(usize) -> EulerState) -> Vec<f64> {
        let nvar = ops.dim() + 2;
        let mut v = alloc::vec![0.0; ops.nodes_per_element() * nvar];
        for i in 0..ops.nodes_per_element() {
            f(i).write(&mut v[i * nvar..], ops.dim());
        }
        v
    }

    fn min_rho_p(values: &[f64], ops: &ReferenceOperators) -> (f64, f64) {
        let dim = ops.dim();
        let nvar = dim + 2;
        let np = ops.nodes_per_element();
        let (interp, npts) = ops.enforcement();
        let mut pts: Vec<EulerState> = (0..npts)
            .map(|k| {
                let mut u = [0.0; 4];
                for i in 0..np {
                    let s = EulerState::read(&values[i * nvar..], dim).to_array();
                    for v in 0..4 {
                        u[v] += interp[k * np + i] * s[v];
                    }
                }
                EulerState::from_array(u)
            })
            .collect();
        pts.extend((0..np).map(|i| EulerState::read(&values[i * nvar..], dim)));
        pts.iter().fold((f64::INFINITY, f64::INFINITY), |(r, p), u| (r.min(u.rho), p.min(u.pressure(GAMMA))))
    }

    #[test]
    fn admissible_element_is_untouched() {
        let ops = ReferenceOperators::new(3, 2).unwrap();
        let mut v = element(&ops, |i| EulerState::from_primitive(1.0 + 0.1 * i as f64, [0.3, -0.2], 2.0, GAMMA));
        let before = v.clone();
        let out = limit_element(&mut v, 0, &ops, &LimiterConfig::default(), GAMMA, &mut Default::default()).unwrap();
        assert!(!out.activated());
        assert_eq!(v, before);
    }

    #[test]
    fn negative_density_node_is_squeezed() {
        // Nodal values on GLL nodes; the end node is also an enforcement point.
        let ops = ReferenceOperators::new(2, 1).unwrap();
        let w = ops.line().average.clone();
        // Choose middle density so the cell average is exactly 1.
        let rho_mid = (1.0 - w[0] * 1.0 - w[2] * -0.1) / w[1];
        let rhos = [1.0, rho_mid, -0.1];
        let mut v = element(&ops, |i| EulerState::from_primitive(rhos[i], [0.0, 0.0], 1.0, GAMMA));
        // Keep the energy field as is; only density is bad.
        let avg0 = cell_average(&v, &ops);
        assert!((avg0[0] - 1.0).abs() < 1e-14);
        let cfg = LimiterConfig::default();
        let out = limit_element(&mut v, 0, &ops, &cfg, GAMMA, &mut Default::default()).unwrap();
        // With the GLL node at -0.1 being the minimum over all enforcement points:
        let expected = (1.0 - cfg.eps) / (1.0 + 0.1);
        assert!((out.theta_rho - expected).abs() < 1e-14, "{} vs {}", out.theta_rho, expected);
        let avg1 = cell_average(&v, &ops);
        for k in 0..4 {
            assert!((avg1[k] - avg0[k]).abs() < 1e-14);
        }
        let (r, p) = min_rho_p(&v, &ops);
        assert!(r >= cfg.eps * (1.0 - 1e-3) && p >= cfg.eps * (1.0 - 1e-3), "{r} {p}");
    }

    #[test]
    fn inadmissible_average_is_fatal() {
        let ops = ReferenceOperators::new(2, 1).unwrap();
        let mut v = element(&ops, |_| EulerState::new(-1.0, [0.0, 0.0], 1.0));
        let err = limit_element(&mut v, 7, &ops, &LimiterConfig::default(), GAMMA, &mut Default::default()).unwrap_err();
        assert!(matches!(err, Error::Positivity { element: 7, site: Site::Average, .. }));
    }

    fn random_element(dim: usize, seeds: &[f64]) -> (ReferenceOperators, Vec<f64>) {
        let ops = ReferenceOperators::new(3, dim).unwrap();
        let v = element(&ops, |i| {
            let s = &seeds[(4 * i) % seeds.len()..];
            let g = |k: usize| s.get(k).copied().unwrap_or(0.5);
            // Perturbed states around an admissible mean; some nodes go negative.
            EulerState::from_primitive(1.0 + 1.5 * (g(0) - 0.5), [2.0 * g(1) - 1.0, g(2) - 0.5], 1.0 + 2.5 * (g(3) - 0.5), GAMMA)
        });
        (ops, v)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn limiter_preserves_average_and_enforces_bounds(
            dim in 1usize..=2,
            seeds in prop::collection::vec(0.0f64..1.0, 64),
        ) {
            let (ops, mut v) = random_element(dim, &seeds);
            let avg0 = cell_average(&v, &ops);
            let cfg = LimiterConfig::default();
            let mut work = LimiterWorkspace::default();
            match limit_element(&mut v, 0, &ops, &cfg, GAMMA, &mut work) {
                Err(e) => prop_assert!(e.is_positivity()),
                Ok(_) => {
                    let avg1 = cell_average(&v, &ops);
                    for k in 0..4 {
                        prop_assert!((avg1[k] - avg0[k]).abs() <= 1e-14 * avg0[k].abs().max(1.0));
                    }
                    let (r, p) = min_rho_p(&v, &ops);
                    prop_assert!(r > 0.0 && p > 0.0, "{} {}", r, p);
                    let once = v.clone();
                    limit_element(&mut v, 0, &ops, &cfg, GAMMA, &mut work).unwrap();
                    for (a, b) in v.iter().zip(&once) {
                        prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
                    }
                }
            }
        }
    }
}
