//! Error norms against exact solutions and point sampling of a field.

use alloc::vec::Vec;
use num_traits::Float;

use crate::error::Result;
use crate::euler::EulerState;
use crate::field::SolutionField;
use crate::mesh::CartesianMesh;
use crate::reference::quadrature::gauss_legendre;
use crate::reference::ReferenceOperators;

/// Density error norms: `L1 = int |e|`, `L2 = sqrt(int e^2)`, `Linf = max |e|`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ErrorReport {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

fn eval_element(field: &SolutionField, e: usize, phi_x: &[f64], phi_y: &[f64]) -> EulerState {
    let n = phi_x.len();
    let mut u = [0.0; 4];
    for i in 0..field.nodes_per_element() {
        let w = if field.dim() == 1 { phi_x[i] } else { phi_x[i % n] * phi_y[i / n] };
        if w != 0.0 {
            let s = field.state(e, i).to_array();
            for v in 0..4 {
                u[v] += w * s[v];
            }
        }
    }
    EulerState::from_array(u)
}

/// State of the polynomial solution at physical point `(x, y)`, if inside the mesh.
pub fn sample_state(field: &SolutionField, mesh: &CartesianMesh, ops: &ReferenceOperators, x: f64, y: f64) -> Option<EulerState> {
    let (e, xi) = mesh.locate([x, y])?;
    let basis = ops.basis();
    let px = basis.eval(xi[0]);
    let py = if mesh.dim() == 2 { basis.eval(xi[1]) } else { Vec::new() };
    Some(eval_element(field, e, &px, &py))
}

/// Density errors against `exact`, integrated with a Gauss rule of `quad`
/// points per direction (which also serve, together with the element
/// corners, as the sampling set for the maximum norm).
pub fn error_norms<F>(
    field: &SolutionField,
    mesh: &CartesianMesh,
    ops: &ReferenceOperators,
    quad: usize,
    exact: F,
) -> Result<ErrorReport>
where
    F: Fn(f64, f64) -> Result<EulerState>,
{
    let (xq, wq) = gauss_legendre(quad);
    let basis = ops.basis();
    let phi: Vec<Vec<f64>> = xq.iter().map(|&x| basis.eval(x)).collect();
    let ends: Vec<Vec<f64>> = [-1.0, 1.0].iter().map(|&x| basis.eval(x)).collect();
    let jac = mesh.jacobian();
    let dim = mesh.dim();
    let mut report = ErrorReport::default();
    let mut sq = 0.0;
    let rows = if dim == 1 { 1 } else { quad };
    for e in 0..mesh.num_elements() {
        for b in 0..rows {
            for a in 0..quad {
                let xi = [xq[a], if dim == 1 { 0.0 } else { xq[b] }];
                let w = if dim == 1 { wq[a] } else { wq[a] * wq[b] };
                let u = eval_element(field, e, &phi[a], if dim == 1 { &[] } else { &phi[b] });
                let x = mesh.physical(e, xi);
                let err = Float::abs(u.rho - exact(x[0], x[1])?.rho);
                report.l1 += jac * w * err;
                sq += jac * w * err * err;
                report.linf = report.linf.max(err);
            }
        }
        let corners: &[(usize, usize)] = if dim == 1 { &[(0, 0), (1, 0)] } else { &[(0, 0), (1, 0), (0, 1), (1, 1)] };
        for &(i, j) in corners {
            let xi = [2.0 * i as f64 - 1.0, 2.0 * j as f64 - 1.0];
            let u = eval_element(field, e, &ends[i], if dim == 1 { &[] } else { &ends[j] });
            let x = mesh.physical(e, xi);
            report.linf = report.linf.max(Float::abs(u.rho - exact(x[0], x[1])?.rho));
        }
    }
    report.l2 = Float::sqrt(sq);
    Ok(report)
}
