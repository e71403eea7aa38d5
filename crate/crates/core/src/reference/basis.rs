use alloc::vec::Vec;
use nalgebra::DMatrix;

use super::quadrature::{gauss_legendre, gauss_lobatto, orthonormal_legendre};
use crate::error::{Error, Result};

/// Nodal Lagrange basis of degree `p` on Gauss–Lobatto–Legendre nodes,
/// paired with an `n_q`-point Gauss–Legendre volume quadrature.
#[derive(Clone, Debug)]
pub struct Basis1D {
    degree: usize,
    nodes: Vec<f64>,
    quad_nodes: Vec<f64>,
    quad_weights: Vec<f64>,
    /// `interp_quad[(q, j)] = l_j(xi_q)`.
    interp_quad: DMatrix<f64>,
    /// `deriv_quad[(q, j)] = l_j'(xi_q)`.
    deriv_quad: DMatrix<f64>,
    /// Row 0 evaluates at `-1`, row 1 at `+1`.
    interp_face: DMatrix<f64>,
    /// `deriv[(i, j)] = l_j'(x_i)` at the solution nodes.
    deriv: DMatrix<f64>,
    mass: DMatrix<f64>,
    /// Nodal values of the orthonormal Legendre modes: `modal[(i, k)] = phi_k(x_i)`.
    modal: DMatrix<f64>,
    modal_inv: DMatrix<f64>,
}

impl Basis1D {
    /// Build the basis. Requires `p >= 1` and `n_q >= p + 1`.
    pub fn new(p: usize, n_q: usize) -> Result<Self> {
        if p < 1 {
            return Err(Error::invalid("polynomial degree must be at least 1"));
        }
        if n_q < p + 1 {
            return Err(Error::invalid("volume quadrature needs at least p + 1 points"));
        }
        let n = p + 1;
        let (nodes, _) = gauss_lobatto(n);
        let (quad_nodes, quad_weights) = gauss_legendre(n_q);
        let bary = barycentric_weights(&nodes);

        let interp_quad = DMatrix::from_fn(n_q, n, |q, j| lagrange(&nodes, &bary, j, quad_nodes[q]));
        let deriv_quad = DMatrix::from_fn(n_q, n, |q, j| lagrange_deriv(&nodes, &bary, j, quad_nodes[q]));
        let interp_face = DMatrix::from_fn(2, n, |f, j| if (f == 0 && j == 0) || (f == 1 && j == p) { 1.0 } else { 0.0 });
        let deriv = DMatrix::from_fn(n, n, |i, j| lagrange_deriv(&nodes, &bary, j, nodes[i]));

        let w = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&quad_weights));
        let mass = interp_quad.transpose() * &w * &interp_quad;

        let modal = DMatrix::from_fn(n, n, |i, k| orthonormal_legendre(k, nodes[i]));
        let modal_inv = modal.clone().try_inverse().ok_or(Error::Singular("modal transform"))?;

        Ok(Self {
            degree: p,
            nodes,
            quad_nodes,
            quad_weights,
            interp_quad,
            deriv_quad,
            interp_face,
            deriv,
            mass,
            modal,
            modal_inv,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn num_nodes(&self) -> usize {
        self.degree + 1
    }
    pub fn num_quad(&self) -> usize {
        self.quad_nodes.len()
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn quad_nodes(&self) -> &[f64] {
        &self.quad_nodes
    }
    pub fn quad_weights(&self) -> &[f64] {
        &self.quad_weights
    }
    pub fn interp_quad(&self) -> &DMatrix<f64> {
        &self.interp_quad
    }
    pub fn deriv_quad(&self) -> &DMatrix<f64> {
        &self.deriv_quad
    }
    pub fn interp_face(&self) -> &DMatrix<f64> {
        &self.interp_face
    }
    pub fn deriv(&self) -> &DMatrix<f64> {
        &self.deriv
    }
    pub fn mass(&self) -> &DMatrix<f64> {
        &self.mass
    }
    pub fn modal(&self) -> &DMatrix<f64> {
        &self.modal
    }
    pub fn modal_inv(&self) -> &DMatrix<f64> {
        &self.modal_inv
    }

    /// Values of all basis functions at `x`.
    pub fn eval(&self, x: f64) -> Vec<f64> {
        let bary = barycentric_weights(&self.nodes);
        (0..self.num_nodes()).map(|j| lagrange(&self.nodes, &bary, j, x)).collect()
    }

    /// Nodal values of the `k`-th derivative of every basis function; row `i`
    /// holds the values at node `i`.
    pub fn deriv_power(&self, k: usize) -> DMatrix<f64> {
        let n = self.num_nodes();
        let mut out = DMatrix::identity(n, n);
        for _ in 0..k {
            out = &self.deriv * out;
        }
        out
    }
}

pub(crate) fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    (0..nodes.len())
        .map(|j| {
            let prod: f64 = nodes
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .map(|(_, &xk)| nodes[j] - xk)
                .product();
            1.0 / prod
        })
        .collect()
}

/// Lagrange basis function `l_j(x)` on `nodes`.
pub(crate) fn lagrange(nodes: &[f64], bary: &[f64], j: usize, x: f64) -> f64 {
    if let Some(i) = nodes.iter().position(|&xi| xi == x) {
        return if i == j { 1.0 } else { 0.0 };
    }
    let num: f64 = bary[j] / (x - nodes[j]);
    let den: f64 = nodes.iter().zip(bary).map(|(&xk, &bk)| bk / (x - xk)).sum();
    num / den
}

/// Derivative `l_j'(x)`.
pub(crate) fn lagrange_deriv(nodes: &[f64], bary: &[f64], j: usize, x: f64) -> f64 {
    if let Some(i) = nodes.iter().position(|&xi| xi == x) {
        // Standard differentiation-matrix entries at a node.
        if i != j {
            return bary[j] / bary[i] / (nodes[i] - nodes[j]);
        }
        return nodes
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != i)
            .map(|(k, &xk)| -(bary[k] / bary[i]) / (nodes[i] - xk))
            .sum();
    }
    // l_j(x) = prod_{k!=j} (x - x_k) * b_j, differentiate the product.
    let lj = lagrange(nodes, bary, j, x);
    let sum: f64 = nodes
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != j)
        .map(|(_, &xk)| 1.0 / (x - xk))
        .sum();
    lj * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(Basis1D::new(0, 2).is_err());
        assert!(Basis1D::new(3, 3).is_err());
    }

    #[test]
    fn linear_basis_nodes_are_endpoints() {
        let b = Basis1D::new(1, 2).unwrap();
        assert_eq!(b.nodes(), &[-1.0, 1.0]);
        let s: f64 = b.quad_weights().iter().sum();
        assert!((s - 2.0).abs() < 1e-15);
    }

    #[test]
    fn modal_transform_is_orthonormal() {
        // Oracle: M assembled by quadrature, checked against the identity.
        for p in 1..=6 {
            let b = Basis1D::new(p, p + 1).unwrap();
            let g = b.modal().transpose() * b.mass() * b.modal();
            let err = (g - DMatrix::<f64>::identity(p + 1, p + 1)).amax();
            assert!(err < 1e-12, "p={p}: {err}");
        }
    }

    #[test]
    fn derivative_matrix_is_exact_on_polynomials() {
        let b = Basis1D::new(4, 5).unwrap();
        let u: Vec<f64> = b.nodes().iter().map(|x| x.powi(4) - 2.0 * x).collect();
        let du = b.deriv() * nalgebra::DVector::from_column_slice(&u);
        for (i, x) in b.nodes().iter().enumerate() {
            assert!((du[i] - (4.0 * x.powi(3) - 2.0)).abs() < 1e-12);
        }
        let uq = b.deriv_quad() * nalgebra::DVector::from_column_slice(&u);
        for (q, x) in b.quad_nodes().iter().enumerate() {
            assert!((uq[q] - (4.0 * x.powi(3) - 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn vandermonde_at_nodes_is_well_conditioned() {
        for p in 1..=6 {
            let b = Basis1D::new(p, p + 1).unwrap();
            let svd = b.modal().clone().svd(false, false);
            let cond = svd.singular_values.max() / svd.singular_values.min();
            assert!(cond.is_finite() && cond < 1e3, "p={p}: {cond}");
        }
    }
}
