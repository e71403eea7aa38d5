use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use num_traits::Float;

use super::basis::Basis1D;
use crate::error::{Error, Result};

/// Largest stable FR parameter `c_+` for degree `p`.
///
/// Values are expressed in the unit-interval convention used by
/// [`build_fr_filter`] (derivatives taken with respect to `x = (xi + 1) / 2`).
/// The `p = 3` value is the reference configuration; the others are the
/// classical energy-stable limits converted to the same convention, and
/// `p = 1` is extrapolated from the attenuation trend of the others.
pub fn default_c_plus(p: usize) -> Option<f64> {
    match p {
        1 => Some(0.5),
        2 => Some(5.8125e-3),
        3 => Some(2.87e-5),
        4 => Some(9.355e-8),
        5 => Some(2.0703e-10),
        _ => None,
    }
}

/// 1D building block of the FR filter: `K1[i][j] = int_{-1}^{1} d^p_x l_i d^p_x l_j dxi`,
/// with `x = (xi + 1) / 2` so that `d_x = 2 d_xi`.
fn unit_filter_1d(basis: &Basis1D) -> DMatrix<f64> {
    let p = basis.degree();
    let dp = basis.interp_quad() * basis.deriv_power(p);
    let w = DMatrix::from_diagonal(&DVector::from_column_slice(basis.quad_weights()));
    let scale = Float::powi(4.0f64, p as i32);
    let k = dp.transpose() * w * dp * scale;
    (&k + k.transpose()) * 0.5
}

/// FR filter matrix `K(c)` for the tensor-product element of dimension `dim`.
///
/// In 1D `K = c K1`. In 2D the surviving Sobolev indices are the pure `p`-th
/// derivative in each direction and their product:
/// `K = c (K1 x M1) + c (M1 x K1) + c^2 (K1 x K1)`, which factors as
/// `M + K = (M1 + c K1) x (M1 + c K1)`.
pub fn build_fr_filter(basis: &Basis1D, c: f64, dim: usize) -> Result<DMatrix<f64>> {
    if !(c >= 0.0) {
        return Err(Error::invalid("FR parameter c must be non-negative"));
    }
    let k1 = unit_filter_1d(basis);
    match dim {
        1 => Ok(k1 * c),
        2 => {
            let m1 = basis.mass();
            Ok(m1.kronecker(&k1) * c + k1.kronecker(m1) * c + k1.kronecker(&k1) * (c * c))
        }
        _ => Err(Error::invalid("dimension must be 1 or 2")),
    }
}

/// Dense stacked operators for one reference direction.
#[derive(Clone, Debug)]
pub struct StackedOperators {
    /// Volume stiffness `Q = W Vq D Pq` on the quadrature nodes.
    pub stiffness: DMatrix<f64>,
    /// Volume-to-facet interpolation `E`.
    pub extrapolation: DMatrix<f64>,
    /// Diagonal facet weight times reference normal component.
    pub boundary: DVector<f64>,
}

impl StackedOperators {
    /// `Q~ = 1/2 [[Q - Q^T, E^T B], [-B E, B]]`.
    pub fn hybridized(&self) -> Result<DMatrix<f64>> {
        let nq = self.stiffness.nrows();
        let nf = self.extrapolation.nrows();
        if self.stiffness.ncols() != nq || self.extrapolation.ncols() != nq || self.boundary.len() != nf {
            return Err(Error::invalid("dimension mismatch between Q, E and B"));
        }
        let b = DMatrix::from_diagonal(&self.boundary);
        let eb = self.extrapolation.transpose() * &b;
        let mut h = DMatrix::zeros(nq + nf, nq + nf);
        h.view_mut((0, 0), (nq, nq)).copy_from(&(&self.stiffness - self.stiffness.transpose()));
        h.view_mut((0, nq), (nq, nf)).copy_from(&eb);
        h.view_mut((nq, 0), (nf, nq)).copy_from(&(-eb.transpose()));
        h.view_mut((nq, nq), (nf, nf)).copy_from(&b);
        Ok(h * 0.5)
    }
}

/// Flat 1D operators used on every tensor-product line by the residual.
#[derive(Clone, Debug)]
pub struct LineOperators {
    pub n: usize,
    /// GLL-nodal to GL-quadrature interpolation, `vq[q * n + j]`.
    pub vq: Vec<f64>,
    /// `Q - Q^T` on quadrature nodes, row-major.
    pub skew: Vec<f64>,
    /// Quadrature-to-face extrapolation, `[left, right]`.
    pub extrap: [Vec<f64>; 2],
    pub weights: Vec<f64>,
    /// Inverse 1D mass matrix (nodal), row-major.
    pub mass_inv: Vec<f64>,
    /// `K1 = k k^T`.
    pub filter_vec: Vec<f64>,
    /// `M^{-1} k`.
    pub filter_lift: Vec<f64>,
    /// `k^T M^{-1} k`.
    pub filter_norm: f64,
    /// Nodal to orthonormal modal coefficients, row-major `[mode][node]`.
    pub modal_inv: Vec<f64>,
    /// Cell-average weights of nodal values (sum to one).
    pub average: Vec<f64>,
}

/// All element-local reference operators for one degree and dimension.
#[derive(Clone, Debug)]
pub struct ReferenceOperators {
    basis: Basis1D,
    dim: usize,
    mass: DMatrix<f64>,
    unit_filter: DMatrix<f64>,
    line: LineOperators,
    /// Interpolation to enforcement points (volume quadrature, then facet
    /// quadrature), row-major over nodal values.
    enforcement: Vec<f64>,
    num_enforcement: usize,
}

impl ReferenceOperators {
    /// Operators for degree `p` with `p + 1` Gauss–Legendre points per direction.
    pub fn new(p: usize, dim: usize) -> Result<Self> {
        Self::from_basis(Basis1D::new(p, p + 1)?, dim)
    }

    pub fn from_basis(basis: Basis1D, dim: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::invalid("dimension must be 1 or 2"));
        }
        let n = basis.num_nodes();
        if basis.num_quad() != n {
            return Err(Error::invalid("the tensor-product residual requires n_q = p + 1"));
        }
        let p = basis.degree();
        let m1 = basis.mass().clone();
        let m1_inv = m1.clone().cholesky().ok_or(Error::Singular("mass matrix"))?.inverse();
        let unit_filter = unit_filter_1d(&basis);

        let st = stacked_1d(&basis, &m1_inv);
        let skew = &st.stiffness - st.stiffness.transpose();

        // K1 is rank one: the p-th derivative of a degree-p polynomial is constant.
        let dp = basis.deriv_power(p);
        let scale = Float::sqrt(2.0 * Float::powi(4.0f64, p as i32));
        let filter_vec: Vec<f64> = (0..n).map(|j| dp[(0, j)] * scale).collect();
        let kv = DVector::from_column_slice(&filter_vec);
        let lift = &m1_inv * &kv;
        let filter_norm = kv.dot(&lift);

        let avg1: Vec<f64> = (0..n)
            .map(|j| (0..n).map(|q| basis.quad_weights()[q] * basis.interp_quad()[(q, j)]).sum::<f64>() * 0.5)
            .collect();
        let average = if dim == 1 {
            avg1.clone()
        } else {
            (0..n * n).map(|i| avg1[i % n] * avg1[i / n]).collect()
        };

        let line = LineOperators {
            n,
            vq: row_major(basis.interp_quad()),
            skew: row_major(&skew),
            extrap: [
                st.extrapolation.row(0).iter().copied().collect(),
                st.extrapolation.row(1).iter().copied().collect(),
            ],
            weights: basis.quad_weights().to_vec(),
            mass_inv: row_major(&m1_inv),
            filter_vec,
            filter_lift: lift.iter().copied().collect(),
            filter_norm,
            modal_inv: row_major(basis.modal_inv()),
            average,
        };

        let mass = if dim == 1 { m1.clone() } else { m1.kronecker(&m1) };
        let vol = volume_interp(&basis, dim);
        let fac = facet_interp(&basis, dim);
        let num_enforcement = vol.nrows() + fac.nrows();
        let mut enforcement = row_major(&vol);
        enforcement.extend(row_major(&fac));

        Ok(Self { basis, dim, mass, unit_filter, line, enforcement, num_enforcement })
    }

    pub fn basis(&self) -> &Basis1D {
        &self.basis
    }
    pub fn degree(&self) -> usize {
        self.basis.degree()
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    /// Solution nodes per element, `(p + 1)^d`.
    pub fn nodes_per_element(&self) -> usize {
        self.line.n.pow(self.dim as u32)
    }
    /// Facet quadrature nodes per element.
    pub fn facet_nodes(&self) -> usize {
        if self.dim == 1 { 2 } else { 4 * self.line.n }
    }
    pub fn mass(&self) -> &DMatrix<f64> {
        &self.mass
    }
    pub fn line(&self) -> &LineOperators {
        &self.line
    }
    pub fn unit_filter_1d(&self) -> &DMatrix<f64> {
        &self.unit_filter
    }
    pub fn enforcement(&self) -> (&[f64], usize) {
        (&self.enforcement, self.num_enforcement)
    }

    /// Coefficients of the constant function in the nodal basis.
    pub fn constant_mode(&self) -> DVector<f64> {
        DVector::from_element(self.nodes_per_element(), 1.0)
    }

    pub fn fr_filter(&self, c: f64) -> Result<DMatrix<f64>> {
        build_fr_filter(&self.basis, c, self.dim)
    }

    /// Stacked dense operators, one entry per reference direction.
    pub fn stacked(&self) -> Vec<StackedOperators> {
        let m1_inv = DMatrix::from_row_slice(self.line.n, self.line.n, &self.line.mass_inv);
        let st = stacked_1d(&self.basis, &m1_inv);
        if self.dim == 1 {
            return vec![st];
        }
        let n = self.line.n;
        let w = DMatrix::from_diagonal(&DVector::from_column_slice(self.basis.quad_weights()));
        let e1 = &st.extrapolation;
        let ext = DMatrix::from_fn(4 * n, n * n, |row, col| {
            let (face, k) = (row / n, row % n);
            let (a, b) = (col % n, col / n);
            match face {
                0 | 1 if b == k => e1[(face, a)],
                2 | 3 if a == k => e1[(face - 2, b)],
                _ => 0.0,
            }
        });
        (0..2)
            .map(|dir| {
                let stiffness = if dir == 0 { w.kronecker(&st.stiffness) } else { st.stiffness.kronecker(&w) };
                let boundary = DVector::from_fn(4 * n, |row, _| {
                    let (face, k) = (row / n, row % n);
                    let wk = self.basis.quad_weights()[k];
                    match (dir, face) {
                        (0, 0) | (1, 2) => -wk,
                        (0, 1) | (1, 3) => wk,
                        _ => 0.0,
                    }
                });
                StackedOperators { stiffness, extrapolation: ext.clone(), boundary }
            })
            .collect()
    }

    /// Hybridized skew-symmetric operators `Q~ - Q~^T`, one per reference direction.
    pub fn hybridized_skew(&self) -> Result<Vec<DMatrix<f64>>> {
        self.stacked()
            .iter()
            .map(|s| {
                let h = s.hybridized()?;
                Ok(&h - h.transpose())
            })
            .collect()
    }

    /// Evaluation of the basis at the stacked (volume, facet) nodes.
    pub fn stacked_interp(&self) -> DMatrix<f64> {
        let vol = volume_interp(&self.basis, self.dim);
        let fac = facet_interp(&self.basis, self.dim);
        let mut out = DMatrix::zeros(vol.nrows() + fac.nrows(), vol.ncols());
        out.view_mut((0, 0), vol.shape()).copy_from(&vol);
        out.view_mut((vol.nrows(), 0), fac.shape()).copy_from(&fac);
        out
    }

    /// Facet quadrature weights in stacked facet order.
    pub fn facet_weights(&self) -> Vec<f64> {
        if self.dim == 1 {
            vec![1.0, 1.0]
        } else {
            (0..4).flat_map(|_| self.basis.quad_weights().iter().copied()).collect()
        }
    }

    /// Modified lifting operator `L(c) = (M + K(c))^{-1} sum_f sum_k chi(xi_fk)^T W_fk`,
    /// one column per facet quadrature node.
    pub fn lifting(&self, c: f64) -> Result<DMatrix<f64>> {
        let mk = &self.mass + self.fr_filter(c)?;
        let chol = mk.cholesky().ok_or(Error::Singular("modified mass matrix"))?;
        let fac = facet_interp(&self.basis, self.dim);
        let w = DMatrix::from_diagonal(&DVector::from_vec(self.facet_weights()));
        Ok(chol.solve(&(fac.transpose() * w)))
    }
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        out.extend(m.row(i).iter());
    }
    out
}

fn stacked_1d(basis: &Basis1D, m1_inv: &DMatrix<f64>) -> StackedOperators {
    let w = DMatrix::from_diagonal(&DVector::from_column_slice(basis.quad_weights()));
    let proj = m1_inv * basis.interp_quad().transpose() * &w;
    let stiffness = &w * basis.deriv_quad() * &proj;
    let extrapolation = basis.interp_face() * &proj;
    StackedOperators { stiffness, extrapolation, boundary: DVector::from_column_slice(&[-1.0, 1.0]) }
}

fn volume_interp(basis: &Basis1D, dim: usize) -> DMatrix<f64> {
    let vq = basis.interp_quad();
    if dim == 1 { vq.clone() } else { vq.kronecker(vq) }
}

fn facet_interp(basis: &Basis1D, dim: usize) -> DMatrix<f64> {
    if dim == 1 {
        return basis.interp_face().clone();
    }
    let n = basis.num_nodes();
    let vf = basis.interp_face();
    let vq = basis.interp_quad();
    DMatrix::from_fn(4 * n, n * n, |row, col| {
        let (face, k) = (row / n, row % n);
        let (a, b) = (col % n, col / n);
        match face {
            0 | 1 => vf[(face, a)] * vq[(k, b)],
            _ => vq[(k, a)] * vf[(face - 2, b)],
        }
    })
}
