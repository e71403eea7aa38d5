//! Semi-discrete residual of the entropy-stable split-form scheme.
//!
//! Per element and reference direction `r`, the raw residual is
//! `V_h^T [(Q~_r - Q~_r^T) o F_r] 1 + V_f^T B_r f*`, scaled by `2 / h_r`, and
//! the time derivative is `-(M + K(c))^{-1}` applied to it. On tensor-product
//! elements the hybridized operator couples only points on the same
//! coordinate line (plus the two facet points closing that line), so the
//! Hadamard product is evaluated line by line, each two-point flux once.
//!
//! Facet states are entropy projected: entropy variables at the volume
//! quadrature points are extrapolated to the facets and mapped back. If that
//! mapping leaves the admissible set, or its density or pressure departs from
//! the polynomial trace by more than `FluxConfig::projection_tolerance`
//! (relative), the trace is used instead. In smooth flow the two agree to
//! truncation error and the projection is always kept; next to strong
//! discontinuities the extrapolated entropy variables can produce extreme
//! states that the guard rejects.
//!
//! Interface fluxes are computed once per face and used with opposite signs
//! by the two neighbours, so the scheme is exactly conservative.

use alloc::vec::Vec;
use num_traits::Float;

use crate::error::{Error, Result, Site};
use crate::euler::{interface_flux_unchecked, ranocha_axis};
use crate::euler::{Conserved, EulerState, FluxConfig, FluxPoint};
use crate::field::SolutionField;
use crate::mesh::{ghost_state, CartesianMesh, FaceSide};
use crate::reference::ReferenceOperators;
use crate::sensor::CParameterField;

/// Scratch buffers reused across residual evaluations.
#[derive(Clone, Debug, Default)]
pub struct ResidualWorkspace {
    quad_pts: Vec<FluxPoint>,
    facet_states: Vec<EulerState>,
    facet_pts: Vec<FluxPoint>,
    face_flux: Vec<Conserved>,
    r_quad: Vec<Conserved>,
    r_facet: Vec<Conserved>,
    tmp: Vec<Conserved>,
    ent: Vec<Conserved>,
    nodal: Vec<Conserved>,
    self_flux: Vec<Conserved>,
    /// Facet points where the entropy projection fell back to the trace
    /// during the last evaluation.
    pub projection_fallbacks: usize,
}

impl ResidualWorkspace {
    pub fn new(mesh: &CartesianMesh, ops: &ReferenceOperators) -> Self {
        let mut w = Self::default();
        w.resize(mesh, ops);
        w
    }

    fn resize(&mut self, mesh: &CartesianMesh, ops: &ReferenceOperators) {
        let ne = mesh.num_elements();
        let nq = ops.nodes_per_element();
        let nf = ops.facet_nodes();
        let per_face = if ops.dim() == 1 { 1 } else { ops.line().n };
        self.quad_pts.resize(ne * nq, FluxPoint::default());
        self.facet_states.resize(ne * nf, EulerState::default());
        self.facet_pts.resize(ne * nf, FluxPoint::default());
        self.face_flux.resize(mesh.faces().len() * per_face, [0.0; 4]);
        self.r_quad.resize(nq, [0.0; 4]);
        self.r_facet.resize(nf, [0.0; 4]);
        self.tmp.resize(nq, [0.0; 4]);
        self.ent.resize(nq, [0.0; 4]);
        self.nodal.resize(nq, [0.0; 4]);
        self.self_flux.resize(nq, [0.0; 4]);
    }
}

#[inline]
fn axpy(acc: &mut Conserved, a: f64, f: &Conserved) {
    acc[0] += a * f[0];
    acc[1] += a * f[1];
    acc[2] += a * f[2];
    acc[3] += a * f[3];
}

fn check(u: &EulerState, gamma: f64, element: usize, site: Site) -> Result<()> {
    if u.is_admissible(gamma) {
        Ok(())
    } else {
        Err(Error::Positivity { element, site, rho: u.rho, pressure: u.pressure(gamma), context: Default::default() })
    }
}

/// Tensor-product interpolation with the 1D row-major matrix `m` (`rows x n`)
/// applied along every direction: `out = (m (x) m) x` (or `m x` in 1D).
fn interp_tensor(m: &[f64], n: usize, dim: usize, x: &[Conserved], tmp: &mut [Conserved], out: &mut [Conserved]) {
    if dim == 1 {
        for (q, o) in out.iter_mut().enumerate().take(n) {
            let mut acc = [0.0; 4];
            for j in 0..n {
                axpy(&mut acc, m[q * n + j], &x[j]);
            }
            *o = acc;
        }
        return;
    }
    for b in 0..n {
        for q in 0..n {
            let mut acc = [0.0; 4];
            for a in 0..n {
                axpy(&mut acc, m[q * n + a], &x[a + n * b]);
            }
            tmp[q + n * b] = acc;
        }
    }
    for q2 in 0..n {
        for q1 in 0..n {
            let mut acc = [0.0; 4];
            for b in 0..n {
                axpy(&mut acc, m[q2 * n + b], &tmp[q1 + n * b]);
            }
            out[q1 + n * q2] = acc;
        }
    }
}

/// Transpose of [`interp_tensor`].
fn interp_tensor_t(m: &[f64], n: usize, dim: usize, x: &[Conserved], tmp: &mut [Conserved], out: &mut [Conserved]) {
    if dim == 1 {
        for (j, o) in out.iter_mut().enumerate().take(n) {
            let mut acc = [0.0; 4];
            for q in 0..n {
                axpy(&mut acc, m[q * n + j], &x[q]);
            }
            *o = acc;
        }
        return;
    }
    for q2 in 0..n {
        for a in 0..n {
            let mut acc = [0.0; 4];
            for q1 in 0..n {
                axpy(&mut acc, m[q1 * n + a], &x[q1 + n * q2]);
            }
            tmp[a + n * q2] = acc;
        }
    }
    for b in 0..n {
        for a in 0..n {
            let mut acc = [0.0; 4];
            for q2 in 0..n {
                axpy(&mut acc, m[q2 * n + b], &tmp[a + n * q2]);
            }
            out[a + n * b] = acc;
        }
    }
}

/// Apply `(M + K(c))^{-1}` in place to the nodal values of one element,
/// stored `[node][var]` with `nvar` variables. `K` is rank one per line, so
/// each line solve is a Sherman–Morrison update of `M^{-1}`; with `c = 0`
/// the result is exactly `M^{-1} x`.
pub fn apply_modified_mass(values: &mut [f64], nvar: usize, c: f64, ops: &ReferenceOperators) {
    let line = ops.line();
    let n = line.n;
    let lines: &[(usize, usize)] = if ops.dim() == 1 { &[(1, 1)] } else { &[(1, n), (n, 1)] };
    let denom = 1.0 + c * line.filter_norm;
    let mut x = [0.0f64; 16];
    let mut y = [0.0f64; 16];
    for &(stride, line_step) in lines {
        let count = if ops.dim() == 1 { 1 } else { n };
        for l in 0..count {
            let base = l * line_step;
            for v in 0..nvar {
                for j in 0..n {
                    x[j] = values[(base + j * stride) * nvar + v];
                }
                for i in 0..n {
                    y[i] = (0..n).map(|j| line.mass_inv[i * n + j] * x[j]).sum();
                }
                if c != 0.0 {
                    let gx: f64 = (0..n).map(|j| line.filter_lift[j] * x[j]).sum();
                    let s = c * gx / denom;
                    for i in 0..n {
                        y[i] -= s * line.filter_lift[i];
                    }
                }
                for i in 0..n {
                    values[(base + i * stride) * nvar + v] = y[i];
                }
            }
        }
    }
}

/// Evaluate `du/dt` for the whole mesh into `out`.
#[allow(clippy::too_many_arguments)]
pub fn compute_residual(
    field: &SolutionField,
    c_field: &CParameterField,
    mesh: &CartesianMesh,
    ops: &ReferenceOperators,
    flux: &FluxConfig,
    work: &mut ResidualWorkspace,
    out: &mut SolutionField,
) -> Result<()> {
    let dim = ops.dim();
    let n = ops.line().n;
    if n > 16 {
        return Err(Error::invalid("degree too high for the line solver"));
    }
    if field.dim() != dim || mesh.dim() != dim || field.num_elements() != mesh.num_elements() {
        return Err(Error::invalid("field, mesh and operators disagree"));
    }
    if c_field.len() != field.num_elements() || !field.is_compatible(out) {
        return Err(Error::invalid("c field or output not aligned with the solution"));
    }
    work.resize(mesh, ops);
    let gamma = flux.gamma;
    project_to_stacked(field, ops, flux, work)?;
    face_fluxes(field, mesh, ops, flux, work)?;
    let inv_gm1 = 1.0 / (gamma - 1.0);
    for e in 0..field.num_elements() {
        element_rhs(e, mesh, ops, inv_gm1, work);
        let nvar = field.nvar();
        let slot = out.element_mut(e);
        for (i, r) in work.nodal.iter().enumerate() {
            let s = EulerState::from_array([-r[0], -r[1], -r[2], -r[3]]);
            s.write(&mut slot[i * nvar..], dim);
        }
        apply_modified_mass(slot, nvar, c_field.values()[e], ops);
    }
    out.time = field.time;
    Ok(())
}

// Entropy projection in difference form. With `w(u) = dS/du`, the facet
// entropy variables are `w_r + E (w - w_r)` for a reference point `r` of the
// element (extrapolation reproduces constants). Working with differences
// and `ln_1p` / `exp_m1` keeps a nearly uniform element projecting back onto
// itself to a few ulps instead of losing digits in the `exp(ln p)` round trip.

/// `w(u) - w(u_r)`.
fn entropy_difference(u: &FluxPoint, r: &FluxPoint, gamma: f64) -> Conserved {
    let (bu, br) = (u.rho / u.p, r.rho / r.p);
    let ds = Float::ln_1p((u.p - r.p) / r.p) - gamma * Float::ln_1p((u.rho - r.rho) / r.rho);
    let ke = |b: f64, v: [f64; 2]| b * (v[0] * v[0] + v[1] * v[1]);
    [
        -ds / (gamma - 1.0) - 0.5 * (ke(bu, u.vel) - ke(br, r.vel)),
        bu * u.vel[0] - br * r.vel[0],
        bu * u.vel[1] - br * r.vel[1],
        br - bu,
    ]
}

/// Inverse of [`entropy_difference`]; `None` when the state is inadmissible.
fn from_entropy_difference(r: &FluxPoint, d: &Conserved, gamma: f64) -> Option<EulerState> {
    let br = r.rho / r.p;
    let bf = br - d[3];
    if !(bf > 0.0) {
        return None;
    }
    let dv = [(d[1] + d[3] * r.vel[0]) / bf, (d[2] + d[3] * r.vel[1]) / bf];
    let vel = [r.vel[0] + dv[0], r.vel[1] + dv[1]];
    // beta_f |v_f|^2 - beta_r |v_r|^2
    let dke = br * (r.vel[0] * dv[0] + r.vel[1] * dv[1]) + d[1] * vel[0] + d[2] * vel[1];
    let dlnp = d[0] + 0.5 * dke - gamma / (gamma - 1.0) * Float::ln_1p(-d[3] / br);
    let p = r.p + r.p * Float::exp_m1(dlnp);
    let u = EulerState::from_primitive(bf * p, vel, p, gamma);
    u.is_admissible(gamma).then_some(u)
}

/// Whether density and pressure of `a` are within `tol` (relative) of `b`.
fn close_to(a: &EulerState, b: &EulerState, tol: f64, gamma: f64) -> bool {
    if tol == f64::INFINITY {
        return true;
    }
    let (pa, pb) = (a.pressure(gamma), b.pressure(gamma));
    b.rho > 0.0 && pb > 0.0 && Float::abs(a.rho - b.rho) <= tol * b.rho && Float::abs(pa - pb) <= tol * pb
}

/// Volume quadrature states and entropy-projected facet states.
fn project_to_stacked(
    field: &SolutionField,
    ops: &ReferenceOperators,
    flux: &FluxConfig,
    work: &mut ResidualWorkspace,
) -> Result<()> {
    let gamma = flux.gamma;
    let tolerance = flux.projection_tolerance;
    let dim = ops.dim();
    let line = ops.line();
    let n = line.n;
    let nq = ops.nodes_per_element();
    let nf = ops.facet_nodes();
    let nvar = field.nvar();
    work.projection_fallbacks = 0;
    for e in 0..field.num_elements() {
        let el = field.element(e);
        // Interpolate differences from the first node, so that a uniform
        // element gives bitwise uniform quadrature states.
        let base = EulerState::read(el, dim).to_array();
        for i in 0..nq {
            let u = EulerState::read(&el[i * nvar..], dim).to_array();
            work.nodal[i] = core::array::from_fn(|v| u[v] - base[v]);
        }
        let (nodal, tmp, quad) = (&work.nodal, &mut work.tmp, &mut work.r_quad);
        interp_tensor(&line.vq, n, dim, nodal, tmp, quad);
        for r in quad.iter_mut().take(nq) {
            *r = core::array::from_fn(|v| base[v] + r[v]);
        }
        let mut reference = None;
        for q in 0..nq {
            let u = EulerState::from_array(work.r_quad[q]);
            check(&u, gamma, e, Site::Volume(q))?;
            let pt = FluxPoint::new(&u, gamma);
            let r = *reference.get_or_insert(pt);
            work.quad_pts[e * nq + q] = pt;
            work.ent[q] = entropy_difference(&pt, &r, gamma);
        }
        let reference = reference.expect("element without quadrature points");
        // Extrapolate along lines to the four (or two) facets.
        let faces = if dim == 1 { 2 } else { 4 };
        for f in 0..faces {
            let (axis, side) = (f / 2, f % 2);
            let ex = &line.extrap[side];
            let per = if dim == 1 { 1 } else { n };
            for k in 0..per {
                // Trace in difference form about the first quadrature point.
                let u0 = work.r_quad[0];
                let (mut w, mut du) = ([0.0; 4], [0.0; 4]);
                for a in 0..n {
                    let q = if axis == 0 { a + n * k } else { k + n * a };
                    axpy(&mut w, ex[a], &work.ent[q]);
                    let d: Conserved = core::array::from_fn(|v| work.r_quad[q][v] - u0[v]);
                    axpy(&mut du, ex[a], &d);
                }
                let slot = f * per + k;
                let trace = EulerState::from_array(core::array::from_fn(|v| u0[v] + du[v]));
                let projected = if tolerance == 0.0 {
                    None
                } else if w == [0.0; 4] {
                    // No entropy variation: the projection is the reference state itself.
                    Some(EulerState::from_array(u0))
                } else {
                    from_entropy_difference(&reference, &w, gamma)
                };
                let state = match projected {
                    Some(s) if close_to(&s, &trace, tolerance, gamma) => s,
                    _ => {
                        if tolerance > 0.0 {
                            work.projection_fallbacks += 1;
                        }
                        check(&trace, gamma, e, Site::Facet(f, k))?;
                        trace
                    }
                };
                work.facet_states[e * nf + slot] = state;
                work.facet_pts[e * nf + slot] = FluxPoint::new(&state, gamma);
            }
        }
    }
    Ok(())
}

/// One numerical flux per face point, oriented along `+e_axis`.
fn face_fluxes(
    field: &SolutionField,
    mesh: &CartesianMesh,
    ops: &ReferenceOperators,
    flux: &FluxConfig,
    work: &mut ResidualWorkspace,
) -> Result<()> {
    let per = if ops.dim() == 1 { 1 } else { ops.line().n };
    let nf = ops.facet_nodes();
    let t = field.time;
    for (fid, face) in mesh.faces().iter().enumerate() {
        let axis = face.axis;
        let mut normal = [0.0; 2];
        normal[axis] = 1.0;
        for k in 0..per {
            // Minus side sees this face as its `+` facet, plus side as its `-` facet.
            let trace = |side: &FaceSide, local: usize| match side {
                FaceSide::Element(e) => Some(work.facet_states[e * nf + local * per + k]),
                FaceSide::Boundary(_) => None,
            };
            let left = trace(&face.minus, 2 * axis + 1);
            let right = trace(&face.plus, 2 * axis);
            let (l, r) = match (left, right, &face.minus, &face.plus) {
                (Some(l), Some(r), _, _) => (l, r),
                (None, Some(r), FaceSide::Boundary(kind), _) => {
                    let mut out = [0.0; 2];
                    out[axis] = -1.0;
                    (ghost_state(&r, kind, out, t), r)
                }
                (Some(l), None, _, FaceSide::Boundary(kind)) => (l, ghost_state(&l, kind, normal, t)),
                _ => return Err(Error::invalid("face without an element on either side")),
            };
            work.face_flux[fid * per + k] = interface_flux_unchecked(&l, &r, normal, flux)?;
        }
    }
    Ok(())
}

/// Raw (pre-mass) residual of element `e` into `work.nodal`.
fn element_rhs(e: usize, mesh: &CartesianMesh, ops: &ReferenceOperators, inv_gm1: f64, work: &mut ResidualWorkspace) {
    let dim = ops.dim();
    let line = ops.line();
    let n = line.n;
    let nq = ops.nodes_per_element();
    let nf = ops.facet_nodes();
    let per = if dim == 1 { 1 } else { n };
    let h = mesh.h();
    let el = &mesh.elements()[e];
    let qp = &work.quad_pts[e * nq..(e + 1) * nq];
    let fp = &work.facet_pts[e * nf..(e + 1) * nf];
    let rq = &mut work.r_quad;
    let rf = &mut work.r_facet;
    rq.iter_mut().for_each(|r| *r = [0.0; 4]);
    rf.iter_mut().for_each(|r| *r = [0.0; 4]);

    // Each row's own consistent flux is subtracted from its two-point fluxes.
    // The skew rows sum to zero, so this changes nothing algebraically, but it
    // removes the O(|f|) cancellation near uniform states.
    const B: [f64; 2] = [-1.0, 1.0];
    for axis in 0..dim {
        let scale = 2.0 / h[axis];
        let (stride, step) = if axis == 0 { (1, n) } else { (n, 1) };
        for (q, f) in work.self_flux.iter_mut().enumerate().take(nq) {
            *f = ranocha_axis(&qp[q], &qp[q], axis, inv_gm1);
        }
        let fq = &work.self_flux;
        for k in 0..per {
            let wk = if dim == 1 { 1.0 } else { line.weights[k] } * scale;
            let base = k * step;
            // Volume-volume pairs, each flux once (skew symmetry).
            for i in 0..n {
                let qi = base + i * stride;
                for j in (i + 1)..n {
                    let qj = base + j * stride;
                    let s = wk * line.skew[i * n + j];
                    let f = ranocha_axis(&qp[qi], &qp[qj], axis, inv_gm1);
                    for v in 0..4 {
                        rq[qi][v] += s * (f[v] - fq[qi][v]);
                        rq[qj][v] -= s * (f[v] - fq[qj][v]);
                    }
                }
            }
            // Volume-facet couplings and the interface flux.
            for side in 0..2 {
                let slot = (2 * axis + side) * per + k;
                let fpt = &fp[slot];
                let ff = ranocha_axis(fpt, fpt, axis, inv_gm1);
                let ex = &line.extrap[side];
                for i in 0..n {
                    let qi = base + i * stride;
                    let f = ranocha_axis(&qp[qi], fpt, axis, inv_gm1);
                    let coef = wk * ex[i] * B[side];
                    for v in 0..4 {
                        rq[qi][v] += coef * (f[v] - fq[qi][v]);
                        rf[slot][v] -= coef * (f[v] - ff[v]);
                    }
                }
                let fid = el.faces[2 * axis + side];
                let fs = &work.face_flux[fid * per + k];
                for v in 0..4 {
                    rf[slot][v] += wk * B[side] * (fs[v] - ff[v]);
                }
            }
        }
    }

    // Back to nodal coefficients: V_q^T r_q + V_f^T r_f.
    interp_tensor_t(&line.vq, n, dim, rq, &mut work.tmp, &mut work.nodal);
    let vf = ops.basis().interp_face();
    if dim == 1 {
        for side in 0..2 {
            for a in 0..n {
                let c = vf[(side, a)];
                if c != 0.0 {
                    axpy(&mut work.nodal[a], c, &rf[side]);
                }
            }
        }
    } else {
        for f in 0..4 {
            let (axis, side) = (f / 2, f % 2);
            // Along the face the facet points are volume quadrature points.
            for b in 0..n {
                let mut t = [0.0; 4];
                for k in 0..n {
                    axpy(&mut t, line.vq[k * n + b], &rf[f * n + k]);
                }
                for a in 0..n {
                    let c = vf[(side, a)];
                    if c != 0.0 {
                        let node = if axis == 0 { a + n * b } else { b + n * a };
                        axpy(&mut work.nodal[node], c, &t);
                    }
                }
            }
        }
    }
}
