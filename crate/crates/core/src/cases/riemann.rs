//! Exact solution of the one-dimensional Riemann problem for an ideal gas.
//!
//! Newton iteration on the pressure function
//! `f(p) = f_L(p) + f_R(p) + (u_R - u_L)`, where `f_K` is the shock
//! (Rankine–Hugoniot) branch for `p > p_K` and the rarefaction (isentrope)
//! branch otherwise.

use num_traits::Float;

use crate::error::{Error, Result};

/// Primitive state `(rho, u, p)` on one side of the discontinuity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Primitive1D {
    pub rho: f64,
    pub u: f64,
    pub p: f64,
}

impl Primitive1D {
    pub fn new(rho: f64, u: f64, p: f64) -> Self {
        Self { rho, u, p }
    }
    fn sound_speed(&self, gamma: f64) -> f64 {
        Float::sqrt(gamma * self.p / self.rho)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RiemannSolution {
    pub left: Primitive1D,
    pub right: Primitive1D,
    pub gamma: f64,
    pub p_star: f64,
    pub u_star: f64,
    pub rho_star_left: f64,
    pub rho_star_right: f64,
}

/// Branch value and derivative of `f_K(p)`.
fn branch(p: f64, s: &Primitive1D, gamma: f64) -> (f64, f64) {
    let a = s.sound_speed(gamma);
    if p > s.p {
        let ak = 2.0 / ((gamma + 1.0) * s.rho);
        let bk = (gamma - 1.0) / (gamma + 1.0) * s.p;
        let q = Float::sqrt(ak / (p + bk));
        ((p - s.p) * q, q * (1.0 - 0.5 * (p - s.p) / (p + bk)))
    } else {
        let e = (gamma - 1.0) / (2.0 * gamma);
        let r = Float::powf(p / s.p, e);
        (2.0 * a / (gamma - 1.0) * (r - 1.0), Float::powf(p / s.p, -(gamma + 1.0) / (2.0 * gamma)) / (s.rho * a))
    }
}

/// Residual of the pressure function at `p`.
pub fn pressure_function(p: f64, left: &Primitive1D, right: &Primitive1D, gamma: f64) -> f64 {
    branch(p, left, gamma).0 + branch(p, right, gamma).0 + (right.u - left.u)
}

impl RiemannSolution {
    pub fn solve(left: Primitive1D, right: Primitive1D, gamma: f64) -> Result<Self> {
        for s in [&left, &right] {
            if !(s.rho > 0.0 && s.p > 0.0) {
                return Err(Error::Riemann("states must have positive density and pressure"));
            }
        }
        let (al, ar) = (left.sound_speed(gamma), right.sound_speed(gamma));
        if 2.0 / (gamma - 1.0) * (al + ar) <= right.u - left.u {
            return Err(Error::Riemann("initial data generate vacuum"));
        }
        // Two-rarefaction guess: exact when both waves are rarefactions.
        let e = (gamma - 1.0) / (2.0 * gamma);
        let num = al + ar - 0.5 * (gamma - 1.0) * (right.u - left.u);
        let den = al / Float::powf(left.p, e) + ar / Float::powf(right.p, e);
        let mut p = Float::powf(num / den, 1.0 / e).max(1e-12 * left.p.min(right.p));

        let mut converged = false;
        for _ in 0..200 {
            let (fl, dl) = branch(p, &left, gamma);
            let (fr, dr) = branch(p, &right, gamma);
            let f = fl + fr + (right.u - left.u);
            let mut next = p - f / (dl + dr);
            if !(next > 0.0) {
                next = 0.5 * p;
            }
            let change = Float::abs(next - p) / (0.5 * (next + p));
            p = next;
            if change < 1e-15 {
                converged = true;
                break;
            }
        }
        if !converged || !p.is_finite() {
            return Err(Error::Riemann("Newton iteration did not converge"));
        }
        let (fl, _) = branch(p, &left, gamma);
        let (fr, _) = branch(p, &right, gamma);
        let u_star = 0.5 * (left.u + right.u) + 0.5 * (fr - fl);
        let star_rho = |s: &Primitive1D| {
            if p > s.p {
                let g = (gamma - 1.0) / (gamma + 1.0);
                s.rho * (p / s.p + g) / (g * p / s.p + 1.0)
            } else {
                s.rho * Float::powf(p / s.p, 1.0 / gamma)
            }
        };
        Ok(Self {
            left,
            right,
            gamma,
            p_star: p,
            u_star,
            rho_star_left: star_rho(&left),
            rho_star_right: star_rho(&right),
        })
    }

    /// Speed of the right-moving shock, if the right wave is a shock.
    pub fn shock_speed_right(&self) -> Option<f64> {
        let (g, r) = (self.gamma, &self.right);
        (self.p_star > r.p).then(|| {
            r.u + r.sound_speed(g) * Float::sqrt((g + 1.0) / (2.0 * g) * self.p_star / r.p + (g - 1.0) / (2.0 * g))
        })
    }

    /// Solution at similarity coordinate `s = x / t`.
    pub fn sample(&self, s: f64) -> Primitive1D {
        let g = self.gamma;
        let (l, r) = (&self.left, &self.right);
        if s <= self.u_star {
            let a = l.sound_speed(g);
            if self.p_star > l.p {
                let speed = l.u - a * Float::sqrt((g + 1.0) / (2.0 * g) * self.p_star / l.p + (g - 1.0) / (2.0 * g));
                if s <= speed { *l } else { Primitive1D::new(self.rho_star_left, self.u_star, self.p_star) }
            } else {
                let head = l.u - a;
                let a_star = a * Float::powf(self.p_star / l.p, (g - 1.0) / (2.0 * g));
                let tail = self.u_star - a_star;
                if s <= head {
                    *l
                } else if s >= tail {
                    Primitive1D::new(self.rho_star_left, self.u_star, self.p_star)
                } else {
                    let c = 2.0 / (g + 1.0) + (g - 1.0) / ((g + 1.0) * a) * (l.u - s);
                    let rho = l.rho * Float::powf(c, 2.0 / (g - 1.0));
                    let u = 2.0 / (g + 1.0) * (a + 0.5 * (g - 1.0) * l.u + s);
                    Primitive1D::new(rho, u, l.p * Float::powf(c, 2.0 * g / (g - 1.0)))
                }
            }
        } else {
            let a = r.sound_speed(g);
            if self.p_star > r.p {
                let speed = self.shock_speed_right().unwrap_or(f64::INFINITY);
                if s >= speed { *r } else { Primitive1D::new(self.rho_star_right, self.u_star, self.p_star) }
            } else {
                let head = r.u + a;
                let a_star = a * Float::powf(self.p_star / r.p, (g - 1.0) / (2.0 * g));
                let tail = self.u_star + a_star;
                if s >= head {
                    *r
                } else if s <= tail {
                    Primitive1D::new(self.rho_star_right, self.u_star, self.p_star)
                } else {
                    let c = 2.0 / (g + 1.0) - (g - 1.0) / ((g + 1.0) * a) * (r.u - s);
                    let rho = r.rho * Float::powf(c, 2.0 / (g - 1.0));
                    let u = 2.0 / (g + 1.0) * (-a + 0.5 * (g - 1.0) * r.u + s);
                    Primitive1D::new(rho, u, r.p * Float::powf(c, 2.0 * g / (g - 1.0)))
                }
            }
        }
    }
}
