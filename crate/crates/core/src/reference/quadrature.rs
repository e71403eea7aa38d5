//! Gauss–Legendre and Gauss–Lobatto–Legendre rules on `[-1, 1]`.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITERS: usize = 100;

/// Legendre polynomial `P_n(x)` and its derivative, by the three-term recurrence.
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    let (mut d_prev, mut d) = (0.0, 1.0);
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        let d_next = d_prev + (2.0 * kf + 1.0) * p;
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
    }
    (p, d)
}

/// Orthonormal Legendre mode `sqrt((2k+1)/2) P_k` on `[-1, 1]`.
pub fn orthonormal_legendre(k: usize, x: f64) -> f64 {
    Float::sqrt((2.0 * k as f64 + 1.0) / 2.0) * legendre(k, x).0
}

/// `n`-point Gauss–Legendre nodes (ascending) and weights.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre needs at least one point");
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        // Chebyshev-like initial guess, descending in i, reversed below.
        let mut x = Float::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        for _ in 0..NEWTON_MAX_ITERS {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < NEWTON_TOL {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    nodes.reverse();
    weights.reverse();
    symmetrize(&mut nodes, &mut weights);
    (nodes, weights)
}

/// `n`-point Gauss–Lobatto–Legendre nodes (ascending, endpoints included) and weights.
pub fn gauss_lobatto(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2, "Gauss-Lobatto needs at least two points");
    let degree = n - 1;
    let nf = degree as f64;
    let mut nodes = Vec::with_capacity(n);
    nodes.push(-1.0);
    // Interior nodes are the roots of P'_degree.
    for i in 1..degree {
        let mut x = -Float::cos(PI * i as f64 / nf);
        for _ in 0..NEWTON_MAX_ITERS {
            let (p, dp) = legendre(degree, x);
            let d2p = (2.0 * x * dp - nf * (nf + 1.0) * p) / (1.0 - x * x);
            let dx = dp / d2p;
            x -= dx;
            if dx.abs() < NEWTON_TOL {
                break;
            }
        }
        nodes.push(x);
    }
    nodes.push(1.0);
    let mut weights: Vec<f64> = nodes
        .iter()
        .map(|&x| {
            let p = legendre(degree, x).0;
            2.0 / (nf * (nf + 1.0) * p * p)
        })
        .collect();
    symmetrize(&mut nodes, &mut weights);
    (nodes, weights)
}

// Enforce exact mirror symmetry about the origin.
fn symmetrize(nodes: &mut [f64], weights: &mut [f64]) {
    let n = nodes.len();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (nodes[j] - nodes[i]);
        let w = 0.5 * (weights[i] + weights[j]);
        nodes[i] = -x;
        nodes[j] = x;
        weights[i] = w;
        weights[j] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate(rule: &(Vec<f64>, Vec<f64>), f: impl Fn(f64) -> f64) -> f64 {
        rule.0.iter().zip(&rule.1).map(|(&x, &w)| w * f(x)).sum()
    }

    #[test]
    fn weights_sum_to_reference_length() {
        for n in 1..10 {
            let sum: f64 = gauss_legendre(n).1.iter().sum();
            assert!((sum - 2.0).abs() < 1e-14, "GL n={n}: {sum}");
        }
        for n in 2..10 {
            let sum: f64 = gauss_lobatto(n).1.iter().sum();
            assert!((sum - 2.0).abs() < 1e-14, "GLL n={n}: {sum}");
        }
    }

    #[test]
    fn three_point_gauss_integrates_x4() {
        let rule = gauss_legendre(3);
        let v = integrate(&rule, |x| x.powi(4));
        assert!((v - 0.4).abs() < 1e-14);
    }

    #[test]
    fn exactness_degrees() {
        for n in 2..8 {
            let gl = gauss_legendre(n);
            let gll = gauss_lobatto(n);
            for k in 0..2 * n {
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                let v = integrate(&gl, |x| x.powi(k as i32));
                assert!((v - exact).abs() < 1e-13, "GL n={n} k={k}");
                if k + 2 < 2 * n {
                    let v = integrate(&gll, |x| x.powi(k as i32));
                    assert!((v - exact).abs() < 1e-13, "GLL n={n} k={k}");
                }
            }
        }
    }

    #[test]
    fn known_lobatto_points() {
        let (x, w) = gauss_lobatto(4);
        let r = 1.0 / 5.0f64.sqrt();
        assert!((x[1] + r).abs() < 1e-15 && (x[2] - r).abs() < 1e-15);
        assert!((w[0] - 1.0 / 6.0).abs() < 1e-15 && (w[1] - 5.0 / 6.0).abs() < 1e-15);
        let (x, _) = gauss_lobatto(2);
        assert_eq!(x, [-1.0, 1.0]);
    }
}
