//! Gauss-Legendre rules and a small adaptive integrator.
//!
//! These are the low-level building blocks shared by the equilibrium, Szego
//! and orthogonal-polynomial layers. Endpoint square-root and interior log
//! singularities are always removed by substitutions in the calling code;
//! the integrators here only ever see smooth (or mildly log-singular)
//! integrands.

use num_complex::Complex64;
use std::sync::OnceLock;

/// Nodes and weights of an `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Newton iteration on the Legendre polynomial, seeded by the Chebyshev
    /// angle approximation of the roots.
    pub fn legendre(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = (n + 1) / 2;
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut pp = 0.0;
            for _ in 0..100 {
                let (p, dp) = legendre_pair(n, x);
                pp = dp;
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            let w = 2.0 / ((1.0 - x * x) * pp * pp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussRule { nodes, weights }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    pub fn integrate_c<F: FnMut(f64) -> Complex64>(&self, a: f64, b: f64, mut f: F) -> Complex64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(mid + half * x) * *w;
        }
        acc * half
    }
}

fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn rule16() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| GaussRule::legendre(16))
}

fn rule8() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| GaussRule::legendre(8))
}

/// Globally adaptive 8/16-point Gauss bisection for complex-valued integrands.
///
/// Bisection (rather than higher-order panels) is deliberate: the callers
/// feed integrands with near-cut Cauchy poles or integrable log points, and
/// dyadic refinement toward those features is exactly what is needed.
pub fn adaptive_c<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, tol: f64) -> Complex64 {
    fn rec<F: Fn(f64) -> Complex64>(
        f: &F,
        a: f64,
        b: f64,
        tol: f64,
        whole: Complex64,
        depth: u32,
    ) -> Complex64 {
        let mid = 0.5 * (a + b);
        let left = rule16().integrate_c(a, mid, f);
        let right = rule16().integrate_c(mid, b, f);
        let err = (left + right - whole).norm();
        // the local tolerance is kept flat; the relative floor stops the
        // subdivision once the estimate sits in roundoff
        if err < tol || err < 1e-14 * (left.norm() + right.norm()) || depth >= 52 {
            return left + right;
        }
        rec(f, a, mid, tol, left, depth + 1) + rec(f, mid, b, tol, right, depth + 1)
    }
    let coarse = rule8().integrate_c(a, b, f);
    let fine = rule16().integrate_c(a, b, f);
    if (fine - coarse).norm() < tol {
        return fine;
    }
    rec(f, a, b, 0.25 * tol, fine, 0)
}

/// Real-valued counterpart of [`adaptive_c`].
pub fn adaptive_r<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    adaptive_c(&|x| Complex64::new(f(x), 0.0), a, b, tol).re
}
