//! Closed-form limit kernels and correlation determinants.
//!
//! The origin kernel is
//! `J^o_a(u,v) = pi sqrt(uv) [J_{a+1/2}(pi u) J_{a-1/2}(pi v) - J_{a-1/2}(pi u) J_{a+1/2}(pi v)] / (2(u-v))`,
//! the hard-edge kernel is the classical Bessel kernel in `J_a(sqrt(u))`,
//! and the sine kernel closes the `a = 0` reduction. Coincident arguments go
//! through analytic confluent forms, not small-offset evaluation.

use crate::specialfn::{bessel_j_prime, bessel_j_real, SpecialFnError};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("argument outside kernel domain: {0}")]
    Domain(String),
    #[error(transparent)]
    SpecialFn(#[from] SpecialFnError),
}

/// Which limit kernel a table or CLI run refers to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitKernel {
    OriginBessel { alpha: f64 },
    HardEdgeBessel { alpha: f64 },
    Sine,
}

impl LimitKernel {
    pub fn validate(&self) -> Result<(), KernelError> {
        match *self {
            LimitKernel::OriginBessel { alpha } | LimitKernel::HardEdgeBessel { alpha } => {
                if alpha > -0.5 {
                    Ok(())
                } else {
                    Err(KernelError::Domain(format!("alpha = {alpha} <= -1/2")))
                }
            }
            LimitKernel::Sine => Ok(()),
        }
    }

    pub fn eval(&self, u: f64, v: f64) -> Result<f64, KernelError> {
        match *self {
            LimitKernel::OriginBessel { alpha } => eval_origin_bessel(alpha, u, v),
            LimitKernel::HardEdgeBessel { alpha } => eval_hard_edge(alpha, u, v),
            LimitKernel::Sine => Ok(eval_sine(u, v)),
        }
    }
}

const CONFLUENT_TOL: f64 = 1e-6;

/// Origin Bessel kernel `J^o_alpha(u, v)` for `u, v > 0`.
pub fn eval_origin_bessel(alpha: f64, u: f64, v: f64) -> Result<f64, KernelError> {
    if !(u > 0.0 && v > 0.0) {
        return Err(KernelError::Domain(format!("need u, v > 0, got ({u}, {v})")));
    }
    let rel = (u - v).abs() / u.abs().max(v.abs()).max(1.0);
    if rel < CONFLUENT_TOL {
        return origin_bessel_diagonal(alpha, 0.5 * (u + v));
    }
    let pi = std::f64::consts::PI;
    let jp_u = bessel_j_real(alpha + 0.5, pi * u)?;
    let jm_u = bessel_j_real(alpha - 0.5, pi * u)?;
    let jp_v = bessel_j_real(alpha + 0.5, pi * v)?;
    let jm_v = bessel_j_real(alpha - 0.5, pi * v)?;
    Ok(pi * (u * v).sqrt() * (jp_u * jm_v - jm_u * jp_v) / (2.0 * (u - v)))
}

// J^o_alpha(u, u) = (pi^2 u / 2) [J_-^2 + J_+^2 - (2 alpha / (pi u)) J_+ J_-]
// with J_± = J_{alpha ± 1/2}(pi u); this is the L'Hopital limit rewritten
// through the first-order recurrences.
fn origin_bessel_diagonal(alpha: f64, u: f64) -> Result<f64, KernelError> {
    let pi = std::f64::consts::PI;
    let jp = bessel_j_real(alpha + 0.5, pi * u)?;
    let jm = bessel_j_real(alpha - 0.5, pi * u)?;
    Ok(0.5 * pi * pi * u * (jp * jp + jm * jm - 2.0 * alpha / (pi * u) * jp * jm))
}

/// Hard-edge Bessel kernel `J_alpha(u, v)` for `u, v > 0`.
pub fn eval_hard_edge(alpha: f64, u: f64, v: f64) -> Result<f64, KernelError> {
    if !(u > 0.0 && v > 0.0) {
        return Err(KernelError::Domain(format!("need u, v > 0, got ({u}, {v})")));
    }
    let rel = (u - v).abs() / u.abs().max(v.abs()).max(1.0);
    if rel < CONFLUENT_TOL {
        return hard_edge_diagonal(alpha, 0.5 * (u + v));
    }
    let su = u.sqrt();
    let sv = v.sqrt();
    let ju = bessel_j_real(alpha, su)?;
    let jv = bessel_j_real(alpha, sv)?;
    let jpu = bessel_j_prime(alpha, Complex64::new(su, 0.0))?.re;
    let jpv = bessel_j_prime(alpha, Complex64::new(sv, 0.0))?.re;
    Ok((ju * sv * jpv - jv * su * jpu) / (2.0 * (u - v)))
}

// J_alpha(u, u) = (1/4)[J'_alpha(s)^2 + (1 - alpha^2/u) J_alpha(s)^2], s = sqrt(u)
fn hard_edge_diagonal(alpha: f64, u: f64) -> Result<f64, KernelError> {
    let s = u.sqrt();
    let j = bessel_j_real(alpha, s)?;
    let jp = bessel_j_prime(alpha, Complex64::new(s, 0.0))?.re;
    Ok(0.25 * (jp * jp + (1.0 - alpha * alpha / u) * j * j))
}

/// Sine kernel `sin(pi(u-v)) / (pi(u-v))`, diagonal value 1.
pub fn eval_sine(u: f64, v: f64) -> f64 {
    let d = u - v;
    if d.abs() < 1e-9 {
        let t = std::f64::consts::PI * d;
        return 1.0 - t * t / 6.0;
    }
    (std::f64::consts::PI * d).sin() / (std::f64::consts::PI * d)
}

/// `u^{-alpha} v^{-alpha} J^o_alpha(u, v)` continued to all real `u, v != 0`
/// through the entire functions `x^{-nu} J_nu(x)`.
pub fn origin_bessel_weighted(alpha: f64, u: f64, v: f64) -> Result<f64, KernelError> {
    if u == 0.0 || v == 0.0 {
        return Err(KernelError::Domain("u, v must be non-zero".to_string()));
    }
    let pi = std::f64::consts::PI;
    let rel = (u - v).abs() / u.abs().max(v.abs()).max(1.0);
    if rel < CONFLUENT_TOL {
        let m = 0.5 * (u + v);
        let d = origin_bessel_diagonal(alpha, m.abs())?;
        return Ok(d * m.abs().powf(-2.0 * alpha));
    }
    let hp_u = entire_j_over_power(alpha + 0.5, pi * u.abs())?;
    let hm_u = entire_j_over_power(alpha - 0.5, pi * u.abs())?;
    let hp_v = entire_j_over_power(alpha + 0.5, pi * v.abs())?;
    let hm_v = entire_j_over_power(alpha - 0.5, pi * v.abs())?;
    // pi sqrt(uv) (pi u)^{a+1/2} (pi v)^{a-1/2} -> pi^{2a+1} u^{a+1} v^{a},
    // then the u^{-a} v^{-a} weights cancel the powers: the continued kernel
    // is pi^{2a+1} [u H+(u)H-(v) - v H-(u)H+(v)] / (2(u-v)), H entire even.
    let scale = pi.powf(2.0 * alpha + 1.0);
    Ok(scale * (u * hp_u * hm_v - v * hm_u * hp_v) / (2.0 * (u - v)))
}

// x^{-nu} J_nu(x) for x > 0 (even entire function of x)
fn entire_j_over_power(nu: f64, x: f64) -> Result<f64, KernelError> {
    Ok(bessel_j_real(nu, x)? * x.powf(-nu))
}

/// Determinant of a square kernel matrix by partially pivoted elimination.
///
/// Near-coincident evaluation points make these matrices nearly singular by
/// design; scaled pivoting keeps the elimination honest there.
pub fn correlation_det(matrix: &[Vec<f64>]) -> Result<f64, KernelError> {
    let m = matrix.len();
    for row in matrix {
        if row.len() != m {
            return Err(KernelError::Domain("matrix must be square".to_string()));
        }
    }
    if m == 0 {
        return Ok(1.0);
    }
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut det = 1.0_f64;
    for col in 0..m {
        let (pivot_row, pivot_val) = (col..m)
            .map(|r| (r, a[r][col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if pivot_val == 0.0 {
            return Ok(0.0);
        }
        if pivot_row != col {
            a.swap(pivot_row, col);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..m {
            let factor = a[r][col] / a[col][col];
            for c in col..m {
                a[r][c] -= factor * a[col][c];
            }
        }
    }
    Ok(det)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn alpha_zero_reduces_to_sine_kernel() {
        let pts = [0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5];
        for &u in &pts {
            for &v in &pts {
                let bessel = eval_origin_bessel(0.0, u, v).unwrap();
                let sine = eval_sine(u, v);
                assert!(
                    (bessel - sine).abs() < 1e-12,
                    "u={u} v={v}: {bessel} vs {sine}"
                );
            }
        }
        assert_abs_diff_eq!(eval_origin_bessel(0.0, 1.0, 1.0).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn hard_edge_small_argument_series_oracle() {
        // series oracle: J_{1/2}(s) = sqrt(2/(pi s)) sin s truncated by hand
        let alpha = 0.5;
        let u: f64 = 0.04;
        let s = u.sqrt();
        let j = (2.0 / (std::f64::consts::PI * s)).sqrt() * s.sin();
        let jp = (2.0 / (std::f64::consts::PI * s)).sqrt() * (s.cos() - 0.5 * s.sin() / s);
        let oracle = 0.25 * (jp * jp + (1.0 - alpha * alpha / u) * j * j);
        let val = eval_hard_edge(alpha, u, u).unwrap();
        assert_abs_diff_eq!(val, oracle, epsilon = 1e-12);
    }

    #[test]
    fn confluent_limits_bracket_diagonal() {
        for &alpha in &[0.0, 0.5, 1.0, -0.25] {
            for &u in &[0.3, 1.0, 2.2] {
                let d = eval_origin_bessel(alpha, u, u).unwrap();
                let lo = eval_origin_bessel(alpha, u, u * (1.0 - 1e-7)).unwrap();
                let hi = eval_origin_bessel(alpha, u, u * (1.0 + 1e-7)).unwrap();
                assert!((lo - d).abs() < 1e-6 && (hi - d).abs() < 1e-6);
                let min = lo.min(hi) - 1e-6;
                let max = lo.max(hi) + 1e-6;
                assert!(d >= min && d <= max);
            }
        }
    }

    #[test]
    fn determinant_base_cases() {
        assert_abs_diff_eq!(correlation_det(&[vec![3.5]]).unwrap(), 3.5, epsilon = 0.0);
        let two = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
        assert_abs_diff_eq!(correlation_det(&two).unwrap(), -2.0, epsilon = 1e-14);
        let repeated = vec![vec![1.0, 2.0], vec![1.0, 2.0]];
        assert_abs_diff_eq!(correlation_det(&repeated).unwrap(), 0.0, epsilon = 1e-14);
        assert!(correlation_det(&[vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn gram_matrices_are_positive_semidefinite() {
        // leading principal minors of the kernel Gram matrix stay >= -1e-10
        let alpha = 0.7;
        let pts: Vec<f64> = (1..=8).map(|i| 0.35 * i as f64).collect();
        for m in 1..=pts.len() {
            let gram: Vec<Vec<f64>> = (0..m)
                .map(|i| {
                    (0..m)
                        .map(|j| eval_origin_bessel(alpha, pts[i], pts[j]).unwrap())
                        .collect()
                })
                .collect();
            assert!(correlation_det(&gram).unwrap() >= -1e-10);
        }
    }

    #[test]
    fn weighted_continuation_matches_positive_quadrant() {
        for &alpha in &[0.5, 1.0, -0.25] {
            for &(u, v) in &[(0.5, 1.25), (0.8, 2.0)] {
                let direct =
                    eval_origin_bessel(alpha, u, v).unwrap() * u.powf(-alpha) * v.powf(-alpha);
                let continued = origin_bessel_weighted(alpha, u, v).unwrap();
                assert_abs_diff_eq!(direct, continued, epsilon = 1e-11);
            }
        }
    }

    proptest! {
        #[test]
        fn origin_kernel_is_symmetric(u in 0.05f64..3.0, v in 0.05f64..3.0, ai in 0usize..4) {
            let alpha = [0.0, 0.5, 1.0, -0.25][ai];
            let a = eval_origin_bessel(alpha, u, v).unwrap();
            let b = eval_origin_bessel(alpha, v, u).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }
}
