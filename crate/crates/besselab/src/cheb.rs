//! Chebyshev expansions on `[-1, 1]` and the closed-form integrals used by
//! the equilibrium layer.
//!
//! Everything the equilibrium measure needs from its density factor reduces
//! to integrals of `sqrt(1-t^2) T_k(t)` against smooth kernels. Three of
//! those have exact forms collected here:
//!
//! * the plain weighted moment (only `k = 0, 2` survive),
//! * the tail mass from `t` to `1`,
//! * the logarithmic potential `(1/pi) \int log|x-t| sqrt(1-t^2) T_k(t) dt`,
//!   obtained from the bilinear expansion
//!   `log|x-t| = -log 2 - 2 sum_m T_m(x) T_m(t) / m`.

/// Chebyshev interpolation coefficients of `f` at `n` first-kind nodes.
///
/// Returns `c` with `f(t) = sum_k c[k] T_k(t)`; exact when `f` is a
/// polynomial of degree `< n`.
pub fn coefficients<F: FnMut(f64) -> f64>(mut f: F, n: usize) -> Vec<f64> {
    assert!(n >= 1);
    let nf = n as f64;
    let vals: Vec<f64> = (0..n)
        .map(|j| {
            let theta = std::f64::consts::PI * (j as f64 + 0.5) / nf;
            f(theta.cos())
        })
        .collect();
    (0..n)
        .map(|k| {
            let scale = if k == 0 { 1.0 / nf } else { 2.0 / nf };
            let kf = k as f64;
            scale
                * vals
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v * (kf * std::f64::consts::PI * (j as f64 + 0.5) / nf).cos())
                    .sum::<f64>()
        })
        .collect()
}

/// Clenshaw evaluation of `sum_k c[k] T_k(t)`.
pub fn eval(c: &[f64], t: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &ck in c.iter().rev() {
        let b0 = 2.0 * t * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    b1 - t * b2
}

fn t_values(t: f64, up_to: usize) -> Vec<f64> {
    let mut tv = Vec::with_capacity(up_to + 1);
    tv.push(1.0);
    if up_to >= 1 {
        tv.push(t);
    }
    for k in 2..=up_to {
        let next = 2.0 * t * tv[k - 1] - tv[k - 2];
        tv.push(next);
    }
    tv
}

/// `\int_{-1}^{1} sqrt(1-t^2) (sum c_k T_k) dt = pi (c_0/2 - c_2/4)`.
pub fn weighted_mass(c: &[f64]) -> f64 {
    let c0 = c.first().copied().unwrap_or(0.0);
    let c2 = c.get(2).copied().unwrap_or(0.0);
    std::f64::consts::PI * (0.5 * c0 - 0.25 * c2)
}

/// `\int_{t}^{1} sqrt(1-s^2) (sum c_k T_k(s)) ds` in closed form.
pub fn weighted_tail(c: &[f64], t: f64) -> f64 {
    let theta = t.clamp(-1.0, 1.0).acos();
    let mut acc = 0.0;
    for (k, &ck) in c.iter().enumerate() {
        if ck == 0.0 {
            continue;
        }
        acc += ck * tail_basis(k, theta);
    }
    acc
}

// S_k(theta) = \int_0^theta sin^2(phi) cos(k phi) dphi.
fn tail_basis(k: usize, theta: f64) -> f64 {
    match k {
        0 => 0.5 * theta - 0.25 * (2.0 * theta).sin(),
        2 => 0.25 * (2.0 * theta).sin() - (4.0 * theta).sin() / 16.0 - 0.25 * theta,
        k => {
            let kf = k as f64;
            0.5 * ((kf * theta).sin() / kf
                - 0.5 * (((kf + 2.0) * theta).sin() / (kf + 2.0)
                    + ((kf - 2.0) * theta).sin() / (kf - 2.0)))
        }
    }
}

/// `(1/pi) \int_{-1}^{1} log|x-t| sqrt(1-t^2) (sum c_k T_k(t)) dt` for
/// `x` inside `[-1, 1]`, in closed form.
pub fn log_potential(c: &[f64], x: f64) -> f64 {
    let tv = t_values(x, c.len() + 2);
    let ln2 = std::f64::consts::LN_2;
    let mut acc = 0.0;
    for (k, &ck) in c.iter().enumerate() {
        if ck == 0.0 {
            continue;
        }
        let ik = match k {
            0 => 0.5 * x * x - 0.25 - 0.5 * ln2,
            1 => x * x * x / 3.0 - 0.5 * x,
            2 => 0.25 * ln2 - 0.25 * tv[2] + tv[4] / 16.0,
            k => {
                let kf = k as f64;
                -tv[k] / (2.0 * kf) + tv[k + 2] / (4.0 * (kf + 2.0))
                    + tv[k - 2] / (4.0 * (kf - 2.0))
            }
        };
        acc += ck * ik;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::adaptive_r;
    use approx::assert_abs_diff_eq;

    #[test]
    fn coefficients_recover_polynomials_exactly() {
        // 3 T_4 - 2 T_1 + 0.5 T_0, written out as a plain polynomial
        let f = |t: f64| 3.0 * (8.0 * t.powi(4) - 8.0 * t * t + 1.0) - 2.0 * t + 0.5;
        let c = coefficients(f, 6);
        assert_abs_diff_eq!(c[0], 0.5, epsilon = 1e-13);
        assert_abs_diff_eq!(c[1], -2.0, epsilon = 1e-13);
        assert_abs_diff_eq!(c[4], 3.0, epsilon = 1e-13);
        assert_abs_diff_eq!(eval(&c, 0.3), f(0.3), epsilon = 1e-13);
    }

    #[test]
    fn weighted_tail_matches_quadrature() {
        let c = [0.7, -0.3, 0.2, 0.05, 0.4];
        for &t in &[-0.9, -0.2, 0.0, 0.55, 0.99] {
            let oracle = adaptive_r(
                &|s: f64| (1.0 - s * s).max(0.0).sqrt() * eval(&c, s),
                t,
                1.0,
                1e-13,
            );
            assert_abs_diff_eq!(weighted_tail(&c, t), oracle, epsilon = 1e-11);
        }
        assert_abs_diff_eq!(weighted_tail(&c, -1.0), weighted_mass(&c), epsilon = 1e-13);
    }

    #[test]
    fn log_potential_matches_singular_quadrature() {
        let c = [1.1, 0.4, -0.25, 0.0, 0.15, -0.07];
        for &x in &[-0.8, -0.3, 0.1, 0.62] {
            // split the log singularity and integrate each side adaptively
            let f = |t: f64| {
                let d = (x - t).abs();
                if d == 0.0 {
                    return 0.0;
                }
                d.ln() * (1.0 - t * t).max(0.0).sqrt() * eval(&c, t)
            };
            let oracle =
                (adaptive_r(&f, -1.0, x, 1e-13) + adaptive_r(&f, x, 1.0, 1e-13)) / std::f64::consts::PI;
            assert_abs_diff_eq!(log_potential(&c, x), oracle, epsilon = 1e-10);
        }
    }
}
