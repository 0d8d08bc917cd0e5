//! Confining potential `V` and the varying weight `w_n(x) = |x|^{2a} e^{-n V(x)}`.
//!
//! Only polynomial potentials of even degree with positive leading
//! coefficient are admitted; weights live in log space throughout the crate
//! because `e^{-n V}` underflows long before the polynomial layers stop
//! needing it.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum WeightError {
    #[error("log weight has a pole at x = 0 for alpha = {0} < 0")]
    PoleAtZero(f64),
    #[error("non-finite evaluation point")]
    NonFiniteArgument,
}

/// Real polynomial potential, coefficient of `x^k` at index `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    pub coefficients: Vec<f64>,
}

impl Potential {
    pub fn new(coefficients: Vec<f64>) -> Self {
        Potential { coefficients }
    }

    /// Convenience constructor for `x^2`.
    pub fn quadratic() -> Self {
        Potential::new(vec![0.0, 0.0, 1.0])
    }

    pub fn degree(&self) -> usize {
        self.coefficients
            .iter()
            .rposition(|&c| c != 0.0)
            .unwrap_or(0)
    }

    pub fn leading_coefficient(&self) -> f64 {
        self.coefficients.get(self.degree()).copied().unwrap_or(0.0)
    }

    pub fn is_even(&self) -> bool {
        self.coefficients
            .iter()
            .enumerate()
            .all(|(k, &c)| k % 2 == 0 || c == 0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_derivative(&self, x: f64) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, &c)| acc * x + k as f64 * c)
    }

    /// Divided difference `(V'(s) - V'(x)) / (s - x)`, evaluated without the
    /// removable singularity (polynomial in `s` and `x`).
    pub fn derivative_divided_difference(&self, s: f64, x: f64) -> f64 {
        // V'(t) = sum_k k c_k t^{k-1}; (s^m - x^m)/(s - x) = sum_{j<m} s^j x^{m-1-j}
        let mut acc = 0.0;
        for (k, &c) in self.coefficients.iter().enumerate().skip(2) {
            let m = k - 1;
            let mut pow_sum = 0.0;
            let mut sj = 1.0;
            for j in 0..m {
                pow_sum += sj * x.powi((m - 1 - j) as i32);
                sj *= s;
            }
            acc += k as f64 * c * pow_sum;
        }
        acc
    }

    pub fn describe(&self) -> String {
        let terms: Vec<String> = self
            .coefficients
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(k, &c)| format!("{c}*x^{k}"))
            .collect();
        if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join(" + ")
        }
    }
}

/// Ensemble parameters: singularity exponent `alpha > -1/2` and matrix size
/// `n >= 1` (the weight scale).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleParams {
    pub alpha: f64,
    pub n: usize,
}

impl EnsembleParams {
    pub fn new(alpha: f64, n: usize) -> Self {
        EnsembleParams { alpha, n }
    }
}

pub fn eval_potential(p: &Potential, x: f64) -> f64 {
    p.eval(x)
}

pub fn eval_potential_derivative(p: &Potential, x: f64) -> f64 {
    p.eval_derivative(x)
}

/// `log w_n(x) = 2 alpha log|x| - n V(x)`.
///
/// At `x = 0`: returns `-inf` (weight zero) for `alpha > 0`, an error for
/// `alpha < 0` (a pole), and plain `-n V(0)` for `alpha = 0`.
pub fn eval_log_weight(p: &Potential, e: &EnsembleParams, x: f64) -> Result<f64, WeightError> {
    if !x.is_finite() {
        return Err(WeightError::NonFiniteArgument);
    }
    if x == 0.0 && e.alpha != 0.0 {
        if e.alpha < 0.0 {
            return Err(WeightError::PoleAtZero(e.alpha));
        }
        return Ok(f64::NEG_INFINITY);
    }
    let log_sing = if e.alpha == 0.0 {
        0.0
    } else {
        2.0 * e.alpha * x.abs().ln()
    };
    Ok(log_sing - e.n as f64 * p.eval(x))
}

/// Admissibility report; an empty list means the pair is usable.
pub fn validate(p: &Potential, e: &EnsembleParams) -> Vec<String> {
    let mut report = Vec::new();
    if p.coefficients.iter().any(|c| !c.is_finite()) {
        report.push("potential coefficients must all be finite".to_string());
    }
    let deg = p.degree();
    if deg < 2 {
        report.push("degree must be at least 2".to_string());
    }
    if deg % 2 != 0 {
        report.push("even degree required".to_string());
    }
    if p.leading_coefficient() <= 0.0 {
        report.push("leading coefficient must be positive".to_string());
    }
    if !(e.alpha > -0.5) {
        report.push("alpha must exceed -1/2".to_string());
    }
    if e.n < 1 {
        report.push("n must be at least 1".to_string());
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn direct_values() {
        let v = Potential::quadratic();
        assert_eq!(v.eval(0.0), 0.0);
        assert_eq!(v.eval(2.0), 4.0);
        assert_eq!(v.eval_derivative(2.0), 4.0);
        let quartic = Potential::new(vec![0.0, 0.0, -1.0, 0.0, 0.25]);
        assert_abs_diff_eq!(quartic.eval(1.0), -0.75, epsilon = 1e-15);
    }

    #[test]
    fn log_weight_cases() {
        let v = Potential::quadratic();
        let e = EnsembleParams::new(0.0, 1);
        assert_abs_diff_eq!(eval_log_weight(&v, &e, 1.0).unwrap(), -1.0, epsilon = 1e-15);

        let e_pos = EnsembleParams::new(1.0, 4);
        assert_eq!(eval_log_weight(&v, &e_pos, 0.0).unwrap(), f64::NEG_INFINITY);

        let e_neg = EnsembleParams::new(-0.25, 4);
        assert!(eval_log_weight(&v, &e_neg, 0.0).is_err());
    }

    #[test]
    fn validation_report() {
        let ok = validate(&Potential::quadratic(), &EnsembleParams::new(0.5, 8));
        assert!(ok.is_empty());

        let bad_alpha = validate(&Potential::quadratic(), &EnsembleParams::new(-0.5, 8));
        assert!(bad_alpha.iter().any(|m| m.contains("alpha must exceed")));

        let cubic = Potential::new(vec![0.0, 0.0, 0.0, 1.0]);
        let bad_deg = validate(&cubic, &EnsembleParams::new(0.0, 8));
        assert!(bad_deg.iter().any(|m| m.contains("even degree")));
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let v = Potential::new(vec![0.3, 0.0, -1.2, 0.0, 0.5, 0.0, 0.125]);
        let h = 1e-5;
        let mut x = -5.0;
        while x <= 5.0 {
            let fd = (v.eval(x + h) - v.eval(x - h)) / (2.0 * h);
            let an = v.eval_derivative(x);
            let scale = an.abs().max(1.0);
            assert!((fd - an).abs() / scale < 1e-6, "x = {x}");
            x += 0.37;
        }
    }

    proptest! {
        #[test]
        fn even_potential_gives_even_log_weight(x in -8.0f64..8.0, alpha in -0.45f64..3.0) {
            prop_assume!(x != 0.0);
            let v = Potential::new(vec![0.1, 0.0, 0.7, 0.0, 0.05]);
            let e = EnsembleParams { alpha, n: 6 };
            let a = eval_log_weight(&v, &e, x).unwrap();
            let b = eval_log_weight(&v, &e, -x).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }
}
