//! Orthonormal polynomials for the varying weight `|x|^{2a} e^{-nV(x)}`:
//! discretized measure, three-term recurrence by the Stieltjes procedure,
//! and the Christoffel-Darboux kernel in its quotient, sum and RH-matrix
//! forms.
//!
//! The discrete measure lives on a truncated interval with a power
//! substitution at the origin absorbing `|x|^{2a}`; all weights are carried
//! in log space and shifted before exponentiation, so `n V` in the hundreds
//! is harmless. Moment determinants are never formed.

use crate::potential::{eval_log_weight, EnsembleParams, Potential};
use crate::quad::GaussRule;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OrthoError {
    #[error("quadrature refinement did not converge ({0} panels per side)")]
    RefinementFailed(usize),
    #[error("recurrence coefficient c_{k} lost positivity (value {value:.3e})")]
    PositivityLoss { k: usize, value: f64 },
    #[error("degree {requested} exceeds table size {available}")]
    DegreeOutOfRange { requested: usize, available: usize },
    #[error("evaluation point x = {0} outside the safe range |x| <= {1}")]
    EvalOutOfRange(f64, f64),
    #[error("kernel pole: x = 0 with alpha = {0} < 0")]
    KernelPole(f64),
    #[error("invalid record: {0}")]
    BadRecord(String),
}

/// Discretization of the measure `w_n(x) dx` on a truncated interval.
#[derive(Debug, Clone)]
pub struct WeightedQuadrature {
    /// Strictly increasing nodes.
    pub nodes: Vec<f64>,
    /// `log(rule weight * w_n(node))` per node.
    pub log_weights: Vec<f64>,
    /// Truncation bound `X`: the measure on `|x| > X` is negligible.
    pub truncation: f64,
    /// Panels per half-axis at convergence.
    pub panels_per_side: usize,
    /// Power substitution exponent used near the origin.
    pub power_exponent: u32,
}

// exponent of x^{2K + 2 max(a,0)} w_n(x) on the positive axis
fn tail_exponent(p: &Potential, e: &EnsembleParams, k_max: usize, x: f64) -> f64 {
    let pow = 2.0 * k_max as f64 + 2.0 * e.alpha.max(0.0);
    pow * x.ln() - e.n as f64 * p.eval(x)
}

fn truncation_bound(p: &Potential, e: &EnsembleParams, k_max: usize) -> f64 {
    // crude scan for the maximizer, then push out until the integrand has
    // dropped by e^{-85} relative to its peak
    let mut best = f64::NEG_INFINITY;
    let mut x_peak = 1e-2;
    let mut x = 1e-2;
    while x < 1e6 {
        let v = tail_exponent(p, e, k_max, x);
        if v > best {
            best = v;
            x_peak = x;
        }
        x *= 1.05;
    }
    let mut hi = x_peak;
    while tail_exponent(p, e, k_max, hi) > best - 85.0 {
        hi *= 1.25;
    }
    hi
}

fn power_exponent(alpha: f64) -> u32 {
    let twice = 2.0 * alpha;
    if twice >= 0.0 && twice == twice.round() && (twice as i64) % 2 == 0 {
        return 1; // |x|^{2a} already a smooth polynomial factor
    }
    let mut m = ((5.0 / (2.0 * alpha + 1.0)).ceil() as u32).max(3);
    if m % 2 == 0 {
        m += 1;
    }
    m
}

fn build_rule(
    p: &Potential,
    e: &EnsembleParams,
    x_max: f64,
    m: u32,
    panels: usize,
    gauss: &GaussRule,
) -> WeightedQuadrature {
    let t_max = x_max.powf(1.0 / m as f64);
    let mf = m as f64;
    let nf = e.n as f64;
    let mut half_nodes = Vec::with_capacity(panels * gauss.nodes.len());
    let dt = t_max / panels as f64;
    for panel in 0..panels {
        let t0 = panel as f64 * dt;
        for (gn, gw) in gauss.nodes.iter().zip(&gauss.weights) {
            let t = t0 + 0.5 * dt * (gn + 1.0);
            let x = t.powi(m as i32);
            // measure: exp(2a ln x - nV) * m t^{m-1} dt
            let logw = (0.5 * dt * gw).ln()
                + mf.ln()
                + (mf - 1.0 + 2.0 * e.alpha * mf) * t.ln()
                - nf * p.eval(x);
            half_nodes.push((x, logw));
        }
    }
    let mut nodes = Vec::with_capacity(2 * half_nodes.len());
    let mut log_weights = Vec::with_capacity(2 * half_nodes.len());
    for &(x, lw) in half_nodes.iter().rev() {
        nodes.push(-x);
        log_weights.push(lw);
    }
    for &(x, lw) in &half_nodes {
        nodes.push(x);
        log_weights.push(lw);
    }
    WeightedQuadrature {
        nodes,
        log_weights,
        truncation: x_max,
        panels_per_side: panels,
        power_exponent: m,
    }
}

/// Discretize `w_n(x) dx` well enough that recurrence coefficients through
/// degree `k_max` are stable to 1e-12 under further refinement.
pub fn build_quadrature(
    p: &Potential,
    e: &EnsembleParams,
    k_max: usize,
) -> Result<WeightedQuadrature, OrthoError> {
    assert!(k_max >= 1);
    let x_max = truncation_bound(p, e, k_max);
    let m = power_exponent(e.alpha);
    let gauss = GaussRule::legendre(16);
    let mut panels = 16;
    let mut rule = build_rule(p, e, x_max, m, panels, &gauss);
    let mut table = stieltjes_recurrence(&rule, k_max)?;
    loop {
        if panels > 4096 {
            return Err(OrthoError::RefinementFailed(panels));
        }
        panels *= 2;
        let refined = build_rule(p, e, x_max, m, panels, &gauss);
        let refined_table = stieltjes_recurrence(&refined, k_max)?;
        let mut delta = (refined_table.mu0 - table.mu0).abs() / table.mu0.abs().max(1e-300);
        for k in 0..k_max {
            delta = delta.max((refined_table.diag[k] - table.diag[k]).abs());
            delta = delta.max((refined_table.offdiag[k] - table.offdiag[k]).abs());
        }
        rule = refined;
        if delta < 1e-12 {
            return Ok(rule);
        }
        table = refined_table;
    }
}

/// Three-term recurrence data: `x p_k = c_{k+1} p_{k+1} + d_k p_k + c_k p_{k-1}`.
#[derive(Debug, Clone)]
pub struct RecurrenceTable {
    /// `d_0 .. d_{K-1}`.
    pub diag: Vec<f64>,
    /// `c_1 .. c_K`, all positive.
    pub offdiag: Vec<f64>,
    /// Total mass of the discrete measure.
    pub mu0: f64,
    pub ensemble: EnsembleParams,
    /// Safe evaluation range inherited from the quadrature truncation.
    pub eval_range: f64,
}

/// Stieltjes procedure on the discrete measure: orthonormal vectors over the
/// nodes, never moment determinants.
pub fn stieltjes_recurrence(
    q: &WeightedQuadrature,
    k_max: usize,
) -> Result<RecurrenceTable, OrthoError> {
    let n_nodes = q.nodes.len();
    let lw_max = q.log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = q.log_weights.iter().map(|lw| (lw - lw_max).exp()).collect();
    let s0: f64 = w.iter().sum();
    let mu0 = s0 * lw_max.exp();

    let dot = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).zip(&w).map(|((x, y), wi)| wi * x * y).sum()
    };

    let mut v_prev = vec![0.0; n_nodes];
    let mut v_cur = vec![1.0 / s0.sqrt(); n_nodes];
    let mut diag = Vec::with_capacity(k_max);
    let mut offdiag = Vec::with_capacity(k_max);
    let mut c_k = 0.0;
    for k in 0..k_max {
        let xv: Vec<f64> = q.nodes.iter().zip(&v_cur).map(|(x, v)| x * v).collect();
        let d_k = dot(&xv, &v_cur);
        diag.push(d_k);
        let mut r: Vec<f64> = xv;
        for i in 0..n_nodes {
            r[i] -= d_k * v_cur[i] + c_k * v_prev[i];
        }
        let norm2 = dot(&r, &r);
        let c_next = norm2.sqrt();
        if !(c_next > 1e-150) || !c_next.is_finite() {
            return Err(OrthoError::PositivityLoss {
                k: k + 1,
                value: norm2,
            });
        }
        offdiag.push(c_next);
        for item in r.iter_mut() {
            *item /= c_next;
        }
        v_prev = std::mem::replace(&mut v_cur, r);
        c_k = c_next;
    }
    Ok(RecurrenceTable {
        diag,
        offdiag,
        mu0,
        ensemble: EnsembleParams { alpha: 0.0, n: 0 },
        eval_range: q.truncation * 1.5,
    })
}

/// Build the full recurrence table for `(V, alpha, n)` through degree `k_max`.
pub fn build_table(
    p: &Potential,
    e: &EnsembleParams,
    k_max: usize,
) -> Result<RecurrenceTable, OrthoError> {
    let q = build_quadrature(p, e, k_max)?;
    let mut t = stieltjes_recurrence(&q, k_max)?;
    t.ensemble = *e;
    Ok(t)
}

impl RecurrenceTable {
    pub fn max_degree(&self) -> usize {
        self.diag.len()
    }

    fn check_degree(&self, k: usize) -> Result<(), OrthoError> {
        if k > self.max_degree() {
            return Err(OrthoError::DegreeOutOfRange {
                requested: k,
                available: self.max_degree(),
            });
        }
        Ok(())
    }

    fn check_point(&self, x: f64) -> Result<(), OrthoError> {
        if x.abs() > self.eval_range {
            return Err(OrthoError::EvalOutOfRange(x, self.eval_range));
        }
        Ok(())
    }

    /// Values `p_0(x) .. p_k(x)` by forward recurrence.
    pub fn eval_all(&self, k: usize, x: f64) -> Result<Vec<f64>, OrthoError> {
        self.check_degree(k)?;
        self.check_point(x)?;
        let mut vals = Vec::with_capacity(k + 1);
        let mut p_prev = 0.0;
        let mut p_cur = 1.0 / self.mu0.sqrt();
        vals.push(p_cur);
        for j in 0..k {
            let c_next = self.offdiag[j];
            let c_j = if j == 0 { 0.0 } else { self.offdiag[j - 1] };
            let p_next = ((x - self.diag[j]) * p_cur - c_j * p_prev) / c_next;
            vals.push(p_next);
            p_prev = p_cur;
            p_cur = p_next;
        }
        Ok(vals)
    }

    /// `p_k(x)`.
    pub fn eval_orthopoly(&self, k: usize, x: f64) -> Result<f64, OrthoError> {
        Ok(*self.eval_all(k, x)?.last().unwrap())
    }

    /// `(p_k(x), p'_k(x))` from the differentiated recurrence.
    pub fn eval_with_derivative(&self, k: usize, x: f64) -> Result<(f64, f64), OrthoError> {
        self.check_degree(k)?;
        self.check_point(x)?;
        let mut p_prev = 0.0;
        let mut p_cur = 1.0 / self.mu0.sqrt();
        let mut dp_prev = 0.0;
        let mut dp_cur = 0.0;
        for j in 0..k {
            let c_next = self.offdiag[j];
            let c_j = if j == 0 { 0.0 } else { self.offdiag[j - 1] };
            let p_next = ((x - self.diag[j]) * p_cur - c_j * p_prev) / c_next;
            let dp_next = ((x - self.diag[j]) * dp_cur + p_cur - c_j * dp_prev) / c_next;
            p_prev = p_cur;
            p_cur = p_next;
            dp_prev = dp_cur;
            dp_cur = dp_next;
        }
        Ok((p_cur, dp_cur))
    }

    /// Leading coefficient `gamma_k = mu0^{-1/2} prod_{j<=k} c_j^{-1}`.
    pub fn leading_coeff(&self, k: usize) -> Result<f64, OrthoError> {
        self.check_degree(k)?;
        let mut g = 1.0 / self.mu0.sqrt();
        for j in 0..k {
            g /= self.offdiag[j];
        }
        Ok(g)
    }

    fn sqrt_weight_product(&self, p: &Potential, x: f64, y: f64) -> Result<f64, OrthoError> {
        let e = &self.ensemble;
        if e.alpha < 0.0 && (x == 0.0 || y == 0.0) {
            return Err(OrthoError::KernelPole(e.alpha));
        }
        let lx = eval_log_weight(p, e, x).map_err(|_| OrthoError::KernelPole(e.alpha))?;
        let ly = eval_log_weight(p, e, y).map_err(|_| OrthoError::KernelPole(e.alpha))?;
        Ok((0.5 * (lx + ly)).exp())
    }

    /// Christoffel-Darboux kernel `K_n(x, y)` in quotient form, switching to
    /// the confluent derivative form near the diagonal.
    pub fn cd_kernel(&self, p: &Potential, x: f64, y: f64) -> Result<f64, OrthoError> {
        let n = self.ensemble.n;
        self.check_degree(n)?;
        let w = self.sqrt_weight_product(p, x, y)?;
        let scale = x.abs().max(y.abs()).max(1.0);
        if (x - y).abs() < 1e-6 * scale {
            let m = 0.5 * (x + y);
            let (pn, dpn) = self.eval_with_derivative(n, m)?;
            let (pm, dpm) = self.eval_with_derivative(n - 1, m)?;
            let c_n = self.offdiag[n - 1];
            return Ok(w * c_n * (dpn * pm - dpm * pn));
        }
        let px = self.eval_all(n, x)?;
        let py = self.eval_all(n, y)?;
        let c_n = self.offdiag[n - 1];
        Ok(w * c_n * (px[n] * py[n - 1] - px[n - 1] * py[n]) / (x - y))
    }

    /// Same kernel via direct summation `sum_{j<n} p_j(x) p_j(y)`.
    pub fn cd_kernel_sum(&self, p: &Potential, x: f64, y: f64) -> Result<f64, OrthoError> {
        let n = self.ensemble.n;
        self.check_degree(n)?;
        let w = self.sqrt_weight_product(p, x, y)?;
        let px = self.eval_all(n - 1, x)?;
        let py = self.eval_all(n - 1, y)?;
        Ok(w * px.iter().zip(&py).map(|(a, b)| a * b).sum::<f64>())
    }

    /// Kernel through the first column of the RH matrix `Y`:
    /// `Y_11 = gamma_n^{-1} p_n`, `Y_21 = -2 pi i gamma_{n-1} p_{n-1}`, and
    /// `K_n = -(1/2 pi i) sqrt(w(x) w(y)) (Y_11(x) Y_21(y) - Y_21(x) Y_11(y)) / (x - y)`.
    pub fn kernel_via_y(&self, p: &Potential, x: f64, y: f64) -> Result<f64, OrthoError> {
        let n = self.ensemble.n;
        self.check_degree(n)?;
        let w = self.sqrt_weight_product(p, x, y)?;
        let g_n = self.leading_coeff(n)?;
        let g_nm1 = self.leading_coeff(n - 1)?;
        let minus_two_pi_i = Complex64::new(0.0, -2.0 * std::f64::consts::PI);
        let scale = x.abs().max(y.abs()).max(1.0);
        let cross = if (x - y).abs() < 1e-6 * scale {
            let m = 0.5 * (x + y);
            let (pn, dpn) = self.eval_with_derivative(n, m)?;
            let (pm, dpm) = self.eval_with_derivative(n - 1, m)?;
            let y11 = Complex64::new(pn / g_n, 0.0);
            let dy11 = Complex64::new(dpn / g_n, 0.0);
            let y21 = minus_two_pi_i * g_nm1 * pm;
            let dy21 = minus_two_pi_i * g_nm1 * dpm;
            dy11 * y21 - dy21 * y11
        } else {
            let y11_x = Complex64::new(self.eval_orthopoly(n, x)? / g_n, 0.0);
            let y11_y = Complex64::new(self.eval_orthopoly(n, y)? / g_n, 0.0);
            let y21_x = minus_two_pi_i * g_nm1 * self.eval_orthopoly(n - 1, x)?;
            let y21_y = minus_two_pi_i * g_nm1 * self.eval_orthopoly(n - 1, y)?;
            (y11_x * y21_y - y21_x * y11_y) / (x - y)
        };
        let k = -cross / Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        Ok(w * k.re)
    }

    /// Structured-text record for caching between CLI runs.
    pub fn to_record(&self) -> String {
        let fmt = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x:.17e}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        format!(
            "alpha = {:.17e}\nn = {}\nmu0 = {:.17e}\neval_range = {:.17e}\ndiag = {}\noffdiag = {}\n",
            self.ensemble.alpha,
            self.ensemble.n,
            self.mu0,
            self.eval_range,
            fmt(&self.diag),
            fmt(&self.offdiag)
        )
    }

    pub fn from_record(text: &str) -> Result<Self, OrthoError> {
        let mut alpha = None;
        let mut n = None;
        let mut mu0 = None;
        let mut eval_range = None;
        let mut diag = None;
        let mut offdiag = None;
        let parse_vec = |v: &str| -> Result<Vec<f64>, OrthoError> {
            v.split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| OrthoError::BadRecord(e.to_string()))
                })
                .collect()
        };
        for line in text.lines() {
            let Some((key, value)) = line.split_once('=') else {
                continue;
            };
            let key = key.trim();
            let value = value.trim();
            match key {
                "alpha" => {
                    alpha = Some(value.parse().map_err(|_| OrthoError::BadRecord(line.into()))?)
                }
                "n" => n = Some(value.parse().map_err(|_| OrthoError::BadRecord(line.into()))?),
                "mu0" => mu0 = Some(value.parse().map_err(|_| OrthoError::BadRecord(line.into()))?),
                "eval_range" => {
                    eval_range =
                        Some(value.parse().map_err(|_| OrthoError::BadRecord(line.into()))?)
                }
                "diag" => diag = Some(parse_vec(value)?),
                "offdiag" => offdiag = Some(parse_vec(value)?),
                _ => return Err(OrthoError::BadRecord(format!("unknown key {key}"))),
            }
        }
        let table = RecurrenceTable {
            diag: diag.ok_or_else(|| OrthoError::BadRecord("missing diag".into()))?,
            offdiag: offdiag.ok_or_else(|| OrthoError::BadRecord("missing offdiag".into()))?,
            mu0: mu0.ok_or_else(|| OrthoError::BadRecord("missing mu0".into()))?,
            ensemble: EnsembleParams {
                alpha: alpha.ok_or_else(|| OrthoError::BadRecord("missing alpha".into()))?,
                n: n.ok_or_else(|| OrthoError::BadRecord("missing n".into()))?,
            },
            eval_range: eval_range
                .ok_or_else(|| OrthoError::BadRecord("missing eval_range".into()))?,
        };
        if table.diag.len() != table.offdiag.len() {
            return Err(OrthoError::BadRecord("diag/offdiag length mismatch".into()));
        }
        Ok(table)
    }
}
