//! Equilibrium measure of a polynomial potential in the one-band case,
//! together with the g-function, the phi-function and the conformal map `f`
//! at the origin.
//!
//! The density is `psi(x) = (1/2pi) sqrt((B-x)(x-A)) h(x)` with `h` a
//! polynomial whenever `V` is one; `h` is stored as an exact Chebyshev
//! expansion on the band, which makes the total mass, tail masses and the
//! in-band logarithmic potential available in closed form (see [`crate::cheb`]).
//! The endpoints solve the classical pair of moment conditions for `V'` by a
//! damped Newton iteration.

use crate::cheb;
use crate::potential::Potential;
use crate::quad::{adaptive_c, adaptive_r, GaussRule};
use crate::Side;
use num_complex::Complex64;
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EquilibriumError {
    #[error("endpoint iteration did not converge: {0}")]
    NewtonDivergence(String),
    #[error("configuration rejected, not a regular one-band measure: {0}")]
    NotOneBand(String),
    #[error("density at the origin is not positive (psi(0) = {0:.3e})")]
    DensityVanishesAtOrigin(f64),
    #[error("invalid support: {0}")]
    InvalidSupport(String),
    #[error("evaluation point outside domain: {0}")]
    OutsideDomain(String),
    #[error("boundary value on the cut requires a side flag")]
    SideRequired,
}

/// Ordered disjoint closed bands `[b_{j-1}, a_j]`; the complementary bounded
/// intervals are the gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportBands {
    pub bands: Vec<(f64, f64)>,
}

impl SupportBands {
    pub fn new(bands: Vec<(f64, f64)>) -> Result<Self, EquilibriumError> {
        if bands.is_empty() {
            return Err(EquilibriumError::InvalidSupport("no bands".to_string()));
        }
        for &(a, b) in &bands {
            if !(a < b) || !a.is_finite() || !b.is_finite() {
                return Err(EquilibriumError::InvalidSupport(format!(
                    "degenerate band [{a}, {b}]"
                )));
            }
        }
        for w in bands.windows(2) {
            if !(w[0].1 < w[1].0) {
                return Err(EquilibriumError::InvalidSupport(
                    "bands must be strictly increasing and disjoint".to_string(),
                ));
            }
        }
        Ok(SupportBands { bands })
    }

    pub fn single(a: f64, b: f64) -> Result<Self, EquilibriumError> {
        SupportBands::new(vec![(a, b)])
    }

    /// Number of gaps `N`.
    pub fn n_gaps(&self) -> usize {
        self.bands.len() - 1
    }

    pub fn gap(&self, j: usize) -> (f64, f64) {
        (self.bands[j].1, self.bands[j + 1].0)
    }

    pub fn left_edge(&self) -> f64 {
        self.bands[0].0
    }

    pub fn right_edge(&self) -> f64 {
        self.bands[self.bands.len() - 1].1
    }

    pub fn band_containing(&self, x: f64) -> Option<usize> {
        self.bands.iter().position(|&(a, b)| x >= a && x <= b)
    }

    pub fn in_closed_support(&self, x: f64) -> bool {
        self.band_containing(x).is_some()
    }

    /// All `2(N+1)` endpoints in increasing order.
    pub fn endpoints(&self) -> Vec<f64> {
        self.bands.iter().flat_map(|&(a, b)| [a, b]).collect()
    }
}

/// One-band equilibrium data: support, Chebyshev factor, multiplier and the
/// density at the origin.
#[derive(Debug, Clone)]
pub struct EquilibriumData {
    pub support: SupportBands,
    /// Chebyshev coefficients of `h` per band (one entry in the one-band case).
    pub h_cheb: Vec<Vec<f64>>,
    /// Lagrange multiplier of the variational conditions.
    pub ell: f64,
    /// Gap masses `Omega_j` (empty for one band).
    pub omega: Vec<f64>,
    /// `psi(0) > 0`.
    pub psi0: f64,
}

fn rule96() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| GaussRule::legendre(96))
}

impl EquilibriumData {
    fn band(&self) -> (f64, f64) {
        self.support.bands[0]
    }

    fn mid(&self) -> f64 {
        let (a, b) = self.band();
        0.5 * (a + b)
    }

    fn half(&self) -> f64 {
        let (a, b) = self.band();
        0.5 * (b - a)
    }

    fn to_unit(&self, x: f64) -> f64 {
        (x - self.mid()) / self.half()
    }

    fn h_at(&self, x: f64) -> f64 {
        cheb::eval(&self.h_cheb[0], self.to_unit(x))
    }

    // analytic continuation of h (a polynomial) to complex arguments
    fn h_at_c(&self, z: Complex64) -> Complex64 {
        let t = (z - self.mid()) / self.half();
        let mut b1 = Complex64::new(0.0, 0.0);
        let mut b2 = Complex64::new(0.0, 0.0);
        for &ck in self.h_cheb[0].iter().rev() {
            let b0 = 2.0 * t * b1 - b2 + ck;
            b2 = b1;
            b1 = b0;
        }
        b1 - t * b2
    }

    /// `psi(x)` on the closed support, `0` outside.
    pub fn eval_density(&self, x: f64) -> f64 {
        let (a, b) = self.band();
        if x < a || x > b {
            return 0.0;
        }
        let w = ((b - x) * (x - a)).max(0.0).sqrt();
        w * self.h_at(x) / (2.0 * std::f64::consts::PI)
    }

    /// Total mass `\int psi`, in closed form; equals 1 for a solved measure.
    pub fn mass(&self) -> f64 {
        let half = self.half();
        half * half / (2.0 * std::f64::consts::PI) * cheb::weighted_mass(&self.h_cheb[0])
    }

    /// `\int_x^{B} psi(s) ds` (clamped outside the band).
    pub fn tail_mass(&self, x: f64) -> f64 {
        let (a, b) = self.band();
        if x <= a {
            return self.mass();
        }
        if x >= b {
            return 0.0;
        }
        let half = self.half();
        half * half / (2.0 * std::f64::consts::PI)
            * cheb::weighted_tail(&self.h_cheb[0], self.to_unit(x))
    }

    /// Distribution function `\int_A^x psi(s) ds`.
    pub fn cdf(&self, x: f64) -> f64 {
        (self.mass() - self.tail_mass(x)).clamp(0.0, 1.0)
    }

    /// Logarithmic potential `U(x) = \int log|x-s| psi(s) ds` on the real
    /// line; closed Chebyshev form inside the band, adaptive quadrature
    /// outside.
    pub fn log_potential(&self, x: f64) -> f64 {
        let (a, b) = self.band();
        let half = self.half();
        if x >= a && x <= b {
            return self.mass() * half.ln()
                + 0.5 * half * half * cheb::log_potential(&self.h_cheb[0], self.to_unit(x));
        }
        let mid = self.mid();
        let c = self.h_cheb[0].clone();
        adaptive_r(
            &|theta: f64| {
                let t = theta.cos();
                let s = mid + half * t;
                let st = theta.sin();
                st * st * cheb::eval(&c, t) * (x - s).abs().ln()
            },
            0.0,
            std::f64::consts::PI,
            1e-13,
        ) * half
            * half
            / (2.0 * std::f64::consts::PI)
    }

    /// `g(z) = \int log(z - s) psi(s) ds` with the principal logarithm.
    ///
    /// Real `z <= B` lies on the cut and needs a side flag; the boundary
    /// values combine the real potential with the imaginary tail mass,
    /// `g_pm(x) = U(x) ± i pi mu([x, B])`.
    pub fn eval_g(&self, z: Complex64, side: Option<Side>) -> Result<Complex64, EquilibriumError> {
        let (_, b) = self.band();
        if z.im == 0.0 && z.re <= b {
            let side = side.ok_or(EquilibriumError::SideRequired)?;
            let u = self.log_potential(z.re);
            let tail = self.tail_mass(z.re);
            return Ok(Complex64::new(
                u,
                side.signum() * std::f64::consts::PI * tail,
            ));
        }
        if z.im == 0.0 {
            // z real beyond the right edge: the integrand is positive
            return Ok(Complex64::new(self.log_potential(z.re), 0.0));
        }
        let mid = self.mid();
        let half = self.half();
        let c = self.h_cheb[0].clone();
        Ok(adaptive_c(
            &|theta: f64| {
                let t = theta.cos();
                let s = mid + half * t;
                let st = theta.sin();
                (z - s).ln() * st * st * cheb::eval(&c, t)
            },
            0.0,
            std::f64::consts::PI,
            1e-13,
        ) * half
            * half
            / (2.0 * std::f64::consts::PI))
    }

    /// Branch of `sqrt(R)` behaving like `z` at infinity, analytic off the
    /// band (one-band `R(z) = (z-A)(z-B)`).
    pub fn r_half(&self, z: Complex64) -> Complex64 {
        let (a, b) = self.band();
        (z - a).sqrt() * (z - b).sqrt()
    }

    /// `phi(z) = (1/2) \int_z^{B} R^{1/2} h ds`, path in the closed half-plane
    /// of `z`. On the cut the boundary values are supplied by a side flag:
    /// purely imaginary `± i pi mu([x, B])` on the band, and the real gap
    /// integral `± i pi` to the left of the band.
    pub fn eval_phi(&self, z: Complex64, side: Option<Side>) -> Result<Complex64, EquilibriumError> {
        let (a, b) = self.band();
        if z.im == 0.0 {
            let x = z.re;
            if x >= b {
                return Ok(Complex64::new(self.phi_right_of_band(x), 0.0));
            }
            if x >= a {
                let side = side.ok_or(EquilibriumError::SideRequired)?;
                return Ok(Complex64::new(
                    0.0,
                    side.signum() * std::f64::consts::PI * self.tail_mass(x),
                ));
            }
            let side = side.ok_or(EquilibriumError::SideRequired)?;
            let real = self.phi_left_of_band(x);
            return Ok(Complex64::new(
                real,
                side.signum() * std::f64::consts::PI * self.mass(),
            ));
        }
        Ok(self.phi_off_axis(z))
    }

    // phi(x) for real x >= B: -(x-B)^{3/2} \int_0^1 sqrt(s-A) h(s) sigma^2 dsigma
    fn phi_right_of_band(&self, x: f64) -> f64 {
        let (a, b) = self.band();
        if x == b {
            return 0.0;
        }
        let integral = rule96().integrate(0.0, 1.0, |sigma| {
            let s = b - (b - x) * sigma * sigma;
            (s - a).sqrt() * self.h_at(s) * sigma * sigma
        });
        -(x - b).powf(1.5) * integral
    }

    // real part of phi for x <= A: -(1/2) \int_x^A sqrt((A-s)(B-s)) h ds
    fn phi_left_of_band(&self, x: f64) -> f64 {
        let (a, b) = self.band();
        if x == a {
            return 0.0;
        }
        let integral = rule96().integrate(0.0, 1.0, |sigma| {
            let s = a - (a - x) * sigma * sigma;
            (b - s).sqrt() * self.h_at(s) * sigma * sigma
        });
        -(a - x).powf(1.5) * integral
    }

    fn phi_off_axis(&self, z: Complex64) -> Complex64 {
        let (a, b) = self.band();
        let bz = Complex64::new(b, 0.0) - z;
        let integral = rule96().integrate_c(0.0, 1.0, |sigma| {
            let s = Complex64::new(b, 0.0) - bz * (sigma * sigma);
            (s - a).sqrt() * self.h_at_c(s) * (sigma * sigma)
        });
        -(z - b).powf(1.5) * integral
    }

    /// `phi_+(0) = i pi mu([0, B])`; purely imaginary.
    pub fn phi_plus_zero(&self) -> Complex64 {
        Complex64::new(0.0, std::f64::consts::PI * self.tail_mass(0.0))
    }

    /// Conformal map `f` at the origin: `f(x) = pi \int_0^x psi` on the real
    /// axis, extended by `f = ± i phi - i phi_+(0)` off it.
    pub fn conformal_map_f(&self, z: Complex64) -> Result<Complex64, EquilibriumError> {
        let (a, b) = self.band();
        let reach = (-a).min(b);
        if z.norm() >= reach {
            return Err(EquilibriumError::OutsideDomain(format!(
                "|z| = {:.3} reaches the band edge (limit {:.3})",
                z.norm(),
                reach
            )));
        }
        if z.im == 0.0 {
            return Ok(Complex64::new(self.f_real(z.re), 0.0));
        }
        let i = Complex64::new(0.0, 1.0);
        let phi = self.phi_off_axis(z);
        if z.im > 0.0 {
            Ok(i * phi - i * self.phi_plus_zero())
        } else {
            Ok(-i * phi - i * self.phi_plus_zero())
        }
    }

    /// `f` restricted to the real axis.
    pub fn f_real(&self, x: f64) -> f64 {
        std::f64::consts::PI * (self.tail_mass(0.0) - self.tail_mass(x))
    }

    /// Default disk radius for the local analysis: a quarter of the distance
    /// from the origin to the nearest band endpoint.
    pub fn default_delta(&self) -> f64 {
        let (a, b) = self.band();
        0.25 * (-a).min(b)
    }

    /// Structured-text export of the solved data.
    pub fn summary_record(&self) -> String {
        let (a, b) = self.band();
        let coeffs: Vec<String> = self.h_cheb[0].iter().map(|c| format!("{c:.16e}")).collect();
        format!(
            "endpoints = [{a:.16e}, {b:.16e}]\nell = {:.16e}\npsi0 = {:.16e}\nh_cheb = [{}]\n",
            self.ell,
            self.psi0,
            coeffs.join(", ")
        )
    }
}

// Gauss-Chebyshev sum (pi/m) sum f(x_j) for \int_A^B f(x)/sqrt((x-A)(B-x)) dx,
// exact for polynomial f of degree < 2m.
fn gauss_chebyshev_sum<F: Fn(f64) -> f64>(a: f64, b: f64, m: usize, f: F) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for j in 0..m {
        let theta = std::f64::consts::PI * (j as f64 + 0.5) / m as f64;
        acc += f(mid + half * theta.cos());
    }
    acc * std::f64::consts::PI / m as f64
}

/// Solve the one-band moment conditions for the endpoints of the equilibrium
/// measure of `p`, then assemble the density, multiplier and origin value.
///
/// Rejects configurations whose candidate density is not strictly positive
/// on the band or vanishes at the origin; those signal multi-band or
/// singular potentials which this solver does not model.
pub fn solve_equilibrium_one_band(p: &Potential) -> Result<EquilibriumData, EquilibriumError> {
    let deg = p.degree();
    let m = deg + 2;
    // F1 = (1/2pi) \int V'/sqrt = 0,  F2 = (1/2pi) \int x V'/sqrt = 1
    let residual = |a: f64, b: f64| -> (f64, f64) {
        let f1 = gauss_chebyshev_sum(a, b, m, |x| p.eval_derivative(x)) / (2.0 * std::f64::consts::PI);
        let f2 = gauss_chebyshev_sum(a, b, m, |x| x * p.eval_derivative(x))
            / (2.0 * std::f64::consts::PI);
        (f1, f2 - 1.0)
    };

    // symmetric initial bracket: grow r until the mass condition overshoots
    let mut r_hi = 1.0;
    let mass_of = |r: f64| {
        gauss_chebyshev_sum(-r, r, m, |x| x * p.eval_derivative(x)) / (2.0 * std::f64::consts::PI)
    };
    let mut guard = 0;
    while mass_of(r_hi) < 1.0 {
        r_hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(EquilibriumError::NewtonDivergence(
                "no symmetric bracket for the mass condition".to_string(),
            ));
        }
    }
    let mut lo = 0.0;
    let mut hi = r_hi;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass_of(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r0 = 0.5 * (lo + hi);

    let (mut a, mut b) = (-r0, r0);
    let mut fnorm = {
        let (f1, f2) = residual(a, b);
        f1.hypot(f2)
    };
    let mut converged = fnorm < 1e-13;
    for _ in 0..120 {
        if converged {
            break;
        }
        let (f1, f2) = residual(a, b);
        let h = 1e-7 * (b - a).max(1.0);
        let (f1a, f2a) = residual(a + h, b);
        let (f1b, f2b) = residual(a, b + h);
        let j11 = (f1a - f1) / h;
        let j12 = (f1b - f1) / h;
        let j21 = (f2a - f2) / h;
        let j22 = (f2b - f2) / h;
        let det = j11 * j22 - j12 * j21;
        if det.abs() < 1e-300 {
            return Err(EquilibriumError::NewtonDivergence(
                "singular endpoint Jacobian".to_string(),
            ));
        }
        let da = -(j22 * f1 - j12 * f2) / det;
        let db = -(-j21 * f1 + j11 * f2) / det;
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let (na, nb) = (a + step * da, b + step * db);
            if na < nb {
                let (g1, g2) = residual(na, nb);
                let nn = g1.hypot(g2);
                if nn < fnorm || nn < 1e-13 {
                    a = na;
                    b = nb;
                    fnorm = nn;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(EquilibriumError::NewtonDivergence(format!(
                "stalled at residual {fnorm:.3e}"
            )));
        }
        converged = fnorm < 1e-13;
    }
    if !converged {
        return Err(EquilibriumError::NewtonDivergence(format!(
            "residual {fnorm:.3e} after iteration cap"
        )));
    }

    // h(x) = (1/pi) \int (V'(s) - V'(x)) / ((s - x) sqrt) ds, exact here
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let n_h = deg.max(2) - 1;
    let h_cheb = cheb::coefficients(
        |t| {
            let x = mid + half * t;
            gauss_chebyshev_sum(a, b, m, |s| p.derivative_divided_difference(s, x))
                / std::f64::consts::PI
        },
        n_h,
    );

    let support = SupportBands::single(a, b)?;
    let mut eq = EquilibriumData {
        support,
        h_cheb: vec![h_cheb],
        ell: 0.0,
        omega: Vec::new(),
        psi0: 0.0,
    };

    let mass = eq.mass();
    if (mass - 1.0).abs() > 1e-8 {
        return Err(EquilibriumError::NotOneBand(format!(
            "candidate density mass {mass:.12} != 1"
        )));
    }
    // strict positivity of h on the closed band
    let h_scale = eq.h_cheb[0].iter().map(|c| c.abs()).sum::<f64>().max(1e-300);
    let mut h_min = f64::INFINITY;
    for i in 0..=400 {
        let t = -1.0 + 2.0 * i as f64 / 400.0;
        h_min = h_min.min(cheb::eval(&eq.h_cheb[0], t));
    }
    if h_min <= 1e-10 * h_scale {
        return Err(EquilibriumError::NotOneBand(format!(
            "density factor reaches {h_min:.3e} on the band"
        )));
    }
    if !(a < 0.0 && b > 0.0) {
        return Err(EquilibriumError::DensityVanishesAtOrigin(0.0));
    }
    let psi0 = eq.eval_density(0.0);
    if psi0 <= 1e-8 {
        return Err(EquilibriumError::DensityVanishesAtOrigin(psi0));
    }
    eq.psi0 = psi0;
    // multiplier from the equality condition at an interior point
    eq.ell = 2.0 * eq.log_potential(mid) - p.eval(mid);
    Ok(eq)
}

/// Variational-condition report over supplied probe grids.
#[derive(Debug, Clone)]
pub struct VariationalReport {
    /// `max |2 U(x) - V(x) - ell|` over the interior grid.
    pub max_equality_residual: f64,
    /// `min (ell + V(x) - 2 U(x))` over the exterior grid (positive in the
    /// regular case).
    pub min_outside_margin: f64,
    pub h_min_on_band: f64,
    pub singular: bool,
}

/// Check both Euler-Lagrange conditions with an independent quadrature for
/// the logarithmic potential (adaptive, split at the singularity). The
/// closed-form path inside `EquilibriumData` is deliberately not reused.
pub fn check_variational(
    eq: &EquilibriumData,
    p: &Potential,
    grid_inside: &[f64],
    grid_outside: &[f64],
) -> VariationalReport {
    let mut max_eq = 0.0_f64;
    for &x in grid_inside {
        let u = log_potential_oracle(eq, x);
        max_eq = max_eq.max((2.0 * u - p.eval(x) - eq.ell).abs());
    }
    let mut min_margin = f64::INFINITY;
    for &x in grid_outside {
        let u = log_potential_oracle(eq, x);
        min_margin = min_margin.min(eq.ell + p.eval(x) - 2.0 * u);
    }
    let mut h_min = f64::INFINITY;
    for i in 0..=400 {
        let t = -1.0 + 2.0 * i as f64 / 400.0;
        h_min = h_min.min(cheb::eval(&eq.h_cheb[0], t));
    }
    let singular = min_margin <= 1e-6 || h_min <= 1e-10;
    VariationalReport {
        max_equality_residual: max_eq,
        min_outside_margin: min_margin,
        h_min_on_band: h_min,
        singular,
    }
}

/// Brute-force `\int log|x-s| psi(s) ds` by adaptive quadrature, split at the
/// interior singularity; the oracle against which the closed form is judged.
pub fn log_potential_oracle(eq: &EquilibriumData, x: f64) -> f64 {
    let (a, b) = eq.support.bands[0];
    let f = |s: f64| {
        let d = (x - s).abs();
        if d == 0.0 {
            0.0
        } else {
            d.ln() * eq.eval_density(s)
        }
    };
    if x > a && x < b {
        adaptive_r(&f, a, x, 1e-12) + adaptive_r(&f, x, b, 1e-12)
    } else {
        adaptive_r(&f, a, b, 1e-12)
    }
}
