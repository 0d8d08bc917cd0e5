//! The main experiment: the rescaled Christoffel-Darboux kernel at the
//! origin against the limit Bessel kernel, with decay-rate fits in `n`.
//!
//! `Khat_n(u, v) = K_n(u / (n psi(0)), v / (n psi(0))) / (n psi(0))`, and the
//! sweep error is weighted by `u^a v^a`, which is the shape of the finite-n
//! correction term. `psi(0)` always comes from the equilibrium module; it is
//! never fitted.

use crate::equilibrium::EquilibriumData;
use crate::kernels::{self, KernelError};
use crate::orthopoly::{build_table, OrthoError, RecurrenceTable};
use crate::potential::{EnsembleParams, Potential};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum UniversalityError {
    #[error("rescaled point {0:.4} leaves the support; n too small for this u")]
    OutsideSupport(f64),
    #[error("u and v must be non-zero")]
    ZeroArgument,
    #[error(transparent)]
    Ortho(#[from] OrthoError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Equilibrium(#[from] crate::equilibrium::EquilibriumError),
}

/// Rescaled kernel values on a grid, with the metadata needed to replot.
#[derive(Debug, Clone)]
pub struct KernelTable {
    pub grid: Vec<f64>,
    /// `values[i][j] = Khat_n(grid[i], grid[j])` (symmetric).
    pub values: Vec<Vec<f64>>,
    pub n: usize,
    pub alpha: f64,
    pub psi0: f64,
    pub potential: String,
}

fn rescale_point(eq: &EquilibriumData, n: usize, u: f64) -> Result<f64, UniversalityError> {
    let scale = n as f64 * eq.psi0;
    let x = u / scale;
    let (a, b) = eq.support.bands[0];
    if x <= a || x >= b {
        return Err(UniversalityError::OutsideSupport(x));
    }
    Ok(x)
}

/// `Khat_n(u, v)` for `u, v > 0`.
pub fn rescaled_kernel(
    t: &RecurrenceTable,
    eq: &EquilibriumData,
    p: &Potential,
    u: f64,
    v: f64,
) -> Result<f64, UniversalityError> {
    let n = t.ensemble.n;
    let scale = n as f64 * eq.psi0;
    let x = rescale_point(eq, n, u)?;
    let y = rescale_point(eq, n, v)?;
    Ok(t.cd_kernel(p, x, y)? / scale)
}

/// Signed-argument variant `|u|^{-a} |v|^{-a} Khat_n(u, v)`, defined for all
/// real `u, v != 0` with rescaled points inside the support.
pub fn extended_rescaled(
    t: &RecurrenceTable,
    eq: &EquilibriumData,
    p: &Potential,
    u: f64,
    v: f64,
) -> Result<f64, UniversalityError> {
    if u == 0.0 || v == 0.0 {
        return Err(UniversalityError::ZeroArgument);
    }
    let n = t.ensemble.n;
    let scale = n as f64 * eq.psi0;
    let x = rescale_point(eq, n, u)?;
    let y = rescale_point(eq, n, v)?;
    let alpha = t.ensemble.alpha;
    let weight = u.abs().powf(-alpha) * v.abs().powf(-alpha);
    Ok(weight * t.cd_kernel(p, x, y)? / scale)
}

/// `m`-point correlation determinant `det K_n(y_i, y_j)`.
pub fn finite_n_correlations(
    t: &RecurrenceTable,
    p: &Potential,
    points: &[f64],
) -> Result<f64, UniversalityError> {
    let m = points.len();
    let mut matrix = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            matrix[i][j] = t.cd_kernel(p, points[i], points[j])?;
        }
    }
    Ok(kernels::correlation_det(&matrix)?)
}

/// Sweep output: per-n error maxima and the fitted log-log rate.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub tables: Vec<KernelTable>,
    /// `(n, max weighted error)`, weight `1/(u^a v^a)`.
    pub errors: Vec<(usize, f64)>,
    /// `(n, max unweighted error)`.
    pub errors_unweighted: Vec<(usize, f64)>,
    /// Least-squares slope of `log E(n)` against `log n` (weighted errors).
    pub slope: f64,
    pub slope_unweighted: f64,
}

/// Run the universality experiment: for each `n`, build the recurrence
/// table, evaluate `Khat_n` on all grid pairs and take the maximum deviation
/// from the origin Bessel kernel.
pub fn universality_sweep(
    p: &Potential,
    eq: &EquilibriumData,
    alpha: f64,
    n_list: &[usize],
    grid: &[f64],
) -> Result<SweepResult, UniversalityError> {
    let limit: Vec<Vec<f64>> = grid
        .iter()
        .map(|&u| {
            grid.iter()
                .map(|&v| kernels::eval_origin_bessel(alpha, u, v))
                .collect::<Result<Vec<f64>, _>>()
        })
        .collect::<Result<_, _>>()?;

    let per_n: Result<Vec<(KernelTable, f64, f64)>, UniversalityError> = n_list
        .par_iter()
        .map(|&n| {
            let e = EnsembleParams::new(alpha, n);
            let t = build_table(p, &e, n + 1)?;
            let mut values = vec![vec![0.0; grid.len()]; grid.len()];
            let mut e_w = 0.0_f64;
            let mut e_u = 0.0_f64;
            for (i, &u) in grid.iter().enumerate() {
                for (j, &v) in grid.iter().enumerate() {
                    let khat = rescaled_kernel(&t, eq, p, u, v)?;
                    values[i][j] = khat;
                    let diff = (khat - limit[i][j]).abs();
                    e_u = e_u.max(diff);
                    e_w = e_w.max(diff / (u.powf(alpha) * v.powf(alpha)));
                }
            }
            Ok((
                KernelTable {
                    grid: grid.to_vec(),
                    values,
                    n,
                    alpha,
                    psi0: eq.psi0,
                    potential: p.describe(),
                },
                e_w,
                e_u,
            ))
        })
        .collect();
    let per_n = per_n?;

    let errors: Vec<(usize, f64)> = per_n.iter().map(|(t, ew, _)| (t.n, *ew)).collect();
    let errors_unweighted: Vec<(usize, f64)> = per_n.iter().map(|(t, _, eu)| (t.n, *eu)).collect();
    let slope = loglog_slope(&errors);
    let slope_unweighted = loglog_slope(&errors_unweighted);
    Ok(SweepResult {
        tables: per_n.into_iter().map(|(t, _, _)| t).collect(),
        errors,
        errors_unweighted,
        slope,
        slope_unweighted,
    })
}

fn loglog_slope(rows: &[(usize, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|(_, e)| *e > 0.0)
        .map(|(n, e)| ((*n as f64).ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Default sweep grid `0.25, 0.5, ..., 2.5`.
pub fn default_grid() -> Vec<f64> {
    (1..=10).map(|i| 0.25 * i as f64).collect()
}

/// Default size list `8, 16, 32, 64`.
pub fn default_n_list() -> Vec<usize> {
    vec![8, 16, 32, 64]
}
