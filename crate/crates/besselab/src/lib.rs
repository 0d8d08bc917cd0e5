//! Numerical laboratory for unitary random matrix ensembles with weight
//! `|x|^{2a} e^{-n V(x)}`.
//!
//! The crate builds every computable object of the local analysis at the
//! origin of the spectrum: the equilibrium measure of a polynomial potential,
//! the associated g- and phi-functions, varying-weight orthonormal
//! polynomials and their Christoffel-Darboux kernel, the multi-interval
//! Szego function for `|x|^{2a}`, the eight-sector Bessel model problem and
//! the matching local/outer parametrices. On top of those sit the
//! universality experiments (rescaled kernel against the origin Bessel
//! kernel) and a log-gas Metropolis sampler for the joint eigenvalue density.

pub mod cheb;
pub mod equilibrium;
pub mod kernels;
pub mod orthopoly;
pub mod parametrix;
pub mod potential;
pub mod quad;
pub mod sampler;
pub mod specialfn;
pub mod szego;
pub mod universality;

/// Which side of an oriented cut a boundary value is taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Limit from the upper half-plane (`+` side of the real axis).
    Plus,
    /// Limit from the lower half-plane.
    Minus,
}

impl Side {
    pub fn signum(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}
