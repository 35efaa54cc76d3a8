//! Numerical tolerances and iteration caps.

use crate::scalar::Real;

/// Tolerances shared by the solvers. Defaults are tuned for `f64`; every
/// relative tolerance is floored at a small multiple of machine epsilon so the
/// same defaults stay meaningful in `f32`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances<T> {
    /// Relative asymmetry accepted for the assembled operator.
    pub symmetry: T,
    /// `‖A u - b‖∞ ≤ linear_residual · ‖b‖∞` for direct solves.
    pub linear_residual: T,
    /// Stop inverse iteration once successive Rayleigh quotients agree to this.
    pub eigen_rayleigh: T,
    /// Required `‖A φ - λ h φ‖∞` for the sup-normalized eigenvector.
    pub eigen_residual: T,
    pub eigen_max_iter: usize,
    /// Relative part of the sub/supersolution residual tolerance
    /// `residual_check · (1 + ‖A u‖∞)`.
    pub residual_check: T,
    /// Monotone and Newton stopping tolerance, scaled by `1 + ‖u‖∞`.
    pub solve: T,
    pub monotone_max_iter: usize,
    pub newton_max_iter: usize,
    /// Relative slack of the energy certificate.
    pub certificate: T,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        let floor = |x: f64| T::lit(x).max(T::epsilon() * T::lit(64.0));
        Self {
            symmetry: floor(1e-12),
            linear_residual: floor(1e-10),
            eigen_rayleigh: floor(1e-12),
            eigen_residual: floor(1e-9),
            eigen_max_iter: 10_000,
            residual_check: floor(1e-8),
            solve: floor(1e-10),
            monotone_max_iter: 5000,
            newton_max_iter: 100,
            certificate: floor(1e-10),
        }
    }
}
