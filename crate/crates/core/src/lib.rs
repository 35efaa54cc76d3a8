//! Positive steady states of a fractional logistic population model with
//! grazing and constant-yield harvesting on an interval,
//!
//! ```text
//! (-Δ)^s u = λ (u - u²/K - c u²/(1+u²) - ε h(x))   in Ω = (a, b),
//!        u = 0                                      in ℝ ∖ Ω,
//! ```
//!
//! built from an explicit ordered sub/supersolution pair and monotone
//! iteration.
//!
//! * [`mesh`]: intervals, uniform grids, grid functions, harvesting profiles.
//! * [`fracop`]: the discrete integral fractional Laplacian, `C(1, s)`, and
//!   the Gagliardo seminorm.
//! * [`spectral`]: principal eigenpair, torsion function, boundary fits.
//! * [`model`]: reaction term, existence thresholds, sub/supersolutions,
//!   residual checks and the energy nonexistence certificate.
//! * [`solver`]: monotone iteration, damped Newton, weak residuals.
//!
//! Everything is generic over the scalar type ([`Real`]); the aliases below
//! fix it to `f64`.

// `!(x > y)` is used on purpose so that NaN lands on the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fracop;
pub mod linalg;
pub mod mesh;
pub mod model;
pub mod quadrature;
pub mod scalar;
pub mod solver;
pub mod spectral;
pub mod tolerances;

pub use error::{Error, Result};
pub use fracop::{assemble_operator, gagliardo_seminorm, normalization_constant, solve_linear, FracOrder};
pub use mesh::{boundary_distance, build_grid, harvesting_profile, ProfileKind};
pub use model::{
    build_subsolution, build_supersolution, check_subsupersolution, nonexistence_certificate, thresholds,
    ResidualKind,
};
pub use scalar::Real;
pub use solver::{monotone_solve, newton_solve, weak_residual, Branch};
pub use spectral::{boundary_fit, principal_eigenpair, rayleigh_quotient, torsion_function};

pub type Interval = mesh::Interval<f64>;
pub type Grid = mesh::Grid<f64>;
pub type GridFunction = mesh::GridFunction<f64>;
pub type Order = fracop::FracOrder<f64>;
pub type OperatorMatrix = fracop::OperatorMatrix<f64>;
pub type EigenPair = spectral::EigenPair<f64>;
pub type BoundaryFit = spectral::BoundaryFit<f64>;
pub type ModelParams = model::ModelParams<f64>;
pub type ThresholdSet = model::ThresholdSet<f64>;
pub type ResidualReport = model::ResidualReport<f64>;
pub type CertificateReport = model::CertificateReport<f64>;
pub type SolveReport = solver::SolveReport<f64>;
pub type Tolerances = tolerances::Tolerances<f64>;
