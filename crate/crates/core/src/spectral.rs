//! Principal eigenpair, torsion function and boundary-growth fits.

use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::fracop::{FracOrder, OperatorMatrix};
use crate::mesh::{boundary_distance, Grid, GridFunction};
use crate::scalar::{dot, sup_norm, Real};
use crate::tolerances::Tolerances;

/// Smallest eigenvalue of `A φ = λ h φ` with its positive eigenvector,
/// sup-normalized so that `max φ = 1`.
#[derive(Clone, Debug)]
pub struct EigenPair<T> {
    pub lambda1: T,
    pub phi1: GridFunction<T>,
    /// `‖A φ₁ - λ₁ h φ₁‖∞`.
    pub residual: T,
    pub iterations: usize,
}

/// Inverse power iteration from the constant-one vector, reusing a single
/// Cholesky factorization.
///
/// Stops once successive Rayleigh quotients agree to
/// `tol.eigen_rayleigh` (relative) and the eigen residual is below
/// `tol.eigen_residual`.
pub fn principal_eigenpair<T: Real>(a: &OperatorMatrix<T>, tol: &Tolerances<T>) -> Result<EigenPair<T>> {
    let grid = *a.grid();
    let h = grid.step();
    let factor = a.factor()?;
    let mut v = vec![T::one(); grid.len()];
    let mut rq_prev = T::infinity();
    let mut change = T::infinity();
    let mut residual = T::infinity();

    for iteration in 1..=tol.eigen_max_iter {
        let load: Vec<T> = v.iter().map(|x| *x * h).collect();
        let mut w = factor.solve_values(&load);
        let peak = w.iter().copied().fold(T::zero(), |m, x| if x.abs() > m.abs() { x } else { m });
        if peak == T::zero() || !peak.is_finite() {
            break;
        }
        for x in &mut w {
            *x = *x / peak;
        }
        v = w;

        let av = a.matrix().mul_vec(&v);
        let rq = dot(&v, &av) / (h * dot(&v, &v));
        residual = sup_norm(
            &av.iter()
                .zip(&v)
                .map(|(x, y)| *x - rq * h * *y)
                .collect::<Vec<_>>(),
        );
        change = (rq - rq_prev).abs();
        rq_prev = rq;
        if change <= tol.eigen_rayleigh * rq.abs() && residual <= tol.eigen_residual {
            let phi1 = GridFunction::new(grid, v)?;
            if phi1.min() <= T::zero() {
                return Err(Error::EigensolverFailure {
                    iterations: iteration,
                    change: change.as_f64(),
                    residual: residual.as_f64(),
                });
            }
            return Ok(EigenPair {
                lambda1: rq,
                phi1,
                residual,
                iterations: iteration,
            });
        }
    }
    Err(Error::EigensolverFailure {
        iterations: tol.eigen_max_iter,
        change: change.as_f64(),
        residual: residual.as_f64(),
    })
}

/// Discrete Rayleigh quotient `vᵀ A v / (h vᵀ v)`.
pub fn rayleigh_quotient<T: Real>(a: &OperatorMatrix<T>, v: &GridFunction<T>) -> Result<T> {
    a.check_grid(v)?;
    let vv = dot(v.values(), v.values());
    if vv == T::zero() {
        return Err(Error::InvalidArgument("Rayleigh quotient of the zero vector".into()));
    }
    Ok(a.quadratic_form(v)? / (a.grid().step() * vv))
}

/// Discrete solution of `(-Δ)^s e = 1` in the interval, `e = 0` outside.
pub fn torsion_function<T: Real>(a: &OperatorMatrix<T>) -> Result<GridFunction<T>> {
    let grid = *a.grid();
    let load = GridFunction::constant(grid, grid.step());
    a.factor()?.solve(&load)
}

/// `κ(s) = Γ(1/2) / (2^{2s} Γ((1+2s)/2) Γ(1+s))`: the torsion function of the
/// unit interval is `κ(s) (1 - x²)^s`.
pub fn ball_torsion_constant<T: Real>(s: FracOrder<T>) -> T {
    let s = s.value().as_f64();
    let k = gamma(0.5) / (4f64.powf(s) * gamma(0.5 + s) * gamma(1.0 + s));
    T::lit(k)
}

/// Closed-form torsion function `κ(s) (r² - (x - c)²)^s` of the interval with
/// center `c` and radius `r`, sampled at the grid nodes.
pub fn exact_torsion<T: Real>(grid: &Grid<T>, s: FracOrder<T>) -> GridFunction<T> {
    let kappa = ball_torsion_constant(s);
    let iv = grid.interval();
    let c = iv.midpoint();
    let r = iv.length() / T::lit(2.0);
    GridFunction::from_fn(*grid, |x| {
        let q = (r - (x - c)) * (r + (x - c));
        kappa * q.max(T::zero()).powf(s.value())
    })
}

/// `max |e - e_exact| / max e_exact` over the nodes.
pub fn torsion_error<T: Real>(e: &GridFunction<T>, s: FracOrder<T>) -> Result<T> {
    let exact = exact_torsion(e.grid(), s);
    let diff = e.zip_map(&exact, |x, y| x - y)?;
    Ok(diff.sup_norm() / exact.sup_norm())
}

/// Constants `c₁ ≤ u/δ^s ≤ c₂` fitted over the grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundaryFit<T> {
    pub lower_c: T,
    pub upper_c: T,
    pub exponent_used: T,
    /// Same bounds restricted to the nearest 10% of nodes to each endpoint.
    pub layer_lower_c: T,
    pub layer_upper_c: T,
}

impl<T: Real> BoundaryFit<T> {
    pub fn ratio(&self) -> T {
        self.upper_c / self.lower_c
    }

    /// Both constants positive with a finite ratio.
    pub fn certifies(&self) -> bool {
        self.lower_c > T::zero() && self.ratio().is_finite()
    }
}

pub fn boundary_fit<T: Real>(u: &GridFunction<T>, s: FracOrder<T>) -> Result<BoundaryFit<T>> {
    if let Some(i) = u.values().iter().position(|v| !(*v > T::zero())) {
        return Err(Error::InvalidArgument(format!(
            "boundary fit needs a positive function; node {i} is not"
        )));
    }
    let grid = u.grid();
    let delta = boundary_distance(grid);
    let ratios: Vec<T> = u
        .values()
        .iter()
        .zip(delta.values())
        .map(|(v, d)| *v / d.powf(s.value()))
        .collect();
    let n = grid.len();
    let layer = (n / 10).max(1);
    let (mut lo, mut hi) = (T::infinity(), T::neg_infinity());
    let (mut layer_lo, mut layer_hi) = (T::infinity(), T::neg_infinity());
    for (i, r) in ratios.iter().enumerate() {
        lo = lo.min(*r);
        hi = hi.max(*r);
        if grid.steps_to_boundary(i) <= layer {
            layer_lo = layer_lo.min(*r);
            layer_hi = layer_hi.max(*r);
        }
    }
    Ok(BoundaryFit {
        lower_c: lo,
        upper_c: hi,
        exponent_used: s.value(),
        layer_lower_c: layer_lo,
        layer_upper_c: layer_hi,
    })
}
