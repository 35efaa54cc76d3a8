//! Integral fractional Laplacian on an interval with zero exterior data.
//!
//! The operator is discretized by collocation at the interior nodes. The
//! unknown is extended to a piecewise-linear function on the infinite lattice
//! `a + hℤ` that vanishes at every node outside the interval, and the
//! symmetric form
//!
//! ```text
//! (-Δ)^s u(x) = C(1,s) ∫_0^∞ (2u(x) - u(x+t) - u(x-t)) t^(-1-2s) dt
//! ```
//!
//! is integrated with exact kernel moments of the hat functions for `t ≥ h`
//! and a second-difference (curvature) model on `[0, h]`. Every neighbor
//! weight is positive, so the matrix is a symmetric M-matrix; the row sums are
//! the exterior contributions, which are strictly positive.
//!
//! Rows are scaled by the lumped mass `h`, so `A u ≈ h (-Δ)^s u` and the
//! discrete eigenproblem reads `A φ = λ h φ`.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, DenseMatrix};
use crate::mesh::{Grid, GridFunction};
use crate::quadrature::{power_integral, power_tail, GaussLegendre};
use crate::scalar::{sup_norm, Real};
use crate::tolerances::Tolerances;

/// Fractional order `s ∈ (0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct FracOrder<T>(T);

impl<T: Real> FracOrder<T> {
    pub fn new(s: T) -> Result<Self> {
        if s > T::zero() && s < T::one() {
            Ok(Self(s))
        } else {
            Err(Error::InvalidOrder(s.as_f64()))
        }
    }

    pub fn value(self) -> T {
        self.0
    }

    /// Whether `N > 2s` holds in one space dimension, i.e. `s < 1/2`.
    pub fn below_dimension_threshold(self) -> bool {
        self.0 < T::lit(0.5)
    }
}

/// The constant `C(N, s) = (∫_{ℝ^N} (1 - cos ζ₁) / |ζ|^{N+2s} dζ)^{-1}`,
/// evaluated by quadrature for `N = 1`.
///
/// The integral `2 ∫_0^∞ (1 - cos t) t^{-1-2s} dt` is split at `t = 1`:
/// the Taylor series of `1 - cos t` is integrated termwise on `[0, 1]`, and
/// on `[1, ∞)` the power part is exact while the oscillatory part is summed
/// over half-periods by Gauss–Legendre up to `X = Mπ` with an asymptotic
/// expansion for `[X, ∞)`.
pub fn normalization_constant<T: Real>(dim: usize, s: FracOrder<T>) -> Result<T> {
    if dim != 1 {
        return Err(Error::UnsupportedDimension(dim));
    }
    let s = s.value();
    let two = T::lit(2.0);
    let p = T::one() + two * s;

    let mut near = T::zero();
    let mut factorial = T::one();
    for m in 1..=30usize {
        let k = 2 * m;
        factorial = factorial * T::from_usize_lossy(k - 1) * T::from_usize_lossy(k);
        let term = T::one() / (factorial * (T::from_usize_lossy(k) - two * s));
        near = if m % 2 == 1 { near + term } else { near - term };
        if term <= T::epsilon() * near.abs() {
            break;
        }
    }

    let power = power_tail(p, T::one());

    const HALF_PERIODS: usize = 512;
    let rule = GaussLegendre::new(20);
    let pi = T::PI();
    let mut oscillatory = rule.integrate(T::one(), pi, |t| t.cos() * t.powf(-p));
    for k in 1..HALF_PERIODS {
        let lo = pi * T::from_usize_lossy(k);
        oscillatory = oscillatory + rule.integrate(lo, lo + pi, |t| t.cos() * t.powf(-p));
    }

    // ∫_X^∞ cos t t^{-q} dt with sin X = 0, expanded by repeated integration
    // by parts: Σ_k (-1)^k q(q+1)…(q+2k) cos X X^{-q-2k-1}.
    let x = pi * T::from_usize_lossy(HALF_PERIODS);
    let cos_x = if HALF_PERIODS.is_multiple_of(2) { T::one() } else { -T::one() };
    let mut tail = T::zero();
    let mut coeff = p;
    let mut exponent = p + T::one();
    for k in 0..4 {
        let term = coeff * cos_x * x.powf(-exponent);
        tail = if k % 2 == 0 { tail + term } else { tail - term };
        coeff = coeff * (p + T::from_usize_lossy(2 * k + 1)) * (p + T::from_usize_lossy(2 * k + 2));
        exponent = exponent + two;
    }
    // |remainder| ≤ 2 q(q+1)…(q+7) X^{-q-8}
    let remainder_bound = two * coeff / (p + T::lit(8.0)) * x.powf(-(p + T::lit(8.0)));

    let integral = two * (near + power - oscillatory - tail);
    debug_assert!(remainder_bound <= T::epsilon() * integral);
    Ok(T::one() / integral)
}

/// Exact hat-function moments of `t^{-1-2s}` on the unit lattice.
///
/// `weight(k)` is the coefficient of `2u_i - u_{i+k} - u_{i-k}`; multiplied
/// by `h^{-2s}` it gives the physical weight on a grid of width `h`.
#[derive(Clone, Debug)]
pub struct KernelMoments<T> {
    s: T,
    weights: Vec<T>,
}

impl<T: Real> KernelMoments<T> {
    /// Moments for lattice offsets `1..=max_offset`.
    pub fn new(s: FracOrder<T>, max_offset: usize) -> Self {
        let s = s.value();
        let mut weights = Vec::with_capacity(max_offset + 1);
        weights.push(T::zero());
        let mut moments = Self { s, weights };
        for k in 1..=max_offset {
            let w = if k == 1 {
                moments.near_field() + moments.right_ramp(1)
            } else {
                moments.left_ramp(k) + moments.right_ramp(k)
            };
            moments.weights.push(w);
        }
        moments
    }

    pub fn order(&self) -> T {
        self.s
    }

    pub fn max_offset(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn weight(&self, k: usize) -> T {
        self.weights[k]
    }

    /// Curvature model on `[0, 1]`: `∫_0^1 t^{1-2s} dt`.
    pub fn near_field(&self) -> T {
        T::one() / (T::lit(2.0) - T::lit(2.0) * self.s)
    }

    /// `∫_{k-1}^{k} (t - (k-1)) t^{-1-2s} dt`, `k ≥ 2`.
    fn left_ramp(&self, k: usize) -> T {
        let p = T::one() + T::lit(2.0) * self.s;
        let lo = T::from_usize_lossy(k - 1);
        let hi = T::from_usize_lossy(k);
        power_integral(p - T::one(), lo, hi) - lo * power_integral(p, lo, hi)
    }

    /// `∫_k^{k+1} (k+1 - t) t^{-1-2s} dt`, `k ≥ 1`.
    fn right_ramp(&self, k: usize) -> T {
        let p = T::one() + T::lit(2.0) * self.s;
        let lo = T::from_usize_lossy(k);
        let hi = T::from_usize_lossy(k + 1);
        hi * power_integral(p, lo, hi) - power_integral(p - T::one(), lo, hi)
    }

    /// Weight coupling a node `k` steps from an endpoint to that endpoint
    /// node, restricted to the part of the endpoint hat inside the interval.
    pub fn boundary_cell(&self, k: usize) -> T {
        if k == 1 {
            self.near_field()
        } else {
            self.left_ramp(k)
        }
    }

    /// `∫_k^∞ t^{-1-2s} dt`: exterior half-line at distance `k`.
    pub fn exterior_tail(&self, k: usize) -> T {
        power_tail(T::one() + T::lit(2.0) * self.s, T::from_usize_lossy(k))
    }

    /// `Σ_{m ≥ k} weight(m)` in closed form.
    pub fn tail_sum(&self, k: usize) -> T {
        self.boundary_cell(k) + self.exterior_tail(k)
    }

    /// `Σ_{m ≥ 1} weight(m) = 1/(2s) + 1/(2 - 2s)`.
    pub fn total(&self) -> T {
        self.tail_sum(1)
    }
}

/// Dense discretization of `(-Δ)^s` with homogeneous exterior data.
#[derive(Clone, Debug)]
pub struct OperatorMatrix<T> {
    grid: Grid<T>,
    order: FracOrder<T>,
    normalization: T,
    moments: KernelMoments<T>,
    matrix: DenseMatrix<T>,
}

/// Assembles the operator on `grid`.
///
/// Row `i` reads `h C(1,s) [Σ_{j≠i} w_ij (u_i - u_j) + T_i u_i]`, where the
/// sum includes the two endpoint nodes (whose values are zero) and
/// `T_i = ∫_{ℝ∖Ω} |x_i - y|^{-1-2s} dy`.
pub fn assemble_operator<T: Real>(grid: &Grid<T>, order: FracOrder<T>) -> Result<OperatorMatrix<T>> {
    let n = grid.len();
    let s = order.value();
    let c_ns = normalization_constant(1, order)?;
    let moments = KernelMoments::new(order, n);
    let h = grid.step();
    let scale = c_ns * h.powf(T::one() - T::lit(2.0) * s);

    let mut prefix = vec![T::zero(); n + 1];
    for k in 1..=n {
        prefix[k] = prefix[k - 1] + moments.weight(k);
    }

    let mut matrix = DenseMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                matrix.set(i, j, -scale * moments.weight(i.abs_diff(j)));
            }
        }
        let interior = prefix[i] + prefix[n - 1 - i];
        let exterior = moments.tail_sum(i + 1) + moments.tail_sum(n - i);
        matrix.set(i, i, scale * (interior + exterior));
    }

    Ok(OperatorMatrix {
        grid: *grid,
        order,
        normalization: c_ns,
        moments,
        matrix,
    })
}

impl<T: Real> OperatorMatrix<T> {
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn order(&self) -> FracOrder<T> {
        self.order
    }

    /// `C(1, s)` used during assembly.
    pub fn normalization(&self) -> T {
        self.normalization
    }

    pub fn matrix(&self) -> &DenseMatrix<T> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    fn scale(&self) -> T {
        self.normalization * self.grid.step().powf(T::one() - T::lit(2.0) * self.order.value())
    }

    /// Interior neighbor weight `w_ij` in physical units (without `C` or `h`).
    pub fn neighbor_weight(&self, i: usize, j: usize) -> T {
        let h = self.grid.step();
        self.moments.weight(i.abs_diff(j)) * h.powf(-T::lit(2.0) * self.order.value())
    }

    /// Closed-form `T_i = ((x_i - a)^{-2s} + (b - x_i)^{-2s}) / (2s)`.
    pub fn exterior_integral(&self, i: usize) -> T {
        let s2 = T::lit(2.0) * self.order.value();
        let x = self.grid.node(i);
        let iv = self.grid.interval();
        ((x - iv.a()).powf(-s2) + (iv.b() - x).powf(-s2)) / s2
    }

    /// Endpoint weights `w_{i,0} + w_{i,n+1}` in physical units.
    pub fn endpoint_weight(&self, i: usize) -> T {
        let h = self.grid.step();
        let n = self.grid.len();
        (self.moments.boundary_cell(i + 1) + self.moments.boundary_cell(n - i))
            * h.powf(-T::lit(2.0) * self.order.value())
    }

    /// Row sum of the assembled matrix, `h C (w_{i,0} + w_{i,n+1} + T_i)`.
    pub fn exterior_coefficient(&self, i: usize) -> T {
        let n = self.grid.len();
        self.scale() * (self.moments.tail_sum(i + 1) + self.moments.tail_sum(n - i))
    }

    pub fn apply(&self, u: &GridFunction<T>) -> Result<GridFunction<T>> {
        self.check_grid(u)?;
        GridFunction::new(self.grid, self.matrix.mul_vec(u.values()))
    }

    /// `uᵀ A u`.
    pub fn quadratic_form(&self, u: &GridFunction<T>) -> Result<T> {
        self.check_grid(u)?;
        Ok(self.matrix.quadratic_form(u.values()))
    }

    pub fn factor(&self) -> Result<FactoredOperator<T>> {
        FactoredOperator::new(self.matrix.clone(), self.grid)
    }

    /// `A + shift · h · I`, factored.
    pub fn factor_shifted(&self, shift: T) -> Result<FactoredOperator<T>> {
        let d = vec![shift * self.grid.step(); self.dim()];
        FactoredOperator::new(self.matrix.plus_diagonal(&d), self.grid)
    }

    pub fn check_grid(&self, u: &GridFunction<T>) -> Result<()> {
        if *u.grid() == self.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Text dump, one matrix row per line, space-separated, 17 digits.
    pub fn write_text<W: Write>(&self, mut out: W) -> io::Result<()> {
        for row in self.matrix.rows() {
            let mut first = true;
            for v in row {
                if !first {
                    out.write_all(b" ")?;
                }
                write!(out, "{v:.16e}")?;
                first = false;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// A Cholesky factorization kept together with the matrix it came from.
pub struct FactoredOperator<T> {
    operator: DenseMatrix<T>,
    grid: Grid<T>,
    chol: Cholesky<T>,
    tolerance: T,
}

impl<T: Real> FactoredOperator<T> {
    fn new(operator: DenseMatrix<T>, grid: Grid<T>) -> Result<Self> {
        let chol = Cholesky::factor(&operator)?;
        Ok(Self {
            operator,
            grid,
            chol,
            tolerance: Tolerances::default().linear_residual,
        })
    }

    pub fn with_tolerance(mut self, tolerance: T) -> Self {
        self.tolerance = tolerance;
        self
    }

    /// Solves `A u = rhs`, refining iteratively until
    /// `‖A u - rhs‖∞ ≤ tol ‖rhs‖∞` (at most three corrections).
    pub fn solve(&self, rhs: &GridFunction<T>) -> Result<GridFunction<T>> {
        if *rhs.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        let b = rhs.values();
        let target = self.tolerance * sup_norm(b);
        let mut u = self.chol.solve(b);
        for _ in 0..3 {
            let r: Vec<T> = self
                .operator
                .mul_vec(&u)
                .iter()
                .zip(b)
                .map(|(au, bi)| *bi - *au)
                .collect();
            if sup_norm(&r) <= target {
                break;
            }
            let du = self.chol.solve(&r);
            for (ui, di) in u.iter_mut().zip(du) {
                *ui = *ui + di;
            }
        }
        GridFunction::new(self.grid, u)
    }

    pub fn solve_values(&self, rhs: &[T]) -> Vec<T> {
        self.chol.solve(rhs)
    }
}

/// Direct solve of `A u = rhs`.
pub fn solve_linear<T: Real>(a: &OperatorMatrix<T>, rhs: &GridFunction<T>) -> Result<GridFunction<T>> {
    a.check_grid(rhs)?;
    a.factor()?.solve(rhs)
}

/// Gagliardo seminorm `[u] = (∫∫ (ũ(x) - ũ(y))² / |x-y|^{1+2s} dx dy)^{1/2}`
/// of the piecewise-linear zero extension `ũ`.
///
/// The outer integral runs over the lattice `a + hℤ` with nodal weight `h`;
/// the inner one uses the same hat moments as [`assemble_operator`]. Pairs
/// with one exterior node are summed in closed form and counted twice (both
/// orderings); exterior–exterior pairs vanish.
pub fn gagliardo_seminorm<T: Real>(u: &GridFunction<T>, order: FracOrder<T>) -> T {
    let grid = u.grid();
    let n = grid.len();
    let h = grid.step();
    let moments = KernelMoments::new(order, n);
    let v = u.values();

    let mut pairs = T::zero();
    for i in 0..n {
        let mut row = T::zero();
        for j in 0..n {
            if i != j {
                let d = v[i] - v[j];
                row = row + moments.weight(i.abs_diff(j)) * d * d;
            }
        }
        let exterior = moments.tail_sum(i + 1) + moments.tail_sum(n - i);
        pairs = pairs + row + T::lit(2.0) * exterior * v[i] * v[i];
    }
    (h * h.powf(-T::lit(2.0) * order.value()) * pairs).sqrt()
}
