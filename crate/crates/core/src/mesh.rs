//! Interval domains, uniform grids and nodal grid functions.
//!
//! A [`GridFunction`] stores only the interior nodal values. The function is
//! understood to vanish at both endpoints and everywhere outside the interval,
//! which is exactly the exterior Dirichlet condition of the nonlocal problem.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{sup_norm, Real};

/// Open interval `(a, b)` with `a < b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval<T> {
    a: T,
    b: T,
}

impl<T: Real> Interval<T> {
    pub fn new(a: T, b: T) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::InvalidDomain(format!(
                "need finite a < b, got ({a}, {b})"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn b(&self) -> T {
        self.b
    }

    pub fn length(&self) -> T {
        self.b - self.a
    }

    pub fn midpoint(&self) -> T {
        (self.a + self.b) / T::lit(2.0)
    }
}

/// Uniform grid with `n` interior nodes `x_i = a + i h`, `i = 1..=n`,
/// `h = (b - a) / (n + 1)`.
///
/// Nodes are addressed with zero-based indices, so `node(0)` is `x_1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid<T> {
    interval: Interval<T>,
    n: usize,
    h: T,
}

impl<T: Real> Grid<T> {
    pub fn new(interval: Interval<T>, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDomain(format!(
                "need at least 2 interior nodes, got {n}"
            )));
        }
        let h = interval.length() / T::from_usize_lossy(n + 1);
        Ok(Self { interval, n, h })
    }

    pub fn interval(&self) -> Interval<T> {
        self.interval
    }

    /// Number of interior nodes.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Mesh width.
    pub fn step(&self) -> T {
        self.h
    }

    pub fn node(&self, i: usize) -> T {
        debug_assert!(i < self.n);
        self.interval.a + T::from_usize_lossy(i + 1) * self.h
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Distance to the nearer endpoint, measured in mesh widths. Exact for
    /// uniform grids: node `i` sits `i + 1` steps from `a` and `n - i` from `b`.
    pub fn steps_to_boundary(&self, i: usize) -> usize {
        (i + 1).min(self.n - i)
    }
}

/// Builds the uniform grid with `n` interior nodes on `interval`.
pub fn build_grid<T: Real>(interval: Interval<T>, n: usize) -> Result<Grid<T>> {
    Grid::new(interval, n)
}

/// Interior nodal values of a function that vanishes outside the interval.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction<T> {
    grid: Grid<T>,
    values: Vec<T>,
}

impl<T: Real> GridFunction<T> {
    pub fn new(grid: Grid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} nodal values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        Self::constant(grid, T::zero())
    }

    pub fn constant(grid: Grid<T>, value: T) -> Self {
        Self {
            grid,
            values: vec![value; grid.len()],
        }
    }

    /// Samples `f` at the interior nodes.
    pub fn from_fn(grid: Grid<T>, f: impl Fn(T) -> T) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.node(i))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> T {
        sup_norm(&self.values)
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn scaled(&self, factor: T) -> Self {
        self.map(|v| v * factor)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }

    /// Nodewise combination of two functions on the same grid.
    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        self.ensure_same_grid(other)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        })
    }

    pub fn ensure_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Writes `x,value` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "x,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{:.16e},{:.16e}", self.grid.node(i), v)?;
        }
        Ok(())
    }
}

/// `min(x_i - a, b - x_i)` at every interior node.
pub fn boundary_distance<T: Real>(grid: &Grid<T>) -> GridFunction<T> {
    let values = (0..grid.len())
        .map(|i| T::from_usize_lossy(grid.steps_to_boundary(i)) * grid.step())
        .collect();
    GridFunction {
        grid: *grid,
        values,
    }
}

/// Spatial shape of the harvesting rate.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    /// `sin(pi (x - a) / (b - a))`.
    #[default]
    Sine,
    /// Smooth compactly supported bump `exp(1 - 1 / (1 - r^2))`, `r` the
    /// normalized offset from the midpoint.
    Bump,
    /// Nodal values supplied by the caller.
    Custom(Vec<f64>),
}


/// Harvesting profile `h >= 0`, normalized so that `max h = 1`.
pub fn harvesting_profile<T: Real>(grid: &Grid<T>, kind: &ProfileKind) -> Result<GridFunction<T>> {
    let interval = grid.interval();
    let raw = match kind {
        ProfileKind::Sine => GridFunction::from_fn(*grid, |x| {
            (T::PI() * (x - interval.a()) / interval.length()).sin().max(T::zero())
        }),
        ProfileKind::Bump => {
            let half = interval.length() / T::lit(2.0);
            let mid = interval.midpoint();
            GridFunction::from_fn(*grid, |x| {
                let r = (x - mid) / half;
                let q = T::one() - r * r;
                if q <= T::zero() {
                    T::zero()
                } else {
                    (T::one() - T::one() / q).exp()
                }
            })
        }
        ProfileKind::Custom(values) => {
            if values.len() != grid.len() {
                return Err(Error::InvalidProfile(format!(
                    "expected {} values, got {}",
                    grid.len(),
                    values.len()
                )));
            }
            if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(Error::InvalidProfile(format!(
                    "entries must be finite and nonnegative, found {bad}"
                )));
            }
            GridFunction::new(*grid, values.iter().map(|v| T::lit(*v)).collect())?
        }
    };
    let peak = raw.max();
    if !(peak > T::zero()) {
        return Err(Error::InvalidProfile("profile vanishes identically".into()));
    }
    let mut h = raw.scaled(T::one() / peak);
    // the division can land one ulp off; pin the maximum to exactly one
    for v in h.values_mut() {
        *v = v.min(T::one());
    }
    if let Some(top) = h
        .values_mut()
        .iter_mut()
        .max_by(|x, y| x.partial_cmp(y).expect("finite"))
    {
        *top = T::one();
    }
    Ok(h)
}
