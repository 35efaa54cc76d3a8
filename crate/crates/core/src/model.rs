//! Reaction term, existence thresholds and the explicit sub/supersolution pair.
//!
//! For `λ > λ₁` the supersolution is `A e` with `A ≥ λK/4` and the
//! subsolution is `m_λ (φ₁ - θ e)`, with
//!
//! ```text
//! α   = √(λ₁/λ)              η  = 1 + ((1-α)/2)²
//! m_λ = (1-α) / (2 ‖φ₁ - θe‖∞)
//! σ̄   = η / c                σ̲  = η / (2η + c)
//! ε*  = θ m_λ / λ
//! ```
//!
//! The window `K ∈ (σ̲, σ̄)`, `ε ∈ (0, ε*)` is where existence is predicted.
//! Whether the pair actually satisfies the discrete inequalities is decided
//! by [`check_subsupersolution`], never assumed.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fracop::{FracOrder, OperatorMatrix};
use crate::mesh::GridFunction;
use crate::scalar::{dot, Real};
use crate::spectral::EigenPair;
use crate::tolerances::Tolerances;

/// Parameters of the steady-state problem.
#[derive(Clone, Debug)]
pub struct ModelParams<T> {
    /// Inverse diffusion coefficient `λ`.
    pub lambda: T,
    /// Carrying capacity `K`.
    pub carrying_capacity: T,
    /// Maximum grazing rate `c`. Zero gives the pure logistic model.
    pub grazing: T,
    /// Harvesting level `ε`.
    pub harvest: T,
    pub order: FracOrder<T>,
    /// Harvesting profile `h`, `0 ≤ h ≤ 1`, `max h = 1`.
    pub profile: GridFunction<T>,
}

impl<T: Real> ModelParams<T> {
    pub fn new(
        lambda: T,
        carrying_capacity: T,
        grazing: T,
        harvest: T,
        order: FracOrder<T>,
        profile: GridFunction<T>,
    ) -> Result<Self> {
        let positive = |name: &str, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
            }
        };
        positive("lambda", lambda)?;
        positive("K", carrying_capacity)?;
        if !(grazing >= T::zero() && grazing.is_finite()) {
            return Err(Error::InvalidArgument(format!("c must be nonnegative, got {grazing}")));
        }
        if !(harvest >= T::zero() && harvest.is_finite()) {
            return Err(Error::InvalidArgument(format!("eps must be nonnegative, got {harvest}")));
        }
        if profile.min() < T::zero() || profile.max() != T::one() {
            return Err(Error::InvalidProfile(
                "harvesting profile must satisfy 0 <= h <= 1 with max h = 1".into(),
            ));
        }
        Ok(Self {
            lambda,
            carrying_capacity,
            grazing,
            harvest,
            order,
            profile,
        })
    }

    pub fn with_lambda(&self, lambda: T) -> Result<Self> {
        Self::new(lambda, self.carrying_capacity, self.grazing, self.harvest, self.order, self.profile.clone())
    }

    pub fn with_capacity(&self, k: T) -> Result<Self> {
        Self::new(self.lambda, k, self.grazing, self.harvest, self.order, self.profile.clone())
    }

    pub fn with_grazing(&self, c: T) -> Result<Self> {
        Self::new(self.lambda, self.carrying_capacity, c, self.harvest, self.order, self.profile.clone())
    }

    pub fn with_harvest(&self, eps: T) -> Result<Self> {
        Self::new(self.lambda, self.carrying_capacity, self.grazing, eps, self.order, self.profile.clone())
    }

    /// `f(u) = u - u²/K - c u²/(1+u²) - ε h` at one node.
    #[inline]
    pub fn reaction_at(&self, u: T, h: T) -> T {
        let u2 = u * u;
        u - u2 / self.carrying_capacity - self.grazing * u2 / (T::one() + u2) - self.harvest * h
    }

    /// `f'(u) = 1 - 2u/K - 2cu/(1+u²)²`.
    #[inline]
    pub fn reaction_slope_at(&self, u: T) -> T {
        let q = T::one() + u * u;
        T::one() - T::lit(2.0) * u / self.carrying_capacity - T::lit(2.0) * self.grazing * u / (q * q)
    }

    /// Upper bound of `|f'|` on `[0, upper]`.
    ///
    /// `f'` is sampled on a uniform mesh and the sampling error is covered by
    /// the Lipschitz bound `|f''| ≤ 2/K + 2c`.
    pub fn slope_bound(&self, upper: T) -> T {
        let upper = upper.max(T::zero());
        let samples = 2048usize;
        let step = upper / T::from_usize_lossy(samples);
        let mut worst = T::zero();
        for k in 0..=samples {
            let t = step * T::from_usize_lossy(k);
            worst = worst.max(self.reaction_slope_at(t).abs());
        }
        let lipschitz = T::lit(2.0) / self.carrying_capacity + T::lit(2.0) * self.grazing;
        worst + lipschitz * step / T::lit(2.0)
    }

    fn check_grid(&self, u: &GridFunction<T>) -> Result<()> {
        u.ensure_same_grid(&self.profile)
    }
}

/// Nodewise reaction `f(u)`, not yet scaled by `λ`.
pub fn reaction<T: Real>(u: &GridFunction<T>, p: &ModelParams<T>) -> Result<GridFunction<T>> {
    p.check_grid(u)?;
    u.zip_map(&p.profile, |v, h| p.reaction_at(v, h))
}

/// Nodewise derivative `f'(u)`.
pub fn reaction_derivative<T: Real>(u: &GridFunction<T>, p: &ModelParams<T>) -> Result<GridFunction<T>> {
    p.check_grid(u)?;
    Ok(u.map(|v| p.reaction_slope_at(v)))
}

/// Constants of the existence construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThresholdSet<T> {
    pub alpha: T,
    pub theta: T,
    pub eta: T,
    pub m_lambda: T,
    pub sigma_lower: T,
    pub sigma_upper: T,
    pub eps_star: T,
    #[serde(rename = "A_super")]
    pub a_super: T,
}

impl<T: Real> ThresholdSet<T> {
    /// `K ∈ (σ̲, σ̄)` and `ε ∈ (0, ε*)`, both open.
    pub fn window_contains(&self, k: T, eps: T) -> bool {
        k > self.sigma_lower && k < self.sigma_upper && eps > T::zero() && eps < self.eps_star
    }

    /// `θ m_λ - λ ε`, nonnegative whenever `ε ≤ ε*`.
    pub fn harvest_margin(&self, lambda: T, eps: T) -> T {
        self.theta * self.m_lambda - lambda * eps
    }
}

/// Computes the thresholds for `p` from the principal eigenpair and the
/// torsion function `e`.
///
/// `θ = ½ (1 - α) min(φ₁/e)`, which keeps `φ₁ - θe ≥ ½(1 + α) φ₁ > α φ₁`.
/// `A_super` is the larger of `λK/4` and the least amplitude with
/// `A e ≥ m_λ(φ₁ - θe)` at every node.
pub fn thresholds<T: Real>(p: &ModelParams<T>, eig: &EigenPair<T>, e: &GridFunction<T>) -> Result<ThresholdSet<T>> {
    p.check_grid(&eig.phi1)?;
    p.check_grid(e)?;
    if !(p.lambda > eig.lambda1) {
        return Err(Error::HypothesisViolated {
            lambda: p.lambda.as_f64(),
            lambda1: eig.lambda1.as_f64(),
        });
    }
    if !(p.grazing > T::zero()) {
        return Err(Error::InvalidArgument(
            "the existence window needs a positive grazing rate c".into(),
        ));
    }
    let half = T::lit(0.5);
    let alpha = (eig.lambda1 / p.lambda).sqrt();
    let phi = eig.phi1.values();
    let ev = e.values();
    if ev.iter().any(|v| !(*v > T::zero())) {
        return Err(Error::DegenerateGap("torsion function is not positive".into()));
    }
    let min_ratio = phi
        .iter()
        .zip(ev)
        .map(|(f, t)| *f / *t)
        .fold(T::infinity(), T::min);
    let theta = half * (T::one() - alpha) * min_ratio;
    if !(theta > T::zero()) {
        return Err(Error::DegenerateGap(format!("theta = {theta} is not positive")));
    }
    let gap: Vec<T> = phi.iter().zip(ev).map(|(f, t)| *f - theta * *t).collect();
    let margin = gap
        .iter()
        .zip(phi)
        .map(|(g, f)| *g - alpha * *f)
        .fold(T::infinity(), T::min);
    if !(margin > T::zero()) {
        return Err(Error::DegenerateGap(format!(
            "phi1 - theta e exceeds alpha phi1 by only {margin}"
        )));
    }
    let gap_sup = gap.iter().copied().fold(T::zero(), T::max);
    let m_lambda = (T::one() - alpha) / (T::lit(2.0) * gap_sup);
    let eta = T::one() + ((T::one() - alpha) * half).powi(2);
    let c = p.grazing;
    let ordering = gap
        .iter()
        .zip(ev)
        .map(|(g, t)| m_lambda * *g / *t)
        .fold(T::zero(), T::max);
    Ok(ThresholdSet {
        alpha,
        theta,
        eta,
        m_lambda,
        sigma_lower: eta / (T::lit(2.0) * eta + c),
        sigma_upper: eta / c,
        eps_star: theta * m_lambda / p.lambda,
        a_super: (p.lambda * p.carrying_capacity / T::lit(4.0)).max(ordering),
    })
}

/// `A_super · e`.
pub fn build_supersolution<T: Real>(t: &ThresholdSet<T>, e: &GridFunction<T>) -> GridFunction<T> {
    e.scaled(t.a_super)
}

/// `m_λ (φ₁ - θ e)`.
pub fn build_subsolution<T: Real>(
    t: &ThresholdSet<T>,
    eig: &EigenPair<T>,
    e: &GridFunction<T>,
) -> Result<GridFunction<T>> {
    eig.phi1.zip_map(e, |f, v| t.m_lambda * (f - t.theta * v))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ResidualKind {
    Subsolution,
    Supersolution,
}

/// Extremes of the nodal residual `A u - λ h f(u)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResidualReport<T> {
    pub min_residual: T,
    pub max_residual: T,
    pub kind: ResidualKind,
    pub pass: bool,
    pub tolerance: T,
}

/// Checks the discrete sub- or supersolution inequality at every node.
///
/// Hat functions are nonnegative test functions, so the nodal sign
/// conditions are the discrete form of the weak inequalities.
pub fn check_subsupersolution<T: Real>(
    u: &GridFunction<T>,
    p: &ModelParams<T>,
    a: &OperatorMatrix<T>,
    kind: ResidualKind,
    tol: &Tolerances<T>,
) -> Result<ResidualReport<T>> {
    p.check_grid(u)?;
    let au = a.apply(u)?;
    let f = reaction(u, p)?;
    let scale = p.lambda * a.grid().step();
    let r = au.zip_map(&f, |x, y| x - scale * y)?;
    let tolerance = tol.residual_check * (T::one() + au.sup_norm());
    let (min_residual, max_residual) = (r.min(), r.max());
    let pass = match kind {
        ResidualKind::Subsolution => max_residual <= tolerance,
        ResidualKind::Supersolution => min_residual >= -tolerance,
    };
    Ok(ResidualReport {
        min_residual,
        max_residual,
        kind,
        pass,
        tolerance,
    })
}

/// Energy test for a positive candidate `u`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CertificateReport<T> {
    /// `true` when `(λ - λ₁)‖u‖² < ∫(u²/K + c u²/(1+u²) + εh) u`, so `u`
    /// cannot be a positive solution.
    pub violated: bool,
    /// `(λ - λ₁) h Σ u²`.
    pub energy_gap: T,
    /// `h Σ (u²/K + c u²/(1+u²) + ε h) u`.
    pub reaction_energy: T,
    pub tolerance: T,
}

/// Any positive solution satisfies `(λ - λ₁) ∫u² ≥ ∫(u²/K + c u²/(1+u²) + εh) u ≥ 0`.
/// Reports whether `u` breaks that inequality.
pub fn nonexistence_certificate<T: Real>(
    u: &GridFunction<T>,
    p: &ModelParams<T>,
    eig: &EigenPair<T>,
    tol: &Tolerances<T>,
) -> Result<CertificateReport<T>> {
    p.check_grid(u)?;
    if u.values().iter().any(|v| *v < T::zero()) {
        return Err(Error::InvalidArgument("certificate needs a nonnegative candidate".into()));
    }
    if u.values().iter().all(|v| *v == T::zero()) {
        return Err(Error::InvalidArgument("certificate needs a nonzero candidate".into()));
    }
    let h = u.grid().step();
    let v = u.values();
    let energy_gap = (p.lambda - eig.lambda1) * h * dot(v, v);
    let reaction_energy = h * v
        .iter()
        .zip(p.profile.values())
        .map(|(x, hp)| {
            let x2 = *x * *x;
            (x2 / p.carrying_capacity + p.grazing * x2 / (T::one() + x2) + p.harvest * *hp) * *x
        })
        .sum::<T>();
    let tolerance = tol.certificate * energy_gap.abs().max(reaction_energy.abs());
    Ok(CertificateReport {
        violated: energy_gap < reaction_energy - tolerance,
        energy_gap,
        reaction_energy,
        tolerance,
    })
}
