//! Monotone iteration between an ordered sub/supersolution pair, damped
//! Newton refinement, and the discrete weak residual.
//!
//! Residuals are reported in the scaled form
//! `‖A u - λ h f(u)‖∞ / (h (1 + ‖u‖∞))`, which removes the lumped mass `h`
//! and the amplitude of `u`, so one tolerance serves every grid.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fracop::OperatorMatrix;
use crate::linalg::Lu;
use crate::mesh::GridFunction;
use crate::model::{reaction, ModelParams};
use crate::scalar::{dot, sup_norm, Real};
use crate::tolerances::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// Monotone iteration started from the subsolution.
    Minimal,
    /// Monotone iteration started from the supersolution.
    Maximal,
    Newton,
}

#[derive(Clone, Debug)]
pub struct SolveReport<T> {
    pub solution: GridFunction<T>,
    pub iterations: usize,
    /// Scaled nonlinear residual of `solution`.
    pub final_residual: T,
    /// `lower ≤ solution ≤ upper` up to `10 · tol.solve · (1 + ‖upper‖∞)`.
    /// Always `true` for Newton, which has no bracket.
    pub ordered: bool,
    /// Largest step against the expected direction of a monotone branch,
    /// relative to `1 + ‖u‖∞`. Zero for Newton.
    pub monotone_violation: T,
    pub branch: Branch,
    pub converged: bool,
    /// Newton stopped on a singular Jacobian.
    pub singular_jacobian: bool,
    /// Scaled residual after every iteration.
    pub residual_history: Vec<T>,
    /// Newton iterates, starting with `u0`. Empty for monotone branches.
    pub iterates: Vec<GridFunction<T>>,
}

/// `A u - λ h f(u)`.
fn nonlinear_residual<T: Real>(u: &[T], p: &ModelParams<T>, a: &OperatorMatrix<T>) -> Vec<T> {
    let scale = p.lambda * a.grid().step();
    a.matrix()
        .mul_vec(u)
        .into_iter()
        .zip(u.iter().zip(p.profile.values()))
        .map(|(au, (x, h))| au - scale * p.reaction_at(*x, *h))
        .collect()
}

fn scaled_norm<T: Real>(r: &[T], u: &[T], h: T) -> T {
    sup_norm(r) / (h * (T::one() + sup_norm(u)))
}

/// Scaled nonlinear residual of `u`.
pub fn residual_norm<T: Real>(u: &GridFunction<T>, p: &ModelParams<T>, a: &OperatorMatrix<T>) -> Result<T> {
    a.check_grid(u)?;
    p.profile.ensure_same_grid(u)?;
    let r = nonlinear_residual(u.values(), p, a);
    Ok(scaled_norm(&r, u.values(), a.grid().step()))
}

/// Monotone iteration
///
/// ```text
/// (A + M h I) u_{k+1} = h (λ f(u_k) + M u_k),   M = λ max(1, sup_[0, max ū] |f'|),
/// ```
///
/// from `lower` ([`Branch::Minimal`]) or `upper` ([`Branch::Maximal`]).
/// The shift makes `u ↦ λf(u) + Mu` nondecreasing on `[0, max ū]`, so the
/// iterates move monotonically and stay inside the bracket. Stops when the
/// increment is below `tol.solve (1 + ‖u‖∞)` and the scaled residual is
/// below `tol.solve`.
pub fn monotone_solve<T: Real>(
    lower: &GridFunction<T>,
    upper: &GridFunction<T>,
    p: &ModelParams<T>,
    a: &OperatorMatrix<T>,
    branch: Branch,
    tol: &Tolerances<T>,
) -> Result<SolveReport<T>> {
    a.check_grid(lower)?;
    a.check_grid(upper)?;
    p.profile.ensure_same_grid(lower)?;
    if let Some((node, excess)) = lower
        .values()
        .iter()
        .zip(upper.values())
        .map(|(l, u)| *l - *u)
        .enumerate()
        .find(|(_, d)| *d > T::zero())
    {
        return Err(Error::InvalidPair {
            node,
            excess: excess.as_f64(),
        });
    }
    let start = match branch {
        Branch::Minimal => lower,
        Branch::Maximal => upper,
        Branch::Newton => {
            return Err(Error::InvalidArgument(
                "monotone iteration runs on the minimal or maximal branch".into(),
            ))
        }
    };

    let h = a.grid().step();
    let shift = p.lambda * T::one().max(p.slope_bound(upper.max()));
    let factor = a.factor_shifted(shift)?;
    let direction = if branch == Branch::Minimal { T::one() } else { -T::one() };

    let mut u = start.values().to_vec();
    let mut violation = T::zero();
    let mut history = Vec::new();
    let mut increment = T::infinity();
    let mut residual = T::infinity();

    for iteration in 1..=tol.monotone_max_iter {
        let rhs: Vec<T> = u
            .iter()
            .zip(p.profile.values())
            .map(|(x, hp)| h * (p.lambda * p.reaction_at(*x, *hp) + shift * *x))
            .collect();
        let next = factor.solve_values(&rhs);
        let amplitude = T::one() + sup_norm(&u);
        increment = T::zero();
        for (old, new) in u.iter().zip(&next) {
            let step = *new - *old;
            increment = increment.max(step.abs());
            violation = violation.max(-direction * step / amplitude);
        }
        u = next;
        residual = scaled_norm(&nonlinear_residual(&u, p, a), &u, h);
        history.push(residual);
        if increment <= tol.solve * amplitude && residual <= tol.solve {
            let solution = GridFunction::new(*a.grid(), u)?;
            let slack = T::lit(10.0) * tol.solve * (T::one() + upper.sup_norm());
            let ordered = solution
                .values()
                .iter()
                .zip(lower.values().iter().zip(upper.values()))
                .all(|(x, (l, up))| *x >= *l - slack && *x <= *up + slack);
            return Ok(SolveReport {
                solution,
                iterations: iteration,
                final_residual: residual,
                ordered,
                monotone_violation: violation,
                branch,
                converged: true,
                singular_jacobian: false,
                residual_history: history,
                iterates: Vec::new(),
            });
        }
    }
    Err(Error::NonConvergence {
        method: "monotone iteration",
        iterations: tol.monotone_max_iter,
        residual: residual.as_f64(),
        increment: increment.as_f64(),
    })
}

/// Damped Newton on `F(u) = A u - λ h f(u)` with Jacobian
/// `A - λ h diag f'(u)` and a halving line search on `‖F‖∞`.
///
/// The Jacobian may be indefinite, so it is factored by pivoted LU. A
/// singular Jacobian ends the run with `singular_jacobian = true` rather than
/// an error; running out of iterations or of line-search steps is an error.
pub fn newton_solve<T: Real>(
    u0: &GridFunction<T>,
    p: &ModelParams<T>,
    a: &OperatorMatrix<T>,
    tol: &Tolerances<T>,
) -> Result<SolveReport<T>> {
    a.check_grid(u0)?;
    p.profile.ensure_same_grid(u0)?;
    let grid = *a.grid();
    let h = grid.step();
    let mass = p.lambda * h;

    let mut u = u0.values().to_vec();
    let mut f = nonlinear_residual(&u, p, a);
    let mut residual = scaled_norm(&f, &u, h);
    let mut history = vec![residual];
    let mut iterates = vec![u0.clone()];
    let mut step_size = T::zero();

    let report = |u: Vec<T>, iterations, residual, converged, singular, history, iterates| -> Result<SolveReport<T>> {
        Ok(SolveReport {
            solution: GridFunction::new(grid, u)?,
            iterations,
            final_residual: residual,
            ordered: true,
            monotone_violation: T::zero(),
            branch: Branch::Newton,
            converged,
            singular_jacobian: singular,
            residual_history: history,
            iterates,
        })
    };

    for iteration in 0..=tol.newton_max_iter {
        if residual <= tol.solve {
            return report(u, iteration, residual, true, false, history, iterates);
        }
        if iteration == tol.newton_max_iter {
            break;
        }
        let slopes: Vec<T> = u.iter().map(|x| -mass * p.reaction_slope_at(*x)).collect();
        let jacobian = a.matrix().plus_diagonal(&slopes);
        let lu = match Lu::factor(&jacobian) {
            Ok(lu) => lu,
            Err(Error::SingularOperator { .. }) => {
                return report(u, iteration, residual, false, true, history, iterates)
            }
            Err(e) => return Err(e),
        };
        let delta = lu.solve(&f);
        let current = sup_norm(&f);

        let mut t = T::one();
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<T> = u.iter().zip(&delta).map(|(x, d)| *x - t * *d).collect();
            let f_trial = nonlinear_residual(&trial, p, a);
            if sup_norm(&f_trial) < current {
                accepted = Some((trial, f_trial));
                break;
            }
            t = t / T::lit(2.0);
        }
        let Some((trial, f_trial)) = accepted else {
            break;
        };
        step_size = t * sup_norm(&delta);
        u = trial;
        f = f_trial;
        residual = scaled_norm(&f, &u, h);
        history.push(residual);
        iterates.push(GridFunction::new(grid, u.clone())?);
    }
    Err(Error::NonConvergence {
        method: "Newton",
        iterations: history.len() - 1,
        residual: residual.as_f64(),
        increment: step_size.as_f64(),
    })
}

/// `vᵀ A u - λ h Σ f(u)_i v_i`: the weak form tested against the hat
/// function combination `v`.
pub fn weak_residual<T: Real>(
    u: &GridFunction<T>,
    v: &GridFunction<T>,
    p: &ModelParams<T>,
    a: &OperatorMatrix<T>,
) -> Result<T> {
    let f = reaction(u, p)?;
    weak_residual_with(u, v, a, p.lambda, |i, _| f.values()[i])
}

/// [`weak_residual`] with an arbitrary nodal right-hand side `g(i, u_i)`.
pub fn weak_residual_with<T: Real>(
    u: &GridFunction<T>,
    v: &GridFunction<T>,
    a: &OperatorMatrix<T>,
    lambda: T,
    g: impl Fn(usize, T) -> T,
) -> Result<T> {
    a.check_grid(u)?;
    a.check_grid(v)?;
    let au = a.matrix().mul_vec(u.values());
    let load: Vec<T> = u.values().iter().enumerate().map(|(i, x)| g(i, *x)).collect();
    Ok(dot(v.values(), &au) - lambda * a.grid().step() * dot(v.values(), &load))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracop::{assemble_operator, FracOrder};
    use crate::mesh::{build_grid, harvesting_profile, Interval, ProfileKind};
    use crate::model::{build_subsolution, build_supersolution, thresholds};
    use crate::spectral::{principal_eigenpair, torsion_function};

    struct Setup {
        a: OperatorMatrix<f64>,
        p: ModelParams<f64>,
        lower: GridFunction<f64>,
        upper: GridFunction<f64>,
    }

    fn setup(n: usize, c: f64, eps_frac: f64) -> Setup {
        let g = build_grid(Interval::new(-1.0, 1.0).unwrap(), n).unwrap();
        let s = FracOrder::new(0.5).unwrap();
        let a = assemble_operator(&g, s).unwrap();
        let tol = Tolerances::default();
        let eig = principal_eigenpair(&a, &tol).unwrap();
        let e = torsion_function(&a).unwrap();
        let prof = harvesting_profile(&g, &ProfileKind::Sine).unwrap();
        let p = ModelParams::new(2.0 * eig.lambda1, 1.0, c, 0.0, s, prof).unwrap();
        let t = thresholds(&p, &eig, &e).unwrap();
        let p = p
            .with_capacity(0.5 * (t.sigma_lower + t.sigma_upper))
            .unwrap()
            .with_harvest(eps_frac * t.eps_star)
            .unwrap();
        let t = thresholds(&p, &eig, &e).unwrap();
        let lower = build_subsolution(&t, &eig, &e).unwrap();
        let upper = build_supersolution(&t, &e);
        Setup { a, p, lower, upper }
    }

    #[test]
    fn minimal_branch_converges_inside_bracket() {
        let s = setup(48, 1.0, 0.5);
        let tol = Tolerances::default();
        let r = monotone_solve(&s.lower, &s.upper, &s.p, &s.a, Branch::Minimal, &tol).unwrap();
        assert!(r.converged && r.ordered);
        assert!(r.final_residual <= tol.solve);
        assert!(r.monotone_violation <= 1e-10);
        assert!(r.solution.min() > 0.0);
    }

    #[test]
    fn fixed_point_is_stationary() {
        let s = setup(32, 1.0, 0.5);
        let tol = Tolerances::default();
        let r = monotone_solve(&s.lower, &s.upper, &s.p, &s.a, Branch::Maximal, &tol).unwrap();
        let again = monotone_solve(&r.solution, &r.solution, &s.p, &s.a, Branch::Minimal, &tol).unwrap();
        assert!(again.iterations <= 1);
        let diff = again.solution.zip_map(&r.solution, |x, y| x - y).unwrap().sup_norm();
        assert!(diff <= 1e-9 * (1.0 + r.solution.sup_norm()));
    }

    #[test]
    fn unordered_pair_is_rejected() {
        let s = setup(16, 1.0, 0.5);
        let tol = Tolerances::default();
        let err = monotone_solve(&s.upper, &s.lower, &s.p, &s.a, Branch::Minimal, &tol).unwrap_err();
        assert!(matches!(err, Error::InvalidPair { .. }));
    }

    #[test]
    fn monotone_cap_reports_nonconvergence() {
        let s = setup(16, 1.0, 0.5);
        let tol = Tolerances {
            monotone_max_iter: 2,
            ..Tolerances::default()
        };
        let err = monotone_solve(&s.lower, &s.upper, &s.p, &s.a, Branch::Minimal, &tol).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { iterations: 2, .. }));
    }

    #[test]
    fn newton_polishes_monotone_output() {
        let s = setup(48, 1.0, 0.5);
        let tol = Tolerances::default();
        let r = monotone_solve(&s.lower, &s.upper, &s.p, &s.a, Branch::Minimal, &tol).unwrap();
        let tight = Tolerances {
            solve: 1e-12,
            ..tol
        };
        let n = newton_solve(&r.solution, &s.p, &s.a, &tight).unwrap();
        assert!(n.converged);
        assert!(n.iterations <= 5);
        assert!(n.final_residual <= 1e-12);
        assert_eq!(n.iterates.len(), n.iterations + 1);
    }

    #[test]
    fn residual_at_zero_is_harvest() {
        let s = setup(16, 1.0, 0.5);
        let zero = GridFunction::zeros(*s.a.grid());
        let r = nonlinear_residual(zero.values(), &s.p, &s.a);
        let h = s.a.grid().step();
        for (ri, hp) in r.iter().zip(s.p.profile.values()) {
            assert!((ri - s.p.lambda * h * s.p.harvest * hp).abs() <= 1e-15);
        }
    }

    #[test]
    fn weak_residual_of_torsion() {
        let s = setup(24, 1.0, 0.5);
        let e = torsion_function(&s.a).unwrap();
        let v = GridFunction::from_fn(*s.a.grid(), |x| (3.0 * x).cos() + 2.0);
        let lambda = 1.7;
        let r = weak_residual_with(&e, &v, &s.a, lambda, |_, _| 1.0 / lambda).unwrap();
        assert!(r.abs() <= 1e-12);
        let zero = GridFunction::zeros(*s.a.grid());
        assert_eq!(weak_residual(&e, &zero, &s.p, &s.a).unwrap(), 0.0);
    }
}
