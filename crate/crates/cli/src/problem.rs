//! Discretized problem shared by every subcommand: grid, operator, principal
//! eigenpair and torsion function, plus resolution of relative parameters.

use fracsteady::ThresholdSet as Thresholds;
use fracsteady::{
    assemble_operator, build_grid, harvesting_profile, principal_eigenpair, thresholds, torsion_function, EigenPair,
    Error, Grid, GridFunction, Interval, ModelParams, OperatorMatrix, Order, Tolerances,
};
use log::{info, warn};

use crate::config::{usage, Harvest, Lambda, ModelSpec, RunConfig};

/// Library errors caused by bad input become usage errors; the rest are
/// numerical failures.
pub fn lib_error(e: Error) -> anyhow::Error {
    match e {
        Error::InvalidDomain(_)
        | Error::InvalidProfile(_)
        | Error::InvalidOrder(_)
        | Error::UnsupportedDimension(_)
        | Error::InvalidArgument(_) => usage(e.to_string()),
        other => anyhow::Error::new(other),
    }
}

pub struct Problem {
    pub grid: Grid,
    pub order: Order,
    pub a: OperatorMatrix,
    pub eig: EigenPair,
    pub e: GridFunction,
    pub profile: GridFunction,
    pub tol: Tolerances,
}

impl Problem {
    pub fn build(cfg: &RunConfig) -> anyhow::Result<Self> {
        let tol = cfg.tolerances.resolve()?;
        let interval = Interval::new(cfg.domain.a, cfg.domain.b).map_err(lib_error)?;
        let grid = build_grid(interval, cfg.domain.n).map_err(lib_error)?;
        let order = Order::new(cfg.operator.s).map_err(lib_error)?;
        if !order.below_dimension_threshold() {
            warn!(
                "s = {} >= 1/2: the existence theory assumes N > 2s, which fails in one dimension; results are numerical observations only",
                cfg.operator.s
            );
        }
        let profile = harvesting_profile(&grid, &cfg.model.profile).map_err(lib_error)?;
        let a = assemble_operator(&grid, order).map_err(lib_error)?;
        let eig = principal_eigenpair(&a, &tol).map_err(lib_error)?;
        let e = torsion_function(&a).map_err(lib_error)?;
        info!(
            "n = {}, s = {}, lambda1 = {:.10} ({} inverse iterations)",
            grid.len(),
            cfg.operator.s,
            eig.lambda1,
            eig.iterations
        );
        Ok(Self {
            grid,
            order,
            a,
            eig,
            e,
            profile,
            tol,
        })
    }

    pub fn lambda(&self, spec: &ModelSpec) -> f64 {
        match spec.lambda {
            Lambda::Absolute(l) => l,
            Lambda::OverLambda1(r) => r * self.eig.lambda1,
        }
    }

    /// Thresholds for the sub/supersolution pair. `θ`, `m_λ`, `ε*` and
    /// `A_super` do not involve `c`, so for `c = 0` a unit grazing rate
    /// stands in; only `σ̲` and `σ̄` are then meaningless.
    pub fn bracket_thresholds(&self, params: &ModelParams) -> fracsteady::Result<Thresholds> {
        if params.grazing > 0.0 {
            thresholds(params, &self.eig, &self.e)
        } else {
            thresholds(&params.with_grazing(1.0)?, &self.eig, &self.e)
        }
    }

    /// Resolves `λ` and `ε` and validates the result.
    pub fn params(&self, spec: &ModelSpec) -> anyhow::Result<ModelParams> {
        let lambda = self.lambda(spec);
        let eps = match spec.eps {
            Harvest::Absolute(e) => e,
            Harvest::OverEpsStar(r) => {
                if !(lambda > self.eig.lambda1) {
                    return Err(usage(format!(
                        "eps_over_eps_star needs lambda > lambda1 (lambda = {lambda}, lambda1 = {})",
                        self.eig.lambda1
                    )));
                }
                let probe = self.model(lambda, spec.k, spec.c.max(0.0), 0.0)?;
                r * self.bracket_thresholds(&probe).map_err(lib_error)?.eps_star
            }
        };
        self.model(lambda, spec.k, spec.c, eps)
    }

    fn model(&self, lambda: f64, k: f64, c: f64, eps: f64) -> anyhow::Result<ModelParams> {
        ModelParams::new(lambda, k, c, eps, self.order, self.profile.clone()).map_err(lib_error)
    }
}
