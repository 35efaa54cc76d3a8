//! Existence maps over two model parameters.
//!
//! Cells are independent jobs on a bounded rayon pool. Results are collected
//! by cell index, so the worker count never changes the output.

use std::io::Write;

use fracsteady::{build_subsolution, build_supersolution, monotone_solve, Branch, Error};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{usage, ModelSpec, SweepConfig, SweepParam, UsageError};
use crate::problem::{lib_error, Problem};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MapCell {
    pub param1: f64,
    pub param2: f64,
    /// `λ > λ₁`, `c > 0`, `K ∈ (σ̲, σ̄)` and `ε ∈ (0, ε*)`.
    pub theorem_predicts: bool,
    /// Monotone iteration from the subsolution reached a positive solution.
    pub solver_found: bool,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExistenceMap {
    pub x_param: SweepParam,
    pub y_param: SweepParam,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Row-major in `y`: `cells[j * xs.len() + i]` is `(xs[i], ys[j])`.
    pub cells: Vec<MapCell>,
}

impl ExistenceMap {
    pub fn predicted(&self) -> usize {
        self.cells.iter().filter(|c| c.theorem_predicts).count()
    }

    pub fn predicted_and_found(&self) -> usize {
        self.cells.iter().filter(|c| c.theorem_predicts && c.solver_found).count()
    }

    pub fn found(&self) -> usize {
        self.cells.iter().filter(|c| c.solver_found).count()
    }

    /// Every theorem-predicted cell was solved.
    pub fn consistent(&self) -> bool {
        self.predicted() == self.predicted_and_found()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "param1,param2,theorem_predicts,solver_found,residual,iterations")?;
        for c in &self.cells {
            writeln!(
                out,
                "{:.16e},{:.16e},{},{},{:.16e},{}",
                c.param1, c.param2, c.theorem_predicts, c.solver_found, c.residual, c.iterations
            )?;
        }
        Ok(())
    }
}

fn solve_cell(problem: &Problem, spec: &ModelSpec, x: f64, y: f64) -> anyhow::Result<MapCell> {
    let mut cell = MapCell {
        param1: x,
        param2: y,
        theorem_predicts: false,
        solver_found: false,
        residual: f64::NAN,
        iterations: 0,
    };
    let lambda = problem.lambda(spec);
    if !(lambda > problem.eig.lambda1) {
        // outside the theorem and no subsolution to start from
        problem.params(&ModelSpec { eps: crate::config::Harvest::Absolute(0.0), ..*spec })?;
        return Ok(cell);
    }
    let params = problem.params(spec)?;
    let t = problem.bracket_thresholds(&params).map_err(lib_error)?;
    cell.theorem_predicts = params.grazing > 0.0 && t.window_contains(params.carrying_capacity, params.harvest);
    let lower = build_subsolution(&t, &problem.eig, &problem.e).map_err(lib_error)?;
    let upper = build_supersolution(&t, &problem.e);
    match monotone_solve(&lower, &upper, &params, &problem.a, Branch::Minimal, &problem.tol) {
        Ok(r) => {
            cell.residual = r.final_residual;
            cell.iterations = r.iterations;
            cell.solver_found = r.converged
                && r.ordered
                && r.solution.min() > 0.0
                && r.final_residual <= 10.0 * problem.tol.solve;
        }
        Err(Error::NonConvergence {
            iterations, residual, ..
        }) => {
            cell.residual = residual;
            cell.iterations = iterations;
        }
        Err(e) => return Err(lib_error(e)),
    }
    Ok(cell)
}

pub fn run_sweep(
    problem: &Problem,
    base: &ModelSpec,
    sweep: &SweepConfig,
    workers: Option<usize>,
) -> anyhow::Result<ExistenceMap> {
    sweep.validate()?;
    let xs = sweep.x.points()?;
    let ys = sweep.y.points()?;
    let jobs: Vec<(f64, f64)> = ys.iter().flat_map(|y| xs.iter().map(move |x| (*x, *y))).collect();

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w);
    }
    let pool = builder.build()?;
    let results: Vec<anyhow::Result<MapCell>> = pool.install(|| {
        jobs.par_iter()
            .map(|(x, y)| {
                let mut spec = *base;
                sweep.x.param.apply(&mut spec, *x);
                sweep.y.param.apply(&mut spec, *y);
                solve_cell(problem, &spec, *x, *y)
            })
            .collect()
    });
    let mut cells = Vec::with_capacity(results.len());
    for (k, r) in results.into_iter().enumerate() {
        let (x, y) = jobs[k];
        cells.push(r.map_err(|e| match e.downcast::<UsageError>() {
            Ok(u) => usage(format!("sweep cell ({x}, {y}): {u}")),
            Err(e) => e.context(format!("sweep cell ({x}, {y})")),
        })?);
    }
    Ok(ExistenceMap {
        x_param: sweep.x.param,
        y_param: sweep.y.param,
        xs,
        ys,
        cells,
    })
}
