//! Subcommand implementations. Each returns `Ok(true)` when every assertion
//! it makes holds, `Ok(false)` when one fails, and `Err` when it cannot run.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use fracsteady::ResidualReport;
use fracsteady::spectral::{ball_torsion_constant, exact_torsion, torsion_error};
use fracsteady::{
    boundary_fit, build_subsolution, build_supersolution, check_subsupersolution, gagliardo_seminorm,
    monotone_solve, newton_solve, nonexistence_certificate, normalization_constant, rayleigh_quotient,
    solve_linear, thresholds, BoundaryFit, Branch, GridFunction, ModelParams, ResidualKind, SolveReport,
    ThresholdSet,
};
use log::{info, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{usage, Harvest, RunConfig};
use crate::problem::{lib_error, Problem};
use crate::svg::{heat_map, line_plot, HeatCell, Series};
use crate::sweep::run_sweep;

pub struct RunContext {
    pub cfg: RunConfig,
    pub out: PathBuf,
    pub dump_operator: Option<PathBuf>,
    pub workers: Option<usize>,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

/// CSV with an `x` column followed by one column per named series.
fn write_columns(path: &Path, x: &[f64], columns: &[(&str, &[f64])]) -> anyhow::Result<()> {
    let mut out = create(path)?;
    let names: Vec<&str> = columns.iter().map(|c| c.0).collect();
    writeln!(out, "x,{}", names.join(","))?;
    for (i, xi) in x.iter().enumerate() {
        write!(out, "{xi:.16e}")?;
        for (_, col) in columns {
            write!(out, ",{:.16e}", col[i])?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

fn prepare(ctx: &RunContext) -> anyhow::Result<Problem> {
    let problem = Problem::build(&ctx.cfg)?;
    fs::create_dir_all(&ctx.out).with_context(|| format!("creating {}", ctx.out.display()))?;
    if let Some(path) = &ctx.dump_operator {
        let out = create(path)?;
        problem.a.write_text(out).with_context(|| format!("writing {}", path.display()))?;
        info!("operator written to {}", path.display());
    }
    Ok(problem)
}

fn seed() -> anyhow::Result<u64> {
    match std::env::var("FRACSTEADY_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| usage(format!("FRACSTEADY_SEED must be an unsigned integer, got {v:?}"))),
        Err(_) => Ok(0),
    }
}

#[derive(Serialize)]
struct EigSummary {
    a: f64,
    b: f64,
    n: usize,
    s: f64,
    lambda1: f64,
    residual: f64,
    iterations: usize,
    boundary_fit: BoundaryFit,
}

pub fn eig(ctx: &RunContext) -> anyhow::Result<bool> {
    let p = prepare(ctx)?;
    let fit = boundary_fit(&p.eig.phi1, p.order).map_err(lib_error)?;
    write_columns(&ctx.out.join("eig.csv"), &p.grid.nodes(), &[("phi1", p.eig.phi1.values())])?;
    let iv = p.grid.interval();
    write_json(
        &ctx.out.join("eig.json"),
        &EigSummary {
            a: iv.a(),
            b: iv.b(),
            n: p.grid.len(),
            s: p.order.value(),
            lambda1: p.eig.lambda1,
            residual: p.eig.residual,
            iterations: p.eig.iterations,
            boundary_fit: fit,
        },
    )?;
    println!("lambda1 = {:.12}  (residual {:.2e})", p.eig.lambda1, p.eig.residual);
    Ok(p.eig.residual <= p.tol.eigen_residual)
}

#[derive(Serialize)]
struct TorsionSummary {
    n: usize,
    s: f64,
    kappa: f64,
    relative_error: f64,
    max: f64,
    boundary_fit: BoundaryFit,
}

pub fn torsion(ctx: &RunContext) -> anyhow::Result<bool> {
    let p = prepare(ctx)?;
    let exact = exact_torsion(&p.grid, p.order);
    let err = torsion_error(&p.e, p.order).map_err(lib_error)?;
    let fit = boundary_fit(&p.e, p.order).map_err(lib_error)?;
    write_columns(
        &ctx.out.join("torsion.csv"),
        &p.grid.nodes(),
        &[("e", p.e.values()), ("exact", exact.values())],
    )?;
    write_json(
        &ctx.out.join("torsion.json"),
        &TorsionSummary {
            n: p.grid.len(),
            s: p.order.value(),
            kappa: ball_torsion_constant(p.order),
            relative_error: err,
            max: p.e.max(),
            boundary_fit: fit,
        },
    )?;
    println!("relative sup error against the closed form: {:.4}%", 100.0 * err);
    Ok(p.e.min() > 0.0)
}

#[derive(Serialize)]
struct BranchSummary {
    branch: Branch,
    converged: bool,
    iterations: usize,
    final_residual: f64,
    ordered: bool,
    monotone_violation: f64,
    min: f64,
    max: f64,
}

impl BranchSummary {
    fn new(r: &SolveReport) -> Self {
        Self {
            branch: r.branch,
            converged: r.converged,
            iterations: r.iterations,
            final_residual: r.final_residual,
            ordered: r.ordered,
            monotone_violation: r.monotone_violation,
            min: r.solution.min(),
            max: r.solution.max(),
        }
    }

    fn acceptable(&self, tol: f64) -> bool {
        self.converged && self.ordered && self.min > 0.0 && self.final_residual <= 10.0 * tol
    }
}

#[derive(Serialize)]
struct ThresholdOutput<'a> {
    lambda: f64,
    lambda1: f64,
    #[serde(rename = "K")]
    k: f64,
    c: f64,
    eps: f64,
    in_window: bool,
    harvest_margin: f64,
    #[serde(flatten)]
    thresholds: &'a ThresholdSet,
}

#[derive(Serialize)]
struct SolveOutput {
    lambda: f64,
    lambda1: f64,
    #[serde(rename = "K")]
    k: f64,
    c: f64,
    eps: f64,
    s: f64,
    n: usize,
    in_window: bool,
    subsolution: ResidualReport,
    supersolution: ResidualReport,
    pair_ordered: bool,
    minimal: Option<BranchSummary>,
    maximal: Option<BranchSummary>,
    branch_gap: Option<f64>,
    error: Option<String>,
    passed: bool,
}

#[derive(Serialize)]
struct ProbeOutput {
    status: &'static str,
    message: String,
    lambda: f64,
    lambda1: f64,
    eps: f64,
    newton_converged: bool,
    singular_jacobian: bool,
    iterations: usize,
    limit_min: f64,
    limit_max: f64,
    positive_iterates: usize,
    certificate_fired: usize,
    passed: bool,
}

pub fn solve(ctx: &RunContext) -> anyhow::Result<bool> {
    let p = prepare(ctx)?;
    let spec = ctx.cfg.model.spec()?;
    let lambda = p.lambda(&spec);
    if !(lambda > p.eig.lambda1) {
        return nonexistence_probe(ctx, &p, lambda, spec.eps);
    }
    let params = p.params(&spec)?;
    if !(params.grazing > 0.0) {
        return Err(usage("solve builds the existence-window pair, which needs c > 0"));
    }
    let t = thresholds(&params, &p.eig, &p.e).map_err(lib_error)?;
    let in_window = t.window_contains(params.carrying_capacity, params.harvest);
    if !in_window {
        warn!("(K, eps) lies outside the existence window; the pair is checked, not assumed");
    }
    write_json(
        &ctx.out.join("thresholds.json"),
        &ThresholdOutput {
            lambda: params.lambda,
            lambda1: p.eig.lambda1,
            k: params.carrying_capacity,
            c: params.grazing,
            eps: params.harvest,
            in_window,
            harvest_margin: t.harvest_margin(params.lambda, params.harvest),
            thresholds: &t,
        },
    )?;

    let lower = build_subsolution(&t, &p.eig, &p.e).map_err(lib_error)?;
    let upper = build_supersolution(&t, &p.e);
    let sub = check_subsupersolution(&lower, &params, &p.a, ResidualKind::Subsolution, &p.tol).map_err(lib_error)?;
    let sup =
        check_subsupersolution(&upper, &params, &p.a, ResidualKind::Supersolution, &p.tol).map_err(lib_error)?;
    let pair_ordered = lower.values().iter().zip(upper.values()).all(|(l, u)| l <= u);
    if !sub.pass {
        warn!("subsolution check failed: max residual {:.3e} > {:.1e}", sub.max_residual, sub.tolerance);
    }
    if !sup.pass {
        warn!("supersolution check failed: min residual {:.3e}", sup.min_residual);
    }

    let mut out = SolveOutput {
        lambda: params.lambda,
        lambda1: p.eig.lambda1,
        k: params.carrying_capacity,
        c: params.grazing,
        eps: params.harvest,
        s: p.order.value(),
        n: p.grid.len(),
        in_window,
        subsolution: sub,
        supersolution: sup,
        pair_ordered,
        minimal: None,
        maximal: None,
        branch_gap: None,
        error: None,
        passed: false,
    };
    let solved = monotone_solve(&lower, &upper, &params, &p.a, Branch::Minimal, &p.tol).and_then(|lo| {
        monotone_solve(&lower, &upper, &params, &p.a, Branch::Maximal, &p.tol).map(|hi| (lo, hi))
    });
    match solved {
        Ok((lo, hi)) => {
            let gap = lo.solution.zip_map(&hi.solution, |a, b| (a - b).abs()).map_err(lib_error)?.sup_norm();
            let x = p.grid.nodes();
            write_columns(&ctx.out.join("solution.csv"), &x, &[("u", lo.solution.values())])?;
            let svg = line_plot(
                "sub/supersolution pair and monotone solution",
                &x,
                &[
                    Series { label: "subsolution", values: lower.values(), color: "#1f77b4" },
                    Series { label: "solution", values: lo.solution.values(), color: "#2ca02c" },
                    Series { label: "supersolution", values: upper.values(), color: "#d62728" },
                ],
                "x",
                "u",
            );
            fs::write(ctx.out.join("solution.svg"), svg)?;
            let (ls, hs) = (BranchSummary::new(&lo), BranchSummary::new(&hi));
            out.passed = sub.pass
                && sup.pass
                && pair_ordered
                && ls.acceptable(p.tol.solve)
                && hs.acceptable(p.tol.solve);
            println!(
                "minimal branch: {} iterations, residual {:.2e}, max u = {:.6}; maximal branch: {} iterations; gap {gap:.2e}",
                ls.iterations, ls.final_residual, ls.max, hs.iterations
            );
            out.minimal = Some(ls);
            out.maximal = Some(hs);
            out.branch_gap = Some(gap);
        }
        Err(e) => {
            warn!("monotone iteration failed: {e}");
            out.error = Some(e.to_string());
        }
    }
    write_json(&ctx.out.join("report.json"), &out)?;
    println!("solve: {}", if out.passed { "PASS" } else { "FAIL" });
    Ok(out.passed)
}

/// Below `λ₁` no positive solution exists. Newton is started from `0.1 φ₁`
/// and the energy certificate is evaluated on every positive iterate.
fn nonexistence_probe(ctx: &RunContext, p: &Problem, lambda: f64, eps: Harvest) -> anyhow::Result<bool> {
    let message = match thresholds(
        &ModelParams::new(lambda, 1.0, 1.0, 0.0, p.order, p.profile.clone()).map_err(lib_error)?,
        &p.eig,
        &p.e,
    ) {
        Err(e) => e.to_string(),
        Ok(_) => unreachable!("thresholds accepted lambda <= lambda1"),
    };
    warn!("{message}; running the nonexistence probe");
    // ε* is undefined below λ₁, so a relative harvest falls back to ε = 0
    let eps = match eps {
        Harvest::Absolute(e) => e,
        Harvest::OverEpsStar(_) => 0.0,
    };
    let spec = ctx.cfg.model.spec()?;
    let params = ModelParams::new(lambda, spec.k, spec.c, eps, p.order, p.profile.clone()).map_err(lib_error)?;
    let u0 = p.eig.phi1.scaled(0.1);
    let (run, iterates): (Option<SolveReport>, Vec<GridFunction>) = match newton_solve(&u0, &params, &p.a, &p.tol) {
        Ok(r) => {
            let it = r.iterates.clone();
            (Some(r), it)
        }
        Err(e) => {
            warn!("Newton probe: {e}");
            (None, vec![u0])
        }
    };
    let positive: Vec<&GridFunction> = iterates.iter().filter(|u| u.min() >= 0.0 && u.max() > 0.0).collect();
    let mut fired = 0;
    for u in &positive {
        if nonexistence_certificate(u, &params, &p.eig, &p.tol).map_err(lib_error)?.violated {
            fired += 1;
        }
    }
    let (limit_min, limit_max) = run
        .as_ref()
        .map(|r| (r.solution.min(), r.solution.max()))
        .unwrap_or((f64::NAN, f64::NAN));
    let out = ProbeOutput {
        status: "hypothesis_violated",
        message,
        lambda,
        lambda1: p.eig.lambda1,
        eps,
        newton_converged: run.as_ref().is_some_and(|r| r.converged),
        singular_jacobian: run.as_ref().is_some_and(|r| r.singular_jacobian),
        iterations: run.as_ref().map_or(0, |r| r.iterations),
        limit_min,
        limit_max,
        positive_iterates: positive.len(),
        certificate_fired: fired,
        passed: fired == positive.len(),
    };
    write_json(&ctx.out.join("report.json"), &out)?;
    println!(
        "nonexistence probe: certificate fired on {fired}/{} positive Newton iterates",
        positive.len()
    );
    Ok(out.passed)
}

pub fn sweep(ctx: &RunContext) -> anyhow::Result<bool> {
    let sweep = ctx
        .cfg
        .sweep
        .as_ref()
        .ok_or_else(|| usage("sweep needs a \"sweep\" section in the config"))?;
    sweep.validate()?;
    sweep.x.points()?;
    sweep.y.points()?;
    let p = prepare(ctx)?;
    let spec = ctx.cfg.model.spec()?;
    let map = run_sweep(&p, &spec, sweep, ctx.workers.or(ctx.cfg.workers))?;
    map.write_csv(create(&ctx.out.join("map.csv"))?)?;
    let cells: Vec<HeatCell> = map
        .cells
        .iter()
        .map(|c| HeatCell {
            filled: c.solver_found,
            marked: c.theorem_predicts,
        })
        .collect();
    let svg = heat_map(
        "existence map",
        &map.xs,
        &map.ys,
        &cells,
        (map.x_param.name(), map.y_param.name()),
        ("solver found", "not found", "theorem predicts"),
    );
    fs::write(ctx.out.join("map.svg"), svg)?;

    #[derive(Serialize)]
    struct Summary<'a> {
        x_param: &'a str,
        y_param: &'a str,
        cells: usize,
        theorem_predicts: usize,
        predicted_and_found: usize,
        solver_found: usize,
        lambda1: f64,
        consistent: bool,
    }
    write_json(
        &ctx.out.join("map.json"),
        &Summary {
            x_param: map.x_param.name(),
            y_param: map.y_param.name(),
            cells: map.cells.len(),
            theorem_predicts: map.predicted(),
            predicted_and_found: map.predicted_and_found(),
            solver_found: map.found(),
            lambda1: p.eig.lambda1,
            consistent: map.consistent(),
        },
    )?;
    println!(
        "{} cells: theorem predicts {}, solver found {} of those, {} in total",
        map.cells.len(),
        map.predicted(),
        map.predicted_and_found(),
        map.found()
    );
    Ok(map.consistent())
}

#[derive(Serialize)]
pub struct CheckRow {
    pub name: &'static str,
    /// `None` for informational rows.
    pub pass: Option<bool>,
    pub detail: String,
}

fn row(name: &'static str, pass: bool, detail: impl Into<String>) -> CheckRow {
    CheckRow {
        name,
        pass: Some(pass),
        detail: detail.into(),
    }
}

fn random(p: &Problem, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> GridFunction {
    let values = (0..p.grid.len()).map(|_| rng.gen_range(lo..hi)).collect();
    GridFunction::new(p.grid, values).expect("length matches grid")
}

pub fn verify_rows(p: &Problem, ctx: &RunContext) -> anyhow::Result<Vec<CheckRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed()?);
    let mut rows = Vec::new();
    let m = p.a.matrix();
    let n = m.dim();

    rows.push(row(
        "operator symmetric",
        m.asymmetry() <= p.tol.symmetry,
        format!("relative asymmetry {:.1e}", m.asymmetry()),
    ));
    let sign = (0..n).all(|i| m.get(i, i) > 0.0 && (0..n).all(|j| i == j || m.get(i, j) < 0.0));
    let dominant = (0..n).all(|i| {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| m.get(i, j).abs()).sum();
        m.get(i, i) > off
    });
    rows.push(row("M-matrix sign pattern", sign && dominant, "positive diagonal, negative off-diagonal, strict row dominance"));
    rows.push(row("positive definite", p.a.factor().is_ok(), "Cholesky factorization"));

    let mut min_sol = f64::INFINITY;
    for _ in 0..20 {
        let load = random(p, &mut rng, 0.0, 1.0);
        min_sol = min_sol.min(solve_linear(&p.a, &load).map_err(lib_error)?.min());
    }
    rows.push(row("maximum principle", min_sol >= 0.0, format!("20 nonnegative loads, min solution {min_sol:.2e}")));

    let c = normalization_constant(1, p.order).map_err(lib_error)?;
    let mut gap: f64 = 0.0;
    for _ in 0..10 {
        let u = random(p, &mut rng, -1.0, 1.0);
        let semi = gagliardo_seminorm(&u, p.order);
        let q = p.a.quadratic_form(&u).map_err(lib_error)?;
        gap = gap.max((0.5 * c * semi * semi - q).abs() / q.abs());
    }
    rows.push(row("quadratic-form identity", gap <= 1e-8, format!("max relative gap {gap:.1e}")));

    rows.push(row(
        "principal eigenpair",
        p.eig.residual <= p.tol.eigen_residual && p.eig.phi1.min() > 0.0,
        format!("lambda1 = {:.10}, residual {:.1e}", p.eig.lambda1, p.eig.residual),
    ));
    let mut lowest = f64::INFINITY;
    for _ in 0..50 {
        let v = random(p, &mut rng, -1.0, 1.0);
        lowest = lowest.min(rayleigh_quotient(&p.a, &v).map_err(lib_error)?);
    }
    rows.push(row(
        "Rayleigh lower bound",
        lowest >= p.eig.lambda1 - 1e-9,
        format!("min over 50 random vectors {lowest:.6}"),
    ));
    let fit_phi = boundary_fit(&p.eig.phi1, p.order).map_err(lib_error)?;
    rows.push(row(
        "eigenfunction boundary growth",
        fit_phi.certifies(),
        format!("{:.4} <= phi1/delta^s <= {:.4}", fit_phi.lower_c, fit_phi.upper_c),
    ));
    let fit_e = boundary_fit(&p.e, p.order).map_err(lib_error)?;
    rows.push(row(
        "torsion boundary growth",
        fit_e.certifies(),
        format!("{:.4} <= e/delta^s <= {:.4}", fit_e.lower_c, fit_e.upper_c),
    ));
    rows.push(CheckRow {
        name: "torsion vs closed form",
        pass: None,
        detail: format!("relative sup error {:.3}%", 100.0 * torsion_error(&p.e, p.order).map_err(lib_error)?),
    });

    let spec = ctx.cfg.model.spec()?;
    let lambda = p.lambda(&spec);
    if !(lambda > p.eig.lambda1) {
        rows.push(row(
            "theorem hypothesis",
            false,
            format!("lambda = {lambda} <= lambda1 = {}", p.eig.lambda1),
        ));
        return Ok(rows);
    }
    let params = p.params(&spec)?;
    if !(params.grazing > 0.0) {
        rows.push(row("thresholds", false, "the existence window needs c > 0"));
        return Ok(rows);
    }
    let t = thresholds(&params, &p.eig, &p.e).map_err(lib_error)?;
    rows.push(row(
        "thresholds",
        t.sigma_lower < t.sigma_upper && t.eps_star > 0.0 && t.harvest_margin(params.lambda, t.eps_star) >= -1e-15,
        format!(
            "alpha {:.6}, eta {:.6}, sigma ({:.6}, {:.6}), eps* {:.4e}",
            t.alpha, t.eta, t.sigma_lower, t.sigma_upper, t.eps_star
        ),
    ));
    rows.push(CheckRow {
        name: "parameters in window",
        pass: None,
        detail: format!(
            "K = {}, eps = {:.4e}: {}",
            params.carrying_capacity,
            params.harvest,
            t.window_contains(params.carrying_capacity, params.harvest)
        ),
    });
    let lower = build_subsolution(&t, &p.eig, &p.e).map_err(lib_error)?;
    let upper = build_supersolution(&t, &p.e);
    let sub = check_subsupersolution(&lower, &params, &p.a, ResidualKind::Subsolution, &p.tol).map_err(lib_error)?;
    let sup =
        check_subsupersolution(&upper, &params, &p.a, ResidualKind::Supersolution, &p.tol).map_err(lib_error)?;
    rows.push(row(
        "subsolution residual sign",
        sub.pass,
        format!("max residual {:.2e} (tolerance {:.1e})", sub.max_residual, sub.tolerance),
    ));
    rows.push(row(
        "supersolution residual sign",
        sup.pass,
        format!("min residual {:.2e} (tolerance {:.1e})", sup.min_residual, sup.tolerance),
    ));
    let ordered = lower.values().iter().zip(upper.values()).all(|(l, u)| l <= u);
    rows.push(row("pair ordered", ordered, "subsolution <= supersolution nodewise"));
    let solved = if ordered {
        monotone_solve(&lower, &upper, &params, &p.a, Branch::Minimal, &p.tol).map(|r| BranchSummary::new(&r))
    } else {
        Err(fracsteady::Error::InvalidArgument("unordered pair".into()))
    };
    rows.push(match solved {
        Ok(s) => row(
            "monotone solve",
            s.acceptable(p.tol.solve) && s.monotone_violation <= 1e-10,
            format!(
                "{} iterations, residual {:.2e}, violation {:.1e}, min u {:.3e}",
                s.iterations, s.final_residual, s.monotone_violation, s.min
            ),
        ),
        Err(e) => row("monotone solve", false, e.to_string()),
    });
    Ok(rows)
}

pub fn verify(ctx: &RunContext) -> anyhow::Result<bool> {
    let p = prepare(ctx)?;
    let rows = verify_rows(&p, ctx)?;
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
    for r in &rows {
        let status = match r.pass {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "info",
        };
        println!("{:<width$}  {status}  {}", r.name, r.detail);
    }
    let passed = rows.iter().all(|r| r.pass != Some(false));
    println!("verify: {}", if passed { "PASS" } else { "FAIL" });
    write_json(&ctx.out.join("verify.json"), &rows)?;
    Ok(passed)
}
