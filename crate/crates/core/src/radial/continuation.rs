use serde::{Deserialize, Serialize};

use super::grid::GridKind;
use super::problem::{ContinuationConfig, RadialProblem};
use crate::error::{Error, Result};

/// A converged point on the minimal branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionPoint {
    pub lambda: f64,
    pub u: Vec<f64>,
    pub sup_norm: f64,
    pub mu1: f64,
    pub residual: f64,
    /// `∫ |u′|² r^{n−1} dr`.
    pub dirichlet_energy: f64,
    /// `∫ u f(u) r^{n−1} dr`.
    pub uf_integral: f64,
    pub newton_iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Fold,
    SupNormCap,
    LambdaCap,
    Failure,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Termination::Fold => "fold",
            Termination::SupNormCap => "sup_norm_cap",
            Termination::LambdaCap => "lambda_cap",
            Termination::Failure => "failure",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub nonlinearity: String,
    pub dimension: f64,
    pub nodes: usize,
    pub grid: GridKind,
    pub config: ContinuationConfig,
    /// `μ₁` of the linear operator (`λ = 0`).
    pub mu1_at_zero: f64,
    /// Stored points, strictly increasing in `λ`.
    pub points: Vec<SolutionPoint>,
    /// `(λ_ok, λ_fail)`: a solution exists at `λ_ok`; `λ_fail = λ_ok + lambda_min_step`
    /// lies above the maximum of `λ` over the branch.
    pub lambda_star_bracket: Option<(f64, f64)>,
    pub lambda_star: Option<f64>,
    pub fold_detected: bool,
    pub termination: Termination,
    pub notes: Vec<String>,
}

impl Branch {
    pub fn last(&self) -> Option<&SolutionPoint> {
        self.points.last()
    }

    /// The stored point whose `λ` is closest to `lambda`.
    pub fn nearest(&self, lambda: f64) -> Option<&SolutionPoint> {
        self.points
            .iter()
            .min_by(|a, b| (a.lambda - lambda).abs().total_cmp(&(b.lambda - lambda).abs()))
    }
}

/// Step growth after an easy Newton solve.
const STEP_GROWTH: f64 = 1.5;
const EASY_ITERATIONS: usize = 4;
/// Relative drop of `λ` below its running maximum that confirms a fold.
pub const FOLD_DROP: f64 = 1e-7;
const INITIAL_HALVINGS: usize = 30;
const LEVEL_STEP_INITIAL: f64 = 0.05;
const LEVEL_STEP_MAX: f64 = 0.5;
const LEVEL_STEP_MIN: f64 = 1e-8;
const GOLDEN_ITERATIONS: usize = 40;

pub(crate) fn make_point(
    problem: &RadialProblem,
    lambda: f64,
    u: Vec<f64>,
    iterations: usize,
    config: &ContinuationConfig,
) -> Result<SolutionPoint> {
    let mu1 = problem.smallest_eigenvalue(lambda, &u, config.eigen_tol)?.mu;
    let grid = problem.grid();
    let mut uf = 0.0;
    for (i, &x) in u.iter().enumerate() {
        uf += grid.volumes[i] * x * problem.f_pair(x)?.0;
    }
    Ok(SolutionPoint {
        lambda,
        sup_norm: u.iter().copied().fold(0.0, f64::max),
        mu1,
        residual: problem.residual(lambda, &u)?,
        dirichlet_energy: grid.dirichlet_energy(&u),
        uf_integral: uf,
        newton_iterations: iterations,
        u,
    })
}

fn dominates(new: &[f64], old: &[f64]) -> bool {
    let scale = old.iter().fold(1.0f64, |s, x| s.max(x.abs()));
    new.iter().zip(old).all(|(a, b)| *a >= *b - 1e-9 * scale)
}

/// Follows the minimal branch from `λ ≈ 0`.
///
/// Natural continuation in `λ` with step halving runs until the step
/// falls below `lambda_min_step`, the sup norm reaches `sup_norm_cap`, or
/// `λ` reaches `lambda_cap`. A stalled natural continuation is then
/// resolved by continuing in the level `u(0)`: a drop of `λ` confirms a
/// fold (and `λ*` is refined as the maximum of `λ` over the level), while
/// reaching the sup-norm cap with `λ` still increasing means the branch is
/// unbounded.
pub fn continue_branch(problem: &RadialProblem, config: &ContinuationConfig) -> Result<Branch> {
    config.validate()?;
    let n_nodes = problem.len();
    let zero = vec![0.0; n_nodes];
    let mu0 = problem.smallest_eigenvalue(0.0, &zero, config.eigen_tol)?.mu;
    let fp0 = problem.nonlinearity().fprime(0.0)?;
    let scale = if fp0 > 0.0 { mu0 / fp0 } else { mu0 };

    let mut branch = Branch {
        nonlinearity: problem.nonlinearity().name().to_string(),
        dimension: problem.dimension(),
        nodes: n_nodes,
        grid: problem.grid().kind,
        config: *config,
        mu1_at_zero: mu0,
        points: Vec::new(),
        lambda_star_bracket: None,
        lambda_star: None,
        fold_detected: false,
        termination: Termination::Failure,
        notes: Vec::new(),
    };

    let mut lambda = (1e-3 * scale).min(config.lambda_cap);
    let mut first = None;
    for _ in 0..INITIAL_HALVINGS {
        if let Ok(out) = problem.newton_solve(lambda, &zero, config) {
            first = Some(out);
            break;
        }
        lambda *= 0.5;
    }
    let first = first.ok_or_else(|| Error::Failure(format!("no solution found near lambda = {lambda:e}")))?;
    branch.points.push(make_point(problem, lambda, first.u, first.iterations, config)?);

    let mut step = config.lambda_initial_step;
    loop {
        let current = branch.points.last().expect("branch holds a point");
        if current.sup_norm >= config.sup_norm_cap {
            branch.termination = Termination::SupNormCap;
            return Ok(branch);
        }
        if current.lambda >= config.lambda_cap {
            branch.termination = Termination::LambdaCap;
            return Ok(branch);
        }
        if step < config.lambda_min_step {
            break;
        }
        let target = (current.lambda + step).min(config.lambda_cap);
        let guess: Vec<f64> = match branch.points.len() {
            1 => current.u.clone(),
            k => {
                let prev = &branch.points[k - 2];
                let ratio = (target - current.lambda) / (current.lambda - prev.lambda);
                current.u.iter().zip(&prev.u).map(|(a, b)| a + ratio * (a - b)).collect()
            }
        };
        let accepted = problem
            .newton_solve(target, &guess, config)
            .and_then(|out| make_point(problem, target, out.u, out.iterations, config))
            .ok()
            .filter(|p| p.mu1 > 0.0 && dominates(&p.u, &current.u));
        match accepted {
            Some(point) => {
                if point.newton_iterations <= EASY_ITERATIONS {
                    step *= STEP_GROWTH;
                }
                branch.points.push(point);
            }
            None => step *= 0.5,
        }
    }

    follow_level(problem, config, &mut branch)?;
    Ok(branch)
}

struct LevelPoint {
    level: f64,
    lambda: f64,
    u: Vec<f64>,
}

fn follow_level(
    problem: &RadialProblem,
    config: &ContinuationConfig,
    branch: &mut Branch,
) -> Result<()> {
    let k = branch.points.len();
    let mut history: Vec<LevelPoint> = branch.points[k.saturating_sub(2)..]
        .iter()
        .map(|p| LevelPoint { level: p.u[0], lambda: p.lambda, u: p.u.clone() })
        .collect();
    let mut best = history.len() - 1;
    let mut step = LEVEL_STEP_INITIAL * history[best].level.max(1.0);

    loop {
        let last = history.last().expect("history is nonempty");
        if last.level >= config.sup_norm_cap {
            branch.termination = Termination::SupNormCap;
            branch.notes.push(format!(
                "lambda non-decreasing up to u(0) = {:.6}; no fold below the sup-norm cap",
                last.level
            ));
            return Ok(());
        }
        let level = (last.level + step).min(config.sup_norm_cap);
        let (u_guess, lambda_guess) = match history.len() {
            1 => (last.u.clone(), last.lambda),
            h => {
                let prev = &history[h - 2];
                let ratio = (level - last.level) / (last.level - prev.level);
                let u: Vec<f64> = last.u.iter().zip(&prev.u).map(|(a, b)| a + ratio * (a - b)).collect();
                (u, last.lambda + ratio * (last.lambda - prev.lambda))
            }
        };
        match problem.solve_at_level(level, &u_guess, lambda_guess, config) {
            Err(_) => {
                step *= 0.5;
                if step < LEVEL_STEP_MIN * level.max(1.0) {
                    branch.termination = Termination::Failure;
                    branch.notes.push(format!("level continuation stalled near u(0) = {level:.6}"));
                    return Ok(());
                }
            }
            Ok((out, lambda)) => {
                let iterations = out.iterations;
                history.push(LevelPoint { level, lambda, u: out.u });
                let h = history.len() - 1;
                let dropped = lambda < history[best].lambda * (1.0 - FOLD_DROP);
                if lambda > history[best].lambda {
                    best = h;
                }
                if !dropped {
                    store_plateau_point(problem, config, branch, lambda, &history[h].u, iterations)?;
                } else {
                    let star = refine_fold(problem, config, &history, best)?;
                    // λ* is the maximum of λ over the level, so no discrete
                    // solution exists just above it.
                    let hi = star + config.lambda_min_step;
                    branch.fold_detected = true;
                    branch.termination = Termination::Fold;
                    branch.lambda_star = Some(star);
                    branch.lambda_star_bracket = Some((star, hi));
                    return Ok(());
                }
                if iterations <= EASY_ITERATIONS {
                    step = (step * STEP_GROWTH).min(LEVEL_STEP_MAX);
                }
            }
        }
    }
}

/// Records a level-continuation point on the stable branch. While `λ` is
/// flat to within [`FOLD_DROP`] the newest stored point is replaced, so the
/// stored `λ` values stay strictly increasing.
fn store_plateau_point(
    problem: &RadialProblem,
    config: &ContinuationConfig,
    branch: &mut Branch,
    lambda: f64,
    u: &[f64],
    iterations: usize,
) -> Result<()> {
    let k = branch.points.len();
    let stored = branch.points.last().map_or(0.0, |p| p.lambda);
    let replace = lambda <= stored;
    if replace && (k < 2 || lambda <= branch.points[k - 2].lambda) {
        return Ok(());
    }
    let point = make_point(problem, lambda, u.to_vec(), iterations, config)?;
    let reference = if replace { k.checked_sub(2) } else { k.checked_sub(1) };
    let monotone = reference.is_none_or(|i| dominates(&point.u, &branch.points[i].u));
    if point.mu1 > 0.0 && monotone {
        if replace {
            branch.points[k - 1] = point;
        } else {
            branch.points.push(point);
        }
    }
    Ok(())
}

/// Golden-section maximization of `λ` over the level around `history[best]`.
fn refine_fold(
    problem: &RadialProblem,
    config: &ContinuationConfig,
    history: &[LevelPoint],
    best: usize,
) -> Result<f64> {
    let lo = history[best.saturating_sub(1)].level;
    let hi = history[(best + 1).min(history.len() - 1)].level;
    let mut top = history[best].lambda;
    let seed = &history[best];
    let eval = |level: f64| -> f64 {
        problem
            .solve_at_level(level, &seed.u, seed.lambda, config)
            .map(|(_, l)| l)
            .unwrap_or(f64::NEG_INFINITY)
    };
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let mut f1 = eval(x1);
    let mut f2 = eval(x2);
    for _ in 0..GOLDEN_ITERATIONS {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = eval(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = eval(x2);
        }
        top = top.max(f1).max(f2);
    }
    Ok(top)
}
