//! Price-of-anarchy characterizations as linear programs.
//!
//! For a mechanism `f`, basis `w`, and agent bound `n`, the exact price of
//! anarchy over the induced game class is `1 / W*` where `W*` is the value
//! of a small LP. Five routes to the same number are provided:
//!
//! * `primal`: maximize the optimum welfare over resource-class weights
//!   `theta(a,x,b)`, one variable per index triple, two rows;
//! * `dual_full` / `dual_boundary`: minimize `mu` over `(lambda, mu)` with
//!   one row per triple (all of them, or just the boundary subset, which is
//!   sufficient);
//! * `corollary`: the reduced `(n+1)^2 - 1` row program available when `f`
//!   is non-increasing;
//! * `explicit`: a closed-form maximum over at most `2n^2` numbers,
//!   available when the optimal `lambda` is known a priori.
//!
//! All routes agree wherever their preconditions hold, which tests exploit
//! heavily. If `f(1) <= 0` the price of anarchy is 0 outright: a single
//! agent parked on a worthless resource next to a valuable one is already
//! an equilibrium, and no LP needs solving.

use serde::Serialize;

use crate::basis::{Mechanism, WelfareBasis};
use crate::error::{Error, Result};
use crate::games::{Allocation, GameInstance};
use crate::index::{enumerate_boundary_set, enumerate_index_set, IndexTriple};
use crate::lpsolve::{solve_lp, LpProblem, LpStatus, Relation, Sense, VarKind, FEAS_TOL};

/// Weights below this are treated as zero when reporting primal support and
/// when handing `theta` to the worst-case builder.
pub const SUPPORT_TOL: f64 = 1e-9;

/// Which constraint family the dual program ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintSet {
    /// Every index triple.
    FullI,
    /// Only the boundary triples (`a*x*b = 0` or `a+x+b = n`); equivalent
    /// and a full order of magnitude smaller.
    BoundaryIR,
}

/// Computation route for [`poa`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Primal,
    DualFull,
    #[default]
    DualBoundary,
    Corollary,
    Explicit,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Primal => "primal",
            Method::DualFull => "dual_full",
            Method::DualBoundary => "dual_boundary",
            Method::Corollary => "corollary",
            Method::Explicit => "explicit",
        }
    }
}

/// Optimum of the primal program.
#[derive(Debug, Clone)]
pub struct PrimalResult {
    /// LP value `W*`; the price of anarchy is `1 / W*`.
    pub w_star: f64,
    /// Optimal weight per index triple, in enumeration order.
    pub theta: Vec<(IndexTriple, f64)>,
    /// Triples whose weight exceeds [`SUPPORT_TOL`].
    pub support: Vec<IndexTriple>,
}

/// Optimum of the dual (or corollary) program.
#[derive(Debug, Clone)]
pub struct DualResult {
    pub mu_star: f64,
    pub lambda_star: f64,
    /// Triples whose dual constraint is tight at the optimum, in
    /// enumeration order.
    pub binding_constraints: Vec<IndexTriple>,
}

/// A one-agent game certifying that `f(1) <= 0` forces a zero price of
/// anarchy: parking on the worthless resource is an equilibrium.
#[derive(Debug, Clone)]
pub struct ZeroPoaWitness {
    pub game: GameInstance,
    pub equilibrium: Allocation,
}

/// Result of a price-of-anarchy computation.
///
/// Serializes to `{"poa", "w_star", "lambda_star", "mu_star", "method",
/// "theta", "n"}`; the echoed inputs and detailed sub-results are available
/// on the struct but not part of the wire format.
#[derive(Debug, Clone, Serialize)]
pub struct PoaReport {
    pub poa: f64,
    pub w_star: Option<f64>,
    pub lambda_star: Option<f64>,
    pub mu_star: Option<f64>,
    pub method: Method,
    pub theta: Option<Vec<ThetaEntry>>,
    pub n: usize,
    #[serde(skip)]
    pub f: Mechanism,
    #[serde(skip)]
    pub w: WelfareBasis,
    #[serde(skip)]
    pub primal: Option<PrimalResult>,
    #[serde(skip)]
    pub dual: Option<DualResult>,
    #[serde(skip)]
    pub zero_witness: Option<ZeroPoaWitness>,
}

/// One support entry of the primal optimum.
#[derive(Debug, Clone, Serialize)]
pub struct ThetaEntry {
    pub a: usize,
    pub x: usize,
    pub b: usize,
    pub value: f64,
}

/// Truncated accessors: entries above `n` are treated as absent, matching
/// the fact that the game class never evaluates loads beyond `n`.
fn w_at(w: &WelfareBasis, n: usize, j: usize) -> f64 {
    if j >= 1 && j <= n {
        w.at(j)
    } else {
        0.0
    }
}

fn f_at(f: &Mechanism, n: usize, j: usize) -> f64 {
    if j >= 1 && j <= n {
        f.at(j)
    } else {
        0.0
    }
}

/// Coefficient of `theta(a,x,b)` in the equilibrium-sum constraint:
/// `a f(a+x) - b f(a+x+1)`.
fn equilibrium_coeff(f: &Mechanism, n: usize, t: IndexTriple) -> f64 {
    t.a as f64 * f_at(f, n, t.a + t.x) - t.b as f64 * f_at(f, n, t.a + t.x + 1)
}

fn check_lengths(f: &Mechanism, w: &WelfareBasis, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    if f.n() < n || w.n() < n {
        return Err(Error::InvalidArgument(format!(
            "f and w must have length >= n = {n} (got {} and {})",
            f.n(),
            w.n()
        )));
    }
    Ok(())
}

fn require_f1_positive(f: &Mechanism) -> Result<()> {
    if f.at(1) <= 0.0 {
        return Err(Error::PreconditionFailed(format!(
            "requires f(1) > 0, got f(1) = {}",
            f.at(1)
        )));
    }
    Ok(())
}

/// Checks that `f` is non-increasing over `[1, n]`; names the first
/// violating index otherwise.
fn require_nonincreasing(f: &Mechanism, n: usize) -> Result<()> {
    for j in 1..n {
        let tol = 1e-12 * f.at(j).abs().max(1.0);
        if f.at(j + 1) > f.at(j) + tol {
            return Err(Error::PreconditionFailed(format!(
                "f must be non-increasing: f({}) = {} exceeds f({}) = {}",
                j + 1,
                f.at(j + 1),
                j,
                f.at(j)
            )));
        }
    }
    Ok(())
}

/// Builds the primal program: maximize `sum w(b+x) theta` subject to the
/// equilibrium-sum row `sum [a f(a+x) - b f(a+x+1)] theta >= 0` and the
/// normalization row `sum w(a+x) theta = 1`, with `theta >= 0`.
pub fn build_primal(f: &Mechanism, w: &WelfareBasis, n: usize) -> Result<LpProblem> {
    check_lengths(f, w, n)?;
    let triples = enumerate_index_set(n)?;
    let mut lp = LpProblem::new(Sense::Maximize);
    for t in &triples {
        lp.add_variable(
            format!("theta({},{},{})", t.a, t.x, t.b),
            VarKind::NonNegative,
            w_at(w, n, t.b + t.x),
        );
    }
    let equilibrium_row: Vec<f64> = triples
        .iter()
        .map(|&t| equilibrium_coeff(f, n, t))
        .collect();
    let normalization_row: Vec<f64> = triples.iter().map(|t| w_at(w, n, t.a + t.x)).collect();
    lp.add_constraint(equilibrium_row, Relation::Ge, 0.0);
    lp.add_constraint(normalization_row, Relation::Eq, 1.0);
    Ok(lp)
}

/// Solves the primal program and extracts `W*` and the optimal weights.
pub fn solve_primal(f: &Mechanism, w: &WelfareBasis, n: usize) -> Result<PrimalResult> {
    check_lengths(f, w, n)?;
    require_f1_positive(f)?;
    let lp = build_primal(f, w, n)?;
    let solution = solve_lp(&lp)?;
    match solution.status {
        LpStatus::Optimal => {}
        LpStatus::Unbounded => {
            return Err(Error::Internal(
                "primal program reported unbounded, but its value is finite whenever \
                 f(1) > 0; check the inputs for non-finite entries"
                    .into(),
            ))
        }
        LpStatus::Infeasible => {
            return Err(Error::Internal(
                "primal program reported infeasible, but theta(0,1,0) = 1/w(1) is \
                 always feasible"
                    .into(),
            ))
        }
    }
    let triples = enumerate_index_set(n)?;
    let theta: Vec<(IndexTriple, f64)> = triples
        .iter()
        .copied()
        .zip(solution.variable_values.iter().copied())
        .collect();
    let support = theta
        .iter()
        .filter(|(_, v)| *v > SUPPORT_TOL)
        .map(|(t, _)| *t)
        .collect();
    Ok(PrimalResult {
        w_star: solution.objective_value,
        theta,
        support,
    })
}

/// Builds the dual program: minimize `mu` over `lambda >= 0`, `mu` free,
/// one row `w(b+x) - mu w(a+x) + lambda [a f(a+x) - b f(a+x+1)] <= 0` per
/// triple in the chosen set.
pub fn build_dual(
    f: &Mechanism,
    w: &WelfareBasis,
    n: usize,
    constraint_set: ConstraintSet,
) -> Result<LpProblem> {
    check_lengths(f, w, n)?;
    let triples = dual_triples(n, constraint_set)?;
    let mut lp = LpProblem::new(Sense::Minimize);
    lp.add_variable("lambda", VarKind::NonNegative, 0.0);
    lp.add_variable("mu", VarKind::Free, 1.0);
    for &t in &triples {
        lp.add_constraint(
            vec![equilibrium_coeff(f, n, t), -w_at(w, n, t.a + t.x)],
            Relation::Le,
            -w_at(w, n, t.b + t.x),
        );
    }
    Ok(lp)
}

fn dual_triples(n: usize, constraint_set: ConstraintSet) -> Result<Vec<IndexTriple>> {
    match constraint_set {
        ConstraintSet::FullI => enumerate_index_set(n),
        ConstraintSet::BoundaryIR => enumerate_boundary_set(n),
    }
}

/// Solves the dual program; `mu*` equals the primal `W*` by strong duality.
pub fn solve_dual(
    f: &Mechanism,
    w: &WelfareBasis,
    n: usize,
    constraint_set: ConstraintSet,
) -> Result<DualResult> {
    check_lengths(f, w, n)?;
    require_f1_positive(f)?;
    let lp = build_dual(f, w, n, constraint_set)?;
    let solution = solve_lp(&lp)?;
    match solution.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => {
            return Err(Error::Internal(
                "dual program reported infeasible, but the dual of a feasible bounded \
                 program cannot be"
                    .into(),
            ))
        }
        LpStatus::Unbounded => {
            return Err(Error::Internal(
                "dual program reported unbounded, which would mean an infeasible \
                 primal; the primal is always feasible"
                    .into(),
            ))
        }
    }
    let mu_star = solution.objective_value;
    let lambda_star = solution.value("lambda").expect("variable exists");
    let triples = dual_triples(n, constraint_set)?;
    let binding = triples
        .iter()
        .copied()
        .filter(|&t| {
            let row =
                w_at(w, n, t.b + t.x) - mu_star * w_at(w, n, t.a + t.x)
                    + lambda_star * equilibrium_coeff(f, n, t);
            let scale = w_at(w, n, t.b + t.x)
                .abs()
                .max(w_at(w, n, t.a + t.x).abs())
                .max(equilibrium_coeff(f, n, t).abs())
                .max(1.0);
            row.abs() <= FEAS_TOL * scale
        })
        .collect();
    Ok(DualResult {
        mu_star,
        lambda_star,
        binding_constraints: binding,
    })
}

/// Builds the reduced dual available for non-increasing `f`: rows indexed by
/// `(j, l)` over `[0, n]^2` minus the origin, `(n+1)^2 - 1` in total.
pub fn corollary_constraints(f: &Mechanism, w: &WelfareBasis, n: usize) -> Result<LpProblem> {
    check_lengths(f, w, n)?;
    require_f1_positive(f)?;
    require_nonincreasing(f, n)?;
    let mut lp = LpProblem::new(Sense::Minimize);
    lp.add_variable("lambda", VarKind::NonNegative, 0.0);
    lp.add_variable("mu", VarKind::Free, 1.0);
    for (j, l) in corollary_rows(n) {
        let lambda_coeff = if j + l <= n {
            j as f64 * f_at(f, n, j) - l as f64 * f_at(f, n, j + 1)
        } else {
            (n - l) as f64 * f_at(f, n, j) - (n - j) as f64 * f_at(f, n, j + 1)
        };
        lp.add_constraint(
            vec![lambda_coeff, -w_at(w, n, j)],
            Relation::Le,
            -w_at(w, n, l),
        );
    }
    Ok(lp)
}

fn corollary_rows(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..=n).flat_map(move |j| (0..=n).map(move |l| (j, l)))
        .filter(|&(j, l)| j + l >= 1)
}

/// Maps a corollary row `(j, l)` back to the boundary triple it came from:
/// the `x = 0` plane for `j + l <= n`, the `a + x + b = n` plane otherwise.
fn corollary_row_triple(n: usize, j: usize, l: usize) -> IndexTriple {
    if j + l <= n {
        IndexTriple::new(j, 0, l)
    } else {
        IndexTriple::new(n - l, j + l - n, n - j)
    }
}

/// Solves the corollary program, reporting binding rows as their source
/// triples.
pub fn solve_corollary(f: &Mechanism, w: &WelfareBasis, n: usize) -> Result<DualResult> {
    let lp = corollary_constraints(f, w, n)?;
    let solution = solve_lp(&lp)?;
    if solution.status != LpStatus::Optimal {
        return Err(Error::Internal(format!(
            "corollary program reported {:?}, expected an optimum",
            solution.status
        )));
    }
    let mu_star = solution.objective_value;
    let lambda_star = solution.value("lambda").expect("variable exists");
    let binding = corollary_rows(n)
        .filter(|&(j, l)| {
            let lambda_coeff = if j + l <= n {
                j as f64 * f_at(f, n, j) - l as f64 * f_at(f, n, j + 1)
            } else {
                (n - l) as f64 * f_at(f, n, j) - (n - j) as f64 * f_at(f, n, j + 1)
            };
            let row = w_at(w, n, l) - mu_star * w_at(w, n, j) + lambda_star * lambda_coeff;
            let scale = w_at(w, n, l).abs().max(w_at(w, n, j)).max(lambda_coeff.abs()).max(1.0);
            row.abs() <= FEAS_TOL * scale
        })
        .map(|(j, l)| corollary_row_triple(n, j, l))
        .collect();
    Ok(DualResult {
        mu_star,
        lambda_star,
        binding_constraints: binding,
    })
}

/// The candidate optimal multiplier `max_l w(l) / (l f(1))`, together with
/// whether the sufficient condition for its optimality holds:
/// `f(j) >= w(j)/j * min_l (l f(1) / w(l))` for every `j`.
pub fn lambda_star(f: &Mechanism, w: &WelfareBasis, n: usize) -> Result<(f64, bool)> {
    check_lengths(f, w, n)?;
    require_f1_positive(f)?;
    let f1 = f.at(1);
    let value = (1..=n)
        .map(|l| w_at(w, n, l) / (l as f64 * f1))
        .fold(f64::NEG_INFINITY, f64::max);
    let min_ratio = (1..=n)
        .map(|l| l as f64 * f1 / w_at(w, n, l))
        .fold(f64::INFINITY, f64::min);
    let holds = (1..=n).all(|j| {
        let bound = w_at(w, n, j) / j as f64 * min_ratio;
        f_at(f, n, j) >= bound - 1e-12 * bound.abs().max(1.0)
    });
    Ok((value, holds))
}

/// Closed-form `W*` for non-increasing `f` when the optimal `lambda` is
/// known: the maximum of the per-row bounds after dividing by `w(j)`.
/// `j = 0` never divides: the first branch excludes it and the second would
/// need `l > n`.
pub fn explicit_wstar(f: &Mechanism, w: &WelfareBasis, n: usize, lambda: f64) -> Result<f64> {
    check_lengths(f, w, n)?;
    require_f1_positive(f)?;
    require_nonincreasing(f, n)?;
    let (_, holds) = lambda_star(f, w, n)?;
    if !holds {
        return Err(Error::PreconditionFailed(
            "explicit evaluation requires the lambda-star condition \
             f(j) >= w(j)/j * min_l (l f(1)/w(l)) to hold for every j"
                .into(),
        ));
    }
    let mut best = f64::NEG_INFINITY;
    for j in 1..=n {
        let wj = w_at(w, n, j);
        for l in 0..=n {
            let candidate = if j + l <= n {
                (w_at(w, n, l) + lambda * (j as f64 * f_at(f, n, j) - l as f64 * f_at(f, n, j + 1)))
                    / wj
            } else {
                (w_at(w, n, l)
                    + lambda
                        * ((n - l) as f64 * f_at(f, n, j) - (n - j) as f64 * f_at(f, n, j + 1)))
                    / wj
            };
            best = best.max(candidate);
        }
    }
    Ok(best)
}

/// The fixed game behind the `f(1) <= 0` shortcut: one agent, a valued and
/// a worthless resource, free to pick either.
fn zero_poa_witness(f: &Mechanism, w: &WelfareBasis) -> ZeroPoaWitness {
    let game = GameInstance::new(
        1,
        vec![("r1".into(), 1.0), ("r2".into(), 0.0)],
        vec![vec![vec!["r1".into()], vec!["r2".into()]]],
        w.clone(),
        f.clone(),
    )
    .expect("fixed two-resource game is well formed");
    ZeroPoaWitness {
        game,
        equilibrium: Allocation(vec![1]),
    }
}

/// Computes the price of anarchy of the class induced by `(f, w, n)` via the
/// requested route. `f(1) <= 0` short-circuits to 0 without any LP solve and
/// attaches the two-resource witness game.
pub fn poa(f: &Mechanism, w: &WelfareBasis, n: usize, method: Method) -> Result<PoaReport> {
    check_lengths(f, w, n)?;
    let mut report = PoaReport {
        poa: 0.0,
        w_star: None,
        lambda_star: None,
        mu_star: None,
        method,
        theta: None,
        n,
        f: f.clone(),
        w: w.clone(),
        primal: None,
        dual: None,
        zero_witness: None,
    };
    if f.at(1) <= 0.0 {
        report.zero_witness = Some(zero_poa_witness(f, w));
        return Ok(report);
    }
    match method {
        Method::Primal => {
            let primal = solve_primal(f, w, n)?;
            report.poa = 1.0 / primal.w_star;
            report.w_star = Some(primal.w_star);
            report.theta = Some(
                primal
                    .theta
                    .iter()
                    .filter(|(_, v)| *v > SUPPORT_TOL)
                    .map(|(t, v)| ThetaEntry {
                        a: t.a,
                        x: t.x,
                        b: t.b,
                        value: *v,
                    })
                    .collect(),
            );
            report.primal = Some(primal);
        }
        Method::DualFull | Method::DualBoundary => {
            let set = if method == Method::DualFull {
                ConstraintSet::FullI
            } else {
                ConstraintSet::BoundaryIR
            };
            let dual = solve_dual(f, w, n, set)?;
            report.poa = 1.0 / dual.mu_star;
            report.w_star = Some(dual.mu_star);
            report.lambda_star = Some(dual.lambda_star);
            report.mu_star = Some(dual.mu_star);
            report.dual = Some(dual);
        }
        Method::Corollary => {
            let dual = solve_corollary(f, w, n)?;
            report.poa = 1.0 / dual.mu_star;
            report.w_star = Some(dual.mu_star);
            report.lambda_star = Some(dual.lambda_star);
            report.mu_star = Some(dual.mu_star);
            report.dual = Some(dual);
        }
        Method::Explicit => {
            let (lambda, holds) = lambda_star(f, w, n)?;
            if !holds {
                return Err(Error::PreconditionFailed(
                    "explicit method requires the lambda-star condition to hold; \
                     use the corollary or dual methods instead"
                        .into(),
                ));
            }
            let w_star = explicit_wstar(f, w, n, lambda)?;
            report.poa = 1.0 / w_star;
            report.w_star = Some(w_star);
            report.lambda_star = Some(lambda);
            report.mu_star = Some(w_star);
        }
    }
    Ok(report)
}
