//! Self-contained dense linear-program solver.
//!
//! Two-phase primal simplex on a dense tableau with Bland's anti-cycling
//! rule always on. The programs built by this crate are tiny (at most a few
//! hundred rows or columns) but highly degenerate, so determinism and
//! robustness matter more than asymptotics: no sparse storage, no revised
//! form, no warm starts.
//!
//! Free variables are split into differences of non-negatives. Rows are
//! normalized to non-negative right-hand sides and scaled by their largest
//! coefficient magnitude, so all tolerances below are relative to row norms.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Feasibility tolerance, relative to row norms.
pub const FEAS_TOL: f64 = 1e-9;
/// Reduced-cost threshold for declaring optimality.
pub const OPT_TOL: f64 = 1e-9;
/// Smallest acceptable pivot element.
const PIVOT_TOL: f64 = 1e-9;
/// Residual artificial mass above which phase 1 declares infeasibility.
/// Genuinely feasible systems finish phase 1 near 1e-13 even at hundreds of
/// rows; infeasible ones leave O(1) mass, so the gap is wide.
const PHASE1_TOL: f64 = 1e-7;

/// Optimization direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

/// Constraint relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

/// Variable domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    NonNegative,
    Free,
}

#[derive(Debug, Clone)]
struct Row {
    coeffs: Vec<f64>,
    relation: Relation,
    rhs: f64,
}

/// A dense linear program over named variables.
#[derive(Debug, Clone)]
pub struct LpProblem {
    sense: Sense,
    names: Vec<String>,
    objective: Vec<f64>,
    kinds: Vec<VarKind>,
    rows: Vec<Row>,
}

impl LpProblem {
    pub fn new(sense: Sense) -> Self {
        Self {
            sense,
            names: Vec::new(),
            objective: Vec::new(),
            kinds: Vec::new(),
            rows: Vec::new(),
        }
    }

    /// Adds a variable and returns its column index.
    pub fn add_variable(&mut self, name: impl Into<String>, kind: VarKind, obj: f64) -> usize {
        self.names.push(name.into());
        self.kinds.push(kind);
        self.objective.push(obj);
        self.names.len() - 1
    }

    /// Adds a constraint row `coeffs . x <relation> rhs`; returns its index.
    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> usize {
        self.rows.push(Row {
            coeffs,
            relation,
            rhs,
        });
        self.rows.len() - 1
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn variable_names(&self) -> &[String] {
        &self.names
    }

    /// Row `i` as (coefficients, relation, right-hand side).
    pub fn constraint(&self, i: usize) -> (&[f64], Relation, f64) {
        let row = &self.rows[i];
        (&row.coeffs, row.relation, row.rhs)
    }

    fn validate(&self) -> Result<()> {
        let nv = self.num_vars();
        if nv == 0 {
            return Err(Error::InvalidArgument("LP has no variables".into()));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.coeffs.len() != nv {
                return Err(Error::InvalidArgument(format!(
                    "constraint {} has {} coefficients, expected {}",
                    i,
                    row.coeffs.len(),
                    nv
                )));
            }
            if !row.rhs.is_finite() || row.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "constraint {i} contains a non-finite value"
                )));
            }
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(
                "objective contains a non-finite value".into(),
            ));
        }
        let mut seen = std::collections::BTreeSet::new();
        for name in &self.names {
            if !seen.insert(name) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate variable name '{name}'"
                )));
            }
        }
        Ok(())
    }
}

/// Termination status of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of [`solve_lp`].
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective value in the problem's own sense (meaningless unless optimal).
    pub objective_value: f64,
    /// Primal values aligned with the problem's variable order.
    pub variable_values: Vec<f64>,
    /// Dual multipliers aligned with constraint order (populated when optimal).
    ///
    /// Sign convention: for a maximization, `<=` rows have duals `>= 0` and
    /// `>=` rows duals `<= 0`; for a minimization the signs flip. Equality
    /// rows are unrestricted. With these signs `b . y` equals the objective.
    pub dual_values: Vec<f64>,
    /// Simplex pivots performed across both phases.
    pub pivots: u64,
    names: Vec<String>,
}

impl LpSolution {
    /// Looks a primal value up by variable name.
    pub fn value(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.variable_values[i])
    }

    /// All primal values keyed by name.
    pub fn variable_map(&self) -> BTreeMap<String, f64> {
        self.names
            .iter()
            .cloned()
            .zip(self.variable_values.iter().copied())
            .collect()
    }
}

struct Tableau {
    rows: Vec<Vec<f64>>, // m rows, each ncols + 1 (last entry is the RHS)
    zrow: Vec<f64>,      // reduced costs z_j - c_j, last entry is the objective
    basis: Vec<usize>,
    ncols: usize,
    // structural column -> (variable index, sign in the split)
    col_var: Vec<(usize, f64)>,
    ident_col: Vec<usize>, // per row: its initial identity column
    art_start: usize,      // columns >= art_start are artificial
    row_sign: Vec<f64>,
    row_scale: Vec<f64>,
    pivots: u64,
    pivot_cap: u64,
}

enum StepOutcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn build(p: &LpProblem) -> Self {
        let m = p.num_rows();

        let mut col_var = Vec::new();
        for (j, kind) in p.kinds.iter().enumerate() {
            col_var.push((j, 1.0));
            if *kind == VarKind::Free {
                col_var.push((j, -1.0));
            }
        }
        let n_struct = col_var.len();

        // Normalize each row to rhs >= 0 and unit max-coefficient scale.
        let mut row_sign = vec![1.0; m];
        let mut row_scale = vec![1.0; m];
        let mut relations = Vec::with_capacity(m);
        let mut body: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut rhs: Vec<f64> = Vec::with_capacity(m);
        for (i, row) in p.rows.iter().enumerate() {
            let mut sign = 1.0;
            let mut rel = row.relation;
            if row.rhs < 0.0 {
                sign = -1.0;
                rel = match rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
            let scale = row
                .coeffs
                .iter()
                .fold(0.0f64, |acc, c| acc.max(c.abs()))
                .max(1e-12);
            row_sign[i] = sign;
            row_scale[i] = scale;
            relations.push(rel);
            body.push(
                col_var
                    .iter()
                    .map(|&(v, s)| sign * s * row.coeffs[v] / scale)
                    .collect(),
            );
            rhs.push(sign * row.rhs / scale);
        }

        let n_slack = relations
            .iter()
            .filter(|r| !matches!(r, Relation::Eq))
            .count();
        let n_art = relations
            .iter()
            .filter(|r| !matches!(r, Relation::Le))
            .count();
        let ncols = n_struct + n_slack + n_art;
        let art_start = n_struct + n_slack;

        let mut rows: Vec<Vec<f64>> = body
            .into_iter()
            .zip(rhs)
            .map(|(mut coeffs, b)| {
                coeffs.resize(ncols, 0.0);
                coeffs.push(b);
                coeffs
            })
            .collect();

        let mut basis = vec![0usize; m];
        let mut ident_col = vec![0usize; m];
        let mut slack = n_struct;
        let mut art = art_start;
        for (i, rel) in relations.iter().enumerate() {
            match rel {
                Relation::Le => {
                    rows[i][slack] = 1.0;
                    basis[i] = slack;
                    ident_col[i] = slack;
                    slack += 1;
                }
                Relation::Ge => {
                    rows[i][slack] = -1.0;
                    slack += 1;
                    rows[i][art] = 1.0;
                    basis[i] = art;
                    ident_col[i] = art;
                    art += 1;
                }
                Relation::Eq => {
                    rows[i][art] = 1.0;
                    basis[i] = art;
                    ident_col[i] = art;
                    art += 1;
                }
            }
        }

        let pivot_cap = 10u64
            .saturating_mul(((m + ncols) as u64).saturating_mul((m + ncols) as u64));

        Tableau {
            rows,
            zrow: vec![0.0; ncols + 1],
            basis,
            ncols,
            col_var,
            ident_col,
            art_start,
            row_sign,
            row_scale,
            pivots: 0,
            pivot_cap,
        }
    }

    /// Recomputes the reduced-cost row `z - c` for the given column costs.
    fn price_out(&mut self, cost: &[f64]) {
        for j in 0..=self.ncols {
            let c = if j < self.ncols { cost[j] } else { 0.0 };
            let z: f64 = self
                .rows
                .iter()
                .zip(&self.basis)
                .map(|(row, &b)| cost[b] * row[j])
                .sum();
            self.zrow[j] = z - c;
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= piv;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let factor = row[c];
            if factor != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= factor * pv;
                }
                row[c] = 0.0;
                // Roundoff may leave the RHS a hair negative; keep the
                // ratio-test invariant rhs >= 0.
                let rhs = row.last_mut().unwrap();
                if *rhs < 0.0 && *rhs > -1e-11 {
                    *rhs = 0.0;
                }
            }
        }
        let factor = self.zrow[c];
        if factor != 0.0 {
            for (v, pv) in self.zrow.iter_mut().zip(&pivot_row) {
                *v -= factor * pv;
            }
            self.zrow[c] = 0.0;
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Runs simplex iterations until optimal or unbounded. Bland's rule:
    /// entering column is the lowest-index improving one, leaving row the
    /// minimum-ratio row with the lowest basic variable index on ties.
    fn iterate(&mut self, allow_artificial: bool) -> Result<StepOutcome> {
        loop {
            if self.pivots > self.pivot_cap {
                return Err(Error::NumericFailure(format!(
                    "simplex stalled after {} pivots (cap {}), objective {:.6e}",
                    self.pivots,
                    self.pivot_cap,
                    self.zrow[self.ncols]
                )));
            }
            let limit = if allow_artificial {
                self.ncols
            } else {
                self.art_start
            };
            let entering = (0..limit).find(|&j| self.zrow[j] < -OPT_TOL);
            let Some(c) = entering else {
                return Ok(StepOutcome::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][c];
                if a > PIVOT_TOL {
                    let ratio = self.rows[i][self.ncols] / a;
                    match leave {
                        None => leave = Some((i, ratio)),
                        Some((best, best_ratio)) => {
                            if ratio < best_ratio - 0.0
                                || (ratio == best_ratio && self.basis[i] < self.basis[best])
                            {
                                leave = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            let Some((r, _)) = leave else {
                return Ok(StepOutcome::Unbounded);
            };
            self.pivot(r, c);
        }
    }

    /// Phase 1: minimize the artificial mass. Returns false on infeasibility.
    fn phase1(&mut self) -> Result<bool> {
        if self.art_start == self.ncols {
            return Ok(true); // all-slack basis is already feasible
        }
        let mut cost = vec![0.0; self.ncols];
        for c in cost.iter_mut().skip(self.art_start) {
            *c = -1.0;
        }
        self.price_out(&cost);
        match self.iterate(true)? {
            StepOutcome::Unbounded => {
                return Err(Error::Internal(
                    "phase-1 objective is bounded by construction".into(),
                ))
            }
            StepOutcome::Optimal => {}
        }
        if self.zrow[self.ncols] < -PHASE1_TOL {
            return Ok(false);
        }
        // Drive leftover artificials out of the basis where a real pivot
        // exists; rows without one are redundant and stay parked at zero.
        for r in 0..self.rows.len() {
            if self.basis[r] >= self.art_start {
                if let Some(c) = (0..self.art_start)
                    .find(|&j| self.rows[r][j].abs() > PIVOT_TOL)
                {
                    self.pivot(r, c);
                }
            }
        }
        Ok(true)
    }

    fn phase2(&mut self, p: &LpProblem) -> Result<StepOutcome> {
        let mut cost = vec![0.0; self.ncols];
        for (col, &(v, s)) in self.col_var.iter().enumerate() {
            let c = p.objective[v] * s;
            cost[col] = match p.sense {
                Sense::Maximize => c,
                Sense::Minimize => -c,
            };
        }
        self.price_out(&cost);
        self.iterate(false)
    }

    fn extract(&self, p: &LpProblem) -> LpSolution {
        let mut values = vec![0.0; p.num_vars()];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < self.col_var.len() {
                let (v, s) = self.col_var[b];
                values[v] += s * self.rows[r][self.ncols];
            }
        }
        let sense_sign = match p.sense {
            Sense::Maximize => 1.0,
            Sense::Minimize => -1.0,
        };
        let duals: Vec<f64> = (0..p.num_rows())
            .map(|i| {
                let y = self.zrow[self.ident_col[i]];
                sense_sign * self.row_sign[i] * y / self.row_scale[i]
            })
            .collect();
        LpSolution {
            status: LpStatus::Optimal,
            objective_value: sense_sign * self.zrow[self.ncols],
            variable_values: values,
            dual_values: duals,
            pivots: self.pivots,
            names: p.names.clone(),
        }
    }
}

/// Solves a linear program with the two-phase dense simplex method.
///
/// `status` is `Infeasible` when phase 1 cannot clear the artificial
/// variables, `Unbounded` when phase 2 finds an improving ray, and
/// `Optimal` otherwise, in which case primal values, duals, and the
/// objective are populated. A stall past the pivot cap (`10 (m+n)^2`)
/// reports a numeric failure instead of returning a wrong answer.
pub fn solve_lp(p: &LpProblem) -> Result<LpSolution> {
    p.validate()?;
    let mut t = Tableau::build(p);
    if !t.phase1()? {
        return Ok(LpSolution {
            status: LpStatus::Infeasible,
            objective_value: f64::NAN,
            variable_values: vec![0.0; p.num_vars()],
            dual_values: Vec::new(),
            pivots: t.pivots,
            names: p.names.clone(),
        });
    }
    match t.phase2(p)? {
        StepOutcome::Unbounded => Ok(LpSolution {
            status: LpStatus::Unbounded,
            objective_value: match p.sense {
                Sense::Maximize => f64::INFINITY,
                Sense::Minimize => f64::NEG_INFINITY,
            },
            variable_values: vec![0.0; p.num_vars()],
            dual_values: Vec::new(),
            pivots: t.pivots,
            names: p.names.clone(),
        }),
        StepOutcome::Optimal => Ok(t.extract(p)),
    }
}

/// Worst violations of the optimality conditions for an optimal solution;
/// all entries are relative to row norms. Used by tests to certify solves.
#[derive(Debug, Clone, Copy)]
pub struct KktResiduals {
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub dual_sign_violation: f64,
    pub complementary_slackness: f64,
    pub duality_gap: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.primal_infeasibility
            .max(self.dual_infeasibility)
            .max(self.dual_sign_violation)
            .max(self.complementary_slackness)
            .max(self.duality_gap)
    }
}

/// Evaluates feasibility, dual feasibility, complementary slackness, and the
/// duality gap of an optimal solution against its problem.
pub fn kkt_residuals(p: &LpProblem, s: &LpSolution) -> KktResiduals {
    assert_eq!(s.status, LpStatus::Optimal, "kkt_residuals needs an optimum");
    let x = &s.variable_values;
    let y = &s.dual_values;
    let min_sign = match p.sense {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
    };

    let mut primal = 0.0f64;
    let mut cs = 0.0f64;
    let mut b_dot_y = 0.0f64;
    for (row, &yi) in p.rows.iter().zip(y) {
        let scale = row
            .coeffs
            .iter()
            .fold(0.0f64, |acc, c| acc.max(c.abs()))
            .max(1.0);
        let ax: f64 = row.coeffs.iter().zip(x).map(|(c, v)| c * v).sum();
        let slack = row.rhs - ax;
        let violation = match row.relation {
            Relation::Le => (-slack).max(0.0),
            Relation::Ge => slack.max(0.0),
            Relation::Eq => slack.abs(),
        };
        primal = primal.max(violation / scale);
        cs = cs.max((yi * slack).abs() / scale);
        b_dot_y += yi * row.rhs;
    }

    let mut dual = 0.0f64;
    let mut sign = 0.0f64;
    for (row, &yi) in p.rows.iter().zip(y) {
        let bad = match row.relation {
            Relation::Le => (-min_sign * yi).max(0.0),
            Relation::Ge => (min_sign * yi).max(0.0),
            Relation::Eq => 0.0,
        };
        sign = sign.max(bad);
    }
    for (j, &xj) in x.iter().enumerate() {
        let yta: f64 = p.rows.iter().zip(y).map(|(r, yi)| r.coeffs[j] * yi).sum();
        let reduced = p.objective[j] - yta;
        let scale = p.objective[j].abs().max(1.0);
        let bad = match (p.sense, p.kinds[j]) {
            // Max: c_j - y.A_j <= 0 for x_j >= 0, = 0 for free.
            (Sense::Maximize, VarKind::NonNegative) => reduced.max(0.0),
            (Sense::Minimize, VarKind::NonNegative) => (-reduced).max(0.0),
            (_, VarKind::Free) => reduced.abs(),
        };
        dual = dual.max(bad / scale);
        cs = cs.max((xj * reduced).abs() / scale);
    }

    let cx: f64 = p.objective.iter().zip(x).map(|(c, v)| c * v).sum();
    KktResiduals {
        primal_infeasibility: primal,
        dual_infeasibility: dual,
        dual_sign_violation: sign,
        complementary_slackness: cs,
        duality_gap: (cx - b_dot_y).abs() / cx.abs().max(1.0),
    }
}
