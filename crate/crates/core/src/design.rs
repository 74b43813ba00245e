//! Utility design: the mechanism maximizing the price of anarchy.
//!
//! Optimizing over all mechanisms looks bilinear (`lambda` multiplies `f` in
//! every dual row), but the product can be folded into a rescaled unknown
//! `f~ = lambda f`, which is itself a mechanism with the same price of
//! anarchy. The search then becomes one LP in `n + 1` scalars: minimize `mu`
//! over `f~(1..n)` free with `f~(1) >= 1`, one row per boundary triple.

use serde::Serialize;

use crate::basis::{Mechanism, WelfareBasis};
use crate::error::{Error, Result};
use crate::index::enumerate_boundary_set;
use crate::lpsolve::{solve_lp, LpProblem, LpStatus, Relation, Sense, VarKind};

/// An optimal mechanism and its certified price of anarchy.
#[derive(Debug, Clone, Serialize)]
pub struct DesignResult {
    /// The rescaled optimizer, returned directly: dividing out the folded
    /// multiplier would only introduce needless roundoff, since scaling does
    /// not change the price of anarchy.
    pub f_opt: Mechanism,
    pub mu_opt: f64,
    /// `1 / mu_opt`.
    pub poa_opt: f64,
}

/// Solves the design program for `(w, n)` and returns one optimizer.
///
/// The basis is normalized to `w(1) = 1` before building the program: the
/// design value is invariant under scaling `w` (scaling all resource values
/// gives an isomorphic game class), and the pin `f~(1) >= 1` is only the
/// correct scale normalization when it coincides with the `(0,0,1)` row
/// `f~(1) >= w(1)`. Without this step a basis with `w(1) < 1` would be
/// penalized by an artificially large `f~(1)`.
///
/// When several mechanisms are optimal the deterministic pivot order picks
/// one; no uniqueness is claimed.
pub fn optimize_mechanism(w: &WelfareBasis, n: usize) -> Result<DesignResult> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    if w.n() < n {
        return Err(Error::InvalidArgument(format!(
            "w must have length >= n = {n}, got {}",
            w.n()
        )));
    }
    let w1 = w.at(1);
    let w_at = |j: usize| if j >= 1 && j <= n { w.at(j) / w1 } else { 0.0 };

    let mut lp = LpProblem::new(Sense::Minimize);
    let f_vars: Vec<usize> = (1..=n)
        .map(|j| lp.add_variable(format!("f({j})"), VarKind::Free, 0.0))
        .collect();
    let mu = lp.add_variable("mu", VarKind::Free, 1.0);
    let num_vars = n + 1;

    // f(1) >= 1 pins the scale freedom.
    let mut row = vec![0.0; num_vars];
    row[f_vars[0]] = 1.0;
    lp.add_constraint(row, Relation::Ge, 1.0);

    // w(b+x) - mu w(a+x) + a f(a+x) - b f(a+x+1) <= 0 per boundary triple;
    // the padded indices 0 and n+1 never materialize because their
    // multipliers a and b vanish there.
    for t in enumerate_boundary_set(n)? {
        let mut row = vec![0.0; num_vars];
        if t.a > 0 {
            row[f_vars[t.a + t.x - 1]] += t.a as f64;
        }
        if t.b > 0 && t.a + t.x < n {
            row[f_vars[t.a + t.x]] -= t.b as f64;
        }
        row[mu] = -w_at(t.a + t.x);
        lp.add_constraint(row, Relation::Le, -w_at(t.b + t.x));
    }

    let solution = solve_lp(&lp)?;
    if solution.status != LpStatus::Optimal {
        return Err(Error::Internal(format!(
            "design program reported {:?}, but its minimum is always attained",
            solution.status
        )));
    }
    let values: Vec<f64> = f_vars
        .iter()
        .map(|&v| solution.variable_values[v])
        .collect();
    let mu_opt = solution.objective_value;
    Ok(DesignResult {
        f_opt: Mechanism::new(values)?,
        mu_opt,
        poa_opt: 1.0 / mu_opt,
    })
}

/// Multiplies a mechanism by `alpha > 0`; the price of anarchy is invariant.
pub fn rescale_mechanism(f: &Mechanism, alpha: f64) -> Result<Mechanism> {
    f.rescale(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poa::{poa, Method};

    #[test]
    fn single_agent_design_is_fully_aligned() {
        let w = WelfareBasis::covering(1).unwrap();
        let r = optimize_mechanism(&w, 1).unwrap();
        assert!((r.poa_opt - 1.0).abs() < 1e-9, "poa_opt = {}", r.poa_opt);
        assert!(r.f_opt.at(1) >= 1.0 - 1e-9);
    }

    #[test]
    fn covering_two_agents_matches_equal_share() {
        let w = WelfareBasis::covering(2).unwrap();
        let r = optimize_mechanism(&w, 2).unwrap();
        assert!((r.poa_opt - 2.0 / 3.0).abs() < 1e-9, "poa_opt = {}", r.poa_opt);
        // Round trip: the returned mechanism really achieves the value.
        let check = poa(&r.f_opt, &w, 2, Method::DualBoundary).unwrap();
        assert!((check.poa - r.poa_opt).abs() < 1e-6);
    }

    #[test]
    fn grid_search_cannot_beat_the_optimizer() {
        // Scaling freedom pins f(1) = 1, so 2-entry mechanisms reduce to a
        // single parameter; a fine sweep over it is an independent oracle
        // for the n = 2 design value.
        let w = WelfareBasis::covering(2).unwrap();
        let opt = optimize_mechanism(&w, 2).unwrap();
        let mut best = 0.0f64;
        for k in -100..=200 {
            let t = k as f64 / 100.0;
            let f = Mechanism::new(vec![1.0, t]).unwrap();
            let r = poa(&f, &w, 2, Method::DualBoundary).unwrap();
            best = best.max(r.poa);
        }
        assert!(best <= opt.poa_opt + 1e-6, "grid {best} vs opt {}", opt.poa_opt);
        // The grid contains equal share itself, so it reaches the optimum.
        assert!(best >= opt.poa_opt - 1e-3);
    }

    #[test]
    fn design_constraints_hold_at_the_optimum() {
        let w = WelfareBasis::coverage(0.6, 4).unwrap();
        let r = optimize_mechanism(&w, 4).unwrap();
        assert!(r.f_opt.at(1) >= 1.0 - 1e-9);
        // The optimizer satisfies every boundary row of the program it was
        // solved against, i.e. with the basis scaled to w(1) = 1.
        for t in enumerate_boundary_set(4).unwrap() {
            let w_at =
                |j: usize| if (1..=4).contains(&j) { w.at(j) / w.at(1) } else { 0.0 };
            let f_at = |j: usize| if (1..=4).contains(&j) { r.f_opt.at(j) } else { 0.0 };
            let row = w_at(t.b + t.x) - r.mu_opt * w_at(t.a + t.x)
                + t.a as f64 * f_at(t.a + t.x)
                - t.b as f64 * f_at(t.a + t.x + 1);
            assert!(row <= 1e-9, "violated at {t}: {row}");
        }
        // And it certifies its own value against the unscaled basis.
        let check = poa(&r.f_opt, &w, 4, Method::DualBoundary).unwrap();
        assert!((check.poa - r.poa_opt).abs() < 1e-6);
    }

    #[test]
    fn scaling_the_basis_does_not_move_the_design_value() {
        let w = WelfareBasis::coverage(0.3, 5).unwrap();
        let base = optimize_mechanism(&w, 5).unwrap();
        for c in [0.5, 3.0] {
            let scaled =
                WelfareBasis::new(w.values().iter().map(|v| c * v).collect()).unwrap();
            let r = optimize_mechanism(&scaled, 5).unwrap();
            assert!(
                (r.poa_opt - base.poa_opt).abs() < 1e-6,
                "c = {c}: {} vs {}",
                r.poa_opt,
                base.poa_opt
            );
        }
    }

    #[test]
    fn rescaling_leaves_poa_unchanged() {
        let w = WelfareBasis::covering(3).unwrap();
        let f = Mechanism::equal_share(&w);
        let base = poa(&f, &w, 3, Method::DualBoundary).unwrap().poa;
        let scaled = rescale_mechanism(&f, 10.0).unwrap();
        let r = poa(&scaled, &w, 3, Method::DualBoundary).unwrap().poa;
        assert!((base - r).abs() < 1e-9);
        let expect: Vec<f64> = f.values().iter().map(|v| v * 10.0).collect();
        assert_eq!(scaled.values(), expect.as_slice());
        assert!(rescale_mechanism(&f, -2.0).is_err());
    }
}
