//! Worst-case game construction from a feasible primal weighting.
//!
//! Any feasible `theta` of the primal program can be realized exactly by a
//! concrete game: for each support triple `(a, x, b)`, place `n` resources
//! of value `theta/n` on a ring, and give every player two actions built
//! from overlapping arcs: an equilibrium arc of `a + x` consecutive
//! resources starting at the player's own position, and an optimum arc of
//! `b + x` resources shifted back by `b`. Each ring resource then carries
//! exactly `a + x` selectors in the designated equilibrium and `b + x` in
//! the designated optimum, the equilibrium welfare is the normalization sum,
//! and the optimum welfare is the objective sum. The equilibrium is genuine
//! because every unilateral switch changes the potential by exactly the
//! (non-negative) equilibrium-sum constraint value divided by `n`.

use crate::basis::{Mechanism, WelfareBasis};
use crate::error::{Error, Result};
use crate::games::{Allocation, GameInstance};
use crate::index::IndexTriple;
use crate::lpsolve::FEAS_TOL;
use crate::poa::SUPPORT_TOL;

/// A constructed game with its designated allocations and the efficiency
/// ratio the construction is certifying.
///
/// Serializes as the game schema plus `designated_equilibrium`,
/// `designated_optimum`, and `predicted_ratio`.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct WitnessGame {
    #[serde(flatten)]
    pub game: GameInstance,
    pub designated_equilibrium: Allocation,
    pub designated_optimum: Allocation,
    /// Equilibrium welfare over optimum welfare as predicted from `theta`.
    pub predicted_ratio: f64,
}

/// Builds the ring game realizing `theta`.
///
/// Entries below the support tolerance are dropped first; the remaining
/// weighting must still satisfy the primal constraints (equilibrium sum
/// `>= 0`, normalization `= 1`) within tolerance, or the violated constraint
/// is reported. The resulting game has `n * |support|` resources and exactly
/// two actions per player, identical when equilibrium and optimum coincide.
pub fn build_worst_case(
    theta: &[(IndexTriple, f64)],
    f: &Mechanism,
    w: &WelfareBasis,
    n: usize,
) -> Result<WitnessGame> {
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
    let w_at = |j: usize| if j >= 1 && j <= n { w.at(j) } else { 0.0 };
    let f_at = |j: usize| if j >= 1 && j <= n { f.at(j) } else { 0.0 };

    let mut support: Vec<(IndexTriple, f64)> = Vec::new();
    for &(t, v) in theta {
        if t.sum() == 0 || t.sum() > n {
            return Err(Error::InvalidArgument(format!(
                "triple {t} lies outside the index set for n = {n}"
            )));
        }
        if v >= SUPPORT_TOL {
            support.push((t, v));
        }
    }
    support.sort_by_key(|(t, _)| *t);
    support.dedup_by_key(|(t, _)| *t);
    if support.is_empty() {
        return Err(Error::PreconditionFailed(
            "theta has empty support after truncation; nothing to realize".into(),
        ));
    }

    let mut eq_sum = 0.0;
    let mut eq_scale = 1.0f64;
    let mut norm_sum = 0.0;
    let mut norm_scale = 1.0f64;
    let mut objective = 0.0;
    for &(t, v) in &support {
        let coeff = t.a as f64 * f_at(t.a + t.x) - t.b as f64 * f_at(t.a + t.x + 1);
        eq_sum += coeff * v;
        eq_scale = eq_scale.max((coeff * v).abs());
        norm_sum += w_at(t.a + t.x) * v;
        norm_scale = norm_scale.max((w_at(t.a + t.x) * v).abs());
        objective += w_at(t.b + t.x) * v;
    }
    if (norm_sum - 1.0).abs() > FEAS_TOL * norm_scale {
        return Err(Error::PreconditionFailed(format!(
            "theta violates the normalization constraint: \
             sum w(a+x) theta = {norm_sum} != 1"
        )));
    }
    if eq_sum < -FEAS_TOL * eq_scale {
        return Err(Error::PreconditionFailed(format!(
            "theta violates the equilibrium-sum constraint: \
             sum [a f(a+x) - b f(a+x+1)] theta = {eq_sum} < 0"
        )));
    }

    // n ring resources per support triple, each worth theta/n.
    let mut ids = Vec::with_capacity(n * support.len());
    let mut values = Vec::with_capacity(n * support.len());
    for &(t, v) in &support {
        for j in 1..=n {
            ids.push(format!("r({},{},{},{})", t.a, t.x, t.b, j));
            values.push(v / n as f64);
        }
    }

    let ring = n as i64;
    let mut actions: Vec<Vec<Vec<usize>>> = Vec::with_capacity(n);
    // Arc membership is kept in its `count >= 1 + offset` form to mirror the
    // stated rule; rewriting it would only obscure the ring geometry.
    #[allow(clippy::int_plus_one)]
    for i in 1..=n as i64 {
        let mut equilibrium = Vec::new();
        let mut optimum = Vec::new();
        for (k, &(t, _)) in support.iter().enumerate() {
            for j in 1..=n as i64 {
                let resource = k * n + (j as usize - 1);
                if t.a + t.x >= 1 + (j - i).rem_euclid(ring) as usize {
                    equilibrium.push(resource);
                }
                if t.b + t.x >= 1 + (j - i + t.b as i64).rem_euclid(ring) as usize {
                    optimum.push(resource);
                }
            }
        }
        actions.push(vec![equilibrium, optimum]);
    }

    let game = GameInstance::from_indexed(
        n,
        ids,
        values,
        actions,
        WelfareBasis::new(w.values()[..n].to_vec())?,
        Mechanism::new(f.values()[..n].to_vec())?,
    )?;

    Ok(WitnessGame {
        game,
        designated_equilibrium: Allocation(vec![0; n]),
        designated_optimum: Allocation(vec![1; n]),
        predicted_ratio: norm_sum / objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poa::solve_primal;

    fn covering(n: usize) -> WelfareBasis {
        WelfareBasis::covering(n).unwrap()
    }

    fn es(n: usize) -> Mechanism {
        Mechanism::equal_share(&covering(n))
    }

    fn loads_of(game: &GameInstance, alloc: &Allocation) -> Vec<usize> {
        let profile = game.load_profile(alloc).unwrap();
        game.resource_ids()
            .iter()
            .map(|id| profile[id])
            .collect()
    }

    #[test]
    fn shared_singleton_gives_coinciding_actions() {
        // theta = {(0,1,0): 1/w(1)}: every player's two arcs are the same
        // single resource, so equilibrium and optimum coincide, ratio 1.
        let n = 3;
        let w = covering(n);
        let f = es(n);
        let theta = vec![(IndexTriple::new(0, 1, 0), 1.0)];
        let witness = build_worst_case(&theta, &f, &w, n).unwrap();
        assert!((witness.predicted_ratio - 1.0).abs() < 1e-12);
        for i in 0..n {
            let acts = witness.game.actions_of(i);
            assert_eq!(acts[0], acts[1]);
        }
        assert!(witness
            .game
            .is_nash(&witness.designated_equilibrium)
            .unwrap());
        let eq_w = witness.game.welfare(&witness.designated_equilibrium).unwrap();
        assert!((eq_w - 1.0).abs() < 1e-12);
    }

    #[test]
    fn optimum_only_weighting_fails_normalization() {
        let theta = vec![(IndexTriple::new(0, 0, 1), 1.0)];
        let err = build_worst_case(&theta, &es(2), &covering(2), 2).unwrap_err();
        match err {
            Error::PreconditionFailed(msg) => assert!(msg.contains("normalization")),
            other => panic!("expected precondition failure, got {other:?}"),
        }
    }

    #[test]
    fn empty_support_is_rejected() {
        let theta = vec![(IndexTriple::new(0, 1, 0), 1e-12)];
        assert!(matches!(
            build_worst_case(&theta, &es(2), &covering(2), 2),
            Err(Error::PreconditionFailed(_))
        ));
        assert!(matches!(
            build_worst_case(&[], &es(2), &covering(2), 2),
            Err(Error::PreconditionFailed(_))
        ));
    }

    #[test]
    fn out_of_range_triple_is_invalid() {
        let theta = vec![(IndexTriple::new(2, 1, 0), 1.0)];
        assert!(matches!(
            build_worst_case(&theta, &es(2), &covering(2), 2),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn ring_arcs_match_the_worked_description() {
        // For (a,x,b) = (2,1,1) on a ring of n = 5: player 1's equilibrium
        // arc is {1,2,3}, its optimum arc {5,1}; player 2 shifts to {2,3,4}
        // and {1,2}; player 3 to {3,4,5} and {2,3}.
        let n = 5;
        let w = covering(n);
        let f = es(n);
        // Normalization needs w(a+x) theta = w(3) theta = 1.
        let theta = vec![(IndexTriple::new(2, 1, 1), 1.0)];
        let witness = build_worst_case(&theta, &f, &w, n).unwrap();
        let expect_eq = [vec![0, 1, 2], vec![1, 2, 3], vec![2, 3, 4]];
        let expect_opt = [vec![4, 0], vec![0, 1], vec![1, 2]];
        for i in 0..3 {
            let acts = witness.game.actions_of(i);
            assert_eq!(acts[0], expect_eq[i], "player {} equilibrium arc", i + 1);
            let mut opt = acts[1].clone();
            opt.sort_unstable();
            let mut want = expect_opt[i].clone();
            want.sort_unstable();
            assert_eq!(opt, want, "player {} optimum arc", i + 1);
        }
        // Every ring resource carries a+x = 3 equilibrium selectors and
        // b+x = 2 optimum selectors, exactly.
        for load in loads_of(&witness.game, &witness.designated_equilibrium) {
            assert_eq!(load, 3);
        }
        for load in loads_of(&witness.game, &witness.designated_optimum) {
            assert_eq!(load, 2);
        }
    }

    #[test]
    fn primal_optimum_realizes_the_lp_value() {
        let n = 2;
        let w = covering(n);
        let f = Mechanism::marginal_contribution(&w);
        let primal = solve_primal(&f, &w, n).unwrap();
        let witness = build_worst_case(&primal.theta, &f, &w, n).unwrap();

        let eq_w = witness.game.welfare(&witness.designated_equilibrium).unwrap();
        let opt_w = witness.game.welfare(&witness.designated_optimum).unwrap();
        assert!((eq_w - 1.0).abs() < 1e-9);
        assert!((opt_w / eq_w - 2.0).abs() < 1e-6);
        assert!((witness.predicted_ratio - 0.5).abs() < 1e-6);

        // The designated equilibrium is a genuine equilibrium and shows up
        // in the exhaustive enumeration.
        assert!(witness.game.is_nash(&witness.designated_equilibrium).unwrap());
        let eqs = witness.game.enumerate_equilibria().unwrap();
        assert!(eqs.contains(&witness.designated_equilibrium));

        // Ratio certified by the game itself.
        let ratio = witness.game.poa_of_game().unwrap();
        assert!((ratio - 0.5).abs() < 1e-6, "ratio = {ratio}");

        // Resource count is n per support triple.
        assert_eq!(
            witness.game.num_resources(),
            n * primal.support.len()
        );
    }

    #[test]
    fn potential_difference_certificate() {
        let n = 3;
        let w = covering(n);
        let f = es(n);
        let primal = solve_primal(&f, &w, n).unwrap();
        let witness = build_worst_case(&primal.theta, &f, &w, n).unwrap();
        let expected: f64 = primal
            .theta
            .iter()
            .map(|(t, v)| {
                v * (t.a as f64 * f.at(t.a + t.x) - t.b as f64 * f.at(t.a + t.x + 1))
            })
            .sum::<f64>()
            / n as f64;
        let phi_eq = witness.game.potential(&witness.designated_equilibrium).unwrap();
        for i in 0..n {
            let mut deviated = witness.designated_equilibrium.clone();
            deviated.0[i] = 1;
            let phi_dev = witness.game.potential(&deviated).unwrap();
            let diff = phi_eq - phi_dev;
            assert!(diff >= -1e-9, "player {i}: potential drop {diff}");
            assert!(
                (diff - expected).abs() <= 1e-9 * expected.abs().max(1.0),
                "player {i}: {diff} vs {expected}"
            );
            // The potential difference equals the utility difference.
            let u_eq = witness.game.utility(i, &witness.designated_equilibrium).unwrap();
            let u_dev = witness.game.utility(i, &deviated).unwrap();
            assert!((diff - (u_eq - u_dev)).abs() < 1e-12);
        }
    }
}
