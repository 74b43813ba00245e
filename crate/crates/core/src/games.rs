//! Concrete game engine: welfare, utilities, potential, equilibria,
//! smoothness and budget-balance checks on finite instances.
//!
//! A game couples a set of valued resources, per-player action sets (each
//! action is a subset of resources), a welfare basis `w`, and a mechanism
//! `f`. The welfare of an allocation is `sum_r v_r w(load_r)` over covered
//! resources; player utilities are `sum_{r in a_i} v_r f(load_r)`. These are
//! congestion games with the Rosenthal potential
//! `phi(a) = sum_r v_r sum_{k=1}^{load_r} f(k)`, so pure Nash equilibria
//! always exist and exhaustive checks can rely on them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::basis::{Mechanism, WelfareBasis};
use crate::error::{Error, Result};

/// Deadband for strict-improvement checks: a unilateral deviation counts as
/// improving only if it gains more than this. Shared by the Nash test, best
/// response dynamics, and the worst-case constructions that certify against
/// them, so all agree on what "equilibrium" means in floating point.
pub const EPS_DEV: f64 = 1e-9;

/// Joint-enumeration guard: operations that sweep every allocation (or every
/// allocation pair) refuse to start above this many combinations.
pub const ENUMERATION_GUARD: u128 = 10_000_000;

/// One choice index per player, into that player's action sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Allocation(pub Vec<usize>);

impl Allocation {
    pub fn choices(&self) -> &[usize] {
        &self.0
    }
}

/// A finite resource-allocation game instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GameInstance {
    n: usize,
    resource_ids: Vec<String>,
    values: Vec<f64>,
    /// Per player, per action, sorted resource indices.
    actions: Vec<Vec<Vec<usize>>>,
    w: WelfareBasis,
    f: Mechanism,
}

impl GameInstance {
    /// Builds and validates a game. `actions[i]` lists player `i`'s actions,
    /// each a subset of resource ids; the empty subset is admissible, but an
    /// action may not repeat a resource and every player needs at least one
    /// action. `w` and `f` must cover loads up to the player count.
    pub fn new(
        n: usize,
        resources: Vec<(String, f64)>,
        actions: Vec<Vec<Vec<String>>>,
        w: WelfareBasis,
        f: Mechanism,
    ) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, (id, value)) in resources.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "duplicate resource id '{id}'"
                )));
            }
            if !value.is_finite() || *value < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "resource '{id}' has value {value}, expected >= 0"
                )));
            }
        }
        let mut indexed = Vec::with_capacity(actions.len());
        for (player, player_actions) in actions.iter().enumerate() {
            let mut acts = Vec::with_capacity(player_actions.len());
            for (k, action) in player_actions.iter().enumerate() {
                let mut ids = Vec::with_capacity(action.len());
                for id in action {
                    let Some(&r) = index.get(id) else {
                        return Err(Error::InvalidArgument(format!(
                            "player {player} action {k} references unknown resource '{id}'"
                        )));
                    };
                    ids.push(r);
                }
                ids.sort_unstable();
                if ids.windows(2).any(|p| p[0] == p[1]) {
                    return Err(Error::InvalidArgument(format!(
                        "player {player} action {k} repeats a resource"
                    )));
                }
                acts.push(ids);
            }
            indexed.push(acts);
        }
        let (ids, values) = resources.into_iter().unzip();
        Self::from_indexed(n, ids, values, indexed, w, f)
    }

    /// Index-based constructor for callers that already hold resource
    /// indices (worst-case construction, brute-force enumeration). Actions
    /// are stored sorted.
    pub fn from_indexed(
        n: usize,
        resource_ids: Vec<String>,
        values: Vec<f64>,
        mut actions: Vec<Vec<Vec<usize>>>,
        w: WelfareBasis,
        f: Mechanism,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("game needs at least one player".into()));
        }
        if actions.len() != n {
            return Err(Error::InvalidArgument(format!(
                "expected action sets for {n} players, got {}",
                actions.len()
            )));
        }
        if resource_ids.len() != values.len() {
            return Err(Error::InvalidArgument(
                "resource ids and values differ in length".into(),
            ));
        }
        for (player, acts) in actions.iter_mut().enumerate() {
            if acts.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "player {player} has an empty action sequence"
                )));
            }
            for action in acts {
                if action.iter().any(|&r| r >= resource_ids.len()) {
                    return Err(Error::InvalidArgument(format!(
                        "player {player} action references a resource index out of range"
                    )));
                }
                action.sort_unstable();
                if action.windows(2).any(|p| p[0] == p[1]) {
                    return Err(Error::InvalidArgument(format!(
                        "player {player} action repeats a resource"
                    )));
                }
            }
        }
        if w.n() < n || f.n() < n {
            return Err(Error::InvalidArgument(format!(
                "w and f must have length >= {n} (got {} and {})",
                w.n(),
                f.n()
            )));
        }
        Ok(Self {
            n,
            resource_ids,
            values,
            actions,
            w,
            f,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_resources(&self) -> usize {
        self.resource_ids.len()
    }

    pub fn resource_ids(&self) -> &[String] {
        &self.resource_ids
    }

    pub fn resource_values(&self) -> &[f64] {
        &self.values
    }

    pub fn basis(&self) -> &WelfareBasis {
        &self.w
    }

    pub fn mechanism(&self) -> &Mechanism {
        &self.f
    }

    /// Player `i`'s actions as sorted resource-index sets.
    pub fn actions_of(&self, player: usize) -> &[Vec<usize>] {
        &self.actions[player]
    }

    /// Product of the players' action counts.
    pub fn joint_size(&self) -> u128 {
        self.actions
            .iter()
            .fold(1u128, |acc, a| acc.saturating_mul(a.len() as u128))
    }

    fn validate_allocation(&self, alloc: &Allocation) -> Result<()> {
        if alloc.0.len() != self.n {
            return Err(Error::InvalidArgument(format!(
                "allocation has {} choices, expected {}",
                alloc.0.len(),
                self.n
            )));
        }
        for (i, &c) in alloc.0.iter().enumerate() {
            if c >= self.actions[i].len() {
                return Err(Error::InvalidArgument(format!(
                    "player {i} choice {c} out of range (has {} actions)",
                    self.actions[i].len()
                )));
            }
        }
        Ok(())
    }

    fn loads_unchecked(&self, choices: &[usize]) -> Vec<usize> {
        let mut loads = vec![0usize; self.resource_ids.len()];
        for (i, &c) in choices.iter().enumerate() {
            for &r in &self.actions[i][c] {
                loads[r] += 1;
            }
        }
        loads
    }

    /// Number of selectors per resource; resources selected by nobody map to 0.
    pub fn load_profile(&self, alloc: &Allocation) -> Result<BTreeMap<String, usize>> {
        self.validate_allocation(alloc)?;
        let loads = self.loads_unchecked(&alloc.0);
        Ok(self
            .resource_ids
            .iter()
            .cloned()
            .zip(loads)
            .collect())
    }

    fn welfare_of_loads(&self, loads: &[usize]) -> f64 {
        loads
            .iter()
            .zip(&self.values)
            .filter(|(&load, _)| load > 0)
            .map(|(&load, &v)| v * self.w.at(load))
            .sum()
    }

    /// System welfare `sum_r v_r w(load_r)` over covered resources.
    pub fn welfare(&self, alloc: &Allocation) -> Result<f64> {
        self.validate_allocation(alloc)?;
        Ok(self.welfare_of_loads(&self.loads_unchecked(&alloc.0)))
    }

    fn utility_of_loads(&self, player: usize, choice: usize, loads: &[usize]) -> f64 {
        self.actions[player][choice]
            .iter()
            .map(|&r| self.values[r] * self.f.at(loads[r]))
            .sum()
    }

    /// Player utility `sum_{r in a_i} v_r f(load_r)` (load includes the player).
    pub fn utility(&self, player: usize, alloc: &Allocation) -> Result<f64> {
        self.validate_allocation(alloc)?;
        if player >= self.n {
            return Err(Error::InvalidArgument(format!(
                "player {player} out of range"
            )));
        }
        let loads = self.loads_unchecked(&alloc.0);
        Ok(self.utility_of_loads(player, alloc.0[player], &loads))
    }

    /// Rosenthal potential `sum_r v_r sum_{k=1}^{load_r} f(k)`.
    pub fn potential(&self, alloc: &Allocation) -> Result<f64> {
        self.validate_allocation(alloc)?;
        let loads = self.loads_unchecked(&alloc.0);
        Ok(loads
            .iter()
            .zip(&self.values)
            .map(|(&load, &v)| (1..=load).map(|k| v * self.f.at(k)).sum::<f64>())
            .sum())
    }

    /// Best gain any single player can realize by deviating unilaterally.
    fn best_deviation_gain(&self, choices: &[usize], loads: &[usize]) -> f64 {
        let mut best = f64::NEG_INFINITY;
        let mut loads_minus = loads.to_vec();
        for (i, &current) in choices.iter().enumerate() {
            for &r in &self.actions[i][current] {
                loads_minus[r] -= 1;
            }
            let u_now = self.utility_of_loads(i, current, loads);
            for (k, action) in self.actions[i].iter().enumerate() {
                if k == current {
                    continue;
                }
                let u_alt: f64 = action
                    .iter()
                    .map(|&r| self.values[r] * self.f.at(loads_minus[r] + 1))
                    .sum();
                best = best.max(u_alt - u_now);
            }
            for &r in &self.actions[i][current] {
                loads_minus[r] += 1;
            }
        }
        best
    }

    /// True iff no player has a unilateral deviation gaining more than
    /// [`EPS_DEV`].
    pub fn is_nash(&self, alloc: &Allocation) -> Result<bool> {
        self.validate_allocation(alloc)?;
        let loads = self.loads_unchecked(&alloc.0);
        Ok(self.best_deviation_gain(&alloc.0, &loads) <= EPS_DEV)
    }

    fn for_each_allocation(&self, mut visit: impl FnMut(&[usize])) {
        let mut choices = vec![0usize; self.n];
        loop {
            visit(&choices);
            let mut i = 0;
            loop {
                if i == self.n {
                    return;
                }
                choices[i] += 1;
                if choices[i] < self.actions[i].len() {
                    break;
                }
                choices[i] = 0;
                i += 1;
            }
        }
    }

    fn guard(&self, size: u128, what: &str) -> Result<()> {
        if size > ENUMERATION_GUARD {
            return Err(Error::ResourceLimit(format!(
                "{what} would enumerate {size} combinations (guard {ENUMERATION_GUARD})"
            )));
        }
        Ok(())
    }

    /// All pure Nash allocations, by exhaustive check. Never empty for these
    /// games: the potential maximizer is always an equilibrium.
    pub fn enumerate_equilibria(&self) -> Result<Vec<Allocation>> {
        self.guard(self.joint_size(), "equilibrium enumeration")?;
        let mut out = Vec::new();
        self.for_each_allocation(|choices| {
            let loads = self.loads_unchecked(choices);
            if self.best_deviation_gain(choices, &loads) <= EPS_DEV {
                out.push(Allocation(choices.to_vec()));
            }
        });
        Ok(out)
    }

    /// Round-robin best-response dynamics from `start`; ties break toward
    /// the lowest action index. Converges because every accepted move raises
    /// the potential by more than [`EPS_DEV`].
    pub fn best_response_dynamics(
        &self,
        start: &Allocation,
        max_rounds: usize,
    ) -> Result<Allocation> {
        self.validate_allocation(start)?;
        let mut choices = start.0.clone();
        for _ in 0..max_rounds {
            let mut moved = false;
            for i in 0..self.n {
                let mut loads = self.loads_unchecked(&choices);
                for &r in &self.actions[i][choices[i]] {
                    loads[r] -= 1;
                }
                let mut best_k = 0usize;
                let mut best_u = f64::NEG_INFINITY;
                for (k, action) in self.actions[i].iter().enumerate() {
                    let u: f64 = action
                        .iter()
                        .map(|&r| self.values[r] * self.f.at(loads[r] + 1))
                        .sum();
                    if u > best_u {
                        best_u = u;
                        best_k = k;
                    }
                }
                let current_u: f64 = self.actions[i][choices[i]]
                    .iter()
                    .map(|&r| self.values[r] * self.f.at(loads[r] + 1))
                    .sum();
                if best_k != choices[i] && best_u - current_u > EPS_DEV {
                    choices[i] = best_k;
                    moved = true;
                }
            }
            if !moved {
                return Ok(Allocation(choices));
            }
        }
        Err(Error::ResourceLimit(format!(
            "best-response dynamics did not settle within {max_rounds} rounds"
        )))
    }

    /// Best welfare over all allocations.
    pub fn max_welfare(&self) -> Result<f64> {
        self.guard(self.joint_size(), "welfare optimization")?;
        let mut best = f64::NEG_INFINITY;
        self.for_each_allocation(|choices| {
            best = best.max(self.welfare_of_loads(&self.loads_unchecked(choices)));
        });
        Ok(best)
    }

    /// Worst equilibrium welfare divided by the best welfare over all
    /// allocations. Requires a strictly positive optimum.
    pub fn poa_of_game(&self) -> Result<f64> {
        self.guard(self.joint_size(), "welfare optimization")?;
        let mut max_welfare = f64::NEG_INFINITY;
        let mut min_eq = f64::INFINITY;
        self.for_each_allocation(|choices| {
            let loads = self.loads_unchecked(choices);
            let welfare = self.welfare_of_loads(&loads);
            max_welfare = max_welfare.max(welfare);
            if self.best_deviation_gain(choices, &loads) <= EPS_DEV {
                min_eq = min_eq.min(welfare);
            }
        });
        if max_welfare <= 0.0 {
            return Err(Error::PreconditionFailed(
                "maximum welfare is zero; the efficiency ratio is undefined".into(),
            ));
        }
        Ok(min_eq / max_welfare)
    }

    /// Exhaustive check of `sum_i U_i(a'_i, a_{-i}) >= lambda W(a') - mu W(a)`
    /// over all ordered allocation pairs.
    pub fn check_smoothness(&self, lambda: f64, mu: f64) -> Result<SmoothnessReport> {
        let size = self.joint_size();
        self.guard(size.saturating_mul(size), "smoothness check")?;

        let mut allocations: Vec<Vec<usize>> = Vec::new();
        self.for_each_allocation(|c| allocations.push(c.to_vec()));
        let loads: Vec<Vec<usize>> = allocations
            .iter()
            .map(|c| self.loads_unchecked(c))
            .collect();
        let welfare: Vec<f64> = loads.iter().map(|l| self.welfare_of_loads(l)).collect();

        let mut worst = f64::NEG_INFINITY;
        let mut witness = (0usize, 0usize);
        for (ai, a) in allocations.iter().enumerate() {
            // Loads seen by a deviating player: current allocation minus one
            // copy of that player's own action.
            let base = &loads[ai];
            for (bi, b) in allocations.iter().enumerate() {
                let mut lhs = 0.0;
                for i in 0..self.n {
                    let cur = &self.actions[i][a[i]];
                    for &r in &self.actions[i][b[i]] {
                        let minus_self = if cur.binary_search(&r).is_ok() { 1 } else { 0 };
                        lhs += self.values[r] * self.f.at(base[r] - minus_self + 1);
                    }
                }
                let violation = lambda * welfare[bi] - mu * welfare[ai] - lhs;
                if violation > worst {
                    worst = violation;
                    witness = (ai, bi);
                }
            }
        }
        let holds = worst <= crate::lpsolve::FEAS_TOL;
        Ok(SmoothnessReport {
            holds,
            worst_violation: worst,
            witness_pair: if holds {
                None
            } else {
                Some((
                    Allocation(allocations[witness.0].clone()),
                    Allocation(allocations[witness.1].clone()),
                ))
            },
        })
    }

    /// Extremes of `W(a) - sum_i U_i(a)` over all allocations, returned as
    /// `(max_gap, min_gap)`. Budget-balanced mechanisms give (0, 0).
    pub fn budget_balance_gap(&self) -> Result<(f64, f64)> {
        self.guard(self.joint_size(), "budget balance sweep")?;
        let mut max_gap = f64::NEG_INFINITY;
        let mut min_gap = f64::INFINITY;
        self.for_each_allocation(|choices| {
            let loads = self.loads_unchecked(choices);
            let welfare = self.welfare_of_loads(&loads);
            let utilities: f64 = (0..self.n)
                .map(|i| self.utility_of_loads(i, choices[i], &loads))
                .sum();
            let gap = welfare - utilities;
            max_gap = max_gap.max(gap);
            min_gap = min_gap.min(gap);
        });
        Ok((max_gap, min_gap))
    }
}

/// Outcome of an exhaustive smoothness check.
#[derive(Debug, Clone)]
pub struct SmoothnessReport {
    pub holds: bool,
    /// Largest value of `lambda W(a') - mu W(a) - sum_i U_i(a'_i, a_{-i})`.
    pub worst_violation: f64,
    /// A violating pair `(a, a')` when the condition fails.
    pub witness_pair: Option<(Allocation, Allocation)>,
}

#[derive(Serialize, Deserialize)]
struct ResourceJson {
    id: String,
    value: f64,
}

#[derive(Serialize, Deserialize)]
struct GameJson {
    n: usize,
    resources: Vec<ResourceJson>,
    actions: Vec<Vec<Vec<String>>>,
    w: WelfareBasis,
    f: Mechanism,
}

impl Serialize for GameInstance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GameJson {
            n: self.n,
            resources: self
                .resource_ids
                .iter()
                .zip(&self.values)
                .map(|(id, &value)| ResourceJson {
                    id: id.clone(),
                    value,
                })
                .collect(),
            actions: self
                .actions
                .iter()
                .map(|acts| {
                    acts.iter()
                        .map(|a| a.iter().map(|&r| self.resource_ids[r].clone()).collect())
                        .collect()
                })
                .collect(),
            w: self.w.clone(),
            f: self.f.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GameInstance {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = GameJson::deserialize(d)?;
        GameInstance::new(
            raw.n,
            raw.resources.into_iter().map(|r| (r.id, r.value)).collect(),
            raw.actions,
            raw.w,
            raw.f,
        )
        .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn covering_game(
        n: usize,
        resources: Vec<(&str, f64)>,
        actions: Vec<Vec<Vec<&str>>>,
        f: Mechanism,
    ) -> GameInstance {
        let w = WelfareBasis::covering(n).unwrap();
        GameInstance::new(
            n,
            resources
                .into_iter()
                .map(|(id, v)| (id.to_string(), v))
                .collect(),
            actions
                .into_iter()
                .map(|acts| {
                    acts.into_iter()
                        .map(|a| a.into_iter().map(str::to_string).collect())
                        .collect()
                })
                .collect(),
            w,
            f,
        )
        .unwrap()
    }

    fn es(n: usize) -> Mechanism {
        Mechanism::equal_share(&WelfareBasis::covering(n).unwrap())
    }

    #[test]
    fn load_profile_counts_selectors() {
        let g = covering_game(
            2,
            vec![("r1", 1.0), ("r2", 1.0)],
            vec![vec![vec!["r1"]], vec![vec!["r1"]]],
            es(2),
        );
        let p = g.load_profile(&Allocation(vec![0, 0])).unwrap();
        assert_eq!(p["r1"], 2);
        assert_eq!(p["r2"], 0);

        let g = covering_game(
            2,
            vec![("r1", 1.0), ("r2", 1.0)],
            vec![vec![vec!["r1", "r2"]], vec![vec![]]],
            es(2),
        );
        let p = g.load_profile(&Allocation(vec![0, 0])).unwrap();
        assert_eq!(p["r1"], 1);
        assert_eq!(p["r2"], 1);

        let g = covering_game(
            3,
            vec![("r1", 1.0), ("r2", 1.0)],
            vec![
                vec![vec!["r1"]],
                vec![vec!["r1", "r2"]],
                vec![vec!["r2"]],
            ],
            es(3),
        );
        let p = g.load_profile(&Allocation(vec![0, 0, 0])).unwrap();
        assert_eq!(p["r1"], 2);
        assert_eq!(p["r2"], 2);
    }

    #[test]
    fn welfare_covers_only_selected_resources() {
        let g = covering_game(
            2,
            vec![("r1", 1.0), ("r2", 1.0)],
            vec![vec![vec!["r1"]], vec![vec!["r1"], vec![]]],
            es(2),
        );
        assert_eq!(g.welfare(&Allocation(vec![0, 0])).unwrap(), 1.0);

        // Empty allocation has zero welfare.
        let g2 = covering_game(
            1,
            vec![("r1", 1.0)],
            vec![vec![vec![]]],
            es(1),
        );
        assert_eq!(g2.welfare(&Allocation(vec![0])).unwrap(), 0.0);

        // Coverage basis: one resource of value 2 under load 2.
        let w = WelfareBasis::coverage(0.5, 2).unwrap();
        let f = Mechanism::marginal_contribution(&w);
        let g3 = GameInstance::new(
            2,
            vec![("r".into(), 2.0)],
            vec![vec![vec!["r".into()]], vec![vec!["r".into()]]],
            w,
            f,
        )
        .unwrap();
        assert!((g3.welfare(&Allocation(vec![0, 0])).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn equal_share_utilities_sum_to_welfare() {
        let g = covering_game(
            2,
            vec![("r1", 1.0)],
            vec![vec![vec!["r1"]], vec![vec!["r1"]]],
            es(2),
        );
        let a = Allocation(vec![0, 0]);
        let u0 = g.utility(0, &a).unwrap();
        let u1 = g.utility(1, &a).unwrap();
        assert_eq!(u0, 0.5);
        assert_eq!(u1, 0.5);
        assert_eq!(u0 + u1, g.welfare(&a).unwrap());
        assert_eq!(g.budget_balance_gap().unwrap(), (0.0, 0.0));
    }

    #[test]
    fn marginal_contribution_pays_zero_on_shared() {
        let f = Mechanism::new(vec![1.0, 0.0]).unwrap();
        let g = covering_game(
            2,
            vec![("r1", 1.0)],
            vec![vec![vec!["r1"]], vec![vec!["r1"]]],
            f,
        );
        let a = Allocation(vec![0, 0]);
        assert_eq!(g.utility(0, &a).unwrap(), 0.0);
        assert_eq!(g.utility(1, &a).unwrap(), 0.0);
        // Gap at that allocation is W - 0 = 1.
        assert_eq!(g.budget_balance_gap().unwrap().0, 1.0);
    }

    #[test]
    fn singleton_player_collects_full_value() {
        let f = Mechanism::new(vec![1.0]).unwrap();
        let g = covering_game(1, vec![("r", 3.0)], vec![vec![vec!["r"]]], f);
        assert_eq!(g.utility(0, &Allocation(vec![0])).unwrap(), 3.0);
    }

    #[test]
    fn empty_only_game_has_zero_gaps() {
        let g = covering_game(
            2,
            vec![("r", 1.0)],
            vec![vec![vec![]], vec![vec![]]],
            es(2),
        );
        assert_eq!(g.budget_balance_gap().unwrap(), (0.0, 0.0));
    }

    #[test]
    fn potential_is_the_rosenthal_sum() {
        let f = Mechanism::new(vec![1.0, 0.5]).unwrap();
        let g = covering_game(
            2,
            vec![("r1", 1.0)],
            vec![vec![vec!["r1"]], vec![vec!["r1"]]],
            f,
        );
        assert_eq!(g.potential(&Allocation(vec![0, 0])).unwrap(), 1.5);

        let g2 = covering_game(
            1,
            vec![("r1", 1.0)],
            vec![vec![vec![]]],
            es(1),
        );
        assert_eq!(g2.potential(&Allocation(vec![0])).unwrap(), 0.0);
    }

    #[test]
    fn zero_value_trap_is_nash_when_f1_is_zero() {
        // One agent choosing between a valued and a worthless resource,
        // under a mechanism with f(1) = 0: the worthless pick is stable.
        let f = Mechanism::new(vec![0.0]).unwrap();
        let g = covering_game(
            1,
            vec![("r1", 1.0), ("r2", 0.0)],
            vec![vec![vec!["r1"], vec!["r2"]]],
            f,
        );
        assert!(g.is_nash(&Allocation(vec![1])).unwrap());
        let ratio = g.poa_of_game().unwrap();
        assert_eq!(ratio, 0.0);
    }

    #[test]
    fn misaligned_choice_is_not_nash() {
        // Player 2 can gain 0.5 by moving off the shared resource.
        let g = covering_game(
            2,
            vec![("r1", 1.0), ("r2", 1.0)],
            vec![vec![vec!["r1"]], vec![vec!["r1"], vec!["r2"]]],
            es(2),
        );
        assert!(!g.is_nash(&Allocation(vec![0, 0])).unwrap());
        assert!(g.is_nash(&Allocation(vec![0, 1])).unwrap());
    }

    #[test]
    fn single_player_equilibria_are_argmax_actions() {
        let g = covering_game(
            1,
            vec![("r1", 2.0), ("r2", 1.0)],
            vec![vec![vec!["r1"], vec!["r2"]]],
            es(1),
        );
        let eqs = g.enumerate_equilibria().unwrap();
        assert_eq!(eqs, vec![Allocation(vec![0])]);
        assert_eq!(g.poa_of_game().unwrap(), 1.0);
        // Best response from the bad action lands on the argmax.
        let end = g
            .best_response_dynamics(&Allocation(vec![1]), 10)
            .unwrap();
        assert_eq!(end, Allocation(vec![0]));
    }

    #[test]
    fn symmetric_game_keeps_both_symmetric_optima() {
        let g = covering_game(
            2,
            vec![("r1", 1.0), ("r2", 1.0)],
            vec![
                vec![vec!["r1"], vec!["r2"]],
                vec![vec!["r1"], vec!["r2"]],
            ],
            es(2),
        );
        let eqs = g.enumerate_equilibria().unwrap();
        assert!(eqs.contains(&Allocation(vec![0, 1])));
        assert!(eqs.contains(&Allocation(vec![1, 0])));
    }

    #[test]
    fn nash_start_is_returned_unchanged() {
        let g = covering_game(
            2,
            vec![("r1", 1.0), ("r2", 1.0)],
            vec![vec![vec!["r1"]], vec![vec!["r1"], vec!["r2"]]],
            es(2),
        );
        let start = Allocation(vec![0, 1]);
        assert_eq!(g.best_response_dynamics(&start, 5).unwrap(), start);
    }

    #[test]
    fn smoothness_trivial_cases() {
        let g = covering_game(
            2,
            vec![("r1", 1.0), ("r2", 1.0)],
            vec![
                vec![vec!["r1"], vec!["r2"]],
                vec![vec!["r1"], vec!["r2"]],
            ],
            es(2),
        );
        // Equal share on covering is (1, 1 - 1/n)-smooth.
        let rep = g.check_smoothness(1.0, 0.5).unwrap();
        assert!(rep.holds, "worst violation {}", rep.worst_violation);
        // (0, 0)-smoothness reduces to non-negativity of the swapped utility
        // sum, which holds for a non-negative mechanism.
        let rep = g.check_smoothness(0.0, 0.0).unwrap();
        assert!(rep.holds);
    }

    #[test]
    fn marginal_contribution_violates_one_zero_smoothness() {
        let f = Mechanism::new(vec![1.0, 0.0]).unwrap();
        let g = covering_game(
            2,
            vec![("r1", 1.0)],
            vec![vec![vec!["r1"]], vec![vec!["r1"]]],
            f,
        );
        // a = a' = both on r1: lhs = 0 but lambda W(a') - mu W(a) = 1.
        let rep = g.check_smoothness(1.0, 0.0).unwrap();
        assert!(!rep.holds);
        assert!(rep.worst_violation >= 1.0 - 1e-12);
        assert!(rep.witness_pair.is_some());
    }

    #[test]
    fn rejects_malformed_games_and_allocations() {
        let w = WelfareBasis::covering(2).unwrap();
        let f = es(2);
        // Duplicate resource in one action.
        assert!(GameInstance::new(
            1,
            vec![("r1".into(), 1.0)],
            vec![vec![vec!["r1".into(), "r1".into()]]],
            w.clone(),
            f.clone(),
        )
        .is_err());
        // Unknown id.
        assert!(GameInstance::new(
            1,
            vec![("r1".into(), 1.0)],
            vec![vec![vec!["r9".into()]]],
            w.clone(),
            f.clone(),
        )
        .is_err());
        // Negative value.
        assert!(GameInstance::new(
            1,
            vec![("r1".into(), -1.0)],
            vec![vec![vec!["r1".into()]]],
            w.clone(),
            f.clone(),
        )
        .is_err());
        // w/f too short for the player count.
        assert!(GameInstance::new(
            3,
            vec![("r1".into(), 1.0)],
            vec![vec![vec![]]; 3],
            w.clone(),
            f.clone(),
        )
        .is_err());

        let g = covering_game(
            1,
            vec![("r1", 1.0)],
            vec![vec![vec!["r1"]]],
            es(1),
        );
        assert!(g.welfare(&Allocation(vec![5])).is_err());
        assert!(g.welfare(&Allocation(vec![0, 0])).is_err());
    }

    #[test]
    fn game_json_round_trips() {
        let g = covering_game(
            2,
            vec![("a", 1.0), ("b", 0.5)],
            vec![
                vec![vec!["a"], vec!["b"]],
                vec![vec!["a", "b"], vec![]],
            ],
            es(2),
        );
        let s = serde_json::to_string(&g).unwrap();
        let back: GameInstance = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
    }
}
