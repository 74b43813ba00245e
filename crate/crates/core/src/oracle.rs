//! Independent brute-force validation against concrete game families.
//!
//! The LP machinery claims an exact worst case over an infinite game class;
//! this module attacks the same quantity from the other side by enumerating
//! (or sampling) small concrete games and taking the minimum per-game
//! efficiency ratio. Soundness is unconditional: every family member lies
//! in the class, so the family minimum can never undercut the LP value, and
//! families chosen to contain a tight instance must reach it exactly.
//!
//! Games are evaluated on a compact bitmask representation (resources are
//! mask bits), so exhausting a few million games stays cheap. Player order
//! is irrelevant to the ratio, so exhaustive enumeration walks multisets of
//! per-player action collections rather than ordered tuples.

use rayon::prelude::*;
use serde::Serialize;

use crate::basis::{Mechanism, WelfareBasis};
use crate::error::{Error, Result};
use crate::games::{GameInstance, EPS_DEV};
use crate::poa::{poa, Method};
use crate::rng::SplitMix64;

/// Hard cap on exhaustive family size (evaluated games).
const EXHAUSTIVE_CAP: u128 = 300_000_000;
/// Per-game cap on the joint allocation count.
const PER_GAME_CAP: u128 = 1_000_000;

/// How a family is traversed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMode {
    /// Every game in the family, exactly once.
    Exhaustive,
    /// This many seeded draws.
    Sample(u64),
}

/// A finite family of games over `n` players.
#[derive(Debug, Clone)]
pub struct FamilySpec {
    pub n: usize,
    /// Resource counts range over `1..=max_resources` (at most 16).
    pub max_resources: usize,
    /// Each player gets between 1 and this many distinct actions.
    pub max_actions_per_player: usize,
    /// Resource values are drawn from this grid.
    pub value_grid: Vec<f64>,
    /// Whether the empty subset is an admissible action.
    pub include_empty_action: bool,
    pub mode: SampleMode,
    /// Stream seed for [`SampleMode::Sample`].
    pub seed: u64,
}

impl FamilySpec {
    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("family needs n >= 1".into()));
        }
        if self.max_resources == 0 || self.max_resources > 16 {
            return Err(Error::InvalidArgument(
                "max_resources must lie in 1..=16".into(),
            ));
        }
        if self.max_actions_per_player == 0 {
            return Err(Error::InvalidArgument(
                "max_actions_per_player must be >= 1".into(),
            ));
        }
        if self.value_grid.is_empty()
            || self
                .value_grid
                .iter()
                .any(|v| !v.is_finite() || *v < 0.0)
        {
            return Err(Error::InvalidArgument(
                "value grid must be non-empty with finite non-negative entries".into(),
            ));
        }
        let per_game = (self.max_actions_per_player as u128)
            .checked_pow(self.n as u32)
            .unwrap_or(u128::MAX);
        if per_game > PER_GAME_CAP {
            return Err(Error::ResourceLimit(format!(
                "a single game may hold up to {per_game} allocations (cap {PER_GAME_CAP})"
            )));
        }
        Ok(())
    }

    /// Conventional default grid: small enough to exhaust, rich enough to
    /// break symmetric ties.
    pub fn default_grid() -> Vec<f64> {
        vec![0.0, 0.5, 1.0, 2.0]
    }
}

/// Family minimum and the game attaining it.
#[derive(Debug, Clone)]
pub struct OracleOutcome {
    pub min_ratio: f64,
    pub argmin_game: GameInstance,
    /// Games whose ratio was evaluated (zero-optimum games are skipped).
    pub games_checked: u64,
}

/// Wire format combining the family minimum with the LP value.
#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub min_ratio: f64,
    pub lp_poa: f64,
    pub games_checked: u64,
    pub argmin_game: GameInstance,
}

/// One candidate game in compact form.
#[derive(Debug, Clone)]
struct Candidate {
    m: usize,
    values: Vec<f64>,
    /// Per player, the list of action bitmasks.
    actions: Vec<Vec<u32>>,
}

impl Candidate {
    fn into_game(self, f: &Mechanism, w: &WelfareBasis, n: usize) -> Result<GameInstance> {
        let ids: Vec<String> = (0..self.m).map(|r| format!("r{r}")).collect();
        let actions: Vec<Vec<Vec<usize>>> = self
            .actions
            .iter()
            .map(|acts| {
                acts.iter()
                    .map(|&mask| (0..self.m).filter(|r| mask >> r & 1 == 1).collect())
                    .collect()
            })
            .collect();
        GameInstance::from_indexed(
            self.n_players(),
            ids,
            self.values,
            actions,
            WelfareBasis::new(w.values()[..n].to_vec())?,
            Mechanism::new(f.values()[..n].to_vec())?,
        )
    }

    fn n_players(&self) -> usize {
        self.actions.len()
    }
}

/// Worst equilibrium welfare over best welfare for a compact game, or
/// `None` when the best welfare is zero (the ratio is then undefined and
/// the game falls outside the class).
fn ratio_of(candidate: &Candidate, w_tab: &[f64], f_tab: &[f64]) -> Option<f64> {
    let n = candidate.n_players();
    let values = &candidate.values;
    let acts = &candidate.actions;
    let mut choice = vec![0usize; n];
    let mut loads = [0u8; 16];
    let mut max_welfare = 0.0f64;
    let mut min_eq = f64::INFINITY;
    loop {
        loads.fill(0);
        let mut union = 0u32;
        for (i, &c) in choice.iter().enumerate() {
            let mut mask = acts[i][c];
            union |= mask;
            while mask != 0 {
                loads[mask.trailing_zeros() as usize] += 1;
                mask &= mask - 1;
            }
        }
        let mut welfare = 0.0;
        let mut u = union;
        while u != 0 {
            let r = u.trailing_zeros() as usize;
            welfare += values[r] * w_tab[loads[r] as usize];
            u &= u - 1;
        }
        max_welfare = max_welfare.max(welfare);
        // Only equilibria cheaper than the current minimum matter.
        if welfare < min_eq {
            let mut nash = true;
            'players: for (i, &c) in choice.iter().enumerate() {
                let own = acts[i][c];
                let mut u_now = 0.0;
                let mut mask = own;
                while mask != 0 {
                    let r = mask.trailing_zeros() as usize;
                    u_now += values[r] * f_tab[loads[r] as usize];
                    mask &= mask - 1;
                }
                for (k, &alt) in acts[i].iter().enumerate() {
                    if k == c {
                        continue;
                    }
                    let mut u_alt = 0.0;
                    let mut mask = alt;
                    while mask != 0 {
                        let r = mask.trailing_zeros() as usize;
                        let minus_self = (own >> r & 1) as u8;
                        u_alt += values[r] * f_tab[(loads[r] - minus_self + 1) as usize];
                        mask &= mask - 1;
                    }
                    if u_alt - u_now > EPS_DEV {
                        nash = false;
                        break 'players;
                    }
                }
            }
            if nash {
                min_eq = welfare;
            }
        }
        // Mixed-radix increment over the joint action space.
        let mut i = 0;
        loop {
            if i == n {
                if max_welfare <= 0.0 {
                    return None;
                }
                debug_assert!(min_eq.is_finite(), "potential game without equilibrium");
                return Some(min_eq / max_welfare);
            }
            choice[i] += 1;
            if choice[i] < acts[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

fn lookup_tables(f: &Mechanism, w: &WelfareBasis, n: usize) -> (Vec<f64>, Vec<f64>) {
    let w_tab: Vec<f64> = (0..=n + 1)
        .map(|j| if j >= 1 && j <= n { w.at(j) } else { 0.0 })
        .collect();
    let f_tab: Vec<f64> = (0..=n + 1)
        .map(|j| if j >= 1 && j <= n { f.at(j) } else { 0.0 })
        .collect();
    (w_tab, f_tab)
}

/// All collections of 1..=k distinct masks from `pool`, in index order.
fn action_collections(pool: &[u32], k: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut current: Vec<u32> = Vec::new();
    fn recurse(
        pool: &[u32],
        k: usize,
        start: usize,
        current: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        if !current.is_empty() {
            out.push(current.clone());
        }
        if current.len() == k {
            return;
        }
        for i in start..pool.len() {
            current.push(pool[i]);
            recurse(pool, k, i + 1, current, out);
            current.pop();
        }
    }
    recurse(pool, k, 0, &mut current, &mut out);
    out
}

/// Non-decreasing index tuples of length `n` over `0..count` (multisets).
fn player_multisets(count: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(n);
    fn recurse(count: usize, n: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == n {
            out.push(current.clone());
            return;
        }
        for i in start..count {
            current.push(i);
            recurse(count, n, i, current, out);
            current.pop();
        }
    }
    recurse(count, n, 0, &mut current, &mut out);
    out
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let mut result = 1u128;
    for i in 0..k.min(n - k) {
        result = result.saturating_mul(n - i) / (i + 1);
    }
    result
}

struct Best {
    ratio: f64,
    ordinal: u64,
    candidate: Option<Candidate>,
}

impl Best {
    fn empty() -> Self {
        Best {
            ratio: f64::INFINITY,
            ordinal: u64::MAX,
            candidate: None,
        }
    }

    fn consider(&mut self, ratio: f64, ordinal: u64, make: impl FnOnce() -> Candidate) {
        if ratio < self.ratio || (ratio == self.ratio && ordinal < self.ordinal) {
            self.ratio = ratio;
            self.ordinal = ordinal;
            self.candidate = Some(make());
        }
    }

    fn merge(self, other: Self) -> Self {
        if other.ratio < self.ratio || (other.ratio == self.ratio && other.ordinal < self.ordinal)
        {
            other
        } else {
            self
        }
    }
}

/// Minimum efficiency ratio over the family, with the attaining game.
///
/// Exhaustive mode walks every combination of resource count, per-player
/// action collection (as a player multiset; relabeling players never
/// changes the ratio), and value profile. Sample mode draws games from
/// per-index generator streams, so the result is a pure function of the
/// seed regardless of thread count.
pub fn brute_force_poa(
    f: &Mechanism,
    w: &WelfareBasis,
    spec: &FamilySpec,
) -> Result<OracleOutcome> {
    spec.validate()?;
    let n = spec.n;
    if f.n() < n || w.n() < n {
        return Err(Error::InvalidArgument(format!(
            "f and w must have length >= n = {n}"
        )));
    }
    if f.at(1) <= 0.0 {
        return Err(Error::PreconditionFailed(format!(
            "brute force requires f(1) > 0, got {}",
            f.at(1)
        )));
    }
    let (w_tab, f_tab) = lookup_tables(f, w, n);

    let (best, games_checked) = match spec.mode {
        SampleMode::Exhaustive => exhaustive_scan(spec, &w_tab, &f_tab)?,
        SampleMode::Sample(count) => sampled_scan(spec, count, &w_tab, &f_tab),
    };

    let Some(candidate) = best.candidate else {
        return Err(Error::PreconditionFailed(
            "family contains no game with positive optimum welfare".into(),
        ));
    };
    Ok(OracleOutcome {
        min_ratio: best.ratio,
        argmin_game: candidate.into_game(f, w, n)?,
        games_checked,
    })
}

fn exhaustive_scan(
    spec: &FamilySpec,
    w_tab: &[f64],
    f_tab: &[f64],
) -> Result<(Best, u64)> {
    let n = spec.n;
    let grid = &spec.value_grid;

    // Upfront size accounting, so oversized requests fail fast.
    let mut total: u128 = 0;
    for m in 1..=spec.max_resources {
        let pool = (1u128 << m) - 1 + u128::from(spec.include_empty_action);
        let collections: u128 = (1..=spec.max_actions_per_player as u128)
            .map(|k| binomial(pool, k))
            .sum();
        let structures = binomial(collections + n as u128 - 1, n as u128);
        total = total.saturating_add(
            structures.saturating_mul((grid.len() as u128).saturating_pow(m as u32)),
        );
    }
    if total > EXHAUSTIVE_CAP {
        return Err(Error::ResourceLimit(format!(
            "exhaustive family holds {total} games (cap {EXHAUSTIVE_CAP})"
        )));
    }

    let mut best = Best::empty();
    let mut games_checked = 0u64;
    let mut ordinal_base = 0u64;
    for m in 1..=spec.max_resources {
        let lo = if spec.include_empty_action { 0u32 } else { 1u32 };
        let pool: Vec<u32> = (lo..(1u32 << m)).collect();
        let collections = action_collections(&pool, spec.max_actions_per_player);
        let structures = player_multisets(collections.len(), n);
        let profiles: Vec<Vec<f64>> = value_profiles(grid, m);
        let per_structure = profiles.len() as u64;

        let (m_best, m_checked) = structures
            .par_iter()
            .enumerate()
            .map(|(si, structure)| {
                let mut local = Best::empty();
                let mut checked = 0u64;
                let actions: Vec<Vec<u32>> = structure
                    .iter()
                    .map(|&ci| collections[ci].clone())
                    .collect();
                let mut candidate = Candidate {
                    m,
                    values: vec![0.0; m],
                    actions,
                };
                for (pi, profile) in profiles.iter().enumerate() {
                    candidate.values.copy_from_slice(profile);
                    if let Some(ratio) = ratio_of(&candidate, w_tab, f_tab) {
                        checked += 1;
                        let ordinal =
                            ordinal_base + si as u64 * per_structure + pi as u64;
                        local.consider(ratio, ordinal, || candidate.clone());
                    }
                }
                (local, checked)
            })
            .reduce(
                || (Best::empty(), 0u64),
                |(a, ca), (b, cb)| (a.merge(b), ca + cb),
            );
        best = best.merge(m_best);
        games_checked += m_checked;
        ordinal_base += structures.len() as u64 * per_structure;
    }
    Ok((best, games_checked))
}

fn value_profiles(grid: &[f64], m: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut idx = vec![0usize; m];
    loop {
        out.push(idx.iter().map(|&i| grid[i]).collect());
        let mut r = 0;
        loop {
            if r == m {
                return out;
            }
            idx[r] += 1;
            if idx[r] < grid.len() {
                break;
            }
            idx[r] = 0;
            r += 1;
        }
    }
}

fn sampled_scan(spec: &FamilySpec, count: u64, w_tab: &[f64], f_tab: &[f64]) -> (Best, u64) {
    let results: Vec<(Best, u64)> = (0..count)
        .into_par_iter()
        .map(|k| {
            let mut local = Best::empty();
            let mut checked = 0u64;
            let candidate = draw_candidate(spec, k);
            if let Some(ratio) = ratio_of(&candidate, w_tab, f_tab) {
                checked = 1;
                local.consider(ratio, k, || candidate);
            }
            (local, checked)
        })
        .collect();
    results
        .into_iter()
        .fold((Best::empty(), 0u64), |(a, ca), (b, cb)| {
            (a.merge(b), ca + cb)
        })
}

/// Draws the `k`-th sampled game of a family: its own generator stream makes
/// the draw independent of traversal order.
fn draw_candidate(spec: &FamilySpec, k: u64) -> Candidate {
    let mut rng = SplitMix64::stream(spec.seed, k);
    let m = rng.next_in(1, spec.max_resources);
    let values: Vec<f64> = (0..m)
        .map(|_| spec.value_grid[rng.next_below(spec.value_grid.len())])
        .collect();
    let lo = if spec.include_empty_action { 0u32 } else { 1u32 };
    let span = (1u32 << m) - lo;
    let mut actions = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let want = rng.next_in(1, spec.max_actions_per_player);
        let mut masks: Vec<u32> = Vec::with_capacity(want);
        for _ in 0..want * 16 {
            if masks.len() == want {
                break;
            }
            let mask = lo + rng.next_below(span as usize) as u32;
            if !masks.contains(&mask) {
                masks.push(mask);
            }
        }
        masks.sort_unstable();
        actions.push(masks);
    }
    Candidate { m, values, actions }
}

/// Runs the brute force and pairs it with the LP value in one report.
pub fn oracle_report(f: &Mechanism, w: &WelfareBasis, spec: &FamilySpec) -> Result<OracleReport> {
    let outcome = brute_force_poa(f, w, spec)?;
    let lp = poa(f, w, spec.n, Method::DualBoundary)?;
    Ok(OracleReport {
        min_ratio: outcome.min_ratio,
        lp_poa: lp.poa,
        games_checked: outcome.games_checked,
        argmin_game: outcome.argmin_game,
    })
}
