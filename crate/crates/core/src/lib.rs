//! Exact price-of-anarchy analysis for distributed resource allocation.
//!
//! Agents pick subsets of valued resources; the system collects
//! `sum_r v_r w(load_r)` while each agent maximizes `sum_{r in a_i} v_r
//! f(load_r)`. Given the welfare shape `w`, the utility shape `f`, and a
//! player bound `n`, this crate:
//!
//! * computes the exact price of anarchy of the induced game class as a
//!   small linear program, in primal, dual, reduced, and closed forms
//!   ([`mod@poa`]);
//! * designs the mechanism `f` maximizing that price of anarchy, again as a
//!   linear program ([`design`]);
//! * constructs concrete worst-case games certifying the LP value is
//!   attained ([`witness`]);
//! * evaluates, enumerates, and verifies finite game instances: equilibria,
//!   potential, smoothness, budget balance ([`games`]);
//! * cross-checks everything against brute-force enumeration of small game
//!   families ([`oracle`]).
//!
//! Everything is deterministic: LP pivoting follows Bland's rule, index
//! enumerations are lexicographic, and sampling uses counter-addressed
//! generator streams, so identical inputs give bit-identical outputs.

pub mod basis;
pub mod design;
pub mod error;
pub mod games;
pub mod index;
pub mod lpsolve;
pub mod oracle;
pub mod poa;
pub mod rng;
pub mod witness;

pub use basis::{preset_mechanism, preset_welfare, Mechanism, WelfareBasis};
pub use design::{optimize_mechanism, rescale_mechanism, DesignResult};
pub use error::{Error, Result};
pub use games::{Allocation, GameInstance, SmoothnessReport};
pub use index::{enumerate_boundary_set, enumerate_index_set, IndexTriple};
pub use lpsolve::{solve_lp, LpProblem, LpSolution, LpStatus};
pub use oracle::{brute_force_poa, FamilySpec, OracleOutcome, OracleReport, SampleMode};
pub use poa::{poa, Method, PoaReport};
pub use witness::{build_worst_case, WitnessGame};
