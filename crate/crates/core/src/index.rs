//! Index triples classifying resources by their selector counts.
//!
//! A triple `(a, x, b)` describes one class of resources in a two-allocation
//! game: `x` agents hold the resource in both allocations, `a` further agents
//! hold it only in the first (equilibrium) allocation, and `b` only in the
//! second (optimum). The full index set over `n` agents and its boundary
//! subset drive every LP this crate builds, so their enumeration order is
//! fixed (lexicographic) to keep solver runs reproducible.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Selector counts `(a, x, b)`: equilibrium-only, shared, optimum-only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IndexTriple {
    pub a: usize,
    pub x: usize,
    pub b: usize,
}

impl IndexTriple {
    pub fn new(a: usize, x: usize, b: usize) -> Self {
        Self { a, x, b }
    }

    /// Total selector count `a + x + b`.
    pub fn sum(&self) -> usize {
        self.a + self.x + self.b
    }
}

impl std::fmt::Display for IndexTriple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.a, self.x, self.b)
    }
}

/// All triples of non-negative integers with `1 <= a + x + b <= n`, in
/// lexicographic order by `(a, x, b)`.
///
/// The cardinality is `(n+1)(n+2)(n+3)/6 - 1`: the count of lattice points
/// in the simplex `a + x + b <= n` minus the origin, which never contributes
/// to any constraint.
pub fn enumerate_index_set(n: usize) -> Result<Vec<IndexTriple>> {
    if n == 0 {
        return Err(Error::InvalidArgument("index set requires n >= 1".into()));
    }
    let mut triples = Vec::with_capacity((n + 1) * (n + 2) * (n + 3) / 6 - 1);
    for a in 0..=n {
        for x in 0..=n - a {
            for b in 0..=n - a - x {
                if a + x + b >= 1 {
                    triples.push(IndexTriple::new(a, x, b));
                }
            }
        }
    }
    Ok(triples)
}

/// The boundary subset: triples with `a*x*b = 0` or `a + x + b = n`, i.e.
/// the integer points on the four planes bounding the index set. Cardinality
/// `2n^2 + 1`; same lexicographic order as [`enumerate_index_set`].
pub fn enumerate_boundary_set(n: usize) -> Result<Vec<IndexTriple>> {
    Ok(enumerate_index_set(n)?
        .into_iter()
        .filter(|t| t.a * t.x * t.b == 0 || t.sum() == n)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero_n() {
        assert!(enumerate_index_set(0).is_err());
        assert!(enumerate_boundary_set(0).is_err());
    }

    #[test]
    fn n1_is_the_three_unit_triples() {
        let idx = enumerate_index_set(1).unwrap();
        assert_eq!(
            idx,
            vec![
                IndexTriple::new(0, 0, 1),
                IndexTriple::new(0, 1, 0),
                IndexTriple::new(1, 0, 0),
            ]
        );
        // Every triple lies on a coordinate plane, so the boundary is all of it.
        assert_eq!(enumerate_boundary_set(1).unwrap(), idx);
    }

    #[test]
    fn cardinalities_match_closed_forms() {
        for n in 1..=12 {
            let full = enumerate_index_set(n).unwrap();
            let boundary = enumerate_boundary_set(n).unwrap();
            assert_eq!(full.len(), (n + 1) * (n + 2) * (n + 3) / 6 - 1, "n={n}");
            assert_eq!(boundary.len(), 2 * n * n + 1, "n={n}");
        }
        assert_eq!(enumerate_index_set(2).unwrap().len(), 9);
        assert_eq!(enumerate_index_set(4).unwrap().len(), 34);
        assert_eq!(enumerate_boundary_set(3).unwrap().len(), 19);
        assert_eq!(enumerate_boundary_set(4).unwrap().len(), 33);
    }

    #[test]
    fn boundary_is_subset_and_n3_is_everything() {
        for n in 1..=12 {
            let full = enumerate_index_set(n).unwrap();
            let boundary = enumerate_boundary_set(n).unwrap();
            for t in &boundary {
                assert!(full.contains(t));
            }
        }
        // For n = 3 the only interior candidate (1,1,1) has sum 3 = n, so
        // the boundary set coincides with the full set.
        assert_eq!(
            enumerate_boundary_set(3).unwrap(),
            enumerate_index_set(3).unwrap()
        );
        // For n = 4 exactly the single interior point (1,1,1) is dropped.
        let full: Vec<_> = enumerate_index_set(4).unwrap();
        let boundary = enumerate_boundary_set(4).unwrap();
        let dropped: Vec<_> = full
            .iter()
            .filter(|t| !boundary.contains(t))
            .copied()
            .collect();
        assert_eq!(dropped, vec![IndexTriple::new(1, 1, 1)]);
    }

    #[test]
    fn enumeration_is_lexicographic_and_duplicate_free() {
        for n in [1, 2, 5, 8] {
            let idx = enumerate_index_set(n).unwrap();
            for pair in idx.windows(2) {
                assert!(pair[0] < pair[1]);
            }
        }
    }
}
