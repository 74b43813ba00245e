//! Welfare bases, utility mechanisms, and the named presets.
//!
//! A welfare basis `w` scales a resource's value by how many agents select
//! it: the resource contributes `v_r * w(j)` to the system welfare when `j`
//! agents hold it. A mechanism `f` plays the same role for agent utilities:
//! each agent on the resource receives `v_r * f(j)`. Both are stored as
//! plain vectors over `j = 1..=n`; the extremum points `j = 0` and
//! `j = n + 1` are fixed at zero by the accessors and never stored, so LP
//! builders can index one past either end without special cases.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-resource welfare shape `w(1..=n)`, strictly positive entries.
#[derive(Debug, Clone, PartialEq)]
pub struct WelfareBasis {
    values: Vec<f64>,
}

/// Per-resource utility shape `f(1..=n)`; entries may be any real number.
#[derive(Debug, Clone, PartialEq)]
pub struct Mechanism {
    values: Vec<f64>,
}

impl WelfareBasis {
    /// Builds a basis from `w(1..=n)`. Every entry must be finite and `> 0`.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument(
                "welfare basis must have at least one entry".into(),
            ));
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "welfare basis entry w({}) = {} must be finite and > 0",
                    i + 1,
                    v
                )));
            }
        }
        Ok(Self { values })
    }

    /// Number of stored entries (the maximum supported agent count).
    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// `w(j)` with the zero-padding convention: 0 for `j = 0` or `j > n`.
    pub fn at(&self, j: usize) -> f64 {
        if j == 0 || j > self.values.len() {
            0.0
        } else {
            self.values[j - 1]
        }
    }

    /// The stored entries `w(1..=n)`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Constant basis `w(j) = 1`: each covered resource counts once,
    /// regardless of how many agents sit on it.
    pub fn covering(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be >= 1".into()));
        }
        Self::new(vec![1.0; n])
    }

    /// Probabilistic coverage basis `w(j) = 1 - (1-p)^j` for `p` in (0, 1].
    ///
    /// `p = 1` reduces exactly to [`WelfareBasis::covering`].
    pub fn coverage(p: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be >= 1".into()));
        }
        if !p.is_finite() || p <= 0.0 || p > 1.0 {
            return Err(Error::InvalidArgument(format!(
                "coverage success probability p = {p} must lie in (0, 1]"
            )));
        }
        Self::new((1..=n).map(|j| 1.0 - (1.0 - p).powi(j as i32)).collect())
    }
}

impl Mechanism {
    /// Builds a mechanism from `f(1..=n)`. Entries must be finite; any sign
    /// is allowed (`f(1) <= 0` is representable and maps to PoA = 0).
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument(
                "mechanism must have at least one entry".into(),
            ));
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "mechanism entry f({}) = {} must be finite",
                    i + 1,
                    v
                )));
            }
        }
        Ok(Self { values })
    }

    /// Number of stored entries.
    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// `f(j)` with the zero-padding convention: 0 for `j = 0` or `j > n`.
    pub fn at(&self, j: usize) -> f64 {
        if j == 0 || j > self.values.len() {
            0.0
        } else {
            self.values[j - 1]
        }
    }

    /// The stored entries `f(1..=n)`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Budget-balanced equal share `f(j) = w(j) / j`: agents on a resource
    /// split its welfare evenly, so `sum_i U_i(a) = W(a)` on every allocation.
    pub fn equal_share(w: &WelfareBasis) -> Self {
        Self {
            values: w
                .values
                .iter()
                .enumerate()
                .map(|(i, &wj)| wj / (i + 1) as f64)
                .collect(),
        }
    }

    /// Marginal contribution `f(j) = w(j) - w(j-1)`: each agent receives the
    /// welfare increase caused by its own presence.
    pub fn marginal_contribution(w: &WelfareBasis) -> Self {
        Self {
            values: (1..=w.n()).map(|j| w.at(j) - w.at(j - 1)).collect(),
        }
    }

    /// Multiplies every entry by `alpha > 0`. Scaling leaves the price of
    /// anarchy unchanged, so this is a free normalization.
    pub fn rescale(&self, alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "scaling factor alpha = {alpha} must be finite and > 0"
            )));
        }
        Ok(Self {
            values: self.values.iter().map(|v| alpha * v).collect(),
        })
    }

    /// The covering-optimal mechanism
    /// `f(j) = (j-1)!/(e-1) * (e - sum_{i<j} 1/i!)`.
    ///
    /// Evaluated through the equivalent convergent series
    /// `f(j) = 1/(e-1) * sum_{k>=0} 1 / (j (j+1) ... (j+k))`,
    /// which avoids the catastrophic cancellation of the literal form for
    /// j of about 18 and up (there `e - sum_{i<j} 1/i!` shrinks below one
    /// ulp of `e` while the factorial factor grows without bound).
    pub fn gairing_covering(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be >= 1".into()));
        }
        let values = (1..=n)
            .map(|j| {
                let mut term = 1.0 / j as f64;
                let mut sum = term;
                let mut k = 1usize;
                while term > 1e-20 * sum {
                    term /= (j + k) as f64;
                    sum += term;
                    k += 1;
                }
                sum / (std::f64::consts::E - 1.0)
            })
            .collect();
        Ok(Self { values })
    }
}

/// Resolves a welfare-basis preset by name: `covering`, or `coverage`
/// (which requires `p` in (0, 1]).
pub fn preset_welfare(name: &str, p: Option<f64>, n: usize) -> Result<WelfareBasis> {
    match name {
        "covering" => WelfareBasis::covering(n),
        "coverage" => {
            let p = p.ok_or_else(|| {
                Error::InvalidArgument("coverage preset requires a probability p".into())
            })?;
            WelfareBasis::coverage(p, n)
        }
        other => Err(Error::InvalidArgument(format!(
            "unknown welfare preset '{other}' (expected covering or coverage)"
        ))),
    }
}

/// Resolves a mechanism preset by name.
///
/// `equal_share`/`es` and `marginal_contribution`/`mc` derive from the
/// supplied basis; `mc` accepts a probability `p` instead, in which case it
/// is taken over the coverage basis (giving `f(j) = p (1-p)^{j-1}`).
/// `gairing_covering`/`gairing` is defined by its closed form alone.
pub fn preset_mechanism(
    name: &str,
    w: Option<&WelfareBasis>,
    p: Option<f64>,
    n: usize,
) -> Result<Mechanism> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    let basis_for = |label: &str| -> Result<WelfareBasis> {
        match w {
            Some(w) if w.n() >= n => WelfareBasis::new(w.values()[..n].to_vec()),
            Some(w) => Err(Error::InvalidArgument(format!(
                "{label} needs a basis of length >= {n}, got {}",
                w.n()
            ))),
            None => Err(Error::InvalidArgument(format!(
                "{label} preset requires a welfare basis"
            ))),
        }
    };
    match name {
        "equal_share" | "es" => Ok(Mechanism::equal_share(&basis_for("equal_share")?)),
        "marginal_contribution" | "mc" => match p {
            Some(p) => Ok(Mechanism::marginal_contribution(&WelfareBasis::coverage(
                p, n,
            )?)),
            None => Ok(Mechanism::marginal_contribution(&basis_for(
                "marginal_contribution",
            )?)),
        },
        "gairing_covering" | "gairing" => Mechanism::gairing_covering(n),
        other => Err(Error::InvalidArgument(format!(
            "unknown mechanism preset '{other}' \
             (expected equal_share, marginal_contribution, or gairing_covering)"
        ))),
    }
}

// JSON shape shared by both vectors: {"n": <int>, "values": [...]} with
// values.length == n; padding is never serialized.
#[derive(Serialize, Deserialize)]
struct VectorJson {
    n: usize,
    values: Vec<f64>,
}

impl Serialize for WelfareBasis {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        VectorJson {
            n: self.n(),
            values: self.values.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for WelfareBasis {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = VectorJson::deserialize(d)?;
        if raw.n != raw.values.len() {
            return Err(serde::de::Error::custom(format!(
                "welfare basis field n = {} does not match values.length = {}",
                raw.n,
                raw.values.len()
            )));
        }
        WelfareBasis::new(raw.values).map_err(serde::de::Error::custom)
    }
}

impl Serialize for Mechanism {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        VectorJson {
            n: self.n(),
            values: self.values.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Mechanism {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = VectorJson::deserialize(d)?;
        if raw.n != raw.values.len() {
            return Err(serde::de::Error::custom(format!(
                "mechanism field n = {} does not match values.length = {}",
                raw.n,
                raw.values.len()
            )));
        }
        Mechanism::new(raw.values).map_err(serde::de::Error::custom)
    }
}
