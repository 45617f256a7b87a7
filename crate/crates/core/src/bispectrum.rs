//! Bispectrum invariants on frequency-indexed coefficient spaces.
//!
//! A coefficient vector `{a_{k,q}}` carries the circle action
//! `z·a_{k,q} = z^k a_{k,q}`. The bispectrum collects the invariant cubic
//! monomials `a_{k1,q1} a_{k2,q2} conj(a_{k1+k2,q3})`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::embedding::Embedding;
use crate::error::{check_dim, Error, Result};
use crate::group::WeightedCircleAction;
use crate::point;

/// Frequencies `k` with multiplicities `p_k`, in storage order.
///
/// Coefficient vectors list `a_{k,1}..a_{k,p_k}` for each entry in order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(i64, usize)>", into = "Vec<(i64, usize)>")]
pub struct FrequencyProfile {
    entries: Vec<(i64, usize)>,
    offsets: BTreeMap<i64, usize>,
}

impl TryFrom<Vec<(i64, usize)>> for FrequencyProfile {
    type Error = Error;
    fn try_from(entries: Vec<(i64, usize)>) -> Result<Self> {
        FrequencyProfile::new(entries)
    }
}

impl From<FrequencyProfile> for Vec<(i64, usize)> {
    fn from(p: FrequencyProfile) -> Self {
        p.entries
    }
}

impl FrequencyProfile {
    pub fn new(entries: Vec<(i64, usize)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidConfig("frequency profile is empty".into()));
        }
        let mut offsets = BTreeMap::new();
        let mut offset = 0;
        for &(k, p) in &entries {
            if p == 0 {
                return Err(Error::InvalidConfig(format!("frequency {k} has zero multiplicity")));
            }
            if offsets.insert(k, offset).is_some() {
                return Err(Error::InvalidConfig(format!("frequency {k} listed twice")));
            }
            offset += p;
        }
        Ok(FrequencyProfile { entries, offsets })
    }

    /// Parses `"k:p,k:p,..."`.
    pub fn parse(s: &str) -> Result<Self> {
        let entries = s
            .split(',')
            .map(|item| {
                let (k, p) = item.trim().split_once(':').ok_or_else(|| Error::Parse(format!("expected k:p, got {item:?}")))?;
                let k = k.trim().parse::<i64>().map_err(|e| Error::Parse(format!("frequency {k:?}: {e}")))?;
                let p = p.trim().parse::<usize>().map_err(|e| Error::Parse(format!("multiplicity {p:?}: {e}")))?;
                Ok((k, p))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }

    pub fn entries(&self) -> &[(i64, usize)] {
        &self.entries
    }

    /// Total complex dimension `p = Σ p_k`.
    pub fn dim(&self) -> usize {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn multiplicity(&self, k: i64) -> usize {
        self.entries.iter().find(|e| e.0 == k).map_or(0, |e| e.1)
    }

    /// Position of `a_{k,q}` (1-based `q`) in a coefficient vector.
    pub fn position(&self, k: i64, q: usize) -> Option<usize> {
        let p = self.multiplicity(k);
        (q >= 1 && q <= p).then(|| self.offsets[&k] + q - 1)
    }

    /// One weight per coefficient: `k` repeated `p_k` times.
    pub fn weights(&self) -> Vec<i64> {
        self.entries.iter().flat_map(|&(k, p)| std::iter::repeat_n(k, p)).collect()
    }

    /// The weighted circle action on the coefficient space.
    pub fn induced_action(&self) -> Result<WeightedCircleAction> {
        WeightedCircleAction::new(self.weights())
    }
}

/// `((k1,q1),(k2,q2),(k1+k2,q3))` with resolved coefficient positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triple {
    pub k1: i64,
    pub q1: usize,
    pub k2: i64,
    pub q2: usize,
    pub q3: usize,
    pub pos: [usize; 3],
}

/// Admissible triples over ordered frequency pairs, in lexicographic order
/// of `(k1, q1, k2, q2, q3)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BispectrumIndex {
    profile: FrequencyProfile,
    triples: Vec<Triple>,
}

impl BispectrumIndex {
    pub fn new(profile: &FrequencyProfile) -> Self {
        let mut freqs: Vec<(i64, usize)> = profile.entries().to_vec();
        freqs.sort();
        let mut triples = Vec::new();
        for &(k1, p1) in &freqs {
            for q1 in 1..=p1 {
                for &(k2, p2) in &freqs {
                    let p3 = profile.multiplicity(k1 + k2);
                    for q2 in 1..=p2 {
                        for q3 in 1..=p3 {
                            let pos = [
                                profile.position(k1, q1).unwrap(),
                                profile.position(k2, q2).unwrap(),
                                profile.position(k1 + k2, q3).unwrap(),
                            ];
                            triples.push(Triple { k1, q1, k2, q2, q3, pos });
                        }
                    }
                }
            }
        }
        BispectrumIndex { profile: profile.clone(), triples }
    }

    pub fn profile(&self) -> &FrequencyProfile {
        &self.profile
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }
}

/// `Σ p_{k1} p_{k2} p_{k1+k2}` over ordered pairs with all three present.
pub fn index_size(profile: &FrequencyProfile) -> usize {
    let e = profile.entries();
    e.iter()
        .flat_map(|&(k1, p1)| e.iter().map(move |&(k2, p2)| p1 * p2 * profile.multiplicity(k1 + k2)))
        .sum()
}

pub fn bispectrum(index: &BispectrumIndex, a: &[Complex64]) -> Result<Vec<Complex64>> {
    check_dim(index.profile.dim(), a.len())?;
    Ok(index.triples.iter().map(|t| a[t.pos[0]] * a[t.pos[1]] * a[t.pos[2]].conj()).collect())
}

/// `a ↦ a / |a|^{2/3}` componentwise, with `0 ↦ 0`.
pub fn power_scale(a: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .map(|&v| {
            let r = v.norm();
            if r == 0.0 {
                v
            } else {
                v / r.powf(2.0 / 3.0)
            }
        })
        .collect()
}

pub fn scaled_bispectrum(index: &BispectrumIndex, a: &[Complex64]) -> Result<Vec<Complex64>> {
    check_dim(index.profile.dim(), a.len())?;
    bispectrum(index, &power_scale(a))
}

/// Bispectrum (optionally power-scaled) on interleaved real coordinates,
/// flattened to interleaved real output.
#[derive(Debug, Clone, PartialEq)]
pub struct BispectrumEmbedding {
    index: BispectrumIndex,
    scaled: bool,
}

impl BispectrumEmbedding {
    pub fn new(profile: &FrequencyProfile, scaled: bool) -> Self {
        BispectrumEmbedding { index: BispectrumIndex::new(profile), scaled }
    }

    pub fn index(&self) -> &BispectrumIndex {
        &self.index
    }

    pub fn is_scaled(&self) -> bool {
        self.scaled
    }
}

impl Embedding for BispectrumEmbedding {
    fn input_dim(&self) -> usize {
        2 * self.index.profile.dim()
    }

    fn output_dim(&self) -> usize {
        2 * self.index.len()
    }

    fn embed(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.input_dim(), x.len())?;
        let a = point::to_complex(x);
        let b = if self.scaled { scaled_bispectrum(&self.index, &a)? } else { bispectrum(&self.index, &a)? };
        Ok(point::from_complex(&b))
    }
}
