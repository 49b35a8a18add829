//! Bag-of-complete-subtree vectors and the L1 tree edit distance
//! approximation between them.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::hash::{ParamsId, SubtreeKey, SubtreeMultiset};

/// Sparse count vector over complete-subtree types, sorted by key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BocsVector {
    params: ParamsId,
    entries: Vec<(SubtreeKey, u32)>,
}

impl BocsVector {
    pub fn params(&self) -> ParamsId {
        self.params
    }

    pub fn entries(&self) -> &[(SubtreeKey, u32)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn mass(&self) -> u64 {
        self.entries.iter().map(|&(_, c)| c as u64).sum()
    }

    pub fn get(&self, key: &SubtreeKey) -> u32 {
        self.entries
            .binary_search_by(|(k, _)| k.cmp(key))
            .map_or(0, |i| self.entries[i].1)
    }

    /// Builds a vector from arbitrary `(key, count)` pairs; zero counts are
    /// dropped and repeated keys summed.
    pub fn from_counts<I>(params: ParamsId, counts: I) -> Self
    where
        I: IntoIterator<Item = (SubtreeKey, u32)>,
    {
        let mut entries: Vec<(SubtreeKey, u32)> = counts.into_iter().filter(|&(_, c)| c > 0).collect();
        entries.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        entries.dedup_by(|later, earlier| {
            if later.0 == earlier.0 {
                earlier.1 += later.1;
                true
            } else {
                false
            }
        });
        Self { params, entries }
    }
}

pub fn bocs_from_multiset(m: &SubtreeMultiset) -> BocsVector {
    BocsVector {
        params: m.params,
        // BTreeMap iteration is already in key order
        entries: m.counts.iter().map(|(k, &c)| (k.clone(), c)).collect(),
    }
}

/// `sum_key |b1[key] - b2[key]|` over the union of both key sets.
pub fn l1_ted(b1: &BocsVector, b2: &BocsVector) -> Result<u64> {
    if b1.params != b2.params {
        return Err(Error::ParamsMismatch);
    }
    Ok(l1_unchecked(&b1.entries, &b2.entries))
}

pub(crate) fn l1_unchecked(a: &[(SubtreeKey, u32)], b: &[(SubtreeKey, u32)]) -> u64 {
    let (mut i, mut j, mut d) = (0, 0, 0u64);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            Ordering::Less => {
                d += a[i].1 as u64;
                i += 1;
            }
            Ordering::Greater => {
                d += b[j].1 as u64;
                j += 1;
            }
            Ordering::Equal => {
                d += a[i].1.abs_diff(b[j].1) as u64;
                i += 1;
                j += 1;
            }
        }
    }
    d + a[i..].iter().map(|&(_, c)| c as u64).sum::<u64>() + b[j..].iter().map(|&(_, c)| c as u64).sum::<u64>()
}
