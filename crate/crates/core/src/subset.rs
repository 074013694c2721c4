use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{BiError, Result};

/// Largest supported number of tensor factors.
pub const MAX_SITES: usize = 16;

/// Subset of the sites `1..=n`, stored as a bitmask (bit `i-1` for site `i`).
///
/// Elements are always visited in increasing order, which is the ordering the
/// subset realizations rely on.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetLabel(u32);

impl SubsetLabel {
    pub const EMPTY: SubsetLabel = SubsetLabel(0);

    pub fn from_bits(bits: u32) -> Self {
        SubsetLabel(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// `[n] = {1, ..., n}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_SITES);
        SubsetLabel(((1u64 << n) - 1) as u32)
    }

    /// `{1, ..., k}`.
    pub fn prefix(k: usize) -> Self {
        Self::full(k)
    }

    /// Builds a label from 1-based site numbers.
    pub fn from_sites(sites: &[usize]) -> Result<Self> {
        let mut bits = 0u32;
        for &s in sites {
            if s == 0 || s > MAX_SITES {
                return Err(BiError::Config(format!(
                    "site {s} outside 1..={MAX_SITES}"
                )));
            }
            bits |= 1 << (s - 1);
        }
        Ok(SubsetLabel(bits))
    }

    pub fn single(site: usize) -> Self {
        assert!((1..=MAX_SITES).contains(&site));
        SubsetLabel(1 << (site - 1))
    }

    /// 1-based sites in increasing order.
    pub fn sites(self) -> impl Iterator<Item = usize> {
        (0..MAX_SITES).filter(move |i| self.0 >> i & 1 == 1).map(|i| i + 1)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.sites().collect()
    }

    pub fn contains(self, site: usize) -> bool {
        (1..=MAX_SITES).contains(&site) && self.0 >> (site - 1) & 1 == 1
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Largest site, if any.
    pub fn max_site(self) -> Option<usize> {
        (self.0 != 0).then(|| 32 - self.0.leading_zeros() as usize)
    }

    pub fn union(self, other: Self) -> Self {
        SubsetLabel(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        SubsetLabel(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        SubsetLabel(self.0 & !other.0)
    }

    pub fn symmetric_difference(self, other: Self) -> Self {
        SubsetLabel(self.0 ^ other.0)
    }

    pub fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    /// Every subset of `[n]`, including the empty one, in increasing bitmask order.
    pub fn all(n: usize) -> impl Iterator<Item = SubsetLabel> {
        (0..(1u32 << n)).map(SubsetLabel)
    }

    pub fn all_nonempty(n: usize) -> impl Iterator<Item = SubsetLabel> {
        (1..(1u32 << n)).map(SubsetLabel)
    }
}

impl fmt::Display for SubsetLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, s) in self.sites().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for SubsetLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for SubsetLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_vec().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SubsetLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let sites = Vec::<usize>::deserialize(d)?;
        SubsetLabel::from_sites(&sites).map_err(serde::de::Error::custom)
    }
}
