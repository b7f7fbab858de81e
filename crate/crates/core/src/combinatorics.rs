//! Exact subset machinery: binomial coefficients with the zero convention,
//! lexicographic k-subset enumeration, and combination ranking.
//!
//! Everything here is integer-exact. Binomials use the convention
//! `C(n, k) = 0` whenever `n < 0`, `k < 0`, or `n < k`, which the rate and
//! bound formulas rely on at boundary replication factors.

use std::fmt;

use crate::{Error, Result};

/// A set of cache indices, stored strictly increasing.
///
/// Equality is set equality. The derived ordering is lexicographic on the
/// sorted element lists, matching the enumeration order of [`k_subsets`],
/// so "the i-th user" is simply the i-th element of that enumeration.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct IndexSet(Vec<u8>);

impl IndexSet {
    /// Builds a set from arbitrary elements; duplicates collapse.
    pub fn new(elements: impl IntoIterator<Item = u8>) -> Self {
        let mut v: Vec<u8> = elements.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        IndexSet(v)
    }

    pub fn empty() -> Self {
        IndexSet(Vec::new())
    }

    pub fn singleton(e: u8) -> Self {
        IndexSet(vec![e])
    }

    /// The interval `[lo, hi]`, empty when `hi < lo`.
    pub fn range(lo: u8, hi: u8) -> Self {
        IndexSet((lo..=hi).collect())
    }

    /// The full ground set `[1, lambda]`.
    pub fn universe(lambda: u8) -> Self {
        Self::range(1, lambda)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, e: u8) -> bool {
        self.0.binary_search(&e).is_ok()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        self.0.iter().copied()
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        IndexSet::new(self.iter().chain(other.iter()))
    }

    pub fn intersection(&self, other: &IndexSet) -> IndexSet {
        IndexSet(self.0.iter().copied().filter(|e| other.contains(*e)).collect())
    }

    pub fn difference(&self, other: &IndexSet) -> IndexSet {
        IndexSet(self.0.iter().copied().filter(|e| !other.contains(*e)).collect())
    }

    pub fn is_disjoint(&self, other: &IndexSet) -> bool {
        self.0.iter().all(|e| !other.contains(*e))
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.0.iter().all(|e| other.contains(*e))
    }
}

impl fmt::Display for IndexSet {
    /// Compact digit form: `{1,4}` prints as `14`. Elements above 9 are
    /// joined with dots to stay unambiguous.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|&e| e <= 9) {
            for e in &self.0 {
                write!(f, "{e}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
            write!(f, "{}", parts.join("."))
        }
    }
}

/// Binomial coefficient with the zero convention; errors on u64 overflow
/// instead of wrapping.
pub fn binom_checked(n: i64, k: i64) -> Result<u64> {
    if n < 0 || k < 0 || k > n {
        return Ok(0);
    }
    let (n, k) = (n as u128, k as u128);
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        // acc * (n-k+i) is always divisible by i at this point
        acc = acc
            .checked_mul(n - k + i)
            .ok_or_else(|| Error::Overflow(format!("binomial({n}, {k})")))?
            / i;
    }
    u64::try_from(acc).map_err(|_| Error::Overflow(format!("binomial({n}, {k})")))
}

/// Binomial coefficient with the zero convention.
///
/// Panics on overflow; use [`binom_checked`] to handle that case. All
/// in-scheme counts fit comfortably in u64.
pub fn binom(n: i64, k: i64) -> u64 {
    binom_checked(n, k).expect("binomial coefficient overflows u64")
}

/// All k-subsets of `ground` in lexicographic order.
///
/// `k = 0` yields the empty set alone; `k > |ground|` yields nothing.
pub fn k_subsets(ground: &IndexSet, k: usize) -> Vec<IndexSet> {
    let n = ground.len();
    if k > n {
        return Vec::new();
    }
    let elems = ground.as_slice();
    let mut out = Vec::with_capacity(binom(n as i64, k as i64) as usize);
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(IndexSet(idx.iter().map(|&i| elems[i]).collect()));
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < i + n - k {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// 1-based position of `subset` in the lexicographic enumeration of
/// `|subset|`-subsets of `ground`.
pub fn rank(subset: &IndexSet, ground: &IndexSet) -> Result<u64> {
    if !subset.is_subset(ground) {
        return Err(Error::Parameter(format!(
            "rank: {subset} is not a subset of {ground}"
        )));
    }
    let n = ground.len() as i64;
    let k = subset.len() as i64;
    let positions: Vec<i64> = subset
        .iter()
        .map(|e| ground.as_slice().iter().position(|&g| g == e).unwrap() as i64)
        .collect();
    let mut r: u64 = 1;
    for (i, &p) in positions.iter().enumerate() {
        let start = if i == 0 { 0 } else { positions[i - 1] + 1 };
        for j in start..p {
            r += binom(n - j - 1, k - i as i64 - 1);
        }
    }
    Ok(r)
}

/// Inverse of [`rank`]: the subset at 1-based position `position` among
/// the k-subsets of `ground`.
pub fn unrank(position: u64, ground: &IndexSet, k: usize) -> Result<IndexSet> {
    let n = ground.len();
    let total = binom(n as i64, k as i64);
    if position == 0 || position > total {
        return Err(Error::Parameter(format!(
            "unrank: position {position} outside [1, {total}] for {k}-subsets of {ground}"
        )));
    }
    let mut remaining = position - 1;
    let mut out = Vec::with_capacity(k);
    let mut next = 0usize;
    for i in 0..k {
        let mut c = next;
        loop {
            let count = binom((n - c - 1) as i64, (k - i - 1) as i64);
            if count <= remaining {
                remaining -= count;
                c += 1;
            } else {
                out.push(ground.as_slice()[c]);
                next = c + 1;
                break;
            }
        }
    }
    Ok(IndexSet(out))
}
