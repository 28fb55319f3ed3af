//! Flag types, ladder diagrams, positive paths and Plücker index sets.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Step sequence `0 < n_1 < ... < n_r < n` of a partial flag manifold.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FlagType {
    n: usize,
    steps: Vec<usize>,
}

impl FlagType {
    pub fn new(steps: Vec<usize>, n: usize) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::InvalidFlag("at least one step is required".into()));
        }
        let mut prev = 0;
        for &s in &steps {
            if s <= prev || s >= n {
                return Err(Error::InvalidFlag(format!("steps {steps:?} must be strictly increasing inside (0, {n})")));
            }
            prev = s;
        }
        Ok(FlagType { n, steps })
    }

    /// Full flag manifold `F(1, ..., n-1, n)`.
    pub fn full(n: usize) -> Result<Self> {
        FlagType::new((1..n).collect(), n)
    }

    pub fn grassmannian(k: usize, n: usize) -> Result<Self> {
        FlagType::new(vec![k], n)
    }

    /// Reads the flag off the block structure of a weakly decreasing vector.
    pub fn from_blocks<T: PartialEq>(lambda: &[T]) -> Result<Self> {
        let n = lambda.len();
        let steps: Vec<usize> = (1..n).filter(|&i| lambda[i] != lambda[i - 1]).collect();
        FlagType::new(steps, n)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn steps(&self) -> &[usize] {
        &self.steps
    }

    /// Number of proper steps `r`.
    pub fn r(&self) -> usize {
        self.steps.len()
    }

    /// `[0, n_1, ..., n_r, n]`.
    pub fn bounds(&self) -> Vec<usize> {
        let mut b = Vec::with_capacity(self.steps.len() + 2);
        b.push(0);
        b.extend_from_slice(&self.steps);
        b.push(self.n);
        b
    }

    /// Block sizes `k_1, ..., k_{r+1}`.
    pub fn block_sizes(&self) -> Vec<usize> {
        self.bounds().windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Zero-based block containing the one-based position `pos`.
    pub fn block_of(&self, pos: usize) -> usize {
        self.steps.iter().filter(|&&s| s < pos).count()
    }

    pub fn is_full(&self) -> bool {
        self.steps.len() + 1 == self.n
    }

    /// Whether pattern entry `λ^{(k)}_i` lies in a diagonal square and is
    /// therefore forced to equal `λ_i`.
    pub fn is_pinned(&self, k: usize, i: usize) -> bool {
        self.block_of(i) == self.block_of(i + self.n - k)
    }
}

impl fmt::Display for FlagType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let steps: Vec<String> = self.steps.iter().map(|s| s.to_string()).collect();
        write!(f, "{}|{}", steps.join(","), self.n)
    }
}

impl FromStr for FlagType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidFlag(format!("expected \"n1,...,nr|n\", got {s:?}"));
        let (steps, n) = s.split_once('|').ok_or_else(bad)?;
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        let steps =
            steps.split(',').map(|t| t.trim().parse::<usize>().map_err(|_| bad())).collect::<Result<Vec<_>>>()?;
        FlagType::new(steps, n)
    }
}

impl Serialize for FlagType {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for FlagType {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Complex dimension `Σ (n_i - n_{i-1})(n - n_i)`.
pub fn dimension(flag: &FlagType) -> usize {
    let b = flag.bounds();
    (1..b.len() - 1).map(|i| (b[i] - b[i - 1]) * (flag.n - b[i])).sum()
}

/// Position `(k, i)` of a pattern entry `λ^{(k)}_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LadderBox {
    pub k: usize,
    pub i: usize,
}

impl LadderBox {
    /// Grid cell `(column, row)` counted from the lower left corner, both zero-based.
    pub fn cell(&self) -> (usize, usize) {
        (self.i - 1, self.k - self.i)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LadderDiagram {
    pub flag: FlagType,
    pub boxes: Vec<LadderBox>,
    /// Corners `O_0, ..., O_r` as `(x, y)` lattice points.
    pub corners: Vec<(usize, usize)>,
}

/// Unpinned pattern entries, top row first, left to right within a row.
pub fn free_boxes(flag: &FlagType) -> Vec<LadderBox> {
    let n = flag.n;
    let mut out = Vec::new();
    for k in (1..n).rev() {
        for i in 1..=k {
            if !flag.is_pinned(k, i) {
                out.push(LadderBox { k, i });
            }
        }
    }
    out
}

pub fn ladder_diagram(flag: &FlagType) -> LadderDiagram {
    let n = flag.n;
    let corners = flag.bounds()[..flag.r() + 1].iter().map(|&nl| (nl, n - nl)).collect();
    LadderDiagram { flag: flag.clone(), boxes: free_boxes(flag), corners }
}

/// Strictly increasing subset of `{1, ..., n}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new(elements: Vec<usize>) -> Result<Self> {
        if elements.windows(2).any(|w| w[0] >= w[1]) || elements.first() == Some(&0) {
            return Err(Error::InvalidIndexSet(format!("{elements:?} is not strictly increasing and positive")));
        }
        Ok(IndexSet(elements))
    }

    pub fn elements(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    /// Horizontal/vertical step sequence of the associated positive path;
    /// `true` marks a horizontal step.
    pub fn path_steps(&self, n: usize) -> Vec<bool> {
        (1..=n).map(|s| self.contains(s)).collect()
    }

    /// Lattice point reached by the path, starting from `O_0 = (0, 0)`.
    pub fn path_endpoint(&self, n: usize) -> (usize, usize) {
        (self.len(), n - self.len())
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "{{{}}}", s.join(","))
    }
}

/// Sorts an index list and returns the sign of the sorting permutation, or
/// `None` when the list repeats an index (the Plücker coordinate vanishes).
pub fn permutation_sign(indices: &[usize]) -> Option<(i32, IndexSet)> {
    let mut v = indices.to_vec();
    let mut sign = 1;
    for a in 1..v.len() {
        let mut b = a;
        while b > 0 && v[b - 1] > v[b] {
            v.swap(b - 1, b);
            sign = -sign;
            b -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    IndexSet::new(v).ok().map(|s| (sign, s))
}

/// All `n_k`-element subsets of `{1..n}` in lexicographic order; these are
/// the positive paths ending at the corner `O_k` (`k` is one-based).
pub fn positive_paths(flag: &FlagType, k: usize) -> Result<Vec<IndexSet>> {
    if k == 0 || k > flag.r() {
        return Err(Error::OutOfRange(format!("step index {k} not in 1..={}", flag.r())));
    }
    Ok(subsets(flag.n, flag.steps[k - 1]))
}

pub fn subsets(n: usize, size: usize) -> Vec<IndexSet> {
    let mut out: Vec<IndexSet> = (0u64..1 << n)
        .filter(|m| m.count_ones() as usize == size)
        .map(|m| IndexSet((1..=n).filter(|&b| m >> (b - 1) & 1 == 1).collect()))
        .collect();
    out.sort();
    out
}

/// Meet and join of two index sets; the shorter set is taken as `I`.
pub fn meet_join(a: &IndexSet, b: &IndexSet) -> Result<(IndexSet, IndexSet)> {
    let (i, j) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let k = i.len();
    let mut meet: Vec<usize> = (0..k).map(|t| i.0[t].min(j.0[t])).collect();
    meet.extend_from_slice(&j.0[k..]);
    let join: Vec<usize> = (0..k).map(|t| i.0[t].max(j.0[t])).collect();
    Ok((IndexSet::new(meet)?, IndexSet::new(join)?))
}

/// Weight of the anti-canonical bundle: `n - n_{l-1} - n_l` on block `l`.
pub fn anticanonical_lambda(flag: &FlagType) -> Vec<i64> {
    let b = flag.bounds();
    let n = flag.n as i64;
    let mut out = Vec::with_capacity(flag.n);
    for l in 1..b.len() {
        let value = n - b[l - 1] as i64 - b[l] as i64;
        out.extend(std::iter::repeat_n(value, b[l] - b[l - 1]));
    }
    out
}

/// Every flag type with `2 <= n <= max_n`.
pub fn all_flags(max_n: usize) -> Vec<FlagType> {
    let mut out = Vec::new();
    for n in 2..=max_n {
        for mask in 1u64..1 << (n - 1) {
            let steps = (1..n).filter(|&s| mask >> (s - 1) & 1 == 1).collect();
            out.push(FlagType::new(steps, n).expect("valid by construction"));
        }
    }
    out
}
