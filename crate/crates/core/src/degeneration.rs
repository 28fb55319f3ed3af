//! Toric degeneration of flag manifolds in stages: weighted Plücker
//! coordinates, relations of the family, the monomial embedding of the
//! special fiber, and the moment maps of the unitary and torus actions.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flagcombi::{free_boxes, meet_join, permutation_sign, subsets, FlagType, IndexSet, LadderBox};

type C = Complex64;

/// Weights `w_ij = 3^{i−j−1}` below the diagonal and the stage-wise split
/// `w̃_{k,ij}` used by the multi-parameter family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightMatrix {
    n: usize,
}

impl WeightMatrix {
    pub fn new(n: usize) -> Self {
        WeightMatrix { n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `w_ij`, one-based.
    pub fn w(&self, i: usize, j: usize) -> i64 {
        if i > j {
            3i64.pow((i - j - 1) as u32)
        } else {
            0
        }
    }

    /// `w̃_{k,ij}` for `k = 2..=n`.
    pub fn multi(&self, k: usize, i: usize, j: usize) -> i64 {
        if i < k {
            0
        } else {
            self.w(k, j) - self.w(k - 1, j)
        }
    }
}

fn perm_sign(p: &[usize]) -> f64 {
    let inversions =
        (0..p.len()).flat_map(|a| (a + 1..p.len()).map(move |b| (a, b))).filter(|&(a, b)| p[a] > p[b]).count();
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Leibniz terms of `det z_I` (rows `I`, columns `1..=|I|`): sign, the row
/// used in each column, and the product of entries.
fn leibniz_terms<'a>(z: &'a DMatrix<C>, rows: &'a [usize]) -> impl Iterator<Item = (Vec<usize>, C)> + 'a {
    let k = rows.len();
    (0..k).permutations(k).map(move |p| {
        let used: Vec<usize> = p.iter().map(|&r| rows[r]).collect();
        let prod = used.iter().enumerate().fold(C::new(perm_sign(&p), 0.0), |acc, (col, &r)| acc * z[(r - 1, col)]);
        (used, prod)
    })
}

/// Coefficients (by power of `t`) of `q_I(z, t) = t^{−tr w_I} det(t^{w_ij} z_ij)_I`.
pub fn deformed_plucker_poly(z: &DMatrix<C>, set: &IndexSet) -> Vec<C> {
    let w = WeightMatrix::new(z.nrows());
    let rows = set.elements();
    let base: i64 = rows.iter().enumerate().map(|(c, &r)| w.w(r, c + 1)).sum();
    let mut coeffs: Vec<C> = Vec::new();
    for (used, prod) in leibniz_terms(z, rows) {
        let e: i64 = used.iter().enumerate().map(|(c, &r)| w.w(r, c + 1)).sum::<i64>() - base;
        debug_assert!(e >= 0, "diagonal term has the lowest weight");
        let e = e as usize;
        if coeffs.len() <= e {
            coeffs.resize(e + 1, C::new(0.0, 0.0));
        }
        coeffs[e] += prod;
    }
    if coeffs.is_empty() {
        coeffs.push(C::new(1.0, 0.0));
    }
    coeffs
}

pub fn deformed_plucker(z: &DMatrix<C>, set: &IndexSet, t: C) -> C {
    deformed_plucker_poly(z, set).iter().rev().fold(C::new(0.0, 0.0), |acc, c| acc * t + c)
}

/// `q̃_I(z, t_2, ..., t_n)`; `ts[0]` is `t_2`. Zero parameters are handled
/// term by term with `0^0 = 1`.
pub fn multi_deformed_plucker(z: &DMatrix<C>, set: &IndexSet, ts: &[C]) -> Result<C> {
    let n = z.nrows();
    if ts.len() + 1 != n {
        return Err(Error::DimensionMismatch { expected: n - 1, got: ts.len() });
    }
    let w = WeightMatrix::new(n);
    let rows = set.elements();
    let exponents = |used: &[usize]| -> Vec<i64> {
        (2..=n).map(|k| used.iter().enumerate().map(|(c, &r)| w.multi(k, r, c + 1)).sum()).collect()
    };
    let base = exponents(rows);
    let mut total = C::new(0.0, 0.0);
    for (used, prod) in leibniz_terms(z, rows) {
        let e = exponents(&used);
        let mut factor = C::new(1.0, 0.0);
        for (k, (&ek, &bk)) in e.iter().zip(&base).enumerate() {
            let d = ek - bk;
            debug_assert!(d >= 0);
            if d > 0 {
                factor *= ts[k].powi(d as i32);
            }
        }
        total += prod * factor;
    }
    Ok(total)
}

/// `d_I(z) = z_{i_1 1} ··· z_{i_k k}`.
pub fn diagonal_monomial(z: &DMatrix<C>, set: &IndexSet) -> C {
    set.elements().iter().enumerate().fold(C::new(1.0, 0.0), |acc, (c, &r)| acc * z[(r - 1, c)])
}

/// One signed monomial `c · t^p · Z_{I_1} ··· Z_{I_m}` of a relation.
#[derive(Clone, Debug, PartialEq)]
pub struct RelationTerm {
    pub coeff: i64,
    pub t_power: u32,
    /// Index lists as written; unsorted lists pick up the permutation sign.
    pub factors: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Relation {
    pub terms: Vec<RelationTerm>,
}

impl FromStr for Relation {
    type Err = Error;

    /// Parses e.g. `"+Z[1]Z[2,3] -Z[2]Z[1,3] +t Z[3]Z[1,2]"`; `t^k` and integer
    /// coefficients are accepted.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::MalformedRelation(format!("{msg} in {s:?}"));
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pos = 0;
        let mut terms = Vec::new();
        let number = |pos: &mut usize| -> Option<u64> {
            let start = *pos;
            while *pos < chars.len() && chars[*pos].is_ascii_digit() {
                *pos += 1;
            }
            chars[start..*pos].iter().collect::<String>().parse().ok()
        };
        while pos < chars.len() {
            let mut sign = 1i64;
            match chars[pos] {
                '+' => pos += 1,
                '-' => {
                    sign = -1;
                    pos += 1
                }
                _ if terms.is_empty() => {}
                _ => return Err(bad("expected + or -")),
            }
            let coeff = match number(&mut pos) {
                Some(c) => sign * c as i64,
                None => sign,
            };
            if pos < chars.len() && chars[pos] == '*' {
                pos += 1;
            }
            let mut t_power = 0;
            if pos < chars.len() && chars[pos] == 't' {
                pos += 1;
                t_power = 1;
                if pos < chars.len() && chars[pos] == '^' {
                    pos += 1;
                    t_power = number(&mut pos).ok_or_else(|| bad("missing exponent"))? as u32;
                }
                if pos < chars.len() && chars[pos] == '*' {
                    pos += 1;
                }
            }
            let mut factors = Vec::new();
            while pos < chars.len() && chars[pos] == 'Z' {
                pos += 1;
                if chars.get(pos) != Some(&'[') {
                    return Err(bad("expected ["));
                }
                pos += 1;
                let mut idx = Vec::new();
                loop {
                    idx.push(number(&mut pos).ok_or_else(|| bad("expected index"))? as usize);
                    match chars.get(pos) {
                        Some(',') => pos += 1,
                        Some(']') => {
                            pos += 1;
                            break;
                        }
                        _ => return Err(bad("unterminated index list")),
                    }
                }
                factors.push(idx);
                if pos < chars.len() && chars[pos] == '*' {
                    pos += 1;
                }
            }
            if factors.is_empty() && t_power == 0 && pos < chars.len() && !matches!(chars[pos], '+' | '-') {
                return Err(bad("unexpected character"));
            }
            terms.push(RelationTerm { coeff, t_power, factors });
        }
        if terms.is_empty() {
            return Err(bad("empty relation"));
        }
        Ok(Relation { terms })
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, term) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", if term.coeff < 0 { '-' } else { '+' })?;
            if term.coeff.abs() != 1 {
                write!(f, "{}", term.coeff.abs())?;
            }
            match term.t_power {
                0 => {}
                1 => write!(f, "t ")?,
                p => write!(f, "t^{p} ")?,
            }
            for idx in &term.factors {
                write!(f, "Z[{}]", idx.iter().map(|i| i.to_string()).join(","))?;
            }
        }
        Ok(())
    }
}

impl Relation {
    fn validate(&self, flag: &FlagType) -> Result<()> {
        for term in &self.terms {
            for idx in &term.factors {
                if idx.iter().any(|&i| i == 0 || i > flag.n()) || !flag.steps().contains(&idx.len()) {
                    return Err(Error::MalformedRelation(format!("Z{idx:?} is not a coordinate of {flag}")));
                }
                if permutation_sign(idx).is_none() {
                    return Err(Error::MalformedRelation(format!("Z{idx:?} repeats an index")));
                }
            }
        }
        Ok(())
    }

    /// Value and the sum of absolute term values.
    pub fn evaluate(&self, t: C, coordinate: &dyn Fn(&IndexSet) -> C) -> (C, f64) {
        let mut total = C::new(0.0, 0.0);
        let mut scale = 0.0;
        for term in &self.terms {
            let mut v = C::new(term.coeff as f64, 0.0) * t.powu(term.t_power);
            for idx in &term.factors {
                let (s, set) = permutation_sign(idx).expect("validated");
                v *= coordinate(&set) * s as f64;
            }
            total += v;
            scale += v.norm();
        }
        (total, scale)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyReport {
    pub relation: String,
    pub samples: usize,
    pub max_abs_residual: f64,
    pub max_rel_residual: f64,
}

pub fn random_complex_matrix(n: usize, rng: &mut impl Rng) -> DMatrix<C> {
    DMatrix::from_fn(n, n, |_, _| C::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

/// Evaluates `relation` at `Z_I = q_I(z, t)` for seeded random `z` and `t`
/// (or the given fixed `t`).
pub fn verify_family_equation(
    flag: &FlagType,
    relation: &Relation,
    samples: usize,
    seed: u64,
    fixed_t: Option<C>,
) -> Result<FamilyReport> {
    relation.validate(flag)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report =
        FamilyReport { relation: relation.to_string(), samples, max_abs_residual: 0.0, max_rel_residual: 0.0 };
    for _ in 0..samples {
        let z = random_complex_matrix(flag.n(), &mut rng);
        let t =
            fixed_t.unwrap_or_else(|| C::from_polar(rng.random::<f64>(), rng.random::<f64>() * std::f64::consts::TAU));
        let (value, scale) = relation.evaluate(t, &|set| deformed_plucker(&z, set, t));
        report.max_abs_residual = report.max_abs_residual.max(value.norm());
        report.max_rel_residual = report.max_rel_residual.max(value.norm() / scale.max(f64::MIN_POSITIVE));
    }
    Ok(report)
}

/// Values `τ^{(k)}_i` on every pattern position below the top row; pinned
/// positions hold 1.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusPoint {
    flag: FlagType,
    values: BTreeMap<LadderBox, C>,
}

impl TorusPoint {
    /// `free` lists the values on the free boxes in the flag's default coordinate order.
    pub fn new(flag: &FlagType, free: &[C]) -> Result<Self> {
        let boxes = free_boxes(flag);
        if boxes.len() != free.len() {
            return Err(Error::DimensionMismatch { expected: boxes.len(), got: free.len() });
        }
        if free.iter().any(|z| z.norm() == 0.0 || !z.is_finite()) {
            return Err(Error::OutOfRange("torus coordinates must be nonzero".into()));
        }
        let mut values = BTreeMap::new();
        for k in 1..flag.n() {
            for i in 1..=k {
                values.insert(LadderBox { k, i }, C::new(1.0, 0.0));
            }
        }
        for (b, &v) in boxes.iter().zip(free) {
            values.insert(*b, v);
        }
        Ok(TorusPoint { flag: flag.clone(), values })
    }

    pub fn random(flag: &FlagType, rng: &mut impl Rng) -> Self {
        let free: Vec<C> = (0..free_boxes(flag).len())
            .map(|_| {
                C::from_polar((rng.random::<f64>() * 2.0 - 1.0).exp(), rng.random::<f64>() * std::f64::consts::TAU)
            })
            .collect();
        TorusPoint::new(flag, &free).expect("nonzero by construction")
    }

    pub fn get(&self, k: usize, i: usize) -> C {
        self.values[&LadderBox { k, i }]
    }

    /// `d_I(τ) = ∏_j ∏_{k = i_j}^{n−1} τ^{(k)}_j`.
    pub fn monomial(&self, set: &IndexSet) -> C {
        let n = self.flag.n();
        set.elements()
            .iter()
            .enumerate()
            .flat_map(|(c, &r)| (r..n).map(move |k| (k, c + 1)))
            .fold(C::new(1.0, 0.0), |acc, (k, j)| acc * self.get(k, j))
    }
}

/// Exponents of `d_I(τ)` as a multiset of pattern positions.
pub fn monomial_exponents(n: usize, set: &IndexSet) -> BTreeMap<LadderBox, u32> {
    let mut e = BTreeMap::new();
    for (c, &r) in set.elements().iter().enumerate() {
        for k in r..n {
            *e.entry(LadderBox { k, i: c + 1 }).or_insert(0) += 1;
        }
    }
    e
}

fn add_exponents(a: &BTreeMap<LadderBox, u32>, b: &BTreeMap<LadderBox, u32>) -> BTreeMap<LadderBox, u32> {
    let mut out = a.clone();
    for (k, v) in b {
        *out.entry(*k).or_insert(0) += v;
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BinomialReport {
    pub pairs: usize,
    pub failures: Vec<(String, String)>,
}

/// Checks `d_I d_J = d_{I∧J} d_{I∨J}` as exponent multisets for all
/// coordinate pairs of the flag.
pub fn check_binomial_relations(flag: &FlagType) -> Result<BinomialReport> {
    let n = flag.n();
    let sets: Vec<IndexSet> = flag.steps().iter().flat_map(|&s| subsets(n, s)).collect();
    let mut report = BinomialReport::default();
    for a in &sets {
        for b in &sets {
            let (m, j) = meet_join(a, b)?;
            let lhs = add_exponents(&monomial_exponents(n, a), &monomial_exponents(n, b));
            let rhs = add_exponents(&monomial_exponents(n, &m), &monomial_exponents(n, &j));
            report.pairs += 1;
            if lhs != rhs {
                report.failures.push((a.to_string(), b.to_string()));
            }
        }
    }
    Ok(report)
}

/// Homogeneous coordinates `Z_I` for `|I| ∈ {n_1, ..., n_r}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PluckerPoint {
    flag: FlagType,
    values: BTreeMap<IndexSet, C>,
}

pub const NORMALIZATION_TOL: f64 = 1e-12;

impl PluckerPoint {
    /// Rescales each block of coordinates to unit norm.
    pub fn new(flag: &FlagType, values: BTreeMap<IndexSet, C>) -> Result<Self> {
        let mut p = PluckerPoint::unnormalized(flag, values)?;
        for &s in flag.steps() {
            let norm = p.block_norm_sqr(s).sqrt();
            if norm == 0.0 {
                return Err(Error::Unnormalized { size: s, norm: 0.0 });
            }
            for (k, v) in p.values.iter_mut() {
                if k.len() == s {
                    *v /= norm;
                }
            }
        }
        Ok(p)
    }

    /// Stores the coordinates as given.
    pub fn unnormalized(flag: &FlagType, values: BTreeMap<IndexSet, C>) -> Result<Self> {
        let mut full = BTreeMap::new();
        for &s in flag.steps() {
            for set in subsets(flag.n(), s) {
                full.insert(set, C::new(0.0, 0.0));
            }
        }
        for (k, v) in values {
            match full.get_mut(&k) {
                Some(slot) => *slot = v,
                None => return Err(Error::InvalidIndexSet(format!("{k} is not a coordinate of {flag}"))),
            }
        }
        Ok(PluckerPoint { flag: flag.clone(), values: full })
    }

    /// `Z_I = q_I(z, t)`.
    pub fn from_family(flag: &FlagType, z: &DMatrix<C>, t: C) -> Result<Self> {
        let values = flag.steps().iter().flat_map(|&s| subsets(flag.n(), s)).map(|set| {
            let v = deformed_plucker(z, &set, t);
            (set, v)
        });
        PluckerPoint::new(flag, values.collect())
    }

    /// Point of the stage fiber `X_{k,t}`: `Z_I = q̃_I(z, 1, ..., 1, t, 0, ..., 0)`
    /// with `t` in the slot of `t_k`, `2 <= k <= n`.
    pub fn from_stage(flag: &FlagType, z: &DMatrix<C>, k: usize, t: C) -> Result<Self> {
        let n = flag.n();
        if k < 2 || k > n {
            return Err(Error::OutOfRange(format!("stage {k} not in 2..={n}")));
        }
        let ts: Vec<C> = (2..=n)
            .map(|s| match s.cmp(&k) {
                std::cmp::Ordering::Less => C::new(1.0, 0.0),
                std::cmp::Ordering::Equal => t,
                std::cmp::Ordering::Greater => C::new(0.0, 0.0),
            })
            .collect();
        let mut values = BTreeMap::new();
        for &s in flag.steps() {
            for set in subsets(n, s) {
                let v = multi_deformed_plucker(z, &set, &ts)?;
                values.insert(set, v);
            }
        }
        PluckerPoint::new(flag, values)
    }

    /// `Z_I = d_I(τ)`.
    pub fn monomial_embedding(tau: &TorusPoint) -> Result<Self> {
        let flag = &tau.flag;
        let values = flag.steps().iter().flat_map(|&s| subsets(flag.n(), s)).map(|set| {
            let v = tau.monomial(&set);
            (set, v)
        });
        PluckerPoint::new(flag, values.collect())
    }

    pub fn flag(&self) -> &FlagType {
        &self.flag
    }

    pub fn get(&self, set: &IndexSet) -> C {
        self.values.get(set).copied().unwrap_or(C::new(0.0, 0.0))
    }

    /// `Z` at an arbitrary index list, with the permutation sign.
    pub fn signed(&self, indices: &[usize]) -> C {
        match permutation_sign(indices) {
            Some((s, set)) => self.get(&set) * s as f64,
            None => C::new(0.0, 0.0),
        }
    }

    pub fn block_norm_sqr(&self, size: usize) -> f64 {
        self.values.iter().filter(|(k, _)| k.len() == size).map(|(_, v)| v.norm_sqr()).sum()
    }

    pub fn values(&self) -> &BTreeMap<IndexSet, C> {
        &self.values
    }
}

fn block_weights(flag: &FlagType, lambda: &[f64]) -> Vec<(usize, f64)> {
    let b = flag.bounds();
    (1..=flag.r()).map(|k| (b[k], lambda[b[k] - 1] - lambda[b[k + 1] - 1])).collect()
}

/// Upper-left `m × m` block of the `U(n)` moment map.
pub fn moment_mu(z: &PluckerPoint, m: usize, lambda: &[f64]) -> Result<DMatrix<C>> {
    let flag = &z.flag;
    let n = flag.n();
    if m == 0 || m > n {
        return Err(Error::OutOfRange(format!("block size {m} not in 1..={n}")));
    }
    if lambda.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: lambda.len() });
    }
    for &s in flag.steps() {
        let norm = z.block_norm_sqr(s);
        if (norm - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Unnormalized { size: s, norm });
        }
    }
    let mut mu = DMatrix::from_diagonal_element(m, m, C::new(lambda[n - 1], 0.0));
    for (size, weight) in block_weights(flag, lambda) {
        for rest in subsets(n, size - 1) {
            let column: Vec<C> = (1..=m)
                .map(|i| {
                    let mut idx = vec![i];
                    idx.extend_from_slice(rest.elements());
                    z.signed(&idx)
                })
                .collect();
            for i in 0..m {
                for j in 0..m {
                    mu[(i, j)] += column[i] * column[j].conj() * weight;
                }
            }
        }
    }
    Ok(mu)
}

/// Moment map of `τ^{(m)}_j`: sums `|Z_I|²` over `I` whose `j`-th smallest element is at most `m`.
pub fn moment_nu(z: &PluckerPoint, m: usize, j: usize, lambda: &[f64]) -> Result<f64> {
    let flag = &z.flag;
    if lambda.len() != flag.n() {
        return Err(Error::DimensionMismatch { expected: flag.n(), got: lambda.len() });
    }
    if j == 0 || j > m || m >= flag.n() {
        return Err(Error::OutOfRange(format!("({m}, {j}) is not a pattern position")));
    }
    let mut total = lambda[flag.n() - 1];
    for (size, weight) in block_weights(flag, lambda) {
        let norm = z.block_norm_sqr(size);
        let hit: f64 = z
            .values
            .iter()
            .filter(|(k, _)| k.len() == size && k.elements().get(j - 1).is_some_and(|&x| x <= m))
            .map(|(_, v)| v.norm_sqr())
            .sum();
        total += weight * hit / norm;
    }
    Ok(total)
}
