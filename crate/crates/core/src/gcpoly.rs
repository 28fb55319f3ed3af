//! Gelfand-Cetlin polytopes in exact rational arithmetic.

use std::collections::HashSet;

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{self, Bits};
use crate::flagcombi::{free_boxes, FlagType, LadderBox};
use crate::rational::{self, Q};
use crate::volume::{polytope_volume, VPolytope};

/// What sits at a pattern position once λ is fixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Entry {
    /// Index into the coordinate vector `u`.
    Coord(usize),
    /// Forced to `λ_j` (one-based `j`).
    Fixed(usize),
}

/// Triangular array `λ^{(k)}_i`, rows `k = 1..=n`, with the top row equal to λ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GCPattern {
    rows: Vec<Vec<Q>>,
}

impl GCPattern {
    pub fn from_rows(rows: Vec<Vec<Q>>) -> Result<Self> {
        for (k, row) in rows.iter().enumerate() {
            if row.len() != k + 1 {
                return Err(Error::DimensionMismatch { expected: k + 1, got: row.len() });
            }
        }
        Ok(GCPattern { rows })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, k: usize, i: usize) -> &Q {
        &self.rows[k - 1][i - 1]
    }

    pub fn row(&self, k: usize) -> &[Q] {
        &self.rows[k - 1]
    }

    /// First position `(k, i)` where interlacing fails.
    pub fn interlacing_violation(&self) -> Option<(usize, usize)> {
        for k in 1..self.n() {
            for i in 1..=k {
                let x = self.get(k, i);
                if self.get(k + 1, i) < x || x < self.get(k + 1, i + 1) {
                    return Some((k, i));
                }
            }
        }
        None
    }

    /// Every entry is tied to a top-row value through a chain of equalities
    /// between adjacent entries.
    pub fn is_equality_connected(&self) -> bool {
        let n = self.n();
        let id = |k: usize, i: usize| k * (k - 1) / 2 + i - 1;
        let mut uf = UnionFind::new(n * (n + 1) / 2);
        for k in 1..n {
            for i in 1..=k {
                if self.get(k, i) == self.get(k + 1, i) {
                    uf.union(id(k, i), id(k + 1, i));
                }
                if self.get(k, i) == self.get(k + 1, i + 1) {
                    uf.union(id(k, i), id(k + 1, i + 1));
                }
            }
        }
        let tops: HashSet<usize> = (1..=n).map(|i| uf.find(id(n, i))).collect();
        (1..n).all(|k| (1..=k).all(|i| tops.contains(&uf.find(id(k, i)))))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Facet {
    /// Primitive inward normal.
    pub v: Vec<i64>,
    pub tau: Q,
    /// The larger entry of the adjacent pair the inequality came from.
    pub upper: LadderBox,
    pub lower: LadderBox,
    /// `τ = sign · λ_index` when one side of the pair is a fixed entry.
    pub lambda_ref: Option<(i32, usize)>,
}

impl Facet {
    /// `ℓ(u) = ⟨v, u⟩ − τ`.
    pub fn eval(&self, u: &[Q]) -> Q {
        dot(&self.v, u) - &self.tau
    }

    pub fn eval_f64(&self, u: &[f64]) -> f64 {
        self.v.iter().zip(u).map(|(&a, b)| a as f64 * b).sum::<f64>() - rational::to_f64(&self.tau)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub point: Vec<Q>,
    /// Indices of the facets through the vertex, ascending.
    pub active: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct GCPolytope {
    pub flag: FlagType,
    pub lambda: Vec<Q>,
    pub coords: Vec<LadderBox>,
    pub facets: Vec<Facet>,
    vertices: Vec<Vertex>,
}

fn dot(v: &[i64], u: &[Q]) -> Q {
    v.iter().zip(u).filter(|(&a, _)| a != 0).map(|(&a, x)| Q::from_integer(a.into()) * x).sum()
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        self.0[x] = r;
        r
    }

    /// Returns false when `a` and `b` were already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra] = rb;
        true
    }
}

fn check_lambda(flag: &FlagType, lambda: &[Q]) -> Result<()> {
    if lambda.len() != flag.n() {
        return Err(Error::DimensionMismatch { expected: flag.n(), got: lambda.len() });
    }
    for i in 1..flag.n() {
        let same_block = flag.block_of(i) == flag.block_of(i + 1);
        let (a, b) = (&lambda[i - 1], &lambda[i]);
        if same_block && a != b {
            return Err(Error::InvalidLambda(format!("λ_{i} and λ_{} share a block but differ", i + 1)));
        }
        if !same_block && a <= b {
            return Err(Error::InvalidLambda(format!("λ must strictly decrease across the block boundary at {i}")));
        }
    }
    Ok(())
}

pub fn build_polytope(flag: &FlagType, lambda: &[Q]) -> Result<GCPolytope> {
    build_polytope_with_coords(flag, lambda, free_boxes(flag))
}

/// Builds Δ_λ with the coordinate order given by `coords`, which must list
/// each free pattern position exactly once.
pub fn build_polytope_with_coords(flag: &FlagType, lambda: &[Q], coords: Vec<LadderBox>) -> Result<GCPolytope> {
    check_lambda(flag, lambda)?;
    let mut expected = free_boxes(flag);
    let mut given = coords.clone();
    expected.sort();
    given.sort();
    if expected != given {
        return Err(Error::InvalidFlag(format!("coordinate boxes {coords:?} do not match the ladder diagram")));
    }
    let mut poly =
        GCPolytope { flag: flag.clone(), lambda: lambda.to_vec(), coords, facets: Vec::new(), vertices: Vec::new() };
    let candidates = poly.candidate_inequalities();
    let candidate_vertices = poly.enumerate_vertices(&candidates);

    let dim = poly.dim();
    let facets: Vec<Facet> = candidates
        .into_iter()
        .filter(|f| {
            let on: Vec<&Vec<Q>> = candidate_vertices.iter().filter(|p| f.eval(p).is_zero()).collect();
            affine_dim(&on, dim) + 1 == dim as i64
        })
        .collect();
    poly.facets = facets;
    poly.vertices = candidate_vertices
        .into_iter()
        .map(|point| {
            let active = poly.active_facets(&point);
            Vertex { point, active }
        })
        .collect();
    Ok(poly)
}

fn affine_dim(points: &[&Vec<Q>], dim: usize) -> i64 {
    let Some(first) = points.first() else {
        return -1;
    };
    let mut rows: Vec<Vec<Q>> =
        points[1..].iter().map(|p| p.iter().zip(first.iter()).map(|(a, b)| a - b).collect()).collect();
    let mut rank = 0;
    for col in 0..dim {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank][col].clone();
        for r in rank + 1..rows.len() {
            if !rows[r][col].is_zero() {
                let f = &rows[r][col] / &pivot;
                for c in col..dim {
                    let d = &f * &rows[rank][c];
                    rows[r][c] -= d;
                }
            }
        }
        rank += 1;
    }
    rank as i64
}

impl GCPolytope {
    /// Real dimension `N`.
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn n(&self) -> usize {
        self.flag.n()
    }

    pub fn entry(&self, k: usize, i: usize) -> Entry {
        if k == self.n() || self.flag.is_pinned(k, i) {
            Entry::Fixed(i)
        } else {
            let b = LadderBox { k, i };
            Entry::Coord(self.coords.iter().position(|&c| c == b).expect("free box has a coordinate"))
        }
    }

    fn value<'a>(&'a self, e: Entry, u: &'a [Q]) -> &'a Q {
        match e {
            Entry::Coord(c) => &u[c],
            Entry::Fixed(j) => &self.lambda[j - 1],
        }
    }

    pub fn pattern(&self, u: &[Q]) -> Result<GCPattern> {
        self.check_len(u.len())?;
        let n = self.n();
        let rows = (1..=n).map(|k| (1..=k).map(|i| self.value(self.entry(k, i), u).clone()).collect()).collect();
        GCPattern::from_rows(rows)
    }

    /// Coordinates of a pattern; pinned and top-row entries are ignored.
    pub fn point_of(&self, pattern: &GCPattern) -> Vec<Q> {
        self.coords.iter().map(|b| pattern.get(b.k, b.i).clone()).collect()
    }

    /// Blocks-to-λ index of the first entry of the block containing `j`;
    /// this is the label used for `Q_j = T^{λ_j}`.
    pub fn block_label(&self, j: usize) -> usize {
        self.flag.bounds()[self.flag.block_of(j)] + 1
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: len });
        }
        Ok(())
    }

    /// One inequality per adjacent pair, fixed-fixed pairs dropped, duplicates merged.
    fn candidate_inequalities(&self) -> Vec<Facet> {
        let n = self.n();
        let dim = self.dim();
        let mut out: Vec<Facet> = Vec::new();
        for k in (1..n).rev() {
            for i in 1..=k {
                let pairs = [
                    (LadderBox { k: k + 1, i }, LadderBox { k, i }),
                    (LadderBox { k, i }, LadderBox { k: k + 1, i: i + 1 }),
                ];
                for (upper, lower) in pairs {
                    let (eu, el) = (self.entry(upper.k, upper.i), self.entry(lower.k, lower.i));
                    let mut v = vec![0i64; dim];
                    let mut tau = Q::zero();
                    let mut lambda_ref = None;
                    match eu {
                        Entry::Coord(c) => v[c] += 1,
                        Entry::Fixed(j) => {
                            tau -= &self.lambda[j - 1];
                            lambda_ref = Some((-1, j));
                        }
                    }
                    match el {
                        Entry::Coord(c) => v[c] -= 1,
                        Entry::Fixed(j) => {
                            tau += &self.lambda[j - 1];
                            lambda_ref = Some((1, j));
                        }
                    }
                    if matches!((eu, el), (Entry::Fixed(_), Entry::Fixed(_))) {
                        continue;
                    }
                    if out.iter().any(|f| f.v == v && f.tau == tau) {
                        continue;
                    }
                    out.push(Facet { v, tau, upper, lower, lambda_ref });
                }
            }
        }
        out
    }

    /// Patterns with all entries among the λ values whose tight constraints
    /// have full rank.
    fn enumerate_vertices(&self, ineqs: &[Facet]) -> Vec<Vec<Q>> {
        let mut values: Vec<Q> = self.lambda.clone();
        values.dedup();
        let dim = self.dim();
        let mut out = Vec::new();
        self.fill_patterns(&|lo, hi| values.iter().filter(|x| *x >= lo && *x <= hi).cloned().collect(), &mut |u| {
            let rows: Vec<&[i64]> = ineqs.iter().filter(|f| f.eval(u).is_zero()).map(|f| f.v.as_slice()).collect();
            if exact::rank(rows, dim) == dim {
                out.push(u.to_vec());
            }
        });
        out.sort();
        out
    }

    /// Enumerates interlacing patterns row by row, drawing each free entry
    /// from `choices(lower bound, upper bound)`, and calls `visit` with the
    /// coordinate vector of each.
    fn fill_patterns(&self, choices: &dyn Fn(&Q, &Q) -> Vec<Q>, visit: &mut dyn FnMut(&[Q])) {
        let n = self.n();
        let mut rows: Vec<Vec<Q>> = (1..=n).map(|k| vec![Q::zero(); k]).collect();
        rows[n - 1] = self.lambda.clone();
        let positions: Vec<(usize, usize)> = (1..n).rev().flat_map(|k| (1..=k).map(move |i| (k, i))).collect();
        let coord_pos: Vec<(usize, usize)> = self.coords.iter().map(|b| (b.k, b.i)).collect();
        let mut u = vec![Q::zero(); self.dim()];
        fn rec(
            depth: usize,
            positions: &[(usize, usize)],
            rows: &mut Vec<Vec<Q>>,
            coord_pos: &[(usize, usize)],
            u: &mut Vec<Q>,
            choices: &dyn Fn(&Q, &Q) -> Vec<Q>,
            visit: &mut dyn FnMut(&[Q]),
        ) {
            if depth == positions.len() {
                for (c, &(k, i)) in coord_pos.iter().enumerate() {
                    u[c] = rows[k - 1][i - 1].clone();
                }
                visit(u);
                return;
            }
            let (k, i) = positions[depth];
            let hi = rows[k][i - 1].clone();
            let lo = rows[k][i].clone();
            for x in choices(&lo, &hi) {
                rows[k - 1][i - 1] = x;
                rec(depth + 1, positions, rows, coord_pos, u, choices, visit);
            }
        }
        rec(0, &positions, &mut rows, &coord_pos, &mut u, choices, visit);
    }

    fn active_facets(&self, u: &[Q]) -> Vec<usize> {
        (0..self.facets.len()).filter(|&f| self.facets[f].eval(u).is_zero()).collect()
    }

    fn incidence(&self) -> Vec<Bits> {
        self.vertices
            .iter()
            .map(|v| {
                let mut b = Bits::empty(self.facets.len());
                v.active.iter().for_each(|&f| b.insert(f));
                b
            })
            .collect()
    }

    /// Rational point with pattern entries averaged over the vertices.
    pub fn barycenter(&self) -> Vec<Q> {
        let m = Q::from_integer(BigInt::from(self.vertices.len()));
        (0..self.dim()).map(|c| self.vertices.iter().map(|v| &v.point[c]).sum::<Q>() / &m).collect()
    }
}

pub fn contains(poly: &GCPolytope, u: &[Q], strict: bool) -> Result<bool> {
    poly.check_len(u.len())?;
    Ok(poly.facets.iter().all(|f| {
        let l = f.eval(u);
        if strict {
            l.is_positive()
        } else {
            !l.is_negative()
        }
    }))
}

/// Floating-point membership with slack `tol`.
pub fn contains_f64(poly: &GCPolytope, u: &[f64], tol: f64) -> Result<bool> {
    poly.check_len(u.len())?;
    Ok(poly.facets.iter().all(|f| f.eval_f64(u) >= -tol))
}

pub fn vertices(poly: &GCPolytope) -> &[Vertex] {
    &poly.vertices
}

fn integral_lambda(poly: &GCPolytope) -> Option<Vec<i64>> {
    poly.lambda.iter().map(rational::to_i64).collect()
}

pub fn lattice_points(poly: &GCPolytope) -> Result<Vec<Vec<i64>>> {
    integral_lambda(poly).ok_or(Error::NonIntegral("lattice point enumeration"))?;
    let mut out = Vec::new();
    poly.fill_patterns(
        &|lo, hi| {
            let (lo, hi) = (rational::to_i64(lo).unwrap(), rational::to_i64(hi).unwrap());
            (lo..=hi).map(rational::q).collect()
        },
        &mut |u| out.push(u.iter().map(|x| rational::to_i64(x).unwrap()).collect()),
    );
    out.sort();
    Ok(out)
}

/// Number of lattice points without materializing them.
pub fn lattice_point_count(poly: &GCPolytope) -> Result<u64> {
    integral_lambda(poly).ok_or(Error::NonIntegral("lattice point enumeration"))?;
    let mut count = 0u64;
    poly.fill_patterns(
        &|lo, hi| {
            let (lo, hi) = (rational::to_i64(lo).unwrap(), rational::to_i64(hi).unwrap());
            (lo..=hi).map(rational::q).collect()
        },
        &mut |_| count += 1,
    );
    Ok(count)
}

pub fn volume(poly: &GCPolytope) -> Result<Q> {
    if poly.dim() == 0 || poly.vertices.len() <= poly.dim() {
        return Err(Error::Degenerate);
    }
    let normals: Vec<Vec<i64>> = poly.facets.iter().map(|f| f.v.clone()).collect();
    let offsets: Vec<Q> = poly.facets.iter().map(|f| f.tau.clone()).collect();
    let points: Vec<Vec<Q>> = poly.vertices.iter().map(|v| v.point.clone()).collect();
    let incidence = poly.incidence();
    Ok(polytope_volume(&VPolytope {
        dim: poly.dim(),
        normals: &normals,
        offsets: &offsets,
        vertices: &points,
        incidence: &incidence,
    }))
}

/// `∏_{i<j} (λ_{n_i} − λ_{n_j})^{k_i k_j} / ∏_{k=1}^{n−1} k!`, products over blocks.
///
/// This agrees with the actual volume only when every block has at most two
/// elements; see [`weyl_leading_volume`].
pub fn volume_product_formula(flag: &FlagType, lambda: &[Q]) -> Q {
    let b = flag.bounds();
    let sizes = flag.block_sizes();
    let mut num = Q::one();
    for i in 0..sizes.len() {
        for j in i + 1..sizes.len() {
            let diff = &lambda[b[i + 1] - 1] - &lambda[b[j + 1] - 1];
            num *= num_traits::pow(diff, sizes[i] * sizes[j]);
        }
    }
    num / Q::from_integer(superfactorial(flag.n() - 1))
}

/// Leading coefficient in `m` of the Weyl dimension of `mλ`:
/// `∏_{λ_i ≠ λ_j, i<j} (λ_i − λ_j)/(j − i)`.
pub fn weyl_leading_volume(lambda: &[Q]) -> Q {
    let n = lambda.len();
    let mut out = Q::one();
    for i in 0..n {
        for j in i + 1..n {
            if lambda[i] != lambda[j] {
                out *= (&lambda[i] - &lambda[j]) / Q::from_integer(BigInt::from(j - i));
            }
        }
    }
    out
}

fn superfactorial(m: usize) -> BigInt {
    (1..=m).map(|k| (1..=k).map(BigInt::from).product::<BigInt>()).product()
}

/// `∏_{i<j} (λ_i − λ_j + j − i) / ∏_{k=1}^{n−1} k!`.
pub fn weyl_dimension(lambda: &[i64]) -> BigInt {
    let n = lambda.len();
    let mut num = BigInt::one();
    for i in 0..n {
        for j in i + 1..n {
            num *= BigInt::from(lambda[i] - lambda[j] + (j - i) as i64);
        }
    }
    let (q, r) = num.div_rem(&superfactorial(n - 1));
    debug_assert!(r.is_zero());
    q
}

pub fn is_reflexive(poly: &GCPolytope) -> (bool, Option<Vec<i64>>) {
    let Ok(points) = lattice_points(poly) else {
        return (false, None);
    };
    let interior: Vec<&Vec<i64>> = points
        .iter()
        .filter(|p| {
            let u: Vec<Q> = p.iter().map(|&x| rational::q(x)).collect();
            contains(poly, &u, true).unwrap_or(false)
        })
        .collect();
    let [p] = interior.as_slice() else {
        return (false, None);
    };
    let u: Vec<Q> = p.iter().map(|&x| rational::q(x)).collect();
    if poly.facets.iter().all(|f| f.eval(&u).is_one()) {
        (true, Some((*p).clone()))
    } else {
        (false, None)
    }
}

/// Volume of `conv{v_i}` after translating the unique interior lattice point to the origin.
pub fn dual_volume(poly: &GCPolytope) -> Result<Q> {
    let (ok, center) = is_reflexive(poly);
    let center = match (ok, center) {
        (true, Some(c)) => c,
        _ => return Err(Error::NotReflexive),
    };
    let dim = poly.dim();
    // dual facets <p - c, y> >= -1, one per primal vertex p
    let normals: Vec<Vec<i64>> = poly
        .vertices
        .iter()
        .map(|v| v.point.iter().zip(&center).map(|(x, &c)| rational::to_i64(x).expect("integral vertex") - c).collect())
        .collect();
    let offsets = vec![rational::q(-1); normals.len()];
    let points: Vec<Vec<Q>> = poly.facets.iter().map(|f| f.v.iter().map(|&x| rational::q(x)).collect()).collect();
    let mut incidence = vec![Bits::empty(normals.len()); points.len()];
    for (vi, v) in poly.vertices.iter().enumerate() {
        for &f in &v.active {
            incidence[f].insert(vi);
        }
    }
    Ok(polytope_volume(&VPolytope {
        dim,
        normals: &normals,
        offsets: &offsets,
        vertices: &points,
        incidence: &incidence,
    }))
}

/// Pattern `λ^{(k)}_i = k − 2i + 1` written in the polytope's coordinates.
pub fn anticanonical_interior_point(poly: &GCPolytope) -> Vec<i64> {
    poly.coords.iter().map(|b| b.k as i64 - 2 * b.i as i64 + 1).collect()
}

/// `|det|` check for a simplicial cone spanned by the normals of `rays` at `vertex`.
pub fn simplicial_cone_determinant(poly: &GCPolytope, vertex: &[Q], rays: &[usize]) -> Result<i64> {
    let dim = poly.dim();
    poly.check_len(vertex.len())?;
    if rays.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: rays.len() });
    }
    for &r in rays {
        let f = poly.facets.get(r).ok_or(Error::RayNotActive(r))?;
        if !f.eval(vertex).is_zero() {
            return Err(Error::RayNotActive(r));
        }
    }
    let n = poly.n();
    let id = |b: LadderBox| b.k * (b.k - 1) / 2 + b.i - 1;
    let mut uf = UnionFind::new(n * (n + 1) / 2);
    for &r in rays {
        let f = &poly.facets[r];
        if !uf.union(id(f.upper), id(f.lower)) {
            return Err(Error::EqualityLoop);
        }
    }
    let m: Vec<Vec<i128>> = (0..dim).map(|row| rays.iter().map(|&r| poly.facets[r].v[row] as i128).collect()).collect();
    match exact::det(m) {
        0 => Err(Error::RankDeficient),
        d => Ok(d.to_i64().expect("small determinant")),
    }
}

/// Outcome of checking every `N`-subset of the rays at one vertex.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ConeSummary {
    pub unimodular: usize,
    pub other_determinant: usize,
    pub loops: usize,
    pub rank_deficient: usize,
}

pub fn check_vertex_cones(poly: &GCPolytope, vertex: &Vertex) -> ConeSummary {
    let mut s = ConeSummary::default();
    for rays in vertex.active.iter().copied().combinations(poly.dim()) {
        match simplicial_cone_determinant(poly, &vertex.point, &rays) {
            Ok(d) if d.abs() == 1 => s.unimodular += 1,
            Ok(_) => s.other_determinant += 1,
            Err(Error::EqualityLoop) => s.loops += 1,
            Err(_) => s.rank_deficient += 1,
        }
    }
    s
}

/// Parses a λ list, e.g. `"2,0,-2"` or `"1/2,1/2,-1"`.
pub fn parse_lambda(s: &str) -> Result<Vec<Q>> {
    rational::parse_rational_list(s)
}

pub fn lambda_from_ints(l: &[i64]) -> Vec<Q> {
    l.iter().map(|&x| rational::q(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flagcombi::{anticanonical_lambda, dimension};
    use crate::rational::{q, q_frac};
    use proptest::prelude::*;

    fn poly(flag: &str, lambda: &[i64]) -> GCPolytope {
        build_polytope(&flag.parse().unwrap(), &lambda_from_ints(lambda)).unwrap()
    }

    fn qs(v: &[i64]) -> Vec<Q> {
        lambda_from_ints(v)
    }

    /// Exact solution of a square rational system, `None` if singular.
    fn solve(a: &[Vec<i64>], b: &[Q]) -> Option<Vec<Q>> {
        let n = a.len();
        let mut m: Vec<Vec<Q>> = a
            .iter()
            .zip(b)
            .map(|(row, rhs)| row.iter().map(|&x| q(x)).chain(std::iter::once(rhs.clone())).collect())
            .collect();
        for col in 0..n {
            let p = (col..n).find(|&r| !m[r][col].is_zero())?;
            m.swap(col, p);
            for r in 0..n {
                if r != col && !m[r][col].is_zero() {
                    let f = &m[r][col] / &m[col][col];
                    for c in col..=n {
                        let d = &f * &m[col][c];
                        m[r][c] -= d;
                    }
                }
            }
        }
        Some((0..n).map(|r| &m[r][n] / &m[r][r]).collect())
    }

    /// Vertices by solving every N-subset of facet equalities.
    fn brute_force_vertices(p: &GCPolytope) -> Vec<Vec<Q>> {
        let dim = p.dim();
        let m = p.facets.len();
        let mut found = Vec::new();
        for mask in 0u64..1 << m {
            if mask.count_ones() as usize != dim {
                continue;
            }
            let sel: Vec<&Facet> = (0..m).filter(|b| mask >> b & 1 == 1).map(|b| &p.facets[b]).collect();
            let a: Vec<Vec<i64>> = sel.iter().map(|f| f.v.clone()).collect();
            let b: Vec<Q> = sel.iter().map(|f| f.tau.clone()).collect();
            if let Some(x) = solve(&a, &b) {
                if contains(p, &x, false).unwrap() && !found.contains(&x) {
                    found.push(x);
                }
            }
        }
        found.sort();
        found
    }

    #[test]
    fn full_flag_three_facets() {
        let p = poly("1,2|3", &[2, 0, -2]);
        let normals: Vec<Vec<i64>> = p.facets.iter().map(|f| f.v.clone()).collect();
        assert_eq!(
            normals,
            vec![vec![-1, 0, 0], vec![1, 0, 0], vec![0, -1, 0], vec![0, 1, 0], vec![1, 0, -1], vec![0, -1, 1]]
        );
        let taus: Vec<Q> = p.facets.iter().map(|f| f.tau.clone()).collect();
        assert_eq!(taus, qs(&[-2, 0, 0, -2, 0, 0]));
    }

    #[test]
    fn grassmannian_facets() {
        let p = poly("2|4", &[1, 1, -1, -1]);
        let normals: Vec<Vec<i64>> = p.facets.iter().map(|f| f.v.clone()).collect();
        assert_eq!(
            normals,
            vec![
                vec![0, -1, 0, 0],
                vec![-1, 1, 0, 0],
                vec![1, 0, -1, 0],
                vec![0, 0, 1, 0],
                vec![0, 1, 0, -1],
                vec![0, 0, -1, 1]
            ]
        );
        let taus: Vec<Q> = p.facets.iter().map(|f| f.tau.clone()).collect();
        assert_eq!(taus, qs(&[-1, 0, 0, -1, 0, 0]));
        assert_eq!(p.facets[0].lambda_ref.map(|(s, j)| (s, p.block_label(j))), Some((-1, 1)));
        assert_eq!(p.facets[3].lambda_ref.map(|(s, j)| (s, p.block_label(j))), Some((1, 3)));
    }

    #[test]
    fn interval() {
        let p = build_polytope(&"1|2".parse().unwrap(), &[q(6), q(5)]).unwrap();
        assert_eq!(p.facets.len(), 2);
        assert_eq!(p.facets[0].v, vec![-1]);
        assert_eq!(p.facets[1].v, vec![1]);
        assert_eq!(vertices(&p).iter().map(|v| v.point.clone()).collect::<Vec<_>>(), vec![vec![q(5)], vec![q(6)]]);
    }

    #[test]
    fn rejects_bad_lambda() {
        let f: FlagType = "1,2|3".parse().unwrap();
        assert!(build_polytope(&f, &qs(&[1, 1, 0])).is_err());
        assert!(build_polytope(&f, &qs(&[0, 1, 2])).is_err());
        let g: FlagType = "2|4".parse().unwrap();
        assert!(build_polytope(&g, &qs(&[2, 1, 0, 0])).is_err());
        assert!(build_polytope(&g, &qs(&[1, 1, 0])).is_err());
    }

    #[test]
    fn containment() {
        let p = poly("1,2|3", &[2, 0, -2]);
        assert!(contains(&p, &qs(&[1, -1, 0]), true).unwrap());
        assert!(!contains(&p, &qs(&[0, 0, 0]), true).unwrap());
        assert!(contains(&p, &qs(&[0, 0, 0]), false).unwrap());
        assert!(p.facets[1].eval(&qs(&[0, 0, 0])).is_zero());
        assert!(!contains(&p, &qs(&[3, 0, 0]), false).unwrap());
        assert!(matches!(contains(&p, &qs(&[0, 0]), false), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn lattice_counts() {
        assert_eq!(lattice_points(&poly("1|2", &[1, 0])).unwrap().len(), 2);
        assert_eq!(lattice_points(&poly("1,2|3", &[2, 1, 0])).unwrap().len(), 8);
        assert_eq!(lattice_points(&poly("2|3", &[1, 1, 0])).unwrap().len(), 3);
        assert_eq!(weyl_dimension(&[2, 1, 0]), BigInt::from(8));
        let half = build_polytope(&"1|2".parse().unwrap(), &[q_frac(1, 2), q(0)]).unwrap();
        assert!(matches!(lattice_points(&half), Err(Error::NonIntegral(_))));
    }

    #[test]
    fn volumes() {
        assert_eq!(volume(&poly("1,2|3", &[2, 1, 0])).unwrap(), q(1));
        assert_eq!(volume(&poly("1|2", &[1, 0])).unwrap(), q(1));
        assert_eq!(volume(&poly("2|4", &[1, 1, 0, 0])).unwrap(), q_frac(1, 12));
        assert_eq!(volume(&poly("1,2|3", &[2, 0, -2])).unwrap(), q(8));
    }

    #[test]
    fn product_formula_misses_large_blocks() {
        let f: FlagType = "2|5".parse().unwrap();
        let l = qs(&[1, 1, 0, 0, 0]);
        assert_eq!(volume(&build_polytope(&f, &l).unwrap()).unwrap(), q_frac(1, 144));
        assert_eq!(weyl_leading_volume(&l), q_frac(1, 144));
        assert_eq!(volume_product_formula(&f, &l), q_frac(1, 288));
    }

    #[test]
    fn ehrhart_ratio_approaches_volume() {
        let f: FlagType = "1,2|3".parse().unwrap();
        let base = [2i64, 1, 0];
        let vol = volume(&build_polytope(&f, &qs(&base)).unwrap()).unwrap();
        let vol = rational::to_f64(&vol);
        let mut errs = Vec::new();
        for m in 1..=6i64 {
            let lam: Vec<i64> = base.iter().map(|x| x * m).collect();
            let count = lattice_point_count(&build_polytope(&f, &qs(&lam)).unwrap()).unwrap() as f64;
            errs.push(((count / (m as f64).powi(3) - vol).abs(), m as f64));
        }
        // C fitted from m = 1
        let c = errs[0].0;
        for (e, m) in errs {
            assert!(e <= c / m + 1e-12, "m = {m}: error {e}");
        }
    }

    #[test]
    fn vertices_match_brute_force() {
        for (flag, lam) in [
            ("1,2|3", vec![2, 0, -2]),
            ("2|4", vec![1, 1, -1, -1]),
            ("1,2,3|4", vec![3, 1, -1, -3]),
            ("1|3", vec![1, 0, 0]),
        ] {
            let p = poly(flag, &lam);
            let fast: Vec<Vec<Q>> = vertices(&p).iter().map(|v| v.point.clone()).collect();
            assert_eq!(fast, brute_force_vertices(&p), "{flag}");
        }
    }

    #[test]
    fn sphere_vertex() {
        let p = poly("1,2|3", &[2, 0, -2]);
        let v = vertices(&p).iter().find(|v| v.point == qs(&[0, 0, 0])).unwrap();
        assert_eq!(v.active.len(), 4);
        // frozen from the brute-force oracle
        assert_eq!(vertices(&p).len(), 7);
    }

    #[test]
    fn vertex_patterns_are_equality_connected() {
        for (flag, lam) in [("1,2|3", vec![2, 0, -2]), ("1,2,3|4", vec![3, 1, -1, -3]), ("2|4", vec![1, 1, -1, -1])] {
            let p = poly(flag, &lam);
            for v in vertices(&p) {
                assert!(p.pattern(&v.point).unwrap().is_equality_connected());
                assert_eq!(v.active, p.active_facets(&v.point));
            }
        }
    }

    #[test]
    fn reflexive_examples() {
        let p = poly("1,2|3", &[2, 0, -2]);
        assert_eq!(is_reflexive(&p), (true, Some(vec![1, -1, 0])));
        assert_eq!(anticanonical_interior_point(&p), vec![1, -1, 0]);
        assert_eq!(is_reflexive(&poly("1|2", &[1, -1])), (true, Some(vec![0])));
        assert_eq!(is_reflexive(&poly("1|2", &[1, 0])), (false, None));
    }

    #[test]
    fn dual_volumes() {
        assert_eq!(dual_volume(&poly("1,2|3", &[2, 0, -2])).unwrap(), q_frac(4, 3));
        assert_eq!(dual_volume(&poly("2|4", &[2, 2, -2, -2])).unwrap(), q_frac(1, 3));
        assert_eq!(dual_volume(&poly("1|2", &[1, -1])).unwrap(), q(2));
        assert_eq!(dual_volume(&poly("1|2", &[1, 0])), Err(Error::NotReflexive));
    }

    #[test]
    fn cone_determinants() {
        let p = poly("1,2|3", &[2, 0, -2]);
        let v = vertices(&p).iter().find(|v| v.active.len() == 4).unwrap().clone();
        let s = check_vertex_cones(&p, &v);
        assert_eq!(s.other_determinant, 0);
        assert!(s.unimodular > 0);
        let det = simplicial_cone_determinant(&p, &v.point, &v.active[..3]);
        assert!(matches!(det, Ok(1) | Ok(-1) | Err(Error::EqualityLoop) | Err(Error::RankDeficient)));

        let i = poly("1|2", &[1, 0]);
        let v0 = &vertices(&i)[0];
        assert_eq!(simplicial_cone_determinant(&i, &v0.point, &v0.active).unwrap().abs(), 1);
        let inactive = (0..2).find(|f| !v0.active.contains(f)).unwrap();
        assert_eq!(simplicial_cone_determinant(&i, &v0.point, &[inactive]), Err(Error::RayNotActive(inactive)));
    }

    #[test]
    fn sphere_vertex_cones() {
        // the four tight facets form the cycle u1 - λ2 - u2 - u3 - u1; any three are a path
        let p = poly("1,2|3", &[2, 0, -2]);
        let v = vertices(&p).iter().find(|v| v.active.len() == 4).unwrap().clone();
        assert_eq!(check_vertex_cones(&p, &v), ConeSummary { unimodular: 4, ..Default::default() });
    }

    #[test]
    fn equality_loop_detected() {
        let p = poly("1,2,3|4", &[3, 1, -1, -3]);
        let loops: usize = vertices(&p).iter().map(|v| check_vertex_cones(&p, v).loops).sum();
        assert!(loops > 0);
        let v = vertices(&p).iter().find(|v| check_vertex_cones(&p, v).loops > 0).unwrap();
        let rays = v
            .active
            .iter()
            .copied()
            .combinations(p.dim())
            .find(|r| simplicial_cone_determinant(&p, &v.point, r) == Err(Error::EqualityLoop))
            .unwrap();
        assert_eq!(rays.len(), 6);
    }

    #[test]
    fn coordinate_override() {
        let f: FlagType = "1,2|3".parse().unwrap();
        let coords = vec![LadderBox { k: 1, i: 1 }, LadderBox { k: 2, i: 1 }, LadderBox { k: 2, i: 2 }];
        let p = build_polytope_with_coords(&f, &qs(&[2, 0, -2]), coords).unwrap();
        assert_eq!(is_reflexive(&p).1, Some(vec![0, 1, -1]));
        let bad = vec![LadderBox { k: 1, i: 1 }, LadderBox { k: 2, i: 1 }];
        assert!(build_polytope_with_coords(&f, &qs(&[2, 0, -2]), bad).is_err());
    }

    #[test]
    fn anticanonical_is_reflexive() {
        for flag in ["1|2", "1,2|3", "1|3", "2|3", "1,2,3|4", "2|4", "1,3|4"] {
            let f: FlagType = flag.parse().unwrap();
            let p = build_polytope(&f, &lambda_from_ints(&anticanonical_lambda(&f))).unwrap();
            assert_eq!(is_reflexive(&p), (true, Some(anticanonical_interior_point(&p))), "{flag}");
        }
    }

    fn decreasing_lambda() -> impl Strategy<Value = Vec<i64>> {
        (2usize..=4).prop_flat_map(|n| proptest::collection::vec(0i64..=4, n)).prop_map(|mut v| {
            v.sort_by(|a, b| b.cmp(a));
            v
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn weyl_counts(lam in decreasing_lambda()) {
            prop_assume!(lam.first() != lam.last());
            let f = FlagType::from_blocks(&lam).unwrap();
            let p = build_polytope(&f, &lambda_from_ints(&lam)).unwrap();
            prop_assert_eq!(BigInt::from(lattice_point_count(&p).unwrap()), weyl_dimension(&lam));
            prop_assert_eq!(volume(&p).unwrap(), weyl_leading_volume(&p.lambda));
            prop_assert_eq!(p.dim(), dimension(&f));
        }
    }
}
