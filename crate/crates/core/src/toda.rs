//! Classical Toda lattice and Givental's phase function, and their link to
//! the potential function of the full flag manifold at `T = e^{−1}`.

use std::ops::Neg;

use num_complex::Complex64;
use num_traits::{Num, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flagcombi::{free_boxes, FlagType, LadderBox};
use crate::gcpoly::{build_polytope, lambda_from_ints, vertices};
use crate::potential::{critical_points, CriticalPoint, LaurentPotential, LaurentSystem};
use crate::rational;

type C = Complex64;

/// Finite-difference step for `∂f/∂λ`.
pub const FD_STEP: f64 = 1e-6;
/// Level-set residual counted as zero.
pub const LEVEL_TOL: f64 = 1e-6;

/// Momenta `p_0..p_{n−1}` and couplings `q_1..q_{n−1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TodaState<F> {
    pub p: Vec<F>,
    pub q: Vec<F>,
}

impl<F> TodaState<F> {
    pub fn new(p: Vec<F>, q: Vec<F>) -> Result<Self> {
        if p.is_empty() || q.len() + 1 != p.len() {
            return Err(Error::DimensionMismatch { expected: p.len().saturating_sub(1), got: q.len() });
        }
        Ok(TodaState { p, q })
    }
}

/// `(D_1, …, D_n)` with `det(A + xI) = xⁿ + Σ D_i x^{n−i}`, where `A` has
/// `p` on the diagonal, `q` above it and `−1` below it.
pub fn toda_hamiltonians<F>(state: &TodaState<F>) -> Vec<F>
where
    F: Num + Clone + Neg<Output = F>,
{
    // Continuants P_k = (p_{k−1} + x) P_{k−1} + q_{k−1} P_{k−2}, stored
    // with the coefficient of x^j at index j.
    let mut prev: Vec<F> = vec![F::one()];
    let mut cur: Vec<F> = vec![state.p[0].clone(), F::one()];
    for k in 1..state.p.len() {
        let mut next = vec![F::zero(); k + 2];
        for (j, c) in cur.iter().enumerate() {
            next[j] = next[j].clone() + state.p[k].clone() * c.clone();
            next[j + 1] = next[j + 1].clone() + c.clone();
        }
        for (j, c) in prev.iter().enumerate() {
            next[j] = next[j].clone() + state.q[k - 1].clone() * c.clone();
        }
        prev = std::mem::replace(&mut cur, next);
    }
    let n = state.p.len();
    (1..=n).map(|i| cur[n - i].clone()).collect()
}

/// The triangular array `T_{ij}` with the boundary `T_{i,n−i+1} = λ_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseCoordinates {
    n: usize,
    /// `interior[i−1][j−1] = T_{ij}` for `j ≤ n − i`.
    interior: Vec<Vec<C>>,
    lambda: Vec<f64>,
}

impl PhaseCoordinates {
    pub fn new(interior: Vec<Vec<C>>, lambda: Vec<f64>) -> Result<Self> {
        let n = lambda.len();
        if n < 2 {
            return Err(Error::InvalidFlag("phase coordinates need n ≥ 2".into()));
        }
        if interior.len() != n - 1 {
            return Err(Error::DimensionMismatch { expected: n - 1, got: interior.len() });
        }
        for (i, row) in interior.iter().enumerate() {
            if row.len() != n - 1 - i {
                return Err(Error::DimensionMismatch { expected: n - 1 - i, got: row.len() });
            }
        }
        Ok(PhaseCoordinates { n, interior, lambda })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// `T_{ij}` for `1 ≤ i ≤ n`, `1 ≤ j ≤ n − i + 1`.
    pub fn t(&self, i: usize, j: usize) -> C {
        if j == self.n - i + 1 {
            C::new(self.lambda[i - 1], 0.0)
        } else {
            self.interior[i - 1][j - 1]
        }
    }

    pub fn x(&self, i: usize, j: usize) -> C {
        (self.t(i, j) - self.t(i, j + 1)).exp()
    }

    pub fn y(&self, i: usize, j: usize) -> C {
        (self.t(i + 1, j) - self.t(i, j)).exp()
    }

    /// `q_i = exp(λ_{i+1} − λ_i)`.
    pub fn q(&self, i: usize) -> f64 {
        (self.lambda[i] - self.lambda[i - 1]).exp()
    }

    fn index_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..self.n).flat_map(move |i| (1..=self.n - i).map(move |j| (i, j)))
    }

    /// Largest defect of the torus relations `Y_ij X_ij = X_{i+1,j} Y_{i,j+1}`
    /// and `X_{i,n−i} Y_{i,n−i} = q_i`, relative to the products involved.
    pub fn constraint_defect(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for i in 1..n - 1 {
            for j in 1..n - i {
                let a = self.y(i, j) * self.x(i, j);
                let b = self.x(i + 1, j) * self.y(i, j + 1);
                worst = worst.max((a - b).norm() / a.norm().max(b.norm()));
            }
        }
        for i in 1..n {
            let a = self.x(i, n - i) * self.y(i, n - i);
            worst = worst.max((a - self.q(i)).norm() / self.q(i));
        }
        worst
    }

    pub fn with_lambda(&self, lambda: Vec<f64>) -> Self {
        PhaseCoordinates { lambda, ..self.clone() }
    }
}

/// `f_q = Σ (X_{ij} + Y_{ij})`, `n(n−1)` summands.
pub fn phase_function(pc: &PhaseCoordinates) -> C {
    pc.index_pairs().map(|(i, j)| pc.x(i, j) + pc.y(i, j)).sum()
}

/// The pattern position `(k, i)` paired with `T_{ij}`, `k = i + j − 1`.
fn box_of(i: usize, j: usize) -> LadderBox {
    LadderBox { k: i + j - 1, i }
}

fn require_full(flag: &FlagType, lambda_len: usize) -> Result<Vec<LadderBox>> {
    if !flag.is_full() {
        return Err(Error::PartialFlag);
    }
    if lambda_len != flag.n() {
        return Err(Error::DimensionMismatch { expected: flag.n(), got: lambda_len });
    }
    Ok(free_boxes(flag))
}

/// `T_{ij} = u^{(k)}_i − x^{(k)}_i` with `k = i + j − 1`; `x` and `u` are
/// indexed like the coordinates of Δ_λ in default order.
pub fn gc_to_toda(flag: &FlagType, x: &[f64], u: &[f64], lambda: &[f64]) -> Result<PhaseCoordinates> {
    let xs: Vec<C> = x.iter().zip(u).map(|(a, b)| C::new(a - b, 0.0)).collect();
    if x.len() != u.len() {
        return Err(Error::DimensionMismatch { expected: u.len(), got: x.len() });
    }
    from_log_y(flag, &xs, lambda)
}

/// Phase coordinates of `y = e^s` at `T = e^{−1}`, where `T_{ij} = −s`.
pub fn from_log_y(flag: &FlagType, s: &[C], lambda: &[f64]) -> Result<PhaseCoordinates> {
    let boxes = require_full(flag, lambda.len())?;
    if s.len() != boxes.len() {
        return Err(Error::DimensionMismatch { expected: boxes.len(), got: s.len() });
    }
    let n = flag.n();
    let interior = (1..n)
        .map(|i| {
            (1..=n - i)
                .map(|j| {
                    let c = boxes.iter().position(|&b| b == box_of(i, j)).expect("interior T is a free box");
                    -s[c]
                })
                .collect()
        })
        .collect();
    PhaseCoordinates::new(interior, lambda.to_vec())
}

/// Inverse of [`from_log_y`].
pub fn to_log_y(flag: &FlagType, pc: &PhaseCoordinates) -> Result<Vec<C>> {
    let boxes = require_full(flag, pc.n)?;
    Ok(boxes.iter().map(|b| -pc.t(b.i, b.k - b.i + 1)).collect())
}

/// `f_q` as a Laurent system in the interior `T_{ij}` (row-major), built
/// from the definitions of `X_{ij}` and `Y_{ij}`; also returns the constant
/// log-coefficients coming from the boundary.
pub fn phase_system(lambda: &[f64]) -> Result<(LaurentSystem, Vec<f64>)> {
    let n = lambda.len();
    if n < 2 {
        return Err(Error::InvalidFlag("phase function needs n ≥ 2".into()));
    }
    let index: Vec<(usize, usize)> = (1..n).flat_map(|i| (1..=n - i).map(move |j| (i, j))).collect();
    let dim = index.len();
    let var = |i: usize, j: usize| index.iter().position(|&p| p == (i, j));
    let boundary = |i: usize, j: usize| if j == n - i + 1 { lambda[i - 1] } else { 0.0 };
    let mut exps = Vec::new();
    let mut logc = Vec::new();
    let mut add = |plus: (usize, usize), minus: (usize, usize)| {
        let mut v = vec![0i64; dim];
        if let Some(a) = var(plus.0, plus.1) {
            v[a] += 1;
        }
        if let Some(b) = var(minus.0, minus.1) {
            v[b] -= 1;
        }
        exps.push(v);
        logc.push(boundary(plus.0, plus.1) - boundary(minus.0, minus.1));
    };
    for &(i, j) in &index {
        add((i, j), (i, j + 1));
        add((i + 1, j), (i, j));
    }
    // Expected region: T ≈ u over the Gelfand-Cetlin polytope of λ.
    let grid: Vec<i64> = (0..n as i64).rev().collect();
    let reference = build_polytope(&FlagType::full(n)?, &lambda_from_ints(&grid))?;
    let scale = (lambda[0] - lambda[n - 1]) / (n - 1) as f64;
    let boxes = free_boxes(&FlagType::full(n)?);
    let corners: Vec<Vec<f64>> = vertices(&reference)
        .iter()
        .map(|v| {
            index
                .iter()
                .map(|&(i, j)| {
                    let c = boxes.iter().position(|&b| b == box_of(i, j)).expect("free box");
                    lambda[n - 1] + scale * rational::to_f64(&v.point[c])
                })
                .collect()
        })
        .collect();
    Ok((LaurentSystem::new(exps, dim, &corners), logc))
}

/// Critical points of `f_q` in the interior `T_{ij}`; `y` holds `e^{T_{ij}}`.
pub fn phase_critical_points(lambda: &[f64]) -> Result<Vec<CriticalPoint>> {
    let (sys, logc) = phase_system(lambda)?;
    Ok(sys.critical_points(&logc, 1.0))
}

/// `∂f_q/∂λ_j` at fixed interior coordinates, by Richardson-extrapolated
/// central differences.
pub fn lambda_derivatives(pc: &PhaseCoordinates) -> Vec<C> {
    let n = pc.n;
    let d = |j: usize, h: f64| {
        let shift = |e: f64| {
            let mut l = pc.lambda.clone();
            l[j] += e;
            phase_function(&pc.with_lambda(l))
        };
        (shift(h) - shift(-h)) / (2.0 * h)
    };
    (0..n).map(|j| (d(j, FD_STEP) * 4.0 - d(j, 2.0 * FD_STEP)) / 3.0).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Convention {
    /// `p_{i} = ∂f/∂λ_{i+1}`, `q_i` as given.
    Direct,
    /// `p_i ↦ −p_i`.
    Negated,
    /// Indices of `p` and `q` reversed.
    Reversed,
    NegatedReversed,
}

impl Convention {
    pub const ALL: [Convention; 4] =
        [Convention::Direct, Convention::Negated, Convention::Reversed, Convention::NegatedReversed];

    fn apply(self, mut p: Vec<C>, mut q: Vec<C>) -> TodaState<C> {
        if matches!(self, Convention::Negated | Convention::NegatedReversed) {
            p.iter_mut().for_each(|x| *x = -*x);
        }
        if matches!(self, Convention::Reversed | Convention::NegatedReversed) {
            p.reverse();
            q.reverse();
        }
        TodaState { p, q }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConventionResidual {
    pub convention: Convention,
    /// `max_i |D_i|` over `i ≥ 2` and all critical points.
    pub max_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelSetReport {
    pub critical_points: usize,
    pub sweep: Vec<ConventionResidual>,
    pub best: Convention,
    pub best_residual: f64,
    /// Largest `|Σ p_i|` before `p_0` is reset from `D_1 = 0`.
    pub d1_before_reset: f64,
    pub within_tolerance: bool,
}

/// Maps each critical point of the potential at `T = e^{−1}` to Toda
/// momenta `p_{i−1} = ∂f_q/∂λ_i` and reports `D_2, …, D_n` for each
/// convention of the sweep.
pub fn level_set_check(pot: &LaurentPotential, lambda: &[f64]) -> Result<LevelSetReport> {
    let flag = &pot.flag;
    require_full(flag, lambda.len())?;
    if flag.n() > 4 {
        return Err(Error::OutOfRange(format!("level-set check supports n ≤ 4, got {}", flag.n())));
    }
    let t = (-1.0f64).exp();
    let points = critical_points(pot, lambda, t)?;
    let mut states = Vec::new();
    let mut d1 = 0.0f64;
    for cp in &points {
        let s: Vec<C> = cp.y.iter().map(|z| z.ln()).collect();
        let pc = from_log_y(flag, &s, lambda)?;
        let mut p = lambda_derivatives(&pc);
        d1 = d1.max(p.iter().sum::<C>().norm());
        p[0] = -p[1..].iter().sum::<C>();
        let q: Vec<C> = (1..flag.n()).map(|i| C::new(pc.q(i), 0.0)).collect();
        states.push((p, q));
    }
    let sweep: Vec<ConventionResidual> = Convention::ALL
        .iter()
        .map(|&convention| {
            let max_residual = states
                .iter()
                .map(|(p, q)| {
                    let d = toda_hamiltonians(&convention.apply(p.clone(), q.clone()));
                    d[1..].iter().map(|z| z.norm()).fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            ConventionResidual { convention, max_residual }
        })
        .collect();
    let best = sweep.iter().min_by(|a, b| a.max_residual.total_cmp(&b.max_residual)).expect("sweep is non-empty");
    Ok(LevelSetReport {
        critical_points: points.len(),
        best: best.convention,
        best_residual: best.max_residual,
        within_tolerance: best.max_residual <= LEVEL_TOL && !points.is_empty(),
        sweep,
        d1_before_reset: d1,
    })
}

/// `|𝔓𝔒^u(x)|_{T=e^{−1}} − f_q| / |𝔓𝔒|` for real `x`, `u`, `λ`.
pub fn identity_residual(pot: &LaurentPotential, x: &[f64], u: &[f64], lambda: &[f64]) -> Result<f64> {
    let t = (-1.0f64).exp();
    let y: Vec<C> = x.iter().zip(u).map(|(a, b)| C::new(a - b, 0.0).exp()).collect();
    let po = pot.eval(lambda, t, &y)?;
    let f = phase_function(&gc_to_toda(&pot.flag, x, u, lambda)?);
    Ok((po - f).norm() / po.norm())
}

impl<F: Zero + Clone> TodaState<F> {
    /// State with all couplings zero.
    pub fn decoupled(p: Vec<F>) -> Self {
        let q = vec![F::zero(); p.len().saturating_sub(1)];
        TodaState { p, q }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gcpoly::build_polytope;
    use crate::potential::build_potential;
    use crate::rational::{q, Q};
    use itertools::Itertools;
    use num_traits::One;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Polynomial in `x` as coefficient vector.
    fn pmul(a: &[Q], b: &[Q]) -> Vec<Q> {
        let mut out = vec![Q::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }

    /// `det(A + xI)` by the Leibniz formula over rational polynomials.
    fn leibniz(p: &[Q], qs: &[Q]) -> Vec<Q> {
        let n = p.len();
        let entry = |r: usize, c: usize| -> Vec<Q> {
            if r == c {
                vec![p[r].clone(), Q::one()]
            } else if c == r + 1 {
                vec![qs[r].clone()]
            } else if r == c + 1 {
                vec![-Q::one()]
            } else {
                vec![Q::zero()]
            }
        };
        let mut total = vec![Q::zero(); n + 1];
        for perm in (0..n).permutations(n) {
            let inversions = (0..n).tuple_combinations().filter(|&(a, b)| perm[a] > perm[b]).count();
            let mut term = vec![if inversions % 2 == 0 { Q::one() } else { -Q::one() }];
            for (r, &c) in perm.iter().enumerate() {
                term = pmul(&term, &entry(r, c));
            }
            for (k, c) in term.into_iter().enumerate() {
                total[k] += c;
            }
        }
        total
    }

    #[test]
    fn hamiltonians_match_leibniz() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=5 {
            for _ in 0..10 {
                let mut r = || Q::new(rng.random_range(-9i64..=9).into(), rng.random_range(1i64..=5).into());
                let p: Vec<Q> = (0..n).map(|_| r()).collect();
                let qs: Vec<Q> = (1..n).map(|_| r()).collect();
                let d = toda_hamiltonians(&TodaState::new(p.clone(), qs.clone()).unwrap());
                let full = leibniz(&p, &qs);
                assert_eq!(full[n], Q::one());
                for i in 1..=n {
                    assert_eq!(d[i - 1], full[n - i], "n={n} i={i}");
                }
            }
        }
    }

    #[test]
    fn small_hamiltonians() {
        let (p0, p1, p2, q1, q2) = (q(2), q(-3), q(5), q(7), q(11));
        let d = toda_hamiltonians(&TodaState::new(vec![p0.clone(), p1.clone()], vec![q1.clone()]).unwrap());
        assert_eq!(d, vec![&p0 + &p1, &p0 * &p1 + &q1]);
        let d = toda_hamiltonians(
            &TodaState::new(vec![p0.clone(), p1.clone(), p2.clone()], vec![q1.clone(), q2.clone()]).unwrap(),
        );
        assert_eq!(d[2], &p0 * &p1 * &p2 + &p0 * &q2 + &p2 * &q1);
        let d = toda_hamiltonians(&TodaState::decoupled(vec![q(1), q(2), q(3)]));
        assert_eq!(d, vec![q(6), q(11), q(6)]);
    }

    #[test]
    fn phase_function_n2() {
        let pc = PhaseCoordinates::new(vec![vec![C::new(0.3, 0.0)]], vec![1.0, -0.5]).unwrap();
        let expected = (0.3f64 - 1.0).exp() + (-0.5f64 - 0.3).exp();
        assert!((phase_function(&pc).re - expected).abs() < 1e-15);
        assert!((pc.q(1) - (-1.5f64).exp()).abs() < 1e-15);
        assert!(pc.constraint_defect() < 1e-14);
    }

    #[test]
    fn constraints_hold_identically() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in 2..=5 {
            let lambda: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let interior = (1..n)
                .map(|i| (0..n - i).map(|_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect())
                .collect();
            let pc = PhaseCoordinates::new(interior, lambda).unwrap();
            assert!(pc.constraint_defect() < 1e-13);
            let terms = pc.index_pairs().count() * 2;
            assert_eq!(terms, n * (n - 1));
        }
    }

    fn random_identity_case(rng: &mut ChaCha8Rng, n: usize) -> (LaurentPotential, Vec<f64>, Vec<f64>, Vec<f64>) {
        let flag = FlagType::full(n).unwrap();
        let grid: Vec<i64> = (0..n as i64).rev().collect();
        let pot = build_potential(&build_polytope(&flag, &lambda_from_ints(&grid)).unwrap());
        let mut lambda: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        lambda.sort_by(|a, b| b.total_cmp(a));
        let dim = n * (n - 1) / 2;
        let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let u: Vec<f64> = (0..dim).map(|_| rng.random_range(lambda[n - 1]..lambda[0])).collect();
        (pot, x, u, lambda)
    }

    #[test]
    fn potential_equals_phase_function() {
        for n in 2..=4 {
            for seed in 0..100 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let (pot, x, u, lambda) = random_identity_case(&mut rng, n);
                let r = identity_residual(&pot, &x, &u, &lambda).unwrap();
                assert!(r <= 1e-12, "n={n} seed={seed} residual {r:e}");
            }
        }
    }

    #[test]
    fn boundary_row_is_lambda() {
        let flag = FlagType::full(3).unwrap();
        let pc = gc_to_toda(&flag, &[0.1, 0.2, 0.3], &[0.5, -0.5, 0.0], &[2.0, 0.0, -2.0]).unwrap();
        assert_eq!((pc.t(1, 3), pc.t(2, 2), pc.t(3, 1)), (C::new(2.0, 0.0), C::new(0.0, 0.0), C::new(-2.0, 0.0)));
        let back = to_log_y(&flag, &pc).unwrap();
        assert!(back.iter().zip([0.1 - 0.5, 0.2 + 0.5, 0.3]).all(|(a, b)| (a.re - b).abs() < 1e-15));
        assert!(matches!(
            gc_to_toda(&"2|4".parse().unwrap(), &[0.0; 4], &[0.0; 4], &[1.0, 1.0, 0.0, 0.0]),
            Err(Error::PartialFlag)
        ));
    }

    #[test]
    fn phase_critical_points_biject_with_potential() {
        let lambda = [2.0, 0.0, -2.0];
        let flag = FlagType::full(3).unwrap();
        let fq = phase_critical_points(&lambda).unwrap();
        assert_eq!(fq.len(), 6);
        let pot = build_potential(&build_polytope(&flag, &lambda_from_ints(&[2, 0, -2])).unwrap());
        let po = critical_points(&pot, &lambda, (-1.0f64).exp()).unwrap();
        assert_eq!(po.len(), 6);
        for cp in &po {
            let s: Vec<C> = cp.y.iter().map(|z| z.ln()).collect();
            let pc = from_log_y(&flag, &s, &lambda).unwrap();
            let t: Vec<C> = pc.interior.iter().flatten().map(|z| z.exp()).collect();
            let hits = fq.iter().filter(|p| p.y.iter().zip(&t).all(|(a, b)| (a - b).norm() < 1e-8 * b.norm())).count();
            assert_eq!(hits, 1);
        }
    }

    #[test]
    fn lambda_derivatives_match_analytic() {
        let pc = PhaseCoordinates::new(
            vec![vec![C::new(0.2, 0.1), C::new(-0.4, 0.0)], vec![C::new(0.7, -0.3)]],
            vec![1.5, 0.25, -1.0],
        )
        .unwrap();
        // λ_i enters through X_{i,n−i} (as −T) and Y_{i−1,n−i+1} (as +T).
        let n = 3;
        let analytic: Vec<C> = (1..=n)
            .map(|i| {
                let mut d = C::zero();
                if i < n {
                    d -= pc.x(i, n - i);
                }
                if i > 1 {
                    d += pc.y(i - 1, n - i + 1);
                }
                d
            })
            .collect();
        for (a, b) in lambda_derivatives(&pc).iter().zip(&analytic) {
            assert!((a - b).norm() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn level_set_projective_line() {
        let pot = build_potential(&build_polytope(&FlagType::full(2).unwrap(), &lambda_from_ints(&[1, 0])).unwrap());
        let r = level_set_check(&pot, &[1.0, 0.0]).unwrap();
        assert_eq!(r.critical_points, 2);
        assert!(r.within_tolerance, "{r:?}");
        assert!(r.d1_before_reset < 1e-8);
    }

    #[test]
    fn level_set_full_flag_three() {
        let pot =
            build_potential(&build_polytope(&FlagType::full(3).unwrap(), &lambda_from_ints(&[2, 0, -2])).unwrap());
        let r = level_set_check(&pot, &[2.0, 0.0, -2.0]).unwrap();
        assert_eq!(r.critical_points, 6);
        assert!(r.within_tolerance, "{r:?}");
    }

    #[test]
    fn decoupled_limit() {
        let p = vec![C::new(1.0, 0.0), C::new(-2.0, 0.0), C::new(0.5, 0.0)];
        let small = TodaState::new(p.clone(), vec![C::new(1e-12, 0.0); 2]).unwrap();
        let exact = toda_hamiltonians(&TodaState::decoupled(p));
        for (a, b) in toda_hamiltonians(&small).iter().zip(&exact) {
            assert!((a - b).norm() < 1e-11);
        }
    }
}
