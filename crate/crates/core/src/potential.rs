//! The potential function of Gelfand-Cetlin torus fibers as a Laurent
//! polynomial in `y_k = e^{x_k} T^{u_k}` and `Q_j = T^{λ_j}`, with a
//! multi-start critical point solver working in logarithmic coordinates.

use std::cmp::Ordering;
use std::f64::consts::PI;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flagcombi::FlagType;
use crate::gcpoly::{vertices, GCPolytope};
use crate::rational::{self, Q};

type C = Complex64;

/// Critical points must reach this relative gradient residual.
pub const GRADIENT_TOL: f64 = 1e-10;
/// Smallest over largest singular value of the Hessian must exceed this.
pub const HESSIAN_TOL: f64 = 1e-8;
/// Relative distance below which two roots are identified.
pub const DEDUPE_TOL: f64 = 1e-8;
/// Values of `T` used to extrapolate valuations.
pub const VALUATION_EPS: [f64; 3] = [1e-2, 1e-3, 1e-4];

const MAX_MAGNITUDE_STARTS: usize = 8;
const FULL_PHASE_GRID_DIM: usize = 4;
const SAMPLED_PHASES: usize = 1296;
const RANDOM_STARTS: usize = 2000;
/// Ill-conditioned but genuine critical points stall near 1e-10.
const NEWTON_STEP_TOL: f64 = 1e-9;
const RANDOM_REACH: f64 = 4.0;

/// A formal `c·T^e` in the Novikov field.
#[derive(Clone, Debug, PartialEq)]
pub struct NovikovScalar {
    pub coefficient: C,
    pub exponent: Q,
}

impl NovikovScalar {
    pub fn new(coefficient: C, exponent: Q) -> Self {
        NovikovScalar { coefficient, exponent }
    }

    /// `None` for the zero element, whose valuation is `+∞`.
    pub fn valuation(&self) -> Option<&Q> {
        (self.coefficient != C::zero()).then_some(&self.exponent)
    }

    pub fn at(&self, t: f64) -> C {
        self.coefficient * t.powf(rational::to_f64(&self.exponent))
    }
}

/// One summand `y^v T^{−τ}` with `ℓ(u) = ⟨v, u⟩ − τ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LaurentTerm {
    pub v: Vec<i64>,
    #[serde(with = "rational::serde_q")]
    pub tau: Q,
    /// `τ = sign · λ_j` when the facet involves a pinned or top-row entry.
    #[serde(skip)]
    pub lambda_ref: Option<(i32, usize)>,
}

impl LaurentTerm {
    /// `τ` for another choice of λ.
    pub fn tau_at(&self, lambda: &[f64]) -> f64 {
        match self.lambda_ref {
            Some((sign, j)) => sign as f64 * lambda[j - 1],
            None => 0.0,
        }
    }

    pub fn coefficient(&self) -> NovikovScalar {
        NovikovScalar::new(C::new(1.0, 0.0), -self.tau.clone())
    }
}

#[derive(Clone, Debug)]
pub struct LaurentPotential {
    pub flag: FlagType,
    pub terms: Vec<LaurentTerm>,
    pub dim: usize,
    /// `Q`-label of each `λ_j`: the first index of its block.
    labels: Vec<usize>,
    lambda: Vec<Q>,
    /// Vertices with each coordinate recorded as the index of the `λ_j` it equals.
    corners: Vec<Vec<usize>>,
    sys: LaurentSystem,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalPoint {
    #[serde(skip)]
    pub y: Vec<C>,
    /// `log|y_k| / log T` at the solving `T`, or an extrapolated valuation.
    pub valuation: Vec<f64>,
    #[serde(skip)]
    pub hessian_det: C,
    pub nondegenerate: bool,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValuationEstimate {
    pub u: Vec<f64>,
    /// Largest deviation of `log|y_k|` from the fitted line.
    pub residual: f64,
}

pub fn build_potential(poly: &GCPolytope) -> LaurentPotential {
    let terms: Vec<LaurentTerm> = poly
        .facets
        .iter()
        .map(|f| LaurentTerm { v: f.v.clone(), tau: f.tau.clone(), lambda_ref: f.lambda_ref })
        .collect();
    let corners: Vec<Vec<usize>> = vertices(poly)
        .iter()
        .map(|v| v.point.iter().map(|x| poly.lambda.iter().position(|l| l == x).unwrap_or(0)).collect())
        .collect();
    let lambda = poly.lambda.iter().map(rational::to_f64).collect::<Vec<_>>();
    let sys = system_at(&terms, poly.dim(), &corners, &lambda);
    LaurentPotential {
        flag: poly.flag.clone(),
        terms,
        dim: poly.dim(),
        labels: (1..=poly.n()).map(|j| poly.block_label(j)).collect(),
        lambda: poly.lambda.clone(),
        corners,
        sys,
    }
}

fn system_at(terms: &[LaurentTerm], dim: usize, corners: &[Vec<usize>], lambda: &[f64]) -> LaurentSystem {
    let points: Vec<Vec<f64>> = corners.iter().map(|c| c.iter().map(|&j| lambda[j]).collect()).collect();
    LaurentSystem::new(terms.iter().map(|t| t.v.clone()).collect(), dim, &points)
}

fn monomial(name: &str, idx: usize, power: i64) -> String {
    if power == 1 {
        format!("{name}{idx}")
    } else {
        format!("{name}{idx}^{power}")
    }
}

impl LaurentPotential {
    /// Laurent form in `y1..yN` and `Q`-labels, one summand per facet.
    pub fn render(&self) -> String {
        self.terms
            .iter()
            .map(|t| {
                let mut num = Vec::new();
                let mut den = Vec::new();
                if let Some((sign, j)) = t.lambda_ref {
                    let q = monomial("Q", self.labels[j - 1], 1);
                    if sign < 0 {
                        num.push(q)
                    } else {
                        den.push(q)
                    }
                }
                for (k, &e) in t.v.iter().enumerate() {
                    match e.cmp(&0) {
                        Ordering::Greater => num.push(monomial("y", k + 1, e)),
                        Ordering::Less => den.push(monomial("y", k + 1, -e)),
                        Ordering::Equal => {}
                    }
                }
                let num = if num.is_empty() { "1".to_string() } else { num.join("") };
                if den.is_empty() {
                    num
                } else {
                    format!("{num}/{}", den.join(""))
                }
            })
            .join(" + ")
    }

    pub fn lambda(&self) -> &[Q] {
        &self.lambda
    }

    pub fn lambda_f64(&self) -> Vec<f64> {
        self.lambda.iter().map(rational::to_f64).collect()
    }

    /// Cohomology rank `n! / (k_1! ⋯ k_{r+1}!)` of the flag manifold.
    pub fn cohomology_rank(&self) -> u64 {
        cohomology_rank(&self.flag)
    }

    fn check(&self, lambda: &[f64], t: f64) -> Result<()> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::OutOfRange(format!("T = {t} is not in (0,1)")));
        }
        let n = self.flag.n();
        if lambda.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: lambda.len() });
        }
        for i in 1..n {
            let same = self.flag.block_of(i) == self.flag.block_of(i + 1);
            let (a, b) = (lambda[i - 1], lambda[i]);
            if !a.is_finite() || (same && a != b) || (!same && a <= b) {
                return Err(Error::InvalidLambda(format!("{lambda:?} does not fit the blocks of {}", self.flag)));
            }
        }
        Ok(())
    }

    /// The solving system with its start region placed at `λ`.
    fn system(&self, lambda: &[f64]) -> LaurentSystem {
        system_at(&self.terms, self.dim, &self.corners, lambda)
    }

    fn log_coefficients(&self, lambda: &[f64], t: f64) -> Vec<f64> {
        let lt = t.ln();
        self.terms.iter().map(|term| -term.tau_at(lambda) * lt).collect()
    }

    pub fn eval(&self, lambda: &[f64], t: f64, y: &[C]) -> Result<C> {
        self.check(lambda, t)?;
        let s = log_coords(y)?;
        Ok(self.sys.summands(&self.log_coefficients(lambda, t), &s).into_iter().sum())
    }

    /// `y_k ∂𝔓𝔒/∂y_k` for every `k`.
    pub fn log_gradient(&self, lambda: &[f64], t: f64, y: &[C]) -> Result<Vec<C>> {
        self.check(lambda, t)?;
        let s = log_coords(y)?;
        let w = self.sys.summands(&self.log_coefficients(lambda, t), &s);
        Ok(self.sys.gradient_from(&w).iter().copied().collect())
    }

    /// `∂²𝔓𝔒/∂log y_i ∂log y_j`.
    pub fn log_hessian(&self, lambda: &[f64], t: f64, y: &[C]) -> Result<DMatrix<C>> {
        self.check(lambda, t)?;
        let s = log_coords(y)?;
        let w = self.sys.summands(&self.log_coefficients(lambda, t), &s);
        Ok(self.sys.hessian_from(&w))
    }
}

/// A Laurent polynomial `Σ c_i e^{⟨v_i, s⟩}` in logarithmic coordinates
/// together with the region where its roots are expected, measured in units
/// of a scale `lt` (`s ≈ lt · u`).
#[derive(Clone, Debug)]
pub struct LaurentSystem {
    pub exponents: Vec<Vec<i64>>,
    pub dim: usize,
    center: Vec<f64>,
    spread: Vec<Vec<f64>>,
    bounds: Vec<(f64, f64)>,
}

impl LaurentSystem {
    /// `corners` are points spanning the expected region, e.g. polytope
    /// vertices; starts are taken at their centroid and half-way towards it.
    pub fn new(exponents: Vec<Vec<i64>>, dim: usize, corners: &[Vec<f64>]) -> Self {
        let m = corners.len().max(1) as f64;
        let center: Vec<f64> = (0..dim).map(|c| corners.iter().map(|p| p[c]).sum::<f64>() / m).collect();
        let spread = corners.iter().map(|p| p.iter().zip(&center).map(|(a, b)| 0.5 * (a + b)).collect()).collect();
        let bounds = (0..dim)
            .map(|c| {
                corners.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p[c]), hi.max(p[c])))
            })
            .collect();
        LaurentSystem { exponents, dim, center, spread, bounds }
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    /// Individual summands at `y = e^s`.
    pub(crate) fn summands(&self, logc: &[f64], s: &[C]) -> Vec<C> {
        self.exponents
            .iter()
            .zip(logc)
            .map(|(v, &c)| {
                let e: C = v.iter().zip(s).map(|(&a, z)| z * a as f64).sum::<C>() + c;
                e.exp()
            })
            .collect()
    }

    pub(crate) fn gradient_from(&self, w: &[C]) -> DVector<C> {
        let mut g = DVector::zeros(self.dim);
        for (v, wi) in self.exponents.iter().zip(w) {
            for (k, &a) in v.iter().enumerate() {
                if a != 0 {
                    g[k] += wi * a as f64;
                }
            }
        }
        g
    }

    pub(crate) fn hessian_from(&self, w: &[C]) -> DMatrix<C> {
        let mut h = DMatrix::zeros(self.dim, self.dim);
        for (v, wi) in self.exponents.iter().zip(w) {
            for (i, &a) in v.iter().enumerate().filter(|(_, a)| **a != 0) {
                for (j, &b) in v.iter().enumerate().filter(|(_, b)| **b != 0) {
                    h[(i, j)] += wi * (a * b) as f64;
                }
            }
        }
        h
    }

    pub(crate) fn residual(&self, w: &[C]) -> f64 {
        let scale: f64 = w.iter().map(|z| z.norm()).sum();
        self.gradient_from(w).iter().map(|z| z.norm()).fold(0.0, f64::max) / scale
    }

    /// Damped Newton in log coordinates; `None` if it fails to converge.
    /// Convergence needs a vanishing Newton step as well as a small residual:
    /// near roots at infinity the relative residual decays while the step
    /// in log coordinates stays of order one. Iterates whose apparent
    /// valuation leaves an enlarged box around the region are abandoned, which
    /// keeps Newton away from solutions at toric infinity that cancel only
    /// to rounding precision.
    pub(crate) fn newton(&self, logc: &[f64], mut s: Vec<C>, max_iter: usize, lt: f64) -> Option<Vec<C>> {
        let margin = 2.0 + 4.0 / lt.abs();
        for _ in 0..max_iter {
            if s.iter().zip(&self.bounds).any(|(z, (lo, hi))| {
                let u = z.re / lt;
                u < lo - margin || u > hi + margin
            }) {
                return None;
            }
            let w = self.summands(logc, &s);
            if w.iter().any(|z| !z.is_finite()) {
                return None;
            }
            let g = self.gradient_from(&w);
            let step = self.hessian_from(&w).lu().solve(&(-g))?;
            let len = step.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let damp = if len > 1.0 { 1.0 / len } else { 1.0 };
            for (z, d) in s.iter_mut().zip(step.iter()) {
                *z += d * damp;
            }
            if len <= NEWTON_STEP_TOL {
                let w = self.summands(logc, &s);
                return (self.residual(&w) <= GRADIENT_TOL).then_some(s);
            }
        }
        None
    }

    pub(crate) fn critical_point(&self, logc: &[f64], s: &[C], lt: f64) -> CriticalPoint {
        let w = self.summands(logc, s);
        let h = self.hessian_from(&w);
        let det = h.determinant();
        let sv = h.singular_values();
        let (lo, hi) = (sv.min(), sv.max());
        CriticalPoint {
            y: s.iter().map(|z| z.exp()).collect(),
            valuation: s.iter().map(|z| z.re / lt).collect(),
            hessian_det: det,
            nondegenerate: hi > 0.0 && lo > HESSIAN_TOL * hi,
            residual: self.residual(&w),
        }
    }

    pub(crate) fn starts(&self, lt: f64) -> Vec<Vec<C>> {
        let mut mags = vec![self.center.clone()];
        let stride = self.spread.len().div_ceil(MAX_MAGNITUDE_STARTS - 1).max(1);
        mags.extend(self.spread.iter().step_by(stride).cloned());
        let root = |k: usize| 2.0 * PI * k as f64 / 6.0;
        let phases: Vec<Vec<f64>> = if self.dim <= FULL_PHASE_GRID_DIM {
            (0..self.dim).map(|_| (0..6).map(root)).multi_cartesian_product().collect()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x6c61_7572_656e_74);
            (0..SAMPLED_PHASES).map(|_| (0..self.dim).map(|_| root(rng.random_range(0..6))).collect()).collect()
        };
        let phases = if phases.is_empty() { vec![Vec::new()] } else { phases };
        let mut out: Vec<Vec<C>> = mags
            .iter()
            .flat_map(|u| phases.iter().map(move |p| u.iter().zip(p).map(|(&uk, &pk)| C::new(uk * lt, pk)).collect()))
            .collect();
        // Some critical points sit well outside the region at moderate T.
        let mut rng = ChaCha8Rng::seed_from_u64(0x7363_6174_7465_72);
        for _ in 0..RANDOM_STARTS {
            out.push(
                self.center
                    .iter()
                    .zip(&self.bounds)
                    .map(|(&c, (lo, hi))| {
                        let reach = RANDOM_REACH + (hi - lo) * lt.abs();
                        C::new(c * lt + rng.random_range(-reach..=reach), rng.random_range(-PI..PI))
                    })
                    .collect(),
            );
        }
        out
    }

    /// Isolated critical points of `Σ e^{⟨v_i,s⟩ + logc_i}` from the start
    /// grid, deduplicated and canonically sorted.
    pub fn critical_points(&self, logc: &[f64], lt: f64) -> Vec<CriticalPoint> {
        let mut found: Vec<Vec<C>> = Vec::new();
        for s in self.starts(lt) {
            let Some(s) = self.newton(logc, s, 80, lt) else { continue };
            let y: Vec<C> = s.iter().map(|z| z.exp()).collect();
            if !found.iter().any(|f| same_root(&f.iter().map(|z| z.exp()).collect::<Vec<_>>(), &y)) {
                found.push(s);
            }
        }
        // A singular candidate outside the box sits on a branch running off
        // to toric infinity and is not an isolated critical point.
        let margin = 4.0 / lt.abs();
        let mut out: Vec<CriticalPoint> = found
            .iter()
            .map(|s| self.critical_point(logc, s, lt))
            .filter(|p| {
                p.nondegenerate
                    || p.valuation.iter().zip(&self.bounds).all(|(u, (lo, hi))| *u >= lo - margin && *u <= hi + margin)
            })
            .collect();
        out.sort_by(canonical_order);
        out
    }
}

fn log_coords(y: &[C]) -> Result<Vec<C>> {
    y.iter().map(|z| if *z == C::zero() || !z.is_finite() { Err(Error::Degenerate) } else { Ok(z.ln()) }).collect()
}

pub fn cohomology_rank(flag: &FlagType) -> u64 {
    let fact = |k: usize| (1..=k as u64).product::<u64>();
    fact(flag.n()) / flag.block_sizes().into_iter().map(fact).product::<u64>()
}

fn same_root(a: &[C], b: &[C]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).norm() <= DEDUPE_TOL * x.norm().max(y.norm()))
}

fn canonical_order(a: &CriticalPoint, b: &CriticalPoint) -> Ordering {
    let key = |p: &CriticalPoint| -> Vec<i64> {
        let v = p.valuation.iter().map(|u| (u * 1e6).round() as i64);
        let ph = p.y.iter().map(|z| {
            let arg = z.arg();
            let arg = if arg <= -PI + 1e-9 { PI } else { arg };
            (arg * 1e6).round() as i64
        });
        v.chain(ph).collect()
    };
    key(a).cmp(&key(b))
}

/// All isolated critical points found from the start grid, deduplicated and
/// canonically sorted. An empty list means Newton failed from every start.
pub fn critical_points(pot: &LaurentPotential, lambda: &[f64], t: f64) -> Result<Vec<CriticalPoint>> {
    pot.check(lambda, t)?;
    Ok(pot.system(lambda).critical_points(&pot.log_coefficients(lambda, t), t.ln()))
}

/// `(nondegenerate, det)` of the logarithmic Hessian at a critical `y`.
pub fn hessian_nondegenerate(pot: &LaurentPotential, lambda: &[f64], t: f64, y: &[C]) -> Result<(bool, C)> {
    pot.check(lambda, t)?;
    let logc = pot.log_coefficients(lambda, t);
    let s = log_coords(y)?;
    let w = pot.sys.summands(&logc, &s);
    let res = pot.sys.residual(&w);
    if res > 1e-8 {
        return Err(Error::NotCritical(res));
    }
    let p = pot.sys.critical_point(&logc, &s, t.ln());
    Ok((p.nondegenerate, p.hessian_det))
}

/// Tracks the critical point `y` found at `t0` down to each `ε` and fits the
/// slope of `log|y_k|` against `log ε`.
pub fn critical_valuation(pot: &LaurentPotential, lambda: &[f64], t0: f64, y: &[C]) -> Result<ValuationEstimate> {
    pot.check(lambda, t0)?;
    let mut s = log_coords(y)?;
    let mut lt = t0.ln();
    let mut samples = Vec::new();
    for eps in VALUATION_EPS {
        let target = eps.ln();
        if target > lt {
            return Err(Error::OutOfRange(format!("start T = {t0} is below ε = {eps}")));
        }
        while lt > target {
            let mut h = (lt - target).min(0.05);
            loop {
                match track_step(pot, lambda, &s, lt, h) {
                    Some(next) => {
                        s = next;
                        lt -= h;
                        break;
                    }
                    None if h > 1e-6 => h /= 2.0,
                    None => return Err(Error::BranchLost(lt.exp())),
                }
            }
        }
        samples.push((target, s.iter().map(|z| z.re).collect::<Vec<f64>>()));
    }
    Ok(fit_slopes(&samples))
}

/// Euler predictor along `ds/dlog T` followed by Newton correction; rejects
/// corrections that move further than the predictor step suggests.
fn track_step(pot: &LaurentPotential, lambda: &[f64], s: &[C], lt: f64, h: f64) -> Option<Vec<C>> {
    let logc: Vec<f64> = pot.terms.iter().map(|t| -t.tau_at(lambda) * lt).collect();
    let w = pot.sys.summands(&logc, s);
    let mut dg = DVector::<C>::zeros(pot.dim);
    for (term, wi) in pot.terms.iter().zip(&w) {
        let tau = term.tau_at(lambda);
        for (k, &a) in term.v.iter().enumerate() {
            dg[k] -= wi * (a as f64 * tau);
        }
    }
    let ds = pot.sys.hessian_from(&w).lu().solve(&(-dg))?;
    let guess: Vec<C> = s.iter().zip(ds.iter()).map(|(z, d)| z - d * h).collect();
    let new_logc: Vec<f64> = pot.terms.iter().map(|t| -t.tau_at(lambda) * (lt - h)).collect();
    let next = pot.sys.newton(&new_logc, guess.clone(), 30, lt - h)?;
    let drift = next.iter().zip(&guess).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    (drift < 0.1).then_some(next)
}

fn fit_slopes(samples: &[(f64, Vec<f64>)]) -> ValuationEstimate {
    let m = samples.len() as f64;
    let xbar = samples.iter().map(|(x, _)| x).sum::<f64>() / m;
    let sxx: f64 = samples.iter().map(|(x, _)| (x - xbar).powi(2)).sum();
    let dim = samples[0].1.len();
    let mut u = Vec::with_capacity(dim);
    let mut residual = 0.0f64;
    for k in 0..dim {
        let ybar = samples.iter().map(|(_, y)| y[k]).sum::<f64>() / m;
        let slope = samples.iter().map(|(x, y)| (x - xbar) * (y[k] - ybar)).sum::<f64>() / sxx;
        for (x, y) in samples {
            residual = residual.max((y[k] - ybar - slope * (x - xbar)).abs());
        }
        u.push(slope);
    }
    ValuationEstimate { u, residual }
}

/// Minimizer of the potential over the positive real orthant, found by
/// damped Newton with backtracking on the convex function of `log y`.
pub fn positive_real_minimum(pot: &LaurentPotential, lambda: &[f64], t: f64) -> Result<CriticalPoint> {
    pot.check(lambda, t)?;
    let start: Vec<f64> = pot.system(lambda).center.iter().map(|u| u * t.ln()).collect();
    let s = minimize_real(pot, lambda, t, start)?;
    let logc = pot.log_coefficients(lambda, t);
    let s: Vec<C> = s.iter().map(|&x| C::new(x, 0.0)).collect();
    Ok(pot.sys.critical_point(&logc, &s, t.ln()))
}

fn minimize_real(pot: &LaurentPotential, lambda: &[f64], t: f64, mut s: Vec<f64>) -> Result<Vec<f64>> {
    let logc = pot.log_coefficients(lambda, t);
    let value = |s: &[f64]| -> f64 {
        pot.terms
            .iter()
            .zip(&logc)
            .map(|(term, c)| (term.v.iter().zip(s).map(|(&a, x)| a as f64 * x).sum::<f64>() + c).exp())
            .sum()
    };
    let complex = |s: &[f64]| s.iter().map(|&x| C::new(x, 0.0)).collect::<Vec<C>>();
    for _ in 0..500 {
        let w = pot.sys.summands(&logc, &complex(&s));
        if pot.sys.residual(&w) <= 1e-14 {
            return Ok(s);
        }
        let g = DVector::from_iterator(pot.dim, pot.sys.gradient_from(&w).iter().map(|z| z.re));
        let h = DMatrix::from_iterator(pot.dim, pot.dim, pot.sys.hessian_from(&w).iter().map(|z| z.re));
        let step = h
            .cholesky()
            .map(|c| c.solve(&(-&g)))
            .ok_or_else(|| Error::LineSearch("Hessian is not positive definite".into()))?;
        if step.amax() <= 1e-12 && pot.sys.residual(&w) <= GRADIENT_TOL {
            return Ok(s);
        }
        let f0 = value(&s);
        let slope = g.dot(&step);
        // Below this decrement the value cannot resolve the decrease; take
        // the plain Newton step.
        if -slope <= 1e-10 * f0 {
            s.iter_mut().zip(step.iter()).for_each(|(x, d)| *x += d);
            continue;
        }
        let mut a = 1.0;
        loop {
            let trial: Vec<f64> = s.iter().zip(step.iter()).map(|(x, d)| x + a * d).collect();
            let f1 = value(&trial);
            if f1.is_finite() && f1 <= f0 + 1e-4 * a * slope.min(0.0) {
                s = trial;
                break;
            }
            a /= 2.0;
            if a < 1e-12 {
                let res = pot.sys.residual(&w);
                if res <= GRADIENT_TOL {
                    return Ok(s);
                }
                return Err(Error::LineSearch(format!("no decrease at residual {res:e}")));
            }
        }
    }
    Err(Error::NoConvergence("positive real minimization".into()))
}

/// Valuation of the positive real minimum, from minimizing afresh at each ε.
pub fn positive_real_valuation(pot: &LaurentPotential, lambda: &[f64]) -> Result<ValuationEstimate> {
    pot.check(lambda, VALUATION_EPS[0])?;
    let mut s: Vec<f64> = pot.system(lambda).center.iter().map(|u| u * VALUATION_EPS[0].ln()).collect();
    let mut samples = Vec::new();
    for eps in VALUATION_EPS {
        pot.check(lambda, eps)?;
        let scaled: Vec<f64> = match samples.last() {
            Some((prev, _)) => s.iter().map(|x| x * eps.ln() / prev).collect(),
            None => s.clone(),
        };
        s = minimize_real(pot, lambda, eps, scaled)?;
        samples.push((eps.ln(), s.clone()));
    }
    Ok(fit_slopes(&samples))
}

/// Critical points found against the rank of the cohomology ring.
pub fn count_vs_cohomology(flag: &FlagType, pot: &LaurentPotential, lambda: &[f64], t: f64) -> Result<(usize, u64)> {
    Ok((critical_points(pot, lambda, t)?.len(), cohomology_rank(flag)))
}

#[derive(Clone, Debug, Serialize)]
pub struct TermReport {
    pub v: Vec<i64>,
    pub tau: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriticalReport {
    pub y_re: Vec<f64>,
    pub y_im: Vec<f64>,
    pub valuation: Vec<f64>,
    pub nondegenerate: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PotentialReport {
    pub terms: Vec<TermReport>,
    pub critical: Vec<CriticalReport>,
}

pub fn report(pot: &LaurentPotential, points: &[CriticalPoint]) -> PotentialReport {
    PotentialReport {
        terms: pot
            .terms
            .iter()
            .map(|t| TermReport { v: t.v.clone(), tau: rational::format_rational(&t.tau) })
            .collect(),
        critical: points
            .iter()
            .map(|p| CriticalReport {
                y_re: p.y.iter().map(|z| z.re).collect(),
                y_im: p.y.iter().map(|z| z.im).collect(),
                valuation: p.valuation.clone(),
                nondegenerate: p.nondegenerate,
            })
            .collect(),
    }
}

/// Whether `u` satisfies every facet inequality of the source polytope with
/// margin `margin`, using λ as given.
pub fn strictly_inside(pot: &LaurentPotential, lambda: &[f64], u: &[f64], margin: f64) -> bool {
    pot.terms.iter().all(|t| {
        let l = t.v.iter().zip(u).map(|(&a, x)| a as f64 * x).sum::<f64>() - t.tau_at(lambda);
        l > margin
    })
}

impl LaurentPotential {
    /// Smallest facet value `ℓ_i(u)`.
    pub fn facet_margin(&self, lambda: &[f64], u: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| t.v.iter().zip(u).map(|(&a, x)| a as f64 * x).sum::<f64>() - t.tau_at(lambda))
            .fold(f64::INFINITY, f64::min)
    }

    /// Term exponents `ℓ_i(u)` at the source λ, exactly.
    pub fn exponents_at(&self, u: &[Q]) -> Vec<Q> {
        self.terms
            .iter()
            .map(|t| t.v.iter().zip(u).map(|(&a, x)| x * Q::from_integer(a.into())).sum::<Q>() - &t.tau)
            .collect()
    }

    pub fn all_exponents_positive(&self, u: &[Q]) -> bool {
        self.exponents_at(u).iter().all(|e| e.is_positive())
    }
}
