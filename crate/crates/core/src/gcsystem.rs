//! The Gelfand-Cetlin system on a Hermitian adjoint orbit: sampling the orbit,
//! the eigenvalue map, and arrow-matrix completion back into a fiber.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::flagcombi::{free_boxes, FlagType, LadderBox};
use crate::gcpoly::{contains_f64, Entry, GCPolytope};
use crate::rational;

pub const CONSTRUCTION_TOL: f64 = 1e-12;
pub const SPECTRUM_TOL: f64 = 1e-9;
pub const ROUND_TRIP_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(DMatrix<Complex64>);

impl HermitianMatrix {
    /// Symmetrizes `m`; fails if it is further than the construction tolerance
    /// from Hermitian.
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
        }
        let adj = m.adjoint();
        let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let gap = (&m - &adj).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if gap > CONSTRUCTION_TOL * scale {
            return Err(Error::Eigen(format!("matrix is not Hermitian (defect {gap:e})")));
        }
        Ok(HermitianMatrix((m + adj) * Complex64::new(0.5, 0.0)))
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        HermitianMatrix(DMatrix::from_diagonal(&DVector::from_iterator(
            d.len(),
            d.iter().map(|&x| Complex64::new(x, 0.0)),
        )))
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn size(&self) -> usize {
        self.0.nrows()
    }

    /// Upper-left `k × k` block.
    pub fn leading_block(&self, k: usize) -> DMatrix<Complex64> {
        self.0.view((0, 0), (k, k)).into_owned()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigenvalues_desc(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitPoint {
    pub matrix: HermitianMatrix,
    pub lambda: Vec<f64>,
}

/// Eigenvalues in descending order.
pub fn eigenvalues_desc(m: &DMatrix<Complex64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// Eigen-decomposition with eigenvalues descending and matching eigenvector columns.
fn eigen_desc(m: &DMatrix<Complex64>) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let e = SymmetricEigen::new(m.clone());
    if e.eigenvalues.iter().any(|x| !x.is_finite()) {
        return Err(Error::Eigen("non-finite eigenvalue".into()));
    }
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| e.eigenvalues[b].total_cmp(&e.eigenvalues[a]));
    let values = order.iter().map(|&i| e.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), m.nrows(), |r, c| e.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

fn check_decreasing(lambda: &[f64]) -> Result<()> {
    if lambda.windows(2).any(|w| w[0] < w[1]) || lambda.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidLambda(format!("{lambda:?} is not weakly decreasing")));
    }
    Ok(())
}

/// Haar-random unitary from the QR factorization of a complex Gaussian matrix.
pub fn haar_unitary(n: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let z = DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * scale, im * scale)
    });
    let qr = z.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DVector::from_iterator(
        n,
        (0..n).map(|i| {
            let d = r[(i, i)];
            if d.norm() == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                d / d.norm()
            }
        }),
    );
    q * DMatrix::from_diagonal(&phases)
}

pub fn random_orbit_point(lambda: &[f64], seed: u64) -> Result<OrbitPoint> {
    check_decreasing(lambda)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = haar_unitary(lambda.len(), &mut rng);
    let d = HermitianMatrix::from_real_diagonal(lambda);
    let m = &u * d.matrix() * u.adjoint();
    Ok(OrbitPoint { matrix: HermitianMatrix::new(m)?, lambda: lambda.to_vec() })
}

/// Eigenvalues of every leading block, rows `k = 1..=n`.
pub fn leading_spectra(x: &HermitianMatrix) -> Vec<Vec<f64>> {
    (1..=x.size()).map(|k| eigenvalues_desc(&x.leading_block(k))).collect()
}

/// The eigenvalue map in the default coordinate order of the flag.
pub fn gc_map(x: &OrbitPoint, flag: &FlagType) -> Result<Vec<f64>> {
    gc_map_with_coords(x, flag, &free_boxes(flag))
}

pub fn gc_map_with_coords(x: &OrbitPoint, flag: &FlagType, coords: &[LadderBox]) -> Result<Vec<f64>> {
    let n = flag.n();
    if x.matrix.size() != n || x.lambda.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x.matrix.size() });
    }
    let scale = x.lambda.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for i in 1..n {
        if flag.block_of(i) == flag.block_of(i + 1) && (x.lambda[i - 1] - x.lambda[i]).abs() > SPECTRUM_TOL * scale {
            return Err(Error::InvalidLambda(format!("λ is not constant on the blocks of {flag}")));
        }
    }
    let spectra = leading_spectra(&x.matrix);
    if spectra.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Eigen("non-finite eigenvalue".into()));
    }
    Ok(coords.iter().map(|b| spectra[b.k - 1][b.i - 1]).collect())
}

/// Bordered matrix `[[diag(b), x], [x*, c]]` with spectrum `a`.
pub fn arrow_completion(a: &[f64], b: &[f64]) -> Result<HermitianMatrix> {
    let k = b.len();
    if a.len() != k + 1 {
        return Err(Error::DimensionMismatch { expected: k + 1, got: a.len() });
    }
    let scale = a.iter().chain(b).fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = CONSTRUCTION_TOL * scale;
    for j in 0..k {
        if b[j] > a[j] + tol {
            return Err(Error::Interlacing {
                position: j + 1,
                detail: format!("b_{} = {} > a_{} = {}", j + 1, b[j], j + 1, a[j]),
            });
        }
        if b[j] < a[j + 1] - tol {
            return Err(Error::Interlacing {
                position: j + 1,
                detail: format!("b_{} = {} < a_{} = {}", j + 1, b[j], j + 2, a[j + 1]),
            });
        }
    }

    // pair each b with an equal unused a; those couplings vanish
    let mut used_a = vec![false; k + 1];
    let mut live_b = Vec::new();
    for j in 0..k {
        match (0..=k).find(|&i| !used_a[i] && (a[i] - b[j]).abs() <= tol) {
            Some(i) => used_a[i] = true,
            None => live_b.push(j),
        }
    }
    let live_a: Vec<usize> = (0..=k).filter(|&i| !used_a[i]).collect();

    let mut x = vec![0.0; k];
    for &j in &live_b {
        let num: f64 = live_a.iter().map(|&i| b[j] - a[i]).product();
        let den: f64 = live_b.iter().filter(|&&l| l != j).map(|&l| b[j] - b[l]).product();
        x[j] = (-num / den).max(0.0).sqrt();
    }
    let corner = a.iter().sum::<f64>() - b.iter().sum::<f64>();
    let mut m = DMatrix::from_element(k + 1, k + 1, Complex64::new(0.0, 0.0));
    for j in 0..k {
        m[(j, j)] = Complex64::new(b[j], 0.0);
        m[(j, k)] = Complex64::new(x[j], 0.0);
        m[(k, j)] = Complex64::new(x[j], 0.0);
    }
    m[(k, k)] = Complex64::new(corner, 0.0);
    HermitianMatrix::new(m)
}

/// Full pattern rows `k = 1..=n` for a real coordinate vector.
pub fn pattern_rows(poly: &GCPolytope, u: &[f64]) -> Vec<Vec<f64>> {
    let lambda: Vec<f64> = poly.lambda.iter().map(rational::to_f64).collect();
    (1..=poly.n())
        .map(|k| {
            (1..=k)
                .map(|i| match poly.entry(k, i) {
                    Entry::Coord(c) => u[c],
                    Entry::Fixed(j) => lambda[j - 1],
                })
                .collect()
        })
        .collect()
}

/// A Hermitian matrix whose leading-block spectra are the pattern of `u`.
pub fn fiber_point(poly: &GCPolytope, u: &[f64]) -> Result<OrbitPoint> {
    if !contains_f64(poly, u, CONSTRUCTION_TOL)? {
        return Err(Error::OutsidePolytope);
    }
    let rows = pattern_rows(poly, u);
    let n = poly.n();
    let mut x = DMatrix::from_element(1, 1, Complex64::new(rows[0][0], 0.0));
    for k in 1..n {
        let arrow = arrow_completion(&rows[k], &rows[k - 1])?;
        let (_, vectors) = eigen_desc(&x)?;
        let coupling_local = arrow.matrix().view((0, k), (k, 1)).into_owned();
        let coupling = &vectors * coupling_local;
        let mut next = DMatrix::from_element(k + 1, k + 1, Complex64::new(0.0, 0.0));
        next.view_mut((0, 0), (k, k)).copy_from(&x);
        next.view_mut((0, k), (k, 1)).copy_from(&coupling);
        next.view_mut((k, 0), (1, k)).copy_from(&coupling.adjoint());
        next[(k, k)] = arrow.matrix()[(k, k)];
        x = next;
    }
    Ok(OrbitPoint { matrix: HermitianMatrix::new(x)?, lambda: rows[n - 1].clone() })
}

/// Uniform point of Δ_λ by rejection from the coordinate bounding box.
pub fn sample_uniform(poly: &GCPolytope, rng: &mut impl Rng) -> Vec<f64> {
    let n = poly.n();
    let lambda: Vec<f64> = poly.lambda.iter().map(rational::to_f64).collect();
    let bounds: Vec<(f64, f64)> = poly.coords.iter().map(|b| (lambda[b.i + n - b.k - 1], lambda[b.i - 1])).collect();
    loop {
        let u: Vec<f64> = bounds.iter().map(|&(lo, hi)| lo + (hi - lo) * rng.random::<f64>()).collect();
        if poly.facets.iter().all(|f| f.eval_f64(&u) > 0.0) {
            return u;
        }
    }
}
