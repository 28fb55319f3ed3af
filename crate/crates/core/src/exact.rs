//! Small exact linear algebra over `i128` rationals plus a fixed-width bit set.

use num_rational::Ratio;
use num_traits::{One, Zero};

pub(crate) type R = Ratio<i128>;

/// Reduced row echelon form of an integer matrix.
pub(crate) struct Rref {
    pub rows: Vec<Vec<R>>,
    pub pivots: Vec<usize>,
    pub ncols: usize,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn free_cols(&self) -> Vec<usize> {
        (0..self.ncols).filter(|c| !self.pivots.contains(c)).collect()
    }

    /// Null-space vector with entry 1 at free column `j` and 0 at the other
    /// free columns.
    pub fn null_vector(&self, j: usize) -> Vec<R> {
        let mut w = vec![R::zero(); self.ncols];
        w[j] = R::one();
        for (r, &p) in self.pivots.iter().enumerate() {
            w[p] = -self.rows[r][j];
        }
        w
    }
}

pub(crate) fn rref<'a, I>(rows: I, ncols: usize) -> Rref
where
    I: IntoIterator<Item = &'a [i64]>,
{
    let mut m: Vec<Vec<R>> =
        rows.into_iter().map(|r| r.iter().map(|&x| R::from_integer(x as i128)).collect()).collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(p) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for x in m[row].iter_mut() {
            *x *= inv;
        }
        for r in 0..m.len() {
            if r != row && !m[r][col].is_zero() {
                let f = m[r][col];
                for c in col..ncols {
                    let delta = f * m[row][c];
                    m[r][c] -= delta;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == m.len() {
            break;
        }
    }
    m.truncate(row);
    Rref { rows: m, pivots, ncols }
}

pub(crate) fn rank<'a, I>(rows: I, ncols: usize) -> usize
where
    I: IntoIterator<Item = &'a [i64]>,
{
    rref(rows, ncols).rank()
}

/// Determinant of a square integer matrix by fraction-free elimination.
pub(crate) fn det(mut m: Vec<Vec<i128>>) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n {
        if m[k][k] == 0 {
            let Some(p) = (k + 1..n).find(|&r| m[r][k] != 0) else {
                return 0;
            };
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct Bits(Vec<u64>);

impl Bits {
    pub fn empty(len: usize) -> Self {
        Bits(vec![0; len.div_ceil(64)])
    }

    pub fn full(len: usize) -> Self {
        let mut b = Bits::empty(len);
        for i in 0..len {
            b.insert(i);
        }
        b
    }

    pub fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    pub fn and_assign(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a &= b;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    #[cfg(test)]
    pub fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(wi, &w)| (0..64).filter(move |b| w >> b & 1 == 1).map(move |b| wi * 64 + b))
    }

    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_nullspace() {
        let rows = [vec![1i64, -1, 0], vec![0, 1, -1], vec![1, 0, -1]];
        let r = rref(rows.iter().map(|r| r.as_slice()), 3);
        assert_eq!(r.rank(), 2);
        assert_eq!(r.free_cols(), vec![2]);
        let w = r.null_vector(2);
        for row in &rows {
            let dot: R = row.iter().zip(&w).map(|(&a, b)| R::from_integer(a as i128) * b).sum();
            assert!(dot.is_zero());
        }
    }

    #[test]
    fn determinants() {
        assert_eq!(det(vec![vec![2, 1], vec![1, 1]]), 1);
        assert_eq!(det(vec![vec![0, 1], vec![1, 0]]), -1);
        assert_eq!(det(vec![vec![1, 2], vec![2, 4]]), 0);
        assert_eq!(det(vec![vec![2, 0, 1], vec![1, 3, 2], vec![1, 1, 2]]), 6);
    }

    #[test]
    fn bit_ops() {
        let mut a = Bits::empty(130);
        a.insert(3);
        a.insert(129);
        let b = Bits::full(130);
        assert_eq!(a.and(&b).iter().collect::<Vec<_>>(), vec![3, 129]);
        assert_eq!(a.count(), 2);
        assert!(a.contains(129) && !a.contains(128));
    }
}
