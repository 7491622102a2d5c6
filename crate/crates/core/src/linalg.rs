//! Small dense linear algebra over `i64`, rationals and `Complex64`.
//!
//! Everything here works on matrices of rank at most eight or so; no attempt is
//! made at blocking or vectorisation.

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

pub type Q = Ratio<i64>;

/// Square integer matrix stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IntMatrix {
    n: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0; n * n];
        for i in 0..n {
            data[i * n + i] = 1;
        }
        IntMatrix { n, data }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            assert_eq!(r.len(), n, "non-square matrix");
            data.extend_from_slice(r);
        }
        IntMatrix { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.n + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut out = IntMatrix { n, data: vec![0; n * n] };
        for i in 0..n {
            for j in 0..n {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        let n = self.n;
        debug_assert_eq!(n, other.n);
        let mut out = IntMatrix { n, data: vec![0; n * n] };
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[i64]) -> Vec<i64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    pub fn apply_q(&self, v: &[Q]) -> Vec<Q> {
        (0..self.n)
            .map(|i| {
                (0..self.n).fold(Q::zero(), |acc, j| acc + Q::from_integer(self.get(i, j)) * v[j])
            })
            .collect()
    }

    pub fn apply_c(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| {
                (0..self.n).fold(Complex64::zero(), |acc, j| acc + v[j] * self.get(i, j) as f64)
            })
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        *self == IntMatrix::identity(self.n)
    }
}

pub fn dot_i(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dot_q(a: &[i64], b: &[Q]) -> Q {
    a.iter()
        .zip(b)
        .fold(Q::zero(), |acc, (x, y)| acc + Q::from_integer(*x) * y)
}

pub fn dot_c(a: &[i64], b: &[Complex64]) -> Complex64 {
    a.iter()
        .zip(b)
        .fold(Complex64::zero(), |acc, (x, y)| acc + y * (*x as f64))
}

/// Solves `a x = b` exactly. Returns `None` for singular `a`.
pub fn solve_rational(a: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    let n = a.len();
    let mut m: Vec<Vec<Q>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(*rhs);
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let p = m[col][col];
        for j in col..=n {
            m[col][j] = m[col][j] / p;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col];
                for j in col..=n {
                    let v = m[col][j];
                    m[r][j] = m[r][j] - f * v;
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n]).collect())
}

pub fn rational_rank(rows: &[Vec<Q>]) -> usize {
    let mut m = rows.to_vec();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..cols {
        if let Some(p) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) {
            m.swap(rank, p);
            let pv = m[rank][col];
            for r in 0..m.len() {
                if r != rank && !m[r][col].is_zero() {
                    let f = m[r][col] / pv;
                    for j in col..cols {
                        let v = m[rank][j];
                        m[r][j] = m[r][j] - f * v;
                    }
                }
            }
            rank += 1;
            if rank == m.len() {
                break;
            }
        }
    }
    rank
}

pub fn q_to_f64(q: &Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// Dense complex square matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    pub n: usize,
    pub data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix { n, data: vec![Complex64::zero(); n * n] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// LU factorisation with partial pivoting. Returns the packed factors, the
    /// row permutation and the permutation sign, or `None` if a pivot is exactly zero.
    fn lu(&self) -> Option<(CMatrix, Vec<usize>, f64)> {
        let n = self.n;
        let mut a = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let p = (k..n)
                .max_by(|&x, &y| a.get(x, k).norm().total_cmp(&a.get(y, k).norm()))
                .unwrap();
            if a.get(p, k).norm() == 0.0 {
                return None;
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = a.get(k, k);
            for i in (k + 1)..n {
                let f = a.get(i, k) / pivot;
                a.set(i, k, f);
                for j in (k + 1)..n {
                    let v = a.get(i, j) - f * a.get(k, j);
                    a.set(i, j, v);
                }
            }
        }
        Some((a, perm, sign))
    }

    pub fn det(&self) -> Complex64 {
        match self.lu() {
            None => Complex64::zero(),
            Some((a, _, sign)) => (0..self.n).fold(Complex64::new(sign, 0.0), |acc, i| acc * a.get(i, i)),
        }
    }

    pub fn solve(&self, b: &[Complex64]) -> Option<Vec<Complex64>> {
        let (a, perm, _) = self.lu()?;
        Some(lu_solve(&a, &perm, b))
    }

    pub fn inverse(&self) -> Option<CMatrix> {
        let n = self.n;
        let (a, perm, _) = self.lu()?;
        let mut inv = CMatrix::zeros(n);
        for j in 0..n {
            let mut e = vec![Complex64::zero(); n];
            e[j] = Complex64::one();
            let col = lu_solve(&a, &perm, &e);
            for i in 0..n {
                inv.set(i, j, col[i]);
            }
        }
        Some(inv)
    }

    /// Infinity-norm condition number; `f64::INFINITY` when singular.
    pub fn condition(&self) -> f64 {
        match self.inverse() {
            Some(inv) => self.norm_inf() * inv.norm_inf(),
            None => f64::INFINITY,
        }
    }
}

fn lu_solve(a: &CMatrix, perm: &[usize], b: &[Complex64]) -> Vec<Complex64> {
    let n = a.n;
    let mut y: Vec<Complex64> = perm.iter().map(|&p| b[p]).collect();
    for i in 0..n {
        for k in 0..i {
            let v = y[k];
            y[i] -= a.get(i, k) * v;
        }
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            let v = y[k];
            y[i] -= a.get(i, k) * v;
        }
        y[i] /= a.get(i, i);
    }
    y
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn norm_inf(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_solve_small() {
        let a = vec![
            vec![Q::from_integer(2), Q::from_integer(-1)],
            vec![Q::from_integer(-1), Q::from_integer(2)],
        ];
        let x = solve_rational(&a, &[Q::one(), Q::one()]).unwrap();
        assert_eq!(x, vec![Q::one(), Q::one()]);
    }

    #[test]
    fn complex_det_and_inverse() {
        let mut m = CMatrix::zeros(2);
        m.set(0, 0, Complex64::new(1.0, 1.0));
        m.set(0, 1, Complex64::new(2.0, 0.0));
        m.set(1, 0, Complex64::new(0.0, 3.0));
        m.set(1, 1, Complex64::new(4.0, 0.0));
        let det = m.det();
        let expected = Complex64::new(1.0, 1.0) * 4.0 - Complex64::new(0.0, 6.0);
        assert!((det - expected).norm() < 1e-12);
        let inv = m.inverse().unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let s: Complex64 = (0..2).map(|k| m.get(i, k) * inv.get(k, j)).sum();
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((s - e).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn rank_detects_dependence() {
        let rows = vec![
            vec![Q::from_integer(1), Q::from_integer(2)],
            vec![Q::from_integer(2), Q::from_integer(4)],
        ];
        assert_eq!(rational_rank(&rows), 1);
    }
}
