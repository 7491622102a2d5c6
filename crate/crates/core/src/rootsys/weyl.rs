//! Weyl group elements and the affine Weyl group `Q^v x| W`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Root;
use crate::error::{Error, Result};
use crate::linalg::{dot_i, IntMatrix, Q};

/// A Weyl group element as a pair of contragredient integer matrices.
///
/// `weight` acts on fundamental-weight coordinates, `coroot` on simple-coroot
/// coordinates. `coroot` is the inverse transpose of `weight`, so the
/// weight/point pairing is preserved.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WeylElement {
    pub weight: IntMatrix,
    pub coroot: IntMatrix,
}

impl WeylElement {
    pub fn identity(n: usize) -> Self {
        WeylElement { weight: IntMatrix::identity(n), coroot: IntMatrix::identity(n) }
    }

    pub fn rank(&self) -> usize {
        self.weight.dim()
    }

    /// Linear reflection `rho_{v,0}`.
    pub fn reflection(root: &Root) -> Self {
        let n = root.weight_coords.len();
        let mut weight = IntMatrix::identity(n);
        let mut coroot = IntMatrix::identity(n);
        for i in 0..n {
            for j in 0..n {
                weight.set(i, j, weight.get(i, j) - root.weight_coords[i] * root.coroot_coords[j]);
                coroot.set(i, j, coroot.get(i, j) - root.coroot_coords[i] * root.weight_coords[j]);
            }
        }
        WeylElement { weight, coroot }
    }

    pub fn compose(&self, other: &WeylElement) -> WeylElement {
        WeylElement {
            weight: self.weight.mul(&other.weight),
            coroot: self.coroot.mul(&other.coroot),
        }
    }

    pub fn inverse(&self) -> WeylElement {
        WeylElement { weight: self.coroot.transpose(), coroot: self.weight.transpose() }
    }

    pub fn is_identity(&self) -> bool {
        self.coroot.is_identity()
    }

    pub fn act_weight(&self, lambda: &[i64]) -> Vec<i64> {
        self.weight.apply(lambda)
    }

    pub fn act_point(&self, x: &[i64]) -> Vec<i64> {
        self.coroot.apply(x)
    }
}

/// Element `(t, w)` of the affine Weyl group acting by `x -> w x + t` on
/// simple-coroot coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AffineElement {
    pub t: Vec<i64>,
    pub w: WeylElement,
}

impl AffineElement {
    pub fn identity(n: usize) -> Self {
        AffineElement { t: vec![0; n], w: WeylElement::identity(n) }
    }

    pub fn translation(t: Vec<i64>) -> Self {
        let n = t.len();
        AffineElement { t, w: WeylElement::identity(n) }
    }

    pub fn linear(w: WeylElement) -> Self {
        AffineElement { t: vec![0; w.rank()], w }
    }

    /// Affine reflection `rho_{v,ell}`, i.e. translation by `ell v^v` after `rho_{v,0}`.
    pub fn reflection(root: &Root, ell: i64) -> Self {
        AffineElement {
            t: root.coroot_coords.iter().map(|c| ell * c).collect(),
            w: WeylElement::reflection(root),
        }
    }

    pub fn rank(&self) -> usize {
        self.t.len()
    }

    pub fn is_identity(&self) -> bool {
        self.t.iter().all(|&x| x == 0) && self.w.is_identity()
    }

    /// `(t1, w1)(t2, w2) = (t1 + w1 t2, w1 w2)`.
    pub fn compose(&self, other: &AffineElement) -> AffineElement {
        let wt = self.w.act_point(&other.t);
        AffineElement {
            t: self.t.iter().zip(&wt).map(|(a, b)| a + b).collect(),
            w: self.w.compose(&other.w),
        }
    }

    pub fn inverse(&self) -> AffineElement {
        let winv = self.w.inverse();
        let t = winv.act_point(&self.t).into_iter().map(|x| -x).collect();
        AffineElement { t, w: winv }
    }

    pub fn apply_q(&self, x: &[Q]) -> Result<Vec<Q>> {
        check_dim(self.rank(), x.len())?;
        Ok(self
            .w
            .coroot
            .apply_q(x)
            .into_iter()
            .zip(&self.t)
            .map(|(a, &b)| a + Q::from_integer(b))
            .collect())
    }

    pub fn apply_c(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        check_dim(self.rank(), x.len())?;
        Ok(self
            .w
            .coroot
            .apply_c(x)
            .into_iter()
            .zip(&self.t)
            .map(|(a, &b)| a + b as f64)
            .collect())
    }

    pub fn apply_i(&self, x: &[i64]) -> Vec<i64> {
        self.w
            .act_point(x)
            .into_iter()
            .zip(&self.t)
            .map(|(a, b)| a + b)
            .collect()
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// True when `w` maps the pairing `dot(lambda, x)` to itself for all the given test vectors.
pub fn preserves_pairing(w: &WeylElement, lambdas: &[Vec<i64>], xs: &[Vec<i64>]) -> bool {
    lambdas.iter().all(|l| {
        let wl = w.act_weight(l);
        xs.iter().all(|x| dot_i(&wl, &w.act_point(x)) == dot_i(l, x))
    })
}
