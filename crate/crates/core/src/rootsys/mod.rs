//! Exact root systems.
//!
//! Weights (roots included) live in fundamental-weight coordinates and points
//! of `R^n`/`C^n` in simple-coroot coordinates. The pairing of a weight with a
//! point is then a plain dot product and the coroot lattice is `Z^n`.

mod cartan;
mod weyl;

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

pub use cartan::{parse_type_spec, Irreducible};
pub use weyl::{preserves_pairing, AffineElement, WeylElement};

use crate::error::{Error, Result};
use crate::linalg::{dot_i, q_to_f64, rational_rank, solve_rational, IntMatrix, Q};

/// Default cap on Weyl group enumeration, `|W(F4)|`.
pub const DEFAULT_WEYL_CAP: u128 = 1152;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Root {
    pub weight_coords: Vec<i64>,
    pub coroot_coords: Vec<i64>,
    /// Coordinates in the basis of simple roots.
    pub root_coords: Vec<i64>,
    #[serde(with = "crate::serde_q")]
    pub length_sq: Q,
}

impl Root {
    pub fn height(&self) -> i64 {
        self.root_coords.iter().sum()
    }

    pub fn is_positive(&self) -> bool {
        self.root_coords.iter().all(|&c| c >= 0)
    }

    pub fn negated(&self) -> Root {
        Root {
            weight_coords: self.weight_coords.iter().map(|x| -x).collect(),
            coroot_coords: self.coroot_coords.iter().map(|x| -x).collect(),
            root_coords: self.root_coords.iter().map(|x| -x).collect(),
            length_sq: self.length_sq,
        }
    }

    pub fn pair_q(&self, x: &[Q]) -> Q {
        crate::linalg::dot_q(&self.weight_coords, x)
    }

    pub fn pair_c(&self, x: &[Complex64]) -> Complex64 {
        crate::linalg::dot_c(&self.weight_coords, x)
    }
}

#[derive(Clone, Debug)]
pub struct RootSystem {
    pub type_spec: String,
    pub rank: usize,
    pub components: Vec<Irreducible>,
    /// Index ranges of each component inside `0..rank`.
    pub component_ranges: Vec<std::ops::Range<usize>>,
    pub cartan: IntMatrix,
    pub gram: Vec<Vec<Q>>,
    pub simple_lengths: Vec<Q>,
    pub roots: Vec<Root>,
    pub simple_root_indices: Vec<usize>,
}

impl RootSystem {
    pub fn build(type_spec: &str) -> Result<Self> {
        let components = parse_type_spec(type_spec)?;
        let rank: usize = components.iter().map(|c| c.rank).sum();
        let mut cartan = IntMatrix::identity(rank);
        let mut simple_lengths = vec![Q::zero(); rank];
        let mut component_ranges = Vec::new();
        let mut offset = 0;
        for comp in &components {
            let block = comp.cartan();
            for (i, row) in block.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    cartan.set(offset + i, offset + j, v);
                }
            }
            let lengths = block_lengths(&block);
            simple_lengths[offset..offset + comp.rank].copy_from_slice(&lengths);
            component_ranges.push(offset..offset + comp.rank);
            offset += comp.rank;
        }

        // <alpha_j^v, alpha_k^v> = 2 C_jk / |alpha_k|^2
        let gram = (0..rank)
            .map(|j| {
                (0..rank)
                    .map(|k| Q::from_integer(2 * cartan.get(j, k)) / simple_lengths[k])
                    .collect()
            })
            .collect();

        let roots = enumerate_roots(&cartan, &simple_lengths)?;
        let simple_root_indices = (0..rank)
            .map(|k| {
                roots
                    .iter()
                    .position(|r| r.root_coords.iter().enumerate().all(|(i, &c)| c == (i == k) as i64))
                    .expect("simple root present")
            })
            .collect();

        Ok(RootSystem {
            type_spec: type_spec.trim().to_string(),
            rank,
            components,
            component_ranges,
            cartan,
            gram,
            simple_lengths,
            roots,
            simple_root_indices,
        })
    }

    pub fn simple_root(&self, k: usize) -> &Root {
        &self.roots[self.simple_root_indices[k]]
    }

    pub fn positive_roots(&self) -> impl Iterator<Item = &Root> {
        self.roots.iter().filter(|r| r.is_positive())
    }

    /// The highest root of each irreducible component.
    pub fn highest_roots(&self) -> Vec<&Root> {
        self.component_ranges
            .iter()
            .map(|range| {
                self.roots
                    .iter()
                    .filter(|r| {
                        r.is_positive()
                            && r.root_coords
                                .iter()
                                .enumerate()
                                .all(|(i, &c)| range.contains(&i) || c == 0)
                    })
                    .max_by_key(|r| r.height())
                    .expect("component has roots")
            })
            .collect()
    }

    /// Estimated `|W|` from the classification.
    pub fn weyl_order_estimate(&self) -> u128 {
        self.components.iter().map(|c| c.weyl_order()).product()
    }

    /// Weight coordinates of `omega_k` (a unit vector).
    pub fn fundamental_weight(&self, k: usize) -> Vec<i64> {
        (0..self.rank).map(|i| (i == k) as i64).collect()
    }

    /// `rho^v` in coroot coordinates: the point pairing to 1 with every simple root.
    pub fn rho_check(&self) -> Vec<Q> {
        let a: Vec<Vec<Q>> = (0..self.rank)
            .map(|k| (0..self.rank).map(|j| Q::from_integer(self.cartan.get(j, k))).collect())
            .collect();
        solve_rational(&a, &vec![Q::one(); self.rank]).expect("Cartan matrix is invertible")
    }

    /// `sum_k omega_k` written in coroot coordinates, i.e. `G^{-1} 1`.
    pub fn weight_sum_point(&self) -> Vec<Q> {
        solve_rational(&self.gram, &vec![Q::one(); self.rank]).expect("Gram matrix is invertible")
    }

    /// Linear functional defining the reduction order on weights: `rho^v`
    /// cleared of denominators. Strictly positive on every positive root.
    pub fn height_functional(&self) -> Vec<i64> {
        let rc = self.rho_check();
        let l = rc.iter().fold(1i64, |acc, q| acc.lcm(q.denom()));
        rc.iter().map(|q| (q * Q::from_integer(l)).to_integer()).collect()
    }

    pub fn simple_reflection(&self, i: usize) -> WeylElement {
        WeylElement::reflection(self.simple_root(i))
    }

    /// `s_i(lambda) = lambda - lambda_i alpha_i`, in weight coordinates.
    pub fn reflect_weight_simple(&self, i: usize, lambda: &[i64]) -> Vec<i64> {
        let li = lambda[i];
        (0..self.rank).map(|j| lambda[j] - li * self.cartan.get(j, i)).collect()
    }

    /// Complex reflection `rho_{v,ell}` on a rational point.
    pub fn reflect(&self, v: &Root, ell: i64, x: &[Q]) -> Result<Vec<Q>> {
        if x.len() != self.rank {
            return Err(Error::DimensionMismatch { expected: self.rank, got: x.len() });
        }
        let p = v.pair_q(x) - Q::from_integer(ell);
        Ok(x.iter()
            .zip(&v.coroot_coords)
            .map(|(xi, &c)| xi - p * Q::from_integer(c))
            .collect())
    }

    pub fn reflect_c(&self, v: &Root, ell: f64, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.rank {
            return Err(Error::DimensionMismatch { expected: self.rank, got: x.len() });
        }
        let p = v.pair_c(x) - ell;
        Ok(x.iter()
            .zip(&v.coroot_coords)
            .map(|(xi, &c)| xi - p * c as f64)
            .collect())
    }

    pub fn weyl_group_elements(&self) -> Result<Vec<WeylElement>> {
        self.weyl_group_elements_capped(DEFAULT_WEYL_CAP)
    }

    /// Breadth-first closure from the simple reflections.
    pub fn weyl_group_elements_capped(&self, cap: u128) -> Result<Vec<WeylElement>> {
        let estimated = self.weyl_order_estimate();
        if estimated > cap {
            return Err(Error::CapExceeded { what: "Weyl group enumeration", estimated, cap });
        }
        let gens: Vec<WeylElement> = (0..self.rank).map(|i| self.simple_reflection(i)).collect();
        let id = WeylElement::identity(self.rank);
        let mut seen: HashSet<IntMatrix> = HashSet::new();
        seen.insert(id.coroot.clone());
        let mut out = vec![id.clone()];
        let mut queue = VecDeque::from([id]);
        while let Some(g) = queue.pop_front() {
            for s in &gens {
                let h = g.compose(s);
                if seen.insert(h.coroot.clone()) {
                    out.push(h.clone());
                    queue.push_back(h);
                }
            }
        }
        Ok(out)
    }

    /// The Weyl orbit of an integral weight, in breadth-first order from `lambda`.
    pub fn orbit(&self, lambda: &[i64]) -> Vec<Vec<i64>> {
        let mut seen: HashSet<Vec<i64>> = HashSet::from([lambda.to_vec()]);
        let mut out = vec![lambda.to_vec()];
        let mut queue = VecDeque::from([lambda.to_vec()]);
        while let Some(mu) = queue.pop_front() {
            for i in 0..self.rank {
                if mu[i] == 0 {
                    continue;
                }
                let nu = self.reflect_weight_simple(i, &mu);
                if seen.insert(nu.clone()) {
                    out.push(nu.clone());
                    queue.push_back(nu);
                }
            }
        }
        out
    }

    /// Returns the dominant element of the orbit of `lambda` and a group element taking `lambda` to it.
    pub fn dominant_rep(&self, lambda: &[i64]) -> (Vec<i64>, WeylElement) {
        let mut mu = lambda.to_vec();
        let mut w = WeylElement::identity(self.rank);
        while let Some(i) = mu.iter().position(|&c| c < 0) {
            mu = self.reflect_weight_simple(i, &mu);
            w = self.simple_reflection(i).compose(&w);
        }
        (mu, w)
    }

    /// `<u, v>` for two roots, computed from the Gram matrix of simple coroots.
    pub fn inner_product(&self, u: &Root, v: &Root) -> Q {
        let mut s = Q::zero();
        for j in 0..self.rank {
            for k in 0..self.rank {
                s += self.gram[j][k] * Q::from_integer(u.coroot_coords[j] * v.coroot_coords[k]);
            }
        }
        s * u.length_sq * v.length_sq / Q::from_integer(4)
    }

    pub fn verify_axioms(&self) -> AxiomReport {
        verify_axioms(self)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "type": self.type_spec,
            "rank": self.rank,
            "cartan": self.cartan.rows(),
            "gram": self.gram.iter().map(|r| r.iter().map(crate::serde_q::fmt_q).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "roots": self.roots.iter().map(|r| serde_json::json!({
                "weight_coords": r.weight_coords,
                "coroot_coords": r.coroot_coords,
                "length_sq": crate::serde_q::fmt_q(&r.length_sq),
            })).collect::<Vec<_>>(),
        })
    }

    pub fn weight_sum_point_f64(&self) -> Vec<f64> {
        self.weight_sum_point().iter().map(q_to_f64).collect()
    }
}

/// Squared lengths of the simple roots of one irreducible block, short roots normalised to 2.
fn block_lengths(block: &[Vec<i64>]) -> Vec<Q> {
    let n = block.len();
    let mut len: Vec<Option<Q>> = vec![None; n];
    len[0] = Some(Q::one());
    let mut queue = VecDeque::from([0usize]);
    while let Some(j) = queue.pop_front() {
        for k in 0..n {
            if k != j && block[j][k] != 0 && len[k].is_none() {
                // |a_j|^2 C_jk = |a_k|^2 C_kj
                len[k] = Some(len[j].unwrap() * Q::new(block[j][k], block[k][j]));
                queue.push_back(k);
            }
        }
    }
    let len: Vec<Q> = len.into_iter().map(|l| l.expect("connected Dynkin diagram")).collect();
    let min = len.iter().copied().fold(len[0], |a, b| if b < a { b } else { a });
    len.iter().map(|l| l / min * Q::from_integer(2)).collect()
}

fn enumerate_roots(cartan: &IntMatrix, lengths: &[Q]) -> Result<Vec<Root>> {
    let n = cartan.dim();
    let weight_of = |c: &[i64]| -> Vec<i64> {
        (0..n).map(|i| (0..n).map(|k| cartan.get(i, k) * c[k]).sum()).collect()
    };
    let mut seen: BTreeSet<Vec<i64>> = BTreeSet::new();
    let mut queue = VecDeque::new();
    for k in 0..n {
        let e: Vec<i64> = (0..n).map(|i| (i == k) as i64).collect();
        seen.insert(e.clone());
        queue.push_back(e);
    }
    while let Some(c) = queue.pop_front() {
        let lambda = weight_of(&c);
        for i in 0..n {
            let mut d = c.clone();
            d[i] -= lambda[i];
            if seen.insert(d.clone()) {
                queue.push_back(d);
            }
        }
    }
    let mut roots = Vec::with_capacity(seen.len());
    for c in seen {
        let mut len_sq = Q::zero();
        for j in 0..n {
            for k in 0..n {
                // (alpha_j, alpha_k) = |alpha_j|^2 C_jk / 2
                len_sq += lengths[j] * Q::from_integer(cartan.get(j, k) * c[j] * c[k]) / Q::from_integer(2);
            }
        }
        let mut coroot = Vec::with_capacity(n);
        for k in 0..n {
            let q = Q::from_integer(c[k]) * lengths[k] / len_sq;
            if !q.is_integer() {
                return Err(Error::Degenerate(format!("non-integral coroot for root {c:?}")));
            }
            coroot.push(q.to_integer());
        }
        roots.push(Root { weight_coords: weight_of(&c), coroot_coords: coroot, root_coords: c, length_sq: len_sq });
    }
    roots.sort_by_key(|r| (!r.is_positive(), r.height().abs(), r.root_coords.clone()));
    Ok(roots)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomResult {
    pub passed: bool,
    pub witness: Option<String>,
}

impl AxiomResult {
    fn pass() -> Self {
        AxiomResult { passed: true, witness: None }
    }
    fn fail(w: String) -> Self {
        AxiomResult { passed: false, witness: Some(w) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomReport {
    pub span: AxiomResult,
    pub multiples: AxiomResult,
    pub reflection_closure: AxiomResult,
    pub integrality: AxiomResult,
    pub duality: AxiomResult,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.span.passed
            && self.multiples.passed
            && self.reflection_closure.passed
            && self.integrality.passed
            && self.duality.passed
    }
}

pub fn verify_axioms(rs: &RootSystem) -> AxiomReport {
    let n = rs.rank;
    let as_q = |v: &[i64]| v.iter().map(|&x| Q::from_integer(x)).collect::<Vec<Q>>();

    let span = {
        let all: Vec<Vec<Q>> = rs.roots.iter().map(|r| as_q(&r.weight_coords)).collect();
        let simple: Vec<Vec<Q>> = rs
            .simple_root_indices
            .iter()
            .filter_map(|&i| rs.roots.get(i))
            .map(|r| as_q(&r.weight_coords))
            .collect();
        let r_all = rational_rank(&all);
        let r_simple = rational_rank(&simple);
        if r_all == n && r_simple == n && simple.len() == n {
            AxiomResult::pass()
        } else {
            AxiomResult::fail(format!("rank of roots {r_all}, rank of simple roots {r_simple}, expected {n}"))
        }
    };

    let multiples = (|| {
        for (i, v) in rs.roots.iter().enumerate() {
            for (j, w) in rs.roots.iter().enumerate().skip(i + 1) {
                let pair = [as_q(&v.weight_coords), as_q(&w.weight_coords)];
                if rational_rank(&pair) < 2 {
                    let neg: Vec<i64> = v.weight_coords.iter().map(|x| -x).collect();
                    if w.weight_coords != neg {
                        return AxiomResult::fail(format!("roots {i} and {j} are parallel but not opposite"));
                    }
                }
            }
        }
        AxiomResult::pass()
    })();

    let set: HashSet<&Vec<i64>> = rs.roots.iter().map(|r| &r.weight_coords).collect();
    let reflection_closure = (|| {
        for (i, v) in rs.roots.iter().enumerate() {
            for (j, w) in rs.roots.iter().enumerate() {
                let k = dot_i(&w.weight_coords, &v.coroot_coords);
                let image: Vec<i64> = w.weight_coords.iter().zip(&v.weight_coords).map(|(a, b)| a - k * b).collect();
                if !set.contains(&image) {
                    return AxiomResult::fail(format!("reflection in root {i} maps root {j} to {image:?}, not a root"));
                }
            }
        }
        AxiomResult::pass()
    })();

    let integrality = (|| {
        for (i, v) in rs.roots.iter().enumerate() {
            let vv = rs.inner_product(v, v);
            if vv != v.length_sq {
                return AxiomResult::fail(format!("root {i}: Gram length {vv} disagrees with stored {}", v.length_sq));
            }
            for (j, w) in rs.roots.iter().enumerate() {
                let q = Q::from_integer(2) * rs.inner_product(v, w) / vv;
                if !q.is_integer() {
                    return AxiomResult::fail(format!("2<v,w>/<v,v> = {q} for roots {i}, {j}"));
                }
                if q.to_integer() != dot_i(&w.weight_coords, &v.coroot_coords) {
                    return AxiomResult::fail(format!("pairing of roots {i}, {j} inconsistent with Gram data"));
                }
            }
        }
        AxiomResult::pass()
    })();

    // <omega_j, alpha_k^v> = delta_jk: the pairing table of simple coroots with
    // simple roots must be the Cartan matrix, and must agree with the Gram data.
    let duality = (|| {
        for j in 0..n {
            for k in 0..n {
                let Some(ak) = rs.simple_root_indices.get(k).and_then(|&i| rs.roots.get(i)) else {
                    return AxiomResult::fail(format!("simple root {k} missing"));
                };
                let e_j: Vec<i64> = (0..n).map(|i| (i == j) as i64).collect();
                let pairing = dot_i(&ak.weight_coords, &e_j);
                if pairing != rs.cartan.get(j, k) {
                    return AxiomResult::fail(format!("pairing ({j},{k}) = {pairing} differs from Cartan entry"));
                }
                let via_gram = rs.gram[j][k] * ak.length_sq / Q::from_integer(2);
                if via_gram != Q::from_integer(pairing) {
                    return AxiomResult::fail(format!("Gram entry ({j},{k}) inconsistent with Cartan matrix"));
                }
            }
        }
        AxiomResult::pass()
    })();

    AxiomReport { span, multiples, reflection_closure, integrality, duality }
}

/// Orbit tables for all fundamental weights.
pub fn fundamental_orbits(rs: &RootSystem) -> Vec<Vec<Vec<i64>>> {
    (0..rs.rank).map(|k| rs.orbit(&rs.fundamental_weight(k))).collect()
}

/// Orbit-size lookup keyed by dominant weight.
pub fn orbit_sizes(rs: &RootSystem, weights: &[Vec<i64>]) -> HashMap<Vec<i64>, usize> {
    weights.iter().map(|w| (w.clone(), rs.orbit(w).len())).collect()
}
