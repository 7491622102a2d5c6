//! Exact synthesis of the Chebyshev-like maps `T_{Phi,d}`.
//!
//! The ring of Weyl-invariant exponential sums has the orbit sums `m_lambda`
//! (lambda dominant) as a Z-basis, and the products `prod_j m_{omega_j}^{e_j}`
//! are unitriangular in that basis with respect to a height order. Component
//! `k` of `T_{Phi,d}` is obtained by eliminating `m_{d omega_k}` against those
//! products, so every coefficient is computed (not rounded) as an integer.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::continuation::{CVec, HolomorphicMap};
use crate::error::{Error, Result};
use crate::gencos::GeneralizedCosine;
use crate::linalg::{dot_i, CMatrix};
use crate::mpeval;
use crate::rootsys::RootSystem;

/// Integer combination of orbit sums, keyed by dominant weight.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OrbitSumCombo {
    pub terms: BTreeMap<Vec<i64>, BigInt>,
}

impl OrbitSumCombo {
    pub fn zero() -> Self {
        OrbitSumCombo::default()
    }

    pub fn single(weight: Vec<i64>, coeff: impl Into<BigInt>) -> Self {
        let mut c = OrbitSumCombo::zero();
        c.add_term(weight, coeff.into());
        c
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, weight: Vec<i64>, coeff: BigInt) {
        use std::collections::btree_map::Entry;
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(weight) {
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &OrbitSumCombo, scale: &BigInt) {
        for (w, c) in &other.terms {
            self.add_term(w.clone(), c * scale);
        }
    }

    pub fn coeff(&self, weight: &[i64]) -> BigInt {
        self.terms.get(weight).cloned().unwrap_or_else(BigInt::zero)
    }
}

/// Reduction order: height `dot(lambda, h)` first, then lexicographic.
pub fn reduction_cmp(height: &[i64], a: &[i64], b: &[i64]) -> Ordering {
    dot_i(a, height).cmp(&dot_i(b, height)).then_with(|| a.cmp(b))
}

/// Orbit-sum arithmetic for one root system; caches orbits and monomial expansions.
pub struct InvariantRing<'a> {
    rs: &'a RootSystem,
    height: Vec<i64>,
    orbits: HashMap<Vec<i64>, Vec<Vec<i64>>>,
    memo: HashMap<Vec<u32>, OrbitSumCombo>,
}

impl<'a> InvariantRing<'a> {
    pub fn new(rs: &'a RootSystem) -> Self {
        InvariantRing { rs, height: rs.height_functional(), orbits: HashMap::new(), memo: HashMap::new() }
    }

    pub fn height(&self) -> &[i64] {
        &self.height
    }

    fn orbit(&mut self, lambda: &[i64]) -> &Vec<Vec<i64>> {
        let rs = self.rs;
        self.orbits.entry(lambda.to_vec()).or_insert_with(|| rs.orbit(lambda))
    }

    fn is_dominant(w: &[i64]) -> bool {
        w.iter().all(|&c| c >= 0)
    }

    /// `m_lambda * m_mu`: count the pairs of orbit elements whose sum is dominant.
    fn basis_product(&mut self, lambda: &[i64], mu: &[i64]) -> BTreeMap<Vec<i64>, u64> {
        let a = self.orbit(lambda).clone();
        let b = self.orbit(mu).clone();
        let mut out: BTreeMap<Vec<i64>, u64> = BTreeMap::new();
        for x in &a {
            for y in &b {
                let s: Vec<i64> = x.iter().zip(y).map(|(p, q)| p + q).collect();
                if Self::is_dominant(&s) {
                    *out.entry(s).or_insert(0) += 1;
                }
            }
        }
        out
    }

    pub fn product(&mut self, a: &OrbitSumCombo, b: &OrbitSumCombo) -> OrbitSumCombo {
        let mut out = OrbitSumCombo::zero();
        for (la, ca) in &a.terms {
            for (lb, cb) in &b.terms {
                let coeff = ca * cb;
                for (w, mult) in self.basis_product(la, lb) {
                    out.add_term(w, &coeff * BigInt::from(mult));
                }
            }
        }
        out
    }

    /// `prod_j m_{omega_j}^{e_j}` as a combination of orbit sums.
    pub fn monomial_expand(&mut self, e: &[u32]) -> OrbitSumCombo {
        if let Some(c) = self.memo.get(e) {
            return c.clone();
        }
        let result = match e.iter().position(|&x| x > 0) {
            None => OrbitSumCombo::single(vec![0; self.rs.rank], 1),
            Some(j) => {
                let mut smaller = e.to_vec();
                smaller[j] -= 1;
                let base = self.monomial_expand(&smaller);
                let omega = OrbitSumCombo::single(self.rs.fundamental_weight(j), 1);
                self.product(&base, &omega)
            }
        };
        self.memo.insert(e.to_vec(), result.clone());
        result
    }

    fn leading(&self, c: &OrbitSumCombo) -> Option<(Vec<i64>, BigInt)> {
        c.terms
            .iter()
            .max_by(|(a, _), (b, _)| reduction_cmp(&self.height, a, b))
            .map(|(w, k)| (w.clone(), k.clone()))
    }

    /// Rewrites an invariant combination as a polynomial in `X_j = m_{omega_j}`.
    pub fn decompose(&mut self, target: &OrbitSumCombo) -> Result<Polynomial> {
        self.decompose_traced(target).map(|(p, _)| p)
    }

    /// As [`decompose`](Self::decompose), also returning for every elimination step the
    /// emitted weight and the largest weight the step introduced (if any).
    pub fn decompose_traced(&mut self, target: &OrbitSumCombo) -> Result<(Polynomial, Vec<(Vec<i64>, Option<Vec<i64>>)>)> {
        const GUARD: usize = 1_000_000;
        let n = self.rs.rank;
        let mut rest = target.clone();
        let mut poly = Polynomial::zero(n);
        let mut trace = Vec::new();
        let mut steps = 0;
        while let Some((mu, c)) = self.leading(&rest) {
            steps += 1;
            if steps > GUARD {
                return Err(Error::ReductionGuard(GUARD));
            }
            let e: Vec<u32> = mu.iter().map(|&x| x as u32).collect();
            let expansion = self.monomial_expand(&e);
            debug_assert_eq!(expansion.coeff(&mu), BigInt::one());
            let introduced = expansion
                .terms
                .keys()
                .filter(|w| **w != mu)
                .max_by(|a, b| reduction_cmp(&self.height, a, b))
                .cloned();
            trace.push((mu.clone(), introduced));
            poly.add_term(e, c.clone());
            rest.add_scaled(&expansion, &(-c));
        }
        Ok((poly, trace))
    }
}

/// Sparse polynomial with integer coefficients, keyed by exponent vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    pub n: usize,
    pub terms: BTreeMap<Vec<u32>, BigInt>,
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Polynomial { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: impl Into<BigInt>) -> Self {
        let mut p = Polynomial::zero(n);
        p.add_term(vec![0; n], c.into());
        p
    }

    pub fn variable(n: usize, j: usize) -> Self {
        let mut e = vec![0; n];
        e[j] = 1;
        let mut p = Polynomial::zero(n);
        p.add_term(e, BigInt::one());
        p
    }

    pub fn from_terms(n: usize, terms: &[(&[u32], i64)]) -> Self {
        let mut p = Polynomial::zero(n);
        for (e, c) in terms {
            p.add_term(e.to_vec(), BigInt::from(*c));
        }
        p
    }

    pub fn add_term(&mut self, e: Vec<u32>, c: BigInt) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, k: &BigInt) -> Polynomial {
        let mut out = Polynomial::zero(self.n);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * k);
        }
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(self.n);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn derivative(&self, j: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.n);
        for (e, c) in &self.terms {
            if e[j] > 0 {
                let mut f = e.clone();
                f[j] -= 1;
                out.add_term(f, c * BigInt::from(e[j]));
            }
        }
        out
    }

    pub fn eval(&self, x: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::zero();
        for (e, c) in &self.terms {
            let mut m = Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0);
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    m *= xi.powu(k);
                }
            }
            acc += m;
        }
        acc
    }

    pub fn eval_exact(&self, x: &[BigInt]) -> BigInt {
        let mut acc = BigInt::zero();
        for (e, c) in &self.terms {
            let mut m = c.clone();
            for (xi, &k) in x.iter().zip(e) {
                m *= num_traits::pow(xi.clone(), k as usize);
            }
            acc += m;
        }
        acc
    }

    /// Terms sorted by descending reduction order.
    pub fn sorted_terms(&self, height: &[i64]) -> Vec<(&Vec<u32>, &BigInt)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        let key = |e: &Vec<u32>| e.iter().map(|&x| x as i64).collect::<Vec<i64>>();
        v.sort_by(|(a, _), (b, _)| reduction_cmp(height, &key(b), &key(a)));
        v
    }

    pub fn display(&self, height: &[i64]) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        for (i, (e, c)) in self.sorted_terms(height).into_iter().enumerate() {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(j, &k)| if k == 1 { format!("X{}", j + 1) } else { format!("X{}^{}", j + 1, k) })
                .collect();
            let abs = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            if i == 0 {
                if c.is_negative() {
                    s.push('-');
                }
            } else {
                s.push_str(&format!(" {sign} "));
            }
            if mono.is_empty() {
                s.push_str(&abs.to_string());
            } else {
                if !abs.is_one() {
                    s.push_str(&abs.to_string());
                    s.push('*');
                }
                s.push_str(&mono.join("*"));
            }
        }
        s
    }
}

/// `n` integer polynomials in `n` variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolynomialMap {
    pub type_spec: String,
    pub d: u64,
    /// Height functional used to order terms on output.
    pub height: Vec<i64>,
    pub components: Vec<Polynomial>,
}

impl PolynomialMap {
    pub fn rank(&self) -> usize {
        self.components.len()
    }

    pub fn identity(rs: &RootSystem) -> Self {
        PolynomialMap {
            type_spec: rs.type_spec.clone(),
            d: 1,
            height: rs.height_functional(),
            components: (0..rs.rank).map(|j| Polynomial::variable(rs.rank, j)).collect(),
        }
    }

    pub fn eval(&self, x: &[Complex64]) -> Result<CVec> {
        if x.len() != self.rank() {
            return Err(Error::DimensionMismatch { expected: self.rank(), got: x.len() });
        }
        Ok(self.components.iter().map(|p| p.eval(x)).collect())
    }

    pub fn eval_exact(&self, x: &[BigInt]) -> Result<Vec<BigInt>> {
        if x.len() != self.rank() {
            return Err(Error::DimensionMismatch { expected: self.rank(), got: x.len() });
        }
        Ok(self.components.iter().map(|p| p.eval_exact(x)).collect())
    }

    pub fn term_count(&self) -> usize {
        self.components.iter().map(|p| p.terms.len()).sum()
    }

    /// Matrix of partial derivatives, entry `(k, j) = d P_k / d X_j`.
    pub fn jacobian_polys(&self) -> Vec<Vec<Polynomial>> {
        self.components
            .iter()
            .map(|p| (0..self.rank()).map(|j| p.derivative(j)).collect())
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let comps: Vec<serde_json::Value> = self
            .components
            .iter()
            .map(|p| {
                serde_json::Value::Array(
                    p.sorted_terms(&self.height)
                        .into_iter()
                        .map(|(e, c)| {
                            let coeff: serde_json::Value =
                                serde_json::from_str(&c.to_string()).expect("integer literal");
                            serde_json::json!({ "exponents": e, "coeff": coeff })
                        })
                        .collect(),
                )
            })
            .collect();
        serde_json::json!({ "type_spec": self.type_spec, "d": self.d, "components": comps })
    }

    pub fn from_json(v: &serde_json::Value, rs: &RootSystem) -> Result<Self> {
        let bad = |m: &str| Error::Invalid(format!("polynomial map JSON: {m}"));
        let d = v["d"].as_u64().ok_or_else(|| bad("missing d"))?;
        let type_spec = v["type_spec"].as_str().ok_or_else(|| bad("missing type_spec"))?.to_string();
        let comps = v["components"].as_array().ok_or_else(|| bad("missing components"))?;
        let n = rs.rank;
        let mut components = Vec::new();
        for comp in comps {
            let mut p = Polynomial::zero(n);
            for term in comp.as_array().ok_or_else(|| bad("component not an array"))? {
                let e: Vec<u32> = term["exponents"]
                    .as_array()
                    .ok_or_else(|| bad("exponents"))?
                    .iter()
                    .map(|x| x.as_u64().map(|k| k as u32).ok_or_else(|| bad("exponent")))
                    .collect::<Result<_>>()?;
                if e.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: e.len() });
                }
                let c: BigInt = term["coeff"].to_string().parse().map_err(|_| bad("coeff"))?;
                p.add_term(e, c);
            }
            components.push(p);
        }
        if components.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: components.len() });
        }
        Ok(PolynomialMap { type_spec, d, height: rs.height_functional(), components })
    }
}

/// Builds `T_{Phi,d}`; `d = 1` gives the identity map.
pub fn build_cheb_map(rs: &RootSystem, d: u64) -> Result<PolynomialMap> {
    if d == 0 {
        return Err(Error::Invalid("d must be at least 1".into()));
    }
    let mut ring = InvariantRing::new(rs);
    let mut components = Vec::with_capacity(rs.rank);
    for k in 0..rs.rank {
        let target = OrbitSumCombo::single(rs.fundamental_weight(k).iter().map(|&x| x * d as i64).collect(), 1);
        components.push(ring.decompose(&target)?);
    }
    Ok(PolynomialMap { type_spec: rs.type_spec.clone(), d, height: rs.height_functional(), components })
}

pub const DEFAULT_TERM_CAP: usize = 1_000_000;

/// Exact composition `P o Q`.
pub fn compose_poly_maps(p: &PolynomialMap, q: &PolynomialMap, term_cap: usize) -> Result<PolynomialMap> {
    if p.rank() != q.rank() {
        return Err(Error::DimensionMismatch { expected: p.rank(), got: q.rank() });
    }
    let n = p.rank();
    let mut powers: HashMap<(usize, u32), Polynomial> = HashMap::new();
    let power = |j: usize, k: u32, powers: &mut HashMap<(usize, u32), Polynomial>| -> Polynomial {
        if let Some(x) = powers.get(&(j, k)) {
            return x.clone();
        }
        let mut acc = Polynomial::constant(n, 1);
        for i in 1..=k {
            if let Some(x) = powers.get(&(j, i)) {
                acc = x.clone();
                continue;
            }
            acc = acc.mul(&q.components[j]);
            powers.insert((j, i), acc.clone());
        }
        acc
    };
    let mut components = Vec::with_capacity(n);
    for comp in &p.components {
        let mut out = Polynomial::zero(n);
        for (e, c) in &comp.terms {
            let mut term = Polynomial::constant(n, c.clone());
            for (j, &k) in e.iter().enumerate() {
                if k > 0 {
                    term = term.mul(&power(j, k, &mut powers));
                }
            }
            out = out.add(&term);
            if out.terms.len() > term_cap {
                return Err(Error::CapExceeded {
                    what: "polynomial composition terms",
                    estimated: out.terms.len() as u128,
                    cap: term_cap as u128,
                });
            }
        }
        components.push(out);
    }
    Ok(PolynomialMap { type_spec: p.type_spec.clone(), d: p.d * q.d, height: p.height.clone(), components })
}

/// A polynomial map with its symbolic Jacobian, usable for Newton continuation.
#[derive(Clone, Debug)]
pub struct PolyMapEval {
    pub map: PolynomialMap,
    pub jac: Vec<Vec<Polynomial>>,
}

impl PolyMapEval {
    pub fn new(map: PolynomialMap) -> Self {
        let jac = map.jacobian_polys();
        PolyMapEval { map, jac }
    }

    pub fn jacobian_det(&self, x: &[Complex64]) -> Complex64 {
        HolomorphicMap::jacobian(self, x).det()
    }
}

impl HolomorphicMap for PolyMapEval {
    fn dim(&self) -> usize {
        self.map.rank()
    }
    fn value(&self, y: &[Complex64]) -> CVec {
        self.map.components.iter().map(|p| p.eval(y)).collect()
    }
    fn jacobian(&self, y: &[Complex64]) -> CMatrix {
        let n = self.dim();
        let mut m = CMatrix::zeros(n);
        for k in 0..n {
            for j in 0..n {
                m.set(k, j, self.jac[k][j].eval(y));
            }
        }
        m
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FunctionalEquationReport {
    pub type_spec: String,
    pub d: u64,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    /// Largest `|T(Psi(x))_k - Psi(dx)_k|`, evaluated in multiprecision.
    pub max_residual: f64,
    pub precision_bits: usize,
    /// The same residual evaluated in `f64`.
    pub max_abs_residual_f64: f64,
    /// `f64` residual divided by `max(1, |Psi(dx)_k|)`.
    pub max_normalized_residual_f64: f64,
    pub passed: bool,
}

/// Checks `T(Psi(x)) = Psi(d x)` at `samples` seeded points with coordinates in
/// `[-1, 1] + i[-1, 1]`.
pub fn verify_functional_equation(
    rs: &RootSystem,
    d: u64,
    p: &PolynomialMap,
    samples: usize,
    tol: f64,
    seed: u64,
) -> FunctionalEquationReport {
    let psi = GeneralizedCosine::new(rs);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<CVec> = (0..samples)
        .map(|_| {
            (0..rs.rank)
                .map(|_| Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)))
                .collect()
        })
        .collect();
    let mut max_normalized = 0.0f64;
    let mut max_abs = 0.0f64;
    for x in &points {
        let lhs = p.eval(&psi.eval(x)).unwrap_or_else(|_| vec![Complex64::new(f64::NAN, 0.0); rs.rank]);
        let dx: CVec = x.iter().map(|z| z * d as f64).collect();
        let rhs = psi.eval(&dx);
        for (a, b) in lhs.iter().zip(&rhs) {
            let diff = (a - b).norm();
            max_abs = max_abs.max(diff);
            max_normalized = max_normalized.max(diff / b.norm().max(1.0));
        }
    }
    let valid = p.rank() == rs.rank && p.d == d;
    let max_residual = if valid {
        mpeval::functional_residual(rs, p, &points, mpeval::DEFAULT_PRECISION)
    } else {
        f64::INFINITY
    };
    FunctionalEquationReport {
        type_spec: rs.type_spec.clone(),
        d,
        samples,
        seed,
        tol,
        max_residual,
        precision_bits: mpeval::DEFAULT_PRECISION,
        max_abs_residual_f64: max_abs,
        max_normalized_residual_f64: max_normalized,
        passed: valid && max_residual <= tol,
    }
}
