//! High-precision evaluation of `Psi` and of integer polynomial maps, used to
//! measure functional-equation residuals in absolute terms even where `|Psi|`
//! is far beyond what `f64` resolves.

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_complex::Complex64;

use crate::chebmap::PolynomialMap;
use crate::rootsys::RootSystem;

const RM: RoundingMode = RoundingMode::ToEven;

/// Working precision in bits.
pub const DEFAULT_PRECISION: usize = 256;

#[derive(Clone, Debug)]
struct MpComplex {
    re: BigFloat,
    im: BigFloat,
}

struct Ctx {
    p: usize,
    cc: Consts,
    two_pi: BigFloat,
}

impl Ctx {
    fn new(p: usize) -> Self {
        let mut cc = Consts::new().expect("constant cache");
        let pi = cc.pi(p, RM);
        let two_pi = pi.mul(&BigFloat::from_f64(2.0, p), p, RM);
        Ctx { p, cc, two_pi }
    }

    fn zero(&self) -> MpComplex {
        MpComplex { re: BigFloat::from_f64(0.0, self.p), im: BigFloat::from_f64(0.0, self.p) }
    }

    fn from_c(&self, z: Complex64) -> MpComplex {
        MpComplex { re: BigFloat::from_f64(z.re, self.p), im: BigFloat::from_f64(z.im, self.p) }
    }

    fn add(&self, a: &MpComplex, b: &MpComplex) -> MpComplex {
        MpComplex { re: a.re.add(&b.re, self.p, RM), im: a.im.add(&b.im, self.p, RM) }
    }

    fn sub(&self, a: &MpComplex, b: &MpComplex) -> MpComplex {
        MpComplex { re: a.re.sub(&b.re, self.p, RM), im: a.im.sub(&b.im, self.p, RM) }
    }

    fn mul(&self, a: &MpComplex, b: &MpComplex) -> MpComplex {
        let p = self.p;
        let re = a.re.mul(&b.re, p, RM).sub(&a.im.mul(&b.im, p, RM), p, RM);
        let im = a.re.mul(&b.im, p, RM).add(&a.im.mul(&b.re, p, RM), p, RM);
        MpComplex { re, im }
    }

    fn scale(&self, a: &MpComplex, k: &BigFloat) -> MpComplex {
        MpComplex { re: a.re.mul(k, self.p, RM), im: a.im.mul(k, self.p, RM) }
    }

    fn int(&self, k: i64) -> BigFloat {
        BigFloat::from_f64(k as f64, self.p)
    }

    fn bigint(&mut self, k: &num_bigint::BigInt) -> BigFloat {
        BigFloat::parse(&k.to_string(), Radix::Dec, self.p, RM, &mut self.cc)
    }

    /// `exp(2 pi i z)`.
    fn e2pi(&mut self, z: &MpComplex) -> MpComplex {
        let p = self.p;
        let angle = z.re.mul(&self.two_pi, p, RM);
        let decay = z.im.mul(&self.two_pi, p, RM).neg().exp(p, RM, &mut self.cc);
        MpComplex {
            re: decay.mul(&angle.cos(p, RM, &mut self.cc), p, RM),
            im: decay.mul(&angle.sin(p, RM, &mut self.cc), p, RM),
        }
    }

    fn inverse(&self, z: &MpComplex) -> MpComplex {
        let p = self.p;
        let n2 = z.re.mul(&z.re, p, RM).add(&z.im.mul(&z.im, p, RM), p, RM);
        MpComplex { re: z.re.div(&n2, p, RM), im: z.im.neg().div(&n2, p, RM) }
    }

    /// `Psi(x)` via `e(<lambda, x>) = prod_i e(x_i)^{lambda_i}`.
    fn psi(&mut self, orbits: &[Vec<Vec<i64>>], x: &[MpComplex]) -> Vec<MpComplex> {
        let base: Vec<MpComplex> = x.iter().map(|xi| self.e2pi(xi)).collect();
        let inv: Vec<MpComplex> = base.iter().map(|b| self.inverse(b)).collect();
        let one = MpComplex { re: self.int(1), im: self.int(0) };
        orbits
            .iter()
            .map(|orbit| {
                let mut acc = self.zero();
                for lambda in orbit {
                    let mut term = one.clone();
                    for (i, &l) in lambda.iter().enumerate() {
                        let f = if l >= 0 { &base[i] } else { &inv[i] };
                        for _ in 0..l.unsigned_abs() {
                            term = self.mul(&term, f);
                        }
                    }
                    acc = self.add(&acc, &term);
                }
                acc
            })
            .collect()
    }

    fn poly_map(&mut self, p: &PolynomialMap, x: &[MpComplex]) -> Vec<MpComplex> {
        p.components
            .iter()
            .map(|comp| {
                let mut acc = self.zero();
                for (e, c) in &comp.terms {
                    let mut m = MpComplex { re: self.bigint(c), im: BigFloat::from_f64(0.0, self.p) };
                    for (xi, &k) in x.iter().zip(e) {
                        for _ in 0..k {
                            m = self.mul(&m, xi);
                        }
                    }
                    acc = self.add(&acc, &m);
                }
                acc
            })
            .collect()
    }

    fn abs_to_f64(&mut self, z: &MpComplex) -> f64 {
        let p = self.p;
        let n2 = z.re.mul(&z.re, p, RM).add(&z.im.mul(&z.im, p, RM), p, RM);
        let s = n2.format(Radix::Dec, RM, &mut self.cc).unwrap_or_else(|_| "NaN".into());
        parse_decimal(&s).sqrt()
    }
}

/// Parses astro-float's decimal rendering (`1.25e-3`, `-Inf`, ...).
fn parse_decimal(s: &str) -> f64 {
    s.trim().parse::<f64>().unwrap_or_else(|_| match s.trim() {
        "Inf" | "+Inf" => f64::INFINITY,
        _ => f64::NAN,
    })
}

/// Largest `|T(Psi(x))_k - Psi(d x)_k|` over the given points, evaluated with
/// `precision` bits; `x` is taken exactly as given.
pub fn functional_residual(rs: &RootSystem, p: &PolynomialMap, points: &[Vec<Complex64>], precision: usize) -> f64 {
    let orbits = crate::rootsys::fundamental_orbits(rs);
    let mut ctx = Ctx::new(precision);
    let d = ctx.int(p.d as i64);
    let mut worst = 0.0f64;
    for x in points {
        let xm: Vec<MpComplex> = x.iter().map(|z| ctx.from_c(*z)).collect();
        let dx: Vec<MpComplex> = xm.iter().map(|z| ctx.scale(z, &d)).collect();
        let lhs_in = ctx.psi(&orbits, &xm);
        let lhs = ctx.poly_map(p, &lhs_in);
        let rhs = ctx.psi(&orbits, &dx);
        for (a, b) in lhs.iter().zip(&rhs) {
            let diff = ctx.sub(a, b);
            let r = ctx.abs_to_f64(&diff);
            worst = if r.is_nan() { f64::NAN } else { worst.max(r) };
        }
    }
    worst
}

/// `Psi(x)` rounded to `f64`, for cross-checks.
pub fn psi_rounded(rs: &RootSystem, x: &[Complex64], precision: usize) -> Vec<Complex64> {
    let orbits = crate::rootsys::fundamental_orbits(rs);
    let mut ctx = Ctx::new(precision);
    let xm: Vec<MpComplex> = x.iter().map(|z| ctx.from_c(*z)).collect();
    ctx.psi(&orbits, &xm)
        .iter()
        .map(|z| {
            let re = z.re.format(Radix::Dec, RM, &mut ctx.cc).map(|s| parse_decimal(&s)).unwrap_or(f64::NAN);
            let im = z.im.format(Radix::Dec, RM, &mut ctx.cc).map(|s| parse_decimal(&s)).unwrap_or(f64::NAN);
            Complex64::new(re, im)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chebmap::build_cheb_map;
    use crate::gencos::GeneralizedCosine;

    #[test]
    fn agrees_with_double_precision() {
        let rs = RootSystem::build("B2").unwrap();
        let psi = GeneralizedCosine::new(&rs);
        let x = vec![Complex64::new(0.3, 0.1), Complex64::new(-0.7, 0.4)];
        let a = psi.eval(&x);
        let b = psi_rounded(&rs, &x, 256);
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).norm() <= 1e-12 * u.norm().max(1.0));
        }
    }

    #[test]
    fn exact_map_has_tiny_residual() {
        let rs = RootSystem::build("G2").unwrap();
        let p = build_cheb_map(&rs, 3).unwrap();
        let x = vec![vec![Complex64::new(0.9, -0.95), Complex64::new(-0.4, 0.99)]];
        assert!(functional_residual(&rs, &p, &x, DEFAULT_PRECISION) < 1e-30);
    }

    #[test]
    fn wrong_map_is_detected() {
        let rs = RootSystem::build("A1").unwrap();
        let mut p = build_cheb_map(&rs, 2).unwrap();
        p.components[0].add_term(vec![0], 1.into());
        let x = vec![vec![Complex64::new(0.2, 0.1)]];
        assert!((functional_residual(&rs, &p, &x, DEFAULT_PRECISION) - 1.0).abs() < 1e-12);
    }
}
