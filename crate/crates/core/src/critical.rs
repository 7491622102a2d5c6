//! Sampled checks of the critical and post-critical structure: wall sampling,
//! critical points of `T` over `(1/d) H`, invariance `d H = H`, and the A2 deltoid.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chebmap::{PolyMapEval, PolynomialMap};
use crate::continuation::{CVec, HolomorphicMap};
use crate::error::{Error, Result};
use crate::gencos::{is_on_diagram, GeneralizedCosine, WallWitness};
use crate::rootsys::RootSystem;

/// Imaginary parts of sampled points stay in `[-IMAG_SPREAD, IMAG_SPREAD]`.
pub const IMAG_SPREAD: f64 = 0.15;
/// Preimage samples closer than this to `H` are not strict.
pub const STRICT_MARGIN: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagramSample {
    /// Index into `rs.roots` of the positive root `v`.
    pub root: usize,
    pub ell: i64,
    pub point: Vec<[f64; 2]>,
    /// The free point that was projected onto the wall.
    pub tangential_offset: Vec<[f64; 2]>,
}

impl DiagramSample {
    pub fn point_c(&self) -> CVec {
        self.point.iter().map(|p| Complex64::new(p[0], p[1])).collect()
    }
}

fn pack(x: &[Complex64]) -> Vec<[f64; 2]> {
    x.iter().map(|z| [z.re, z.im]).collect()
}

pub fn random_point(rng: &mut ChaCha8Rng, n: usize) -> CVec {
    (0..n)
        .map(|_| Complex64::new(rng.gen_range(0.0..1.0), rng.gen_range(-IMAG_SPREAD..=IMAG_SPREAD)))
        .collect()
}

/// Random points on walls `H_{v,ell}`, `v` positive and `ell` drawn from `ell_range`.
/// A free point `z` is projected along `v^vee`: `x = z - (<v,z> - ell)/2 * v^vee`.
pub fn sample_diagram_points(
    rs: &RootSystem,
    count: usize,
    ell_range: std::ops::RangeInclusive<i64>,
    seed: u64,
) -> Vec<DiagramSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positives: Vec<usize> = (0..rs.roots.len()).filter(|&i| rs.roots[i].is_positive()).collect();
    (0..count)
        .map(|_| {
            let root = positives[rng.gen_range(0..positives.len())];
            let ell = rng.gen_range(ell_range.clone());
            let v = &rs.roots[root];
            let z = random_point(&mut rng, rs.rank);
            let excess = (v.pair_c(&z) - ell as f64) / 2.0;
            let x: CVec = z
                .iter()
                .zip(&v.coroot_coords)
                .map(|(zi, &c)| zi - excess * c as f64)
                .collect();
            DiagramSample { root, ell, point: pack(&x), tangential_offset: pack(&z) }
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct PostCriticalReport {
    pub type_spec: String,
    pub d: u64,
    pub samples: usize,
    pub tol: f64,
    /// Largest `|det DT(Psi(y))|` over strict preimages `y` of wall points.
    pub max_critical_det: f64,
    /// Preimage samples that landed on `H` themselves and were skipped.
    pub skipped_on_wall: usize,
    /// Largest `|T(Psi(y)) - Psi(d y)|` over the same samples, scale-normalised.
    pub max_value_residual: f64,
    /// Every `d y` was recognised on `H`.
    pub critical_values_on_diagram: bool,
    pub passed: bool,
}

/// For wall points `z` and `y = z / d` off the diagram, `Psi(y)` is a critical point
/// of `T` and its image `Psi(z)` lies in `Psi(H)`.
pub fn post_critical_check(
    rs: &RootSystem,
    d: u64,
    p: &PolynomialMap,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<PostCriticalReport> {
    if p.d != d || p.rank() != rs.rank {
        return Err(Error::Invalid("map does not match (root system, d)".into()));
    }
    let psi = GeneralizedCosine::new(rs);
    let eval = PolyMapEval::new(p.clone());
    let mut max_det = 0.0f64;
    let mut max_res = 0.0f64;
    let mut skipped = 0;
    let mut on_diagram = true;
    for s in sample_diagram_points(rs, samples, -2..=2, seed) {
        let z = s.point_c();
        let y: CVec = z.iter().map(|w| w / d as f64).collect();
        if d > 1 && is_on_diagram(rs, &y, STRICT_MARGIN).is_some() {
            skipped += 1;
            continue;
        }
        let x = psi.eval(&y);
        max_det = max_det.max(eval.jacobian_det(&x).norm());
        let tx = eval.value(&x);
        let target = psi.eval(&z);
        for (a, b) in tx.iter().zip(&target) {
            max_res = max_res.max((a - b).norm() / b.norm().max(1.0));
        }
        let dy: CVec = y.iter().map(|w| w * d as f64).collect();
        on_diagram &= is_on_diagram(rs, &dy, 1e-9).is_some();
    }
    let evaluated = samples - skipped;
    Ok(PostCriticalReport {
        type_spec: rs.type_spec.clone(),
        d,
        samples,
        tol,
        max_critical_det: max_det,
        skipped_on_wall: skipped,
        max_value_residual: max_res,
        critical_values_on_diagram: on_diagram,
        passed: (d == 1 || evaluated > 0) && max_det <= tol && max_res <= 1e-8 && on_diagram,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct InvarianceReport {
    pub type_spec: String,
    pub d: u64,
    pub samples: usize,
    pub failures: usize,
    pub passed: bool,
}

/// Checks that `d` times a point on `H_{v,ell}` is found on `H_{v,d ell}`.
pub fn diagram_invariance_check(rs: &RootSystem, d: u64, samples: usize, seed: u64) -> InvarianceReport {
    let mut failures = 0;
    for s in sample_diagram_points(rs, samples, -2..=2, seed) {
        let v = &rs.roots[s.root];
        let dy: CVec = s.point_c().iter().map(|w| w * d as f64).collect();
        let expected = WallWitness { root: s.root, ell: s.ell * d as i64 };
        let exact = (v.pair_c(&dy) - expected.ell as f64).norm() <= 1e-9;
        if !exact || is_on_diagram(rs, &dy, 1e-9).is_none() {
            failures += 1;
        }
    }
    InvarianceReport { type_spec: rs.type_spec.clone(), d, samples, failures, passed: failures == 0 }
}

/// `X1^2 X2^2 + 18 X1 X2 - 4 (X1^3 + X2^3) - 27`; vanishes on the A2 post-critical locus.
pub fn deltoid_residual(x1: Complex64, x2: Complex64) -> Complex64 {
    x1 * x1 * x2 * x2 + 18.0 * x1 * x2 - 4.0 * (x1 * x1 * x1 + x2 * x2 * x2) - 27.0
}

/// `|det D Psi|` at diagram samples and at generic samples (rejected within `1e-2` of `H`).
#[derive(Clone, Debug, Serialize)]
pub struct CriticalLocusReport {
    pub type_spec: String,
    pub max_det_on_diagram: f64,
    pub min_det_generic: f64,
    pub passed: bool,
}

pub fn critical_locus_check(rs: &RootSystem, diagram_samples: usize, generic_samples: usize, seed: u64) -> CriticalLocusReport {
    let psi = GeneralizedCosine::new(rs);
    let max_det_on_diagram = sample_diagram_points(rs, diagram_samples, -2..=2, seed)
        .iter()
        .map(|s| psi.jacobian(&s.point_c()).det().norm())
        .fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let mut min_det_generic = f64::INFINITY;
    let mut taken = 0;
    while taken < generic_samples {
        let x = random_point(&mut rng, rs.rank);
        if is_on_diagram(rs, &x, 1e-2).is_some() {
            continue;
        }
        taken += 1;
        min_det_generic = min_det_generic.min(psi.jacobian(&x).det().norm());
    }
    CriticalLocusReport {
        type_spec: rs.type_spec.clone(),
        max_det_on_diagram,
        min_det_generic,
        passed: max_det_on_diagram < 1e-8 && min_det_generic > 1e-4,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chebmap::build_cheb_map;

    #[test]
    fn samples_lie_on_their_wall() {
        for t in ["A2", "B2", "G2", "A3", "A1xA1"] {
            let rs = RootSystem::build(t).unwrap();
            for s in sample_diagram_points(&rs, 40, -2..=2, 3) {
                let x = s.point_c();
                assert!((rs.roots[s.root].pair_c(&x) - s.ell as f64).norm() <= 1e-12);
                assert!(is_on_diagram(&rs, &x, 1e-10).is_some());
            }
        }
    }

    #[test]
    fn a1_wall_points() {
        let rs = RootSystem::build("A1").unwrap();
        for s in sample_diagram_points(&rs, 20, 0..=1, 5) {
            let x = s.point_c()[0];
            assert!((2.0 * x - s.ell as f64).norm() < 1e-15);
            assert!(s.ell == 0 || s.ell == 1);
        }
    }

    #[test]
    fn seeded_sampling_is_deterministic() {
        let rs = RootSystem::build("B2").unwrap();
        let a = serde_json::to_string(&sample_diagram_points(&rs, 10, -2..=2, 11)).unwrap();
        let b = serde_json::to_string(&sample_diagram_points(&rs, 10, -2..=2, 11)).unwrap();
        assert_eq!(a, b);
        let c = serde_json::to_string(&sample_diagram_points(&rs, 10, -2..=2, 12)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn a1_critical_point() {
        let rs = RootSystem::build("A1").unwrap();
        let psi = GeneralizedCosine::new(&rs);
        let x = psi.eval(&[Complex64::new(0.25, 0.0)]);
        assert!(x[0].norm() < 1e-15);
        let t = PolyMapEval::new(build_cheb_map(&rs, 2).unwrap());
        assert!(t.jacobian_det(&x).norm() < 1e-15);
        assert!(is_on_diagram(&rs, &[Complex64::new(0.5, 0.0)], 1e-12).is_some());
    }

    #[test]
    fn post_critical_a2_b2() {
        for t in ["A2", "B2"] {
            let rs = RootSystem::build(t).unwrap();
            let p = build_cheb_map(&rs, 2).unwrap();
            let r = post_critical_check(&rs, 2, &p, 50, 1e-7, 1).unwrap();
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn wall_points_are_skipped() {
        // d = 2 and ell = 0: y = z/2 stays on the same wall
        let rs = RootSystem::build("A1").unwrap();
        let p = build_cheb_map(&rs, 2).unwrap();
        let r = post_critical_check(&rs, 2, &p, 30, 1e-7, 2).unwrap();
        assert!(r.skipped_on_wall > 0);
        assert!(r.skipped_on_wall < 30);
    }

    #[test]
    fn mismatched_map_rejected() {
        let rs = RootSystem::build("A2").unwrap();
        let p = build_cheb_map(&rs, 3).unwrap();
        assert!(post_critical_check(&rs, 2, &p, 5, 1e-7, 1).is_err());
    }

    #[test]
    fn invariance() {
        for (t, d) in [("G2", 3), ("A2", 2), ("B2", 1)] {
            let rs = RootSystem::build(t).unwrap();
            assert!(diagram_invariance_check(&rs, d, 50, 9).passed);
        }
    }

    #[test]
    fn deltoid() {
        let three = Complex64::new(3.0, 0.0);
        assert_eq!(deltoid_residual(three, three), Complex64::new(0.0, 0.0));
        let rs = RootSystem::build("A2").unwrap();
        let psi = GeneralizedCosine::new(&rs);
        for s in sample_diagram_points(&rs, 100, -2..=2, 4) {
            let x = psi.eval(&s.point_c());
            assert!(deltoid_residual(x[0], x[1]).norm() < 1e-7);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let y = random_point(&mut rng, 2);
            if is_on_diagram(&rs, &y, 5e-2).is_some() {
                continue;
            }
            let x = psi.eval(&y);
            let scale = x[0].norm().max(x[1].norm()).max(1.0).powi(4);
            assert!(deltoid_residual(x[0], x[1]).norm() / scale > 1e-3, "{y:?}");
        }
    }

    #[test]
    fn deltoid_forward_invariant() {
        let rs = RootSystem::build("A2").unwrap();
        let psi = GeneralizedCosine::new(&rs);
        let t = build_cheb_map(&rs, 2).unwrap();
        for s in sample_diagram_points(&rs, 30, -2..=2, 6) {
            let x = psi.eval(&s.point_c());
            if deltoid_residual(x[0], x[1]).norm() < 1e-8 {
                let y = t.eval(&x).unwrap();
                assert!(deltoid_residual(y[0], y[1]).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn critical_locus() {
        for t in ["A1", "A2", "B2", "G2", "A3", "A1xA1"] {
            let rs = RootSystem::build(t).unwrap();
            let r = critical_locus_check(&rs, 50, 100, 21);
            assert!(r.passed, "{r:?}");
        }
    }
}
