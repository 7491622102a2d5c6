//! The generalized cosine `Psi`, its Jacobian, the Cartan-Stiefel diagram and
//! lifting through the covering `Psi : C^n \ H -> C^n \ D`.
//!
//! Points are in simple-coroot coordinates; component `k` of `Psi` is
//! `sum_{lambda in W omega_k} exp(2 pi i lambda . x)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::continuation::{lift_path, CVec, HolomorphicMap, LiftSettings, PathSample};
use crate::error::{Error, Result};
use crate::linalg::{dot_c, CMatrix};
use crate::rootsys::{fundamental_orbits, AffineElement, RootSystem, WeylElement};

#[inline]
pub fn e2pi(z: Complex64) -> Complex64 {
    (Complex64::new(0.0, 2.0 * PI) * z).exp()
}

/// `Psi` for a fixed root system, with the fundamental-weight orbits precomputed.
#[derive(Clone, Debug)]
pub struct GeneralizedCosine {
    pub rs: RootSystem,
    pub orbits: Vec<Vec<Vec<i64>>>,
}

impl GeneralizedCosine {
    pub fn new(rs: &RootSystem) -> Self {
        GeneralizedCosine { rs: rs.clone(), orbits: fundamental_orbits(rs) }
    }

    pub fn rank(&self) -> usize {
        self.rs.rank
    }

    pub fn eval(&self, x: &[Complex64]) -> CVec {
        self.orbits
            .iter()
            .map(|orbit| orbit.iter().map(|l| e2pi(dot_c(l, x))).sum())
            .collect()
    }

    pub fn eval_real(&self, x: &[f64]) -> CVec {
        let xc: CVec = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.eval(&xc)
    }

    /// Entry `(k, j)` is `2 pi i sum_{lambda in W omega_k} lambda_j exp(2 pi i lambda . x)`.
    pub fn jacobian(&self, x: &[Complex64]) -> CMatrix {
        let n = self.rank();
        let mut m = CMatrix::zeros(n);
        let tau = Complex64::new(0.0, 2.0 * PI);
        for (k, orbit) in self.orbits.iter().enumerate() {
            for l in orbit {
                let e = e2pi(dot_c(l, x)) * tau;
                for j in 0..n {
                    if l[j] != 0 {
                        let v = m.get(k, j) + e * l[j] as f64;
                        m.set(k, j, v);
                    }
                }
            }
        }
        m
    }

    /// Lifts a path in `C^n \ D` through `Psi` from a known preimage of its start.
    pub fn lift_path(&self, target: &dyn Fn(f64) -> CVec, y_start: &[Complex64], settings: &LiftSettings) -> Result<PathSample> {
        if is_on_diagram(&self.rs, y_start, 1e-9).is_some() {
            return Err(Error::Degenerate("lift must start off the Cartan-Stiefel diagram".into()));
        }
        lift_path(self, target, y_start, settings)
    }

    /// Lifts a sampled path, interpolating linearly between samples.
    pub fn lift_samples(&self, target: &PathSample, y_start: &[Complex64], settings: &LiftSettings) -> Result<PathSample> {
        self.lift_path(&|t| target.at(t), y_start, settings)
    }
}

impl HolomorphicMap for GeneralizedCosine {
    fn dim(&self) -> usize {
        self.rank()
    }
    fn value(&self, y: &[Complex64]) -> CVec {
        self.eval(y)
    }
    fn jacobian(&self, y: &[Complex64]) -> CMatrix {
        GeneralizedCosine::jacobian(self, y)
    }
}

/// The second formula for `Psi`: a sum over the whole Weyl group divided by the
/// stabilizer order of `omega_k`, both counted directly from the group.
pub fn eval_psi_fullsum(rs: &RootSystem, group: &[WeylElement], x: &[Complex64]) -> CVec {
    (0..rs.rank)
        .map(|k| {
            let omega = rs.fundamental_weight(k);
            let mut stab = 0usize;
            let mut sum = Complex64::new(0.0, 0.0);
            for w in group {
                let image = w.act_weight(&omega);
                if image == omega {
                    stab += 1;
                }
                sum += e2pi(dot_c(&image, x));
            }
            sum / stab as f64
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WallWitness {
    /// Index into `rs.roots` (always a positive root).
    pub root: usize,
    pub ell: i64,
}

/// Finds a wall `H_{v,ell}` within `tol` of `x`, if any. The pairing is complex,
/// so distance is measured as `|dot(v, x) - round(Re dot(v, x))|`.
pub fn is_on_diagram(rs: &RootSystem, x: &[Complex64], tol: f64) -> Option<WallWitness> {
    rs.roots.iter().enumerate().filter(|(_, r)| r.is_positive()).find_map(|(i, r)| {
        let p = r.pair_c(x);
        let ell = p.re.round();
        ((p - ell).norm() <= tol).then(|| WallWitness { root: i, ell: ell as i64 })
    })
}

/// `sum_k omega_k` in coroot coordinates; pairs strictly positively with every positive root.
pub fn regular_direction(rs: &RootSystem) -> Vec<f64> {
    rs.weight_sum_point_f64()
}

/// Finds the affine Weyl group element carrying `y0` to `y1`, trying each linear
/// part and rounding the remaining translation.
pub fn deck_identify(group: &[WeylElement], y0: &[Complex64], y1: &[Complex64], tol: f64) -> Result<AffineElement> {
    if y0.len() != y1.len() {
        return Err(Error::DimensionMismatch { expected: y0.len(), got: y1.len() });
    }
    for w in group {
        let wy = w.coroot.apply_c(y0);
        let r: Vec<Complex64> = y1.iter().zip(&wy).map(|(a, b)| a - b).collect();
        let t: Vec<i64> = r.iter().map(|z| z.re.round() as i64).collect();
        if r.iter().zip(&t).all(|(z, &ti)| (z - ti as f64).norm() <= tol) {
            return Ok(AffineElement { t, w: w.clone() });
        }
    }
    Err(Error::NoDeckMatch { tol })
}

pub fn to_complex(x: &[f64]) -> CVec {
    x.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_point(rng: &mut ChaCha8Rng, n: usize, im: f64) -> CVec {
        (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-im..im))).collect()
    }

    #[test]
    fn a1_values() {
        let psi = GeneralizedCosine::new(&RootSystem::build("A1").unwrap());
        assert!((psi.eval(&[c(0.0)])[0] - 2.0).norm() < 1e-14);
        assert!((psi.eval(&[c(0.5)])[0] + 2.0).norm() < 1e-14);
        let psi2 = GeneralizedCosine::new(&RootSystem::build("A2").unwrap());
        assert!(max_abs_diff(&psi2.eval(&[c(0.0), c(0.0)]), &[c(3.0), c(3.0)]) < 1e-14);
    }

    #[test]
    fn fullsum_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for t in ["A2", "B2", "G2", "A3"] {
            let rs = RootSystem::build(t).unwrap();
            let group = rs.weyl_group_elements().unwrap();
            let psi = GeneralizedCosine::new(&rs);
            let zero = vec![c(0.0); rs.rank];
            let at_zero = eval_psi_fullsum(&rs, &group, &zero);
            for k in 0..rs.rank {
                assert!((at_zero[k] - psi.orbits[k].len() as f64).norm() < 1e-12);
            }
            for _ in 0..50 {
                let x = random_point(&mut rng, rs.rank, 1.0);
                let a = psi.eval(&x);
                let b = eval_psi_fullsum(&rs, &group, &x);
                for (p, q) in a.iter().zip(&b) {
                    assert!((p - q).norm() <= 1e-10 * p.norm().max(1.0), "{t}");
                }
            }
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = 1e-5;
        for t in ["A1", "A2", "B2", "G2"] {
            let rs = RootSystem::build(t).unwrap();
            let psi = GeneralizedCosine::new(&rs);
            for _ in 0..50 {
                let x = random_point(&mut rng, rs.rank, 0.3);
                let jac = psi.jacobian(&x);
                let scale = jac.norm_inf().max(1.0);
                for j in 0..rs.rank {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[j] += h;
                    xm[j] -= h;
                    let (fp, fm) = (psi.eval(&xp), psi.eval(&xm));
                    for k in 0..rs.rank {
                        let fd = (fp[k] - fm[k]) / (2.0 * h);
                        assert!((fd - jac.get(k, j)).norm() < 1e-6 * scale, "{t} ({k},{j})");
                    }
                }
            }
        }
    }

    #[test]
    fn a1_critical_at_origin() {
        let psi = GeneralizedCosine::new(&RootSystem::build("A1").unwrap());
        assert!(psi.jacobian(&[c(0.0)]).get(0, 0).norm() < 1e-12);
    }

    #[test]
    fn invariance_and_periodicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for t in ["A1", "A2", "B2", "G2", "A1xA1"] {
            let rs = RootSystem::build(t).unwrap();
            let psi = GeneralizedCosine::new(&rs);
            let mut gens: Vec<AffineElement> = (0..rs.rank).map(|i| AffineElement::linear(rs.simple_reflection(i))).collect();
            for i in 0..rs.rank {
                let mut e = vec![0; rs.rank];
                e[i] = 1;
                gens.push(AffineElement::translation(e));
            }
            for _ in 0..100 {
                let x = random_point(&mut rng, rs.rank, 0.25);
                let base = psi.eval(&x);
                for g in &gens {
                    assert!(max_abs_diff(&psi.eval(&g.apply_c(&x).unwrap()), &base) < 1e-9, "{t}");
                }
            }
        }
    }

    #[test]
    fn diagram_membership() {
        let rs = RootSystem::build("A1").unwrap();
        assert!(is_on_diagram(&rs, &[c(0.0)], 1e-9).is_some());
        assert!(is_on_diagram(&rs, &[c(0.37)], 1e-9).is_none());
        let hit = is_on_diagram(&rs, &[c(0.5)], 1e-9).unwrap();
        assert_eq!(hit.ell, 1);

        for t in ["A2", "B2", "G2"] {
            let rs = RootSystem::build(t).unwrap();
            let u = regular_direction(&rs);
            let x: CVec = u.iter().map(|&ui| Complex64::new(0.0, 0.1 * ui)).collect();
            assert!(is_on_diagram(&rs, &x, 1e-9).is_none(), "{t}");
            assert!(is_on_diagram(&rs, &vec![c(0.0); rs.rank], 1e-12).is_some());
        }
    }

    #[test]
    fn deck_identify_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for t in ["A1", "A2", "B2", "G2"] {
            let rs = RootSystem::build(t).unwrap();
            let group = rs.weyl_group_elements().unwrap();
            let rho = rs.rho_check();
            let y0: CVec = rho.iter().map(|q| c(crate::linalg::q_to_f64(q) / 7.0)).collect();
            assert!(deck_identify(&group, &y0, &y0, 1e-9).unwrap().is_identity());
            for _ in 0..30 {
                let w = &group[rng.gen_range(0..group.len())];
                let tr: Vec<i64> = (0..rs.rank).map(|_| rng.gen_range(-3..=3)).collect();
                let g = AffineElement { t: tr, w: w.clone() };
                let y1 = g.apply_c(&y0).unwrap();
                assert_eq!(deck_identify(&group, &y0, &y1, 1e-9).unwrap(), g);
            }
            let mut other = y0.clone();
            other[0] += 0.01;
            assert!(matches!(deck_identify(&group, &y0, &other, 1e-9), Err(Error::NoDeckMatch { .. })));
        }
    }

    #[test]
    fn a1_loop_around_plus_two_lifts_to_reflection_through_origin() {
        let rs = RootSystem::build("A1").unwrap();
        let psi = GeneralizedCosine::new(&rs);
        let group = rs.weyl_group_elements().unwrap();
        // 0 = Psi(1/4)
        let start = vec![c(0.25)];
        let gamma = |s: f64| vec![(Complex64::new(1.0, 0.0) - e2pi(c(s))) * 2.0];
        let path = psi.lift_path(&gamma, &start, &LiftSettings::default()).unwrap();
        let g = deck_identify(&group, &start, path.end(), 1e-8).unwrap();
        assert_eq!(g, AffineElement::reflection(rs.simple_root(0), 0));
        let gamma_minus = |s: f64| vec![(Complex64::new(1.0, 0.0) - e2pi(c(s))) * -2.0];
        let path = psi.lift_path(&gamma_minus, &start, &LiftSettings::default()).unwrap();
        let g = deck_identify(&group, &start, path.end(), 1e-8).unwrap();
        assert_eq!(g, AffineElement::reflection(rs.simple_root(0), 1));
    }

    #[test]
    fn lift_of_psi_image_reproduces_segment() {
        let rs = RootSystem::build("A2").unwrap();
        let psi = GeneralizedCosine::new(&rs);
        let a = [0.07, 0.11];
        let b = [0.3, -0.2];
        let u = regular_direction(&rs);
        let seg = |t: f64| -> CVec {
            (0..2)
                .map(|j| Complex64::new(a[j] + t * (b[j] - a[j]), 0.2 * (PI * t).sin() * u[j]))
                .collect()
        };
        let gamma = |t: f64| psi.eval(&seg(t));
        let s = LiftSettings::default();
        let p1 = psi.lift_path(&gamma, &seg(0.0), &s).unwrap();
        let p2 = psi.lift_path(&gamma, &seg(0.0), &s).unwrap();
        for (t, y) in p1.times.iter().zip(&p1.points) {
            assert!(max_abs_diff(y, &seg(*t)) < 1e-8);
        }
        for (y1, y2) in p1.points.iter().zip(&p2.points) {
            assert!(max_abs_diff(y1, y2) < 1e-8);
        }
    }

    #[test]
    fn constant_target_constant_lift() {
        let rs = RootSystem::build("B2").unwrap();
        let psi = GeneralizedCosine::new(&rs);
        let y = vec![c(0.11), c(0.07)];
        let x = psi.eval(&y);
        let p = psi.lift_path(&|_| x.clone(), &y, &LiftSettings::default()).unwrap();
        assert!(p.points.iter().all(|q| max_abs_diff(q, &y) < 1e-12));
    }

    #[test]
    fn start_on_wall_rejected() {
        let rs = RootSystem::build("A1").unwrap();
        let psi = GeneralizedCosine::new(&rs);
        let x = psi.eval(&[c(0.0)]);
        assert!(psi.lift_path(&|_| x.clone(), &[c(0.0)], &LiftSettings::default()).is_err());
    }
}
