//! Monodromy of `T_{Phi,d}` on the tree of preimages, computed two ways.
//!
//! Level-`k` vertices are the points `Psi((y0 - u) / d^k)` with labels
//! `u in (Z/d^k)^n`. The exact model lets an affine element `g = (s, h)` act by
//! `u -> h u + s mod d^k` (a homomorphism; translations act as odometers).
//! The numeric engine lifts loops through `Psi` and through the iterates of `T`
//! and reads off where each vertex goes.
//!
//! Orientation: a loop whose lift through `Psi` from `y0` ends at `g y0` sends
//! vertex `u` to `algebraic_action(g^{-1})(u)`; for "`a` then `b`" the endpoint
//! maps compose as `P_b o P_a`.

use std::collections::HashSet;

use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chebmap::{build_cheb_map, PolyMapEval};
use crate::continuation::{lift_tower, CVec, LiftSettings, PathSample};
use crate::error::{Error, Result};
use crate::gencos::{deck_identify, e2pi, is_on_diagram, regular_direction, GeneralizedCosine};
use crate::linalg::{dot_i, norm_inf, q_to_f64, Q};
use crate::rootsys::{AffineElement, RootSystem, WeylElement};

pub const DEFAULT_VERTEX_CAP: u128 = 100_000;
pub const DEFAULT_GROUP_CAP: u128 = 1_000_000;
/// Bound on `group order x vertices`, the storage a closure over permutations needs.
pub const DEFAULT_STORAGE_BUDGET: u128 = 200_000_000;
/// Default imaginary bump of generator loops.
pub const DEFAULT_EPSILON: f64 = 0.1;
pub const DEFAULT_LOOP_SAMPLES: usize = 2048;

/// Permutation of the level-`k` vertices, indexed by [`encode_label`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct LevelAction {
    pub level: u32,
    pub d: u64,
    pub rank: usize,
    pub perm: Vec<u32>,
}

pub fn vertex_count(d: u64, rank: usize, level: u32) -> u128 {
    (d as u128).pow(level * rank as u32)
}

fn check_vertex_cap(d: u64, rank: usize, level: u32, cap: u128) -> Result<usize> {
    let count = (d as u128).checked_pow(level * rank as u32).unwrap_or(u128::MAX);
    if count > cap {
        return Err(Error::CapExceeded { what: "tree vertices", estimated: count, cap });
    }
    Ok(count as usize)
}

/// Mixed-radix index of a label: letter `j` holds digit `j` of every coordinate,
/// the first letter is least significant.
pub fn encode_label(label: &[i64], d: u64, level: u32) -> usize {
    let d = d as i64;
    let modulus = d.pow(level);
    let letter_radix = (d as usize).pow(label.len() as u32);
    let mut coords: Vec<i64> = label.iter().map(|x| x.rem_euclid(modulus)).collect();
    let mut index = 0usize;
    let mut place = 1usize;
    for _ in 0..level {
        let mut letter = 0usize;
        let mut digit_place = 1usize;
        for c in coords.iter_mut() {
            letter += (*c % d) as usize * digit_place;
            *c /= d;
            digit_place *= d as usize;
        }
        index += letter * place;
        place *= letter_radix;
    }
    index
}

pub fn decode_label(index: usize, rank: usize, d: u64, level: u32) -> Vec<i64> {
    let d = d as usize;
    let letter_radix = d.pow(rank as u32);
    let mut label = vec![0i64; rank];
    let mut rest = index;
    let mut scale = 1i64;
    for _ in 0..level {
        let mut letter = rest % letter_radix;
        rest /= letter_radix;
        for c in label.iter_mut() {
            *c += (letter % d) as i64 * scale;
            letter /= d;
        }
        scale *= d as i64;
    }
    label
}

impl LevelAction {
    pub fn identity(d: u64, rank: usize, level: u32) -> Self {
        let count = vertex_count(d, rank, level) as u32;
        LevelAction { level, d, rank, perm: (0..count).collect() }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| i as u32 == p)
    }

    pub fn is_bijection(&self) -> bool {
        let mut seen = vec![false; self.perm.len()];
        for &p in &self.perm {
            match seen.get_mut(p as usize) {
                Some(s) if !*s => *s = true,
                _ => return false,
            }
        }
        true
    }

    /// `self o other`: apply `other` first.
    pub fn compose(&self, other: &LevelAction) -> LevelAction {
        LevelAction { perm: other.perm.iter().map(|&i| self.perm[i as usize]).collect(), ..self.clone() }
    }

    pub fn inverse(&self) -> LevelAction {
        let mut inv = vec![0u32; self.perm.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            inv[p as usize] = i as u32;
        }
        LevelAction { perm: inv, ..self.clone() }
    }

    pub fn pow(&self, e: u32) -> LevelAction {
        let mut acc = LevelAction { perm: (0..self.perm.len() as u32).collect(), ..self.clone() };
        for _ in 0..e {
            acc = self.compose(&acc);
        }
        acc
    }

    /// Least common multiple of the cycle lengths.
    pub fn order(&self) -> u128 {
        let mut seen = vec![false; self.perm.len()];
        let mut order = 1u128;
        for start in 0..self.perm.len() {
            if seen[start] {
                continue;
            }
            let mut len = 0u128;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.perm[i] as usize;
                len += 1;
            }
            order = order.lcm(&len);
        }
        order
    }

    /// Induced action one level up the tree, if well defined.
    pub fn project(&self) -> Option<LevelAction> {
        if self.level == 0 {
            return None;
        }
        let parent_count = vertex_count(self.d, self.rank, self.level - 1) as usize;
        let mut perm = vec![u32::MAX; parent_count];
        for (i, &p) in self.perm.iter().enumerate() {
            let (a, b) = (i % parent_count, p as usize % parent_count);
            if perm[a] == u32::MAX {
                perm[a] = b as u32;
            } else if perm[a] != b as u32 {
                return None;
            }
        }
        Some(LevelAction { level: self.level - 1, d: self.d, rank: self.rank, perm })
    }
}

/// The exact action `u -> h u + s mod d^k` of `g = (s, h)` on level `k`.
pub fn algebraic_action(g: &AffineElement, d: u64, level: u32) -> Result<LevelAction> {
    algebraic_action_capped(g, d, level, DEFAULT_VERTEX_CAP)
}

pub fn algebraic_action_capped(g: &AffineElement, d: u64, level: u32, cap: u128) -> Result<LevelAction> {
    if d < 2 {
        return Err(Error::Invalid("tree actions need d >= 2".into()));
    }
    let n = g.rank();
    let count = check_vertex_cap(d, n, level, cap)?;
    let perm = (0..count)
        .map(|i| encode_label(&g.apply_i(&decode_label(i, n, d, level)), d, level) as u32)
        .collect();
    Ok(LevelAction { level, d, rank: n, perm })
}

/// One step of the wreath recursion: the image of the first letter and the
/// state acting on the rest of the word.
pub fn wreath_digit_step(g: &AffineElement, d: u64, letter: &[i64]) -> (Vec<i64>, AffineElement) {
    let d = d as i64;
    let v = g.apply_i(letter);
    let image: Vec<i64> = v.iter().map(|x| x.rem_euclid(d)).collect();
    let carry: Vec<i64> = v.iter().zip(&image).map(|(x, r)| (x - r) / d).collect();
    (image, AffineElement { t: carry, w: g.w.clone() })
}

/// Regular basepoint `y0 = rho^v / (3 h)` in the fundamental alcove, `h` the largest root height.
#[derive(Clone, Debug)]
pub struct Basepoint {
    pub y0: Vec<Q>,
    pub y0_c: CVec,
    pub x0: CVec,
}

pub fn basepoint(rs: &RootSystem) -> Basepoint {
    let h = rs.positive_roots().map(|r| r.height()).max().unwrap_or(1);
    let y0: Vec<Q> = rs.rho_check().into_iter().map(|c| c / Q::from_integer(3 * h)).collect();
    let y0_c: CVec = y0.iter().map(|c| Complex64::new(q_to_f64(c), 0.0)).collect();
    let x0 = GeneralizedCosine::new(rs).eval(&y0_c);
    Basepoint { y0, y0_c, x0 }
}

/// A closed sampled path in the complement of the post-critical locus.
#[derive(Clone, Debug)]
pub struct Loop {
    pub base_x0: CVec,
    pub samples: PathSample,
    /// Deck element the loop was built from, if any.
    pub label: Option<AffineElement>,
}

impl Loop {
    pub fn closure_error(&self) -> f64 {
        let a = self.samples.start();
        let b = self.samples.end();
        norm_inf(&a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>())
    }

    /// Runs `self` then `other`, each at double speed.
    pub fn then(&self, other: &Loop) -> Loop {
        let mut times: Vec<f64> = self.samples.times.iter().map(|t| t / 2.0).collect();
        let mut points = self.samples.points.clone();
        times.extend(other.samples.times.iter().skip(1).map(|t| 0.5 + t / 2.0));
        points.extend(other.samples.points.iter().skip(1).cloned());
        let label = match (&self.label, &other.label) {
            (Some(a), Some(b)) => Some(a.compose(b)),
            _ => None,
        };
        Loop { base_x0: self.base_x0.clone(), samples: PathSample { times, points }, label }
    }

    pub fn reversed(&self) -> Loop {
        let times = self.samples.times.iter().rev().map(|t| 1.0 - t).collect();
        let points = self.samples.points.iter().rev().cloned().collect();
        Loop { base_x0: self.base_x0.clone(), samples: PathSample { times, points }, label: self.label.as_ref().map(|g| g.inverse()) }
    }

    pub fn constant(x0: CVec) -> Loop {
        Loop { samples: PathSample { times: vec![0.0, 1.0], points: vec![x0.clone(), x0.clone()] }, base_x0: x0, label: None }
    }
}

/// `gamma(t) = Psi(y(t))` with `y(t) = (1-t) y0 + t g y0 + i eps sin(pi t) u`, `u` regular.
pub fn make_generator_loop(rs: &RootSystem, g: &AffineElement, epsilon: f64, samples: usize) -> Result<Loop> {
    let bp = basepoint(rs);
    let gy0 = g.apply_q(&bp.y0)?;
    if gy0 == bp.y0 {
        return Err(Error::Degenerate("generator fixes the basepoint".into()));
    }
    let a: Vec<f64> = bp.y0.iter().map(q_to_f64).collect();
    let b: Vec<f64> = gy0.iter().map(q_to_f64).collect();
    let u = regular_direction(rs);
    let psi = GeneralizedCosine::new(rs);
    let path = |t: f64| -> CVec {
        let bump = epsilon * (std::f64::consts::PI * t).sin();
        (0..rs.rank)
            .map(|i| Complex64::new((1.0 - t) * a[i] + t * b[i], bump * u[i]))
            .collect()
    };
    let mut samples = PathSample::from_fn(&|t| psi.eval(&path(t)), samples);
    // the endpoints agree up to rounding; make the loop closed exactly
    *samples.points.last_mut().expect("non-empty") = bp.x0.clone();
    samples.points[0] = bp.x0.clone();
    Ok(Loop { base_x0: bp.x0, samples, label: Some(g.clone()) })
}

/// The A1 loops `gamma_+-(s) = +-2 (1 - e^{2 pi i s})` around `+-2`, based at `0`,
/// conjugated by the real segment from the basepoint `Psi(y0) = 1` to `0`.
pub fn a1_reference_loops(samples: usize) -> (Loop, Loop) {
    let one = Complex64::new(1.0, 0.0);
    let make = |sign: f64| -> Loop {
        let f = move |t: f64| -> CVec {
            let z = if t < 0.25 {
                one * (1.0 - 4.0 * t)
            } else if t <= 0.75 {
                let s = 2.0 * (t - 0.25);
                (one - e2pi(Complex64::new(s, 0.0))) * (2.0 * sign)
            } else {
                one * (4.0 * (t - 0.75))
            };
            vec![z]
        };
        let mut samples = PathSample::from_fn(&f, samples);
        *samples.points.last_mut().expect("non-empty") = vec![one];
        Loop { base_x0: vec![one], samples, label: None }
    };
    (make(1.0), make(-1.0))
}

/// Options for the direct (deck-free) part of the numeric engine.
#[derive(Clone, Debug)]
pub struct NumericOptions {
    pub settings: LiftSettings,
    /// Levels with at most this many vertices are lifted vertex by vertex in full.
    pub full_direct_vertices: usize,
    /// Random direct lifts per level above that size.
    pub spot_checks: usize,
    pub seed: u64,
    pub vertex_cap: u128,
}

impl Default for NumericOptions {
    fn default() -> Self {
        NumericOptions {
            settings: LiftSettings::default(),
            full_direct_vertices: 256,
            spot_checks: 8,
            seed: 0,
            vertex_cap: DEFAULT_VERTEX_CAP,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NumericMonodromy {
    /// Deck element `g` with lift endpoint `g y0`.
    pub deck: AffineElement,
    pub actions: Vec<LevelAction>,
    /// Levels whose action was assembled entirely from direct lifts.
    pub fully_direct_levels: Vec<u32>,
    pub spot_checks: usize,
    pub spot_mismatches: usize,
}

/// Lifting context shared by all loops of one `(Phi, d)`.
pub struct LiftContext<'a> {
    rs: &'a RootSystem,
    d: u64,
    psi: GeneralizedCosine,
    t: PolyMapEval,
    bp: Basepoint,
    group: Vec<WeylElement>,
}

impl<'a> LiftContext<'a> {
    pub fn new(rs: &'a RootSystem, d: u64) -> Result<Self> {
        if d < 2 {
            return Err(Error::Invalid("monodromy needs d >= 2".into()));
        }
        Ok(LiftContext {
            rs,
            d,
            psi: GeneralizedCosine::new(rs),
            t: PolyMapEval::new(build_cheb_map(rs, d)?),
            bp: basepoint(rs),
            group: rs.weyl_group_elements()?,
        })
    }

    pub fn basepoint(&self) -> &Basepoint {
        &self.bp
    }

    /// `Psi((y0 - u) / d^k)`.
    pub fn vertex_point(&self, label: &[i64], level: u32) -> CVec {
        let scale = (self.d as f64).powi(level as i32);
        let y: CVec = self.bp.y0_c.iter().zip(label).map(|(y, &u)| (y - u as f64) / scale).collect();
        self.psi.eval(&y)
    }

    fn fiber(&self, level: u32) -> Vec<CVec> {
        let count = vertex_count(self.d, self.rs.rank, level) as usize;
        (0..count)
            .map(|i| self.vertex_point(&decode_label(i, self.rs.rank, self.d, level), level))
            .collect()
    }

    /// Lift through `Psi` from `y0`; returns the deck element of the endpoint.
    pub fn deck_element(&self, lp: &Loop, settings: &LiftSettings) -> Result<AffineElement> {
        let eta = self.psi.lift_samples(&lp.samples, &self.bp.y0_c, settings)?;
        deck_identify(&self.group, &self.bp.y0_c, eta.end(), 1e-6)
    }

    /// Lifts the loop through `T^level` from vertex `label` and returns the endpoint.
    pub fn direct_lift(&self, lp: &Loop, label: &[i64], level: u32, settings: &LiftSettings) -> Result<CVec> {
        let starts: Vec<CVec> = (1..=level).map(|j| self.vertex_point(label, j)).collect();
        let mut tower = lift_tower(&self.t, &|t| lp.samples.at(t), &starts, settings)?;
        Ok(tower.pop().expect("at least one stage").end().to_vec())
    }
}

fn nearest(fiber: &[CVec], z: &[Complex64]) -> Result<usize> {
    let mut best = (f64::INFINITY, usize::MAX);
    let mut second = f64::INFINITY;
    for (i, p) in fiber.iter().enumerate() {
        let dist = norm_inf(&p.iter().zip(z).map(|(a, b)| a - b).collect::<Vec<_>>());
        if dist < best.0 {
            second = best.0;
            best = (dist, i);
        } else if dist < second {
            second = dist;
        }
    }
    let scale = norm_inf(z).max(1.0);
    if best.0 > 1e-6 * scale || second < 10.0 * best.0 {
        return Err(Error::Degenerate(format!("lift endpoint matches no unique vertex (distance {:e})", best.0)));
    }
    Ok(best.1)
}

/// Endpoint maps of `lp` on levels `1..=levels`.
pub fn numeric_monodromy(ctx: &LiftContext, lp: &Loop, levels: u32, opts: &NumericOptions) -> Result<NumericMonodromy> {
    let rs = ctx.rs;
    let n = rs.rank;
    check_vertex_cap(ctx.d, n, levels, opts.vertex_cap)?;
    if norm_inf(&lp.base_x0.iter().zip(&ctx.bp.x0).map(|(a, b)| a - b).collect::<Vec<_>>()) > 1e-9 {
        return Err(Error::Invalid("loop is not based at Psi(y0)".into()));
    }
    if lp.closure_error() > 1e-10 {
        return Err(Error::Invalid("loop is not closed".into()));
    }
    let deck = ctx.deck_element(lp, &opts.settings)?;
    let inverse = deck.inverse();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut actions = Vec::new();
    let mut fully_direct_levels = Vec::new();
    let mut spot_checks = 0;
    let mut spot_mismatches = 0;
    for k in 1..=levels {
        let count = vertex_count(ctx.d, n, k) as usize;
        let fiber = ctx.fiber(k);
        if k == 1 || count <= opts.full_direct_vertices {
            let mut perm = Vec::with_capacity(count);
            for i in 0..count {
                let end = ctx.direct_lift(lp, &decode_label(i, n, ctx.d, k), k, &opts.settings)?;
                perm.push(nearest(&fiber, &end)? as u32);
            }
            actions.push(LevelAction { level: k, d: ctx.d, rank: n, perm });
            fully_direct_levels.push(k);
        } else {
            let action = algebraic_action_capped(&inverse, ctx.d, k, opts.vertex_cap)?;
            for _ in 0..opts.spot_checks {
                let i = rng.gen_range(0..count);
                let end = ctx.direct_lift(lp, &decode_label(i, n, ctx.d, k), k, &opts.settings)?;
                spot_checks += 1;
                if nearest(&fiber, &end)? as u32 != action.perm[i] {
                    spot_mismatches += 1;
                }
            }
            actions.push(action);
        }
    }
    Ok(NumericMonodromy { deck, actions, fully_direct_levels, spot_checks, spot_mismatches })
}

/// Order of the permutation group generated by `actions`, by closure over products.
pub fn generated_group_order(actions: &[LevelAction], cap: u128) -> Result<u128> {
    let Some(first) = actions.first() else {
        return Ok(1);
    };
    if actions.iter().any(|a| a.perm.len() != first.perm.len()) {
        return Err(Error::DimensionMismatch { expected: first.perm.len(), got: 0 });
    }
    let id: Vec<u32> = (0..first.perm.len() as u32).collect();
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    seen.insert(id.clone());
    let mut frontier = vec![id];
    while let Some(p) = frontier.pop() {
        for g in actions {
            let q: Vec<u32> = p.iter().map(|&i| g.perm[i as usize]).collect();
            if seen.insert(q.clone()) {
                if seen.len() as u128 > cap {
                    return Err(Error::CapExceeded { what: "permutation group order", estimated: seen.len() as u128, cap });
                }
                frontier.push(q);
            }
        }
    }
    Ok(seen.len() as u128)
}

/// A standard generating set of the affine Weyl group: the simple reflections and,
/// per irreducible component, the reflection in the wall `<theta, x> = 1`.
#[derive(Clone, Debug, Serialize)]
pub struct AffineGenerator {
    pub name: String,
    /// Index into `rs.roots`.
    pub root: usize,
    pub ell: i64,
    pub element: AffineElement,
}

pub fn affine_generators(rs: &RootSystem) -> Vec<AffineGenerator> {
    let mut out: Vec<AffineGenerator> = rs
        .simple_root_indices
        .iter()
        .enumerate()
        .map(|(i, &r)| AffineGenerator {
            name: format!("s{}", i + 1),
            root: r,
            ell: 0,
            element: AffineElement::reflection(&rs.roots[r], 0),
        })
        .collect();
    for (c, theta) in rs.highest_roots().into_iter().enumerate() {
        let r = rs.roots.iter().position(|x| x == theta).expect("highest root is a root");
        let name = if rs.components.len() == 1 { "s0".to_string() } else { format!("s0_{}", c + 1) };
        out.push(AffineGenerator { name, root: r, ell: 1, element: AffineElement::reflection(theta, 1) });
    }
    out
}

/// Coxeter exponent of two generators, `None` when their product has infinite order.
pub fn coxeter_exponent(rs: &RootSystem, a: &AffineGenerator, b: &AffineGenerator) -> Option<u32> {
    if a.root == b.root && a.ell == b.ell {
        return Some(1);
    }
    let (u, v) = (&rs.roots[a.root], &rs.roots[b.root]);
    match dot_i(&u.weight_coords, &v.coroot_coords) * dot_i(&v.weight_coords, &u.coroot_coords) {
        0 => Some(2),
        1 => Some(3),
        2 => Some(4),
        3 => Some(6),
        _ => None,
    }
}

/// A vertex moved by `g` at the given level, if any.
pub fn nontrivial_witness(g: &AffineElement, d: u64, level: u32) -> Result<Option<usize>> {
    let a = algebraic_action(g, d, level)?;
    Ok(a.perm.iter().enumerate().find(|(i, &p)| *i as u32 != p).map(|(i, _)| i))
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelComparison {
    pub level: u32,
    pub numeric: Vec<u32>,
    pub algebraic: Vec<u32>,
    pub equal: bool,
    pub fully_direct: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneratorReport {
    pub name: String,
    pub label: AffineElement,
    pub recovered: AffineElement,
    pub label_recovered: bool,
    pub levels: Vec<LevelComparison>,
    pub spot_checks: usize,
    pub spot_mismatches: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct RelationCheck {
    pub left: String,
    pub right: String,
    /// `None` for pairs with no relation.
    pub exponent: Option<u32>,
    pub holds_per_level: Vec<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MonodromyReport {
    pub type_spec: String,
    pub d: u64,
    pub levels: u32,
    pub vertex_counts: Vec<u128>,
    pub generators: Vec<GeneratorReport>,
    pub relations: Vec<RelationCheck>,
    pub numeric_orders: Vec<u128>,
    pub algebraic_orders: Vec<u128>,
    pub orders_equal: bool,
    pub projection_compatible: bool,
    pub passed: bool,
}

#[derive(Clone, Debug)]
pub struct ImgOptions {
    pub numeric: NumericOptions,
    pub group_cap: u128,
    pub storage_budget: u128,
    pub epsilon: f64,
    pub loop_samples: usize,
}

impl Default for ImgOptions {
    fn default() -> Self {
        ImgOptions {
            numeric: NumericOptions::default(),
            group_cap: DEFAULT_GROUP_CAP,
            storage_budget: DEFAULT_STORAGE_BUDGET,
            epsilon: DEFAULT_EPSILON,
            loop_samples: DEFAULT_LOOP_SAMPLES,
        }
    }
}

/// Refuses sizes whose permutation closure would not fit the caps.
pub fn check_img_size(rs: &RootSystem, d: u64, levels: u32, opts: &ImgOptions) -> Result<()> {
    if levels == 0 {
        return Err(Error::Invalid("need at least one level".into()));
    }
    let vertices = check_vertex_cap(d, rs.rank, levels, opts.numeric.vertex_cap)?;
    let bound = rs.weyl_order_estimate().saturating_mul(vertices as u128);
    if bound > opts.group_cap {
        return Err(Error::CapExceeded { what: "permutation group order bound", estimated: bound, cap: opts.group_cap });
    }
    let storage = bound.saturating_mul(vertices as u128);
    if storage > opts.storage_budget {
        return Err(Error::CapExceeded { what: "permutation closure storage", estimated: storage, cap: opts.storage_budget });
    }
    Ok(())
}

/// Compares the numeric and exact actions of the affine generators on levels `1..=levels`.
pub fn img_verification(rs: &RootSystem, d: u64, levels: u32, opts: &ImgOptions) -> Result<MonodromyReport> {
    check_img_size(rs, d, levels, opts)?;
    let ctx = LiftContext::new(rs, d)?;
    let gens = affine_generators(rs);
    let mut generators = Vec::new();
    let mut numeric_by_level: Vec<Vec<LevelAction>> = vec![Vec::new(); levels as usize];
    let mut algebraic_by_level: Vec<Vec<LevelAction>> = vec![Vec::new(); levels as usize];
    let mut projection_compatible = true;
    for g in &gens {
        let lp = make_generator_loop(rs, &g.element, opts.epsilon, opts.loop_samples)?;
        let num = numeric_monodromy(&ctx, &lp, levels, &opts.numeric)?;
        let mut cmp = Vec::new();
        for (k, numeric) in num.actions.iter().enumerate() {
            let level = k as u32 + 1;
            // generators are involutions, so the endpoint map equals the action of the label
            let algebraic = algebraic_action_capped(&g.element.inverse(), d, level, opts.numeric.vertex_cap)?;
            projection_compatible &= numeric.is_bijection();
            if level > 1 {
                projection_compatible &= numeric.project().as_ref() == Some(&num.actions[k - 1]);
            }
            cmp.push(LevelComparison {
                level,
                equal: *numeric == algebraic,
                numeric: numeric.perm.clone(),
                algebraic: algebraic.perm.clone(),
                fully_direct: num.fully_direct_levels.contains(&level),
            });
            numeric_by_level[k].push(numeric.clone());
            algebraic_by_level[k].push(algebraic);
        }
        generators.push(GeneratorReport {
            name: g.name.clone(),
            label: g.element.clone(),
            label_recovered: num.deck == g.element,
            recovered: num.deck,
            levels: cmp,
            spot_checks: num.spot_checks,
            spot_mismatches: num.spot_mismatches,
        });
    }
    let mut relations = Vec::new();
    for i in 0..gens.len() {
        for j in i..gens.len() {
            let exponent = coxeter_exponent(rs, &gens[i], &gens[j]);
            let holds_per_level = numeric_by_level
                .iter()
                .map(|acts| match exponent {
                    Some(m) => acts[i].compose(&acts[j]).pow(m).is_identity(),
                    None => true,
                })
                .collect();
            relations.push(RelationCheck { left: gens[i].name.clone(), right: gens[j].name.clone(), exponent, holds_per_level });
        }
    }
    let mut numeric_orders = Vec::new();
    let mut algebraic_orders = Vec::new();
    for k in 0..levels as usize {
        numeric_orders.push(generated_group_order(&numeric_by_level[k], opts.group_cap)?);
        algebraic_orders.push(generated_group_order(&algebraic_by_level[k], opts.group_cap)?);
    }
    let orders_equal = numeric_orders == algebraic_orders;
    let passed = orders_equal
        && projection_compatible
        && generators
            .iter()
            .all(|g| g.label_recovered && g.spot_mismatches == 0 && g.levels.iter().all(|l| l.equal))
        && relations.iter().all(|r| r.holds_per_level.iter().all(|&h| h));
    Ok(MonodromyReport {
        type_spec: rs.type_spec.clone(),
        d,
        levels,
        vertex_counts: (1..=levels).map(|k| vertex_count(d, rs.rank, k)).collect(),
        generators,
        relations,
        numeric_orders,
        algebraic_orders,
        orders_equal,
        projection_compatible,
        passed,
    })
}

/// True when `y` is not fixed by any nonidentity element among the given ones.
pub fn has_trivial_stabilizer(y: &[Q], elements: &[AffineElement]) -> Result<bool> {
    for g in elements {
        if !g.is_identity() && g.apply_q(y)? == y {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Checks that the basepoint lies off every wall, exactly.
pub fn basepoint_is_regular(rs: &RootSystem) -> bool {
    let bp = basepoint(rs);
    let exact = rs.positive_roots().all(|r| {
        let p = r.pair_q(&bp.y0);
        p > Q::zero() && p < Q::one()
    });
    exact && is_on_diagram(rs, &bp.y0_c, 1e-9).is_none()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a1() -> RootSystem {
        RootSystem::build("A1").unwrap()
    }

    fn tr(t: &[i64]) -> AffineElement {
        AffineElement::translation(t.to_vec())
    }

    #[test]
    fn label_encoding_round_trip() {
        for (n, d, k) in [(1, 2, 3), (2, 3, 2), (3, 2, 2)] {
            for i in 0..vertex_count(d, n, k) as usize {
                assert_eq!(encode_label(&decode_label(i, n, d, k), d, k), i);
            }
        }
        // first letter least significant
        assert_eq!(encode_label(&[1, 0], 2, 2), 1);
        assert_eq!(encode_label(&[0, 1], 2, 2), 2);
        assert_eq!(encode_label(&[2, 0], 2, 2), 4);
        assert_eq!(encode_label(&[-1], 2, 2), 3);
    }

    #[test]
    fn basepoint_values() {
        let bp = basepoint(&a1());
        assert_eq!(bp.y0, vec![Q::new(1, 6)]);
        assert!((bp.x0[0] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        for t in ["A1", "A2", "B2", "C3", "G2", "A3", "B3", "D4", "F4", "A1xA1", "G2xA2"] {
            assert!(basepoint_is_regular(&RootSystem::build(t).unwrap()), "{t}");
        }
    }

    #[test]
    fn basepoint_stabilizer_trivial() {
        let rs = RootSystem::build("A2").unwrap();
        let gens: Vec<AffineElement> = affine_generators(&rs).into_iter().map(|g| g.element).collect();
        let mut words = vec![AffineElement::identity(2)];
        let mut all = Vec::new();
        while all.len() < 1000 {
            let mut next = Vec::new();
            for w in &words {
                for g in &gens {
                    next.push(w.compose(g));
                }
            }
            all.extend(next.iter().cloned());
            words = next;
        }
        assert!(has_trivial_stabilizer(&basepoint(&rs).y0, &all).unwrap());
    }

    #[test]
    fn identity_acts_trivially() {
        for k in 1..=3 {
            assert!(algebraic_action(&AffineElement::identity(2), 2, k).unwrap().is_identity());
        }
    }

    #[test]
    fn odometer_and_flip() {
        let rs = a1();
        let plus = algebraic_action(&tr(&[1]), 2, 2).unwrap();
        for u in 0..4i64 {
            assert_eq!(plus.perm[encode_label(&[u], 2, 2)] as usize, encode_label(&[u + 1], 2, 2));
        }
        assert_eq!(plus.order(), 4);
        let flip = algebraic_action(&AffineElement::reflection(rs.simple_root(0), 0), 2, 2).unwrap();
        assert_eq!(flip.order(), 2);
        for u in 0..4i64 {
            let i = encode_label(&[u], 2, 2);
            assert_eq!(flip.perm[i] as usize, encode_label(&[-u], 2, 2));
        }
        assert_eq!(flip.perm[encode_label(&[0], 2, 2)] as usize, encode_label(&[0], 2, 2));
        assert_eq!(flip.perm[encode_label(&[2], 2, 2)] as usize, encode_label(&[2], 2, 2));
    }

    #[test]
    fn algebraic_action_is_homomorphism() {
        let rs = RootSystem::build("B2").unwrap();
        let gens: Vec<AffineElement> = affine_generators(&rs).into_iter().map(|g| g.element).collect();
        for a in &gens {
            for b in &gens {
                let ab = algebraic_action(&a.compose(b), 3, 2).unwrap();
                let composed = algebraic_action(a, 3, 2).unwrap().compose(&algebraic_action(b, 3, 2).unwrap());
                assert_eq!(ab, composed);
            }
        }
    }

    #[test]
    fn projection_of_algebraic_actions() {
        let rs = RootSystem::build("G2").unwrap();
        for g in affine_generators(&rs) {
            let l2 = algebraic_action(&g.element, 2, 2).unwrap();
            assert_eq!(l2.project().unwrap(), algebraic_action(&g.element, 2, 1).unwrap());
            assert!(l2.is_bijection());
        }
    }

    #[test]
    fn wreath_step_examples() {
        let (letter, child) = wreath_digit_step(&AffineElement::identity(1), 2, &[1]);
        assert_eq!((letter, child), (vec![1], AffineElement::identity(1)));
        let (letter, child) = wreath_digit_step(&tr(&[1]), 2, &[1]);
        assert_eq!(letter, vec![0]);
        assert_eq!(child, tr(&[1]));
        let (letter, child) = wreath_digit_step(&tr(&[1]), 2, &[0]);
        assert_eq!(letter, vec![1]);
        assert_eq!(child, AffineElement::identity(1));
    }

    #[test]
    fn wreath_recursion_matches_action() {
        let rs = RootSystem::build("A2").unwrap();
        let gens: Vec<AffineElement> = affine_generators(&rs).into_iter().map(|g| g.element).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (d, k) = (3u64, 3u32);
        for _ in 0..100 {
            let mut g = AffineElement::identity(2);
            for _ in 0..rng.gen_range(0..8) {
                g = g.compose(&gens[rng.gen_range(0..gens.len())]);
            }
            let word: Vec<Vec<i64>> = (0..k).map(|_| vec![rng.gen_range(0..3), rng.gen_range(0..3)]).collect();
            let mut state = g.clone();
            let mut image = Vec::new();
            for letter in &word {
                let (l, child) = wreath_digit_step(&state, d, letter);
                image.push(l);
                state = child;
            }
            let label: Vec<i64> = (0..2).map(|i| word.iter().rev().fold(0, |acc, l| acc * 3 + l[i])).collect();
            let image_label: Vec<i64> = (0..2).map(|i| image.iter().rev().fold(0, |acc, l| acc * 3 + l[i])).collect();
            let act = algebraic_action(&g, d, k).unwrap();
            assert_eq!(act.perm[encode_label(&label, d, k)] as usize, encode_label(&image_label, d, k));
        }
    }

    #[test]
    fn group_order_brute_force() {
        // every affine map u -> w u + t mod d^k, counted as distinct permutations
        let rs = a1();
        let weyl = rs.weyl_group_elements().unwrap();
        for (d, k) in [(2u64, 3u32), (3, 2)] {
            let m = (d as i64).pow(k);
            let mut perms = HashSet::new();
            for w in &weyl {
                for t in 0..m {
                    perms.insert(algebraic_action(&AffineElement { t: vec![t], w: w.clone() }, d, k).unwrap().perm);
                }
            }
            let gens: Vec<LevelAction> = affine_generators(&rs)
                .iter()
                .map(|g| algebraic_action(&g.element, d, k).unwrap())
                .collect();
            assert_eq!(generated_group_order(&gens, DEFAULT_GROUP_CAP).unwrap(), perms.len() as u128);
        }
        assert_eq!(generated_group_order(&[LevelAction::identity(2, 1, 3)], 10).unwrap(), 1);
        assert_eq!(generated_group_order(&[], 10).unwrap(), 1);
        let gens: Vec<LevelAction> = affine_generators(&rs).iter().map(|g| algebraic_action(&g.element, 2, 3).unwrap()).collect();
        assert_eq!(generated_group_order(&gens, DEFAULT_GROUP_CAP).unwrap(), 16);
        assert!(matches!(generated_group_order(&gens, 5), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn a2_level_one_order() {
        let rs = RootSystem::build("A2").unwrap();
        let weyl = rs.weyl_group_elements().unwrap();
        let mut perms = HashSet::new();
        for w in &weyl {
            for a in 0..2 {
                for b in 0..2 {
                    perms.insert(algebraic_action(&AffineElement { t: vec![a, b], w: w.clone() }, 2, 1).unwrap().perm);
                }
            }
        }
        let gens: Vec<LevelAction> = affine_generators(&rs).iter().map(|g| algebraic_action(&g.element, 2, 1).unwrap()).collect();
        assert_eq!(generated_group_order(&gens, DEFAULT_GROUP_CAP).unwrap(), perms.len() as u128);
    }

    #[test]
    fn coxeter_exponents() {
        let rs = RootSystem::build("G2").unwrap();
        let g = affine_generators(&rs);
        assert_eq!(coxeter_exponent(&rs, &g[0], &g[1]), Some(6));
        let rs = a1();
        let g = affine_generators(&rs);
        assert_eq!(coxeter_exponent(&rs, &g[0], &g[1]), None);
        let rs = RootSystem::build("A1xA1").unwrap();
        let g = affine_generators(&rs);
        assert_eq!(g.len(), 4);
        assert_eq!(coxeter_exponent(&rs, &g[0], &g[1]), Some(2));
        let rs = RootSystem::build("B2").unwrap();
        let g = affine_generators(&rs);
        assert_eq!(coxeter_exponent(&rs, &g[0], &g[1]), Some(4));
    }

    #[test]
    fn faithfulness_growth() {
        let rs = RootSystem::build("A2").unwrap();
        let weyl = rs.weyl_group_elements().unwrap();
        let (d, k) = (2u64, 2u32);
        let bound = (d as i64).pow(k - 1);
        for w in &weyl {
            for a in -bound..=bound {
                for b in -bound..=bound {
                    let g = AffineElement { t: vec![a, b], w: w.clone() };
                    let witness = nontrivial_witness(&g, d, k).unwrap();
                    assert_eq!(witness.is_none(), g.is_identity(), "{g:?}");
                }
            }
        }
    }

    #[test]
    fn generator_loop_is_closed_and_lifts_to_its_label() {
        let rs = RootSystem::build("A2").unwrap();
        let ctx = LiftContext::new(&rs, 2).unwrap();
        for g in affine_generators(&rs) {
            let lp = make_generator_loop(&rs, &g.element, DEFAULT_EPSILON, 512).unwrap();
            assert!(lp.closure_error() < 1e-12);
            assert_eq!(ctx.deck_element(&lp, &LiftSettings::default()).unwrap(), g.element);
        }
        assert!(make_generator_loop(&rs, &AffineElement::identity(2), 0.1, 16).is_err());
    }

    #[test]
    fn a1_reference_loops_numeric() {
        let rs = a1();
        let (plus, minus) = a1_reference_loops(1024);
        let ctx = LiftContext::new(&rs, 2).unwrap();
        let opts = NumericOptions::default();
        let np = numeric_monodromy(&ctx, &plus, 3, &opts).unwrap();
        assert_eq!(np.deck, AffineElement::reflection(rs.simple_root(0), 0));
        for (k, a) in np.actions.iter().enumerate() {
            assert_eq!(*a, algebraic_action(&np.deck.inverse(), 2, k as u32 + 1).unwrap());
            assert!(a.order() <= 2);
        }
        // +2 is not a critical value of X^2 - 2, so the first level is fixed
        assert!(np.actions[0].is_identity());
        assert_eq!(np.actions[2].order(), 2);
        let nm = numeric_monodromy(&ctx, &minus, 3, &opts).unwrap();
        assert_eq!(nm.deck, AffineElement::reflection(rs.simple_root(0), 1));
        let prod = numeric_monodromy(&ctx, &minus.then(&plus), 3, &opts).unwrap();
        for (k, a) in prod.actions.iter().enumerate() {
            assert_eq!(a.order(), 2u128.pow(k as u32 + 1));
            // endpoint maps compose in path order
            assert_eq!(*a, np.actions[k].compose(&nm.actions[k]));
        }
        assert_eq!(prod.fully_direct_levels, vec![1, 2, 3]);
    }

    #[test]
    fn constant_loop_acts_trivially() {
        let rs = RootSystem::build("A2").unwrap();
        let ctx = LiftContext::new(&rs, 2).unwrap();
        let lp = Loop::constant(ctx.basepoint().x0.clone());
        let m = numeric_monodromy(&ctx, &lp, 2, &NumericOptions::default()).unwrap();
        assert!(m.deck.is_identity());
        assert!(m.actions.iter().all(|a| a.is_identity()));
    }

    #[test]
    fn spot_checks_used_above_threshold() {
        let rs = a1();
        let ctx = LiftContext::new(&rs, 2).unwrap();
        let (plus, _) = a1_reference_loops(1024);
        let opts = NumericOptions { full_direct_vertices: 2, spot_checks: 4, ..Default::default() };
        let m = numeric_monodromy(&ctx, &plus, 3, &opts).unwrap();
        assert_eq!(m.fully_direct_levels, vec![1]);
        assert_eq!(m.spot_checks, 8);
        assert_eq!(m.spot_mismatches, 0);
    }

    #[test]
    fn img_a1() {
        let r = img_verification(&a1(), 2, 3, &ImgOptions::default()).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.numeric_orders, vec![2, 8, 16]);
    }

    #[test]
    fn sizing_refusal() {
        let rs = RootSystem::build("B3").unwrap();
        let err = check_img_size(&rs, 3, 3, &ImgOptions::default()).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { what: "permutation closure storage", .. }));
        let rs = RootSystem::build("A3").unwrap();
        assert!(check_img_size(&rs, 5, 3, &ImgOptions::default()).is_err());
        assert!(check_img_size(&a1(), 2, 3, &ImgOptions::default()).is_ok());
    }
}
