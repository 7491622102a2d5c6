//! Predictor/corrector path lifting through a local biholomorphism.
//!
//! Given a holomorphic map `F` that is a covering away from its critical set
//! and a target path `gamma` in the image, `lift_path` tracks the unique path
//! `eta` with `F(eta(t)) = gamma(t)` starting from a known preimage of
//! `gamma(0)`. Each step starts Newton's method from the previously accepted
//! point; the step halves whenever Newton fails to contract.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{norm_inf, CMatrix};

pub type CVec = Vec<Complex64>;

/// A holomorphic map `C^n -> C^n` with its Jacobian.
pub trait HolomorphicMap {
    fn dim(&self) -> usize;
    fn value(&self, y: &[Complex64]) -> CVec;
    fn jacobian(&self, y: &[Complex64]) -> CMatrix;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LiftSettings {
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    pub initial_step: f64,
    pub min_step: f64,
    pub jacobian_condition_cap: f64,
}

impl Default for LiftSettings {
    fn default() -> Self {
        LiftSettings {
            newton_tol: 1e-10,
            max_newton_iters: 25,
            initial_step: 1.0 / 64.0,
            min_step: 1.0 / 65536.0,
            jacobian_condition_cap: 1e8,
        }
    }
}

impl LiftSettings {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.min_step && self.min_step <= self.initial_step && self.initial_step <= 1.0) {
            return Err(Error::Invalid("lift settings need 0 < min_step <= initial_step <= 1".into()));
        }
        if !(self.newton_tol > 0.0) || self.max_newton_iters == 0 {
            return Err(Error::Invalid("lift settings need newton_tol > 0 and at least one iteration".into()));
        }
        Ok(())
    }
}

/// A discretised path: `points[i]` is the position at `times[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSample {
    pub times: Vec<f64>,
    pub points: Vec<CVec>,
}

impl PathSample {
    pub fn start(&self) -> &[Complex64] {
        &self.points[0]
    }

    pub fn end(&self) -> &[Complex64] {
        self.points.last().expect("non-empty path")
    }

    pub fn from_fn(f: &dyn Fn(f64) -> CVec, samples: usize) -> PathSample {
        let samples = samples.max(1);
        let times: Vec<f64> = (0..=samples).map(|i| i as f64 / samples as f64).collect();
        let points = times.iter().map(|&t| f(t)).collect();
        PathSample { times, points }
    }

    /// Piecewise-linear interpolation between samples.
    pub fn at(&self, t: f64) -> CVec {
        let i = match self.times.iter().position(|&s| s >= t) {
            Some(0) => return self.points[0].clone(),
            Some(i) => i,
            None => return self.end().to_vec(),
        };
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let s = if t1 > t0 { (t - t0) / (t1 - t0) } else { 1.0 };
        self.points[i - 1]
            .iter()
            .zip(&self.points[i])
            .map(|(a, b)| a + (b - a) * s)
            .collect()
    }
}

enum Newton {
    Converged(CVec),
    Failed,
}

fn newton<M: HolomorphicMap + ?Sized>(map: &M, start: &[Complex64], target: &[Complex64], s: &LiftSettings) -> Newton {
    let scale = 1.0f64.max(norm_inf(target));
    let mut y = start.to_vec();
    let mut last_step = f64::INFINITY;
    for _ in 0..s.max_newton_iters {
        let f = map.value(&y);
        let residual: CVec = target.iter().zip(&f).map(|(a, b)| a - b).collect();
        let res_norm = norm_inf(&residual);
        if res_norm <= s.newton_tol * scale {
            return Newton::Converged(y);
        }
        let Some(delta) = map.jacobian(&y).solve(&residual) else {
            return Newton::Failed;
        };
        let step = norm_inf(&delta);
        if !step.is_finite() {
            return Newton::Failed;
        }
        // Outside the quadratic basin the corrections stop contracting; treat that
        // as a failed step rather than risk converging onto another sheet.
        if step > 0.5 * last_step && step > 1e-12 {
            return Newton::Failed;
        }
        last_step = step;
        for (yi, di) in y.iter_mut().zip(&delta) {
            *yi += di;
        }
    }
    let f = map.value(&y);
    let res: CVec = target.iter().zip(&f).map(|(a, b)| a - b).collect();
    if norm_inf(&res) <= s.newton_tol * scale {
        Newton::Converged(y)
    } else {
        Newton::Failed
    }
}

/// Lifts `target` through `map` starting from `y_start`, which must satisfy
/// `map(y_start) = target(0)` to `newton_tol`.
pub fn lift_path<M: HolomorphicMap + ?Sized>(
    map: &M,
    target: &dyn Fn(f64) -> CVec,
    y_start: &[Complex64],
    settings: &LiftSettings,
) -> Result<PathSample> {
    let mut tower = lift_tower(map, target, &[y_start.to_vec()], settings)?;
    Ok(tower.pop().expect("one stage"))
}

/// One corrector pass for every stage at time `t`, stage `j` targeting stage `j-1`.
fn advance<M: HolomorphicMap + ?Sized>(
    map: &M,
    target: &dyn Fn(f64) -> CVec,
    current: &[CVec],
    t: f64,
    settings: &LiftSettings,
) -> Option<Vec<CVec>> {
    let mut image = target(t);
    let mut next = Vec::with_capacity(current.len());
    for z in current {
        match newton(map, z, &image, settings) {
            Newton::Converged(y) => {
                image = y.clone();
                next.push(y);
            }
            Newton::Failed => return None,
        }
    }
    Some(next)
}

/// Lifts `target` simultaneously through `map`, `map^2`, ..., `map^k`.
///
/// Stage `j` (1-based) tracks a path `z_j` with `map(z_j) = z_{j-1}` and
/// `z_0 = target`; `starts[j-1]` is the starting point of stage `j`. All stages
/// share one step size, so the staged lift of a loop through `map^k` is
/// computed without composing the map.
pub fn lift_tower<M: HolomorphicMap + ?Sized>(
    map: &M,
    target: &dyn Fn(f64) -> CVec,
    starts: &[CVec],
    settings: &LiftSettings,
) -> Result<Vec<PathSample>> {
    settings.validate()?;
    let n = map.dim();
    for s in starts {
        if s.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: s.len() });
        }
    }
    let g0 = target(0.0);
    let mut prev_image = g0.clone();
    for (j, s) in starts.iter().enumerate() {
        let img = map.value(s);
        let scale = 1.0f64.max(norm_inf(&prev_image));
        let off = norm_inf(&img.iter().zip(&prev_image).map(|(a, b)| a - b).collect::<Vec<_>>());
        if off > settings.newton_tol.max(1e-8) * scale {
            return Err(Error::Invalid(format!(
                "stage {} start is not a preimage of the previous stage start (residual {off:e})",
                j + 1
            )));
        }
        prev_image = s.clone();
    }

    let mut paths: Vec<PathSample> = starts
        .iter()
        .map(|s| PathSample { times: vec![0.0], points: vec![s.clone()] })
        .collect();
    let mut current: Vec<CVec> = starts.to_vec();
    let mut t = 0.0f64;
    let mut h = settings.initial_step;
    while t < 1.0 {
        let t_next = (t + h).min(1.0);
        let t_mid = 0.5 * (t + t_next);
        // A full step is accepted only if two half steps land on the same points;
        // this catches Newton converging onto a neighbouring sheet.
        let next = advance(map, target, &current, t_next, settings).filter(|full| {
            advance(map, target, &current, t_mid, settings)
                .and_then(|mid| advance(map, target, &mid, t_next, settings))
                .is_some_and(|halves| {
                    full.iter().zip(&halves).all(|(a, b)| {
                        let gap: CVec = a.iter().zip(b).map(|(x, y)| x - y).collect();
                        norm_inf(&gap) <= 1e-6 * norm_inf(a).max(1.0)
                    })
                })
        });
        let Some(next) = next else {
            h *= 0.5;
            if h < settings.min_step {
                return Err(Error::ContinuationFailure { t, min_step: settings.min_step });
            }
            continue;
        };
        for y in &next {
            let condition = map.jacobian(y).condition();
            if condition > settings.jacobian_condition_cap {
                return Err(Error::NearSingularJacobian { t: t_next, condition });
            }
        }
        t = t_next;
        for (path, y) in paths.iter_mut().zip(&next) {
            path.times.push(t);
            path.points.push(y.clone());
        }
        current = next;
        h = (h * 2.0).min(settings.initial_step);
    }
    Ok(paths)
}
