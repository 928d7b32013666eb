//! Orbit iteration and fate classification.

use alloc::vec::Vec;
use core::cmp::Ordering;
#[allow(unused_imports)] // shadowed by std's inherent methods when std is linked
use num_traits::Float;

use crate::functions::{
    classify_fixed_point, EntireFunction, NewtonMap, PoleCause, RootFixedPoint,
};
use crate::math::{c, Compensated};
use crate::C64;

/// `|log|f||` above which consecutive direct values no longer resolve a
/// unit change, so the per-step change is taken from the Newton steps.
const LOG_RESOLVABLE: f64 = 1e10;

/// Contraction a root termination must show between consecutive steps.
const ROOT_CONTRACTION: f64 = 1.0 - 1e-7;

const CYCLE_TOL: f64 = 1e-9;
const CYCLE_MIN_STEP: f64 = 1e-6;
const TRACT_STEP_RATIO: f64 = 0.99;

/// Tail length for the `f → 0` test.
pub const DECREASING_TAIL: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct IterationConfig {
    pub max_iter: usize,
    pub tol_root: f64,
    pub escape_radius: f64,
    pub f_zero_tol: f64,
    pub cycle_detection_window: usize,
    /// An orbit whose steps stopped contracting and whose `log|f|` fell below
    /// this value has left every bounded region of the tract; it ends like
    /// an escape. `None` disables the test.
    pub tract_log_floor: Option<f64>,
}

impl Default for IterationConfig {
    fn default() -> Self {
        Self {
            max_iter: 1000,
            tol_root: 1e-12,
            escape_radius: 1e6,
            f_zero_tol: 1e-8,
            cycle_detection_window: 64,
            tract_log_floor: Some(-700.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("max_iter must be positive")]
    MaxIter,
    #[error("tolerances must be positive and finite")]
    Tolerance,
    #[error("escape_radius must exceed 1")]
    EscapeRadius,
}

impl IterationConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.max_iter == 0 {
            return Err(ConfigError::MaxIter);
        }
        let pos = |x: f64| x > 0.0 && x.is_finite();
        if !pos(self.tol_root) || !pos(self.f_zero_tol) {
            return Err(ConfigError::Tolerance);
        }
        if !(self.escape_radius > 1.0) {
            return Err(ConfigError::EscapeRadius);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Termination {
    Root,
    Escape,
    TractExit,
    Pole { cause: PoleCause },
    Cycle { period: usize },
    MaxIter,
}

/// `z_0, …, z_n` with `z_{k+1} = N(z_k)` and `log|f|` along the way.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OrbitRecord {
    pub points: Vec<C64>,
    /// Direct `log|f(z_k)|`; NaN where `f` is unknown.
    pub log_abs_f: Vec<f64>,
    /// `log f(z_{k+1}) − log f(z_k)` along the orbit, from direct values
    /// where they resolve the change and from the Newton steps elsewhere
    /// (`−(1 + s_k/s_{k+1})/2` with `s_k = z_{k+1} − z_k`).
    pub log_f_change: Vec<C64>,
    /// `|z_{k+1} − z_k|`, including the sub-ulp part.
    pub step_sizes: Vec<f64>,
    pub terminated_by: Termination,
}

impl OrbitRecord {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `|f(z_k)|`.
    pub fn f_abs(&self) -> Vec<f64> {
        self.log_abs_f.iter().map(|l| l.exp()).collect()
    }

    /// `log|f(z_0)| + Σ_{j<k} Δ_j`: the `log|f|` series with the step
    /// changes filling in where direct values lose resolution.
    pub fn log_abs_f_series(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.points.len());
        let mut acc = self.log_abs_f.first().copied().unwrap_or(f64::NAN);
        out.push(acc);
        for d in &self.log_f_change {
            acc += d.re;
            out.push(acc);
        }
        out.truncate(self.points.len());
        out
    }

    /// Whether `log|f|` strictly decreases over the last `len` points, judged
    /// from the per-step changes so that it stays visible when `log|f|`
    /// itself is too large to resolve a unit step.
    pub fn decreasing_tail(&self, len: usize) -> bool {
        let k = len.saturating_sub(1);
        self.points.len() >= len
            && self.log_f_change.len() >= k
            && self.log_f_change[self.log_f_change.len() - k..]
                .iter()
                .all(|d| d.re < 0.0)
    }

    fn consistent(&self) -> bool {
        let n = self.points.len();
        n >= 1
            && self.log_abs_f.len() == n
            && self.log_f_change.len() + 1 == n
            && self.step_sizes.len() + 1 == n
    }
}

fn log_value(f: Option<&dyn EntireFunction>, z: C64) -> C64 {
    f.map_or(c(f64::NAN, f64::NAN), |f| f.log_jet(z).log_value)
}

fn wrap_angle(x: f64) -> f64 {
    use core::f64::consts::PI;
    x - 2.0 * PI * num_traits::Float::round(x / (2.0 * PI))
}

/// Per-step change of `log f`.
fn log_change(lz: C64, lw: C64, s: C64, s_next: Result<C64, PoleCause>) -> C64 {
    let trapezoid = match s_next {
        Ok(sn) if sn != c(0.0, 0.0) => Some(-(c(1.0, 0.0) + s / sn) * 0.5),
        _ => None,
    };
    let resolvable = lz.re.abs() < LOG_RESOLVABLE && lw.re.abs() < LOG_RESOLVABLE;
    let re = match (resolvable, trapezoid) {
        (false, Some(t)) => t.re,
        _ => lw.re - lz.re,
    };
    let im_resolvable = lz.im.abs() < LOG_RESOLVABLE && lw.im.abs() < LOG_RESOLVABLE;
    let im = match (im_resolvable, trapezoid) {
        (false, Some(t)) => t.im,
        _ => wrap_angle(lw.im - lz.im),
    };
    c(re, im)
}

/// Iterates `N` from `z0` until a root, an escape, a tract exit, a pole, a
/// cycle or `max_iter` steps.
pub fn iterate_orbit(n: &NewtonMap, z0: C64, cfg: &IterationConfig) -> OrbitRecord {
    let f = n.function().map(|f| f.as_ref());
    let mut rec = OrbitRecord {
        points: Vec::new(),
        log_abs_f: Vec::new(),
        log_f_change: Vec::new(),
        step_sizes: Vec::new(),
        terminated_by: Termination::MaxIter,
    };
    rec.points.push(z0);
    let mut lz = log_value(f, z0);
    rec.log_abs_f.push(lz.re);
    let mut accumulated = lz.re;

    let mut pos = Compensated::new(z0);
    let mut s_cur = n.increment(z0);
    let mut prev_step: Option<f64> = None;

    for _ in 0..cfg.max_iter {
        let z = pos.hi;
        let s = match s_cur {
            Ok(s) => s,
            Err(cause) => {
                rec.terminated_by = Termination::Pole { cause };
                return rec;
            }
        };
        let size = s.norm();
        // a tract orbit also takes sub-ulp steps, but at a constant rate
        let contracting = match prev_step {
            None => size == 0.0,
            Some(p) => size == 0.0 || size <= ROOT_CONTRACTION * p,
        };
        let is_root = size < cfg.tol_root * z.norm().max(1.0) && contracting;

        let next = pos.add(s);
        let w = next.hi;
        let s_next = n.increment(w);
        let lw = log_value(f, w);
        let change = log_change(lz, lw, s, s_next);
        accumulated += change.re;
        pos = next;
        rec.points.push(w);
        rec.log_abs_f.push(lw.re);
        rec.log_f_change.push(change);
        rec.step_sizes.push(size);

        if is_root {
            rec.terminated_by = Termination::Root;
            return rec;
        }
        if w.norm() > cfg.escape_radius {
            rec.terminated_by = Termination::Escape;
            return rec;
        }
        if let (Some(floor), Ok(sn)) = (cfg.tract_log_floor, s_next) {
            let level = if lw.re.is_finite() && lw.re.abs() < LOG_RESOLVABLE {
                lw.re
            } else {
                accumulated
            };
            if rec.points.len() > DECREASING_TAIL
                && level < floor
                && size > 0.0
                && sn.norm() / size >= TRACT_STEP_RATIO
            {
                rec.terminated_by = Termination::TractExit;
                return rec;
            }
        }
        if size > CYCLE_MIN_STEP {
            let k = rec.points.len() - 1;
            let window = cfg.cycle_detection_window.min(k);
            for p in 2..=window {
                if (w - rec.points[k - p]).norm() < CYCLE_TOL {
                    rec.terminated_by = Termination::Cycle { period: p };
                    return rec;
                }
            }
        }
        prev_step = Some(size);
        s_cur = s_next;
        lz = lw;
    }
    rec
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum OrbitOutcome {
    ConvergedToRoot { xi: C64, m: u32 },
    EscapedFToZero,
    EscapedOther,
    PoleHit { at: C64 },
    CycleDetected { period: usize },
    Undetermined,
}

impl OrbitOutcome {
    pub fn tag(&self) -> &'static str {
        match self {
            OrbitOutcome::ConvergedToRoot { .. } => "converged_to_root",
            OrbitOutcome::EscapedFToZero => "escaped_f_to_zero",
            OrbitOutcome::EscapedOther => "escaped_other",
            OrbitOutcome::PoleHit { .. } => "pole_hit",
            OrbitOutcome::CycleDetected { .. } => "cycle_detected",
            OrbitOutcome::Undetermined => "undetermined",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ClassifyError {
    #[error("inconsistent orbit record: field lengths disagree")]
    InconsistentRecord,
}

/// Tags the fate of a recorded orbit.
///
/// An escape counts as `f → 0` iff the last ten values of `log|f|` strictly
/// decrease and the final `|f|` is below `f_zero_tol`. A root is accepted
/// only when `|f(ξ)| ≤ tol_root·(1 + |f'(ξ)|)`.
pub fn classify_orbit(
    rec: &OrbitRecord,
    f: &dyn EntireFunction,
    cfg: &IterationConfig,
) -> Result<OrbitOutcome, ClassifyError> {
    if !rec.consistent() {
        return Err(ClassifyError::InconsistentRecord);
    }
    let last = *rec.points.last().unwrap();
    Ok(match rec.terminated_by {
        Termination::Root => {
            let j = f.jet(last);
            if j.value.norm() <= cfg.tol_root * (1.0 + j.deriv.norm()) {
                OrbitOutcome::ConvergedToRoot {
                    xi: last,
                    m: multiplicity_from_steps(&rec.step_sizes),
                }
            } else {
                OrbitOutcome::Undetermined
            }
        }
        Termination::Escape | Termination::TractExit => {
            let last = rec.log_abs_f_series().last().copied().unwrap_or(f64::NAN);
            if rec.decreasing_tail(DECREASING_TAIL) && last < cfg.f_zero_tol.ln() {
                OrbitOutcome::EscapedFToZero
            } else {
                OrbitOutcome::EscapedOther
            }
        }
        Termination::Pole { .. } => OrbitOutcome::PoleHit { at: last },
        Termination::Cycle { period } => OrbitOutcome::CycleDetected { period },
        Termination::MaxIter => OrbitOutcome::Undetermined,
    })
}

pub(crate) fn tends_to_zero(series: &[f64], log_tol: f64) -> bool {
    if series.len() < DECREASING_TAIL {
        return false;
    }
    let tail = &series[series.len() - DECREASING_TAIL..];
    tail.windows(2).all(|w| w[1] < w[0]) && *tail.last().unwrap() < log_tol
}

/// `m` from the linear rate `(m − 1)/m` of the last two non-zero steps.
fn multiplicity_from_steps(steps: &[f64]) -> u32 {
    let nz: Vec<f64> = steps.iter().copied().filter(|s| *s > 0.0).collect();
    if nz.len() < 3 {
        return 1;
    }
    let r = nz[nz.len() - 1] / nz[nz.len() - 2];
    if !(r < 1.0) || r < 0.25 {
        return 1;
    }
    num_traits::Float::round(1.0 / (1.0 - r)).max(1.0) as u32
}

/// Axis-aligned rectangle in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        Self {
            re_min,
            re_max,
            im_min,
            im_max,
        }
    }

    pub fn centered(center: C64, width: f64, height: f64) -> Self {
        Self::new(
            center.re - width / 2.0,
            center.re + width / 2.0,
            center.im - height / 2.0,
            center.im + height / 2.0,
        )
    }

    pub fn contains(&self, z: C64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }
}

/// Lexicographic order on `(Re, Im)`.
pub fn lex_cmp(a: &C64, b: &C64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Seeds Newton iteration at the centers of a `grid_n × grid_n` grid over
/// `rect` and returns the distinct roots reached, sorted by `(Re, Im)`.
///
/// Roots outside `rect` that some seed converges to are included.
pub fn find_roots_in(
    f: alloc::sync::Arc<dyn EntireFunction>,
    rect: Rect,
    grid_n: usize,
    cfg: &IterationConfig,
) -> Vec<RootFixedPoint> {
    let n = NewtonMap::of(f.clone());
    let mut roots: Vec<RootFixedPoint> = Vec::new();
    let dx = (rect.re_max - rect.re_min) / grid_n as f64;
    let dy = (rect.im_max - rect.im_min) / grid_n as f64;
    for j in 0..grid_n {
        for i in 0..grid_n {
            let z0 = c(
                rect.re_min + (i as f64 + 0.5) * dx,
                rect.im_min + (j as f64 + 0.5) * dy,
            );
            let rec = iterate_orbit(&n, z0, cfg);
            let Ok(OrbitOutcome::ConvergedToRoot { xi, .. }) =
                classify_orbit(&rec, f.as_ref(), cfg)
            else {
                continue;
            };
            let dedup = 10.0 * cfg.tol_root * xi.norm().max(1.0);
            if roots.iter().any(|r| (r.xi - xi).norm() <= dedup) {
                continue;
            }
            let Ok(root) = classify_fixed_point(&n, xi, 1e-9) else {
                continue;
            };
            if f.jet(root.xi).value.norm() > cfg.tol_root * (1.0 + f.jet(root.xi).deriv.norm()) {
                continue;
            }
            if roots.iter().all(|r| (r.xi - root.xi).norm() > dedup) {
                roots.push(root);
            }
        }
    }
    roots.sort_by(|a, b| lex_cmp(&a.xi, &b.xi));
    roots
}
