use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by std's inherent methods when std is linked
use num_traits::Float;

use super::Ray;
use crate::dynamics::{
    iterate_orbit, tends_to_zero, IterationConfig, OrbitRecord, DECREASING_TAIL,
};
use crate::functions::{EntireFunction, NewtonMap};
use crate::math::{is_finite, ls_slope};
use crate::C64;

/// `|f|` below which a probe may conclude `f → 0`.
pub const ZERO_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PathKind {
    Ray,
    Orbit,
}

/// What to follow.
#[derive(Debug, Clone)]
pub enum Probe {
    /// `samples + 1` equally spaced points with `t ∈ [0, t_max]`.
    Ray {
        ray: Ray,
        t_max: f64,
        samples: usize,
    },
    /// At most `n_max` Newton steps from `z0`.
    Orbit {
        newton: NewtonMap,
        z0: C64,
        n_max: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProbeSample {
    /// `t` for rays, `n` for orbits.
    pub s: f64,
    pub z: C64,
    pub log_abs_f: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Verdict {
    TendsToZero,
    TendsTo { value: C64 },
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AsymptoticProbe {
    pub path_kind: PathKind,
    pub samples: Vec<ProbeSample>,
    pub verdict: Verdict,
    pub final_log_abs_f: f64,
}

/// Follows `f` along a ray or an orbit.
///
/// `TendsToZero` needs a final `|f| < 1e-8` and a strictly decreasing tail
/// of ten samples; `TendsTo(a)` needs the last ten values of `f` to agree
/// with `a` to `1e-9(1 + |a|)`. Everything else, including `|f| → ∞`, is
/// `Inconclusive`; the final `log|f|` is kept either way.
pub fn probe_asymptotic(f: &dyn EntireFunction, probe: &Probe) -> AsymptoticProbe {
    let (path_kind, samples, orbit_tail) = match probe {
        Probe::Ray {
            ray,
            t_max,
            samples,
        } => {
            let n = (*samples).max(1);
            let s: Vec<ProbeSample> = (0..=n)
                .map(|k| {
                    let t = t_max * k as f64 / n as f64;
                    let z = ray.at(t);
                    ProbeSample {
                        s: t,
                        z,
                        log_abs_f: f.log_jet(z).log_abs(),
                    }
                })
                .collect();
            (PathKind::Ray, s, None)
        }
        Probe::Orbit { newton, z0, n_max } => {
            let cfg = IterationConfig {
                max_iter: *n_max,
                ..Default::default()
            };
            let rec = iterate_orbit(newton, *z0, &cfg);
            let series = series_of(&rec, f);
            let s: Vec<ProbeSample> = rec
                .points
                .iter()
                .zip(series)
                .enumerate()
                .map(|(k, (z, l))| ProbeSample {
                    s: k as f64,
                    z: *z,
                    log_abs_f: l,
                })
                .collect();
            (
                PathKind::Orbit,
                s,
                Some(rec.decreasing_tail(DECREASING_TAIL)),
            )
        }
    };
    let logs: Vec<f64> = samples.iter().map(|s: &ProbeSample| s.log_abs_f).collect();
    let final_log_abs_f = logs.last().copied().unwrap_or(f64::NAN);
    let to_zero = match orbit_tail {
        Some(decreasing) => decreasing && final_log_abs_f < ZERO_THRESHOLD.ln(),
        None => tends_to_zero(&logs, ZERO_THRESHOLD.ln()),
    };
    let verdict = if to_zero {
        Verdict::TendsToZero
    } else {
        tends_to_value(f, &samples)
            .map_or(Verdict::Inconclusive, |value| Verdict::TendsTo { value })
    };
    AsymptoticProbe {
        path_kind,
        samples,
        verdict,
        final_log_abs_f,
    }
}

fn tends_to_value(f: &dyn EntireFunction, samples: &[ProbeSample]) -> Option<C64> {
    if samples.len() < DECREASING_TAIL {
        return None;
    }
    let tail = &samples[samples.len() - DECREASING_TAIL..];
    let values: Vec<C64> = tail.iter().map(|s| f.jet(s.z).value).collect();
    let a = *values.last()?;
    if !is_finite(a) || a.norm() < ZERO_THRESHOLD {
        return None;
    }
    values
        .iter()
        .all(|v| (v - a).norm() <= 1e-9 * (1.0 + a.norm()))
        .then_some(a)
}

/// The `log|f|` series of an orbit, recomputed from `f` if the record
/// carries none.
fn series_of(rec: &OrbitRecord, f: &dyn EntireFunction) -> Vec<f64> {
    if rec.log_abs_f.first().is_some_and(|l| !l.is_nan()) {
        rec.log_abs_f_series()
    } else {
        rec.points.iter().map(|z| f.log_jet(*z).log_abs()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum DecayError {
    #[error("orbit has {len} points; at least {min} are needed")]
    TooShort { len: usize, min: usize },
    #[error("log|f| is not strictly decreasing along the orbit tail")]
    NotDecaying,
}

pub const DECAY_MIN_LEN: usize = 30;

/// Least-squares slope of `log|f(z_n)|` against `n` over the last half of
/// the orbit.
pub fn decay_slope(rec: &OrbitRecord, f: &dyn EntireFunction) -> Result<f64, DecayError> {
    if rec.points.len() < DECAY_MIN_LEN {
        return Err(DecayError::TooShort {
            len: rec.points.len(),
            min: DECAY_MIN_LEN,
        });
    }
    let half = rec.points.len() / 2;
    let resolved = rec.log_f_change.iter().all(|d| d.re.is_finite());
    let tail: Vec<f64> = if resolved {
        // relative to the tail start; absolute values may not resolve unit steps
        let mut acc = 0.0;
        core::iter::once(0.0)
            .chain(rec.log_f_change[half..].iter().map(|d| {
                acc += d.re;
                acc
            }))
            .collect()
    } else {
        series_of(rec, f)[half..].to_vec()
    };
    let decreasing = if resolved {
        rec.decreasing_tail(rec.points.len() - half)
    } else {
        tends_to_zero(&tail, f64::INFINITY)
    };
    if !decreasing {
        return Err(DecayError::NotDecaying);
    }
    Ok(ls_slope(&tail))
}
