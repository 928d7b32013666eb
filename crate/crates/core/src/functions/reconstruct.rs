use alloc::vec;
use alloc::vec::Vec;

use super::newton::{NewtonMap, PoleCause};
use super::quad::{integrate_adaptive, QuadError};
use crate::math::c;
use crate::C64;

/// Target of the Richardson estimate, relative to `1 + |∫|`.
pub const RECONSTRUCT_TOL: f64 = 1e-10;

/// `f(z1)/f(z0)` recovered from `N` alone.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReconstructionResult {
    pub ratio: C64,
    /// `∫ dζ/(ζ − N(ζ))`, i.e. a branch of `log(f(z1)/f(z0))`.
    pub log_ratio: C64,
    pub path: Vec<C64>,
    /// First-order error bound on `ratio`.
    pub est_error: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum ReconstructError {
    #[error("path passes through a fixed point of N near {at}")]
    PathThroughSingularity { at: C64 },
    #[error("error estimate {est_error:e} above tolerance after {panels} panels")]
    ErrorAboveTolerance { est_error: f64, panels: usize },
    #[error("segments must be positive")]
    NoSegments,
}

/// `exp(∫_{z0}^{z1} dζ/(ζ − N(ζ)))` along the straight segment, starting
/// from `segments` Gauss–Legendre panels and doubling.
pub fn reconstruct_ratio(
    n: &NewtonMap,
    z0: C64,
    z1: C64,
    segments: usize,
) -> Result<ReconstructionResult, ReconstructError> {
    if segments == 0 {
        return Err(ReconstructError::NoSegments);
    }
    if let Some(at) = fixed_point_on_segment(n, z0, z1) {
        return Err(ReconstructError::PathThroughSingularity { at });
    }
    let mut integrand = |zeta: C64| -> Result<C64, ()> {
        match n.increment(zeta) {
            // ζ − N(ζ) = ∞ at poles of N
            Err(PoleCause::DerivativeVanished) => Ok(c(0.0, 0.0)),
            Err(_) => Err(()),
            Ok(d) => {
                if d.norm() <= 1e-12 * (1.0 + zeta.norm()) {
                    Err(())
                } else {
                    Ok(-c(1.0, 0.0) / d)
                }
            }
        }
    };
    let q =
        integrate_adaptive(z0, z1, segments, RECONSTRUCT_TOL, &mut integrand).map_err(
            |e| match e {
                QuadError::Integrand { at, .. } => ReconstructError::PathThroughSingularity { at },
                QuadError::NotConverged { panels, est_error } => {
                    ReconstructError::ErrorAboveTolerance { est_error, panels }
                }
            },
        )?;
    let ratio = q.value.exp();
    Ok(ReconstructionResult {
        ratio,
        log_ratio: q.value,
        path: vec![z0, z1],
        est_error: ratio.norm() * q.est_error,
        panels: q.panels,
    })
}

const SCAN_SAMPLES: usize = 256;

/// A point of `[z0, z1]` where `|N(ζ) − ζ|` has a local minimum below
/// `1e-10(1 + |ζ|)`. Gauss nodes straddle such a point symmetrically and
/// would otherwise return a principal value.
fn fixed_point_on_segment(n: &NewtonMap, z0: C64, z1: C64) -> Option<C64> {
    let at = |t: f64| z0 + (z1 - z0) * t;
    let size = |t: f64| match n.increment(at(t)) {
        Ok(d) => d.norm(),
        Err(PoleCause::Degenerate) => 0.0,
        Err(_) => f64::INFINITY,
    };
    let ts: Vec<f64> = (0..=SCAN_SAMPLES)
        .map(|k| k as f64 / SCAN_SAMPLES as f64)
        .collect();
    let ds: Vec<f64> = ts.iter().map(|&t| size(t)).collect();
    for k in 0..=SCAN_SAMPLES {
        let left = if k == 0 { f64::INFINITY } else { ds[k - 1] };
        let right = if k == SCAN_SAMPLES {
            f64::INFINITY
        } else {
            ds[k + 1]
        };
        if ds[k] > left || ds[k] > right {
            continue;
        }
        let (mut a, mut b) = (ts[k.saturating_sub(1)], ts[(k + 1).min(SCAN_SAMPLES)]);
        const INV_PHI: f64 = 0.618_033_988_749_894_9;
        for _ in 0..80 {
            let (m1, m2) = (b - (b - a) * INV_PHI, a + (b - a) * INV_PHI);
            if size(m1) <= size(m2) {
                b = m2;
            } else {
                a = m1;
            }
        }
        let t = 0.5 * (a + b);
        if size(t) <= 1e-10 * (1.0 + at(t).norm()) {
            return Some(at(t));
        }
    }
    None
}
