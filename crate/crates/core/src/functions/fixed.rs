use super::newton::{NewtonMap, PoleCause, Step};
use crate::math::c;
use crate::C64;

/// An attracting fixed point of a Newton map, i.e. a root of `f`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RootFixedPoint {
    pub xi: C64,
    pub m: u32,
    /// `(m − 1)/m`.
    pub multiplier: f64,
    /// Finite-difference `N'(ξ)`.
    pub measured_multiplier: C64,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum FixedPointError {
    #[error("refinement hit a pole ({cause:?}) at {at}")]
    Pole { at: C64, cause: PoleCause },
    #[error("refinement did not converge: |N(z) − z| = {residual:e} after {iterations} steps")]
    NotConverged { residual: f64, iterations: usize },
    #[error("multiplier {measured} outside [0, 1): not a Newton fixed point")]
    NotNewtonFixedPoint { measured: C64 },
    #[error("multiplier {measured} indistinguishable from 1 (multiplicity above 1e6)")]
    Indifferent { measured: C64 },
    #[error(
        "degenerate degrees (m = {m}, n = {n}): N is not a rational map of degree ≥ 2 at infinity"
    )]
    DegenerateDegrees { m: u32, n: u32 },
}

const MAX_REFINE: usize = 100_000;
const MAX_MULTIPLICITY: f64 = 1e6;

/// Refines a root of `f` by iterating `N`, then reads its multiplicity off
/// `N'(ξ) = (m − 1)/m`.
pub fn classify_fixed_point(
    n: &NewtonMap,
    xi_guess: C64,
    tol: f64,
) -> Result<RootFixedPoint, FixedPointError> {
    let mut z = xi_guess;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < MAX_REFINE {
        let w = match n.step(z) {
            Step::Point(w) => w,
            Step::Pole(cause) => return Err(FixedPointError::Pole { at: z, cause }),
        };
        residual = (w - z).norm();
        iterations += 1;
        if residual == 0.0 {
            break;
        }
        z = w;
        if residual <= tol * 1e-3 * z.norm().max(1.0) {
            break;
        }
    }
    let check = match n.step(z) {
        Step::Point(w) => (w - z).norm(),
        Step::Pole(cause) => return Err(FixedPointError::Pole { at: z, cause }),
    };
    if check > tol {
        return Err(FixedPointError::NotConverged {
            residual: residual.max(check),
            iterations,
        });
    }

    let h = 1e-5 * z.norm().max(1.0);
    let hh = c(h, 0.0);
    let (a, b) = match (n.step(z + hh), n.step(z - hh)) {
        (Step::Point(a), Step::Point(b)) => (a, b),
        (Step::Pole(cause), _) | (_, Step::Pole(cause)) => {
            return Err(FixedPointError::Pole { at: z, cause })
        }
    };
    let measured = (a - b) / (2.0 * h);
    if !(measured.re < 1.0) || measured.re < -10.0 * tol {
        return Err(FixedPointError::NotNewtonFixedPoint { measured });
    }
    let inv = 1.0 / (1.0 - measured.re);
    if inv > MAX_MULTIPLICITY {
        return Err(FixedPointError::Indifferent { measured });
    }
    let m = num_traits::Float::round(inv).max(1.0) as u32;
    let multiplier = (m - 1) as f64 / m as f64;
    if (measured - multiplier).norm() > 10.0 * tol {
        return Err(FixedPointError::NotNewtonFixedPoint { measured });
    }
    Ok(RootFixedPoint {
        xi: z,
        m,
        multiplier,
        measured_multiplier: measured,
    })
}

/// Type of `∞` for the Newton map of `p·e^q`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum InfinityClass {
    Repelling { multiplier: f64 },
    Parabolic { multiplier: f64, multiplicity: u32 },
}

/// `deg q = 0, deg p = m ≥ 2`: repelling with multiplier `m/(m − 1)`.
/// `deg q = n > 0`: parabolic with multiplicity `n + 1`.
pub fn classify_infinity(m: u32, n: u32) -> Result<InfinityClass, FixedPointError> {
    if n > 0 {
        return Ok(InfinityClass::Parabolic {
            multiplier: 1.0,
            multiplicity: n + 1,
        });
    }
    if m <= 1 {
        return Err(FixedPointError::DegenerateDegrees { m, n });
    }
    Ok(InfinityClass::Repelling {
        multiplier: m as f64 / (m - 1) as f64,
    })
}
