//! Dynamics modulo 1: the projection `Z ↦ e^{2πiZ}`, the quotient maps
//! `g_α`, `h_α` and the rotation number of the sine family.

use core::f64::consts::PI;
#[allow(unused_imports)] // shadowed by std's inherent methods when std is linked
use num_traits::Float;

use crate::functions::{DirectFamily, NewtonMap, Step};
use crate::math::{c, is_finite, periodic_exp, TAU};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum QuotientError {
    #[error("singularity of the map at {at}")]
    Singular { at: C64 },
    #[error("sample {at} lies on a pole of N")]
    SampleAtPole { at: C64 },
    #[error("map has no quotient relation to check")]
    NoQuotient,
    #[error(
        "limit along {direction} not within {tol:e} of 0 or 1 by t = {t_max}: last value {last}"
    )]
    LimitNotConverged {
        direction: &'static str,
        t_max: f64,
        tol: f64,
        last: C64,
    },
    #[error("limits along ±it are {up} and {down}, not the pair {{0, 1}}")]
    WrongLimits { up: C64, down: C64 },
    #[error("sine parameters invalid: {0}")]
    BadSineParams(&'static str),
    #[error("lift not monotone at x = {at}: N(x) = {image}")]
    NotMonotone { at: f64, image: f64 },
    #[error("target rotation {target} outside the bracket [0, {m_eps}]")]
    Bracket { target: f64, m_eps: u32 },
}

/// `π(Z) = e^{2πiZ}`.
pub fn project(z: C64) -> C64 {
    periodic_exp(z)
}

/// Quotient maps reachable from the catalog.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuotientMap {
    GAlpha { alpha: f64 },
    HAlpha { alpha: f64 },
}

impl QuotientMap {
    pub fn eval(&self, z: C64) -> Result<C64, QuotientError> {
        match *self {
            QuotientMap::GAlpha { alpha } => g_alpha_eval(alpha, z),
            QuotientMap::HAlpha { alpha } => h_alpha_eval(alpha, z),
        }
    }
}

/// `g_α(z) = z·e^{2πiα/(1+z)}`.
pub fn g_alpha_eval(alpha: f64, z: C64) -> Result<C64, QuotientError> {
    let d = z + 1.0;
    if d == c(0.0, 0.0) {
        return Err(QuotientError::Singular { at: z });
    }
    let v = z * (c(0.0, TAU * alpha) / d).exp();
    finite(v, z)
}

/// `g_α'(z) = e^{2πiα/(1+z)}·(1 − 2πiα z/(1+z)²)`.
pub fn g_alpha_derivative(alpha: f64, z: C64) -> Result<C64, QuotientError> {
    let d = z + 1.0;
    if d == c(0.0, 0.0) {
        return Err(QuotientError::Singular { at: z });
    }
    let a = c(0.0, TAU * alpha);
    let v = (a / d).exp() * (c(1.0, 0.0) - a * z / (d * d));
    finite(v, z)
}

/// `h_α(w) = w/(w + (1 − w)e^{2πiαw})`.
pub fn h_alpha_eval(alpha: f64, w: C64) -> Result<C64, QuotientError> {
    let e = (c(0.0, TAU * alpha) * w).exp();
    let den = w + (c(1.0, 0.0) - w) * e;
    if den == c(0.0, 0.0) || !is_finite(den) {
        return Err(QuotientError::Singular { at: w });
    }
    finite(w / den, w)
}

/// `g(z) = z·e^{2πiα e^z}`, the quotient of `Z + α e^{e^{2πiZ}}`.
pub fn expexp_quotient_eval(alpha: f64, z: C64) -> Result<C64, QuotientError> {
    let v = z * (c(0.0, TAU * alpha) * z.exp()).exp();
    finite(v, z)
}

/// `M(z) = 1/(z + 1)`, conjugating `g_α` to `h_α`.
pub fn mobius(z: C64) -> C64 {
    c(1.0, 0.0) / (z + 1.0)
}

pub fn mobius_inverse(w: C64) -> C64 {
    c(1.0, 0.0) / w - 1.0
}

fn finite(v: C64, at: C64) -> Result<C64, QuotientError> {
    if is_finite(v) {
        Ok(v)
    } else {
        Err(QuotientError::Singular { at })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SemiconjugacyReport {
    /// `max |e^{2πiN(Z)} − g(e^{2πiZ})| / max(1, |g(e^{2πiZ})|)`.
    pub max_residual: f64,
    pub worst_sample: C64,
    pub samples: usize,
}

/// Residual of `π∘N = g∘π` for the two periodic families that project:
/// `n_alpha` onto `g_α` and `expexp` onto `z·e^{2πiα e^z}`.
pub fn check_semiconjugacy(
    n: &NewtonMap,
    samples: &[C64],
) -> Result<SemiconjugacyReport, QuotientError> {
    let (alpha, expexp) = match n.direct() {
        Some(DirectFamily::NAlpha { alpha }) => (alpha, false),
        Some(DirectFamily::ExpExp { alpha }) => (alpha, true),
        _ => return Err(QuotientError::NoQuotient),
    };
    let mut report = SemiconjugacyReport {
        max_residual: 0.0,
        worst_sample: c(0.0, 0.0),
        samples: samples.len(),
    };
    for &z in samples {
        let p = project(z);
        if !expexp && (p + 1.0).norm() < 1e-12 {
            return Err(QuotientError::SampleAtPole { at: z });
        }
        let nz = match n.step(z) {
            Step::Point(w) => w,
            Step::Pole(_) => return Err(QuotientError::SampleAtPole { at: z }),
        };
        let lhs = project(nz);
        let rhs = if expexp {
            expexp_quotient_eval(alpha, p)?
        } else {
            g_alpha_eval(alpha, p)?
        };
        let r = (lhs - rhs).norm() / rhs.norm().max(1.0);
        if !(r <= report.max_residual) {
            report.max_residual = r;
            report.worst_sample = z;
        }
    }
    Ok(report)
}

/// Roots of `(1+z)² − 2πiαz = 0`, ordered so that `|z1| ≥ |z2|`.
///
/// The larger root is computed first and the other as its reciprocal,
/// which keeps `z1·z2 = 1` to rounding.
pub fn g_alpha_critical_points(alpha: f64) -> (C64, C64) {
    let b = c(2.0, -TAU * alpha);
    let disc = (b * b - 4.0).sqrt();
    let q1 = -(b + disc) * 0.5;
    let q2 = -(b - disc) * 0.5;
    let z1 = if q1.norm() >= q2.norm() { q1 } else { q2 };
    (z1, c(1.0, 0.0) / z1)
}

/// `|g_α(z) − z − 1 − 2πiα/z|`.
pub fn g_alpha_expansion_residual(alpha: f64, z: C64) -> Result<f64, QuotientError> {
    let g = g_alpha_eval(alpha, z)?;
    Ok((g - z - 1.0 - c(0.0, TAU * alpha) / z).norm())
}

/// `|g_α(z) − z − a − (a²/2 − a)/z|` with `a = 2πiα`: the expansion of
/// `z·e^{a/(1+z)}` carried to order `1/z`.
pub fn g_alpha_expansion_residual_exact(alpha: f64, z: C64) -> Result<f64, QuotientError> {
    let g = g_alpha_eval(alpha, z)?;
    let a = c(0.0, TAU * alpha);
    Ok((g - z - a - (a * a * 0.5 - a) / z).norm())
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HLimits {
    /// `h_α(i·t_max)`.
    pub limit_up: C64,
    /// `h_α(−i·t_max)`.
    pub limit_down: C64,
    /// Which of `{0, 1}` the upward limit approaches.
    pub up_target: f64,
    pub down_target: f64,
}

/// Limits of `h_α` along `±it`, asserted as the unordered pair `{0, 1}`
/// within `1e-6`.
pub fn h_alpha_asymptotic_limits(alpha: f64, t_max: f64) -> Result<HLimits, QuotientError> {
    const TOL: f64 = 1e-6;
    let up = h_alpha_eval(alpha, c(0.0, t_max))?;
    let down = h_alpha_eval(alpha, c(0.0, -t_max))?;
    let nearest = |v: C64, direction: &'static str| -> Result<f64, QuotientError> {
        if v.norm() <= TOL {
            Ok(0.0)
        } else if (v - 1.0).norm() <= TOL {
            Ok(1.0)
        } else {
            Err(QuotientError::LimitNotConverged {
                direction,
                t_max,
                tol: TOL,
                last: v,
            })
        }
    };
    let up_target = nearest(up, "+it")?;
    let down_target = nearest(down, "-it")?;
    if up_target == down_target {
        return Err(QuotientError::WrongLimits { up, down });
    }
    Ok(HLimits {
        limit_up: up,
        limit_down: down,
        up_target,
        down_target,
    })
}

/// Parameters of `N(Z) = Z + α/(1 + ε sin 2πZ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SineFamilyParams {
    pub alpha: f64,
    pub epsilon: f64,
    pub m_eps: u32,
}

/// `m_ε = ⌊(1 − ε)²/(2πε)⌋`.
pub fn sine_m_eps(epsilon: f64) -> u32 {
    let v = (1.0 - epsilon) * (1.0 - epsilon) / (2.0 * PI * epsilon);
    num_traits::Float::floor(v) as u32
}

impl SineFamilyParams {
    pub fn new(alpha: f64, epsilon: f64) -> Result<Self, QuotientError> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(QuotientError::BadSineParams("epsilon must lie in (0, 1)"));
        }
        let m_eps = sine_m_eps(epsilon);
        if m_eps == 0 {
            return Err(QuotientError::BadSineParams(
                "m_eps = 0: no admissible alpha",
            ));
        }
        if !(alpha > 0.0 && alpha <= m_eps as f64) {
            return Err(QuotientError::BadSineParams("alpha must lie in (0, m_eps]"));
        }
        Ok(Self {
            alpha,
            epsilon,
            m_eps,
        })
    }

    /// `N` restricted to the real line.
    pub fn lift(&self, x: f64) -> f64 {
        let k = num_traits::Float::round(x);
        x + self.alpha / (1.0 + self.epsilon * (TAU * (x - k)).sin())
    }

    /// `N'(x) = 1 − 2πεα cos 2πx/(1 + ε sin 2πx)²`.
    pub fn lift_derivative(&self, x: f64) -> f64 {
        let k = num_traits::Float::round(x);
        let t = TAU * (x - k);
        let d = 1.0 + self.epsilon * t.sin();
        1.0 - TAU * self.epsilon * self.alpha * t.cos() / (d * d)
    }

    /// `1 − 2πεα/(1 − ε)²`.
    pub fn derivative_lower_bound(&self) -> f64 {
        let d = 1.0 - self.epsilon;
        1.0 - TAU * self.epsilon * self.alpha / (d * d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RotationEstimate {
    pub rho: f64,
    pub n_iter: u64,
    /// `1/n`.
    pub error_bound: f64,
}

/// `(N^n(x0) − x0)/n`, tracked as an integer winding plus a fractional
/// position so that the sum does not lose precision for large `n`.
pub fn rotation_number(
    params: &SineFamilyParams,
    x0: f64,
    n: u64,
) -> Result<RotationEstimate, QuotientError> {
    let n = n.max(1);
    let mut x = x0 - num_traits::Float::floor(x0);
    let mut winding: i64 = 0;
    for _ in 0..n {
        let y = params.lift(x);
        if !(y > x) {
            return Err(QuotientError::NotMonotone { at: x, image: y });
        }
        let k = num_traits::Float::floor(y);
        winding += k as i64;
        x = y - k;
    }
    let x0_frac = x0 - num_traits::Float::floor(x0);
    let rho = (winding as f64 + (x - x0_frac)) / n as f64;
    Ok(RotationEstimate {
        rho,
        n_iter: n,
        error_bound: 1.0 / n as f64,
    })
}

/// Bisection on `α ∈ (0, m_ε]` for `Rot(N) = target_rho`, with
/// `n = ⌈10/tol⌉` iterations per estimate.
pub fn find_alpha_for_rotation(
    epsilon: f64,
    target_rho: f64,
    tol: f64,
) -> Result<f64, QuotientError> {
    let m_eps = sine_m_eps(epsilon);
    if !(epsilon > 0.0 && epsilon < 1.0) || m_eps == 0 {
        return Err(QuotientError::BadSineParams("epsilon gives m_eps = 0"));
    }
    if !(target_rho > 0.0 && target_rho <= m_eps as f64) {
        return Err(QuotientError::Bracket {
            target: target_rho,
            m_eps,
        });
    }
    let tol = tol.max(1e-6);
    let n = num_traits::Float::ceil(10.0 / tol) as u64;
    let rot = |alpha: f64| -> Result<f64, QuotientError> {
        rotation_number(&SineFamilyParams::new(alpha, epsilon)?, 0.0, n).map(|r| r.rho)
    };
    let (mut lo, mut hi) = (0.0f64, m_eps as f64);
    if rot(hi)? < target_rho - tol {
        return Err(QuotientError::Bracket {
            target: target_rho,
            m_eps,
        });
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if rot(mid)? < target_rho {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
