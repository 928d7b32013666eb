use alloc::vec::Vec;

use super::chart::LogChart;
use crate::dynamics::OrbitRecord;
use crate::math::Compensated;
use crate::C64;

pub const MIN_ORBITS: usize = 2;
pub const MIN_STEPS: usize = 200;
/// Tail length of the pair statistic.
pub const HEURISTIC_WINDOW: usize = 100;
pub const PARABOLIC_BELOW: f64 = 0.05;
pub const HYPERBOLIC_ABOVE: f64 = 0.2;
/// Transversal drift per step, relative to the mean step, that counts as
/// one-sided.
pub const ONE_SIDED_DRIFT: f64 = 0.05;
const CO_ESCAPE_DISTANCE: f64 = 10.0;
/// `ψ(w_n)` is only compared with `z_n` this close to the chart seed.
const PSI_CHECK_RADIUS: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum BakerLabel {
    ParabolicI,
    ParabolicII,
    Hyperbolic,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Confidence {
    GroundTruthChart,
    Heuristic,
}

/// Statistics behind a label. Fields that the chosen path does not compute
/// are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BakerEvidence {
    pub orbits: usize,
    /// Shortest orbit, in steps.
    pub steps: usize,
    /// Mean `|z_{n+1} − z_n|` over the tails.
    pub mean_step: f64,
    /// Largest `|Δw − 1|` over the chart tails.
    pub max_step_defect: Option<f64>,
    /// Range of `c_n = |z_n − w_n| / |z_{n+1} − z_n|`.
    pub contraction_min: Option<f64>,
    pub contraction_max: Option<f64>,
    /// Mean signed transversal displacement per step.
    pub transversal_drift: Option<f64>,
    pub im_spread: Option<f64>,
    /// Orbits whose last point was recovered as `ψ(w_n)`.
    pub psi_checked: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BakerTypeReport {
    pub label: BakerLabel,
    /// Strip half-width, present exactly for `Hyperbolic`.
    pub h_estimate: Option<f64>,
    pub evidence: BakerEvidence,
    pub confidence: Confidence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum BakerError {
    #[error("{got} orbits given; at least {MIN_ORBITS} are needed")]
    TooFewOrbits { got: usize },
    #[error("orbit {index} has {steps} steps; at least {MIN_STEPS} are needed")]
    TooShort { index: usize, steps: usize },
    #[error("orbit {index} does not escape with the others")]
    NotCoEscaping { index: usize },
}

/// Labels the invariant domain that a family of escaping orbits shares.
///
/// With a chart, every orbit tail must sit in `{Re w > η}` and move by
/// `w ↦ w + 1` up to less than ½; the domain is then the image of a tract,
/// which is parabolic of type I. Without one, the pair statistic
/// `c_n = |z_n − w_n| / |z_{n+1} − z_n|` over the last hundred steps decides:
/// all below 0.05 is parabolic (type II when the transversal drift is
/// one-sided), all above 0.2 is hyperbolic, anything else undetermined.
pub fn classify_baker_type(
    orbits: &[OrbitRecord],
    chart: Option<&LogChart>,
) -> Result<BakerTypeReport, BakerError> {
    if orbits.len() < MIN_ORBITS {
        return Err(BakerError::TooFewOrbits { got: orbits.len() });
    }
    for (index, o) in orbits.iter().enumerate() {
        let steps = o.len().saturating_sub(1);
        if steps < MIN_STEPS {
            return Err(BakerError::TooShort { index, steps });
        }
    }
    let steps = orbits.iter().map(|o| o.len() - 1).min().unwrap_or(0);
    let mut evidence = BakerEvidence {
        orbits: orbits.len(),
        steps,
        mean_step: mean_tail_step(orbits),
        ..Default::default()
    };
    match chart {
        Some(chart) => Ok(by_chart(orbits, chart, evidence)),
        None => {
            for (index, o) in orbits.iter().enumerate() {
                if !escapes(o) {
                    return Err(BakerError::NotCoEscaping { index });
                }
            }
            heuristic(orbits, &mut evidence);
            Ok(label_heuristic(orbits, evidence))
        }
    }
}

fn mean_tail_step(orbits: &[OrbitRecord]) -> f64 {
    let (sum, n) = orbits.iter().fold((0.0, 0usize), |(s, n), o| {
        let tail = &o.step_sizes[o.step_sizes.len() / 2..];
        (s + tail.iter().sum::<f64>(), n + tail.len())
    });
    sum / n.max(1) as f64
}

/// `w_k = −log f(z_k)`, continued along the orbit from the branch nearest
/// the chart seed. Positions are compensated: far out in a tract `|w|`
/// dwarfs the unit steps.
fn chart_coordinates(o: &OrbitRecord, chart: &LogChart) -> Vec<C64> {
    let mut w = Compensated::new(chart.neg_log_near(o.points[0], chart.seed_w));
    let mut out = Vec::with_capacity(o.len());
    out.push(w.hi);
    for d in &o.log_f_change {
        w = w.add(-d);
        out.push(w.hi);
    }
    out
}

fn by_chart(orbits: &[OrbitRecord], chart: &LogChart, mut ev: BakerEvidence) -> BakerTypeReport {
    let mut max_defect: f64 = 0.0;
    let mut in_half_plane = true;
    let mut psi_checked = 0;
    for o in orbits {
        let ws = chart_coordinates(o, chart);
        let tail = &ws[ws.len() / 2..];
        in_half_plane &= tail.iter().all(|w| w.re > chart.eta);
        for step in &o.log_f_change[o.log_f_change.len() / 2..] {
            let d = (-step - 1.0).norm();
            max_defect = if d.is_nan() {
                f64::NAN
            } else {
                max_defect.max(d)
            };
        }
        let (w_last, z_last) = (ws[ws.len() - 1], o.points[o.len() - 1]);
        if (w_last - chart.seed_w).norm() <= PSI_CHECK_RADIUS {
            if let Ok(z) = chart.psi(w_last) {
                if (z - z_last).norm() <= 1e-6 * (1.0 + z_last.norm()) {
                    psi_checked += 1;
                }
            }
        }
    }
    ev.max_step_defect = Some(max_defect);
    ev.psi_checked = psi_checked;
    let label = if in_half_plane && max_defect < 0.5 {
        BakerLabel::ParabolicI
    } else {
        BakerLabel::Undetermined
    };
    BakerTypeReport {
        label,
        h_estimate: None,
        evidence: ev,
        confidence: Confidence::GroundTruthChart,
    }
}

fn escapes(o: &OrbitRecord) -> bool {
    let (z0, zm, zl) = (o.points[0], o.points[o.len() / 2], o.points[o.len() - 1]);
    (zl - z0).norm() >= CO_ESCAPE_DISTANCE && (zl - z0).norm() > (zm - z0).norm()
}

fn heuristic(orbits: &[OrbitRecord], ev: &mut BakerEvidence) {
    let base = &orbits[0];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for other in &orbits[1..] {
        let n = base.len().min(other.len()) - 1;
        for k in n - HEURISTIC_WINDOW..n {
            let step = (base.points[k + 1] - base.points[k]).norm();
            let cn = (base.points[k] - other.points[k]).norm() / step;
            lo = lo.min(cn);
            hi = hi.max(cn);
        }
    }
    ev.contraction_min = Some(lo);
    ev.contraction_max = Some(hi);

    let mut drifts = Vec::with_capacity(orbits.len());
    let (mut im_lo, mut im_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for o in orbits {
        let n = o.len() - 1;
        let (a, b) = (o.points[n - HEURISTIC_WINDOW], o.points[n]);
        // transversal to the overall escape direction of the orbit
        let dir = (b - o.points[0]) / (b - o.points[0]).norm();
        drifts.push(((b - a) * dir.conj()).im / HEURISTIC_WINDOW as f64);
        for z in &o.points[n - HEURISTIC_WINDOW..] {
            im_lo = im_lo.min(z.im);
            im_hi = im_hi.max(z.im);
        }
    }
    let one_sided = drifts.iter().all(|d| *d > 0.0) || drifts.iter().all(|d| *d < 0.0);
    let mean = drifts.iter().sum::<f64>() / drifts.len() as f64;
    ev.transversal_drift = Some(if one_sided { mean } else { 0.0 });
    ev.im_spread = Some(im_hi - im_lo);
}

fn label_heuristic(orbits: &[OrbitRecord], ev: BakerEvidence) -> BakerTypeReport {
    let lo = ev.contraction_min.unwrap_or(f64::NAN);
    let hi = ev.contraction_max.unwrap_or(f64::NAN);
    let mut h_estimate = None;
    let label = if hi < PARABOLIC_BELOW {
        let drift = ev.transversal_drift.unwrap_or(0.0);
        if drift.abs() > ONE_SIDED_DRIFT * ev.mean_step {
            BakerLabel::ParabolicII
        } else {
            BakerLabel::ParabolicI
        }
    } else if lo > HYPERBOLIC_ABOVE {
        let spread = ev.im_spread.unwrap_or(0.0) / 2.0;
        let h = if spread > 0.0 {
            spread
        } else {
            let (a, b) = (orbits[0].points[0], orbits[1].points[0]);
            (a - b).norm() / 2.0
        };
        if h > 0.0 {
            h_estimate = Some(h);
            BakerLabel::Hyperbolic
        } else {
            BakerLabel::Undetermined
        }
    } else {
        BakerLabel::Undetermined
    };
    BakerTypeReport {
        label,
        h_estimate,
        evidence: ev,
        confidence: Confidence::Heuristic,
    }
}
