use alloc::sync::Arc;
#[allow(unused_imports)] // shadowed by std's inherent methods when std is linked
use num_traits::Float;

use super::Ray;
use crate::functions::{EntireFunction, NewtonMap, Step};
use crate::math::{c, is_finite, TAU};
use crate::C64;

/// Largest `|Δw|` of one continuation substep.
const MAX_SUBSTEP: f64 = 1.0;
const MIN_FRACTION: f64 = 1e-9;
const CORRECTOR_ITERS: usize = 30;
/// Ray sampling used to pick the seed.
const RAY_DT: f64 = 0.25;
const RAY_T_MAX: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum ChartError {
    #[error("|f| does not fall below the target radius along the ray up to t = {t_max}")]
    NoDecay { t_max: f64 },
    #[error("target radius must be positive and finite")]
    BadRadius,
    #[error("branch continuation failed towards w = {w}: the chart left its injectivity domain")]
    Continuation { w: C64 },
    #[error("Newton map has a pole at ψ(w) = {z}")]
    Pole { z: C64 },
    #[error("no η₀ ≤ {eta_max} certified on the grid (best max defect {best_defect})")]
    Eta0NotFound { eta_max: f64, best_defect: f64 },
}

/// The coordinate `w = −log f` on a tract `U_r = {|f| < r}` mapped onto the
/// half-plane `H_η = {Re w > η}`, `η = −ln r`, together with its inverse `ψ`.
#[derive(Debug, Clone)]
pub struct LogChart {
    f: Arc<dyn EntireFunction>,
    newton: NewtonMap,
    pub eta: f64,
    pub r_target: f64,
    /// Branch anchor: `−log f(seed_z) = seed_w`.
    pub seed_w: C64,
    pub seed_z: C64,
    pub seed_t: f64,
}

/// `G(w) = −log f(N(ψ(w)))` and `|G(w) − (w + 1)|`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChartDefect {
    pub w: C64,
    pub g_w: C64,
    pub defect: f64,
}

/// Seeds a chart at the first ray point where `log|f| < ln r_target − 1`.
pub fn build_chart(
    f: Arc<dyn EntireFunction>,
    ray: &Ray,
    r_target: f64,
) -> Result<LogChart, ChartError> {
    if !(r_target > 0.0 && r_target.is_finite()) {
        return Err(ChartError::BadRadius);
    }
    let eta = -r_target.ln();
    let mut t = 0.0;
    while t <= RAY_T_MAX {
        let z = ray.at(t);
        let l = f.log_jet(z);
        if l.is_finite() && -l.log_abs() > eta + 1.0 {
            return Ok(LogChart {
                newton: NewtonMap::of(f.clone()),
                f,
                eta,
                r_target,
                seed_w: -l.log_value,
                seed_z: z,
                seed_t: t,
            });
        }
        t += RAY_DT;
    }
    Err(ChartError::NoDecay { t_max: RAY_T_MAX })
}

impl LogChart {
    pub fn function(&self) -> &Arc<dyn EntireFunction> {
        &self.f
    }

    /// Uses `n` instead of the Newton map derived from `f`.
    pub fn with_newton(mut self, n: NewtonMap) -> Self {
        self.newton = n;
        self
    }

    /// `−log f(z)` on the branch nearest `near`.
    pub fn neg_log_near(&self, z: C64, near: C64) -> C64 {
        let v = -self.f.log_jet(z).log_value;
        let k = num_traits::Float::round((near - v).im / TAU);
        v + c(0.0, TAU * k)
    }

    /// `ψ(w)`, continued from the seed along the segment `[seed_w, w]`.
    pub fn psi(&self, w: C64) -> Result<C64, ChartError> {
        let total = w - self.seed_w;
        let len = total.norm();
        if len == 0.0 {
            return Ok(self.seed_z);
        }
        let mut z = self.seed_z;
        let mut wc = self.seed_w;
        let mut s = 0.0;
        let max_h = (MAX_SUBSTEP / len).min(1.0);
        let mut h = max_h;
        while s < 1.0 {
            let s1 = (s + h).min(1.0);
            let wt = self.seed_w + total * s1;
            match self.correct(z, wc, wt) {
                Some(zt) => {
                    z = zt;
                    wc = wt;
                    s = s1;
                    h = (h * 2.0).min(max_h);
                }
                None => {
                    h *= 0.5;
                    if h < MIN_FRACTION {
                        return Err(ChartError::Continuation { w: wt });
                    }
                }
            }
        }
        Ok(z)
    }

    /// Predictor `z + ψ'(wc)(wt − wc)` followed by Newton on `−log f(z) = wt`.
    fn correct(&self, z: C64, wc: C64, wt: C64) -> Option<C64> {
        let ld = self.f.log_jet(z).log_deriv;
        if !is_finite(ld) || ld == c(0.0, 0.0) {
            return None;
        }
        let dz_pred = -(wt - wc) / ld;
        let mut zt = z + dz_pred;
        let tol = 4e-15 * (1.0 + wt.norm());
        let mut prev_r = f64::INFINITY;
        let mut accepted = None;
        for _ in 0..CORRECTOR_ITERS {
            let lj = self.f.log_jet(zt);
            if !lj.is_finite() || lj.log_deriv == c(0.0, 0.0) {
                return None;
            }
            let rn = (self.neg_log_near(zt, wt) - wt).norm();
            if rn <= tol {
                accepted = Some(zt);
                break;
            }
            if rn >= prev_r {
                // stagnation at the rounding floor, or divergence
                if prev_r <= 1e3 * tol {
                    accepted = Some(zt);
                }
                break;
            }
            prev_r = rn;
            zt += (self.neg_log_near(zt, wt) - wt) / lj.log_deriv;
        }
        // a corrected point far from the predicted one sits on another sheet
        accepted.filter(|zt| (zt - z).norm() <= 2.0 * dz_pred.norm() + 1e-12 * (1.0 + z.norm()))
    }

    /// `ψ'(w) = −f(ψ(w))/f'(ψ(w))`.
    pub fn psi_prime(&self, w: C64) -> Result<C64, ChartError> {
        let z = self.psi(w)?;
        Ok(-c(1.0, 0.0) / self.f.log_jet(z).log_deriv)
    }

    /// `|−log f(ψ(w)) − w|`.
    pub fn residual(&self, w: C64) -> Result<f64, ChartError> {
        let z = self.psi(w)?;
        Ok((self.neg_log_near(z, w) - w).norm())
    }

    pub fn newton(&self) -> &NewtonMap {
        &self.newton
    }
}

/// `G(w) = −log f(N(ψ(w)))` on the branch nearest `w + 1`.
pub fn chart_pushforward(chart: &LogChart, w: C64) -> Result<ChartDefect, ChartError> {
    let z = chart.psi(w)?;
    let nz = match chart.newton.step(z) {
        Step::Point(nz) => nz,
        Step::Pole(_) => return Err(ChartError::Pole { z }),
    };
    let target = w + 1.0;
    let g_w = chart.neg_log_near(nz, target);
    Ok(ChartDefect {
        w,
        g_w,
        defect: (g_w - target).norm(),
    })
}

/// Grid and candidate spacing of the η₀ search.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Eta0Search {
    pub eta_max: f64,
    /// Spacing of candidate η values above the chart base.
    pub eta_step: f64,
    /// Samples per side.
    pub grid_n: usize,
    /// Sampled `Re w ∈ [η, η + re_span]`.
    pub re_span: f64,
    /// Sampled `Im w ∈ [−im_half, im_half]`.
    pub im_half: f64,
}

impl Default for Eta0Search {
    fn default() -> Self {
        Self {
            eta_max: 50.0,
            eta_step: 0.5,
            grid_n: 41,
            re_span: 20.0,
            im_half: 20.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Eta0Report {
    pub eta: f64,
    pub eta0: f64,
    pub max_defect: f64,
    /// `min (Re G(w) − Re w)` over the grid.
    pub min_drift: f64,
    /// `max |−log f(ψ(w)) − w|` over the grid.
    pub max_residual: f64,
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub grid_n: usize,
    pub candidates_tried: usize,
}

/// The smallest candidate `η₀ ≥ η` for which every grid point of
/// `[η₀, η₀ + re_span] × [−im_half, im_half]` has defect `< ½` and
/// `Re G(w) ≥ Re w + ½`.
pub fn find_eta0(chart: &LogChart, search: &Eta0Search) -> Result<Eta0Report, ChartError> {
    let n = search.grid_n.max(2);
    let mut best_defect = f64::INFINITY;
    let mut tried = 0;
    let mut k = 0usize;
    loop {
        let eta0 = chart.eta + k as f64 * search.eta_step;
        if eta0 > search.eta_max {
            break;
        }
        tried += 1;
        k += 1;
        let mut max_defect = 0.0f64;
        let mut min_drift = f64::INFINITY;
        let mut max_residual = 0.0f64;
        let mut ok = true;
        'grid: for i in 0..n {
            for j in 0..n {
                let w = c(
                    eta0 + search.re_span * i as f64 / (n - 1) as f64,
                    -search.im_half + 2.0 * search.im_half * j as f64 / (n - 1) as f64,
                );
                let Ok(d) = chart_pushforward(chart, w) else {
                    ok = false;
                    break 'grid;
                };
                let drift = d.g_w.re - w.re;
                max_defect = max_defect.max(d.defect);
                min_drift = min_drift.min(drift);
                if let Ok(r) = chart.residual(w) {
                    max_residual = max_residual.max(r);
                }
                if !(d.defect < 0.5 && drift >= 0.5) {
                    ok = false;
                    break 'grid;
                }
            }
        }
        if ok {
            return Ok(Eta0Report {
                eta: chart.eta,
                eta0,
                max_defect,
                min_drift,
                max_residual,
                re_min: eta0,
                re_max: eta0 + search.re_span,
                im_min: -search.im_half,
                im_max: search.im_half,
                grid_n: n,
                candidates_tried: tried,
            });
        }
        if max_defect.is_finite() {
            best_defect = best_defect.min(max_defect);
        }
    }
    Err(ChartError::Eta0NotFound {
        eta_max: search.eta_max,
        best_defect,
    })
}
