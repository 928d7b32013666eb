//! Composite 16-point Gauss–Legendre quadrature along straight segments.

use crate::C64;

/// Positive nodes and weights of the 16-point rule on `[-1, 1]`.
const GL16: [(f64, f64); 8] = [
    (0.989_400_934_991_649_9, 0.027_152_459_411_754_095),
    (0.944_575_023_073_232_6, 0.062_253_523_938_647_89),
    (0.865_631_202_387_831_7, 0.095_158_511_682_492_78),
    (0.755_404_408_355_003, 0.124_628_971_255_533_87),
    (0.617_876_244_402_643_7, 0.149_595_988_816_576_73),
    (0.458_016_777_657_227_4, 0.169_156_519_395_002_54),
    (0.281_603_550_779_258_9, 0.182_603_415_044_923_6),
    (0.095_012_509_837_637_44, 0.189_450_610_455_068_5),
];

/// Largest panel count tried before giving up.
pub const MAX_PANELS: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: C64,
    /// `|I_2n − I_n|` for the final doubling.
    pub est_error: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum QuadError<E> {
    #[error("integrand failed at {at}")]
    Integrand { at: C64, cause: E },
    #[error("tolerance not reached with {panels} panels (estimate {est_error:e})")]
    NotConverged { panels: usize, est_error: f64 },
}

/// `∫_a^b f(ζ) dζ` over the segment with `panels` equal panels.
pub fn gauss_legendre<E>(
    a: C64,
    b: C64,
    panels: usize,
    f: &mut impl FnMut(C64) -> Result<C64, E>,
) -> Result<C64, QuadError<E>> {
    let h = (b - a) / panels as f64;
    let mut total = C64::new(0.0, 0.0);
    for p in 0..panels {
        let mid = a + h * (p as f64 + 0.5);
        let half = h * 0.5;
        let mut acc = C64::new(0.0, 0.0);
        for &(x, w) in &GL16 {
            for s in [-x, x] {
                let z = mid + half * s;
                let v = f(z).map_err(|cause| QuadError::Integrand { at: z, cause })?;
                acc += v * w;
            }
        }
        total += acc * half;
    }
    Ok(total)
}

/// Doubles the panel count from `start_panels` until `|I_2n − I_n| ≤ tol·(1 + |I_2n|)`.
pub fn integrate_adaptive<E>(
    a: C64,
    b: C64,
    start_panels: usize,
    tol: f64,
    f: &mut impl FnMut(C64) -> Result<C64, E>,
) -> Result<Quadrature, QuadError<E>> {
    let mut n = start_panels.max(1);
    let mut prev = gauss_legendre(a, b, n, f)?;
    loop {
        let next_n = 2 * n;
        if next_n > MAX_PANELS {
            return Err(QuadError::NotConverged {
                panels: n,
                est_error: f64::INFINITY,
            });
        }
        let next = gauss_legendre(a, b, next_n, f)?;
        let est = (next - prev).norm();
        if !est.is_finite() {
            return Err(QuadError::NotConverged {
                panels: next_n,
                est_error: est,
            });
        }
        if est <= tol * (1.0 + next.norm()) {
            return Ok(Quadrature {
                value: next,
                est_error: est,
                panels: next_n,
            });
        }
        if 2 * next_n > MAX_PANELS {
            return Err(QuadError::NotConverged {
                panels: next_n,
                est_error: est,
            });
        }
        n = next_n;
        prev = next;
    }
}
