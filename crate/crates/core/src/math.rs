//! Small numeric helpers shared across modules.

use crate::C64;
#[allow(unused_imports)] // shadowed by std's inherent methods when std is linked
use num_traits::Float;

pub(crate) const TAU: f64 = core::f64::consts::TAU;

#[inline]
pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub(crate) fn is_finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Error-free sum: returns `(s, e)` with `s = fl(a + b)` and `a + b = s + e` exactly.
#[inline]
pub(crate) fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Complex number carried as an unevaluated sum `hi + lo`.
///
/// Used for orbit positions whose steps fall below the resolution of `hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Compensated {
    pub hi: C64,
    pub lo: C64,
}

impl Compensated {
    pub fn new(z: C64) -> Self {
        Self {
            hi: z,
            lo: C64::new(0.0, 0.0),
        }
    }

    pub fn add(self, d: C64) -> Self {
        let (re, ere) = two_sum(self.hi.re, d.re);
        let (im, eim) = two_sum(self.hi.im, d.im);
        let lo = C64::new(self.lo.re + ere, self.lo.im + eim);
        // renormalize so that |lo| stays below half an ulp of hi
        let (re, lre) = two_sum(re, lo.re);
        let (im, lim) = two_sum(im, lo.im);
        Self {
            hi: C64::new(re, im),
            lo: C64::new(lre, lim),
        }
    }

    #[cfg(test)]
    pub fn sub(self, other: Self) -> C64 {
        (self.hi - other.hi) + (self.lo - other.lo)
    }
}

/// `exp(2πi·Z)` with `Re Z` reduced modulo 1 first, so that the value is
/// periodic to the last bit.
#[inline]
pub(crate) fn periodic_exp(z: C64) -> C64 {
    let k = z.re.round();
    (c(0.0, TAU) * c(z.re - k, z.im)).exp()
}

/// `sin(2πZ)` with the same reduction as [`periodic_exp`].
#[inline]
pub(crate) fn periodic_sin(z: C64) -> C64 {
    let k = z.re.round();
    (c(z.re - k, z.im) * TAU).sin()
}

#[inline]
pub(crate) fn periodic_cos(z: C64) -> C64 {
    let k = z.re.round();
    (c(z.re - k, z.im) * TAU).cos()
}

/// SplitMix64 step; deterministic hashing for palettes and seeds.
pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Least-squares slope of `ys` against their indices `0..n`.
pub(crate) fn ls_slope(ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    let mean_x = (n - 1.0) / 2.0;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (k, y) in ys.iter().enumerate() {
        let dx = k as f64 - mean_x;
        sxy += dx * (y - mean_y);
        sxx += dx * dx;
    }
    sxy / sxx
}
