//! Per-pixel basin classification.
//!
//! Pixel `(i, j)`, with `i` counting columns from the left and `j` rows from
//! the top, is seeded at its center:
//!
//! ```text
//! z(i, j) = center + (−W/2 + (i + ½)·W/w) + i·(H/2 − (j + ½)·H/h),   H = W·h/w
//! ```
//!
//! Nothing in a pixel depends on any other pixel, so any tiling reproduces
//! the same image.

use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std's inherent methods when std is linked
use num_traits::Float;

use crate::dynamics::{
    classify_orbit, find_roots_in, iterate_orbit, ConfigError, IterationConfig, OrbitOutcome, Rect,
};
use crate::functions::{EntireFunction, NewtonMap, RootFixedPoint};
use crate::math::{c, splitmix64};
use crate::C64;

pub const MAX_DIM: u32 = 8192;
/// Seeds per side of the grid that discovers the root table.
pub const ROOT_SEEDS: usize = 48;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RenderError {
    #[error("viewport width must be positive and finite, got {0}")]
    BadWidth(f64),
    #[error("viewport center must be finite")]
    BadCenter,
    #[error("pixel dimensions must lie in 1..={MAX_DIM}, got {0}x{1}")]
    BadDims(u32, u32),
    #[error("the map has no underlying function to classify orbits with")]
    NoFunction,
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Viewport {
    pub center: C64,
    pub width: f64,
    pub px_w: u32,
    pub px_h: u32,
}

impl Viewport {
    pub fn validate(&self) -> Result<(), RenderError> {
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(RenderError::BadWidth(self.width));
        }
        if !(self.center.re.is_finite() && self.center.im.is_finite()) {
            return Err(RenderError::BadCenter);
        }
        let ok = |d: u32| (1..=MAX_DIM).contains(&d);
        if !ok(self.px_w) || !ok(self.px_h) {
            return Err(RenderError::BadDims(self.px_w, self.px_h));
        }
        Ok(())
    }

    pub fn height(&self) -> f64 {
        self.width * self.px_h as f64 / self.px_w as f64
    }

    pub fn pixel_point(&self, i: u32, j: u32) -> C64 {
        let (w, h) = (self.width, self.height());
        c(
            self.center.re - w / 2.0 + (i as f64 + 0.5) * w / self.px_w as f64,
            self.center.im + h / 2.0 - (j as f64 + 0.5) * h / self.px_h as f64,
        )
    }

    pub fn rect(&self) -> Rect {
        Rect::centered(self.center, self.width, self.height())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum OutcomeTag {
    ConvergedToRoot,
    EscapedFToZero,
    EscapedOther,
    PoleHit,
    CycleDetected,
    Undetermined,
}

impl OutcomeTag {
    pub const ALL: [OutcomeTag; 6] = [
        OutcomeTag::ConvergedToRoot,
        OutcomeTag::EscapedFToZero,
        OutcomeTag::EscapedOther,
        OutcomeTag::PoleHit,
        OutcomeTag::CycleDetected,
        OutcomeTag::Undetermined,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OutcomeTag::ConvergedToRoot => "converged_to_root",
            OutcomeTag::EscapedFToZero => "escaped_f_to_zero",
            OutcomeTag::EscapedOther => "escaped_other",
            OutcomeTag::PoleHit => "pole_hit",
            OutcomeTag::CycleDetected => "cycle_detected",
            OutcomeTag::Undetermined => "undetermined",
        }
    }
}

impl From<&OrbitOutcome> for OutcomeTag {
    fn from(o: &OrbitOutcome) -> Self {
        match o {
            OrbitOutcome::ConvergedToRoot { .. } => OutcomeTag::ConvergedToRoot,
            OrbitOutcome::EscapedFToZero => OutcomeTag::EscapedFToZero,
            OrbitOutcome::EscapedOther => OutcomeTag::EscapedOther,
            OrbitOutcome::PoleHit { .. } => OutcomeTag::PoleHit,
            OrbitOutcome::CycleDetected { .. } => OutcomeTag::CycleDetected,
            OrbitOutcome::Undetermined => OutcomeTag::Undetermined,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PixelOutcome {
    pub tag: OutcomeTag,
    /// Index into the root table; `None` for other tags and for roots
    /// missing from the table.
    pub root_index: Option<u32>,
    pub iterations: u32,
}

/// Roots found over the viewport, sorted by `(Re, Im)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RootTable {
    pub roots: Vec<RootFixedPoint>,
}

impl RootTable {
    pub fn discover(f: Arc<dyn EntireFunction>, view: &Viewport, cfg: &IterationConfig) -> Self {
        Self {
            roots: find_roots_in(f, view.rect(), ROOT_SEEDS, cfg),
        }
    }

    pub fn index_of(&self, xi: C64) -> Option<u32> {
        let (k, r) = self
            .roots
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1.xi - xi).norm().total_cmp(&(b.1.xi - xi).norm()))?;
        ((r.xi - xi).norm() <= 1e-6 * xi.norm().max(1.0)).then_some(k as u32)
    }
}

/// Hues by root index from a seeded golden-ratio walk; brightness falls
/// with `log(1 + iterations)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Palette {
    pub seed: u64,
}

pub const ESCAPED_F_TO_ZERO_RGB: [u8; 3] = [250, 205, 40];
pub const ESCAPED_OTHER_RGB: [u8; 3] = [70, 70, 80];
pub const POLE_RGB: [u8; 3] = [255, 255, 255];
pub const CYCLE_RGB: [u8; 3] = [200, 30, 30];
pub const UNDETERMINED_RGB: [u8; 3] = [0, 0, 0];
pub const UNLISTED_ROOT_RGB: [u8; 3] = [150, 150, 150];

impl Palette {
    pub fn root_hue(&self, index: u32) -> f64 {
        const GOLDEN: f64 = 0.618_033_988_749_894_9;
        let offset = (splitmix64(self.seed) >> 11) as f64 / (1u64 << 53) as f64;
        (offset + index as f64 * GOLDEN).fract()
    }

    pub fn color(&self, p: &PixelOutcome) -> [u8; 3] {
        match (p.tag, p.root_index) {
            (OutcomeTag::ConvergedToRoot, Some(k)) => {
                let v = (1.0 - 0.12 * (p.iterations as f64).ln_1p()).clamp(0.3, 1.0);
                hsv(self.root_hue(k), 0.7, v)
            }
            (OutcomeTag::ConvergedToRoot, None) => UNLISTED_ROOT_RGB,
            (OutcomeTag::EscapedFToZero, _) => ESCAPED_F_TO_ZERO_RGB,
            (OutcomeTag::EscapedOther, _) => ESCAPED_OTHER_RGB,
            (OutcomeTag::PoleHit, _) => POLE_RGB,
            (OutcomeTag::CycleDetected, _) => CYCLE_RGB,
            (OutcomeTag::Undetermined, _) => UNDETERMINED_RGB,
        }
    }
}

fn hsv(h: f64, s: f64, v: f64) -> [u8; 3] {
    let h6 = h * 6.0;
    let sector = h6.floor();
    let fr = h6 - sector;
    let (p, q, t) = (
        v * (1.0 - s),
        v * (1.0 - s * fr),
        v * (1.0 - s * (1.0 - fr)),
    );
    let (r, g, b) = match sector as i64 % 6 {
        0 => (v, t, p),
        1 => (q, v, p),
        2 => (p, v, t),
        3 => (p, q, v),
        4 => (t, p, v),
        _ => (v, p, q),
    };
    let byte = |x: f64| (x * 255.0).round().clamp(0.0, 255.0) as u8;
    [byte(r), byte(g), byte(b)]
}

/// Everything a pixel needs, shared read-only between workers.
#[derive(Debug, Clone)]
pub struct Renderer {
    newton: NewtonMap,
    f: Arc<dyn EntireFunction>,
    pub view: Viewport,
    pub cfg: IterationConfig,
    pub palette: Palette,
    pub roots: RootTable,
}

impl Renderer {
    pub fn new(
        newton: NewtonMap,
        view: Viewport,
        cfg: IterationConfig,
        palette: Palette,
    ) -> Result<Self, RenderError> {
        view.validate()?;
        cfg.validate()?;
        let f = newton.function().cloned().ok_or(RenderError::NoFunction)?;
        let roots = RootTable::discover(f.clone(), &view, &cfg);
        Ok(Self {
            newton,
            f,
            view,
            cfg,
            palette,
            roots,
        })
    }

    pub fn classify(&self, z0: C64) -> PixelOutcome {
        let rec = iterate_orbit(&self.newton, z0, &self.cfg);
        let iterations = (rec.len() - 1) as u32;
        let outcome =
            classify_orbit(&rec, self.f.as_ref(), &self.cfg).unwrap_or(OrbitOutcome::Undetermined);
        let root_index = match outcome {
            OrbitOutcome::ConvergedToRoot { xi, .. } => self.roots.index_of(xi),
            _ => None,
        };
        PixelOutcome {
            tag: OutcomeTag::from(&outcome),
            root_index,
            iterations,
        }
    }

    pub fn pixel(&self, i: u32, j: u32) -> PixelOutcome {
        self.classify(self.view.pixel_point(i, j))
    }

    /// Pixels of the rectangle `[x0, x0 + w) × [y0, y0 + h)`, row-major.
    pub fn region(&self, x0: u32, y0: u32, w: u32, h: u32) -> Vec<PixelOutcome> {
        let mut out = Vec::with_capacity(w as usize * h as usize);
        for j in y0..y0 + h {
            for i in x0..x0 + w {
                out.push(self.pixel(i, j));
            }
        }
        out
    }
}

/// Classified pixels and their colors, row-major with the top row first.
#[derive(Debug, Clone, PartialEq)]
pub struct BasinImage {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<PixelOutcome>,
    pub rgb: Vec<u8>,
}

impl BasinImage {
    /// Panics unless `pixels.len() == width·height`.
    pub fn from_pixels(
        width: u32,
        height: u32,
        pixels: Vec<PixelOutcome>,
        palette: &Palette,
    ) -> Self {
        assert_eq!(pixels.len(), width as usize * height as usize);
        let rgb = pixels.iter().flat_map(|p| palette.color(p)).collect();
        Self {
            width,
            height,
            pixels,
            rgb,
        }
    }

    /// Pixel count per root index, in index order.
    pub fn root_class_counts(&self, n_roots: usize) -> Vec<usize> {
        let mut counts = alloc::vec![0; n_roots];
        for p in &self.pixels {
            if let Some(k) = p.root_index {
                if let Some(slot) = counts.get_mut(k as usize) {
                    *slot += 1;
                }
            }
        }
        counts
    }
}
