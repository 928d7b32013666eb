//! Tiled parallel rendering and PPM output.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use newton_atlas_core::render::{BasinImage, PixelOutcome, Renderer};
use rayon::prelude::*;

pub const TILE: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Tile {
    x0: u32,
    y0: u32,
    w: u32,
    h: u32,
}

fn tiles(width: u32, height: u32) -> Vec<Tile> {
    let mut out = Vec::new();
    for y0 in (0..height).step_by(TILE as usize) {
        for x0 in (0..width).step_by(TILE as usize) {
            out.push(Tile {
                x0,
                y0,
                w: TILE.min(width - x0),
                h: TILE.min(height - y0),
            });
        }
    }
    out
}

/// Renders on the current rayon pool. The result does not depend on the
/// pool size or on the order in which tiles finish.
pub fn render(renderer: &Renderer) -> BasinImage {
    let (width, height) = (renderer.view.px_w, renderer.view.px_h);
    let done: Vec<(Tile, Vec<PixelOutcome>)> = tiles(width, height)
        .into_par_iter()
        .map(|t| (t, renderer.region(t.x0, t.y0, t.w, t.h)))
        .collect();
    let blank = PixelOutcome {
        tag: newton_atlas_core::render::OutcomeTag::Undetermined,
        root_index: None,
        iterations: 0,
    };
    let mut pixels = vec![blank; width as usize * height as usize];
    for (t, block) in done {
        for (row, chunk) in block.chunks_exact(t.w as usize).enumerate() {
            let start = (t.y0 as usize + row) * width as usize + t.x0 as usize;
            pixels[start..start + t.w as usize].copy_from_slice(chunk);
        }
    }
    BasinImage::from_pixels(width, height, pixels, &renderer.palette)
}

/// [`render`] on a dedicated pool of `workers` threads.
pub fn render_with_workers(
    renderer: &Renderer,
    workers: usize,
) -> Result<BasinImage, rayon::ThreadPoolBuildError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()?;
    Ok(pool.install(|| render(renderer)))
}

/// Binary PPM: `P6\n<w> <h>\n255\n` followed by the RGB bytes, top row first.
pub fn encode_ppm(width: u32, height: u32, rgb: &[u8]) -> Vec<u8> {
    assert_eq!(rgb.len(), width as usize * height as usize * 3);
    let mut out = format!("P6\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(rgb);
    out
}

pub fn write_ppm(img: &BasinImage, path: &Path) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&encode_ppm(img.width, img.height, &img.rgb))?;
    w.flush()
}
