//! Synthetic test volumes with known geometry and motion.
//!
//! Textures are sums of a few low-frequency sinusoids, so they are smooth
//! enough for a 2x2-mean pyramid and can be shifted analytically by
//! evaluating the same function at offset coordinates.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::Scalar;
use crate::types::{GraySlice, SliceMask, Volume};

/// Band-limited sinusoid mixture, centered on 0 with peak amplitude at most
/// `amplitude`.
#[derive(Debug, Clone)]
pub struct Texture {
    waves: Vec<(f64, f64, f64, f64)>,
}

impl Texture {
    pub fn new(seed: u64, amplitude: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let count = 6;
        let waves = (0..count)
            .map(|_| {
                let freq = rng.gen_range(1.0 / 32.0..1.0 / 10.0);
                let angle = rng.gen_range(0.0..TAU);
                let phase = rng.gen_range(0.0..TAU);
                (
                    freq * angle.cos(),
                    freq * angle.sin(),
                    phase,
                    amplitude / count as f64,
                )
            })
            .collect();
        Self { waves }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.waves
            .iter()
            .map(|(fx, fy, ph, a)| a * (TAU * (fx * x + fy * y) + ph).sin())
            .sum()
    }
}

/// Full-frame texture in `[0.1, 0.9]`, sampled at pixel centers.
pub fn texture<T: Scalar>(width: usize, height: usize, seed: u64) -> GraySlice<T> {
    shifted_texture(width, height, seed, 0.0, 0.0)
}

/// [`texture`] translated by `(dx, dy)`: `out(x, y) = texture(x - dx, y - dy)`.
pub fn shifted_texture<T: Scalar>(
    width: usize,
    height: usize,
    seed: u64,
    dx: f64,
    dy: f64,
) -> GraySlice<T> {
    let tex = Texture::new(seed, 0.4);
    GraySlice::from_fn(width, height, |x, y| {
        T::of(0.5 + tex.eval(x as f64 + 0.5 - dx, y as f64 + 0.5 - dy))
    })
}

/// Textured annulus on a flat background.
#[derive(Debug, Clone)]
pub struct RingPhantom {
    pub width: usize,
    pub height: usize,
    pub outer_radius: f64,
    pub inner_radius: f64,
    pub background: f64,
    pub hole: f64,
    pub ring_level: f64,
    texture: Texture,
}

impl RingPhantom {
    pub fn new(
        width: usize,
        height: usize,
        outer_radius: f64,
        inner_radius: f64,
        seed: u64,
    ) -> Self {
        Self {
            width,
            height,
            outer_radius,
            inner_radius,
            background: 0.1,
            hole: 0.3,
            ring_level: 0.65,
            texture: Texture::new(seed, 0.5),
        }
    }

    /// Default geometry used by the end-to-end checks: a 128x128 frame with
    /// a ring of radii 30 / 18.
    pub fn standard(seed: u64) -> Self {
        Self::new(128, 128, 30.0, 18.0, seed)
    }

    /// Renders the ring centered at `(cx, cy)`. The texture is attached to
    /// the ring, so moving the center moves the texture with it. Edges are
    /// antialiased over one pixel.
    pub fn render<T: Scalar>(&self, cx: f64, cy: f64) -> GraySlice<T> {
        GraySlice::from_fn(self.width, self.height, |x, y| {
            let (px, py) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
            let r = px.hypot(py);
            let outer = (self.outer_radius + 0.5 - r).clamp(0.0, 1.0);
            let inner = (self.inner_radius + 0.5 - r).clamp(0.0, 1.0);
            let ring = self.ring_level + self.texture.eval(px, py);
            let inside = inner * self.hole + (1.0 - inner) * ring;
            T::of(outer * inside + (1.0 - outer) * self.background)
        })
    }

    /// Pixels whose centers lie inside the outer circle: the region a hull of
    /// boundary keypoints should recover.
    pub fn truth_mask(&self, cx: f64, cy: f64) -> SliceMask {
        SliceMask::from_fn(self.width, self.height, |x, y| {
            let (px, py) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
            px.hypot(py) <= self.outer_radius
        })
    }

    /// `count` points evenly spaced on the outer boundary.
    pub fn boundary_points(&self, cx: f64, cy: f64, count: usize) -> Vec<(f64, f64)> {
        (0..count)
            .map(|k| {
                let a = TAU * k as f64 / count as f64;
                (
                    cx + self.outer_radius * a.cos(),
                    cy + self.outer_radius * a.sin(),
                )
            })
            .collect()
    }
}

/// A ring volume together with its per-slice ground truth.
#[derive(Debug, Clone)]
pub struct RingVolume<T> {
    pub volume: Volume<T>,
    pub phantom: RingPhantom,
    /// Ring center on every slice.
    pub centers: Vec<(f64, f64)>,
    pub truth: Vec<SliceMask>,
}

/// Stack of `slices` ring images whose center moves by `drift` per slice,
/// anchored so slice `anchor` has its ring at the frame center.
pub fn ring_volume<T: Scalar>(
    phantom: RingPhantom,
    slices: usize,
    anchor: usize,
    drift: (f64, f64),
) -> RingVolume<T> {
    let (cx0, cy0) = (phantom.width as f64 / 2.0, phantom.height as f64 / 2.0);
    let centers: Vec<(f64, f64)> = (0..slices)
        .map(|i| {
            let k = i as f64 - anchor as f64;
            (cx0 + k * drift.0, cy0 + k * drift.1)
        })
        .collect();
    let images = centers
        .iter()
        .map(|&(cx, cy)| phantom.render(cx, cy))
        .collect();
    let truth = centers
        .iter()
        .map(|&(cx, cy)| phantom.truth_mask(cx, cy))
        .collect();
    let ids = (0..slices).map(|i| format!("slice_{i:03}.png")).collect();
    let volume = Volume::with_metadata(images, 1.0, ids).expect("phantom slices share dimensions");
    RingVolume {
        volume,
        phantom,
        centers,
        truth,
    }
}

/// Bright axis-aligned square on a dark background.
pub fn square_slice<T: Scalar>(
    width: usize,
    height: usize,
    x0: usize,
    y0: usize,
    side: usize,
) -> GraySlice<T> {
    GraySlice::from_fn(width, height, |x, y| {
        let inside = (x0..x0 + side).contains(&x) && (y0..y0 + side).contains(&y);
        T::of(if inside { 0.9 } else { 0.1 })
    })
}
