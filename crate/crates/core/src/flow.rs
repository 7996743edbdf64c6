//! Pyramidal Lucas-Kanade tracking of sparse keypoints between two slices.
//!
//! Coordinates are continuous slice coordinates (pixel `i` spans `[i, i+1)`),
//! so halving the image halves every coordinate exactly.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::types::{GraySlice, Keypoint, KeypointSet, KeypointStatus, TrackParams};
use crate::wavelet::Grid;

/// One pyramid level with its central-difference gradients.
#[derive(Debug, Clone)]
pub struct Level<T> {
    pub image: GraySlice<T>,
    grad_x: Grid<T>,
    grad_y: Grid<T>,
}

impl<T: Scalar> Level<T> {
    fn new(image: GraySlice<T>) -> Self {
        let (w, h) = image.dims();
        let half = T::of(0.5);
        let mut gx = Grid::zeros(w, h);
        let mut gy = Grid::zeros(w, h);
        for y in 0..h {
            for x in 0..w {
                let (xi, yi) = (x as isize, y as isize);
                gx.set(
                    x,
                    y,
                    (image.get_clamped(xi + 1, yi) - image.get_clamped(xi - 1, yi)) * half,
                );
                gy.set(
                    x,
                    y,
                    (image.get_clamped(xi, yi + 1) - image.get_clamped(xi, yi - 1)) * half,
                );
            }
        }
        Self {
            image,
            grad_x: gx,
            grad_y: gy,
        }
    }

    pub fn width(&self) -> usize {
        self.image.width()
    }

    pub fn height(&self) -> usize {
        self.image.height()
    }

    /// Bilinear read of intensity and both gradients at a continuous
    /// position, clamping to the border.
    #[inline]
    fn sample_all(&self, x: T, y: T) -> (T, T, T) {
        let (i0, j0, i1, j1, fx, fy) = self.taps(x, y);
        let w = self.width();
        let lerp = |d: &[T]| {
            let top = d[j0 * w + i0] * (T::one() - fx) + d[j0 * w + i1] * fx;
            let bot = d[j1 * w + i0] * (T::one() - fx) + d[j1 * w + i1] * fx;
            top * (T::one() - fy) + bot * fy
        };
        (
            lerp(self.image.data()),
            lerp(self.grad_x.data()),
            lerp(self.grad_y.data()),
        )
    }

    #[inline]
    fn sample(&self, x: T, y: T) -> T {
        let (i0, j0, i1, j1, fx, fy) = self.taps(x, y);
        let w = self.width();
        let d = self.image.data();
        let top = d[j0 * w + i0] * (T::one() - fx) + d[j0 * w + i1] * fx;
        let bot = d[j1 * w + i0] * (T::one() - fx) + d[j1 * w + i1] * fx;
        top * (T::one() - fy) + bot * fy
    }

    #[inline]
    fn taps(&self, x: T, y: T) -> (usize, usize, usize, usize, T, T) {
        let half = T::of(0.5);
        let max_u = T::of_usize(self.width() - 1);
        let max_v = T::of_usize(self.height() - 1);
        let u = (x - half).max(T::zero()).min(max_u);
        let v = (y - half).max(T::zero()).min(max_v);
        let (uf, vf) = (u.floor(), v.floor());
        let i0 = uf.to_usize().unwrap_or(0);
        let j0 = vf.to_usize().unwrap_or(0);
        let i1 = (i0 + 1).min(self.width() - 1);
        let j1 = (j0 + 1).min(self.height() - 1);
        (i0, j0, i1, j1, u - uf, v - vf)
    }

    /// Whether every sample of a `(2r+1)^2` window centered at `(x, y)` can
    /// be read without clamping.
    fn window_inside(&self, x: T, y: T, radius: usize) -> bool {
        let r = T::of_usize(radius);
        let half = T::of(0.5);
        let (w, h) = (T::of_usize(self.width()), T::of_usize(self.height()));
        x.is_finite()
            && y.is_finite()
            && x - r >= half
            && y - r >= half
            && x + r <= w - half
            && y + r <= h - half
    }
}

/// Coarse-to-fine image stack, level 0 at full resolution.
#[derive(Debug, Clone)]
pub struct Pyramid<T> {
    levels: Vec<Level<T>>,
}

impl<T: Scalar> Pyramid<T> {
    pub fn levels(&self) -> impl Iterator<Item = &GraySlice<T>> {
        self.levels.iter().map(|l| &l.image)
    }

    pub fn level(&self, index: usize) -> Option<&GraySlice<T>> {
        self.levels.get(index).map(|l| &l.image)
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.levels[0].image.dims()
    }

    fn compatible_with(&self, other: &Pyramid<T>) -> Result<()> {
        if self.levels.is_empty() || self.levels.len() != other.levels.len() {
            return Err(Error::Validation(format!(
                "pyramids have {} and {} levels",
                self.levels.len(),
                other.levels.len()
            )));
        }
        for (i, (a, b)) in self.levels.iter().zip(&other.levels).enumerate() {
            if a.image.dims() != b.image.dims() {
                return Err(Error::Validation(format!(
                    "pyramid level {i} differs: {:?} vs {:?}",
                    a.image.dims(),
                    b.image.dims()
                )));
            }
        }
        Ok(())
    }
}

/// 2x2 block mean; each level is `floor(previous / 2)` in both dimensions.
fn downsample<T: Scalar>(src: &GraySlice<T>) -> GraySlice<T> {
    let (w, h) = (src.width() / 2, src.height() / 2);
    let quarter = T::of(0.25);
    GraySlice::from_fn(w, h, |x, y| {
        (src.get(2 * x, 2 * y)
            + src.get(2 * x + 1, 2 * y)
            + src.get(2 * x, 2 * y + 1)
            + src.get(2 * x + 1, 2 * y + 1))
            * quarter
    })
}

pub fn build_pyramid<T: Scalar>(slice: &GraySlice<T>, levels: usize) -> Result<Pyramid<T>> {
    if levels == 0 {
        return Err(Error::Config("a pyramid needs at least one level".into()));
    }
    let shift = levels - 1;
    let (cw, ch) = (slice.width() >> shift, slice.height() >> shift);
    if levels > 1 && (cw < 2 || ch < 2) {
        return Err(Error::Config(format!(
            "{levels} levels on a {}x{} slice leave a {cw}x{ch} coarsest level (minimum 2x2)",
            slice.width(),
            slice.height()
        )));
    }
    let mut images = vec![slice.clone()];
    for _ in 1..levels {
        let next = downsample(images.last().expect("non-empty"));
        images.push(next);
    }
    Ok(Pyramid {
        levels: images.into_iter().map(Level::new).collect(),
    })
}

/// Result of tracking one keypoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackOutcome<T> {
    pub point: Keypoint<T>,
    pub iterations_used: usize,
    /// Mean absolute intensity difference over the final window.
    pub residual: T,
    pub fb_error: Option<T>,
}

impl<T: Scalar> TrackOutcome<T> {
    fn frozen(point: Keypoint<T>) -> Self {
        Self {
            point,
            iterations_used: 0,
            residual: T::zero(),
            fb_error: None,
        }
    }
}

struct Estimate<T> {
    x: T,
    y: T,
    iterations: usize,
    residual: T,
    status: KeypointStatus,
}

/// Smallest eigenvalue of the symmetric matrix `[[a, b], [b, c]]`.
fn min_eigenvalue<T: Scalar>(a: T, b: T, c: T) -> T {
    let half = T::of(0.5);
    let mean = (a + c) * half;
    let diff = (a - c) * half;
    mean - (diff * diff + b * b).sqrt()
}

/// Coarse-to-fine Lucas-Kanade estimate of where `(px, py)` on `prev` moved
/// to on `next`.
fn estimate<T: Scalar>(
    prev: &Pyramid<T>,
    next: &Pyramid<T>,
    px: T,
    py: T,
    params: &TrackParams<T>,
) -> Estimate<T> {
    let r = params.window_radius as isize;
    let n = T::of_usize(params.window_size() * params.window_size());
    let eps_sq = params.convergence_eps * params.convergence_eps;
    let two = T::of(2.0);
    let lost = |status| Estimate {
        x: px,
        y: py,
        iterations: 0,
        residual: T::zero(),
        status,
    };

    if !prev.levels[0].window_inside(px, py, params.window_radius) {
        return lost(KeypointStatus::LostOutOfBounds);
    }

    let mut window: Vec<(T, T, T, T, T)> = Vec::with_capacity(params.window_size().pow(2));
    let (mut gx_guess, mut gy_guess) = (T::zero(), T::zero());
    let mut iterations = 0;
    let (mut dx, mut dy) = (T::zero(), T::zero());

    for level in (0..prev.levels.len()).rev() {
        let pl = &prev.levels[level];
        let nl = &next.levels[level];
        let scale = T::one() / T::of_usize(1 << level);
        let (cx, cy) = (px * scale, py * scale);

        window.clear();
        let (mut gxx, mut gxy, mut gyy) = (T::zero(), T::zero(), T::zero());
        for oy in -r..=r {
            for ox in -r..=r {
                let sx = cx + T::of(ox as f64);
                let sy = cy + T::of(oy as f64);
                let (v, ix, iy) = pl.sample_all(sx, sy);
                gxx = gxx + ix * ix;
                gxy = gxy + ix * iy;
                gyy = gyy + iy * iy;
                window.push((sx, sy, v, ix, iy));
            }
        }

        if level == 0 && min_eigenvalue(gxx / n, gxy / n, gyy / n) < params.min_eigenvalue {
            return lost(KeypointStatus::LostUntrackable);
        }

        let det = gxx * gyy - gxy * gxy;
        let (mut nu_x, mut nu_y) = (T::zero(), T::zero());
        if det > T::epsilon() * (gxx + gyy) * (gxx + gyy) && det > T::min_positive_value() {
            for _ in 0..params.max_iterations {
                iterations += 1;
                let (mut bx, mut by) = (T::zero(), T::zero());
                let (ofx, ofy) = (gx_guess + nu_x, gy_guess + nu_y);
                for &(sx, sy, v, ix, iy) in &window {
                    let diff = v - nl.sample(sx + ofx, sy + ofy);
                    bx = bx + diff * ix;
                    by = by + diff * iy;
                }
                let step_x = (gyy * bx - gxy * by) / det;
                let step_y = (gxx * by - gxy * bx) / det;
                if !step_x.is_finite() || !step_y.is_finite() {
                    return lost(KeypointStatus::LostDiverged);
                }
                nu_x = nu_x + step_x;
                nu_y = nu_y + step_y;
                if step_x * step_x + step_y * step_y < eps_sq {
                    break;
                }
            }
        }

        if level > 0 {
            gx_guess = two * (gx_guess + nu_x);
            gy_guess = two * (gy_guess + nu_y);
        } else {
            dx = gx_guess + nu_x;
            dy = gy_guess + nu_y;
        }
    }

    let (nx, ny) = (px + dx, py + dy);
    if !nx.is_finite() || !ny.is_finite() {
        return lost(KeypointStatus::LostDiverged);
    }
    let fine = &next.levels[0];
    if !fine.window_inside(nx, ny, params.window_radius) {
        return lost(KeypointStatus::LostOutOfBounds);
    }
    let residual = window
        .iter()
        .map(|&(sx, sy, v, _, _)| (v - fine.sample(sx + dx, sy + dy)).abs())
        .sum::<T>()
        / n;

    Estimate {
        x: nx,
        y: ny,
        iterations,
        residual,
        status: KeypointStatus::Live,
    }
}

/// Tracks one keypoint from `prev` to `next`.
///
/// Points that are already lost come back unchanged. A point that gets lost
/// here keeps its incoming coordinates and takes the status that explains
/// the loss.
pub fn track_point<T: Scalar>(
    prev: &Pyramid<T>,
    next: &Pyramid<T>,
    p: &Keypoint<T>,
    params: &TrackParams<T>,
) -> Result<TrackOutcome<T>> {
    prev.compatible_with(next)?;
    if prev.len() != params.pyramid_levels {
        return Err(Error::Validation(format!(
            "pyramid has {} levels, parameters ask for {}",
            prev.len(),
            params.pyramid_levels
        )));
    }
    Ok(track_unchecked(prev, next, p, params))
}

fn track_unchecked<T: Scalar>(
    prev: &Pyramid<T>,
    next: &Pyramid<T>,
    p: &Keypoint<T>,
    params: &TrackParams<T>,
) -> TrackOutcome<T> {
    if !p.is_live() {
        return TrackOutcome::frozen(*p);
    }
    let fwd = estimate(prev, next, p.x, p.y, params);
    let mut out = TrackOutcome {
        point: Keypoint {
            x: fwd.x,
            y: fwd.y,
            status: fwd.status,
        },
        iterations_used: fwd.iterations,
        residual: fwd.residual,
        fb_error: None,
    };
    if !fwd.status.is_live() {
        out.point = Keypoint {
            x: p.x,
            y: p.y,
            status: fwd.status,
        };
        return out;
    }
    if let Some(limit) = params.fb_error_max {
        let back = estimate(next, prev, fwd.x, fwd.y, params);
        let err = if back.status.is_live() {
            let (ex, ey) = (back.x - p.x, back.y - p.y);
            let e = (ex * ex + ey * ey).sqrt();
            out.fb_error = Some(e);
            e
        } else {
            T::infinity()
        };
        if !(err <= limit) {
            out.point = Keypoint {
                x: p.x,
                y: p.y,
                status: KeypointStatus::LostDiverged,
            };
        }
    }
    out
}

/// Tracks a keypoint set between two equally sized slices. `target_index` is
/// the slice index the returned set is attached to.
pub fn track_set<T: Scalar>(
    prev_slice: &GraySlice<T>,
    next_slice: &GraySlice<T>,
    points: &KeypointSet<T>,
    target_index: usize,
    params: &TrackParams<T>,
) -> Result<KeypointSet<T>> {
    if prev_slice.dims() != next_slice.dims() {
        return Err(Error::Validation(format!(
            "slice dimensions differ: {:?} vs {:?}",
            prev_slice.dims(),
            next_slice.dims()
        )));
    }
    params.validate_for(prev_slice.width(), prev_slice.height())?;
    let prev = build_pyramid(prev_slice, params.pyramid_levels)?;
    let next = build_pyramid(next_slice, params.pyramid_levels)?;
    track_set_pyramids(&prev, &next, points, target_index, params)
}

/// [`track_set`] on prebuilt pyramids, so a chain can reuse each slice's
/// pyramid for both of its neighbors.
pub fn track_set_pyramids<T: Scalar>(
    prev: &Pyramid<T>,
    next: &Pyramid<T>,
    points: &KeypointSet<T>,
    target_index: usize,
    params: &TrackParams<T>,
) -> Result<KeypointSet<T>> {
    prev.compatible_with(next)?;
    let (w, h) = prev.dims();
    params.validate_for(w, h)?;
    if prev.len() != params.pyramid_levels {
        return Err(Error::Validation(format!(
            "pyramid has {} levels, parameters ask for {}",
            prev.len(),
            params.pyramid_levels
        )));
    }
    let tracked = points
        .points
        .par_iter()
        .map(|p| track_unchecked(prev, next, p, params).point)
        .collect();
    Ok(KeypointSet::new(target_index, tracked))
}
