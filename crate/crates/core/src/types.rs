//! Value types shared across the engine: slices, volumes, regions, keypoints,
//! masks and tracking parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Single grayscale slice, row-major, intensities normalized to `[0, 1]`.
///
/// Pixel `(i, j)` covers the unit square `[i, i + 1) x [j, j + 1)` of slice
/// space, so its center sits at `(i + 0.5, j + 0.5)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraySlice<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Scalar> GraySlice<T> {
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Validation(format!(
                "slice dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::Validation(format!(
                "slice {width}x{height} needs {} intensities, got {}",
                width * height,
                data.len()
            )));
        }
        if let Some(pos) = data
            .iter()
            .position(|v| !(*v >= T::zero() && *v <= T::one()))
        {
            return Err(Error::Validation(format!(
                "intensity at ({}, {}) is outside [0, 1]",
                pos % width,
                pos / width
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Builds a slice by evaluating `f(x, y)` at every pixel index, clamping
    /// the result into `[0, 1]`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(width > 0 && height > 0, "slice dimensions must be positive");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                let v = f(x, y);
                data.push(if v.is_nan() {
                    T::zero()
                } else {
                    v.max(T::zero()).min(T::one())
                });
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Self::from_fn(width, height, |_, _| value)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.data[y * self.width + x]
    }

    /// Pixel read with coordinates clamped to the border.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> T {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.get(x, y)
    }

    /// Quantizes to 8 bits (rounding to nearest).
    pub fn to_u8(&self) -> Vec<u8> {
        self.data
            .iter()
            .map(|v| (v.to_f64_lossy() * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect()
    }
}

/// Ordered stack of equally sized slices. Index 0 is the first source in
/// load order; "upward" walks toward index 0.
#[derive(Debug, Clone)]
pub struct Volume<T> {
    slices: Vec<GraySlice<T>>,
    slice_spacing_mm: f64,
    source_ids: Vec<String>,
}

impl<T: Scalar> Volume<T> {
    pub fn new(slices: Vec<GraySlice<T>>) -> Result<Self> {
        let ids = (0..slices.len()).map(|i| format!("slice_{i:04}")).collect();
        Self::with_metadata(slices, 1.0, ids)
    }

    pub fn with_metadata(
        slices: Vec<GraySlice<T>>,
        slice_spacing_mm: f64,
        source_ids: Vec<String>,
    ) -> Result<Self> {
        let first = slices
            .first()
            .ok_or_else(|| Error::Validation("a volume needs at least one slice".into()))?;
        let dims = first.dims();
        let offenders: Vec<String> = slices
            .iter()
            .enumerate()
            .filter(|(_, s)| s.dims() != dims)
            .map(|(i, s)| format!("#{i} ({}x{})", s.width(), s.height()))
            .collect();
        if !offenders.is_empty() {
            return Err(Error::Validation(format!(
                "slices differ from {}x{}: {}",
                dims.0,
                dims.1,
                offenders.join(", ")
            )));
        }
        if !(slice_spacing_mm > 0.0) {
            return Err(Error::Validation(format!(
                "slice spacing must be positive, got {slice_spacing_mm}"
            )));
        }
        if source_ids.len() != slices.len() {
            return Err(Error::Validation(format!(
                "{} source ids for {} slices",
                source_ids.len(),
                slices.len()
            )));
        }
        Ok(Self {
            slices,
            slice_spacing_mm,
            source_ids,
        })
    }

    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    pub fn slices(&self) -> &[GraySlice<T>] {
        &self.slices
    }

    pub fn slice(&self, index: usize) -> Option<&GraySlice<T>> {
        self.slices.get(index)
    }

    pub fn width(&self) -> usize {
        self.slices[0].width()
    }

    pub fn height(&self) -> usize {
        self.slices[0].height()
    }

    pub fn slice_spacing_mm(&self) -> f64 {
        self.slice_spacing_mm
    }

    pub fn source_ids(&self) -> &[String] {
        &self.source_ids
    }

    /// Replaces one slice; used by tests that perturb part of a volume.
    pub fn replace_slice(&mut self, index: usize, slice: GraySlice<T>) -> Result<()> {
        if slice.dims() != self.slices[0].dims() {
            return Err(Error::Validation(
                "replacement slice has other dimensions".into(),
            ));
        }
        let target = self
            .slices
            .get_mut(index)
            .ok_or_else(|| Error::Validation(format!("slice index {index} out of range")))?;
        *target = slice;
        Ok(())
    }
}

/// Axis-aligned rectangle in pixel indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Roi {
    pub x0: usize,
    pub y0: usize,
    pub width: usize,
    pub height: usize,
}

impl Roi {
    pub fn new(x0: usize, y0: usize, width: usize, height: usize) -> Result<Self> {
        if width < 2 || height < 2 {
            return Err(Error::Validation(format!(
                "roi must be at least 2x2, got {width}x{height}"
            )));
        }
        Ok(Self {
            x0,
            y0,
            width,
            height,
        })
    }

    pub fn full(width: usize, height: usize) -> Self {
        Self {
            x0: 0,
            y0: 0,
            width,
            height,
        }
    }

    pub fn check_inside(&self, image_width: usize, image_height: usize) -> Result<()> {
        if self.x0 + self.width > image_width || self.y0 + self.height > image_height {
            return Err(Error::Bounds {
                x0: self.x0,
                y0: self.y0,
                width: self.width,
                height: self.height,
                image_width,
                image_height,
            });
        }
        Ok(())
    }

    /// Whether a slice-space point lies inside the rectangle.
    pub fn contains<T: Scalar>(&self, x: T, y: T) -> bool {
        let (x, y) = (x.to_f64_lossy(), y.to_f64_lossy());
        x >= self.x0 as f64
            && y >= self.y0 as f64
            && x <= (self.x0 + self.width) as f64
            && y <= (self.y0 + self.height) as f64
    }
}

/// Copies the pixels under `roi` into a new slice.
pub fn crop<T: Scalar>(slice: &GraySlice<T>, roi: &Roi) -> Result<GraySlice<T>> {
    roi.check_inside(slice.width(), slice.height())?;
    if roi.width == 0 || roi.height == 0 {
        return Err(Error::Validation("cannot crop an empty region".into()));
    }
    let mut data = Vec::with_capacity(roi.width * roi.height);
    for y in roi.y0..roi.y0 + roi.height {
        let row = y * slice.width();
        data.extend_from_slice(&slice.data()[row + roi.x0..row + roi.x0 + roi.width]);
    }
    Ok(GraySlice {
        width: roi.width,
        height: roi.height,
        data,
    })
}

/// Divides integer intensities by `max_value`.
pub fn normalize_intensities<T: Scalar, R: Copy + Into<u32>>(
    width: usize,
    height: usize,
    raw: &[R],
    max_value: u32,
) -> Result<GraySlice<T>> {
    if max_value == 0 {
        return Err(Error::Validation("max_value must be positive".into()));
    }
    if raw.len() != width * height {
        return Err(Error::Validation(format!(
            "raw slice {width}x{height} needs {} values, got {}",
            width * height,
            raw.len()
        )));
    }
    let scale = T::of_usize(max_value as usize);
    let mut data = Vec::with_capacity(raw.len());
    for (i, &r) in raw.iter().enumerate() {
        let r: u32 = r.into();
        if r > max_value {
            return Err(Error::Validation(format!(
                "raw value {r} at ({}, {}) exceeds max_value {max_value}",
                i % width.max(1),
                i / width.max(1)
            )));
        }
        data.push(T::of_usize(r as usize) / scale);
    }
    GraySlice::new(width, height, data)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeypointStatus {
    Live,
    LostOutOfBounds,
    LostDiverged,
    LostUntrackable,
}

impl KeypointStatus {
    pub fn is_live(self) -> bool {
        self == KeypointStatus::Live
    }

    pub fn as_str(self) -> &'static str {
        match self {
            KeypointStatus::Live => "live",
            KeypointStatus::LostOutOfBounds => "lost_out_of_bounds",
            KeypointStatus::LostDiverged => "lost_diverged",
            KeypointStatus::LostUntrackable => "lost_untrackable",
        }
    }
}

/// Sub-pixel point in slice space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Keypoint<T> {
    pub x: T,
    pub y: T,
    pub status: KeypointStatus,
}

impl<T: Scalar> Keypoint<T> {
    pub fn live(x: T, y: T) -> Self {
        Self {
            x,
            y,
            status: KeypointStatus::Live,
        }
    }

    pub fn is_live(&self) -> bool {
        self.status.is_live()
    }

    pub fn in_bounds(&self, width: usize, height: usize) -> bool {
        self.x >= T::zero()
            && self.y >= T::zero()
            && self.x < T::of_usize(width)
            && self.y < T::of_usize(height)
    }
}

/// Keypoints attached to one slice. Position in `points` is the identity of
/// a keypoint across the whole propagation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeypointSet<T> {
    pub slice_index: usize,
    pub points: Vec<Keypoint<T>>,
}

impl<T: Scalar> KeypointSet<T> {
    pub fn new(slice_index: usize, points: Vec<Keypoint<T>>) -> Self {
        Self {
            slice_index,
            points,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn live_count(&self) -> usize {
        self.points.iter().filter(|p| p.is_live()).count()
    }

    pub fn live_points(&self) -> impl Iterator<Item = &Keypoint<T>> {
        self.points.iter().filter(|p| p.is_live())
    }
}

/// Binary per-pixel mask, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SliceMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl SliceMask {
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::Validation(format!(
                "mask {width}x{height} needs {} bits, got {}",
                width * height,
                bits.len()
            )));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            bits,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    pub fn union_with(&mut self, other: &SliceMask) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::Validation(
                "cannot union masks of different sizes".into(),
            ));
        }
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= *b;
        }
        Ok(())
    }

    /// Centroid of the set pixel centers, or `None` for an empty mask.
    pub fn centroid(&self) -> Option<(f64, f64)> {
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    sx += x as f64 + 0.5;
                    sy += y as f64 + 0.5;
                    n += 1;
                }
            }
        }
        (n > 0).then(|| (sx / n as f64, sy / n as f64))
    }

    /// 0/255 bytes, row-major.
    pub fn to_u8(&self) -> Vec<u8> {
        self.bits.iter().map(|b| if *b { 255 } else { 0 }).collect()
    }
}

/// Lucas-Kanade tracking parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackParams<T> {
    pub pyramid_levels: usize,
    pub window_radius: usize,
    pub max_iterations: usize,
    pub convergence_eps: T,
    pub min_eigenvalue: T,
    /// Forward-backward distance limit; `None` disables the check.
    pub fb_error_max: Option<T>,
}

impl<T: Scalar> Default for TrackParams<T> {
    fn default() -> Self {
        Self {
            pyramid_levels: 3,
            window_radius: 10,
            max_iterations: 30,
            convergence_eps: T::of(0.01),
            min_eigenvalue: T::of(1e-4),
            fb_error_max: Some(T::one()),
        }
    }
}

impl<T: Scalar> TrackParams<T> {
    pub fn window_size(&self) -> usize {
        2 * self.window_radius + 1
    }

    /// Checks the parameter ranges and that the window fits the coarsest
    /// pyramid level of a `width x height` slice.
    pub fn validate_for(&self, width: usize, height: usize) -> Result<()> {
        if self.pyramid_levels == 0 {
            return Err(Error::Config("pyramid_levels must be at least 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        if !(self.convergence_eps > T::zero()) {
            return Err(Error::Config("convergence_eps must be positive".into()));
        }
        if !(self.min_eigenvalue >= T::zero()) {
            return Err(Error::Config("min_eigenvalue must be non-negative".into()));
        }
        if let Some(fb) = self.fb_error_max {
            if !(fb >= T::zero()) {
                return Err(Error::Config("fb_error_max must be non-negative".into()));
            }
        }
        let shift = self.pyramid_levels - 1;
        let (cw, ch) = (width >> shift, height >> shift);
        let win = self.window_size();
        if cw < win || ch < win {
            return Err(Error::Config(format!(
                "{win}x{win} window does not fit the coarsest level ({cw}x{ch}) of a {width}x{height} slice with {} levels",
                self.pyramid_levels
            )));
        }
        Ok(())
    }
}
