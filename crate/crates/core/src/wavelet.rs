//! Automatic keypoint seeding from a single-level 2D Haar decomposition.
//!
//! The region is split into 2x2 blocks `[[p00, p01], [p10, p11]]` (first
//! index is the row) and each block yields one coefficient per subband with
//! the orthonormal scaling:
//!
//! ```text
//! A = (p00 + p01 + p10 + p11) / 2
//! H = (p00 + p01 - p10 - p11) / 2
//! V = (p00 - p01 + p10 - p11) / 2
//! D = (p00 - p01 - p10 + p11) / 2
//! ```
//!
//! Odd widths or heights are padded by repeating the last column or row.
//! Cells whose detail magnitude `|H| + |V| + |D|` exceeds a threshold become
//! keypoints, placed back in slice space at `(x0 + 2x + 0.5, y0 + 2y + 0.5)`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::types::{crop, GraySlice, Keypoint, KeypointSet, Roi};

/// Dense row-major grid of coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Scalar> Grid<T> {
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Validation(format!(
                "grid {width}x{height} needs {} values, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![T::zero(); width * height],
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

    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: T) {
        self.data[y * self.width + x] = v;
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|v| f(*v)).collect(),
        }
    }

    pub fn sum_of_squares(&self) -> T {
        self.data.iter().map(|v| *v * *v).sum()
    }
}

/// Approximation and detail subbands of one decomposition level.
#[derive(Debug, Clone, PartialEq)]
pub struct SubbandSet<T> {
    pub a: Grid<T>,
    pub h: Grid<T>,
    pub v: Grid<T>,
    pub d: Grid<T>,
    pub roi: Roi,
}

impl<T: Scalar> SubbandSet<T> {
    pub fn new(a: Grid<T>, h: Grid<T>, v: Grid<T>, d: Grid<T>, roi: Roi) -> Result<Self> {
        let dims = a.dims();
        if h.dims() != dims || v.dims() != dims || d.dims() != dims {
            return Err(Error::Validation("subbands must share dimensions".into()));
        }
        Ok(Self { a, h, v, d, roi })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.a.dims()
    }

    pub fn energy(&self) -> T {
        self.a.sum_of_squares()
            + self.h.sum_of_squares()
            + self.v.sum_of_squares()
            + self.d.sum_of_squares()
    }
}

/// Per-cell detail magnitude `|H| + |V| + |D|`.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnitudeMap<T> {
    pub m: Grid<T>,
    pub roi: Roi,
}

impl<T: Scalar> MagnitudeMap<T> {
    pub fn new(m: Grid<T>, roi: Roi) -> Result<Self> {
        if m.data().iter().any(|v| !(*v >= T::zero())) {
            return Err(Error::Validation("magnitudes must be non-negative".into()));
        }
        Ok(Self { m, roi })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ThresholdPolicy<T> {
    /// Fixed magnitude threshold.
    Absolute(T),
    /// Threshold at the given quantile of all magnitudes in the map.
    Quantile(T),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectParams<T> {
    pub threshold_policy: ThresholdPolicy<T>,
    /// Minimum distance between accepted keypoints, in slice pixels.
    pub min_spacing: T,
    /// `None` accepts every surviving candidate.
    pub max_keypoints: Option<usize>,
}

impl<T: Scalar> Default for DetectParams<T> {
    fn default() -> Self {
        Self {
            threshold_policy: ThresholdPolicy::Quantile(T::of(0.95)),
            min_spacing: T::of(4.0),
            max_keypoints: Some(64),
        }
    }
}

impl<T: Scalar> DetectParams<T> {
    pub fn validate(&self) -> Result<()> {
        match self.threshold_policy {
            ThresholdPolicy::Absolute(t) if !(t >= T::zero()) => {
                return Err(Error::Config(format!(
                    "absolute threshold must be >= 0, got {t}"
                )))
            }
            ThresholdPolicy::Quantile(q) if !(q > T::zero() && q < T::one()) => {
                return Err(Error::Config(format!(
                    "quantile must lie in (0, 1), got {q}"
                )))
            }
            _ => {}
        }
        if !(self.min_spacing >= T::zero()) {
            return Err(Error::Config("min_spacing must be >= 0".into()));
        }
        Ok(())
    }
}

/// Single-level Haar transform of a whole image; the returned subbands
/// record a full-frame ROI at the origin.
pub fn haar_dwt2<T: Scalar>(image: &GraySlice<T>) -> Result<SubbandSet<T>> {
    let (w, h) = image.dims();
    transform(image, Roi::full(w, h))
}

/// Crops `roi` out of `slice` and decomposes it, keeping the ROI so detected
/// cells can be mapped back to slice coordinates.
pub fn decompose_roi<T: Scalar>(slice: &GraySlice<T>, roi: &Roi) -> Result<SubbandSet<T>> {
    let image = crop(slice, roi)?;
    transform(&image, *roi)
}

fn transform<T: Scalar>(image: &GraySlice<T>, roi: Roi) -> Result<SubbandSet<T>> {
    let (w, h) = image.dims();
    if w < 2 || h < 2 {
        return Err(Error::Size {
            width: w,
            height: h,
        });
    }
    let (cw, ch) = (w.div_ceil(2), h.div_ceil(2));
    let half = T::of(0.5);
    let mut a = Grid::zeros(cw, ch);
    let mut hh = Grid::zeros(cw, ch);
    let mut vv = Grid::zeros(cw, ch);
    let mut dd = Grid::zeros(cw, ch);
    for cy in 0..ch {
        let r0 = 2 * cy;
        let r1 = (r0 + 1).min(h - 1);
        for cx in 0..cw {
            let c0 = 2 * cx;
            let c1 = (c0 + 1).min(w - 1);
            let p00 = image.get(c0, r0);
            let p01 = image.get(c1, r0);
            let p10 = image.get(c0, r1);
            let p11 = image.get(c1, r1);
            a.set(cx, cy, (p00 + p01 + p10 + p11) * half);
            hh.set(cx, cy, (p00 + p01 - p10 - p11) * half);
            vv.set(cx, cy, (p00 - p01 + p10 - p11) * half);
            dd.set(cx, cy, (p00 - p01 - p10 + p11) * half);
        }
    }
    SubbandSet::new(a, hh, vv, dd, roi)
}

/// Inverts the block formulas, returning the (padded, even-sized) image.
pub fn haar_idwt2<T: Scalar>(subbands: &SubbandSet<T>) -> Grid<T> {
    let (cw, ch) = subbands.dims();
    let half = T::of(0.5);
    let mut out = Grid::zeros(2 * cw, 2 * ch);
    for cy in 0..ch {
        for cx in 0..cw {
            let a = subbands.a.get(cx, cy);
            let h = subbands.h.get(cx, cy);
            let v = subbands.v.get(cx, cy);
            let d = subbands.d.get(cx, cy);
            out.set(2 * cx, 2 * cy, (a + h + v + d) * half);
            out.set(2 * cx + 1, 2 * cy, (a + h - v - d) * half);
            out.set(2 * cx, 2 * cy + 1, (a - h + v - d) * half);
            out.set(2 * cx + 1, 2 * cy + 1, (a - h - v + d) * half);
        }
    }
    out
}

pub fn magnitude<T: Scalar>(subbands: &SubbandSet<T>) -> MagnitudeMap<T> {
    let (w, h) = subbands.dims();
    let data = subbands
        .h
        .data()
        .iter()
        .zip(subbands.v.data())
        .zip(subbands.d.data())
        .map(|((h, v), d)| h.abs() + v.abs() + d.abs())
        .collect();
    MagnitudeMap {
        m: Grid {
            width: w,
            height: h,
            data,
        },
        roi: subbands.roi,
    }
}

/// Linear-interpolation quantile of `values` (position `q * (n - 1)` in the
/// sorted order).
pub fn quantile<T: Scalar>(values: &[T], q: T) -> Option<T> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("magnitudes are finite"));
    let pos = q * T::of_usize(sorted.len() - 1);
    let lo = pos.floor();
    let frac = pos - lo;
    let lo = lo.to_usize().unwrap_or(0).min(sorted.len() - 1);
    let hi = (lo + 1).min(sorted.len() - 1);
    Some(sorted[lo] + (sorted[hi] - sorted[lo]) * frac)
}

/// Threshold value the policy resolves to on `map`.
pub fn resolve_threshold<T: Scalar>(map: &MagnitudeMap<T>, policy: ThresholdPolicy<T>) -> T {
    match policy {
        ThresholdPolicy::Absolute(t) => t,
        ThresholdPolicy::Quantile(q) => quantile(map.m.data(), q).unwrap_or_else(T::zero),
    }
}

/// Thresholds the magnitude map and greedily keeps the strongest cells that
/// respect `min_spacing`.
///
/// Candidates are visited by descending magnitude, ties broken by row then
/// column. Accepted cells are kept in a hash grid with `min_spacing`-sized
/// buckets so each candidate only looks at its 3x3 bucket neighborhood.
pub fn detect_keypoints<T: Scalar>(
    map: &MagnitudeMap<T>,
    params: &DetectParams<T>,
) -> Result<KeypointSet<T>> {
    params.validate()?;
    let (w, h) = map.m.dims();
    if w == 0 || h == 0 {
        return Err(Error::Validation("magnitude map is empty".into()));
    }
    let t = resolve_threshold(map, params.threshold_policy);

    let mut candidates: Vec<(T, usize, usize)> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .filter_map(|(x, y)| {
            let m = map.m.get(x, y);
            (m > t).then_some((m, x, y))
        })
        .collect();
    candidates.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .expect("magnitudes are finite")
            .then(a.2.cmp(&b.2))
            .then(a.1.cmp(&b.1))
    });

    let limit = params.max_keypoints.unwrap_or(usize::MAX);
    let spacing = params.min_spacing;
    let spacing_sq = spacing * spacing;
    let bucket_of = |x: T, y: T| -> (i64, i64) {
        if spacing > T::zero() {
            (
                (x / spacing).floor().to_i64().unwrap_or(0),
                (y / spacing).floor().to_i64().unwrap_or(0),
            )
        } else {
            (0, 0)
        }
    };
    let mut buckets: HashMap<(i64, i64), Vec<(T, T)>> = HashMap::new();
    let mut points = Vec::new();
    let (ox, oy) = (T::of_usize(map.roi.x0), T::of_usize(map.roi.y0));
    let two = T::of(2.0);
    let half = T::of(0.5);

    for (_, cx, cy) in candidates {
        if points.len() >= limit {
            break;
        }
        let x = ox + two * T::of_usize(cx) + half;
        let y = oy + two * T::of_usize(cy) + half;
        let (bx, by) = bucket_of(x, y);
        let crowded = spacing > T::zero()
            && (-1..=1).any(|dy| {
                (-1..=1).any(|dx| {
                    buckets.get(&(bx + dx, by + dy)).is_some_and(|pts| {
                        pts.iter().any(|(px, py)| {
                            let (ex, ey) = (x - *px, y - *py);
                            ex * ex + ey * ey < spacing_sq
                        })
                    })
                })
            });
        if crowded {
            continue;
        }
        buckets.entry((bx, by)).or_default().push((x, y));
        points.push(Keypoint::live(x, y));
    }
    Ok(KeypointSet::new(0, points))
}
