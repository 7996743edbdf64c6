//! End-to-end segmentation: seed keypoints on one slice, carry them up and
//! down the stack, close each slice's live points into a hull mask, then
//! score or stack the masks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{build_pyramid, track_set_pyramids, Pyramid};
use crate::geometry::{convex_hull, dsc, rasterize, Point2, Polygon};
use crate::scalar::Scalar;
use crate::types::{Keypoint, KeypointSet, Roi, SliceMask, TrackParams, Volume};
use crate::wavelet::{decompose_roi, detect_keypoints, magnitude, DetectParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartSlice {
    /// `floor(slice_count / 2)`.
    #[default]
    Center,
    Index(usize),
}

impl StartSlice {
    pub fn resolve(self, slice_count: usize) -> Result<usize> {
        match self {
            StartSlice::Center if slice_count > 0 => Ok(slice_count / 2),
            StartSlice::Index(i) if i < slice_count => Ok(i),
            other => Err(Error::Seed(format!(
                "start slice {other:?} is outside a volume of {slice_count} slices"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SeedMode<T> {
    /// Operator-placed points, used verbatim.
    Manual { points: Vec<(T, T)> },
    /// Points detected from the Haar magnitude map of a region.
    Auto { roi: Roi, detect: DetectParams<T> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSpec<T> {
    #[serde(flatten)]
    pub mode: SeedMode<T>,
    #[serde(default)]
    pub start_slice: StartSlice,
}

impl<T: Scalar> SeedSpec<T> {
    pub fn manual(points: Vec<(T, T)>, start_slice: StartSlice) -> Self {
        Self {
            mode: SeedMode::Manual { points },
            start_slice,
        }
    }

    pub fn auto(roi: Roi, detect: DetectParams<T>, start_slice: StartSlice) -> Self {
        Self {
            mode: SeedMode::Auto { roi, detect },
            start_slice,
        }
    }
}

/// What the pipeline produced on one slice.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceProduct<T> {
    pub keypoints: KeypointSet<T>,
    pub hull: Option<Polygon<T>>,
    pub mask: Option<SliceMask>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationResult<T> {
    /// Contiguous over `stop_up..=stop_down`.
    pub per_slice: BTreeMap<usize, SliceProduct<T>>,
    pub seed: Option<SeedSpec<T>>,
    pub params: TrackParams<T>,
    pub start_slice: usize,
    pub stop_up: usize,
    pub stop_down: usize,
    pub width: usize,
    pub height: usize,
    pub slice_count: usize,
    pub slice_spacing_mm: f64,
    /// Source label of every volume slice, for resolving annotations.
    pub source_ids: Vec<String>,
}

impl<T: Scalar> SegmentationResult<T> {
    pub fn mask(&self, index: usize) -> Option<&SliceMask> {
        self.per_slice.get(&index).and_then(|p| p.mask.as_ref())
    }

    pub fn masks(&self) -> impl Iterator<Item = (usize, &SliceMask)> {
        self.per_slice
            .iter()
            .filter_map(|(i, p)| p.mask.as_ref().map(|m| (*i, m)))
    }

    /// Per-point position across slices, `None` where the point is lost.
    pub fn trajectory(&self, point: usize) -> Vec<(usize, Option<(T, T)>)> {
        self.per_slice
            .iter()
            .map(|(i, p)| {
                let pos = p
                    .keypoints
                    .points
                    .get(point)
                    .filter(|k| k.is_live())
                    .map(|k| (k.x, k.y));
                (*i, pos)
            })
            .collect()
    }
}

/// Resolves the start slice and produces its initial keypoints.
pub fn seed_keypoints<T: Scalar>(volume: &Volume<T>, seed: &SeedSpec<T>) -> Result<KeypointSet<T>> {
    let start = seed.start_slice.resolve(volume.len())?;
    let (w, h) = (volume.width(), volume.height());
    match &seed.mode {
        SeedMode::Manual { points } => {
            if points.len() < 3 {
                return Err(Error::Seed(format!(
                    "manual seeding needs at least 3 points, got {}",
                    points.len()
                )));
            }
            let kps: Vec<Keypoint<T>> = points.iter().map(|&(x, y)| Keypoint::live(x, y)).collect();
            if let Some(bad) = kps.iter().find(|k| !k.in_bounds(w, h)) {
                return Err(Error::Seed(format!(
                    "seed point ({}, {}) is outside the {w}x{h} slice",
                    bad.x, bad.y
                )));
            }
            Ok(KeypointSet::new(start, kps))
        }
        SeedMode::Auto { roi, detect } => {
            let slice = &volume.slices()[start];
            let subbands = decompose_roi(slice, roi)?;
            let map = magnitude(&subbands);
            let mut set = detect_keypoints(&map, detect)?;
            if set.len() < 3 {
                return Err(Error::Seed(format!(
                    "automatic detection found {} keypoint(s) in roi {},{} {}x{} on slice {start}; \
                     at least 3 are needed, try a lower threshold or a larger roi",
                    set.len(),
                    roi.x0,
                    roi.y0,
                    roi.width,
                    roi.height
                )));
            }
            set.slice_index = start;
            Ok(set)
        }
    }
}

/// Hull and mask from the live points of a set, absent when fewer than three
/// non-collinear live points remain.
pub fn close_slice<T: Scalar>(
    keypoints: KeypointSet<T>,
    width: usize,
    height: usize,
) -> SliceProduct<T> {
    let live: Vec<Point2<T>> = keypoints
        .live_points()
        .map(|k| Point2::new(k.x, k.y))
        .collect();
    let hull = convex_hull(&live).ok();
    let mask = hull.as_ref().map(|h| rasterize(h, width, height));
    SliceProduct {
        keypoints,
        hull,
        mask,
    }
}

/// Products of the slices a chain visited, and the index where it stopped.
type ChainOutput<T> = (Vec<(usize, SliceProduct<T>)>, usize);

enum Direction {
    Up,
    Down,
}

/// Walks one direction from the start slice. Returns the products of every
/// visited slice (excluding the start) and the index where the walk ended.
fn run_chain<T: Scalar>(
    volume: &Volume<T>,
    initial: &KeypointSet<T>,
    start_pyramid: &Pyramid<T>,
    params: &TrackParams<T>,
    direction: Direction,
) -> Result<ChainOutput<T>> {
    let start = initial.slice_index;
    let indices: Vec<usize> = match direction {
        Direction::Up => (0..start).rev().collect(),
        Direction::Down => (start + 1..volume.len()).collect(),
    };
    let mut out = Vec::with_capacity(indices.len());
    let mut stop = start;
    if initial.live_count() < 3 {
        return Ok((out, stop));
    }
    let mut current = initial.clone();
    let mut prev_pyr = start_pyramid.clone();
    for idx in indices {
        let next_pyr = build_pyramid(&volume.slices()[idx], params.pyramid_levels)?;
        let tracked = track_set_pyramids(&prev_pyr, &next_pyr, &current, idx, params)?;
        let live = tracked.live_count();
        out.push((
            idx,
            close_slice(tracked.clone(), volume.width(), volume.height()),
        ));
        stop = idx;
        if live < 3 {
            break;
        }
        current = tracked;
        prev_pyr = next_pyr;
    }
    Ok((out, stop))
}

/// Carries `initial` through the volume in both directions.
///
/// Each direction is an independent sequential chain that halts on the first
/// slice where fewer than three points remain live; that slice is still
/// recorded (without a mask) and becomes the chain's stop index.
pub fn propagate<T: Scalar>(
    volume: &Volume<T>,
    initial: &KeypointSet<T>,
    params: &TrackParams<T>,
) -> Result<SegmentationResult<T>> {
    let start = initial.slice_index;
    if start >= volume.len() {
        return Err(Error::Validation(format!(
            "start slice {start} is outside a volume of {} slices",
            volume.len()
        )));
    }
    let (w, h) = (volume.width(), volume.height());
    params.validate_for(w, h)?;
    let start_pyramid = build_pyramid(&volume.slices()[start], params.pyramid_levels)?;

    let (up, down) = rayon::join(
        || run_chain(volume, initial, &start_pyramid, params, Direction::Up),
        || run_chain(volume, initial, &start_pyramid, params, Direction::Down),
    );
    let (up, stop_up) = up?;
    let (down, stop_down) = down?;

    let mut per_slice = BTreeMap::new();
    per_slice.insert(start, close_slice(initial.clone(), w, h));
    per_slice.extend(up);
    per_slice.extend(down);

    Ok(SegmentationResult {
        per_slice,
        seed: None,
        params: *params,
        start_slice: start,
        stop_up,
        stop_down,
        width: w,
        height: h,
        slice_count: volume.len(),
        slice_spacing_mm: volume.slice_spacing_mm(),
        source_ids: volume.source_ids().to_vec(),
    })
}

/// Seeds and propagates in one call.
pub fn segment<T: Scalar>(
    volume: &Volume<T>,
    seed: &SeedSpec<T>,
    params: &TrackParams<T>,
) -> Result<SegmentationResult<T>> {
    let initial = seed_keypoints(volume, seed)?;
    let mut result = propagate(volume, &initial, params)?;
    result.seed = Some(seed.clone());
    Ok(result)
}

/// Per-slice Dice scores with their summary statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub per_slice_dsc: BTreeMap<usize, f64>,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub median: f64,
    pub iqr_low: f64,
    pub iqr_high: f64,
    pub n_evaluated: usize,
    pub n_zero: usize,
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

impl MetricsReport {
    pub fn from_scores(per_slice_dsc: BTreeMap<usize, f64>) -> Result<Self> {
        if per_slice_dsc.is_empty() {
            return Err(Error::EmptyEvaluation);
        }
        let n = per_slice_dsc.len();
        let mean = per_slice_dsc.values().sum::<f64>() / n as f64;
        let var = per_slice_dsc
            .values()
            .map(|v| (v - mean) * (v - mean))
            .sum::<f64>()
            / n as f64;
        let mut sorted: Vec<f64> = per_slice_dsc.values().copied().collect();
        sorted.sort_by(|a, b| a.total_cmp(b));
        Ok(Self {
            mean,
            std: var.sqrt(),
            median: percentile(&sorted, 0.5),
            iqr_low: percentile(&sorted, 0.25),
            iqr_high: percentile(&sorted, 0.75),
            n_evaluated: n,
            n_zero: sorted.iter().filter(|v| **v == 0.0).count(),
            per_slice_dsc,
        })
    }
}

/// Scores every annotated slice. A slice without a predicted mask counts as
/// an empty prediction. Slices whose ground truth is empty are skipped unless
/// `include_empty_truth` is set.
pub fn evaluate<T: Scalar>(
    result: &SegmentationResult<T>,
    truth: &BTreeMap<usize, SliceMask>,
    include_empty_truth: bool,
) -> Result<MetricsReport> {
    let predictions: BTreeMap<usize, SliceMask> =
        result.masks().map(|(i, m)| (i, m.clone())).collect();
    evaluate_masks(
        &predictions,
        result.width,
        result.height,
        truth,
        include_empty_truth,
    )
}

/// [`evaluate`] over bare per-slice prediction masks, e.g. reloaded from disk.
pub fn evaluate_masks(
    predictions: &BTreeMap<usize, SliceMask>,
    width: usize,
    height: usize,
    truth: &BTreeMap<usize, SliceMask>,
    include_empty_truth: bool,
) -> Result<MetricsReport> {
    let empty = SliceMask::empty(width, height);
    let mut scores = BTreeMap::new();
    for (&idx, gt) in truth {
        if gt.dims() != (width, height) {
            return Err(Error::Validation(format!(
                "ground truth for slice {idx} is {}x{}, volume is {width}x{height}",
                gt.width(),
                gt.height(),
            )));
        }
        if gt.is_empty() && !include_empty_truth {
            continue;
        }
        let pred = predictions.get(&idx).unwrap_or(&empty);
        scores.insert(idx, dsc(pred, gt)?);
    }
    MetricsReport::from_scores(scores)
}

/// Boolean voxel grid stored plane by plane (z-major, row-major per plane).
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelVolume {
    pub dims: (usize, usize, usize),
    pub spacing_mm: (f64, f64, f64),
    pub bits: Vec<bool>,
}

impl VoxelVolume {
    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn plane_count(&self, z: usize) -> usize {
        let plane = self.dims.0 * self.dims.1;
        self.bits[z * plane..(z + 1) * plane]
            .iter()
            .filter(|b| **b)
            .count()
    }

    /// One byte per voxel, 0 or 1.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.bits.iter().map(|b| *b as u8).collect()
    }
}

/// Stacks the per-slice masks into a voxel grid covering the whole volume;
/// slices without a mask become empty planes.
pub fn reconstruct<T: Scalar>(
    result: &SegmentationResult<T>,
    in_plane_mm: f64,
    spacing_mm: f64,
) -> Result<VoxelVolume> {
    let masks: BTreeMap<usize, &SliceMask> = result.masks().collect();
    stack_masks(
        &masks,
        (result.width, result.height, result.slice_count),
        in_plane_mm,
        spacing_mm,
    )
}

/// Places `masks[z]` at plane `z` of an `nx x ny x nz` grid.
pub fn stack_masks<M: std::borrow::Borrow<SliceMask>>(
    masks: &BTreeMap<usize, M>,
    (nx, ny, nz): (usize, usize, usize),
    in_plane_mm: f64,
    spacing_mm: f64,
) -> Result<VoxelVolume> {
    if masks.is_empty() {
        return Err(Error::NoMasks);
    }
    if !(in_plane_mm > 0.0 && spacing_mm > 0.0) {
        return Err(Error::Validation("voxel spacing must be positive".into()));
    }
    let plane = nx * ny;
    let mut bits = vec![false; plane * nz];
    for (&z, mask) in masks {
        let mask = mask.borrow();
        if z >= nz || mask.dims() != (nx, ny) {
            return Err(Error::Validation(format!(
                "mask for slice {z} ({}x{}) does not fit a {nx}x{ny}x{nz} grid",
                mask.width(),
                mask.height()
            )));
        }
        bits[z * plane..(z + 1) * plane].copy_from_slice(mask.bits());
    }
    Ok(VoxelVolume {
        dims: (nx, ny, nz),
        spacing_mm: (in_plane_mm, in_plane_mm, spacing_mm),
        bits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phantom::{self, RingPhantom};
    use crate::types::GraySlice;

    fn result_with_masks(
        masks: Vec<Option<SliceMask>>,
        w: usize,
        h: usize,
    ) -> SegmentationResult<f64> {
        let n = masks.len();
        let per_slice = masks
            .into_iter()
            .enumerate()
            .map(|(i, m)| {
                (
                    i,
                    SliceProduct {
                        keypoints: KeypointSet::new(i, vec![]),
                        hull: None,
                        mask: m,
                    },
                )
            })
            .collect();
        SegmentationResult {
            per_slice,
            seed: None,
            params: TrackParams::default(),
            start_slice: 0,
            stop_up: 0,
            stop_down: n - 1,
            width: w,
            height: h,
            slice_count: n,
            slice_spacing_mm: 1.0,
            source_ids: (0..n).map(|i| i.to_string()).collect(),
        }
    }

    fn first_n(w: usize, h: usize, n: usize) -> SliceMask {
        let mut k = 0;
        SliceMask::from_fn(w, h, |_, _| {
            k += 1;
            k <= n
        })
    }

    #[test]
    fn manual_seed_is_copied() {
        let vol = Volume::new(vec![GraySlice::filled(16, 16, 0.2f64); 5]).unwrap();
        let seed = SeedSpec::manual(
            vec![(1.0, 1.0), (5.5, 2.0), (3.0, 7.25)],
            StartSlice::Center,
        );
        let set = seed_keypoints(&vol, &seed).unwrap();
        assert_eq!(set.slice_index, 2);
        assert_eq!(set.points[2], Keypoint::live(3.0, 7.25));
    }

    #[test]
    fn manual_seed_rejects_short_or_outside() {
        let vol = Volume::new(vec![GraySlice::filled(16, 16, 0.2f64)]).unwrap();
        let short = SeedSpec::manual(vec![(1.0, 1.0), (2.0, 2.0)], StartSlice::Center);
        assert!(matches!(seed_keypoints(&vol, &short), Err(Error::Seed(_))));
        let outside = SeedSpec::manual(
            vec![(1.0, 1.0), (2.0, 2.0), (16.0, 3.0)],
            StartSlice::Center,
        );
        assert!(matches!(
            seed_keypoints(&vol, &outside),
            Err(Error::Seed(_))
        ));
        let bad_start = SeedSpec::manual(
            vec![(1.0, 1.0), (2.0, 2.0), (3.0, 1.0)],
            StartSlice::Index(1),
        );
        assert!(matches!(
            seed_keypoints(&vol, &bad_start),
            Err(Error::Seed(_))
        ));
    }

    #[test]
    fn auto_seed_on_constant_roi_fails() {
        let vol = Volume::new(vec![GraySlice::filled(64, 64, 0.5f64)]).unwrap();
        let seed = SeedSpec::auto(
            Roi::new(8, 8, 32, 32).unwrap(),
            DetectParams::default(),
            StartSlice::Center,
        );
        let err = seed_keypoints(&vol, &seed).unwrap_err();
        assert!(matches!(err, Error::Seed(ref m) if m.contains("lower threshold")));
    }

    #[test]
    fn auto_seed_hugs_square_perimeter() {
        // square spans pixels 21..=42; odd origin so its edges cut through Haar blocks
        let (x0, side) = (21usize, 22usize);
        let slice = phantom::square_slice::<f64>(64, 64, x0, x0, side);
        let vol = Volume::new(vec![slice]).unwrap();
        let seed = SeedSpec::auto(
            Roi::new(8, 8, 48, 48).unwrap(),
            DetectParams::default(),
            StartSlice::Center,
        );
        let set = seed_keypoints(&vol, &seed).unwrap();
        assert!(set.len() >= 3);
        let (lo, hi) = (x0 as f64, (x0 + side) as f64);
        for k in &set.points {
            let inside_dist = (k.x - lo).abs().min((k.x - hi).abs());
            let dist_y = (k.y - lo).abs().min((k.y - hi).abs());
            let within_x = k.x >= lo - 2.0 && k.x <= hi + 2.0;
            let within_y = k.y >= lo - 2.0 && k.y <= hi + 2.0;
            let near = (inside_dist <= 2.0 && within_y) || (dist_y <= 2.0 && within_x);
            assert!(
                near,
                "keypoint ({}, {}) is far from the perimeter",
                k.x, k.y
            );
        }
    }

    #[test]
    fn single_slice_volume_uses_seed_hull() {
        let ring = RingPhantom::standard(2);
        let vol = Volume::new(vec![ring.render::<f64>(64.0, 64.0)]).unwrap();
        let seed = SeedSpec::manual(ring.boundary_points(64.0, 64.0, 24), StartSlice::Center);
        let res = segment(&vol, &seed, &TrackParams::default()).unwrap();
        assert_eq!(res.per_slice.len(), 1);
        assert_eq!((res.stop_up, res.stop_down), (0, 0));
        assert!(res.mask(0).is_some());
    }

    #[test]
    fn collinear_seeds_leave_start_without_mask() {
        let vol = Volume::new(vec![phantom::texture::<f64>(128, 128, 4); 3]).unwrap();
        let seed = SeedSpec::manual(
            vec![(40.0, 40.0), (60.0, 60.0), (80.0, 80.0)],
            StartSlice::Center,
        );
        let res = segment(&vol, &seed, &TrackParams::default()).unwrap();
        assert!(res.per_slice[&1].hull.is_none() && res.per_slice[&1].mask.is_none());
    }

    #[test]
    fn chain_halts_when_points_are_lost() {
        // slice 0 is flat: every point becomes untrackable going up from 1
        let mut slices = vec![phantom::texture::<f64>(128, 128, 9); 4];
        slices[1] = GraySlice::filled(128, 128, 0.5);
        let vol = Volume::new(slices).unwrap();
        let pts: Vec<(f64, f64)> = vec![(50.0, 50.0), (70.0, 50.0), (60.0, 70.0)];
        let seed = SeedSpec::manual(pts, StartSlice::Index(2));
        let res = segment(&vol, &seed, &TrackParams::default()).unwrap();
        assert_eq!(res.stop_up, 1);
        assert!(res.per_slice.contains_key(&1) && !res.per_slice.contains_key(&0));
        assert!(res.mask(1).is_none());
        assert_eq!(res.stop_down, 3);
        assert!(res.mask(3).is_some());
    }

    #[test]
    fn statistics_of_three_scores() {
        let r = MetricsReport::from_scores([(0, 0.0), (1, 0.5), (2, 1.0)].into()).unwrap();
        assert_eq!(r.mean, 0.5);
        assert_eq!(r.median, 0.5);
        assert_eq!(r.n_zero, 1);
        assert_eq!((r.iqr_low, r.iqr_high), (0.25, 0.75));
        assert!((r.std - (1.0f64 / 6.0).sqrt()).abs() < 1e-15);
        assert!(matches!(
            MetricsReport::from_scores(BTreeMap::new()),
            Err(Error::EmptyEvaluation)
        ));
    }

    #[test]
    fn perfect_predictions_score_one() {
        let masks: Vec<SliceMask> = (0..5).map(|i| first_n(8, 8, 3 + i)).collect();
        let res = result_with_masks(masks.iter().cloned().map(Some).collect(), 8, 8);
        let truth = masks.into_iter().enumerate().collect();
        let r = evaluate(&res, &truth, false).unwrap();
        assert_eq!((r.mean, r.std, r.n_zero, r.n_evaluated), (1.0, 0.0, 0, 5));
    }

    #[test]
    fn empty_truth_is_skipped_by_default() {
        let res = result_with_masks(vec![Some(first_n(8, 8, 4)), None], 8, 8);
        let truth: BTreeMap<usize, SliceMask> =
            [(0, first_n(8, 8, 4)), (1, SliceMask::empty(8, 8))].into();
        assert_eq!(evaluate(&res, &truth, false).unwrap().n_evaluated, 1);
        let all = evaluate(&res, &truth, true).unwrap();
        assert_eq!(all.n_evaluated, 2);
        assert_eq!(all.per_slice_dsc[&1], 1.0);
        let none: BTreeMap<usize, SliceMask> = [(1, SliceMask::empty(8, 8))].into();
        assert!(matches!(
            evaluate(&res, &none, false),
            Err(Error::EmptyEvaluation)
        ));
    }

    #[test]
    fn reconstruction_stacks_planes() {
        let res = result_with_masks(vec![Some(first_n(8, 8, 10))], 8, 8);
        let v = reconstruct(&res, 0.5, 1.0).unwrap();
        assert_eq!(
            (v.count(), v.dims.2, v.spacing_mm),
            (10, 1, (0.5, 0.5, 1.0))
        );

        let res = result_with_masks((4..7).map(|n| Some(first_n(8, 8, n))).collect(), 8, 8);
        let v = reconstruct(&res, 1.0, 1.0).unwrap();
        assert_eq!((v.count(), v.dims.2), (15, 3));

        let mut res = result_with_masks(
            vec![Some(first_n(8, 8, 3)), Some(first_n(8, 8, 3)), None],
            8,
            8,
        );
        res.per_slice.remove(&2);
        res.stop_down = 1;
        res.slice_count = 4;
        let v = reconstruct(&res, 1.0, 1.0).unwrap();
        assert_eq!((v.plane_count(2), v.plane_count(3), v.dims.2), (0, 0, 4));

        let empty = result_with_masks(vec![None], 8, 8);
        assert!(matches!(reconstruct(&empty, 1.0, 1.0), Err(Error::NoMasks)));
    }
}
