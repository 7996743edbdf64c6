//! Reading slice stacks and LabelMe polygon annotations; writing masks,
//! trajectories, metrics and voxel volumes.
//!
//! Output directory layout written by [`save_result`]:
//!
//! ```text
//! manifest.json          run metadata, seed, parameters, per-slice keypoints and hulls
//! trajectories.csv       slice_index,point,x,y,status
//! masks/mask_NNNN.png    8-bit 0/255 mask per slice that has one
//! metrics.csv            slice_index,dsc           (only with a report)
//! metrics_summary.json   mean/std/median/iqr/n_zero (only with a report)
//! voxels.raw             one byte (0/1) per voxel, z-major then row-major
//! voxels.json            dims, spacing and layout of voxels.raw
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use image::{DynamicImage, GrayImage, ImageBuffer, Luma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{rasterize, Point2, Polygon};
use crate::pipeline::{
    reconstruct, MetricsReport, SeedSpec, SegmentationResult, StartSlice, VoxelVolume,
};
use crate::scalar::Scalar;
use crate::types::{
    normalize_intensities, GraySlice, KeypointStatus, SliceMask, TrackParams, Volume,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SliceOrder {
    /// Plain byte-wise filename order: `s1, s10, s2`.
    #[default]
    Lexicographic,
    /// Digit runs compare by value: `s1, s2, s10`.
    Numeric,
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    /// Glob matched against file names.
    pub pattern: String,
    pub order: SliceOrder,
    /// Reject color images instead of converting them by luminance.
    pub strict: bool,
    pub slice_spacing_mm: f64,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            pattern: "*.png".into(),
            order: SliceOrder::Lexicographic,
            strict: false,
            slice_spacing_mm: 1.0,
        }
    }
}

pub fn sort_names(names: &mut [String], order: SliceOrder) {
    match order {
        SliceOrder::Lexicographic => names.sort(),
        SliceOrder::Numeric => names.sort_by(|a, b| natord::compare(a, b)),
    }
}

fn list_matching(dir: &Path, pattern: &str) -> Result<Vec<String>> {
    let matcher = glob::Pattern::new(pattern)
        .map_err(|e| Error::Ingestion(format!("bad file pattern {pattern:?}: {e}")))?;
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut names = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        if !entry.file_type().map(|t| t.is_file()).unwrap_or(false) {
            continue;
        }
        if let Some(name) = entry.file_name().to_str() {
            if matcher.matches(name) {
                names.push(name.to_owned());
            }
        }
    }
    Ok(names)
}

/// Decodes one image file into a normalized slice.
pub fn load_slice<T: Scalar>(path: &Path, strict: bool) -> Result<GraySlice<T>> {
    let img = image::open(path).map_err(|source| Error::Image {
        path: path.to_owned(),
        source,
    })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        DynamicImage::ImageLuma8(g) => normalize_intensities(w, h, g.as_raw(), u8::MAX as u32),
        DynamicImage::ImageLuma16(g) => normalize_intensities(w, h, g.as_raw(), u16::MAX as u32),
        other => {
            if strict {
                return Err(Error::Ingestion(format!(
                    "{} is not grayscale ({:?})",
                    path.display(),
                    other.color()
                )));
            }
            log::warn!(
                "{} is {:?}; converting to grayscale by luminance",
                path.display(),
                other.color()
            );
            let g = other.to_luma8();
            normalize_intensities(w, h, g.as_raw(), u8::MAX as u32)
        }
    }
}

/// Loads every file in `dir` matching the pattern as one slice, in the
/// requested filename order. Slice source ids are the file names.
pub fn load_volume<T: Scalar>(dir: &Path, opts: &LoadOptions) -> Result<Volume<T>> {
    if !dir.is_dir() {
        return Err(Error::Ingestion(format!(
            "{} is not a directory",
            dir.display()
        )));
    }
    let mut names = list_matching(dir, &opts.pattern)?;
    if names.is_empty() {
        return Err(Error::Ingestion(format!(
            "no files matching {:?} in {}",
            opts.pattern,
            dir.display()
        )));
    }
    sort_names(&mut names, opts.order);
    let slices = names
        .iter()
        .map(|n| load_slice::<T>(&dir.join(n), opts.strict))
        .collect::<Result<Vec<_>>>()?;
    let dims = slices[0].dims();
    let offenders: Vec<String> = names
        .iter()
        .zip(&slices)
        .filter(|(_, s)| s.dims() != dims)
        .map(|(n, s)| format!("{n} ({}x{})", s.width(), s.height()))
        .collect();
    if !offenders.is_empty() {
        return Err(Error::Ingestion(format!(
            "slices differ from {} ({}x{}): {}",
            names[0],
            dims.0,
            dims.1,
            offenders.join(", ")
        )));
    }
    Volume::with_metadata(slices, opts.slice_spacing_mm, names)
}

/// Writes a slice as an 8-bit grayscale PNG.
pub fn save_slice_png<T: Scalar>(slice: &GraySlice<T>, path: &Path) -> Result<()> {
    let img: GrayImage =
        ImageBuffer::from_raw(slice.width() as u32, slice.height() as u32, slice.to_u8())
            .expect("buffer matches dimensions");
    img.save(path).map_err(|source| Error::Image {
        path: path.to_owned(),
        source,
    })
}

/// Writes every slice of `volume` as `slice_NNNN.png` into `dir`.
pub fn save_volume_pngs<T: Scalar>(volume: &Volume<T>, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (i, s) in volume.slices().iter().enumerate() {
        save_slice_png(s, &dir.join(format!("slice_{i:04}.png")))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Annotations

/// Subset of the LabelMe JSON schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabelMeFile {
    #[serde(default)]
    pub shapes: Vec<LabelMeShape>,
    #[serde(rename = "imagePath", default, skip_serializing_if = "Option::is_none")]
    pub image_path: Option<String>,
    #[serde(
        rename = "imageWidth",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub image_width: Option<u32>,
    #[serde(
        rename = "imageHeight",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub image_height: Option<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabelMeShape {
    pub label: String,
    pub points: Vec<[f64; 2]>,
    #[serde(default = "polygon_shape_type")]
    pub shape_type: String,
}

fn polygon_shape_type() -> String {
    "polygon".into()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPolygon {
    pub label: String,
    pub vertices: Vec<(f64, f64)>,
}

/// Polygons annotated on one slice.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationFile {
    pub slice_id: String,
    pub polygons: Vec<LabeledPolygon>,
}

/// Parses one LabelMe file. The slice id is the base name of `imagePath`,
/// or the annotation file's own stem when that is missing.
pub fn read_annotation_file(path: &Path) -> Result<AnnotationFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let raw: LabelMeFile = serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_owned(),
        source,
    })?;
    let slice_id = raw
        .image_path
        .as_deref()
        .and_then(|p| p.rsplit(['/', '\\']).next())
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .or_else(|| path.file_stem().and_then(|s| s.to_str()).map(str::to_owned))
        .ok_or_else(|| Error::Annotation(format!("{} has no usable slice id", path.display())))?;
    let mut polygons = Vec::new();
    for shape in raw.shapes {
        if shape.shape_type != "polygon" {
            log::debug!("{}: skipping {} shape", path.display(), shape.shape_type);
            continue;
        }
        if shape.points.len() < 3 {
            return Err(Error::Annotation(format!(
                "{}: polygon {:?} has {} vertices, at least 3 are required",
                path.display(),
                shape.label,
                shape.points.len()
            )));
        }
        polygons.push(LabeledPolygon {
            label: shape.label,
            vertices: shape.points.iter().map(|p| (p[0], p[1])).collect(),
        });
    }
    Ok(AnnotationFile { slice_id, polygons })
}

fn stem(name: &str) -> &str {
    name.rsplit_once('.').map(|(s, _)| s).unwrap_or(name)
}

fn resolve_slice(slice_id: &str, source_ids: &[String]) -> Option<usize> {
    source_ids
        .iter()
        .position(|s| s == slice_id)
        .or_else(|| source_ids.iter().position(|s| stem(s) == stem(slice_id)))
}

/// Rasterizes the union of all polygons carrying `label`.
pub fn annotation_mask(
    file: &AnnotationFile,
    label: &str,
    width: usize,
    height: usize,
) -> Option<SliceMask> {
    let mut mask: Option<SliceMask> = None;
    for poly in file.polygons.iter().filter(|p| p.label == label) {
        let polygon = Polygon::new(
            poly.vertices
                .iter()
                .map(|&(x, y)| Point2::new(x, y))
                .collect::<Vec<Point2<f64>>>(),
        );
        let m = rasterize(&polygon, width, height);
        match mask.as_mut() {
            Some(acc) => acc.union_with(&m).expect("same dimensions"),
            None => mask = Some(m),
        }
    }
    mask
}

/// Loads every `*.json` annotation in `dir` and rasterizes the polygons
/// labeled `label` into per-slice masks keyed by volume slice index.
pub fn load_annotations(
    dir: &Path,
    label: &str,
    source_ids: &[String],
    width: usize,
    height: usize,
) -> Result<BTreeMap<usize, SliceMask>> {
    let mut names = list_matching(dir, "*.json")?;
    names.sort();
    let mut out: BTreeMap<usize, SliceMask> = BTreeMap::new();
    for name in names {
        let file = read_annotation_file(&dir.join(&name))?;
        let index = resolve_slice(&file.slice_id, source_ids).ok_or_else(|| {
            Error::Annotation(format!(
                "{name}: slice id {:?} does not match any volume slice",
                file.slice_id
            ))
        })?;
        if let Some(mask) = annotation_mask(&file, label, width, height) {
            match out.get_mut(&index) {
                Some(acc) => acc.union_with(&mask)?,
                None => {
                    out.insert(index, mask);
                }
            }
        }
    }
    if out.is_empty() {
        log::warn!("no polygons labeled {label:?} in {}", dir.display());
    }
    Ok(out)
}

/// Writes a LabelMe file with one polygon per entry.
pub fn write_annotation_file(
    path: &Path,
    image_path: &str,
    width: usize,
    height: usize,
    polygons: &[LabeledPolygon],
) -> Result<()> {
    let file = LabelMeFile {
        shapes: polygons
            .iter()
            .map(|p| LabelMeShape {
                label: p.label.clone(),
                points: p.vertices.iter().map(|&(x, y)| [x, y]).collect(),
                shape_type: polygon_shape_type(),
            })
            .collect(),
        image_path: Some(image_path.to_owned()),
        image_width: Some(width as u32),
        image_height: Some(height as u32),
    };
    write_json(path, &file)
}

// ---------------------------------------------------------------------------
// Masks

pub fn mask_file_name(index: usize) -> String {
    format!("mask_{index:04}.png")
}

pub fn encode_mask_png(mask: &SliceMask) -> Vec<u8> {
    let img: GrayImage =
        ImageBuffer::from_raw(mask.width() as u32, mask.height() as u32, mask.to_u8())
            .expect("buffer matches dimensions");
    let mut out = std::io::Cursor::new(Vec::new());
    img.write_to(&mut out, image::ImageFormat::Png)
        .expect("png encoding into memory");
    out.into_inner()
}

pub fn save_mask(mask: &SliceMask, path: &Path) -> Result<()> {
    fs::write(path, encode_mask_png(mask)).map_err(|e| Error::io(path, e))
}

/// Reads a mask image; any nonzero gray value is set.
pub fn load_mask(path: &Path) -> Result<SliceMask> {
    let img = image::open(path).map_err(|source| Error::Image {
        path: path.to_owned(),
        source,
    })?;
    let g: ImageBuffer<Luma<u8>, Vec<u8>> = img.to_luma8();
    SliceMask::from_bits(
        g.width() as usize,
        g.height() as usize,
        g.as_raw().iter().map(|v| *v > 0).collect(),
    )
}

/// Reads every `mask_NNNN.png` under `dir/masks`.
pub fn load_masks(dir: &Path) -> Result<BTreeMap<usize, SliceMask>> {
    let mask_dir = dir.join("masks");
    let mut out = BTreeMap::new();
    if !mask_dir.is_dir() {
        return Ok(out);
    }
    for name in list_matching(&mask_dir, "mask_*.png")? {
        let index = name
            .trim_start_matches("mask_")
            .trim_end_matches(".png")
            .parse::<usize>()
            .map_err(|_| Error::Ingestion(format!("unexpected mask file name {name}")))?;
        out.insert(index, load_mask(&mask_dir.join(&name))?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Run outputs

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestKeypoint {
    pub x: f64,
    pub y: f64,
    pub status: KeypointStatus,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestSlice {
    pub index: usize,
    pub source_id: String,
    pub live: usize,
    pub mask: Option<String>,
    pub hull: Option<Vec<[f64; 2]>>,
    pub keypoints: Vec<ManifestKeypoint>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub width: usize,
    pub height: usize,
    pub slice_count: usize,
    pub slice_spacing_mm: f64,
    pub start_slice: usize,
    pub stop_up: usize,
    pub stop_down: usize,
    pub source_ids: Vec<String>,
    pub seed: Option<SeedSpec<f64>>,
    pub params: TrackParams<f64>,
    pub slices: Vec<ManifestSlice>,
}

impl Manifest {
    pub fn from_result<T: Scalar>(result: &SegmentationResult<T>) -> Self {
        let f = |v: T| v.to_f64_lossy();
        let seed = result.seed.as_ref().map(|s| {
            let json = serde_json::to_value(s).expect("seed serializes");
            serde_json::from_value(json).expect("seed converts to f64")
        });
        let p = &result.params;
        Self {
            width: result.width,
            height: result.height,
            slice_count: result.slice_count,
            slice_spacing_mm: result.slice_spacing_mm,
            start_slice: result.start_slice,
            stop_up: result.stop_up,
            stop_down: result.stop_down,
            source_ids: result.source_ids.clone(),
            seed,
            params: TrackParams {
                pyramid_levels: p.pyramid_levels,
                window_radius: p.window_radius,
                max_iterations: p.max_iterations,
                convergence_eps: f(p.convergence_eps),
                min_eigenvalue: f(p.min_eigenvalue),
                fb_error_max: p.fb_error_max.map(f),
            },
            slices: result
                .per_slice
                .iter()
                .map(|(&index, prod)| ManifestSlice {
                    index,
                    source_id: result.source_ids.get(index).cloned().unwrap_or_default(),
                    live: prod.keypoints.live_count(),
                    mask: prod
                        .mask
                        .as_ref()
                        .map(|_| format!("masks/{}", mask_file_name(index))),
                    hull: prod
                        .hull
                        .as_ref()
                        .map(|h| h.vertices.iter().map(|v| [f(v.x), f(v.y)]).collect()),
                    keypoints: prod
                        .keypoints
                        .points
                        .iter()
                        .map(|k| ManifestKeypoint {
                            x: f(k.x),
                            y: f(k.y),
                            status: k.status,
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join("manifest.json");
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json { path, source })
}

fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.to_owned(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn trajectories_csv<T: Scalar>(result: &SegmentationResult<T>) -> String {
    let mut out = String::from("slice_index,point,x,y,status\n");
    for (index, prod) in &result.per_slice {
        for (k, p) in prod.keypoints.points.iter().enumerate() {
            let _ = writeln!(
                out,
                "{index},{k},{},{},{}",
                p.x.to_f64_lossy(),
                p.y.to_f64_lossy(),
                p.status.as_str()
            );
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    pub iqr_low: f64,
    pub iqr_high: f64,
    pub n_evaluated: usize,
    pub n_zero: usize,
}

impl From<&MetricsReport> for MetricsSummary {
    fn from(r: &MetricsReport) -> Self {
        Self {
            mean: r.mean,
            std: r.std,
            median: r.median,
            iqr_low: r.iqr_low,
            iqr_high: r.iqr_high,
            n_evaluated: r.n_evaluated,
            n_zero: r.n_zero,
        }
    }
}

pub fn metrics_csv(report: &MetricsReport) -> String {
    let mut out = String::from("slice_index,dsc\n");
    for (i, d) in &report.per_slice_dsc {
        let _ = writeln!(out, "{i},{d}");
    }
    out
}

/// Writes `metrics.csv` and `metrics_summary.json` into `dir`.
pub fn save_metrics(report: &MetricsReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_text(&dir.join("metrics.csv"), &metrics_csv(report))?;
    write_json(
        &dir.join("metrics_summary.json"),
        &MetricsSummary::from(report),
    )
}

pub fn read_metrics_summary(dir: &Path) -> Result<MetricsSummary> {
    let path = dir.join("metrics_summary.json");
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json { path, source })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoxelHeader {
    pub dims: [usize; 3],
    pub spacing_mm: [f64; 3],
    pub dtype: String,
    pub byte_order: String,
    pub set_voxels: usize,
}

/// Writes `<stem>.raw` (one 0/1 byte per voxel, z-major, row-major inside
/// each plane) and the `<stem>.json` sidecar.
pub fn save_voxels(vox: &VoxelVolume, dir: &Path, stem: &str) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let raw = dir.join(format!("{stem}.raw"));
    fs::write(&raw, vox.to_bytes()).map_err(|e| Error::io(&raw, e))?;
    let header = VoxelHeader {
        dims: [vox.dims.0, vox.dims.1, vox.dims.2],
        spacing_mm: [vox.spacing_mm.0, vox.spacing_mm.1, vox.spacing_mm.2],
        dtype: "u8".into(),
        byte_order: "z-major, then row-major per plane; one byte per voxel".into(),
        set_voxels: vox.count(),
    };
    write_json(&dir.join(format!("{stem}.json")), &header)
}

pub fn load_voxels(dir: &Path, stem: &str) -> Result<VoxelVolume> {
    let meta = dir.join(format!("{stem}.json"));
    let text = fs::read_to_string(&meta).map_err(|e| Error::io(&meta, e))?;
    let header: VoxelHeader = serde_json::from_str(&text).map_err(|source| Error::Json {
        path: meta.clone(),
        source,
    })?;
    let raw = dir.join(format!("{stem}.raw"));
    let bytes = fs::read(&raw).map_err(|e| Error::io(&raw, e))?;
    let [nx, ny, nz] = header.dims;
    if bytes.len() != nx * ny * nz {
        return Err(Error::Ingestion(format!(
            "{}: {} bytes for dims {nx}x{ny}x{nz}",
            raw.display(),
            bytes.len()
        )));
    }
    Ok(VoxelVolume {
        dims: (nx, ny, nz),
        spacing_mm: (
            header.spacing_mm[0],
            header.spacing_mm[1],
            header.spacing_mm[2],
        ),
        bits: bytes.iter().map(|b| *b != 0).collect(),
    })
}

/// Writes the full set of run outputs into `out` (created if needed).
pub fn save_result<T: Scalar>(
    result: &SegmentationResult<T>,
    report: Option<&MetricsReport>,
    out: &Path,
) -> Result<()> {
    let masks_dir = out.join("masks");
    fs::create_dir_all(&masks_dir).map_err(|e| Error::io(&masks_dir, e))?;
    for (index, mask) in result.masks() {
        save_mask(mask, &masks_dir.join(mask_file_name(index)))?;
    }
    write_json(&out.join("manifest.json"), &Manifest::from_result(result))?;
    write_text(&out.join("trajectories.csv"), &trajectories_csv(result))?;
    if let Some(r) = report {
        save_metrics(r, out)?;
    }
    if result.masks().next().is_some() {
        let vox = reconstruct(result, 1.0, result.slice_spacing_mm)?;
        save_voxels(&vox, out, "voxels")?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Seed files

/// Parses a seed file: a header line `slice <index|center>` followed by one
/// `x y` pair per line (whitespace or comma separated). Blank lines and `#`
/// comments are ignored.
pub fn parse_seed_file<T: Scalar>(text: &str) -> Result<SeedSpec<T>> {
    let mut lines = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .enumerate()
        .filter(|(_, l)| !l.is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Seed("seed file is empty".into()))?;
    let fields: Vec<&str> = header
        .split(|c: char| c.is_whitespace() || c == ',' || c == '=' || c == ':')
        .filter(|s| !s.is_empty())
        .collect();
    let start = match fields.as_slice() {
        [key, value] if key.eq_ignore_ascii_case("slice") => {
            if value.eq_ignore_ascii_case("center") {
                StartSlice::Center
            } else {
                StartSlice::Index(value.parse().map_err(|_| {
                    Error::Seed(format!("bad start slice {value:?} in seed header"))
                })?)
            }
        }
        _ => {
            return Err(Error::Seed(format!(
                "seed header must be `slice <index|center>`, got {header:?}"
            )))
        }
    };
    let mut points = Vec::new();
    for (lineno, line) in lines {
        let nums: Vec<&str> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .collect();
        let parsed = match nums.as_slice() {
            [x, y] => x.parse::<f64>().ok().zip(y.parse::<f64>().ok()),
            _ => None,
        };
        let (x, y) = parsed.ok_or_else(|| {
            Error::Seed(format!("line {}: expected `x y`, got {line:?}", lineno + 1))
        })?;
        points.push((T::of(x), T::of(y)));
    }
    Ok(SeedSpec::manual(points, start))
}

pub fn format_seed_file<T: Scalar>(start: StartSlice, points: &[(T, T)]) -> String {
    let mut out = match start {
        StartSlice::Center => "slice center\n".to_string(),
        StartSlice::Index(i) => format!("slice {i}\n"),
    };
    for (x, y) in points {
        let _ = writeln!(out, "{} {}", x.to_f64_lossy(), y.to_f64_lossy());
    }
    out
}

pub fn read_seed_file<T: Scalar>(path: &Path) -> Result<SeedSpec<T>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_seed_file(&text)
}

/// `dir/name` if it exists as a directory.
pub fn existing_dir(dir: &Path, name: &str) -> Option<PathBuf> {
    let p = dir.join(name);
    p.is_dir().then_some(p)
}
