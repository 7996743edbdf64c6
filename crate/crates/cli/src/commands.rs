//! Subcommand implementations. Each returns the text to print on success.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use keytrack::io::{self, LabeledPolygon};
use keytrack::phantom::{ring_volume, RingPhantom};
use keytrack::pipeline::segment;
use keytrack::{
    evaluate, evaluate_masks, seed_keypoints, stack_masks, MetricsReport, Roi, SeedSpec,
    StartSlice, Volume64,
};

use crate::config::Tunables;

pub fn load_volume(dir: &Path, opts: &io::LoadOptions) -> Result<Volume64> {
    io::load_volume(dir, opts).with_context(|| format!("loading volume from {}", dir.display()))
}

/// Runs automatic seeding on one slice and lists the keypoints as
/// `slice_index,x,y`.
pub fn detect(
    volume: &Volume64,
    roi: Roi,
    start: StartSlice,
    tunables: &Tunables,
) -> Result<String> {
    let seed = SeedSpec::auto(roi, tunables.detect, start);
    let set = seed_keypoints(volume, &seed)?;
    let mut out = String::from("slice_index,x,y\n");
    for p in &set.points {
        let _ = writeln!(out, "{},{},{}", set.slice_index, p.x, p.y);
    }
    Ok(out)
}

pub struct TrackRequest<'a> {
    pub volume: &'a Volume64,
    pub seed: SeedSpec<f64>,
    pub tunables: Tunables,
    pub out: &'a Path,
    /// Ground truth to score against while saving: `(annotation dir, label)`.
    pub annotations: Option<(PathBuf, String)>,
    pub include_empty: bool,
}

/// Full pipeline run; writes every output into `req.out`.
pub fn track(req: &TrackRequest<'_>) -> Result<String> {
    let result = segment(req.volume, &req.seed, &req.tunables.track)?;
    let report = match &req.annotations {
        Some((dir, label)) => {
            let truth = io::load_annotations(
                dir,
                label,
                req.volume.source_ids(),
                req.volume.width(),
                req.volume.height(),
            )?;
            Some(evaluate(&result, &truth, req.include_empty)?)
        }
        None => None,
    };
    io::save_result(&result, report.as_ref(), req.out)
        .with_context(|| format!("writing results to {}", req.out.display()))?;

    let with_mask = result.masks().count();
    let mut out = format!(
        "tracked {} slices ({} with masks), start {}, stop_up {}, stop_down {}\n",
        result.per_slice.len(),
        with_mask,
        result.start_slice,
        result.stop_up,
        result.stop_down
    );
    if let Some(r) = &report {
        out.push_str(&summary_line(r));
    }
    Ok(out)
}

pub fn summary_line(r: &MetricsReport) -> String {
    format!(
        "mean {:.4} std {:.4} median {:.4} iqr [{:.4}, {:.4}] n {} n_zero {}\n",
        r.mean, r.std, r.median, r.iqr_low, r.iqr_high, r.n_evaluated, r.n_zero
    )
}

/// Scores a saved run against annotation polygons.
pub fn evaluate_dir(
    result_dir: &Path,
    annotations: &Path,
    label: &str,
    include_empty: bool,
) -> Result<(MetricsReport, String)> {
    let manifest = io::read_manifest(result_dir)?;
    let masks = io::load_masks(result_dir)?;
    let truth = io::load_annotations(
        annotations,
        label,
        &manifest.source_ids,
        manifest.width,
        manifest.height,
    )?;
    if truth.is_empty() {
        bail!(
            "no annotated slices with label {label:?} in {}",
            annotations.display()
        );
    }
    let report = evaluate_masks(
        &masks,
        manifest.width,
        manifest.height,
        &truth,
        include_empty,
    )?;
    let mut text = String::from("slice_index,dsc\n");
    for (i, d) in &report.per_slice_dsc {
        let _ = writeln!(text, "{i},{d:.6}");
    }
    text.push_str(&summary_line(&report));
    Ok((report, text))
}

/// Rebuilds the voxel volume of a saved run with new spacing.
pub fn reconstruct_dir(
    result_dir: &Path,
    in_plane_mm: f64,
    spacing_mm: Option<f64>,
    out: &Path,
) -> Result<String> {
    let manifest = io::read_manifest(result_dir)?;
    let masks = io::load_masks(result_dir)?;
    let spacing = spacing_mm.unwrap_or(manifest.slice_spacing_mm);
    let vox = stack_masks(
        &masks,
        (manifest.width, manifest.height, manifest.slice_count),
        in_plane_mm,
        spacing,
    )?;
    io::save_voxels(&vox, out, "voxels")?;
    Ok(format!(
        "wrote {}x{}x{} voxels ({} set) to {}\n",
        vox.dims.0,
        vox.dims.1,
        vox.dims.2,
        vox.count(),
        out.join("voxels.raw").display()
    ))
}

/// Writes a ring phantom: slice PNGs, LabelMe annotations of the outer
/// circle under `annotations/`, and a manual seed file `seeds.txt`.
pub fn write_phantom(
    out: &Path,
    slices: usize,
    drift: (f64, f64),
    texture_seed: u64,
) -> Result<String> {
    if slices == 0 {
        bail!("a phantom needs at least one slice");
    }
    let anchor = slices / 2;
    let rv = ring_volume::<f64>(RingPhantom::standard(texture_seed), slices, anchor, drift);
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let ann_dir = out.join("annotations");
    fs::create_dir_all(&ann_dir)?;
    for (i, (slice, &(cx, cy))) in rv.volume.slices().iter().zip(&rv.centers).enumerate() {
        let name = format!("slice_{i:03}.png");
        io::save_slice_png(slice, &out.join(&name))?;
        let r = rv.phantom.outer_radius;
        let vertices = (0..96)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / 96.0;
                (cx + r * a.cos(), cy + r * a.sin())
            })
            .collect();
        io::write_annotation_file(
            &ann_dir.join(format!("slice_{i:03}.json")),
            &name,
            rv.phantom.width,
            rv.phantom.height,
            &[LabeledPolygon {
                label: "ring".into(),
                vertices,
            }],
        )?;
    }
    let c = rv.centers[anchor];
    let seeds = rv.phantom.boundary_points(c.0, c.1, 40);
    fs::write(
        out.join("seeds.txt"),
        io::format_seed_file(StartSlice::Index(anchor), &seeds),
    )?;
    Ok(format!(
        "wrote {slices} slices, annotations and seeds.txt to {}\n",
        out.display()
    ))
}

/// Per-slice DSCs from a `slice_index,dsc` table, e.g. for re-aggregating
/// several runs.
pub fn parse_scores(text: &str) -> Result<BTreeMap<usize, f64>> {
    let mut out = BTreeMap::new();
    for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
        let (i, d) = line
            .split_once(',')
            .with_context(|| format!("bad score line {line:?}"))?;
        out.insert(i.trim().parse()?, d.trim().parse()?);
    }
    Ok(out)
}
