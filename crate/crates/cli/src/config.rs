//! Tunables shared by every subcommand and the service.
//!
//! [`Tunables::default`] is the single place the engine defaults are
//! collected: a 21x21 window over 3 pyramid levels, 30 iterations, 0.01 px
//! convergence, 1e-4 minimum eigenvalue, forward-backward check at 1 px, and
//! Haar detection at the 0.95 magnitude quantile with 4 px spacing and at
//! most 64 keypoints.

use anyhow::{bail, Context};
use clap::Args;
use keytrack::io::{LoadOptions, SliceOrder};
use keytrack::{DetectParams, Roi, ThresholdPolicy, TrackParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Tunables {
    pub track: TrackParams<f64>,
    pub detect: DetectParams<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct TrackArgs {
    /// Pyramid levels (1 disables the pyramid).
    #[arg(long)]
    pub levels: Option<usize>,
    /// Half-size of the tracking window in pixels.
    #[arg(long)]
    pub window_radius: Option<usize>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// Convergence threshold on the per-iteration update, in pixels.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Minimum structure-tensor eigenvalue (normalized intensities).
    #[arg(long)]
    pub min_eigenvalue: Option<f64>,
    /// Forward-backward error limit in pixels, or `off`.
    #[arg(long)]
    pub fb_error: Option<String>,
}

impl TrackArgs {
    pub fn apply(&self, params: &mut TrackParams<f64>) -> anyhow::Result<()> {
        if let Some(v) = self.levels {
            params.pyramid_levels = v;
        }
        if let Some(v) = self.window_radius {
            params.window_radius = v;
        }
        if let Some(v) = self.max_iterations {
            params.max_iterations = v;
        }
        if let Some(v) = self.eps {
            params.convergence_eps = v;
        }
        if let Some(v) = self.min_eigenvalue {
            params.min_eigenvalue = v;
        }
        if let Some(fb) = &self.fb_error {
            params.fb_error_max = if fb.eq_ignore_ascii_case("off") {
                None
            } else {
                Some(
                    fb.parse()
                        .with_context(|| format!("bad --fb-error {fb:?}"))?,
                )
            };
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct DetectArgs {
    /// Keep cells above this quantile of the magnitude map.
    #[arg(long, conflicts_with = "threshold")]
    pub quantile: Option<f64>,
    /// Keep cells above this absolute magnitude.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Minimum keypoint spacing in pixels.
    #[arg(long)]
    pub min_spacing: Option<f64>,
    /// Keypoint cap; 0 means unlimited.
    #[arg(long)]
    pub max_keypoints: Option<usize>,
}

impl DetectArgs {
    pub fn apply(&self, params: &mut DetectParams<f64>) {
        if let Some(q) = self.quantile {
            params.threshold_policy = ThresholdPolicy::Quantile(q);
        }
        if let Some(t) = self.threshold {
            params.threshold_policy = ThresholdPolicy::Absolute(t);
        }
        if let Some(s) = self.min_spacing {
            params.min_spacing = s;
        }
        if let Some(m) = self.max_keypoints {
            params.max_keypoints = (m > 0).then_some(m);
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct VolumeArgs {
    /// Directory holding one grayscale image per slice.
    #[arg(long)]
    pub volume: std::path::PathBuf,
    /// File-name glob selecting slice images.
    #[arg(long, default_value = "*.png")]
    pub pattern: String,
    /// Order files by embedded numbers (s2 before s10) instead of bytewise.
    #[arg(long)]
    pub numeric_sort: bool,
    /// Reject color images instead of converting them.
    #[arg(long)]
    pub strict: bool,
    /// Distance between slices in millimetres.
    #[arg(long, default_value_t = 1.0)]
    pub slice_spacing: f64,
}

impl VolumeArgs {
    pub fn load_options(&self) -> LoadOptions {
        LoadOptions {
            pattern: self.pattern.clone(),
            order: if self.numeric_sort {
                SliceOrder::Numeric
            } else {
                SliceOrder::Lexicographic
            },
            strict: self.strict,
            slice_spacing_mm: self.slice_spacing,
        }
    }
}

/// Parses `x0,y0,w,h`.
pub fn parse_roi(text: &str) -> anyhow::Result<Roi> {
    let parts: Vec<usize> = text
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("roi {text:?} must be x0,y0,w,h"))?;
    let [x0, y0, w, h] = parts[..] else {
        bail!("roi {text:?} must have four fields x0,y0,w,h");
    };
    Ok(Roi::new(x0, y0, w, h)?)
}
