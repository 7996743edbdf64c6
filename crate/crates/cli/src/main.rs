use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use keytrack::io::{self, LoadOptions, SliceOrder};
use keytrack::{SeedSpec, StartSlice};
use keytrack_cli::commands::{self, TrackRequest};
use keytrack_cli::config::{parse_roi, DetectArgs, TrackArgs, Tunables, VolumeArgs};
use keytrack_cli::service;

#[derive(Parser)]
#[command(
    name = "keytrack",
    version,
    about = "Training-free slice-propagation segmentation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Detect seed keypoints in a region of one slice and print them as CSV.
    Detect {
        #[command(flatten)]
        volume: VolumeArgs,
        /// Region to search, `x0,y0,w,h` in pixels.
        #[arg(long)]
        roi: String,
        /// Slice to seed on: an index or `center`.
        #[arg(long, default_value = "center")]
        slice: String,
        #[command(flatten)]
        detect: DetectArgs,
    },
    /// Seed, propagate through the whole volume and write masks and reports.
    Track {
        #[command(flatten)]
        volume: VolumeArgs,
        #[command(flatten)]
        seed: SeedArgs,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// LabelMe annotation directory to score the run against.
        #[arg(long)]
        annotations: Option<PathBuf>,
        /// Annotation label of the structure.
        #[arg(long, default_value = "ring")]
        label: String,
        /// Also score slices whose ground truth is empty.
        #[arg(long)]
        include_empty: bool,
        #[command(flatten)]
        track: TrackArgs,
        #[command(flatten)]
        detect: DetectArgs,
    },
    /// Score a saved run against LabelMe annotations.
    Evaluate {
        /// Directory written by `track`.
        #[arg(long)]
        result: PathBuf,
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long, default_value = "ring")]
        label: String,
        #[arg(long)]
        include_empty: bool,
        /// Also write metrics.csv and metrics_summary.json here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stack the masks of a saved run into a voxel volume.
    Reconstruct {
        #[arg(long)]
        result: PathBuf,
        /// In-plane pixel size in millimetres.
        #[arg(long, default_value_t = 1.0)]
        in_plane: f64,
        /// Slice spacing in millimetres; defaults to the run's.
        #[arg(long)]
        slice_spacing: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve the session API over HTTP.
    Serve {
        /// Directory whose subdirectories are volumes.
        #[arg(long)]
        root: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
        #[arg(long, default_value = "*.png")]
        pattern: String,
        #[arg(long)]
        numeric_sort: bool,
        #[arg(long, default_value_t = 1.0)]
        slice_spacing: f64,
    },
    /// Write a synthetic ring phantom with annotations and a seed file.
    Phantom {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 32)]
        slices: usize,
        /// Per-slice drift in x, pixels.
        #[arg(long, default_value_t = 0.0)]
        drift_x: f64,
        /// Per-slice drift in y, pixels.
        #[arg(long, default_value_t = 0.0)]
        drift_y: f64,
        /// Texture seed.
        #[arg(long, default_value_t = 7)]
        texture_seed: u64,
    },
}

#[derive(Args)]
struct SeedArgs {
    /// Manual seed file (`slice <n|center>` then one `x y` per line).
    #[arg(long, conflicts_with = "roi", required_unless_present = "roi")]
    seeds: Option<PathBuf>,
    /// Detect seeds automatically inside `x0,y0,w,h`.
    #[arg(long)]
    roi: Option<String>,
    /// Start slice for automatic seeding: an index or `center`.
    #[arg(long, default_value = "center", requires = "roi")]
    slice: String,
}

fn parse_start(text: &str) -> Result<StartSlice> {
    if text.eq_ignore_ascii_case("center") {
        return Ok(StartSlice::Center);
    }
    Ok(StartSlice::Index(text.parse().with_context(|| {
        format!("start slice {text:?} must be an index or `center`")
    })?))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Detect {
            volume,
            roi,
            slice,
            detect,
        } => {
            let mut t = Tunables::default();
            detect.apply(&mut t.detect);
            let roi = parse_roi(&roi)?;
            let vol = commands::load_volume(&volume.volume, &volume.load_options())?;
            print!("{}", commands::detect(&vol, roi, parse_start(&slice)?, &t)?);
        }
        Command::Track {
            volume,
            seed,
            out,
            annotations,
            label,
            include_empty,
            track,
            detect,
        } => {
            let mut t = Tunables::default();
            track.apply(&mut t.track)?;
            detect.apply(&mut t.detect);
            let spec = match (&seed.seeds, &seed.roi) {
                (Some(file), _) => io::read_seed_file::<f64>(file)?,
                (None, Some(roi)) => {
                    SeedSpec::auto(parse_roi(roi)?, t.detect, parse_start(&seed.slice)?)
                }
                (None, None) => bail!("give either --seeds or --roi"),
            };
            let vol = commands::load_volume(&volume.volume, &volume.load_options())?;
            let req = TrackRequest {
                volume: &vol,
                seed: spec,
                tunables: t,
                out: &out,
                annotations: annotations.map(|a| (a, label)),
                include_empty,
            };
            print!("{}", commands::track(&req)?);
        }
        Command::Evaluate {
            result,
            annotations,
            label,
            include_empty,
            out,
        } => {
            let (report, text) =
                commands::evaluate_dir(&result, &annotations, &label, include_empty)?;
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)
                    .with_context(|| format!("creating {}", dir.display()))?;
                io::save_metrics(&report, &dir)?;
            }
            print!("{text}");
        }
        Command::Reconstruct {
            result,
            in_plane,
            slice_spacing,
            out,
        } => {
            print!(
                "{}",
                commands::reconstruct_dir(&result, in_plane, slice_spacing, &out)?
            );
        }
        Command::Serve {
            root,
            bind,
            pattern,
            numeric_sort,
            slice_spacing,
        } => {
            let load = LoadOptions {
                pattern,
                order: if numeric_sort {
                    SliceOrder::Numeric
                } else {
                    SliceOrder::Lexicographic
                },
                strict: false,
                slice_spacing_mm: slice_spacing,
            };
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(service::serve(&root, bind, load, Tunables::default()))?;
        }
        Command::Phantom {
            out,
            slices,
            drift_x,
            drift_y,
            texture_seed,
        } => {
            print!(
                "{}",
                commands::write_phantom(&out, slices, (drift_x, drift_y), texture_seed)?
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
