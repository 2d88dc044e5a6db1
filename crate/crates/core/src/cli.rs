//! Argument parsing for the `vsd` binary.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{Overrides, PipelineConfig, Preset};
use crate::error::{Error, Result};
use crate::formats::ParseError;
use crate::pipeline::{self, EvalEntry, PostprocessOutput};

#[derive(Debug, Parser)]
#[command(name = "vsd", version, about = "Crowd social-distance ground truth, post-processing and evaluation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Social-distance threshold, meters.
    #[arg(long = "d-t")]
    pub d_t: Option<f64>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Simulator seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Common {
    fn config(&self) -> Result<PipelineConfig> {
        let flags = Overrides {
            preset: self.preset,
            d_t: self.d_t,
            seed: self.seed,
        };
        PipelineConfig::load(self.config.as_deref(), &flags)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic scenes: annotations, calibration, truth and config.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Compliance split, D_n/D_c rasters and segmentation masks.
    GenGt {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long)]
        calibration: Option<PathBuf>,
    },
    /// Density maps of all annotations, without compliance split.
    Densify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long)]
        calibration: Option<PathBuf>,
    },
    /// Segmentation masks from a D_n raster.
    SegGt {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dn: PathBuf,
        #[arg(long)]
        calibration: Option<PathBuf>,
    },
    /// Risk regions and overlay from a predicted density raster.
    Postprocess {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        frame_id: u64,
    },
    /// Density-weighted scores of predictions against D_n/D_c.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// CSV `frame_id,pred,d_n,d_c,gt_mask`.
        #[arg(long, conflicts_with_all = ["pred", "dn", "dc", "gt_mask"])]
        manifest: Option<PathBuf>,
        #[arg(long, requires_all = ["dn", "dc"])]
        pred: Option<PathBuf>,
        #[arg(long)]
        dn: Option<PathBuf>,
        #[arg(long)]
        dc: Option<PathBuf>,
        #[arg(long)]
        gt_mask: Option<PathBuf>,
    },
}

fn execute(cmd: Command) -> Result<String> {
    match cmd {
        Command::Simulate { common } => {
            let truth = pipeline::cmd_simulate(&common.config()?, &common.out_dir)?;
            let persons: usize = truth.frames.iter().map(|f| f.persons.len()).sum();
            Ok(format!("simulated {} frame(s), {persons} person(s)", truth.frames.len()))
        }
        Command::GenGt {
            common,
            annotations,
            calibration,
        } => {
            let s = pipeline::cmd_gen_gt(&common.config()?, &annotations, calibration.as_deref(), &common.out_dir)?;
            let (n, c) = s.counts.iter().fold((0, 0), |(n, c), x| (n + x.0, c + x.1));
            Ok(format!("{} frame(s): {n} NSDC, {c} SDC", s.frames.len()))
        }
        Command::Densify {
            common,
            annotations,
            calibration,
        } => {
            pipeline::cmd_densify(&common.config()?, &annotations, calibration.as_deref(), &common.out_dir)?;
            Ok("density maps written".into())
        }
        Command::SegGt { common, dn, calibration } => {
            pipeline::cmd_seg_gt(&common.config()?, &dn, calibration.as_deref(), &common.out_dir)?;
            Ok("segmentation masks written".into())
        }
        Command::Postprocess { common, input, frame_id } => {
            match pipeline::cmd_postprocess(&common.config()?, &input, frame_id, &common.out_dir)? {
                PostprocessOutput::Regions(n) => Ok(format!("{n} region(s)")),
                PostprocessOutput::Mask => Ok("mask written".into()),
            }
        }
        Command::Evaluate {
            common,
            manifest,
            pred,
            dn,
            dc,
            gt_mask,
        } => {
            let cfg = common.config()?;
            let entries = match (manifest, pred, dn, dc) {
                (Some(m), ..) => pipeline::load_manifest(&m)?,
                (None, Some(pred), Some(d_n), Some(d_c)) => vec![EvalEntry {
                    frame_id: 0,
                    pred,
                    d_n,
                    d_c,
                    gt_mask,
                }],
                _ => {
                    return Err(Error::parse(
                        Path::new("<arguments>"),
                        ParseError::new("evaluate needs --manifest or --pred, --dn and --dc"),
                    ))
                }
            };
            let r = pipeline::cmd_evaluate(&cfg, &entries, &common.out_dir)?;
            Ok(format!(
                "precision {:.6} recall {:.6} specificity {:.6} f1 {:.6}",
                r.precision, r.recall, r.specificity, r.f1
            ))
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { Error::EXIT_PARSE } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(msg) => {
            println!("{msg}");
            0
        }
        Err(e) => {
            eprintln!("vsd: error: {e}");
            e.exit_code()
        }
    }
}
