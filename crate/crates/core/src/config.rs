//! Pipeline configuration: dataset presets, a JSON config file, and flag
//! overrides, applied in that order.
//!
//! A config file is a JSON object whose keys are all optional:
//!
//! ```json
//! {
//!   "preset": "citystreet",
//!   "plane": {"h_h": 1.75, "origin_x": 0, "origin_y": 0, "cell_size": 0.1, "cells_x": 200, "cells_y": 200},
//!   "d_t": 2.0,
//!   "merge_radius": 0.25,
//!   "plane_kernel": {"size": 5, "sigma": 15.0},
//!   "image_kernel": {"size": 10, "sigma": 30.0},
//!   "morph": {"dilate_side": 7, "dilate_passes": 2, "erode_side": 4, "erode_passes": 2, "threshold": 0.0},
//!   "postprocess": {"density_threshold": 0.0784313725490196, "soft_mask_threshold": 0.3, "min_count": 0.5, "danger_count": 5.0},
//!   "calibration": "calibration.json",
//!   "scene": {"seed": 7, "frames": 4, "area": [20, 20], "n_isolated": 6, "clusters": [{"center": [6, 6], "n": 4, "spread": 0.6}]}
//! }
//! ```
//!
//! Unknown keys are rejected. A relative `calibration` path is resolved
//! against the directory of the config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::annotations::{DEFAULT_DISTANCE_THRESHOLD, DEFAULT_MERGE_RADIUS};
use crate::density::{presets, GaussianKernelSpec};
use crate::error::{Context, Error, Result};
use crate::formats::{ParseError, PlaneRecord};
use crate::geometry::{HeadPlane, DEFAULT_HEAD_HEIGHT};
use crate::maskgen::MorphSchedule;
use crate::postprocess::PostprocessConfig;
use crate::simulate::{ClusterSpec, RigConfig, SceneConfig, DEFAULT_MAX_ATTEMPTS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Citystreet,
    Pets2009,
}

/// Simulator settings: the scene generator, the camera rig, the number of
/// frames and the head-plane raster fitted around the area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneSettings {
    pub seed: u64,
    pub frames: u64,
    pub area: [f64; 2],
    pub n_isolated: usize,
    pub clusters: Vec<ClusterSpec>,
    pub min_isolated_spacing: f64,
    pub min_separation: f64,
    pub dropout: f64,
    pub max_attempts: usize,
    pub cameras: RigConfig,
    pub plane_cell: f64,
    pub plane_margin: f64,
}

impl Default for SceneSettings {
    fn default() -> Self {
        Self {
            seed: 0,
            frames: 1,
            area: [20.0, 20.0],
            n_isolated: 6,
            clusters: vec![
                ClusterSpec {
                    center: [6.0, 6.0],
                    n: 4,
                    spread: 0.6,
                },
                ClusterSpec {
                    center: [14.0, 13.0],
                    n: 5,
                    spread: 0.6,
                },
            ],
            min_isolated_spacing: 2.0,
            min_separation: 0.4,
            dropout: 0.0,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
            cameras: RigConfig::default(),
            plane_cell: 0.125,
            plane_margin: 2.0,
        }
    }
}

impl SceneSettings {
    pub fn scene_config(&self) -> SceneConfig {
        SceneConfig {
            seed: self.seed,
            area: self.area,
            n_isolated: self.n_isolated,
            clusters: self.clusters.clone(),
            min_isolated_spacing: self.min_isolated_spacing,
            min_separation: self.min_separation,
            dropout: self.dropout,
            max_attempts: self.max_attempts,
        }
    }
}

/// The JSON config file; every key optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plane: Option<PlaneRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub merge_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plane_kernel: Option<GaussianKernelSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub image_kernel: Option<GaussianKernelSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub morph: Option<MorphSchedule>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub postprocess: Option<PostprocessConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibration: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scene: Option<SceneSettings>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> std::result::Result<Self, ParseError> {
        serde_json::from_str(text).map_err(|e| ParseError::at(e.line(), e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}

/// Values given on the command line; they win over the config file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub preset: Option<Preset>,
    pub d_t: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub preset: Preset,
    pub plane: PlaneRecord,
    pub d_t: f64,
    pub merge_radius: f64,
    pub plane_kernel: GaussianKernelSpec,
    pub image_kernel: GaussianKernelSpec,
    pub morph: MorphSchedule,
    pub postprocess: PostprocessConfig,
    pub calibration: Option<PathBuf>,
    pub scene: SceneSettings,
}

pub const DEFAULT_PLANE: PlaneRecord = PlaneRecord {
    h_h: DEFAULT_HEAD_HEIGHT,
    origin_x: 0.0,
    origin_y: 0.0,
    cell_size: 0.1,
    cells_x: 200,
    cells_y: 200,
};

impl PipelineConfig {
    pub fn preset(preset: Preset) -> Self {
        let (plane_kernel, image_kernel, morph, postprocess) = match preset {
            Preset::Citystreet => (
                presets::CITYSTREET_PLANE,
                presets::CITYSTREET_IMAGE,
                MorphSchedule::CITYSTREET,
                PostprocessConfig::CITYSTREET,
            ),
            Preset::Pets2009 => (
                presets::PETS_PLANE,
                presets::PETS_IMAGE,
                MorphSchedule::PETS2009,
                PostprocessConfig::PETS2009_UNET,
            ),
        };
        Self {
            preset,
            plane: DEFAULT_PLANE,
            d_t: DEFAULT_DISTANCE_THRESHOLD,
            merge_radius: DEFAULT_MERGE_RADIUS,
            plane_kernel,
            image_kernel,
            morph,
            postprocess,
            calibration: None,
            scene: SceneSettings::default(),
        }
    }

    /// Preset, then `file` (whose relative paths resolve against `base_dir`),
    /// then `flags`. The result is validated.
    pub fn resolve(file: &ConfigFile, base_dir: Option<&Path>, flags: &Overrides) -> Result<Self> {
        let preset = flags.preset.or(file.preset).unwrap_or(Preset::Citystreet);
        let mut cfg = Self::preset(preset);
        if let Some(p) = file.plane {
            cfg.plane = p;
        }
        if let Some(v) = file.d_t {
            cfg.d_t = v;
        }
        if let Some(v) = file.merge_radius {
            cfg.merge_radius = v;
        }
        if let Some(k) = file.plane_kernel {
            cfg.plane_kernel = k;
        }
        if let Some(k) = file.image_kernel {
            cfg.image_kernel = k;
        }
        if let Some(m) = file.morph {
            cfg.morph = m;
        }
        if let Some(p) = file.postprocess {
            cfg.postprocess = p;
        }
        if let Some(c) = &file.calibration {
            cfg.calibration = Some(match base_dir {
                Some(dir) if c.is_relative() => dir.join(c),
                _ => c.clone(),
            });
        }
        if let Some(s) = &file.scene {
            cfg.scene = s.clone();
        }
        if let Some(v) = flags.d_t {
            cfg.d_t = v;
        }
        if let Some(v) = flags.seed {
            cfg.scene.seed = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads the config file at `path` (if any) and resolves it.
    pub fn load(path: Option<&Path>, flags: &Overrides) -> Result<Self> {
        let Some(path) = path else {
            return Self::resolve(&ConfigFile::default(), None, flags);
        };
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file = ConfigFile::parse(&text).map_err(|e| Error::parse(path, e))?;
        Self::resolve(&file, path.parent(), flags)
    }

    pub fn validate(&self) -> Result<()> {
        const CTX: &str = "config";
        if !(self.d_t > 0.0 && self.d_t.is_finite()) {
            return Err(Error::constraint(CTX, format!("d_t must be positive, got {}", self.d_t)));
        }
        if !(self.merge_radius > 0.0 && self.merge_radius.is_finite()) {
            return Err(Error::constraint(
                CTX,
                format!("merge_radius must be positive, got {}", self.merge_radius),
            ));
        }
        self.plane_kernel.validate().context("config plane_kernel")?;
        self.image_kernel.validate().context("config image_kernel")?;
        self.morph.validate().context("config morph")?;
        self.postprocess.validate().context("config postprocess")?;
        self.head_plane()?;
        let s = &self.scene;
        if !(s.plane_cell > 0.0 && s.plane_cell.is_finite() && s.plane_margin >= 0.0 && s.plane_margin.is_finite()) {
            return Err(Error::constraint(CTX, "scene plane_cell must be positive and plane_margin non-negative"));
        }
        Ok(())
    }

    pub fn head_plane(&self) -> Result<HeadPlane> {
        self.plane.to_plane().context("config plane")
    }

    /// The config as a complete file, every key present.
    pub fn to_file(&self) -> ConfigFile {
        ConfigFile {
            preset: Some(self.preset),
            plane: Some(self.plane),
            d_t: Some(self.d_t),
            merge_radius: Some(self.merge_radius),
            plane_kernel: Some(self.plane_kernel),
            image_kernel: Some(self.image_kernel),
            morph: Some(self.morph),
            postprocess: Some(self.postprocess),
            calibration: self.calibration.clone(),
            scene: Some(self.scene.clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_differ_where_datasets_differ() {
        let c = PipelineConfig::preset(Preset::Citystreet);
        let p = PipelineConfig::preset(Preset::Pets2009);
        assert_eq!(c.plane_kernel, presets::CITYSTREET_PLANE);
        assert_eq!(p.morph.erode_side, 5);
        assert_eq!(p.postprocess.soft_mask_threshold, 0.9);
        assert_eq!(c.d_t, 2.0);
    }

    #[test]
    fn merge_order() {
        let file = ConfigFile::parse(r#"{"preset": "pets2009", "d_t": 1.5, "merge_radius": 0.3}"#).unwrap();
        let cfg = PipelineConfig::resolve(&file, None, &Overrides::default()).unwrap();
        assert_eq!(cfg.preset, Preset::Pets2009);
        assert_eq!((cfg.d_t, cfg.merge_radius), (1.5, 0.3));

        let flags = Overrides {
            preset: Some(Preset::Citystreet),
            d_t: Some(2.5),
            seed: Some(11),
        };
        let cfg = PipelineConfig::resolve(&file, None, &flags).unwrap();
        assert_eq!(cfg.preset, Preset::Citystreet);
        assert_eq!(cfg.morph, MorphSchedule::CITYSTREET);
        assert_eq!((cfg.d_t, cfg.merge_radius, cfg.scene.seed), (2.5, 0.3, 11));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ConfigFile::parse(r#"{"d_t": 2, "dt": 3}"#).is_err());
        assert!(ConfigFile::parse(r#"{"morph": {"dilate_side": 7}}"#).is_err());
        assert!(ConfigFile::parse(r#"{"scene": {"sede": 3}}"#).is_err());
        let e = ConfigFile::parse("{\n\"d_t\": 2,\n\"oops\": 1\n}").unwrap_err();
        assert_eq!(e.line, Some(3));
    }

    #[test]
    fn invalid_values_are_constraint_violations() {
        let flags = Overrides {
            d_t: Some(0.0),
            ..Overrides::default()
        };
        let e = PipelineConfig::resolve(&ConfigFile::default(), None, &flags).unwrap_err();
        assert_eq!(e.exit_code(), 4);
        let file = ConfigFile::parse(r#"{"plane_kernel": {"size": 0, "sigma": 1}}"#).unwrap();
        assert_eq!(PipelineConfig::resolve(&file, None, &Overrides::default()).unwrap_err().exit_code(), 4);
    }

    #[test]
    fn calibration_resolves_against_config_dir() {
        let file = ConfigFile::parse(r#"{"calibration": "cal.json"}"#).unwrap();
        let cfg = PipelineConfig::resolve(&file, Some(Path::new("/data/run")), &Overrides::default()).unwrap();
        assert_eq!(cfg.calibration.as_deref(), Some(Path::new("/data/run/cal.json")));
    }

    #[test]
    fn full_file_round_trip() {
        let cfg = PipelineConfig::preset(Preset::Pets2009);
        let text = cfg.to_file().to_json();
        let back = ConfigFile::parse(&text).unwrap();
        assert_eq!(back.to_json(), text);
        assert_eq!(PipelineConfig::resolve(&back, None, &Overrides::default()).unwrap(), cfg);
    }
}
