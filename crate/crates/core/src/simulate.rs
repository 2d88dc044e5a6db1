//! Synthetic multi-camera crowd scenes with known compliance labels.
//!
//! # Random stream
//!
//! All randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64(seed)` and a stream selector: stream 0 drives scene
//! generation, stream `1 + camera_id` drives per-camera dropout. Uniform
//! draws take the top 53 bits of `next_u64` (`(x >> 11) · 2⁻⁵³`). Normal
//! draws use one Box–Muller transform per sample,
//! `sqrt(-2 ln(1 - u1)) · cos(2π u2)`. Frame `f` of a multi-frame run uses
//! seed `seed + f · 0x9E37_79B9_7F4A_7C15` (wrapping).
//!
//! # Construction
//!
//! Clusters are built first. Each member is drawn from an isotropic normal
//! around the cluster center and accepted once it lies inside the area, is
//! at least `min_separation` from every placed head and (after the first
//! member) is within `0.95 · d_t` of some earlier member of its cluster, so
//! every member of a cluster of two or more is non-compliant. Isolated
//! persons are then drawn uniformly over the area and accepted when farther
//! than `d_t + ISOLATION_MARGIN` from every placed head and farther than
//! `min_isolated_spacing` from other isolated persons.

use nalgebra::Vector3;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotations::{distance, ComplianceLabel, HeadAnnotation};
use crate::geometry::{
    plane_homography, CameraExtrinsics, CameraIntrinsics, CameraModel, GeometryError, HeadPlane,
};
use crate::grid::{CameraId, GridSpec};

/// Fraction of `d_t` within which a new cluster member must land.
pub const CHAIN_FRACTION: f64 = 0.95;
/// Extra clearance beyond `d_t` kept around isolated persons, meters.
pub const ISOLATION_MARGIN: f64 = 0.05;
pub const DEFAULT_MAX_ATTEMPTS: usize = 10_000;
const FRAME_SEED_STEP: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid scene config: {0}")]
    InvalidConfig(String),
    #[error("could not place {what} after {attempts} attempts")]
    Infeasible { what: String, attempts: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Deterministic random source for scenes.
#[derive(Debug, Clone)]
pub struct SceneRng(ChaCha8Rng);

impl SceneRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self(rng)
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal.
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

/// Seed used for frame `frame` of a multi-frame run.
pub fn frame_seed(seed: u64, frame: u64) -> u64 {
    seed.wrapping_add(frame.wrapping_mul(FRAME_SEED_STEP))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterSpec {
    pub center: [f64; 2],
    pub n: usize,
    /// Standard deviation of member offsets from the center, meters.
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub seed: u64,
    /// Area `[0, w] × [0, h]` on the head plane, meters.
    pub area: [f64; 2],
    pub n_isolated: usize,
    pub clusters: Vec<ClusterSpec>,
    pub min_isolated_spacing: f64,
    /// Smallest distance between any two heads, meters.
    pub min_separation: f64,
    /// Per-camera, per-head probability of an annotation going missing.
    pub dropout: f64,
    pub max_attempts: usize,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            area: [20.0, 20.0],
            n_isolated: 0,
            clusters: Vec::new(),
            min_isolated_spacing: 2.0,
            min_separation: 0.4,
            dropout: 0.0,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidConfig(m));
        if !(self.area[0] > 0.0 && self.area[1] > 0.0 && self.area.iter().all(|v| v.is_finite())) {
            return bad(format!("area must be positive, got {:?}", self.area));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout must lie in [0, 1), got {}", self.dropout));
        }
        if !(self.min_isolated_spacing >= 0.0 && self.min_separation >= 0.0) {
            return bad("spacings must be non-negative".into());
        }
        if self.max_attempts == 0 {
            return bad("max_attempts must be positive".into());
        }
        for (i, c) in self.clusters.iter().enumerate() {
            if c.n < 2 {
                return bad(format!("cluster {i} needs at least 2 members, got {}", c.n));
            }
            if !(c.spread > 0.0 && c.spread.is_finite()) {
                return bad(format!("cluster {i} spread must be positive"));
            }
            if !c.center.iter().all(|v| v.is_finite()) {
                return bad(format!("cluster {i} center is not finite"));
            }
        }
        Ok(())
    }

    pub fn total_persons(&self) -> usize {
        self.n_isolated + self.clusters.iter().map(|c| c.n).sum::<usize>()
    }

    fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= 0.0 && p[1] >= 0.0 && p[0] <= self.area[0] && p[1] <= self.area[1]
    }
}

/// A generated crowd on the head plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub frame_id: u64,
    pub seed: u64,
    pub dropout: f64,
    /// Head positions on the plane, meters.
    pub positions: Vec<[f64; 2]>,
    /// 0 for isolated persons, `1 + index` for cluster members.
    pub cluster: Vec<usize>,
    /// Labels by construction.
    pub labels: Vec<ComplianceLabel>,
}

impl Scene {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Heads as plane annotations with `person_id` = index.
    pub fn plane_annotations(&self) -> Vec<HeadAnnotation> {
        self.positions
            .iter()
            .enumerate()
            .map(|(i, p)| HeadAnnotation::plane(self.frame_id, p[0], p[1]).with_person(i as u64))
            .collect()
    }

    pub fn count(&self, label: ComplianceLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }
}

/// Generates one scene for `frame_id` under distance threshold `d_t`.
pub fn generate_scene(cfg: &SceneConfig, d_t: f64, frame_id: u64) -> Result<Scene, SimError> {
    cfg.validate()?;
    if !(d_t > 0.0 && d_t.is_finite()) {
        return Err(SimError::InvalidConfig(format!("d_t must be positive, got {d_t}")));
    }
    let mut rng = SceneRng::new(cfg.seed, 0);
    let mut positions: Vec<[f64; 2]> = Vec::with_capacity(cfg.total_persons());
    let mut cluster = Vec::with_capacity(cfg.total_persons());
    let reach = CHAIN_FRACTION * d_t;

    for (ci, spec) in cfg.clusters.iter().enumerate() {
        let start = positions.len();
        for k in 0..spec.n {
            let mut placed = false;
            for _ in 0..cfg.max_attempts {
                let cand = [
                    spec.center[0] + spec.spread * rng.normal(),
                    spec.center[1] + spec.spread * rng.normal(),
                ];
                if !cfg.contains(cand) {
                    continue;
                }
                if positions.iter().any(|&p| distance(p, cand) < cfg.min_separation) {
                    continue;
                }
                if k > 0 && !positions[start..].iter().any(|&p| distance(p, cand) <= reach) {
                    continue;
                }
                positions.push(cand);
                cluster.push(ci + 1);
                placed = true;
                break;
            }
            if !placed {
                return Err(SimError::Infeasible {
                    what: format!("member {k} of cluster {ci}"),
                    attempts: cfg.max_attempts,
                });
            }
        }
    }

    let iso_start = positions.len();
    let clearance = d_t + ISOLATION_MARGIN;
    for k in 0..cfg.n_isolated {
        let mut placed = false;
        for _ in 0..cfg.max_attempts {
            let cand = [
                rng.uniform_in(0.0, cfg.area[0]),
                rng.uniform_in(0.0, cfg.area[1]),
            ];
            if positions.iter().any(|&p| distance(p, cand) <= clearance) {
                continue;
            }
            if positions[iso_start..]
                .iter()
                .any(|&p| distance(p, cand) <= cfg.min_isolated_spacing)
            {
                continue;
            }
            positions.push(cand);
            cluster.push(0);
            placed = true;
            break;
        }
        if !placed {
            return Err(SimError::Infeasible {
                what: format!("isolated person {k}"),
                attempts: cfg.max_attempts,
            });
        }
    }

    let labels = cluster
        .iter()
        .map(|&c| if c == 0 { ComplianceLabel::Sdc } else { ComplianceLabel::Nsdc })
        .collect();
    Ok(Scene {
        frame_id,
        seed: cfg.seed,
        dropout: cfg.dropout,
        positions,
        cluster,
        labels,
    })
}

/// Image annotations of the scene as seen by one camera.
///
/// Heads behind the camera or outside the image are dropped, then each
/// remaining head is dropped with the scene's dropout probability. One
/// dropout draw is consumed per head regardless, so visibility of one head
/// never shifts the draws of the next.
pub fn render_annotations(
    scene: &Scene,
    cam: &CameraModel,
    plane: &HeadPlane,
) -> Result<Vec<HeadAnnotation>, SimError> {
    let hom = plane_homography(cam, plane)?;
    let mut rng = SceneRng::new(scene.seed, 1 + u64::from(cam.id));
    let mut out = Vec::new();
    for (i, p) in scene.positions.iter().enumerate() {
        let drop = rng.uniform() < scene.dropout;
        let v = hom.project_homogeneous(*p);
        if v.z <= 0.0 {
            continue;
        }
        let px = [v.x / v.z, v.y / v.z];
        if !cam.contains_pixel(px) || drop {
            continue;
        }
        out.push(HeadAnnotation::image(scene.frame_id, cam.id, px[0], px[1]).with_person(i as u64));
    }
    Ok(out)
}

/// Placement of an automatically fitted camera ring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RigConfig {
    pub count: usize,
    pub image_width: usize,
    pub image_height: usize,
    /// Camera height above the ground, meters.
    pub height: f64,
    /// Horizontal distance from the area center, meters.
    pub distance: f64,
    /// Extra border around the area that must stay in view, meters.
    pub view_margin: f64,
}

impl Default for RigConfig {
    fn default() -> Self {
        Self {
            count: 3,
            image_width: 640,
            image_height: 480,
            height: 12.0,
            distance: 22.0,
            view_margin: 1.0,
        }
    }
}

/// Cameras evenly spaced on a circle around the area, each aimed at the area
/// center on the ground, with a focal length chosen so the whole area (plus
/// margin) at head height fits in the image.
pub fn camera_rig(rig: &RigConfig, area: [f64; 2], head_height: f64) -> Result<Vec<CameraModel>, SimError> {
    if rig.count == 0 || rig.image_width == 0 || rig.image_height == 0 {
        return Err(SimError::InvalidConfig("rig needs cameras and a non-empty image".into()));
    }
    if !(rig.height > head_height) {
        return Err(SimError::InvalidConfig("cameras must sit above the head plane".into()));
    }
    let center = Vector3::new(area[0] / 2.0, area[1] / 2.0, 0.0);
    let m = rig.view_margin;
    let corners = [
        [-m, -m],
        [area[0] + m, -m],
        [area[0] + m, area[1] + m],
        [-m, area[1] + m],
    ];
    (0..rig.count)
        .map(|i| {
            let theta = std::f64::consts::FRAC_PI_6 + std::f64::consts::TAU * i as f64 / rig.count as f64;
            let eye = center + Vector3::new(rig.distance * theta.cos(), rig.distance * theta.sin(), rig.height);
            let ext = CameraExtrinsics::look_at(eye, center)?;
            let (mut max_x, mut max_y) = (0.0f64, 0.0f64);
            for c in corners {
                let pc = ext.rotation * Vector3::new(c[0], c[1], head_height) + ext.translation;
                if pc.z <= 0.0 {
                    return Err(SimError::InvalidConfig(format!(
                        "area corner {c:?} is behind camera {i}"
                    )));
                }
                max_x = max_x.max((pc.x / pc.z).abs());
                max_y = max_y.max((pc.y / pc.z).abs());
            }
            let (w, h) = (rig.image_width as f64, rig.image_height as f64);
            let f = (0.475 * w / max_x).min(0.475 * h / max_y);
            let k = CameraIntrinsics::new(f, f, w / 2.0, h / 2.0)?;
            Ok(CameraModel::new(i as CameraId, k, ext, rig.image_width, rig.image_height)?)
        })
        .collect()
}

/// Head-plane grid covering the area plus `margin` on every side.
pub fn plane_grid_for(area: [f64; 2], cell_size: f64, margin: f64) -> GridSpec {
    let cells = |extent: f64| ((extent + 2.0 * margin) / cell_size).ceil() as usize;
    GridSpec::new(-margin, -margin, cell_size, cells(area[0]), cells(area[1]))
}
