//! File-level commands behind the `vsd` binary.
//!
//! Each command reads its inputs, processes frames in parallel on a pool
//! sized by `VSD_THREADS`, and writes outputs in frame order. Every output
//! file is written to a temporary sibling and renamed into place.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::annotations::{classify_compliance, merge_views, project_annotations, HeadAnnotation};
use crate::config::PipelineConfig;
use crate::density::{densify, DensityKind, DensityMap, GaussianKernelSpec};
use crate::error::{Context, Error, Result};
use crate::formats::{
    parse_annotations, parse_calibration, parse_density, parse_pgm, region_records, write_annotations,
    write_calibration, write_compliance, write_density, write_eval_report, write_pgm, write_region_report,
    write_truth, CameraRecord, ComplianceRow, ParseError, PgmImage, PlaneRecord, TruthFrame, TruthPerson,
    TruthSidecar, VSDM_MAGIC,
};
use crate::geometry::{plane_homography, plane_to_image, CameraModel, HeadPlane, PlaneHomography};
use crate::grid::{GridSpec, Space};
use crate::maskgen::{apply_schedule, binarize, project_mask, segment_plane, BinaryMask};
use crate::metrics::{aggregate, evaluate_frame, EvalReport, FrameInput};
use crate::postprocess::{extract_regions, overlay, regions_mask, threshold_soft_mask};
use crate::simulate::{camera_rig, frame_seed, generate_scene, plane_grid_for, render_annotations};

pub const THREADS_ENV: &str = "VSD_THREADS";

/// Thread pool capped by `VSD_THREADS` when set; rayon's default otherwise.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => builder = builder.num_threads(n),
            _ => {
                return Err(Error::parse(
                    THREADS_ENV,
                    ParseError::new(format!("expected a positive integer, got {v:?}")),
                ))
            }
        }
    }
    builder
        .build()
        .map_err(|e| Error::constraint("thread pool", e))
}

/// Maps `f` over `items` on `pool`, keeping input order. On failure the
/// error of the earliest failing item is returned.
fn par_map<T: Sync, U: Send>(
    pool: &rayon::ThreadPool,
    items: &[T],
    f: impl Fn(&T) -> Result<U> + Sync + Send,
) -> Result<Vec<U>> {
    let results: Vec<Result<U>> = pool.install(|| items.par_iter().map(&f).collect());
    results.into_iter().collect()
}

/// Writes `bytes` to a temporary file next to `path`, then renames it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn load_annotations(path: &Path) -> Result<Vec<HeadAnnotation>> {
    parse_annotations(&read_text(path)?).map_err(|e| Error::parse(path, e))
}

pub fn load_density(path: &Path) -> Result<DensityMap> {
    parse_density(&read_bytes(path)?).map_err(|e| Error::parse(path, e))
}

pub fn load_pgm(path: &Path) -> Result<PgmImage> {
    parse_pgm(&read_bytes(path)?).map_err(|e| Error::parse(path, e))
}

/// Cameras of a calibration file, sorted by id.
pub fn load_cameras(path: &Path) -> Result<Vec<CameraModel>> {
    let records = parse_calibration(&read_text(path)?).map_err(|e| Error::parse(path, e))?;
    let mut cams = records
        .iter()
        .map(|r| r.to_camera().context(format!("{}: camera {}", path.display(), r.id)))
        .collect::<Result<Vec<_>>>()?;
    cams.sort_by_key(|c| c.id);
    Ok(cams)
}

/// The calibration named on the command line, else the config's, else none.
fn cameras_for(cfg: &PipelineConfig, calibration: Option<&Path>) -> Result<Vec<CameraModel>> {
    match calibration.or(cfg.calibration.as_deref()) {
        Some(p) => load_cameras(p),
        None => Ok(Vec::new()),
    }
}

fn homographies(cams: &[CameraModel], plane: &HeadPlane) -> Result<Vec<(CameraModel, PlaneHomography)>> {
    cams.iter()
        .map(|c| {
            let h = plane_homography(c, plane).context(format!("camera {}", c.id))?;
            Ok((*c, h))
        })
        .collect()
}

/// Annotations grouped by frame in ascending frame order; an empty input
/// yields frame 0 with no annotations.
fn group_frames(heads: Vec<HeadAnnotation>) -> Vec<(u64, Vec<HeadAnnotation>)> {
    let mut frames: BTreeMap<u64, Vec<HeadAnnotation>> = BTreeMap::new();
    for h in heads {
        frames.entry(h.frame_id).or_default().push(h);
    }
    if frames.is_empty() {
        frames.insert(0, Vec::new());
    }
    frames.into_iter().collect()
}

fn check_cameras(heads: &[HeadAnnotation], cams: &[(CameraModel, PlaneHomography)], file: &Path) -> Result<()> {
    for (i, h) in heads.iter().enumerate() {
        if let Space::Image(id) = h.space {
            if !cams.iter().any(|(c, _)| c.id == id) {
                return Err(Error::constraint(
                    file.display().to_string(),
                    format!("record {} refers to camera {id}, which is not calibrated", i + 1),
                ));
            }
        }
    }
    Ok(())
}

pub fn frame_dir(frame_id: u64) -> String {
    format!("frame_{frame_id:06}")
}

type Artifact = (PathBuf, Vec<u8>);

fn write_artifacts(out_dir: &Path, artifacts: &[Artifact]) -> Result<()> {
    for (rel, bytes) in artifacts {
        write_atomic(&out_dir.join(rel), bytes)?;
    }
    Ok(())
}

fn mask_bytes(mask: &BinaryMask) -> Vec<u8> {
    write_pgm(&PgmImage::from_mask(mask))
}

/// Heads on the plane as seen by a camera: projected, in front of it and
/// inside its image.
fn visible_in(heads: &[HeadAnnotation], cam: &CameraModel, hom: &PlaneHomography) -> Vec<HeadAnnotation> {
    heads
        .iter()
        .filter(|h| hom.is_in_front(h.position))
        .filter_map(|h| {
            let p = plane_to_image(h.position, hom).ok()?;
            cam.contains_pixel(p).then_some(HeadAnnotation {
                position: p,
                space: Space::Image(cam.id),
                ..*h
            })
        })
        .collect()
}

/// Merges all views of one frame onto the head plane. Plane annotations
/// form their own view; each camera's image annotations are projected.
pub fn fuse_frame(
    heads: &[HeadAnnotation],
    cams: &[(CameraModel, PlaneHomography)],
    merge_radius: f64,
) -> Result<Vec<HeadAnnotation>> {
    let mut views: Vec<Vec<HeadAnnotation>> = Vec::new();
    let plane: Vec<HeadAnnotation> = heads.iter().copied().filter(|h| h.space.is_plane()).collect();
    if !plane.is_empty() {
        views.push(plane);
    }
    for (cam, hom) in cams {
        let own: Vec<HeadAnnotation> = heads
            .iter()
            .copied()
            .filter(|h| h.space == Space::Image(cam.id))
            .collect();
        if !own.is_empty() {
            views.push(project_annotations(&own, hom).context(format!("camera {}", cam.id))?);
        }
    }
    merge_views(&views, merge_radius).context("merge")
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenGtSummary {
    pub frames: Vec<u64>,
    /// Per frame: (NSDC count, SDC count).
    pub counts: Vec<(usize, usize)>,
}

struct GtFrame {
    rows: Vec<ComplianceRow>,
    artifacts: Vec<Artifact>,
    index: Vec<String>,
    counts: (usize, usize),
}

/// Ground truth for every frame of an annotation file: compliance listing,
/// `D_n`/`D_c` rasters and segmentation masks on the head plane and in each
/// calibrated camera.
pub fn cmd_gen_gt(
    cfg: &PipelineConfig,
    annotations: &Path,
    calibration: Option<&Path>,
    out_dir: &Path,
) -> Result<GenGtSummary> {
    let heads = load_annotations(annotations)?;
    let plane = cfg.head_plane()?;
    let cams = homographies(&cameras_for(cfg, calibration)?, &plane)?;
    check_cameras(&heads, &cams, annotations)?;
    let frames = group_frames(heads);
    let pool = thread_pool()?;

    let results = par_map(&pool, &frames, |(frame_id, heads)| gt_frame(cfg, &plane, &cams, *frame_id, heads))?;

    let mut rows = Vec::new();
    let mut index = String::from("frame_id,space,d_n,d_c,gt_mask\n");
    let mut counts = Vec::with_capacity(results.len());
    for r in &results {
        write_artifacts(out_dir, &r.artifacts)?;
        rows.extend(r.rows.iter().cloned());
        for line in &r.index {
            index.push_str(line);
            index.push('\n');
        }
        counts.push(r.counts);
    }
    write_atomic(&out_dir.join("compliance.csv"), write_compliance(&rows).as_bytes())?;
    write_atomic(&out_dir.join("frames.csv"), index.as_bytes())?;
    Ok(GenGtSummary {
        frames: frames.iter().map(|(f, _)| *f).collect(),
        counts,
    })
}

fn gt_frame(
    cfg: &PipelineConfig,
    plane: &HeadPlane,
    cams: &[(CameraModel, PlaneHomography)],
    frame_id: u64,
    heads: &[HeadAnnotation],
) -> Result<GtFrame> {
    let ctx = format!("frame {frame_id}");
    let merged = fuse_frame(heads, cams, cfg.merge_radius)?;
    let part = classify_compliance(&merged, cfg.d_t).context(ctx.clone())?;

    let dir = PathBuf::from(frame_dir(frame_id));
    let mut artifacts = Vec::new();
    let mut index = Vec::new();
    let raster = |heads: &[HeadAnnotation], k: &GaussianKernelSpec, space, spec: &GridSpec, kind| {
        densify(heads, k, space, spec, kind).context(ctx.clone())
    };

    let d_n = raster(&part.nsdc, &cfg.plane_kernel, Space::Plane, &plane.grid, DensityKind::Nsdc)?;
    let d_c = raster(&part.sdc, &cfg.plane_kernel, Space::Plane, &plane.grid, DensityKind::Sdc)?;
    let mask = segment_plane(&d_n, &cfg.morph).context(ctx.clone())?;
    artifacts.push((dir.join("plane_nsdc.vsdm"), write_density(&d_n)));
    artifacts.push((dir.join("plane_sdc.vsdm"), write_density(&d_c)));
    artifacts.push((dir.join("plane_mask.pgm"), mask_bytes(&mask)));
    let d = dir.display();
    index.push(format!("{frame_id},plane,{d}/plane_nsdc.vsdm,{d}/plane_sdc.vsdm,{d}/plane_mask.pgm"));

    for (cam, hom) in cams {
        let grid = cam.image_grid();
        let space = Space::Image(cam.id);
        let n_img = raster(&visible_in(&part.nsdc, cam, hom), &cfg.image_kernel, space, &grid, DensityKind::Nsdc)?;
        let c_img = raster(&visible_in(&part.sdc, cam, hom), &cfg.image_kernel, space, &grid, DensityKind::Sdc)?;
        let m_img = project_mask(&mask, hom, &grid).context(ctx.clone())?;
        let c = cam.id;
        artifacts.push((dir.join(format!("cam{c}_nsdc.vsdm")), write_density(&n_img)));
        artifacts.push((dir.join(format!("cam{c}_sdc.vsdm")), write_density(&c_img)));
        artifacts.push((dir.join(format!("cam{c}_mask.pgm")), mask_bytes(&m_img)));
        index.push(format!(
            "{frame_id},{space},{d}/cam{c}_nsdc.vsdm,{d}/cam{c}_sdc.vsdm,{d}/cam{c}_mask.pgm"
        ));
    }

    let rows = merged
        .iter()
        .enumerate()
        .map(|(i, h)| ComplianceRow {
            frame_id,
            person: i,
            person_id: h.person_id,
            position: h.position,
            d_i: part.distances[i],
            label: part.labels[i],
        })
        .collect();
    Ok(GtFrame {
        rows,
        artifacts,
        index,
        counts: (part.nsdc.len(), part.sdc.len()),
    })
}

/// Density maps of all annotations, per frame and per space present in the
/// file, without any compliance split.
pub fn cmd_densify(
    cfg: &PipelineConfig,
    annotations: &Path,
    calibration: Option<&Path>,
    out_dir: &Path,
) -> Result<()> {
    let heads = load_annotations(annotations)?;
    let plane = cfg.head_plane()?;
    let cams = homographies(&cameras_for(cfg, calibration)?, &plane)?;
    check_cameras(&heads, &cams, annotations)?;
    let frames = group_frames(heads);
    let pool = thread_pool()?;

    let results = par_map(&pool, &frames, |(frame_id, heads)| {
        let ctx = format!("frame {frame_id}");
        let dir = PathBuf::from(frame_dir(*frame_id));
        let mut out: Vec<Artifact> = Vec::new();
        let on_plane: Vec<HeadAnnotation> = heads.iter().copied().filter(|h| h.space.is_plane()).collect();
        if !on_plane.is_empty() || heads.is_empty() {
            let m = densify(&on_plane, &cfg.plane_kernel, Space::Plane, &plane.grid, DensityKind::Total)
                .context(ctx.clone())?;
            out.push((dir.join("plane_total.vsdm"), write_density(&m)));
        }
        for (cam, _) in &cams {
            let space = Space::Image(cam.id);
            let own: Vec<HeadAnnotation> = heads.iter().copied().filter(|h| h.space == space).collect();
            if own.is_empty() {
                continue;
            }
            let m = densify(&own, &cfg.image_kernel, space, &cam.image_grid(), DensityKind::Total)
                .context(ctx.clone())?;
            out.push((dir.join(format!("cam{}_total.vsdm", cam.id)), write_density(&m)));
        }
        Ok(out)
    })?;
    for r in &results {
        write_artifacts(out_dir, r)?;
    }
    Ok(())
}

/// Segmentation ground truth from a `D_n` raster. A head-plane raster gives
/// `plane_mask.pgm` plus one projected mask per calibrated camera; an image
/// raster is segmented in place.
pub fn cmd_seg_gt(
    cfg: &PipelineConfig,
    d_n_path: &Path,
    calibration: Option<&Path>,
    out_dir: &Path,
) -> Result<()> {
    let d_n = load_density(d_n_path)?;
    let ctx = d_n_path.display().to_string();
    match d_n.space {
        Space::Plane => {
            let plane = HeadPlane::new(cfg.plane.h_h, d_n.spec).context(ctx.clone())?;
            let cams = homographies(&cameras_for(cfg, calibration)?, &plane)?;
            let mask = segment_plane(&d_n, &cfg.morph).context(ctx.clone())?;
            write_atomic(&out_dir.join("plane_mask.pgm"), &mask_bytes(&mask))?;
            for (cam, hom) in &cams {
                let m = project_mask(&mask, hom, &cam.image_grid()).context(ctx.clone())?;
                write_atomic(&out_dir.join(format!("cam{}_mask.pgm", cam.id)), &mask_bytes(&m))?;
            }
        }
        Space::Image(id) => {
            let bin = binarize(&crate::density::normalize(&d_n), cfg.morph.threshold).context(ctx.clone())?;
            let mask = apply_schedule(&bin, &cfg.morph).context(ctx)?;
            write_atomic(&out_dir.join(format!("cam{id}_mask.pgm")), &mask_bytes(&mask))?;
        }
    }
    Ok(())
}

/// What postprocessing produced.
#[derive(Debug, Clone, PartialEq)]
pub enum PostprocessOutput {
    /// Density input: `regions.json` and `overlay.pgm`.
    Regions(usize),
    /// Soft-mask input: `mask.pgm`.
    Mask,
}

/// Post-processes a predicted density raster into risk regions, or a soft
/// segmentation PGM into a binary mask.
pub fn cmd_postprocess(
    cfg: &PipelineConfig,
    input: &Path,
    frame_id: u64,
    out_dir: &Path,
) -> Result<PostprocessOutput> {
    let bytes = read_bytes(input)?;
    let ctx = input.display().to_string();
    if bytes.starts_with(b"P5") {
        let img = parse_pgm(&bytes).map_err(|e| Error::parse(input, e))?;
        let (w, h) = img.pixels.dims();
        let soft = img.pixels.map(|v| f64::from(v) / 255.0);
        let space = img.space.unwrap_or(Space::Plane);
        let mask = threshold_soft_mask(&soft, cfg.postprocess.soft_mask_threshold, space, GridSpec::image(w, h))
            .context(ctx)?;
        write_atomic(&out_dir.join("mask.pgm"), &mask_bytes(&mask))?;
        return Ok(PostprocessOutput::Mask);
    }
    let pred = parse_density(&bytes).map_err(|e| Error::parse(input, e))?;
    let regions = extract_regions(&pred, &cfg.postprocess).context(ctx)?;
    let (w, h) = pred.dims();
    let overlay_img = PgmImage {
        pixels: overlay(&regions, w, h),
        space: Some(pred.space),
    };
    write_atomic(
        &out_dir.join("regions.json"),
        write_region_report(&region_records(frame_id, &regions)).as_bytes(),
    )?;
    write_atomic(&out_dir.join("overlay.pgm"), &write_pgm(&overlay_img))?;
    Ok(PostprocessOutput::Regions(regions.len()))
}

/// One frame to evaluate: file paths of the prediction (PGM mask or VSDM
/// density), `D_n`, `D_c` and an optional ground-truth mask.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalEntry {
    pub frame_id: u64,
    pub pred: PathBuf,
    pub d_n: PathBuf,
    pub d_c: PathBuf,
    pub gt_mask: Option<PathBuf>,
}

pub const MANIFEST_HEADER: &str = "frame_id,pred,d_n,d_c,gt_mask";

/// Reads an evaluation manifest. Relative paths resolve against the
/// manifest's directory.
pub fn load_manifest(path: &Path) -> Result<Vec<EvalEntry>> {
    let text = read_text(path)?;
    let base = path.parent().unwrap_or(Path::new(""));
    parse_manifest(&text, base).map_err(|e| Error::parse(path, e))
}

pub fn parse_manifest(text: &str, base: &Path) -> std::result::Result<Vec<EvalEntry>, ParseError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| ParseError::at(1, e.to_string()))?;
    if headers.iter().collect::<Vec<_>>() != MANIFEST_HEADER.split(',').collect::<Vec<_>>() {
        return Err(ParseError::at(1, format!("expected header {MANIFEST_HEADER:?}")));
    }
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| ParseError::at(e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let path = |i: usize| -> std::result::Result<PathBuf, ParseError> {
            match &rec[i] {
                "" => Err(ParseError::at(line, format!("empty {} path", MANIFEST_HEADER.split(',').nth(i).unwrap()))),
                p => Ok(base.join(p)),
            }
        };
        out.push(EvalEntry {
            frame_id: rec[0]
                .parse()
                .map_err(|_| ParseError::at(line, format!("invalid frame_id {:?}", &rec[0])))?,
            pred: path(1)?,
            d_n: path(2)?,
            d_c: path(3)?,
            gt_mask: if rec[4].is_empty() { None } else { Some(base.join(&rec[4])) },
        });
    }
    if out.is_empty() {
        return Err(ParseError::new("manifest lists no frames"));
    }
    Ok(out)
}

fn mask_for(img: &PgmImage, like: &DensityMap, file: &Path) -> Result<BinaryMask> {
    let space = img.space.unwrap_or(like.space);
    if img.pixels.dims() != like.dims() {
        return Err(Error::constraint(
            file.display().to_string(),
            format!("mask is {:?}, density grid is {:?}", img.pixels.dims(), like.dims()),
        ));
    }
    if space != like.space {
        return Err(Error::constraint(
            file.display().to_string(),
            format!("mask is in {space} space, density is in {} space", like.space),
        ));
    }
    Ok(BinaryMask {
        grid: img.to_mask_grid(),
        space,
        spec: like.spec,
    })
}

fn load_frame(cfg: &PipelineConfig, e: &EvalEntry) -> Result<FrameInput> {
    let d_n = load_density(&e.d_n)?;
    let d_c = load_density(&e.d_c)?;
    let bytes = read_bytes(&e.pred)?;
    let (pred, pred_count) = if bytes.starts_with(VSDM_MAGIC) {
        let map = parse_density(&bytes).map_err(|err| Error::parse(&e.pred, err))?;
        let regions = extract_regions(&map, &cfg.postprocess).context(e.pred.display().to_string())?;
        (regions_mask(&regions, map.space, map.spec), Some(map.mass()))
    } else {
        let img = parse_pgm(&bytes).map_err(|err| Error::parse(&e.pred, err))?;
        (mask_for(&img, &d_n, &e.pred)?, None)
    };
    let gt_mask = match &e.gt_mask {
        Some(p) => Some(mask_for(&load_pgm(p)?, &d_n, p)?),
        None => None,
    };
    Ok(FrameInput {
        frame_id: e.frame_id,
        pred,
        d_n,
        d_c,
        gt_mask,
        gt_count: None,
        pred_count,
    })
}

/// Evaluates the listed frames and writes `report.json` and `report.txt`.
pub fn cmd_evaluate(cfg: &PipelineConfig, entries: &[EvalEntry], out_dir: &Path) -> Result<EvalReport> {
    let pool = thread_pool()?;
    let results = par_map(&pool, entries, |e| {
        let frame = load_frame(cfg, e)?;
        evaluate_frame(&frame).context(format!("frame {}", e.frame_id))
    })?;
    let report = aggregate(results).context("evaluate")?;
    write_atomic(&out_dir.join("report.json"), write_eval_report(&report).as_bytes())?;
    write_atomic(&out_dir.join("report.txt"), report.to_table("prediction").as_bytes())?;
    Ok(report)
}

/// Generates the configured scenes and writes `annotations.csv`,
/// `calibration.json`, `truth.json` and a `config.json` that points the
/// rest of the pipeline at them.
pub fn cmd_simulate(cfg: &PipelineConfig, out_dir: &Path) -> Result<TruthSidecar> {
    let s = &cfg.scene;
    let cams = camera_rig(&s.cameras, s.area, cfg.plane.h_h).context("camera rig")?;
    let grid = plane_grid_for(s.area, s.plane_cell, s.plane_margin);
    let plane = HeadPlane::new(cfg.plane.h_h, grid).context("simulated plane")?;
    let frame_ids: Vec<u64> = (0..s.frames).collect();
    let pool = thread_pool()?;

    let frames = par_map(&pool, &frame_ids, |&f| {
        let mut scene_cfg = s.scene_config();
        scene_cfg.seed = frame_seed(s.seed, f);
        let scene = generate_scene(&scene_cfg, cfg.d_t, f).context(format!("frame {f}"))?;
        let mut heads = Vec::new();
        for cam in &cams {
            heads.extend(render_annotations(&scene, cam, &plane).context(format!("frame {f}"))?);
        }
        let truth = TruthFrame {
            frame_id: f,
            seed: scene.seed,
            n_sdc: scene.count(crate::annotations::ComplianceLabel::Sdc),
            n_nsdc: scene.count(crate::annotations::ComplianceLabel::Nsdc),
            persons: scene
                .positions
                .iter()
                .enumerate()
                .map(|(i, p)| TruthPerson {
                    person_id: i as u64,
                    x: p[0],
                    y: p[1],
                    cluster: scene.cluster[i],
                    label: scene.labels[i].as_str().to_string(),
                })
                .collect(),
        };
        Ok((heads, truth))
    })?;

    let mut heads = Vec::new();
    let mut truth = TruthSidecar {
        seed: s.seed,
        d_t: cfg.d_t,
        frames: Vec::with_capacity(frames.len()),
    };
    for (h, t) in frames {
        heads.extend(h);
        truth.frames.push(t);
    }
    let records: Vec<CameraRecord> = cams.iter().map(CameraRecord::from_camera).collect();
    let mut out_cfg = cfg.clone();
    out_cfg.plane = PlaneRecord::from_plane(&plane);
    out_cfg.calibration = Some(PathBuf::from("calibration.json"));

    write_atomic(&out_dir.join("annotations.csv"), write_annotations(&heads).as_bytes())?;
    write_atomic(&out_dir.join("calibration.json"), write_calibration(&records).as_bytes())?;
    write_atomic(&out_dir.join("truth.json"), write_truth(&truth).as_bytes())?;
    write_atomic(&out_dir.join("config.json"), out_cfg.to_file().to_json().as_bytes())?;
    Ok(truth)
}
