//! Acceptance suite. Runs every criterion, prints one line each with its
//! wall time and budget, and exits non-zero if any criterion fails or runs
//! over budget.

#![allow(clippy::needless_range_loop)]

mod common;

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use nalgebra::Vector3;
use vsd::annotations::{classify_compliance, ComplianceLabel, HeadAnnotation};
use vsd::config::{ConfigFile, Overrides, PipelineConfig, Preset};
use vsd::density::{densify, presets, DensityKind, DensityMap};
use vsd::formats::*;
use vsd::geometry::{
    image_to_plane, plane_homography, plane_to_image, CameraExtrinsics, CameraIntrinsics, CameraModel, HeadPlane,
};
use vsd::grid::{Grid, GridSpec, Space};
use vsd::maskgen::{close, dilate, erode, BinaryMask};
use vsd::metrics::{density_confusion, derive_scores, mae_mse, ConfusionSums};
use vsd::pipeline::{
    cmd_densify, cmd_evaluate, cmd_gen_gt, cmd_postprocess, cmd_seg_gt, cmd_simulate, frame_dir, load_density,
    EvalEntry, THREADS_ENV,
};
use vsd::postprocess::{extract_regions, PostprocessConfig};

type Outcome = Result<String, String>;
type Criterion<'a> = (u32, &'a str, u64, Box<dyn Fn() -> Outcome + 'a>);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close_to(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn criterion_1() -> Outcome {
    let mut rng = TestRng::new(0xC1);
    let mut persons = 0;
    for scene in 0..1000 {
        let n = rng.below(51);
        let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.range(0.0, 20.0), rng.range(0.0, 20.0)]).collect();
        let heads: Vec<_> = pts.iter().map(|p| HeadAnnotation::plane(0, p[0], p[1])).collect();
        let part = classify_compliance(&heads, 2.0).map_err(|e| e.to_string())?;
        let (d, nsdc) = brute_force_compliance(&pts, 2.0);
        check(part.distances == d, || format!("scene {scene}: distances differ"))?;
        for i in 0..n {
            check((part.labels[i] == ComplianceLabel::Nsdc) == nsdc[i], || {
                format!("scene {scene}: person {i} labeled {:?}", part.labels[i])
            })?;
        }
        persons += n;
    }
    Ok(format!("1000 scenes, {persons} persons, all labels and distances exact"))
}

fn criterion_2() -> Outcome {
    let mut rng = TestRng::new(0xC2);
    let mut worst: f64 = 0.0;
    for set in 0..100 {
        let n = rng.below(60);
        for (name, kernel) in presets::ALL {
            let (spec, space) = if name.ends_with("plane") {
                (GridSpec::new(0.0, 0.0, 0.1, 200, 200), Space::Plane)
            } else {
                (GridSpec::image(640, 480), Space::Image(0))
            };
            let (w, h) = (spec.width as f64 * spec.cell_size, spec.height as f64 * spec.cell_size);
            let heads: Vec<_> = (0..n)
                .map(|i| {
                    // a third of the heads hug a border so kernels get clipped
                    let (x, y) = match i % 3 {
                        0 => (rng.range(0.0, 0.3) * w, rng.range(0.0, 1.0) * h),
                        1 => (rng.range(0.0, 1.0) * w, (1.0 - rng.range(0.0, 0.01)) * h),
                        _ => (rng.range(0.0, 1.0) * w, rng.range(0.0, 1.0) * h),
                    };
                    let (x, y) = (x.min(w - 1e-6), y.min(h - 1e-6));
                    match space {
                        Space::Plane => HeadAnnotation::plane(0, x, y),
                        Space::Image(c) => HeadAnnotation::image(0, c, x, y),
                    }
                })
                .collect();
            let map = densify(&heads, &kernel, space, &spec, DensityKind::Nsdc).map_err(|e| e.to_string())?;
            let nf = n as f64;
            let err = (map.mass() - nf).abs();
            worst = worst.max(err / nf.max(1.0));
            check(err <= 1e-9 * nf.max(1.0), || format!("set {set} {name}: mass {} for {n}", map.mass()))?;
        }
    }
    Ok(format!("400 maps, worst relative error {worst:.1e}"))
}

fn random_camera(rng: &mut TestRng, id: u32) -> Result<CameraModel, String> {
    let eye = Vector3::new(rng.range(-15.0, 35.0), rng.range(-15.0, 35.0), rng.range(4.0, 20.0));
    let target = Vector3::new(rng.range(5.0, 15.0), rng.range(5.0, 15.0), 0.0);
    let ext = CameraExtrinsics::look_at(eye, target).map_err(|e| e.to_string())?;
    let f = rng.range(300.0, 1200.0);
    let skew = rng.range(-1.0, 1.0);
    let k = CameraIntrinsics::with_skew(f, f * rng.range(0.9, 1.1), rng.range(280.0, 360.0), rng.range(200.0, 280.0), skew)
        .map_err(|e| e.to_string())?;
    CameraModel::new(id, k, ext, 640, 480).map_err(|e| e.to_string())
}

fn criterion_3() -> Outcome {
    let mut rng = TestRng::new(0xC3);
    let plane = HeadPlane::new(1.75, GridSpec::new(0.0, 0.0, 0.1, 200, 200)).map_err(|e| e.to_string())?;
    let (mut worst_rt, mut worst_oracle) = (0.0f64, 0.0f64);
    for i in 0..100 {
        let cam = random_camera(&mut rng, i)?;
        let hom = plane_homography(&cam, &plane).map_err(|e| e.to_string())?;
        let mut accepted = 0;
        while accepted < 1000 {
            // pixels of this camera that see the head-plane grid in front of it
            let px = [rng.range(0.0, 640.0), rng.range(0.0, 480.0)];
            let q = image_to_plane(px, &hom).map_err(|e| e.to_string())?;
            if hom.project_homogeneous(q).z <= 0.0 || plane.grid.cell_of(q).is_none() {
                continue;
            }
            accepted += 1;
            let px2 = plane_to_image(q, &hom).map_err(|e| e.to_string())?;
            let oracle = backproject_oracle(&cam, px, 1.75).ok_or("singular oracle system")?;
            let rt = (px2[0] - px[0]).hypot(px2[1] - px[1]);
            let dev = (q[0] - oracle[0]).abs().max((q[1] - oracle[1]).abs());
            worst_rt = worst_rt.max(rt);
            worst_oracle = worst_oracle.max(dev);
            check(rt < 1e-9, || format!("camera {i}: round trip {rt:e} px at {q:?}"))?;
            check(dev < 1e-9, || format!("camera {i}: oracle discrepancy {dev:e} at {q:?}"))?;
        }
    }
    Ok(format!("100000 in-view pixels, round trip {worst_rt:.1e} px, oracle {worst_oracle:.1e}"))
}

fn criterion_4() -> Outcome {
    let mut rng = TestRng::new(0xC4);
    for trial in 0..200 {
        let (w, h) = (rng.below(64) + 1, rng.below(64) + 1);
        let p = rng.range(0.05, 0.7);
        let g = random_mask(&mut rng, w, h, p);
        let m = BinaryMask::from_grid(g.clone(), Space::Plane, GridSpec::image(w, h)).map_err(|e| e.to_string())?;
        for side in [4, 5, 7] {
            let d = dilate_oracle(&g, side);
            check(dilate(&m, side).grid == d, || format!("mask {trial} ({w}x{h}): dilate side {side}"))?;
            check(erode(&m, side).grid == erode_oracle(&g, side), || {
                format!("mask {trial} ({w}x{h}): erode side {side}")
            })?;
            check(close(&m, side).grid == erode_oracle(&d, side), || {
                format!("mask {trial} ({w}x{h}): close side {side}")
            })?;
        }
    }
    Ok("200 masks x 3 sides x 3 operations exact".into())
}

fn plane_row(values: Vec<f64>, kind: DensityKind) -> DensityMap {
    let w = values.len();
    DensityMap::from_grid(Grid::from_vec(w, 1, values).unwrap(), Space::Plane, GridSpec::image(w, 1), kind).unwrap()
}

fn row_mask(bits: Vec<u8>) -> BinaryMask {
    let w = bits.len();
    BinaryMask::from_grid(Grid::from_vec(w, 1, bits).unwrap(), Space::Plane, GridSpec::image(w, 1)).unwrap()
}

fn criterion_5() -> Outcome {
    let mut rng = TestRng::new(0xC5);
    for t in 0..100 {
        let w = rng.below(300) + 1;
        let d_n = plane_row((0..w).map(|_| rng.range(0.0, 2.0)).collect(), DensityKind::Nsdc);
        let d_c = plane_row((0..w).map(|_| rng.range(0.0, 2.0)).collect(), DensityKind::Sdc);
        let pred = row_mask((0..w).map(|_| (rng.unit() < 0.5) as u8).collect());
        let s = density_confusion(&pred, &d_n, &d_c).map_err(|e| e.to_string())?;
        check(close_to(s.tp + s.fn_, d_n.mass(), 1e-9), || format!("triple {t}: TP+FN != mass(D_n)"))?;
        check(close_to(s.fp + s.tn, d_c.mass(), 1e-9), || format!("triple {t}: FP+TN != mass(D_c)"))?;
        let inv = density_confusion(&pred.complement(), &d_n, &d_c).map_err(|e| e.to_string())?;
        check((inv.tp, inv.fp, inv.tn, inv.fn_) == (s.fn_, s.tn, s.fp, s.tp), || {
            format!("triple {t}: complement is not symmetric")
        })?;
    }

    let d_n = plane_row(vec![2.0, 1.0], DensityKind::Nsdc);
    let d_c = plane_row(vec![0.5, 0.5], DensityKind::Sdc);
    let c = density_confusion(&row_mask(vec![1, 0]), &d_n, &d_c).map_err(|e| e.to_string())?;
    check(c == ConfusionSums { tp: 2.0, fp: 0.5, tn: 0.5, fn_: 1.0 }, || format!("hand fixture sums {c:?}"))?;
    let s = derive_scores(&c);
    for (name, got, want) in [
        ("precision", s.precision, 0.8),
        ("recall", s.recall, 2.0 / 3.0),
        ("specificity", s.specificity, 0.5),
        ("F1", s.f1, 8.0 / 11.0),
    ] {
        check(close_to(got, want, 1e-9), || format!("{name} = {got}, expected {want}"))?;
    }
    check(close_to(s.recall, 0.666667, 1e-6) && close_to(s.f1, 0.727273, 1e-6), || "rounded scores".into())?;

    let (mae, mse) = mae_mse(&[10.0, 20.0], &[12.0, 16.0]).map_err(|e| e.to_string())?;
    check(close_to(mae, 3.0, 1e-6) && close_to(mse, 3.162278, 1e-6), || format!("MAE {mae}, MSE {mse}"))?;
    Ok(format!(
        "100 triples; P {:.6} R {:.6} S {:.6} F1 {:.6}; MAE {mae} MSE {mse:.6}",
        s.precision, s.recall, s.specificity, s.f1
    ))
}

fn criterion_6(root: &Path) -> Outcome {
    let err = |e: vsd::Error| e.to_string();
    let mut base = PipelineConfig::preset(Preset::Citystreet);
    base.scene.frames = 20;
    base.scene.seed = 2026;
    base.scene.dropout = 0.0;
    base.scene.cameras.count = 3;
    let sim = root.join("sim");
    let truth = cmd_simulate(&base, &sim).map_err(err)?;
    let cfg = PipelineConfig::load(Some(&sim.join("config.json")), &Overrides::default()).map_err(err)?;
    let gt = root.join("gt");
    let summary = cmd_gen_gt(&cfg, &sim.join("annotations.csv"), None, &gt).map_err(err)?;
    check(summary.frames.len() == 20, || format!("{} frames", summary.frames.len()))?;
    for (f, &(nsdc, sdc)) in truth.frames.iter().zip(&summary.counts) {
        check((nsdc, sdc) == (f.n_nsdc, f.n_sdc), || format!("frame {}: counts {nsdc}/{sdc}", f.frame_id))?;
    }

    let entries = |swap: bool| -> Vec<EvalEntry> {
        summary
            .frames
            .iter()
            .map(|&f| {
                let d = gt.join(frame_dir(f));
                let (n, c) = (d.join("plane_nsdc.vsdm"), d.join("plane_sdc.vsdm"));
                let (d_n, d_c) = if swap { (c, n) } else { (n, c) };
                EvalEntry { frame_id: f, pred: d.join("plane_mask.pgm"), d_n, d_c, gt_mask: None }
            })
            .collect()
    };
    let straight = cmd_evaluate(&cfg, &entries(false), &root.join("eval")).map_err(err)?;
    let f1 = derive_scores(&straight.confusion).f1;
    check(f1 == 1.0, || format!("F1 {f1} with {:?}", straight.confusion))?;
    let swapped = cmd_evaluate(&cfg, &entries(true), &root.join("eval_swapped")).map_err(err)?;
    check(swapped.recall <= 0.05, || format!("swapped recall {}", swapped.recall))?;
    Ok(format!(
        "20 scenes, {} persons; F1 {f1}, swapped recall {}",
        truth.frames.iter().map(|f| f.persons.len()).sum::<usize>(),
        swapped.recall
    ))
}

fn criterion_7() -> Outcome {
    let mut g = Grid::filled(16, 8, 0.0);
    for (c, r) in [(1, 1), (2, 1), (1, 2), (2, 2)] {
        g.set(c, r, 1.0);
    }
    g.set(10, 5, 0.2);
    g.set(11, 5, 0.1);
    g.set(11, 6, 0.1);
    let map = DensityMap::from_grid(g, Space::Plane, GridSpec::image(16, 8), DensityKind::Predicted)
        .map_err(|e| e.to_string())?;
    let at = |min_count: f64| {
        let cfg = PostprocessConfig { min_count, ..PostprocessConfig::CITYSTREET };
        extract_regions(&map, &cfg).map_err(|e| e.to_string())
    };
    let small = |regions: &[vsd::postprocess::RegionMask]| regions.iter().any(|r| close_to(r.count, 0.4, 1e-12));
    let dropped = at(0.5)?;
    let kept = at(0.3)?;
    check(dropped.len() == 1 && !small(&dropped), || format!("min-count 0.5 kept {} regions", dropped.len()))?;
    check(kept.len() == 2 && small(&kept), || format!("min-count 0.3 kept {} regions", kept.len()))?;
    Ok("mass-0.4 region dropped at 0.5, kept at 0.3".into())
}

fn full_run(root: &Path) -> Result<(), String> {
    let err = |e: vsd::Error| e.to_string();
    let mut cfg = PipelineConfig::preset(Preset::Citystreet);
    cfg.scene.frames = 3;
    cfg.scene.seed = 77;
    cfg.scene.dropout = 0.1;
    let sim = root.join("sim");
    cmd_simulate(&cfg, &sim).map_err(err)?;
    let cfg = PipelineConfig::load(Some(&sim.join("config.json")), &Overrides::default()).map_err(err)?;
    let ann = sim.join("annotations.csv");
    let gt = root.join("gt");
    let summary = cmd_gen_gt(&cfg, &ann, None, &gt).map_err(err)?;
    cmd_densify(&cfg, &ann, None, &root.join("densify")).map_err(err)?;
    let mut entries = Vec::new();
    for &f in &summary.frames {
        let d = gt.join(frame_dir(f));
        cmd_seg_gt(&cfg, &d.join("plane_nsdc.vsdm"), None, &root.join("seg").join(frame_dir(f))).map_err(err)?;
        let total = root.join("densify").join(frame_dir(f)).join("cam0_total.vsdm");
        let out = root.join("post").join(frame_dir(f));
        cmd_postprocess(&cfg, &total, f, &out).map_err(err)?;
        entries.push(EvalEntry {
            frame_id: f,
            pred: out.join("overlay.pgm"),
            d_n: d.join("cam0_nsdc.vsdm"),
            d_c: d.join("cam0_sdc.vsdm"),
            gt_mask: Some(d.join("cam0_mask.pgm")),
        });
    }
    cmd_evaluate(&cfg, &entries, &root.join("eval")).map_err(err)?;
    Ok(())
}

fn criterion_8(root: &Path) -> Outcome {
    let a = root.join("run_a");
    let b = root.join("run_b");
    std::env::set_var(THREADS_ENV, "1");
    let first = full_run(&a);
    std::env::set_var(THREADS_ENV, "4");
    let second = full_run(&b);
    std::env::remove_var(THREADS_ENV);
    first?;
    second?;
    let (ta, tb) = (tree_bytes(&a), tree_bytes(&b));
    check(ta.keys().eq(tb.keys()), || "output trees list different files".into())?;
    for (path, bytes) in &ta {
        check(&tb[path] == bytes, || format!("{} differs between runs", path.display()))?;
    }

    let mut formats = 0;
    for (path, bytes) in &ta {
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let text = || String::from_utf8(bytes.clone()).map_err(|e| e.to_string());
        let rewritten: Option<Vec<u8>> = match path.extension().and_then(|e| e.to_str()) {
            Some("vsdm") => Some(write_density(&parse_density(bytes).map_err(|e| e.to_string())?)),
            Some("pgm") => Some(write_pgm(&parse_pgm(bytes).map_err(|e| e.to_string())?)),
            _ => match name.as_str() {
                "annotations.csv" => {
                    Some(write_annotations(&parse_annotations(&text()?).map_err(|e| e.to_string())?).into_bytes())
                }
                "calibration.json" => {
                    Some(write_calibration(&parse_calibration(&text()?).map_err(|e| e.to_string())?).into_bytes())
                }
                "config.json" => Some(ConfigFile::parse(&text()?).map_err(|e| e.to_string())?.to_json().into_bytes()),
                "regions.json" => {
                    let r: Vec<RegionRecord> = serde_json::from_str(&text()?).map_err(|e| e.to_string())?;
                    Some(write_region_report(&r).into_bytes())
                }
                "truth.json" => {
                    let t: TruthSidecar = serde_json::from_str(&text()?).map_err(|e| e.to_string())?;
                    Some(write_truth(&t).into_bytes())
                }
                "report.json" => {
                    let r: vsd::metrics::EvalReport = serde_json::from_str(&text()?).map_err(|e| e.to_string())?;
                    Some(write_eval_report(&r).into_bytes())
                }
                _ => None,
            },
        };
        if let Some(out) = rewritten {
            check(&out == bytes, || format!("{} does not round-trip", path.display()))?;
            formats += 1;
        }
    }
    let d = load_density(&a.join("gt").join(frame_dir(0)).join("plane_nsdc.vsdm")).map_err(|e| e.to_string())?;
    check(d.mass() > 0.0, || "empty ground truth".into())?;
    Ok(format!("{} files identical across runs; {formats} parsed files rewrite byte-identically", ta.len()))
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temp dir");
    let root = dir.path();
    let criteria: Vec<Criterion> = vec![
        (1, "compliance vs brute force", 5, Box::new(criterion_1)),
        (2, "density mass conservation", 10, Box::new(criterion_2)),
        (3, "homography round trip", 5, Box::new(criterion_3)),
        (4, "morphology vs set definitions", 10, Box::new(criterion_4)),
        (5, "density-weighted metrics", 5, Box::new(criterion_5)),
        (6, "ground truth end to end", 30, Box::new(|| criterion_6(&root.join("c6")))),
        (7, "minimum region count", 1, Box::new(criterion_7)),
        (8, "format round trips and determinism", 10, Box::new(|| criterion_8(&root.join("c8")))),
    ];
    let mut failed = 0;
    for (n, name, budget, run) in &criteria {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let over = took > Duration::from_secs(*budget);
        let (status, detail) = match (&outcome, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("over budget; {d}")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!(
            "{status} criterion {n} {name} [{:.3}s / {budget}s]: {detail}",
            took.as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
