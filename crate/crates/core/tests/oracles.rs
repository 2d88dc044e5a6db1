#![allow(clippy::needless_range_loop)]

mod common;

use common::*;
use nalgebra::Vector3;
use vsd::annotations::{classify_compliance, ComplianceLabel, HeadAnnotation};
use vsd::density::{densify, presets, DensityKind, GaussianKernelSpec};
use vsd::geometry::{
    image_to_plane, plane_homography, plane_to_image, CameraExtrinsics, CameraIntrinsics, CameraModel, HeadPlane,
};
use vsd::grid::{Grid, GridSpec, Space};
use vsd::maskgen::{close, dilate, erode, BinaryMask};
use vsd::postprocess::label_components;

#[test]
fn oracles_agree_with_hand_fixtures() {
    let (d, nsdc) = brute_force_compliance(&[[0.0, 0.0], [3.0, 4.0], [0.0, 2.0]], 2.0);
    assert_eq!(d, vec![2.0, 13f64.sqrt(), 2.0]);
    assert_eq!(nsdc, vec![true, false, true]);

    let x = solve3([[0.0, 2.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 4.0]], [4.0, 3.0, 8.0]).unwrap();
    assert_eq!(x, [3.0, 2.0, 2.0]);

    let m = Grid::from_vec(5, 1, vec![0, 0, 1, 0, 0]).unwrap();
    assert_eq!(dilate_oracle(&m, 3).as_slice(), &[0, 1, 1, 1, 0]);
    assert_eq!(dilate_oracle(&m, 4).as_slice(), &[1, 1, 1, 1, 0]);

    let l = Grid::from_vec(4, 2, vec![1, 0, 0, 1, 0, 1, 0, 1]).unwrap();
    let (labels, n) = flood_fill_labels(&l);
    assert_eq!(n, 2);
    assert_eq!(labels.as_slice(), &[1, 0, 0, 2, 0, 1, 0, 2]);
}

fn scene_points(rng: &mut TestRng, n: usize, side: f64) -> Vec<[f64; 2]> {
    (0..n).map(|_| [rng.range(0.0, side), rng.range(0.0, side)]).collect()
}

#[test]
fn compliance_matches_brute_force_including_ties() {
    let mut rng = TestRng::new(1);
    for trial in 0..300 {
        let n = rng.below(40) + 1;
        let mut pts = scene_points(&mut rng, n, 12.0);
        if trial % 3 == 0 && n >= 2 {
            // exact tie at d_t
            pts[1] = [pts[0][0] + 2.0, pts[0][1]];
            if pts[1][0] - 2.0 != pts[0][0] {
                continue;
            }
        }
        let heads: Vec<_> = pts.iter().map(|p| HeadAnnotation::plane(0, p[0], p[1])).collect();
        let part = classify_compliance(&heads, 2.0).unwrap();
        let (d, nsdc) = brute_force_compliance(&pts, 2.0);
        assert_eq!(part.distances, d, "trial {trial}");
        for i in 0..n {
            assert_eq!(part.labels[i] == ComplianceLabel::Nsdc, nsdc[i], "trial {trial}, person {i}");
        }
    }
}

fn random_camera(rng: &mut TestRng, id: u32) -> CameraModel {
    let eye = Vector3::new(rng.range(-15.0, 35.0), rng.range(-15.0, 35.0), rng.range(4.0, 20.0));
    let target = Vector3::new(rng.range(5.0, 15.0), rng.range(5.0, 15.0), 0.0);
    let ext = CameraExtrinsics::look_at(eye, target).unwrap();
    let f = rng.range(300.0, 1200.0);
    let k = CameraIntrinsics::with_skew(f, f * rng.range(0.9, 1.1), rng.range(280.0, 360.0), rng.range(200.0, 280.0), rng.range(-1.0, 1.0))
        .unwrap();
    CameraModel::new(id, k, ext, 640, 480).unwrap()
}

#[test]
fn homography_matches_linear_solve_and_pinhole() {
    let mut rng = TestRng::new(2);
    let plane = HeadPlane::new(1.75, GridSpec::new(0.0, 0.0, 0.1, 200, 200)).unwrap();
    for i in 0..50 {
        let cam = random_camera(&mut rng, i);
        let hom = plane_homography(&cam, &plane).unwrap();
        for _ in 0..50 {
            let p = [rng.range(0.0, 20.0), rng.range(0.0, 20.0)];
            let px = plane_to_image(p, &hom).unwrap();
            let ref_px = pinhole_project(&cam, p, 1.75);
            assert!((px[0] - ref_px[0]).abs() < 1e-6 && (px[1] - ref_px[1]).abs() < 1e-6);
            let back = image_to_plane(px, &hom).unwrap();
            let oracle = backproject_oracle(&cam, px, 1.75).unwrap();
            assert!((back[0] - oracle[0]).abs() < 1e-9 && (back[1] - oracle[1]).abs() < 1e-9);
        }
    }
}

#[test]
fn morphology_matches_set_definitions() {
    let mut rng = TestRng::new(3);
    for _ in 0..150 {
        let (w, h) = (rng.below(40) + 1, rng.below(40) + 1);
        let p = rng.range(0.05, 0.7);
        let g = random_mask(&mut rng, w, h, p);
        let m = BinaryMask::from_grid(g.clone(), Space::Plane, GridSpec::image(w, h)).unwrap();
        for side in 1..=8 {
            assert_eq!(dilate(&m, side).grid, dilate_oracle(&g, side), "dilate {w}x{h} side {side}");
            assert_eq!(erode(&m, side).grid, erode_oracle(&g, side), "erode {w}x{h} side {side}");
            assert_eq!(close(&m, side).grid, erode_oracle(&dilate_oracle(&g, side), side));
        }
    }
}

#[test]
fn labeling_matches_flood_fill() {
    let mut rng = TestRng::new(4);
    for _ in 0..200 {
        let (w, h) = (rng.below(50) + 1, rng.below(50) + 1);
        let p = rng.range(0.1, 0.6);
        let g = random_mask(&mut rng, w, h, p);
        assert_eq!(label_components(&g), flood_fill_labels(&g));
    }
    // a comb forces label merges; a diagonal line is one 8-connected component
    let comb = Grid::from_vec(7, 3, vec![1, 0, 1, 0, 1, 0, 1, 1, 0, 1, 0, 1, 0, 1, 1, 1, 1, 1, 1, 1, 1]).unwrap();
    assert_eq!(label_components(&comb), flood_fill_labels(&comb));
    let diag = Grid::from_vec(4, 4, vec![0, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0, 0]).unwrap();
    assert_eq!(label_components(&diag).1, 1);
}

#[test]
fn density_is_a_superposition_of_single_footprints() {
    let mut rng = TestRng::new(5);
    let kernels: Vec<GaussianKernelSpec> = presets::ALL
        .iter()
        .map(|(_, k)| *k)
        .chain([GaussianKernelSpec { size: 3, sigma: 0.8 }, GaussianKernelSpec { size: 6, sigma: 1.5 }])
        .collect();
    for trial in 0..60 {
        let (w, h) = (rng.below(30) + 1, rng.below(30) + 1);
        let spec = GridSpec::new(-1.0, 2.0, 0.25, w, h);
        let n = rng.below(12);
        let heads: Vec<_> = (0..n)
            .map(|_| {
                let x = rng.range(spec.origin_x, spec.origin_x + w as f64 * 0.25 - 1e-9);
                let y = rng.range(spec.origin_y, spec.origin_y + h as f64 * 0.25 - 1e-9);
                HeadAnnotation::plane(0, x, y)
            })
            .collect();
        let k = kernels[trial % kernels.len()];
        let map = densify(&heads, &k, Space::Plane, &spec, DensityKind::Nsdc).unwrap();
        let mut expected = Grid::filled(w, h, 0.0);
        for head in &heads {
            let x = ((head.position[0] - spec.origin_x) / spec.cell_size).floor() as usize;
            let y = ((head.position[1] - spec.origin_y) / spec.cell_size).floor() as usize;
            let one = single_person_density(w, h, x, y, k.size, k.sigma);
            for (e, v) in expected.as_mut_slice().iter_mut().zip(one.as_slice()) {
                *e += v;
            }
        }
        for (a, b) in map.grid.as_slice().iter().zip(expected.as_slice()) {
            assert!((a - b).abs() < 1e-12, "trial {trial}: {a} vs {b}");
        }
    }
}
