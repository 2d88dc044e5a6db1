//! Turns a head-plane D_n map into a segmentation mask with the dataset
//! morphology schedule and projects it into a camera image.
//!
//! Run with `cargo run --example segmentation_gt`.

use vsd::annotations::HeadAnnotation;
use vsd::density::{densify, presets, DensityKind};
use vsd::geometry::{plane_homography, HeadPlane, DEFAULT_HEAD_HEIGHT};
use vsd::grid::Space;
use vsd::maskgen::{project_mask, segment_plane, MorphSchedule};
use vsd::simulate::{camera_rig, plane_grid_for, RigConfig};

fn ascii(mask: &vsd::maskgen::BinaryMask, step: usize) -> String {
    let (w, h) = mask.dims();
    let mut s = String::new();
    for r in (0..h).step_by(step) {
        for c in (0..w).step_by(step) {
            s.push(if mask.get(c, r) { '#' } else { '.' });
        }
        s.push('\n');
    }
    s
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let area = [20.0, 20.0];
    let plane = HeadPlane::new(DEFAULT_HEAD_HEIGHT, plane_grid_for(area, 0.125, 2.0))?;
    let nsdc: Vec<HeadAnnotation> = [(6.0, 6.0), (6.9, 6.4), (7.5, 7.2), (14.0, 12.0), (15.1, 12.3)]
        .iter()
        .map(|&(x, y)| HeadAnnotation::plane(0, x, y))
        .collect();
    let d_n = densify(&nsdc, &presets::CITYSTREET_PLANE, Space::Plane, &plane.grid, DensityKind::Nsdc)?;
    let mask = segment_plane(&d_n, &MorphSchedule::CITYSTREET)?;
    println!("plane mask: {} of {} cells", mask.count_ones(), plane.grid.len());
    print!("{}", ascii(&mask, 6));

    let cam = camera_rig(&RigConfig::default(), area, DEFAULT_HEAD_HEIGHT)?[0];
    let hom = plane_homography(&cam, &plane)?;
    let img_mask = project_mask(&mask, &hom, &cam.image_grid())?;
    println!("camera {} mask: {} of {} pixels", cam.id, img_mask.count_ones(), cam.width * cam.height);
    print!("{}", ascii(&img_mask, 16));
    Ok(())
}
