//! Projects per-camera head annotations onto the head plane and fuses the
//! views into one set of persons.
//!
//! Run with `cargo run --example project_views`.

use vsd::annotations::{merge_views, project_annotations, DEFAULT_MERGE_RADIUS};
use vsd::geometry::{plane_homography, HeadPlane, DEFAULT_HEAD_HEIGHT};
use vsd::simulate::{camera_rig, generate_scene, plane_grid_for, render_annotations, RigConfig, SceneConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let area = [20.0, 20.0];
    let plane = HeadPlane::new(DEFAULT_HEAD_HEIGHT, plane_grid_for(area, 0.1, 2.0))?;
    let cams = camera_rig(&RigConfig::default(), area, DEFAULT_HEAD_HEIGHT)?;
    let scene = generate_scene(
        &SceneConfig {
            seed: 5,
            n_isolated: 8,
            dropout: 0.2,
            ..SceneConfig::default()
        },
        2.0,
        0,
    )?;

    let mut views = Vec::new();
    for cam in &cams {
        let hom = plane_homography(cam, &plane)?;
        let image = render_annotations(&scene, cam, &plane)?;
        let on_plane = project_annotations(&image, &hom)?;
        println!("camera {} sees {} of {} heads", cam.id, on_plane.len(), scene.len());
        if let (Some(img), Some(pl)) = (image.first(), on_plane.first()) {
            println!(
                "  pixel ({:.1}, {:.1}) -> plane ({:.3}, {:.3})",
                img.position[0], img.position[1], pl.position[0], pl.position[1]
            );
        }
        views.push(on_plane);
    }

    let merged = merge_views(&views, DEFAULT_MERGE_RADIUS)?;
    println!("merged: {} persons (truth: {})", merged.len(), scene.len());
    Ok(())
}
