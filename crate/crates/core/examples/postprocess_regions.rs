//! Finds crowd regions in a predicted density map and labels their risk.
//!
//! Run with `cargo run --example postprocess_regions`.

use vsd::annotations::HeadAnnotation;
use vsd::density::{densify, presets, DensityKind};
use vsd::grid::{GridSpec, Space};
use vsd::postprocess::{extract_regions, overlay, PostprocessConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = GridSpec::image(80, 40);
    let mut heads = Vec::new();
    // a dense group of seven and a pair
    for i in 0..7 {
        heads.push(HeadAnnotation::image(0, 0, 15.0 + 2.0 * (i % 3) as f64, 15.0 + 2.0 * (i / 3) as f64));
    }
    heads.push(HeadAnnotation::image(0, 0, 60.0, 20.0));
    heads.push(HeadAnnotation::image(0, 0, 62.0, 21.0));
    let pred = densify(&heads, &presets::CITYSTREET_IMAGE, Space::Image(0), &grid, DensityKind::Predicted)?;

    let cfg = PostprocessConfig::default();
    let regions = extract_regions(&pred, &cfg)?;
    for r in &regions {
        println!(
            "region {}: count {:.3}, {} cells, bbox {:?} -> {}",
            r.id,
            r.count,
            r.area_cells(),
            r.bbox,
            r.risk.as_str()
        );
    }
    let ov = overlay(&regions, grid.width, grid.height);
    let danger = ov.as_slice().iter().filter(|&&v| v == 255).count();
    let warning = ov.as_slice().iter().filter(|&&v| v == 128).count();
    println!("overlay: {danger} danger cells, {warning} warning cells");
    Ok(())
}
