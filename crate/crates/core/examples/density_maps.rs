//! Builds D_n and D_c density maps on the head plane and in an image, and
//! checks that each map integrates to its person count.
//!
//! Run with `cargo run --example density_maps`.

use vsd::annotations::{classify_compliance, HeadAnnotation};
use vsd::density::{densify, presets, DensityKind};
use vsd::grid::{GridSpec, Space};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let heads: Vec<HeadAnnotation> = [(2.0, 2.0), (2.8, 2.3), (6.0, 7.5), (0.05, 9.95)]
        .iter()
        .map(|&(x, y)| HeadAnnotation::plane(0, x, y))
        .collect();
    let part = classify_compliance(&heads, 2.0)?;
    let grid = GridSpec::new(0.0, 0.0, 0.1, 100, 100);

    for (name, kernel) in presets::ALL {
        let d_n = densify(&part.nsdc, &kernel, Space::Plane, &grid, DensityKind::Nsdc)?;
        let d_c = densify(&part.sdc, &kernel, Space::Plane, &grid, DensityKind::Sdc)?;
        println!(
            "{name:<17} size {:>2} sigma {:>4}: mass(D_n) = {:.12} ({} NSDC), mass(D_c) = {:.12} ({} SDC)",
            kernel.size,
            kernel.sigma,
            d_n.mass(),
            part.nsdc.len(),
            d_c.mass(),
            part.sdc.len()
        );
    }

    // A person on the border keeps mass 1: the clipped kernel is renormalized.
    let corner = [HeadAnnotation::image(0, 0, 0.2, 0.3)];
    let img = densify(&corner, &presets::CITYSTREET_IMAGE, Space::Image(0), &GridSpec::image(64, 48), DensityKind::Total)?;
    println!("corner person in a 64x48 image: mass = {:.15}", img.mass());
    Ok(())
}
