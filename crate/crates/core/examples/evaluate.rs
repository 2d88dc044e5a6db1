//! Scores a predicted mask with density-weighted confusion sums, and
//! computes counting errors and Dice.
//!
//! Run with `cargo run --example evaluate`.

use vsd::density::{DensityKind, DensityMap};
use vsd::grid::{Grid, GridSpec, Space};
use vsd::maskgen::BinaryMask;
use vsd::metrics::{density_confusion, derive_scores, dice, mae_mse};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = GridSpec::image(4, 1);
    let map = |v: Vec<f64>, kind| DensityMap::from_grid(Grid::from_vec(4, 1, v).unwrap(), Space::Plane, spec, kind);
    let d_n = map(vec![2.0, 0.0, 1.0, 0.0], DensityKind::Nsdc)?;
    let d_c = map(vec![0.0, 0.5, 0.0, 0.5], DensityKind::Sdc)?;
    let pred = BinaryMask::from_grid(Grid::from_vec(4, 1, vec![1, 1, 0, 0]).unwrap(), Space::Plane, spec)?;

    let c = density_confusion(&pred, &d_n, &d_c)?;
    let s = derive_scores(&c);
    println!("tp {} fp {} tn {} fn {}", c.tp, c.fp, c.tn, c.fn_);
    println!(
        "precision {:.6} recall {:.6} specificity {:.6} f1 {:.6}",
        s.precision, s.recall, s.specificity, s.f1
    );

    let gt = BinaryMask::from_grid(Grid::from_vec(4, 1, vec![1, 0, 1, 0]).unwrap(), Space::Plane, spec)?;
    println!("dice {:.6}", dice(&pred, &gt)?);

    let (mae, mse) = mae_mse(&[10.0, 20.0], &[12.0, 16.0])?;
    println!("MAE {mae:.6} MSE {mse:.6}");
    Ok(())
}
