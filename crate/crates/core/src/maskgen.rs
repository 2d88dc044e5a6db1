//! Binary masks, flat rectangular morphology and segmentation ground truth.
//!
//! A structuring element of side `k` holds the offsets
//! `-⌊k/2⌋ ..= k-1-⌊k/2⌋` on each axis (the anchor sits at `(⌊k/2⌋, ⌊k/2⌋)`).
//! With `B` that offset set,
//!
//! * dilation is the Minkowski sum `X ⊕ B = { x + b }`, clipped to the grid;
//! * erosion is `X ⊖ B = { x : x + b ∈ X for all b }`, where cells outside
//!   the grid count as background.
//!
//! Using the same `B` for both makes `(X ⊕ B) ⊖ B` a true closing, which is
//! extensive and idempotent also for even sides.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::{normalize, DensityMap};
use crate::geometry::{map_to_source, PlaneHomography, WarpDirection};
use crate::grid::{Grid, GridSpec, Space};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MaskError {
    #[error("density map is not normalized: cell {index} = {value}")]
    NotNormalized { index: usize, value: f64 },
    #[error("threshold {0} outside [0, 1)")]
    InvalidThreshold(f64),
    #[error("structuring element side must be at least 1")]
    InvalidSide,
    #[error("expected a {expected} raster, got {found}")]
    WrongSpace { expected: &'static str, found: Space },
    #[error("homography has no camera to project into")]
    NoCamera,
    #[error("mask cell {index} holds {value}, expected 0 or 1")]
    NotBinary { index: usize, value: u8 },
    #[error("invalid grid {0:?}")]
    InvalidGrid(GridSpec),
}

/// Raster of `{0, 1}` cells.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMask {
    pub grid: Grid<u8>,
    pub space: Space,
    pub spec: GridSpec,
}

impl BinaryMask {
    pub fn filled(space: Space, spec: GridSpec, value: bool) -> Self {
        Self {
            grid: Grid::filled(spec.width, spec.height, value as u8),
            space,
            spec,
        }
    }

    pub fn from_grid(grid: Grid<u8>, space: Space, spec: GridSpec) -> Result<Self, MaskError> {
        if grid.dims() != (spec.width, spec.height) {
            return Err(MaskError::InvalidGrid(spec));
        }
        if let Some((index, &value)) = grid.as_slice().iter().enumerate().find(|(_, &v)| v > 1) {
            return Err(MaskError::NotBinary { index, value });
        }
        Ok(Self { grid, space, spec })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.grid.dims()
    }

    pub fn get(&self, col: usize, row: usize) -> bool {
        self.grid.get(col, row) != 0
    }

    pub fn count_ones(&self) -> usize {
        self.grid.as_slice().iter().filter(|&&v| v != 0).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count_ones() == 0
    }

    /// Cell-wise complement.
    pub fn complement(&self) -> Self {
        Self {
            grid: self.grid.map(|v| 1 - v),
            ..self.clone()
        }
    }
}

/// Dilation/erosion plan applied to a binarized density map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphSchedule {
    pub dilate_side: usize,
    pub dilate_passes: usize,
    pub erode_side: usize,
    pub erode_passes: usize,
    /// Binarization threshold on the normalized map.
    pub threshold: f64,
}

impl MorphSchedule {
    pub const CITYSTREET: MorphSchedule = MorphSchedule {
        dilate_side: 7,
        dilate_passes: 2,
        erode_side: 4,
        erode_passes: 2,
        threshold: 0.0,
    };

    pub const PETS2009: MorphSchedule = MorphSchedule {
        dilate_side: 7,
        dilate_passes: 2,
        erode_side: 5,
        erode_passes: 2,
        threshold: 0.0,
    };

    pub fn validate(&self) -> Result<(), MaskError> {
        if self.dilate_side == 0 || self.erode_side == 0 {
            return Err(MaskError::InvalidSide);
        }
        check_threshold(self.threshold)
    }
}

fn check_threshold(t: f64) -> Result<(), MaskError> {
    if (0.0..1.0).contains(&t) {
        Ok(())
    } else {
        Err(MaskError::InvalidThreshold(t))
    }
}

/// `cell = 1 iff value > t`, shared by density binarization and soft-mask
/// thresholding.
pub(crate) fn threshold_grid(values: &Grid<f64>, t: f64) -> Grid<u8> {
    values.map(|v| (v > t) as u8)
}

/// Binarizes a normalized map: cells strictly above `threshold` become 1.
pub fn binarize(map: &DensityMap, threshold: f64) -> Result<BinaryMask, MaskError> {
    check_threshold(threshold)?;
    if let Some((index, &value)) = map
        .grid
        .as_slice()
        .iter()
        .enumerate()
        .find(|(_, &v)| !(v <= 1.0))
    {
        return Err(MaskError::NotNormalized { index, value });
    }
    Ok(BinaryMask {
        grid: threshold_grid(&map.grid, threshold),
        space: map.space,
        spec: map.spec,
    })
}

/// Number of ones in `line[lo..=hi]` via prefix sums, with clipping.
fn window_ones(prefix: &[u32], lo: isize, hi: isize) -> u32 {
    let n = prefix.len() as isize - 1;
    let lo = lo.max(0);
    let hi = hi.min(n - 1);
    if lo > hi {
        0
    } else {
        prefix[(hi + 1) as usize] - prefix[lo as usize]
    }
}

/// One separable 1-D pass over rows (`horizontal`) or columns.
///
/// For every cell `x`, looks at the input window `[x + lo, x + hi]`;
/// `all == false` sets the cell if any window cell is set, `all == true` only
/// if the whole window lies in the grid and is set.
fn line_pass(src: &Grid<u8>, horizontal: bool, lo: isize, hi: isize, all: bool) -> Grid<u8> {
    let (w, h) = src.dims();
    let (lines, len) = if horizontal { (h, w) } else { (w, h) };
    let mut out = Grid::filled(w, h, 0u8);
    let mut prefix = vec![0u32; len + 1];
    let span = (hi - lo + 1) as u32;
    for line in 0..lines {
        let at = |i: usize| if horizontal { (i, line) } else { (line, i) };
        for i in 0..len {
            let (c, r) = at(i);
            prefix[i + 1] = prefix[i] + (src.get(c, r) != 0) as u32;
        }
        for i in 0..len {
            let ones = window_ones(&prefix, i as isize + lo, i as isize + hi);
            let set = if all { ones == span } else { ones > 0 };
            if set {
                let (c, r) = at(i);
                out.set(c, r, 1);
            }
        }
    }
    out
}

fn offsets(side: usize) -> (isize, isize) {
    let a = (side / 2) as isize;
    (-a, side as isize - 1 - a)
}

/// Dilation by the `side × side` all-ones element.
pub fn dilate(mask: &BinaryMask, side: usize) -> BinaryMask {
    assert!(side >= 1, "structuring element side must be at least 1");
    let (b_lo, b_hi) = offsets(side);
    // x ∈ X ⊕ B iff some x - b ∈ X, i.e. the window [x - b_hi, x - b_lo]
    let rows = line_pass(&mask.grid, true, -b_hi, -b_lo, false);
    let grid = line_pass(&rows, false, -b_hi, -b_lo, false);
    BinaryMask { grid, ..mask.clone() }
}

/// Erosion by the `side × side` all-ones element, zero padding.
pub fn erode(mask: &BinaryMask, side: usize) -> BinaryMask {
    assert!(side >= 1, "structuring element side must be at least 1");
    let (b_lo, b_hi) = offsets(side);
    let rows = line_pass(&mask.grid, true, b_lo, b_hi, true);
    let grid = line_pass(&rows, false, b_lo, b_hi, true);
    BinaryMask { grid, ..mask.clone() }
}

/// Dilation followed by erosion with the same element.
pub fn close(mask: &BinaryMask, side: usize) -> BinaryMask {
    erode(&dilate(mask, side), side)
}

/// Applies the dilation passes and then the erosion passes.
pub fn apply_schedule(mask: &BinaryMask, sched: &MorphSchedule) -> Result<BinaryMask, MaskError> {
    sched.validate()?;
    let mut m = mask.clone();
    for _ in 0..sched.dilate_passes {
        m = dilate(&m, sched.dilate_side);
    }
    for _ in 0..sched.erode_passes {
        m = erode(&m, sched.erode_side);
    }
    Ok(m)
}

/// Head-plane segmentation: normalize, binarize, then the morphology plan.
pub fn segment_plane(d_nsdc: &DensityMap, sched: &MorphSchedule) -> Result<BinaryMask, MaskError> {
    if !d_nsdc.space.is_plane() {
        return Err(MaskError::WrongSpace {
            expected: "plane",
            found: d_nsdc.space,
        });
    }
    sched.validate()?;
    let mask = binarize(&normalize(d_nsdc), sched.threshold)?;
    apply_schedule(&mask, sched)
}

/// Projects a head-plane mask into a camera image by nearest-neighbor lookup.
pub fn project_mask(
    plane_mask: &BinaryMask,
    hom: &PlaneHomography,
    target: &GridSpec,
) -> Result<BinaryMask, MaskError> {
    let camera = hom.camera().ok_or(MaskError::NoCamera)?;
    if !target.is_valid() {
        return Err(MaskError::InvalidGrid(*target));
    }
    let mut out = BinaryMask::filled(Space::Image(camera), *target, false);
    for row in 0..target.height {
        for col in 0..target.width {
            let p = target.cell_center(col, row);
            let Some(q) = map_to_source(p, hom, WarpDirection::PlaneToImage) else {
                continue;
            };
            if let Some((c, r)) = plane_mask.spec.cell_of(q) {
                if plane_mask.get(c, r) {
                    out.grid.set(col, row, 1);
                }
            }
        }
    }
    Ok(out)
}

/// Segmentation ground truth in a camera image from a head-plane `D_n`.
pub fn make_segmentation_gt(
    d_nsdc: &DensityMap,
    sched: &MorphSchedule,
    hom: &PlaneHomography,
    target: &GridSpec,
) -> Result<BinaryMask, MaskError> {
    let plane_mask = segment_plane(d_nsdc, sched)?;
    project_mask(&plane_mask, hom, target)
}
