//! Turns predicted density maps or soft masks into labeled non-compliant
//! regions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::{normalize, DensityMap};
use crate::grid::{Grid, GridSpec, Space};
use crate::maskgen::{threshold_grid, BinaryMask};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PostprocessError {
    #[error("value {value} at cell {index} outside [0, 1]")]
    OutOfRange { index: usize, value: f64 },
    #[error("threshold {0} outside [0, 1]")]
    InvalidThreshold(f64),
    #[error("count {count} does not exceed the minimum {min_count}")]
    BelowMinimum { count: f64, min_count: f64 },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RiskLabel {
    Warning,
    Danger,
}

impl RiskLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            RiskLabel::Warning => "Warning",
            RiskLabel::Danger => "Danger",
        }
    }

    /// Overlay gray level for the label.
    pub fn overlay_value(self) -> u8 {
        match self {
            RiskLabel::Warning => 128,
            RiskLabel::Danger => 255,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PostprocessConfig {
    /// Threshold on the normalized predicted density.
    pub density_threshold: f64,
    /// Threshold on soft segmentation outputs.
    pub soft_mask_threshold: f64,
    /// Regions whose integrated count is not above this are dropped.
    pub min_count: f64,
    /// Regions with at least this many persons are labeled `Danger`.
    pub danger_count: f64,
}

impl PostprocessConfig {
    pub const DEFAULT_DENSITY_THRESHOLD: f64 = 20.0 / 255.0;
    pub const DEFAULT_DANGER_COUNT: f64 = 5.0;

    pub const CITYSTREET: PostprocessConfig = PostprocessConfig {
        density_threshold: Self::DEFAULT_DENSITY_THRESHOLD,
        soft_mask_threshold: 0.3,
        min_count: 0.5,
        danger_count: Self::DEFAULT_DANGER_COUNT,
    };

    /// PETS2009 with the FCN-7 segmentation threshold.
    pub const PETS2009_FCN7: PostprocessConfig = PostprocessConfig {
        density_threshold: Self::DEFAULT_DENSITY_THRESHOLD,
        soft_mask_threshold: 0.6,
        min_count: 2.0,
        danger_count: Self::DEFAULT_DANGER_COUNT,
    };

    /// PETS2009 with the U-Net segmentation threshold.
    pub const PETS2009_UNET: PostprocessConfig = PostprocessConfig {
        soft_mask_threshold: 0.9,
        ..Self::PETS2009_FCN7
    };

    pub fn validate(&self) -> Result<(), PostprocessError> {
        for t in [self.density_threshold, self.soft_mask_threshold] {
            if !(0.0..=1.0).contains(&t) {
                return Err(PostprocessError::InvalidThreshold(t));
            }
        }
        if !(self.min_count >= 0.0 && self.min_count.is_finite()) {
            return Err(PostprocessError::InvalidConfig(format!(
                "min_count must be a non-negative number, got {}",
                self.min_count
            )));
        }
        if !self.danger_count.is_finite() {
            return Err(PostprocessError::InvalidConfig("danger_count must be finite".into()));
        }
        Ok(())
    }
}

impl Default for PostprocessConfig {
    fn default() -> Self {
        Self::CITYSTREET
    }
}

/// One 8-connected region of a thresholded prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMask {
    pub id: usize,
    /// `(col, row)` cells in raster order.
    pub cells: Vec<(usize, usize)>,
    /// Persons, integrated over the raw map.
    pub count: f64,
    pub risk: RiskLabel,
    /// Inclusive `[x0, y0, x1, y1]`.
    pub bbox: [usize; 4],
}

impl RegionMask {
    pub fn area_cells(&self) -> usize {
        self.cells.len()
    }
}

/// Labels 8-connected foreground components.
///
/// Returns a label grid (0 = background, components numbered from 1 in order
/// of their first cell in raster order) and the component count. Two-pass
/// union-find.
pub fn label_components(mask: &Grid<u8>) -> (Grid<u32>, usize) {
    let (w, h) = mask.dims();
    let mut labels = Grid::filled(w, h, 0u32);
    let mut parent: Vec<u32> = vec![0];

    fn find(parent: &mut [u32], mut x: u32) -> u32 {
        while parent[x as usize] != x {
            parent[x as usize] = parent[parent[x as usize] as usize];
            x = parent[x as usize];
        }
        x
    }

    for r in 0..h {
        for c in 0..w {
            if mask.get(c, r) == 0 {
                continue;
            }
            // already-visited neighbors: W, NW, N, NE
            let neigh = [(-1isize, 0isize), (-1, -1), (0, -1), (1, -1)];
            let mut current = 0u32;
            for (dx, dy) in neigh {
                let Some(l) = labels.get_checked(c as isize + dx, r as isize + dy) else {
                    continue;
                };
                if l == 0 {
                    continue;
                }
                if current == 0 {
                    current = find(&mut parent, l);
                } else {
                    let (a, b) = (find(&mut parent, current), find(&mut parent, l));
                    if a != b {
                        let (lo, hi) = (a.min(b), a.max(b));
                        parent[hi as usize] = lo;
                        current = lo;
                    }
                }
            }
            if current == 0 {
                current = parent.len() as u32;
                parent.push(current);
            }
            labels.set(c, r, current);
        }
    }

    // Canonical numbering by first appearance in raster order.
    let mut canon = vec![0u32; parent.len()];
    let mut next = 0u32;
    for v in labels.as_mut_slice() {
        if *v == 0 {
            continue;
        }
        let root = find(&mut parent, *v) as usize;
        if canon[root] == 0 {
            next += 1;
            canon[root] = next;
        }
        *v = canon[root];
    }
    (labels, next as usize)
}

/// Danger iff `count ≥ danger_count`; counts at or below the minimum are
/// rejected.
pub fn label_risk(count: f64, cfg: &PostprocessConfig) -> Result<RiskLabel, PostprocessError> {
    if !(count > cfg.min_count) {
        return Err(PostprocessError::BelowMinimum {
            count,
            min_count: cfg.min_count,
        });
    }
    Ok(if count >= cfg.danger_count {
        RiskLabel::Danger
    } else {
        RiskLabel::Warning
    })
}

/// Normalizes, thresholds and labels a predicted density map.
///
/// Each component's count integrates the raw (unnormalized) map. Regions
/// with `count ≤ min_count` are dropped; the rest are renumbered from 0 in
/// raster order of their first cell.
pub fn extract_regions(
    d_pred: &DensityMap,
    cfg: &PostprocessConfig,
) -> Result<Vec<RegionMask>, PostprocessError> {
    cfg.validate()?;
    let normalized = normalize(d_pred);
    let fg = threshold_grid(&normalized.grid, cfg.density_threshold);
    let (labels, n) = label_components(&fg);

    let mut cells: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut counts = vec![0.0f64; n];
    let (w, h) = labels.dims();
    for r in 0..h {
        for c in 0..w {
            let l = labels.get(c, r);
            if l > 0 {
                cells[l as usize - 1].push((c, r));
                counts[l as usize - 1] += d_pred.grid.get(c, r);
            }
        }
    }

    let mut out = Vec::new();
    for (cells, count) in cells.into_iter().zip(counts) {
        let Ok(risk) = label_risk(count, cfg) else {
            continue;
        };
        let mut bbox = [usize::MAX, usize::MAX, 0, 0];
        for &(c, r) in &cells {
            bbox[0] = bbox[0].min(c);
            bbox[1] = bbox[1].min(r);
            bbox[2] = bbox[2].max(c);
            bbox[3] = bbox[3].max(r);
        }
        out.push(RegionMask {
            id: out.len(),
            cells,
            count,
            risk,
            bbox,
        });
    }
    Ok(out)
}

/// Saturates a soft segmentation in `[0, 1]`: cells above `t` become 1.
pub fn threshold_soft_mask(
    soft: &Grid<f64>,
    t: f64,
    space: Space,
    spec: GridSpec,
) -> Result<BinaryMask, PostprocessError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(PostprocessError::InvalidThreshold(t));
    }
    if let Some((index, &value)) = soft
        .as_slice()
        .iter()
        .enumerate()
        .find(|(_, v)| !(0.0..=1.0).contains(*v))
    {
        return Err(PostprocessError::OutOfRange { index, value });
    }
    Ok(BinaryMask {
        grid: threshold_grid(soft, t),
        space,
        spec,
    })
}

/// Union of the regions as a binary mask on the map's grid.
pub fn regions_mask(regions: &[RegionMask], space: Space, spec: GridSpec) -> BinaryMask {
    let mut m = BinaryMask::filled(space, spec, false);
    for reg in regions {
        for &(c, r) in &reg.cells {
            m.grid.set(c, r, 1);
        }
    }
    m
}

/// Overlay raster: 128 on Warning cells, 255 on Danger cells, 0 elsewhere.
pub fn overlay(regions: &[RegionMask], width: usize, height: usize) -> Grid<u8> {
    let mut g = Grid::filled(width, height, 0u8);
    for reg in regions {
        for &(c, r) in &reg.cells {
            g.set(c, r, reg.risk.overlay_value());
        }
    }
    g
}
