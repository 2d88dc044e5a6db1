//! Gaussian density maps built from head annotations.
//!
//! A kernel of size `k` is a `k × k` window. Its anchor sits at
//! `(⌊k/2⌋, ⌊k/2⌋)`, so odd sizes are centered and even sizes have one more
//! cell before the anchor than after it. Entries are
//! `exp(-(dx² + dy²) / 2σ²)`, normalized to sum to one. When a kernel is
//! clipped by the grid border, the surviving entries are renormalized so that
//! every person contributes a mass of exactly one.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotations::HeadAnnotation;
use crate::grid::{Grid, GridSpec, Space};
use crate::maskgen::BinaryMask;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DensityError {
    #[error("invalid kernel: size {size}, sigma {sigma}")]
    InvalidKernel { size: usize, sigma: f64 },
    #[error("invalid grid: {0:?}")]
    InvalidGrid(GridSpec),
    #[error("{} annotation(s) outside the grid: indices {indices:?}", indices.len())]
    OutOfGrid { indices: Vec<usize> },
    #[error("annotation {index} is in {found} space, grid is in {expected} space")]
    WrongSpace {
        index: usize,
        found: Space,
        expected: Space,
    },
    #[error("dimension mismatch: {expected:?} vs {found:?}")]
    DimMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianKernelSpec {
    pub size: usize,
    /// Standard deviation, in cells.
    pub sigma: f64,
}

impl GaussianKernelSpec {
    pub fn new(size: usize, sigma: f64) -> Result<Self, DensityError> {
        let k = Self { size, sigma };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<(), DensityError> {
        if self.size == 0 || !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(DensityError::InvalidKernel {
                size: self.size,
                sigma: self.sigma,
            });
        }
        Ok(())
    }

    pub fn anchor(&self) -> usize {
        self.size / 2
    }

    /// Unnormalized 1-D weights for offsets `-anchor ..= size-1-anchor`.
    fn weights_1d(&self) -> Vec<f64> {
        let a = self.anchor() as f64;
        let two_var = 2.0 * self.sigma * self.sigma;
        (0..self.size)
            .map(|i| {
                let d = i as f64 - a;
                (-d * d / two_var).exp()
            })
            .collect()
    }

    /// The full normalized `size × size` kernel, row-major.
    pub fn kernel(&self) -> Grid<f64> {
        let w = self.weights_1d();
        let s: f64 = w.iter().sum();
        let mut g = Grid::zeros(self.size, self.size);
        for r in 0..self.size {
            for c in 0..self.size {
                g.set(c, r, (w[c] / s) * (w[r] / s));
            }
        }
        g
    }
}

/// Kernel presets for the two reference datasets, `(size, sigma)`.
pub mod presets {
    use super::GaussianKernelSpec;

    pub const CITYSTREET_PLANE: GaussianKernelSpec = GaussianKernelSpec { size: 5, sigma: 15.0 };
    pub const CITYSTREET_IMAGE: GaussianKernelSpec = GaussianKernelSpec { size: 10, sigma: 30.0 };
    pub const PETS_PLANE: GaussianKernelSpec = GaussianKernelSpec { size: 4, sigma: 15.0 };
    pub const PETS_IMAGE: GaussianKernelSpec = GaussianKernelSpec { size: 4, sigma: 15.0 };

    pub const ALL: [(&str, GaussianKernelSpec); 4] = [
        ("citystreet-plane", CITYSTREET_PLANE),
        ("citystreet-image", CITYSTREET_IMAGE),
        ("pets-plane", PETS_PLANE),
        ("pets-image", PETS_IMAGE),
    ];

    pub fn by_name(name: &str) -> Option<GaussianKernelSpec> {
        ALL.iter().find(|(n, _)| *n == name).map(|(_, k)| *k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DensityKind {
    /// Non-compliant persons, `D_n`.
    Nsdc,
    /// Compliant persons, `D_c`.
    Sdc,
    /// Model output.
    Predicted,
    /// Every annotated person, compliant or not.
    Total,
}

impl DensityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DensityKind::Nsdc => "nsdc",
            DensityKind::Sdc => "sdc",
            DensityKind::Predicted => "predicted",
            DensityKind::Total => "total",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "nsdc" => Some(DensityKind::Nsdc),
            "sdc" => Some(DensityKind::Sdc),
            "predicted" => Some(DensityKind::Predicted),
            "total" => Some(DensityKind::Total),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMap {
    pub grid: Grid<f64>,
    pub space: Space,
    pub spec: GridSpec,
    pub kind: DensityKind,
}

impl DensityMap {
    pub fn zeros(space: Space, spec: GridSpec, kind: DensityKind) -> Self {
        Self {
            grid: Grid::zeros(spec.width, spec.height),
            space,
            spec,
            kind,
        }
    }

    /// Wraps raw cells; fails if the buffer does not match `spec`.
    pub fn from_grid(
        grid: Grid<f64>,
        space: Space,
        spec: GridSpec,
        kind: DensityKind,
    ) -> Result<Self, DensityError> {
        if grid.dims() != (spec.width, spec.height) {
            return Err(DensityError::DimMismatch {
                expected: (spec.width, spec.height),
                found: grid.dims(),
            });
        }
        Ok(Self {
            grid,
            space,
            spec,
            kind,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.grid.dims()
    }

    pub fn mass(&self) -> f64 {
        self.grid.sum()
    }

    /// Cell-wise sum with another map on the same grid.
    pub fn add(&self, other: &DensityMap) -> Result<DensityMap, DensityError> {
        if self.dims() != other.dims() {
            return Err(DensityError::DimMismatch {
                expected: self.dims(),
                found: other.dims(),
            });
        }
        let mut out = self.clone();
        for (a, b) in out.grid.as_mut_slice().iter_mut().zip(other.grid.as_slice()) {
            *a += *b;
        }
        Ok(out)
    }
}

/// Blurs head annotations into a density map on `spec`.
pub fn densify(
    heads: &[HeadAnnotation],
    kernel: &GaussianKernelSpec,
    space: Space,
    spec: &GridSpec,
    kind: DensityKind,
) -> Result<DensityMap, DensityError> {
    kernel.validate()?;
    if !spec.is_valid() {
        return Err(DensityError::InvalidGrid(*spec));
    }
    if let Some(index) = heads.iter().position(|h| h.space != space) {
        return Err(DensityError::WrongSpace {
            index,
            found: heads[index].space,
            expected: space,
        });
    }
    let mut cells = Vec::with_capacity(heads.len());
    let mut outside = Vec::new();
    for (i, h) in heads.iter().enumerate() {
        match spec.cell_of(h.position) {
            Some(c) => cells.push(c),
            None => outside.push(i),
        }
    }
    if !outside.is_empty() {
        return Err(DensityError::OutOfGrid { indices: outside });
    }

    let w = kernel.weights_1d();
    let a = kernel.anchor() as isize;
    let mut map = DensityMap::zeros(space, *spec, kind);
    for (col, row) in cells {
        deposit(&mut map.grid, col as isize, row as isize, &w, a);
    }
    Ok(map)
}

/// Adds one unit of mass around `(col, row)`, clipped and renormalized.
fn deposit(grid: &mut Grid<f64>, col: isize, row: isize, w: &[f64], anchor: isize) {
    let (gw, gh) = (grid.width() as isize, grid.height() as isize);
    let k = w.len() as isize;
    let x0 = (col - anchor).max(0);
    let x1 = (col - anchor + k).min(gw);
    let y0 = (row - anchor).max(0);
    let y1 = (row - anchor + k).min(gh);
    let wx = |x: isize| w[(x - col + anchor) as usize];
    let wy = |y: isize| w[(y - row + anchor) as usize];
    let sx: f64 = (x0..x1).map(wx).sum();
    let sy: f64 = (y0..y1).map(wy).sum();
    for y in y0..y1 {
        let fy = wy(y) / sy;
        for x in x0..x1 {
            let idx = (y * gw + x) as usize;
            grid.as_mut_slice()[idx] += (wx(x) / sx) * fy;
        }
    }
}

/// Scales the map so its maximum is one; an all-zero map is returned as is.
pub fn normalize(map: &DensityMap) -> DensityMap {
    let max = map.grid.max();
    if !(max > 0.0) {
        return map.clone();
    }
    DensityMap {
        grid: map.grid.map(|v| v / max),
        ..map.clone()
    }
}

/// Person count: sum of cells, optionally restricted to a mask.
pub fn count(map: &DensityMap, region: Option<&BinaryMask>) -> Result<f64, DensityError> {
    match region {
        None => Ok(map.mass()),
        Some(mask) => {
            if mask.dims() != map.dims() {
                return Err(DensityError::DimMismatch {
                    expected: map.dims(),
                    found: mask.dims(),
                });
            }
            Ok(map
                .grid
                .as_slice()
                .iter()
                .zip(mask.grid.as_slice())
                .filter(|(_, &m)| m != 0)
                .map(|(v, _)| v)
                .sum())
        }
    }
}
