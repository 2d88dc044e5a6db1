//! Raster containers shared by density maps and masks.
//!
//! A [`GridSpec`] places a `width × height` lattice of square cells in a
//! continuous coordinate frame. Cell `(col, row)` covers
//! `[origin_x + col·cell, origin_x + (col+1)·cell) × [origin_y + row·cell, …)`
//! and its center sits half a cell inside that corner. Image grids use
//! origin `(0, 0)` and unit cells, so pixel `(u, v)` falls in cell
//! `(⌊u⌋, ⌊v⌋)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Identifier of a camera in the calibrated set.
pub type CameraId = u32;

/// Coordinate space a point, raster or mask lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Space {
    /// Image plane of the given camera, pixel units.
    Image(CameraId),
    /// Head plane, meters.
    Plane,
}

impl Space {
    pub fn is_plane(self) -> bool {
        matches!(self, Space::Plane)
    }

    pub fn camera(self) -> Option<CameraId> {
        match self {
            Space::Image(id) => Some(id),
            Space::Plane => None,
        }
    }
}

/// Token form used in raster headers: `plane` or `image:<id>`.
impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Plane => f.write_str("plane"),
            Space::Image(id) => write!(f, "image:{id}"),
        }
    }
}

impl FromStr for Space {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "plane" {
            return Ok(Space::Plane);
        }
        match s.strip_prefix("image:") {
            Some(id) => id
                .parse()
                .map(Space::Image)
                .map_err(|_| format!("invalid camera id in space token {s:?}")),
            None => Err(format!("unknown space token {s:?}")),
        }
    }
}

/// Placement of a raster in its coordinate frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin_x: f64,
    pub origin_y: f64,
    pub cell_size: f64,
    pub width: usize,
    pub height: usize,
}

impl GridSpec {
    pub fn new(origin_x: f64, origin_y: f64, cell_size: f64, width: usize, height: usize) -> Self {
        Self {
            origin_x,
            origin_y,
            cell_size,
            width,
            height,
        }
    }

    /// Pixel grid of a `width × height` image.
    pub fn image(width: usize, height: usize) -> Self {
        Self::new(0.0, 0.0, 1.0, width, height)
    }

    pub fn is_valid(&self) -> bool {
        self.cell_size > 0.0
            && self.cell_size.is_finite()
            && self.origin_x.is_finite()
            && self.origin_y.is_finite()
            && self.width > 0
            && self.height > 0
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn same_dims(&self, other: &GridSpec) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Center of cell `(col, row)` in frame coordinates.
    pub fn cell_center(&self, col: usize, row: usize) -> [f64; 2] {
        [
            self.origin_x + (col as f64 + 0.5) * self.cell_size,
            self.origin_y + (row as f64 + 0.5) * self.cell_size,
        ]
    }

    /// Continuous cell coordinates where integer values are cell centers.
    pub fn to_cell_coords(&self, p: [f64; 2]) -> [f64; 2] {
        [
            (p[0] - self.origin_x) / self.cell_size - 0.5,
            (p[1] - self.origin_y) / self.cell_size - 0.5,
        ]
    }

    /// Cell containing `p`, if any.
    pub fn cell_of(&self, p: [f64; 2]) -> Option<(usize, usize)> {
        if !(p[0].is_finite() && p[1].is_finite()) {
            return None;
        }
        let cx = ((p[0] - self.origin_x) / self.cell_size).floor();
        let cy = ((p[1] - self.origin_y) / self.cell_size).floor();
        if cx < 0.0 || cy < 0.0 || cx >= self.width as f64 || cy >= self.height as f64 {
            return None;
        }
        Some((cx as usize, cy as usize))
    }
}

/// Dense row-major 2D array.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Copy> Grid<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    /// Wraps a row-major buffer. Returns `None` if the length does not match.
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Option<Self> {
        (data.len() == width * height).then_some(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn get(&self, col: usize, row: usize) -> T {
        self.data[row * self.width + col]
    }

    /// Bounds-checked signed access.
    pub fn get_checked(&self, col: isize, row: isize) -> Option<T> {
        if col < 0 || row < 0 || col as usize >= self.width || row as usize >= self.height {
            None
        } else {
            Some(self.data[row as usize * self.width + col as usize])
        }
    }

    pub fn set(&mut self, col: usize, row: usize, value: T) {
        self.data[row * self.width + col] = value;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> Grid<U> {
        Grid {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

impl Grid<f64> {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    /// Row-major sequential sum.
    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Bilinear sample at continuous cell coordinates; samples outside the
    /// grid read as zero.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> f64 {
        if !(x.is_finite() && y.is_finite()) {
            return 0.0;
        }
        let x0 = x.floor();
        let y0 = y.floor();
        if x0 < -1.0 || y0 < -1.0 || x0 >= self.width as f64 || y0 >= self.height as f64 {
            return 0.0;
        }
        let fx = x - x0;
        let fy = y - y0;
        let (c0, r0) = (x0 as isize, y0 as isize);
        let v = |c: isize, r: isize| self.get_checked(c, r).unwrap_or(0.0);
        v(c0, r0) * (1.0 - fx) * (1.0 - fy)
            + v(c0 + 1, r0) * fx * (1.0 - fy)
            + v(c0, r0 + 1) * (1.0 - fx) * fy
            + v(c0 + 1, r0 + 1) * fx * fy
    }
}
