//! Pinhole cameras and the mapping between each image plane and the head
//! plane.
//!
//! World frame: `z` up, the head plane is `z = h_h`. Extrinsics map world to
//! camera, `X_c = R·X_w + t`. For a head-plane point `(x, y, h_h)` this gives
//! `X_c = x·r1 + y·r2 + (h_h·r3 + t)`, so the plane-induced homography is
//!
//! ```text
//! H = K · [ r1  r2  h_h·r3 + t ]
//! ```
//!
//! mapping `(x, y, 1)` on the plane to homogeneous pixels. Because the last
//! row of `K` is `(0, 0, 1)`, the homogeneous `w` of `H·(x, y, 1)` is the
//! camera-frame depth of the point, which tells us whether it is in front of
//! the camera.

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

use crate::grid::{CameraId, Grid, GridSpec};

/// Smallest |w| accepted during homogeneous normalization.
pub const W_EPSILON: f64 = 1e-12;
/// Smallest |det H| accepted for a plane homography.
pub const DET_EPSILON: f64 = 1e-12;
/// Tolerance for rotation orthonormality and unit determinant.
pub const ROTATION_TOLERANCE: f64 = 1e-9;
/// Minimum vertical clearance between a camera center and the head plane.
pub const CENTER_CLEARANCE: f64 = 1e-6;

/// Average head height used by default, meters.
pub const DEFAULT_HEAD_HEIGHT: f64 = 1.75;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("invalid intrinsics: {0}")]
    InvalidIntrinsics(String),
    #[error("invalid rotation: {0}")]
    InvalidRotation(String),
    #[error("invalid image size {width}x{height}")]
    InvalidImageSize { width: usize, height: usize },
    #[error("invalid head plane: {0}")]
    InvalidPlane(String),
    #[error("invalid raster grid: {0}")]
    InvalidGrid(String),
    #[error("degenerate camera: {0}")]
    DegenerateCamera(String),
    #[error("point at infinity (|w| = {0:e})")]
    PointAtInfinity(f64),
    #[error("non-finite point ({0}, {1})")]
    NonFinite(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    /// Off-diagonal `K[0][1]` entry.
    pub skew: f64,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64) -> Result<Self, GeometryError> {
        Self::with_skew(fx, fy, cx, cy, 0.0)
    }

    pub fn with_skew(fx: f64, fy: f64, cx: f64, cy: f64, skew: f64) -> Result<Self, GeometryError> {
        let k = Self {
            fx,
            fy,
            cx,
            cy,
            skew,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let all_finite = [self.fx, self.fy, self.cx, self.cy, self.skew]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(GeometryError::InvalidIntrinsics("non-finite entry".into()));
        }
        if self.fx <= 0.0 || self.fy <= 0.0 {
            return Err(GeometryError::InvalidIntrinsics(format!(
                "focal lengths must be positive (fx = {}, fy = {})",
                self.fx, self.fy
            )));
        }
        Ok(())
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.fx, self.skew, self.cx, //
            0.0, self.fy, self.cy, //
            0.0, 0.0, 1.0,
        )
    }
}

/// World-to-camera rigid transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraExtrinsics {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl CameraExtrinsics {
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self, GeometryError> {
        let e = Self {
            rotation,
            translation,
        };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if self.rotation.iter().chain(self.translation.iter()).any(|v| !v.is_finite()) {
            return Err(GeometryError::InvalidRotation("non-finite entry".into()));
        }
        let off = (self.rotation.transpose() * self.rotation - Matrix3::identity()).amax();
        if off > ROTATION_TOLERANCE {
            return Err(GeometryError::InvalidRotation(format!(
                "R^T R deviates from identity by {off:e}"
            )));
        }
        let det = self.rotation.determinant();
        if (det - 1.0).abs() > ROTATION_TOLERANCE {
            return Err(GeometryError::InvalidRotation(format!("det(R) = {det}")));
        }
        Ok(())
    }

    /// Camera center in world coordinates, `-Rᵀ t`.
    pub fn center(&self) -> Vector3<f64> {
        -(self.rotation.transpose() * self.translation)
    }

    /// Extrinsics of a camera at `eye` looking at `target`, with image `y`
    /// pointing as close to world `-z` as possible (upright image).
    pub fn look_at(eye: Vector3<f64>, target: Vector3<f64>) -> Result<Self, GeometryError> {
        let forward = target - eye;
        if forward.norm() < 1e-12 {
            return Err(GeometryError::DegenerateCamera("eye coincides with target".into()));
        }
        let z = forward.normalize();
        let down = Vector3::new(0.0, 0.0, -1.0);
        let x = down.cross(&z);
        if x.norm() < 1e-9 {
            // looking straight up or down: pick world +x as image x
            let x = Vector3::new(1.0, 0.0, 0.0);
            let y = z.cross(&x);
            let r = Matrix3::from_rows(&[x.transpose(), y.transpose(), z.transpose()]);
            return Self::new(r, -(r * eye));
        }
        let x = x.normalize();
        let y = z.cross(&x);
        let r = Matrix3::from_rows(&[x.transpose(), y.transpose(), z.transpose()]);
        Self::new(r, -(r * eye))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraModel {
    pub id: CameraId,
    pub intrinsics: CameraIntrinsics,
    pub extrinsics: CameraExtrinsics,
    pub width: usize,
    pub height: usize,
}

impl CameraModel {
    pub fn new(
        id: CameraId,
        intrinsics: CameraIntrinsics,
        extrinsics: CameraExtrinsics,
        width: usize,
        height: usize,
    ) -> Result<Self, GeometryError> {
        let cam = Self {
            id,
            intrinsics,
            extrinsics,
            width,
            height,
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        self.intrinsics.validate()?;
        self.extrinsics.validate()?;
        if self.width == 0 || self.height == 0 {
            return Err(GeometryError::InvalidImageSize {
                width: self.width,
                height: self.height,
            });
        }
        Ok(())
    }

    pub fn image_grid(&self) -> GridSpec {
        GridSpec::image(self.width, self.height)
    }

    pub fn contains_pixel(&self, p: [f64; 2]) -> bool {
        p[0] >= 0.0 && p[1] >= 0.0 && p[0] < self.width as f64 && p[1] < self.height as f64
    }
}

/// Head plane `z = h_h` with its raster discretization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadPlane {
    pub head_height: f64,
    pub grid: GridSpec,
}

impl HeadPlane {
    pub fn new(head_height: f64, grid: GridSpec) -> Result<Self, GeometryError> {
        let plane = Self { head_height, grid };
        plane.validate()?;
        Ok(plane)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.head_height > 0.0 && self.head_height.is_finite()) {
            return Err(GeometryError::InvalidPlane(format!(
                "head height must be positive, got {}",
                self.head_height
            )));
        }
        if !self.grid.is_valid() {
            return Err(GeometryError::InvalidPlane(format!("invalid grid {:?}", self.grid)));
        }
        Ok(())
    }
}

/// Homography from head-plane coordinates to image pixels and its inverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneHomography {
    h: Matrix3<f64>,
    h_inv: Matrix3<f64>,
    camera: Option<CameraId>,
}

impl PlaneHomography {
    /// Wraps an explicit plane→image matrix.
    pub fn from_matrix(h: Matrix3<f64>, camera: Option<CameraId>) -> Result<Self, GeometryError> {
        if h.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::DegenerateCamera("non-finite homography".into()));
        }
        let det = h.determinant();
        if det.abs() <= DET_EPSILON {
            return Err(GeometryError::DegenerateCamera(format!("|det H| = {:e}", det.abs())));
        }
        let h_inv = h
            .try_inverse()
            .ok_or_else(|| GeometryError::DegenerateCamera("homography is not invertible".into()))?;
        Ok(Self { h, h_inv, camera })
    }

    /// Plane → image matrix.
    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.h
    }

    /// Image → plane matrix.
    pub fn inverse(&self) -> &Matrix3<f64> {
        &self.h_inv
    }

    pub fn camera(&self) -> Option<CameraId> {
        self.camera
    }

    /// Homogeneous image point of a plane point; `w` is the camera depth.
    pub fn project_homogeneous(&self, p_plane: [f64; 2]) -> Vector3<f64> {
        self.h * Vector3::new(p_plane[0], p_plane[1], 1.0)
    }

    /// Whether the plane point lies in front of the camera.
    pub fn is_in_front(&self, p_plane: [f64; 2]) -> bool {
        self.project_homogeneous(p_plane).z > 0.0
    }
}

/// Builds `H = K·[r1 r2 h_h·r3 + t]` for a camera and the head plane.
pub fn plane_homography(
    camera: &CameraModel,
    plane: &HeadPlane,
) -> Result<PlaneHomography, GeometryError> {
    camera.validate()?;
    plane.validate()?;
    let center = camera.extrinsics.center();
    if (center.z - plane.head_height).abs() <= CENTER_CLEARANCE {
        return Err(GeometryError::DegenerateCamera(format!(
            "camera {} center z = {} lies on the head plane z = {}",
            camera.id, center.z, plane.head_height
        )));
    }
    let r = &camera.extrinsics.rotation;
    let t = &camera.extrinsics.translation;
    let third = r.column(2) * plane.head_height + t;
    let m = Matrix3::from_columns(&[r.column(0).into_owned(), r.column(1).into_owned(), third]);
    PlaneHomography::from_matrix(camera.intrinsics.matrix() * m, Some(camera.id))
}

fn normalize_homogeneous(v: Vector3<f64>) -> Result<[f64; 2], GeometryError> {
    if !(v.z.abs() >= W_EPSILON) {
        return Err(GeometryError::PointAtInfinity(v.z.abs()));
    }
    Ok([v.x / v.z, v.y / v.z])
}

fn check_finite(p: [f64; 2]) -> Result<(), GeometryError> {
    if p[0].is_finite() && p[1].is_finite() {
        Ok(())
    } else {
        Err(GeometryError::NonFinite(p[0], p[1]))
    }
}

/// Maps a pixel onto the head plane, meters.
pub fn image_to_plane(p_img: [f64; 2], hom: &PlaneHomography) -> Result<[f64; 2], GeometryError> {
    check_finite(p_img)?;
    normalize_homogeneous(hom.h_inv * Vector3::new(p_img[0], p_img[1], 1.0))
}

/// Maps a head-plane point to its pixel.
pub fn plane_to_image(p_plane: [f64; 2], hom: &PlaneHomography) -> Result<[f64; 2], GeometryError> {
    check_finite(p_plane)?;
    normalize_homogeneous(hom.project_homogeneous(p_plane))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WarpDirection {
    /// Source raster is in the image, target grid on the head plane.
    ImageToPlane,
    /// Source raster is on the head plane, target grid in the image.
    PlaneToImage,
}

/// Resamples `src` onto `target` through the homography.
///
/// Each target cell center is mapped into the source frame and read with
/// bilinear interpolation. Samples outside the source grid, behind the
/// camera, or at infinity are zero.
pub fn warp_raster(
    src: &Grid<f64>,
    src_spec: &GridSpec,
    hom: &PlaneHomography,
    direction: WarpDirection,
    target: &GridSpec,
) -> Result<Grid<f64>, GeometryError> {
    if !target.is_valid() {
        return Err(GeometryError::InvalidGrid(format!("target {target:?}")));
    }
    if !src_spec.is_valid() || src.dims() != (src_spec.width, src_spec.height) {
        return Err(GeometryError::InvalidGrid(format!("source {src_spec:?}")));
    }
    let mut out = Grid::zeros(target.width, target.height);
    for row in 0..target.height {
        for col in 0..target.width {
            let p = target.cell_center(col, row);
            let Some(q) = map_to_source(p, hom, direction) else {
                continue;
            };
            let [sx, sy] = src_spec.to_cell_coords(q);
            out.set(col, row, src.sample_bilinear(sx, sy));
        }
    }
    Ok(out)
}

/// Source-frame location of a target point, or `None` when it has no valid
/// preimage in front of the camera.
pub(crate) fn map_to_source(
    p: [f64; 2],
    hom: &PlaneHomography,
    direction: WarpDirection,
) -> Option<[f64; 2]> {
    let v = match direction {
        WarpDirection::ImageToPlane => hom.h * Vector3::new(p[0], p[1], 1.0),
        WarpDirection::PlaneToImage => hom.h_inv * Vector3::new(p[0], p[1], 1.0),
    };
    // For image → plane, depth is 1 / w of the normalized preimage, so the
    // sign test is the same in both directions.
    if v.z < W_EPSILON {
        return None;
    }
    Some([v.x / v.z, v.y / v.z])
}
