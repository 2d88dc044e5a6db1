use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::geometry::{CameraExtrinsics, CameraIntrinsics, CameraModel, GeometryError, HeadPlane};
use crate::grid::{CameraId, GridSpec};

use super::ParseError;

/// One camera as stored in a calibration file. `R` is row-major and maps
/// world to camera coordinates together with `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraRecord {
    pub id: CameraId,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    #[serde(default)]
    pub skew: f64,
    #[serde(rename = "R")]
    pub r: [f64; 9],
    pub t: [f64; 3],
    pub width: usize,
    pub height: usize,
}

impl CameraRecord {
    pub fn from_camera(cam: &CameraModel) -> Self {
        let rot = &cam.extrinsics.rotation;
        let mut r = [0.0; 9];
        for i in 0..3 {
            for j in 0..3 {
                r[3 * i + j] = rot[(i, j)];
            }
        }
        let t = &cam.extrinsics.translation;
        Self {
            id: cam.id,
            fx: cam.intrinsics.fx,
            fy: cam.intrinsics.fy,
            cx: cam.intrinsics.cx,
            cy: cam.intrinsics.cy,
            skew: cam.intrinsics.skew,
            r,
            t: [t.x, t.y, t.z],
            width: cam.width,
            height: cam.height,
        }
    }

    pub fn to_camera(&self) -> Result<CameraModel, GeometryError> {
        let intrinsics = CameraIntrinsics::with_skew(self.fx, self.fy, self.cx, self.cy, self.skew)?;
        let extrinsics = CameraExtrinsics::new(
            Matrix3::from_row_slice(&self.r),
            Vector3::new(self.t[0], self.t[1], self.t[2]),
        )?;
        CameraModel::new(self.id, intrinsics, extrinsics, self.width, self.height)
    }
}

/// Head plane and its raster grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneRecord {
    pub h_h: f64,
    pub origin_x: f64,
    pub origin_y: f64,
    pub cell_size: f64,
    pub cells_x: usize,
    pub cells_y: usize,
}

impl PlaneRecord {
    pub fn from_plane(p: &HeadPlane) -> Self {
        Self {
            h_h: p.head_height,
            origin_x: p.grid.origin_x,
            origin_y: p.grid.origin_y,
            cell_size: p.grid.cell_size,
            cells_x: p.grid.width,
            cells_y: p.grid.height,
        }
    }

    pub fn to_plane(&self) -> Result<HeadPlane, GeometryError> {
        HeadPlane::new(
            self.h_h,
            GridSpec::new(self.origin_x, self.origin_y, self.cell_size, self.cells_x, self.cells_y),
        )
    }
}

/// Parses the JSON text of a calibration file. Camera validity is checked
/// separately by [`CameraRecord::to_camera`].
pub fn parse_calibration(text: &str) -> Result<Vec<CameraRecord>, ParseError> {
    let records: Vec<CameraRecord> =
        serde_json::from_str(text).map_err(|e| ParseError::at(e.line(), e.to_string()))?;
    let mut ids: Vec<CameraId> = records.iter().map(|r| r.id).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(ParseError::new(format!("duplicate camera id {}", w[0])));
    }
    Ok(records)
}

pub fn write_calibration(records: &[CameraRecord]) -> String {
    let mut s = serde_json::to_string_pretty(records).expect("calibration serializes");
    s.push('\n');
    s
}
