//! On-disk formats.
//!
//! | file | layout |
//! |------|--------|
//! | density raster | `VSDM1\n`, header line `space kind width height origin_x origin_y cell_size\n`, then `width·height` little-endian `f32`, row-major |
//! | mask / overlay | binary PGM (`P5`), maxval 255, comment `# VSD space=<image\|plane> cam=<id>` |
//! | calibration | JSON array of `{"id","fx","fy","cx","cy","skew","R","t","width","height"}` |
//! | annotations | CSV `frame_id,space,camera_id,x,y,person_id` |
//!
//! Every writer is canonical: reading a written file and writing it again
//! reproduces the same bytes. Decimal numbers use the shortest
//! representation that parses back to the same `f64`.

mod annotations_csv;
mod calibration;
mod pgm;
mod raster;
mod reports;

pub use annotations_csv::{parse_annotations, write_annotations, ANNOTATION_HEADER};
pub use calibration::{parse_calibration, write_calibration, CameraRecord, PlaneRecord};
pub use pgm::{parse_pgm, write_pgm, PgmImage};
pub use raster::{parse_density, write_density, VSDM_MAGIC};
pub use reports::{
    region_records, write_compliance, write_eval_report, write_region_report, write_truth,
    ComplianceRow, RegionRecord, TruthFrame, TruthPerson, TruthSidecar, COMPLIANCE_HEADER,
};

use std::fmt;

/// A malformed input, with the 1-based line when one applies.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: Option<usize>,
    pub message: String,
}

impl ParseError {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            line: None,
            message: message.into(),
        }
    }

    pub fn at(line: usize, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ParseError {}
