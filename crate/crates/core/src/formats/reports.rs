use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::annotations::ComplianceLabel;
use crate::metrics::EvalReport;
use crate::postprocess::RegionMask;

pub const COMPLIANCE_HEADER: &str = "frame_id,person,person_id,x,y,d_i,label";

/// One person of the compliance listing. `d_i` is `inf` for a person alone
/// in its frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplianceRow {
    pub frame_id: u64,
    pub person: usize,
    pub person_id: Option<u64>,
    pub position: [f64; 2],
    pub d_i: f64,
    pub label: ComplianceLabel,
}

pub fn write_compliance(rows: &[ComplianceRow]) -> String {
    let mut out = String::from(COMPLIANCE_HEADER);
    out.push('\n');
    for r in rows {
        let pid = r.person_id.map(|p| p.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.frame_id,
            r.person,
            pid,
            r.position[0],
            r.position[1],
            r.d_i,
            r.label.as_str()
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionRecord {
    pub frame_id: u64,
    pub region_id: usize,
    pub count: f64,
    pub risk: String,
    pub bbox: [usize; 4],
    pub area_cells: usize,
}

pub fn region_records(frame_id: u64, regions: &[RegionMask]) -> Vec<RegionRecord> {
    regions
        .iter()
        .map(|r| RegionRecord {
            frame_id,
            region_id: r.id,
            count: r.count,
            risk: r.risk.as_str().to_string(),
            bbox: r.bbox,
            area_cells: r.area_cells(),
        })
        .collect()
}

pub fn write_region_report(records: &[RegionRecord]) -> String {
    let mut s = serde_json::to_string_pretty(records).expect("regions serialize");
    s.push('\n');
    s
}

pub fn write_eval_report(report: &EvalReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

/// Ground truth emitted next to simulated annotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthSidecar {
    pub seed: u64,
    pub d_t: f64,
    pub frames: Vec<TruthFrame>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthFrame {
    pub frame_id: u64,
    pub seed: u64,
    pub n_sdc: usize,
    pub n_nsdc: usize,
    pub persons: Vec<TruthPerson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthPerson {
    pub person_id: u64,
    pub x: f64,
    pub y: f64,
    /// 0 for isolated persons, otherwise the 1-based cluster index.
    pub cluster: usize,
    pub label: String,
}

pub fn write_truth(truth: &TruthSidecar) -> String {
    let mut s = serde_json::to_string_pretty(truth).expect("truth serializes");
    s.push('\n');
    s
}
