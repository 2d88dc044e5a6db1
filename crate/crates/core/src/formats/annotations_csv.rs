use std::fmt::Write as _;

use crate::annotations::HeadAnnotation;
use crate::grid::Space;

use super::ParseError;

pub const ANNOTATION_HEADER: &str = "frame_id,space,camera_id,x,y,person_id";

/// Writes annotations in the given order. Empty fields mark a missing camera
/// (plane rows) or person id.
pub fn write_annotations(heads: &[HeadAnnotation]) -> String {
    let mut out = String::with_capacity(32 * (heads.len() + 1));
    out.push_str(ANNOTATION_HEADER);
    out.push('\n');
    for h in heads {
        let (space, cam) = match h.space {
            Space::Plane => ("plane", String::new()),
            Space::Image(id) => ("image", id.to_string()),
        };
        let person = h.person_id.map(|p| p.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            h.frame_id, space, cam, h.position[0], h.position[1], person
        );
    }
    out
}

/// Parses an annotation CSV. Errors carry the 1-based line of the offending
/// record.
pub fn parse_annotations(text: &str) -> Result<Vec<HeadAnnotation>, ParseError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| ParseError::at(1, e.to_string()))?
        .clone();
    let expected: Vec<&str> = ANNOTATION_HEADER.split(',').collect();
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(ParseError::at(
            1,
            format!("expected header {ANNOTATION_HEADER:?}, found {:?}", headers.iter().collect::<Vec<_>>().join(",")),
        ));
    }

    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            ParseError::at(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| record.get(i).unwrap_or("");
        let bad = |what: &str, v: &str| ParseError::at(line, format!("invalid {what} {v:?}"));

        let frame_id: u64 = field(0).parse().map_err(|_| bad("frame_id", field(0)))?;
        let space = match (field(1), field(2)) {
            ("plane", "") => Space::Plane,
            ("plane", c) => return Err(bad("camera_id for a plane row", c)),
            ("image", c) => Space::Image(c.parse().map_err(|_| bad("camera_id", c))?),
            (s, _) => return Err(bad("space", s)),
        };
        let coord = |i: usize, what: &str| -> Result<f64, ParseError> {
            field(i)
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(what, field(i)))
        };
        let position = [coord(3, "x")?, coord(4, "y")?];
        let person_id = match field(5) {
            "" => None,
            p => Some(p.parse().map_err(|_| bad("person_id", p))?),
        };
        out.push(HeadAnnotation {
            frame_id,
            position,
            space,
            person_id,
        });
    }
    Ok(out)
}
