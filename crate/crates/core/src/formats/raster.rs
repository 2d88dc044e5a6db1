use crate::density::{DensityKind, DensityMap};
use crate::grid::{Grid, GridSpec, Space};

use super::ParseError;

pub const VSDM_MAGIC: &[u8] = b"VSDM1\n";

/// Serializes a density map. Cells are stored as `f32`.
pub fn write_density(map: &DensityMap) -> Vec<u8> {
    let (w, h) = map.dims();
    let header = format!(
        "{} {} {} {} {} {} {}\n",
        map.space,
        map.kind.as_str(),
        w,
        h,
        map.spec.origin_x,
        map.spec.origin_y,
        map.spec.cell_size
    );
    let mut out = Vec::with_capacity(VSDM_MAGIC.len() + header.len() + 4 * w * h);
    out.extend_from_slice(VSDM_MAGIC);
    out.extend_from_slice(header.as_bytes());
    for &v in map.grid.as_slice() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn parse_density(bytes: &[u8]) -> Result<DensityMap, ParseError> {
    let rest = bytes
        .strip_prefix(VSDM_MAGIC)
        .ok_or_else(|| ParseError::at(1, "bad magic, expected VSDM1"))?;
    let nl = rest
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| ParseError::at(2, "missing header line"))?;
    let header = std::str::from_utf8(&rest[..nl]).map_err(|_| ParseError::at(2, "header is not UTF-8"))?;
    let payload = &rest[nl + 1..];

    let tokens: Vec<&str> = header.split(' ').collect();
    if tokens.len() != 7 {
        return Err(ParseError::at(2, format!("expected 7 header fields, found {}", tokens.len())));
    }
    let err = |what: &str, tok: &str| ParseError::at(2, format!("invalid {what} {tok:?}"));
    let space: Space = tokens[0].parse().map_err(|e: String| ParseError::at(2, e))?;
    let kind = DensityKind::parse(tokens[1]).ok_or_else(|| err("kind", tokens[1]))?;
    let width: usize = tokens[2].parse().map_err(|_| err("width", tokens[2]))?;
    let height: usize = tokens[3].parse().map_err(|_| err("height", tokens[3]))?;
    let float = |i: usize, what: &str| -> Result<f64, ParseError> {
        tokens[i]
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| err(what, tokens[i]))
    };
    let spec = GridSpec::new(
        float(4, "origin_x")?,
        float(5, "origin_y")?,
        float(6, "cell_size")?,
        width,
        height,
    );
    if !spec.is_valid() {
        return Err(ParseError::at(2, format!("invalid grid {spec:?}")));
    }
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| ParseError::at(2, "raster too large"))?;
    if payload.len() != expected {
        return Err(ParseError::new(format!(
            "payload has {} bytes, expected {expected}",
            payload.len()
        )));
    }
    let data = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    let grid = Grid::from_vec(width, height, data).expect("length checked");
    Ok(DensityMap {
        grid,
        space,
        spec,
        kind,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DensityMap {
        let data = (0..12).map(|i| (i as f64 * 0.731).sin().abs() / 3.0).collect();
        DensityMap {
            grid: Grid::from_vec(4, 3, data).unwrap(),
            space: Space::Image(2),
            spec: GridSpec::new(-1.5, 0.1, 0.125, 4, 3),
            kind: DensityKind::Sdc,
        }
    }

    #[test]
    fn header_layout() {
        let bytes = write_density(&sample());
        let text = String::from_utf8_lossy(&bytes[..40]);
        assert!(text.starts_with("VSDM1\nimage:2 sdc 4 3 -1.5 0.1 0.125\n"), "{text}");
        assert_eq!(bytes.len(), "VSDM1\nimage:2 sdc 4 3 -1.5 0.1 0.125\n".len() + 48);
    }

    #[test]
    fn rewrite_is_byte_identical() {
        let first = write_density(&sample());
        let again = write_density(&parse_density(&first).unwrap());
        assert_eq!(first, again);
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_density(b"VSDM2\nplane nsdc 1 1 0 0 1\n\0\0\0\0").is_err());
        assert!(parse_density(b"VSDM1\nplane nsdc 1 1 0 0 1\n\0\0\0").is_err());
        assert!(parse_density(b"VSDM1\nplane foo 1 1 0 0 1\n\0\0\0\0").is_err());
        assert!(parse_density(b"VSDM1\nplane nsdc 1 1 0 0 0\n\0\0\0\0").is_err());
        assert!(parse_density(b"VSDM1\nplane nsdc 1 1 0 0 1\n\0\0\0\0").is_ok());
    }
}
