use crate::grid::{Grid, Space};
use crate::maskgen::BinaryMask;

use super::ParseError;

/// 8-bit grayscale image with the optional space tag from its header.
#[derive(Debug, Clone, PartialEq)]
pub struct PgmImage {
    pub pixels: Grid<u8>,
    pub space: Option<Space>,
}

impl PgmImage {
    /// Mask file: foreground 255, background 0.
    pub fn from_mask(mask: &BinaryMask) -> Self {
        Self {
            pixels: mask.grid.map(|v| if v != 0 { 255 } else { 0 }),
            space: Some(mask.space),
        }
    }

    /// Any non-zero pixel is foreground.
    pub fn to_mask_grid(&self) -> Grid<u8> {
        self.pixels.map(|v| (v != 0) as u8)
    }
}

fn tag(space: Space) -> String {
    match space {
        Space::Plane => "# VSD space=plane cam=-".to_string(),
        Space::Image(id) => format!("# VSD space=image cam={id}"),
    }
}

fn parse_tag(comment: &str) -> Option<Space> {
    let body = comment.strip_prefix("# VSD ")?;
    let mut space = None;
    let mut cam = None;
    for kv in body.split_whitespace() {
        match kv.split_once('=')? {
            ("space", v) => space = Some(v),
            ("cam", v) => cam = Some(v),
            _ => {}
        }
    }
    match (space?, cam) {
        ("plane", _) => Some(Space::Plane),
        ("image", Some(id)) => id.parse().ok().map(Space::Image),
        _ => None,
    }
}

pub fn write_pgm(img: &PgmImage) -> Vec<u8> {
    let (w, h) = img.pixels.dims();
    let mut out = Vec::with_capacity(64 + w * h);
    out.extend_from_slice(b"P5\n");
    if let Some(space) = img.space {
        out.extend_from_slice(tag(space).as_bytes());
        out.push(b'\n');
    }
    out.extend_from_slice(format!("{w} {h}\n255\n").as_bytes());
    out.extend_from_slice(img.pixels.as_slice());
    out
}

/// Reads a binary PGM with maxval ≤ 255.
pub fn parse_pgm(bytes: &[u8]) -> Result<PgmImage, ParseError> {
    let mut pos = 0usize;
    let mut line = 1usize;
    let mut space = None;

    // Reads the next header token, skipping whitespace and comment lines.
    let mut next_token = |pos: &mut usize, line: &mut usize| -> Result<String, ParseError> {
        loop {
            match bytes.get(*pos) {
                None => return Err(ParseError::at(*line, "truncated PGM header")),
                Some(b'#') => {
                    let end = bytes[*pos..]
                        .iter()
                        .position(|&b| b == b'\n')
                        .map_or(bytes.len(), |e| *pos + e);
                    let comment = String::from_utf8_lossy(&bytes[*pos..end]);
                    if let Some(s) = parse_tag(&comment) {
                        space = Some(s);
                    }
                    *pos = end;
                }
                Some(b) if b.is_ascii_whitespace() => {
                    if *b == b'\n' {
                        *line += 1;
                    }
                    *pos += 1;
                }
                Some(_) => break,
            }
        }
        let start = *pos;
        while bytes.get(*pos).is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#') {
            *pos += 1;
        }
        Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
    };

    let magic = next_token(&mut pos, &mut line)?;
    if magic != "P5" {
        return Err(ParseError::at(1, format!("bad magic {magic:?}, expected P5")));
    }
    let mut number = |what: &str, pos: &mut usize, line: &mut usize| -> Result<usize, ParseError> {
        let tok = next_token(pos, line)?;
        tok.parse()
            .map_err(|_| ParseError::at(*line, format!("invalid {what} {tok:?}")))
    };
    let width = number("width", &mut pos, &mut line)?;
    let height = number("height", &mut pos, &mut line)?;
    let maxval = number("maxval", &mut pos, &mut line)?;
    if width == 0 || height == 0 {
        return Err(ParseError::at(line, "empty image"));
    }
    if maxval == 0 || maxval > 255 {
        return Err(ParseError::at(line, format!("unsupported maxval {maxval}")));
    }
    // exactly one whitespace byte separates the header from the pixels
    if !bytes.get(pos).is_some_and(|b| b.is_ascii_whitespace()) {
        return Err(ParseError::at(line, "missing separator after maxval"));
    }
    pos += 1;
    let data = &bytes[pos..];
    if data.len() != width * height {
        return Err(ParseError::new(format!(
            "pixel data has {} bytes, expected {}",
            data.len(),
            width * height
        )));
    }
    Ok(PgmImage {
        pixels: Grid::from_vec(width, height, data.to_vec()).expect("length checked"),
        space,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_round_trip() {
        let grid = Grid::from_vec(3, 2, vec![0, 255, 0, 255, 255, 0]).unwrap();
        for space in [Space::Plane, Space::Image(4)] {
            let img = PgmImage {
                pixels: grid.clone(),
                space: Some(space),
            };
            let bytes = write_pgm(&img);
            let back = parse_pgm(&bytes).unwrap();
            assert_eq!(back, img);
            assert_eq!(write_pgm(&back), bytes);
        }
        let bytes = write_pgm(&PgmImage {
            pixels: grid,
            space: Some(Space::Image(4)),
        });
        assert!(bytes.starts_with(b"P5\n# VSD space=image cam=4\n3 2\n255\n"));
    }

    #[test]
    fn foreign_pgm_without_tag() {
        let bytes = b"P5\n# made elsewhere\n2 1\n255\n\x00\x80";
        let img = parse_pgm(bytes).unwrap();
        assert_eq!(img.space, None);
        assert_eq!(img.to_mask_grid().as_slice(), &[0, 1]);
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_pgm(b"P2\n1 1\n255\n0").is_err());
        assert!(parse_pgm(b"P5\n2 2\n255\n\0").is_err());
        assert!(parse_pgm(b"P5\n1 1\n65535\n\0\0").is_err());
        assert!(parse_pgm(b"P5\n1").is_err());
    }
}
