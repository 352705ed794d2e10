//! PGM (P2 / P5) codec restricted to 8-bit images with maxval 255.
//!
//! Comments (`#` to end of line) are accepted anywhere whitespace is allowed
//! in the header, and between samples of a P2 body. Output headers are
//! canonical: `P5\n<w> <h>\n255\n`.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{ImageError, PgmError};
use crate::image::GrayImage;

/// Output encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PgmFormat {
    /// Binary samples.
    #[default]
    P5,
    /// ASCII samples.
    P2,
}

/// Maximum ASCII line length used when writing P2 bodies.
const P2_LINE_WIDTH: usize = 70;

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.data.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.data.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Option<&'a [u8]> {
        self.skip_space_and_comments();
        let start = self.pos;
        while let Some(&b) = self.data.get(self.pos) {
            if b.is_ascii_whitespace() || b == b'#' {
                break;
            }
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.data[start..self.pos])
    }

    fn header_number(&mut self, what: &str) -> Result<u32, PgmError> {
        let tok = self
            .token()
            .ok_or_else(|| PgmError::MalformedHeader(format!("missing {what}")))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<u32>().ok())
            .ok_or_else(|| {
                PgmError::MalformedHeader(format!(
                    "{what} is not a number: {:?}",
                    String::from_utf8_lossy(tok)
                ))
            })
    }
}

/// Decodes a P2 or P5 stream.
pub fn load_pgm(bytes: &[u8]) -> Result<GrayImage, PgmError> {
    let binary = match bytes.get(..2) {
        Some(b"P5") => true,
        Some(b"P2") => false,
        _ => return Err(PgmError::BadMagic),
    };
    let mut cur = Cursor {
        data: bytes,
        pos: 2,
    };
    if !cur
        .data
        .get(cur.pos)
        .is_some_and(|b| b.is_ascii_whitespace() || *b == b'#')
    {
        return Err(PgmError::BadMagic);
    }

    let width = cur.header_number("width")? as usize;
    let height = cur.header_number("height")? as usize;
    let maxval = cur.header_number("maxval")?;
    if width == 0 || height == 0 {
        return Err(PgmError::ZeroDimension { width, height });
    }
    if maxval != 255 {
        return Err(PgmError::UnsupportedMaxval(maxval));
    }
    let expected = width
        .checked_mul(height)
        .ok_or_else(|| PgmError::MalformedHeader("dimensions overflow".into()))?;

    let pixels = if binary {
        // exactly one whitespace byte separates maxval from the raster
        match cur.data.get(cur.pos) {
            Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
            _ => {
                return Err(PgmError::MalformedHeader(
                    "missing whitespace after maxval".into(),
                ))
            }
        }
        let body = &cur.data[cur.pos..];
        if body.len() < expected {
            return Err(PgmError::Truncated {
                expected,
                found: body.len(),
            });
        }
        body[..expected].to_vec()
    } else {
        let mut pixels = Vec::with_capacity(expected);
        while pixels.len() < expected {
            let Some(tok) = cur.token() else {
                return Err(PgmError::Truncated {
                    expected,
                    found: pixels.len(),
                });
            };
            let value = std::str::from_utf8(tok)
                .ok()
                .and_then(|s| s.parse::<u32>().ok())
                .filter(|v| *v <= 255)
                .ok_or_else(|| PgmError::BadSample(String::from_utf8_lossy(tok).into_owned()))?;
            pixels.push(value as u8);
        }
        pixels
    };

    Ok(GrayImage::new(width, height, pixels).expect("dimensions validated above"))
}

/// Encodes an image with a canonical header.
pub fn save_pgm(img: &GrayImage, format: PgmFormat) -> Vec<u8> {
    let mut out = Vec::with_capacity(img.len() * if format == PgmFormat::P5 { 1 } else { 4 } + 20);
    let magic = match format {
        PgmFormat::P5 => "P5",
        PgmFormat::P2 => "P2",
    };
    write!(out, "{magic}\n{} {}\n255\n", img.width(), img.height()).expect("write to Vec");
    match format {
        PgmFormat::P5 => out.extend_from_slice(img.pixels()),
        PgmFormat::P2 => {
            let mut line_len = 0;
            for v in img.pixels() {
                let s = v.to_string();
                if line_len > 0 && line_len + 1 + s.len() > P2_LINE_WIDTH {
                    out.push(b'\n');
                    line_len = 0;
                }
                if line_len > 0 {
                    out.push(b' ');
                    line_len += 1;
                }
                out.extend_from_slice(s.as_bytes());
                line_len += s.len();
            }
            out.push(b'\n');
        }
    }
    out
}

pub fn read_pgm_file(path: impl AsRef<Path>) -> Result<GrayImage, ImageError> {
    let bytes = fs::read(path)?;
    Ok(load_pgm(&bytes)?)
}

pub fn write_pgm_file(
    path: impl AsRef<Path>,
    img: &GrayImage,
    format: PgmFormat,
) -> Result<(), ImageError> {
    fs::write(path, save_pgm(img, format))?;
    Ok(())
}
