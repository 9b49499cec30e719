//! Binary 8-bit PGM (`P5`).
//!
//! The header may contain `#` comments anywhere between tokens. Files with a
//! maximum value below 255 are rescaled into `[0, 1]` on read; writing always
//! uses 255.

use std::fs;
use std::path::Path;

use wearcast_core::Image;

use crate::error::{Error, Result};

pub fn encode(img: &Image) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.to_levels());
    out
}

pub fn decode(bytes: &[u8]) -> std::result::Result<Image, String> {
    let mut pos = 0;
    let magic = token(bytes, &mut pos)?;
    if magic != b"P5" {
        return Err(format!("expected magic P5, found {:?}", String::from_utf8_lossy(magic)));
    }
    let width = number(bytes, &mut pos, "width")?;
    let height = number(bytes, &mut pos, "height")?;
    let maxval = number(bytes, &mut pos, "maximum value")?;
    if width == 0 || height == 0 {
        return Err(format!("empty raster {width}×{height}"));
    }
    if maxval == 0 || maxval > 255 {
        return Err(format!("maximum value {maxval} is not an 8-bit depth"));
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err("missing separator before pixel data".into()),
    }
    let n = width * height;
    let data = bytes
        .get(pos..pos + n)
        .ok_or_else(|| format!("raster holds {} of {n} bytes", bytes.len() - pos))?;
    if maxval == 255 {
        return Image::from_levels(width, height, data).map_err(|e| e.to_string());
    }
    if let Some(v) = data.iter().find(|&&v| v as usize > maxval) {
        return Err(format!("sample {v} exceeds maximum value {maxval}"));
    }
    let pixels = data.iter().map(|&v| v as f32 / maxval as f32).collect();
    Ok(Image::new(width, height, pixels).map_err(|e| e.to_string())?.quantized())
}

fn token<'a>(bytes: &'a [u8], pos: &mut usize) -> std::result::Result<&'a [u8], String> {
    loop {
        while bytes.get(*pos).is_some_and(u8::is_ascii_whitespace) {
            *pos += 1;
        }
        if bytes.get(*pos) == Some(&b'#') {
            while bytes.get(*pos).is_some_and(|&b| b != b'\n') {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#') {
        *pos += 1;
    }
    if start == *pos {
        return Err("header ends early".into());
    }
    Ok(&bytes[start..*pos])
}

fn number(bytes: &[u8], pos: &mut usize, what: &str) -> std::result::Result<usize, String> {
    let t = token(bytes, pos)?;
    std::str::from_utf8(t)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| format!("bad {what} {:?}", String::from_utf8_lossy(t)))
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|reason| Error::format(path, reason))
}

pub fn write_pgm(path: impl AsRef<Path>, img: &Image) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode(img)).map_err(|e| Error::io(path, e))
}
