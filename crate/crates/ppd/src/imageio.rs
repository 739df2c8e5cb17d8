//! Grayscale image files.
//!
//! Binary PGM (`P5`, maxval 255) is read and written bit-exactly. 8-bit PNG is read
//! only; colour PNGs are converted to luma with integer BT.601 weights,
//! `Y = (299 R + 587 G + 114 B + 500) / 1000`, unless strict mode is on, in which case
//! they are rejected. Alpha channels are dropped.

use std::fs;
use std::io::{BufReader, Cursor};
use std::path::Path;

use ppd_core::{GrayImage, ImageError};

#[derive(Debug, thiserror::Error)]
pub enum ImageIoError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("unsupported image format (expected binary PGM or PNG)")]
    UnsupportedFormat,
    #[error("unsupported maxval {0} (only 255 is accepted)")]
    UnsupportedMaxval(u32),
    #[error("malformed PGM: {0}")]
    Malformed(&'static str),
    #[error("unsupported PNG: {0}")]
    UnsupportedPng(String),
    #[error("colour image rejected in strict mode")]
    ColorInStrictMode,
    #[error(transparent)]
    Image(#[from] ImageError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// Reject colour PNGs instead of converting them.
    pub strict: bool,
}

pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage, ImageIoError> {
    load_image_with(path, LoadOptions::default())
}

pub fn load_image_with(path: impl AsRef<Path>, opts: LoadOptions) -> Result<GrayImage, ImageIoError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| ImageIoError::Io { path: path.display().to_string(), source })?;
    decode_image(&bytes, opts)
}

/// Decodes PGM or PNG bytes, detected by magic number.
pub fn decode_image(bytes: &[u8], opts: LoadOptions) -> Result<GrayImage, ImageIoError> {
    if bytes.starts_with(b"P5") {
        decode_pgm(bytes)
    } else if bytes.starts_with(b"\x89PNG\r\n\x1a\n") {
        decode_png(bytes, opts)
    } else {
        Err(ImageIoError::UnsupportedFormat)
    }
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderReader<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self) -> Result<u32, ImageIoError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(ImageIoError::Malformed("expected a decimal header field"));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or(ImageIoError::Malformed("header field out of range"))
    }
}

pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage, ImageIoError> {
    if !bytes.starts_with(b"P5") {
        return Err(ImageIoError::UnsupportedFormat);
    }
    let mut r = HeaderReader { bytes, pos: 2 };
    let width = r.number()? as usize;
    let height = r.number()? as usize;
    let maxval = r.number()?;
    if maxval != 255 {
        return Err(ImageIoError::UnsupportedMaxval(maxval));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(r.pos) {
        Some(b) if b.is_ascii_whitespace() => r.pos += 1,
        _ => return Err(ImageIoError::Malformed("missing whitespace after maxval")),
    }
    let n = width.checked_mul(height).ok_or(ImageIoError::Malformed("dimensions overflow"))?;
    let data = bytes.get(r.pos..r.pos + n).ok_or(ImageIoError::Malformed("truncated raster"))?;
    Ok(GrayImage::new(width, height, data.to_vec())?)
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

pub fn save_image(img: &GrayImage, path: impl AsRef<Path>) -> Result<(), ImageIoError> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(img)).map_err(|source| ImageIoError::Io { path: path.display().to_string(), source })
}

/// Integer BT.601 luma with round-half-up.
#[inline]
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    ((299 * u32::from(r) + 587 * u32::from(g) + 114 * u32::from(b) + 500) / 1000) as u8
}

fn decode_png(bytes: &[u8], opts: LoadOptions) -> Result<GrayImage, ImageIoError> {
    let png_err = |e: png::DecodingError| ImageIoError::UnsupportedPng(e.to_string());
    let mut decoder = png::Decoder::new(BufReader::new(Cursor::new(bytes)));
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(png_err)?;
    if reader.info().bit_depth == png::BitDepth::Sixteen {
        return Err(ImageIoError::UnsupportedPng("16-bit samples".into()));
    }
    let size = reader.output_buffer_size().ok_or_else(|| ImageIoError::UnsupportedPng("image too large".into()))?;
    let mut buf = vec![0u8; size];
    let frame = reader.next_frame(&mut buf).map_err(png_err)?;
    let (w, h) = (frame.width as usize, frame.height as usize);
    let buf = &buf[..frame.buffer_size()];
    let stride = frame.line_size;
    let channels = frame.color_type.samples();
    let color = matches!(frame.color_type, png::ColorType::Rgb | png::ColorType::Rgba);
    if color && opts.strict {
        return Err(ImageIoError::ColorInStrictMode);
    }
    let mut pixels = Vec::with_capacity(w * h);
    for row in buf.chunks(stride).take(h) {
        for px in row[..w * channels].chunks_exact(channels) {
            pixels.push(if color { luma(px[0], px[1], px[2]) } else { px[0] });
        }
    }
    Ok(GrayImage::new(w, h, pixels)?)
}
