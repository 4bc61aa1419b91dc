//! 8-bit image readers/writers: binary PPM (P6), PGM (P5), and PNG.
//!
//! Readers sniff the payload (magic bytes), writers pick the format from the
//! file extension. Samples map to f32 via v/255; writing rounds half up after
//! clamping to [0, 1].

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::color::{ColorSpace, ImageBuffer};

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed {format} header: {reason}")]
    Format { format: &'static str, reason: String },
    #[error("unsupported image: {reason}")]
    Unsupported { reason: String },
    #[error("png decode error: {0}")]
    PngDecode(#[from] png::DecodingError),
    #[error("png encode error: {0}")]
    PngEncode(#[from] png::EncodingError),
}

const PNG_SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', b'\r', b'\n', 0x1a, b'\n'];

/// Read a PPM/PGM/PNG file, dispatching on its magic bytes.
pub fn read_image(path: &Path) -> Result<ImageBuffer, ImageError> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(&PNG_SIGNATURE) {
        return read_png(&bytes);
    }
    match bytes.get(..2) {
        Some(b"P6") => read_pnm(&bytes, ColorSpace::Rgb),
        Some(b"P5") => read_pnm(&bytes, ColorSpace::Y),
        _ => Err(ImageError::Unsupported {
            reason: format!("{} is not a PNG, PPM (P6), or PGM (P5) file", path.display()),
        }),
    }
}

/// Write PPM/PGM/PNG based on the extension (.ppm/.pgm/.png). RGB images can
/// go to .ppm or .png; single-channel to .pgm or .png.
pub fn write_image(path: &Path, img: &ImageBuffer) -> Result<(), ImageError> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    let bytes = match (ext.as_str(), img.channels) {
        ("ppm", 3) | ("pgm", 1) => encode_pnm(img),
        ("png", 1) | ("png", 3) => encode_png(img)?,
        (e, c) => {
            return Err(ImageError::Unsupported {
                reason: format!("cannot write a {c}-channel image to .{e}"),
            })
        }
    };
    // Temp-and-rename so readers never observe a partially written file.
    let tmp = path.with_extension(format!("{ext}.tmp"));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn to_u8(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

// ── PNM (PPM/PGM) ────────────────────────────────────────────────────────

/// Pull the next whitespace-delimited token, skipping `#` comments.
fn pnm_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    if *pos >= bytes.len() {
        return None;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    Some(&bytes[start..*pos])
}

fn pnm_number(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize, ImageError> {
    let tok = pnm_token(bytes, pos).ok_or_else(|| ImageError::Format {
        format: "pnm",
        reason: format!("missing {what}"),
    })?;
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| ImageError::Format {
            format: "pnm",
            reason: format!("invalid {what}: {}", String::from_utf8_lossy(tok)),
        })
}

fn read_pnm(bytes: &[u8], space: ColorSpace) -> Result<ImageBuffer, ImageError> {
    let channels = space.channels();
    let mut pos = 2; // past the magic
    let width = pnm_number(bytes, &mut pos, "width")?;
    let height = pnm_number(bytes, &mut pos, "height")?;
    let maxval = pnm_number(bytes, &mut pos, "maxval")?;
    if maxval != 255 {
        return Err(ImageError::Unsupported {
            reason: format!("pnm maxval {maxval} (only 255 supported)"),
        });
    }
    if width == 0 || height == 0 {
        return Err(ImageError::Format { format: "pnm", reason: "zero dimension".into() });
    }
    pos += 1; // exactly one whitespace byte before the payload
    let need = width * height * channels;
    let payload = bytes.get(pos..pos + need).ok_or_else(|| ImageError::Format {
        format: "pnm",
        reason: format!("payload truncated: need {need} bytes"),
    })?;
    let data = payload.iter().map(|&b| b as f32 / 255.0).collect();
    Ok(ImageBuffer::new(height, width, space, data))
}

fn encode_pnm(img: &ImageBuffer) -> Vec<u8> {
    let magic = if img.channels == 3 { "P6" } else { "P5" };
    let mut out = format!("{magic}\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend(img.data.iter().map(|&v| to_u8(v)));
    out
}

// ── PNG ──────────────────────────────────────────────────────────────────

fn read_png(bytes: &[u8]) -> Result<ImageBuffer, ImageError> {
    let decoder = png::Decoder::new(bytes);
    let mut reader = decoder.read_info()?;
    let mut buf = vec![0u8; reader.output_buffer_size()];
    let info = reader.next_frame(&mut buf)?;
    if info.bit_depth != png::BitDepth::Eight {
        return Err(ImageError::Unsupported {
            reason: format!("png bit depth {:?} (only 8-bit supported)", info.bit_depth),
        });
    }
    let space = match info.color_type {
        png::ColorType::Grayscale => ColorSpace::Y,
        png::ColorType::Rgb => ColorSpace::Rgb,
        other => {
            return Err(ImageError::Unsupported {
                reason: format!("png color type {other:?} (only gray and rgb supported)"),
            })
        }
    };
    let need = info.width as usize * info.height as usize * space.channels();
    let data = buf[..need].iter().map(|&b| b as f32 / 255.0).collect();
    Ok(ImageBuffer::new(info.height as usize, info.width as usize, space, data))
}

fn encode_png(img: &ImageBuffer) -> Result<Vec<u8>, ImageError> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, img.width as u32, img.height as u32);
        encoder.set_color(if img.channels == 3 {
            png::ColorType::Rgb
        } else {
            png::ColorType::Grayscale
        });
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder.write_header()?;
        let bytes: Vec<u8> = img.data.iter().map(|&v| to_u8(v)).collect();
        writer.write_image_data(&bytes)?;
    }
    Ok(out)
}
