use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Image, Plane};
use crate::error::{Error, Result};

/// Loads an 8-bit PNG (gray or RGB) or a binary PGM/PPM (P5/P6, maxval 255).
///
/// Samples are divided by 255. Alpha, palette and 16-bit files are rejected.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(Error::FileNotFound(path.to_path_buf()))
        }
        Err(e) => return Err(e.into()),
    };
    if bytes.starts_with(b"\x89PNG\r\n\x1a\n") {
        decode_png(&bytes)
    } else if bytes.starts_with(b"P5") || bytes.starts_with(b"P6") {
        decode_netpbm(&bytes)
    } else {
        Err(Error::UnsupportedFormat(format!(
            "{}: not a PNG or binary PGM/PPM file",
            path.display()
        )))
    }
}

/// Writes `img` as 8-bit data after clamping to `[0, 1]`; each byte is
/// `floor(255·x + 0.5)`.
///
/// Files ending in `.pgm`, `.ppm` or `.pnm` are written as binary netpbm,
/// everything else as PNG.
pub fn save_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = quantize_interleaved(img);
    let netpbm = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| matches!(e.to_ascii_lowercase().as_str(), "pgm" | "ppm" | "pnm"))
        .unwrap_or(false);
    let mut out = BufWriter::new(File::create(path)?);
    if netpbm {
        let magic = if img.channels() == 1 { "P5" } else { "P6" };
        write!(out, "{magic}\n{} {}\n255\n", img.width(), img.height())?;
        out.write_all(&bytes)?;
    } else {
        let mut encoder = png::Encoder::new(&mut out, img.width() as u32, img.height() as u32);
        encoder.set_color(if img.channels() == 1 {
            png::ColorType::Grayscale
        } else {
            png::ColorType::Rgb
        });
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder.write_header().map_err(png_encode_err)?;
        writer.write_image_data(&bytes).map_err(png_encode_err)?;
        writer.finish().map_err(png_encode_err)?;
    }
    out.flush()?;
    Ok(())
}

pub(crate) fn quantize(v: f64) -> u8 {
    (255.0 * v.clamp(0.0, 1.0) + 0.5).floor() as u8
}

fn quantize_interleaved(img: &Image) -> Vec<u8> {
    let (h, w, c) = img.dims();
    let mut bytes = Vec::with_capacity(h * w * c);
    for y in 0..h {
        for x in 0..w {
            for ch in 0..c {
                bytes.push(quantize(img.get(ch, y, x)));
            }
        }
    }
    bytes
}

fn from_interleaved(height: usize, width: usize, channels: usize, bytes: &[u8]) -> Result<Image> {
    let planes = (0..channels)
        .map(|c| {
            Plane::from_fn(height, width, |y, x| {
                bytes[(y * width + x) * channels + c] as f64 / 255.0
            })
        })
        .collect();
    Image::from_planes(planes)
}

fn png_encode_err(e: png::EncodingError) -> Error {
    match e {
        png::EncodingError::IoError(io) => Error::Io(io),
        other => Error::InvalidImage(other.to_string()),
    }
}

fn png_decode_err(e: png::DecodingError) -> Error {
    match e {
        png::DecodingError::IoError(io) => Error::CorruptData(io.to_string()),
        other => Error::CorruptData(other.to_string()),
    }
}

fn decode_png(bytes: &[u8]) -> Result<Image> {
    let mut decoder = png::Decoder::new(BufReader::new(bytes));
    decoder.set_transformations(png::Transformations::IDENTITY);
    let mut reader = decoder.read_info().map_err(png_decode_err)?;
    let info = reader.info();
    if info.bit_depth != png::BitDepth::Eight {
        return Err(Error::UnsupportedFormat(format!(
            "PNG bit depth {:?} (only 8-bit supported)",
            info.bit_depth
        )));
    }
    if info.trns.is_some() {
        return Err(Error::UnsupportedFormat("PNG transparency chunk".into()));
    }
    let channels = match info.color_type {
        png::ColorType::Grayscale => 1,
        png::ColorType::Rgb => 3,
        png::ColorType::Indexed => {
            return Err(Error::UnsupportedFormat("palette PNG".into()));
        }
        png::ColorType::GrayscaleAlpha | png::ColorType::Rgba => {
            return Err(Error::UnsupportedFormat("PNG with alpha channel".into()));
        }
    };
    let (width, height) = (info.width as usize, info.height as usize);
    let mut buf = vec![0u8; reader.output_buffer_size()];
    let frame = reader.next_frame(&mut buf).map_err(png_decode_err)?;
    let data = &buf[..frame.buffer_size()];
    if data.len() != width * height * channels {
        return Err(Error::CorruptData("PNG frame size mismatch".into()));
    }
    from_interleaved(height, width, channels, data)
}

/// Reads a whitespace-delimited header token, skipping `#` comments.
fn netpbm_token(bytes: &[u8], pos: &mut usize) -> Result<usize> {
    loop {
        match bytes.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while let Some(&b) = bytes.get(*pos) {
                    *pos += 1;
                    if b == b'\n' {
                        break;
                    }
                }
            }
            Some(_) => break,
            None => return Err(Error::CorruptData("truncated netpbm header".into())),
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(|b| b.is_ascii_digit()) {
        *pos += 1;
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::CorruptData("bad netpbm header field".into()))
}

fn decode_netpbm(bytes: &[u8]) -> Result<Image> {
    let channels = if bytes[1] == b'5' { 1 } else { 3 };
    let mut pos = 2;
    let width = netpbm_token(bytes, &mut pos)?;
    let height = netpbm_token(bytes, &mut pos)?;
    let maxval = netpbm_token(bytes, &mut pos)?;
    if maxval != 255 {
        return Err(Error::UnsupportedFormat(format!(
            "netpbm maxval {maxval} (only 255 supported)"
        )));
    }
    // exactly one whitespace byte separates the header from the raster
    if !bytes.get(pos).is_some_and(|b| b.is_ascii_whitespace()) {
        return Err(Error::CorruptData("missing raster separator".into()));
    }
    pos += 1;
    let need = width * height * channels;
    let mut raster = Vec::with_capacity(need);
    (&bytes[pos..]).take(need as u64).read_to_end(&mut raster)?;
    if raster.len() != need {
        return Err(Error::CorruptData(format!(
            "netpbm raster has {} bytes, expected {need}",
            raster.len()
        )));
    }
    from_interleaved(height, width, channels, &raster)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pgm(width: usize, height: usize, raster: &[u8]) -> Vec<u8> {
        let mut v = format!("P5\n# comment\n{width} {height}\n255\n").into_bytes();
        v.extend_from_slice(raster);
        v
    }

    #[test]
    fn pgm_scaling() {
        let raster: Vec<u8> = (0..64u32)
            .map(|i| [0u8, 255, 128, 64][i as usize % 4])
            .collect();
        let img = decode_netpbm(&pgm(8, 8, &raster)).unwrap();
        assert_eq!(img.dims(), (8, 8, 1));
        assert_eq!(img.get(0, 0, 0), 0.0);
        assert_eq!(img.get(0, 0, 1), 1.0);
        assert_eq!(img.get(0, 0, 2), 128.0 / 255.0);
        assert_eq!(img.get(0, 0, 3), 64.0 / 255.0);
    }

    #[test]
    fn truncated_pgm_is_corrupt() {
        let bytes = pgm(8, 8, &[0u8; 10]);
        assert!(matches!(decode_netpbm(&bytes), Err(Error::CorruptData(_))));
    }

    #[test]
    fn quantization_rounds_half_up_and_clamps() {
        assert_eq!(quantize(0.5), 128);
        assert_eq!(quantize(1.2), 255);
        assert_eq!(quantize(-0.3), 0);
        assert_eq!(quantize(64.0 / 255.0), 64);
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            load_image("/definitely/not/here.png"),
            Err(Error::FileNotFound(_))
        ));
    }
}
