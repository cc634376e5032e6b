//! Minimal binary PGM/PPM encoding, the raw float dump format, and the
//! side-by-side mask comparison renderer.

use std::fs;
use std::io;
use std::path::Path;

/// 8-bit grayscale raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, fill: u8) -> Self {
        Self {
            width,
            height,
            pixels: vec![fill; width * height],
        }
    }

    /// Linear min-max map onto 0..=255. A constant field maps to 0.
    pub fn from_values_minmax(width: usize, height: usize, values: &[f32]) -> Self {
        let (lo, hi) = finite_range(values);
        Self::from_values_range(width, height, values, lo, hi)
    }

    /// Linear map of `[lo, hi]` onto 0..=255, clamping outside values.
    pub fn from_values_range(
        width: usize,
        height: usize,
        values: &[f32],
        lo: f32,
        hi: f32,
    ) -> Self {
        assert_eq!(values.len(), width * height);
        let span = hi - lo;
        let pixels = values
            .iter()
            .map(|&v| {
                if span.is_nan() || span <= 0.0 || !v.is_finite() {
                    0
                } else {
                    (((v - lo) / span).clamp(0.0, 1.0) * 255.0).round() as u8
                }
            })
            .collect();
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    /// Binary PGM (`P5`, maxval 255).
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    /// Binary PPM (`P6`) with the gray level replicated on all channels.
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.pixels.iter().flat_map(|&p| [p, p, p]));
        out
    }

    /// Writes PPM for a `.ppm` path and PGM otherwise.
    pub fn save(&self, path: &Path) -> io::Result<()> {
        let bytes = match extension(path).as_deref() {
            Some("ppm") => self.to_ppm(),
            _ => self.to_pgm(),
        };
        fs::write(path, bytes)
    }

    /// Parses a binary PGM with maxval 255. Header comments are skipped.
    pub fn from_pgm(bytes: &[u8]) -> io::Result<Self> {
        let bad = |m: &str| io::Error::new(io::ErrorKind::InvalidData, format!("PGM: {m}"));
        let mut pos = 0;
        let mut fields = Vec::with_capacity(4);
        while fields.len() < 4 {
            while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
                if bytes[pos] == b'#' {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                } else {
                    pos += 1;
                }
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(bad("truncated header"));
            }
            fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
        }
        // exactly one whitespace byte separates the header from the raster
        pos += 1;
        if fields[0] != "P5" {
            return Err(bad("not a binary graymap"));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad("bad header number"));
        let (width, height, maxval) = (num(&fields[1])?, num(&fields[2])?, num(&fields[3])?);
        if maxval != 255 {
            return Err(bad("only maxval 255 is supported"));
        }
        let raster = bytes
            .get(pos..pos + width * height)
            .ok_or_else(|| bad("short raster"))?;
        Ok(Self {
            width,
            height,
            pixels: raster.to_vec(),
        })
    }
}

pub(crate) fn extension(path: &Path) -> Option<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
}

fn finite_range(values: &[f32]) -> (f32, f32) {
    values
        .iter()
        .filter(|v| v.is_finite())
        .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

/// Little-endian f32 dump, row-major.
pub fn f32_to_le_bytes(values: &[f32]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

pub fn f32_from_le_bytes(bytes: &[u8]) -> io::Result<Vec<f32>> {
    if !bytes.len().is_multiple_of(4) {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("{} bytes is not a whole number of f32 values", bytes.len()),
        ));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

/// Width of the separator between comparison panels, pixels.
pub const GUTTER: usize = 8;

/// Target panel on the left, prediction on the right, separated by a white
/// [`GUTTER`]. Both panels share one intensity scale: `[0, 1]` widened to
/// cover the joint value range, so masks and probabilities render without
/// rescaling and fields stay comparable.
pub fn render_comparison(
    width: usize,
    height: usize,
    target: &[f32],
    prediction: &[f32],
) -> GrayImage {
    assert_eq!(target.len(), width * height);
    assert_eq!(prediction.len(), width * height);
    let (tlo, thi) = finite_range(target);
    let (plo, phi) = finite_range(prediction);
    let lo = tlo.min(plo).min(0.0);
    let hi = thi.max(phi).max(1.0);
    let left = GrayImage::from_values_range(width, height, target, lo, hi);
    let right = GrayImage::from_values_range(width, height, prediction, lo, hi);
    let out_w = 2 * width + GUTTER;
    let mut out = GrayImage::new(out_w, height, 255);
    for row in 0..height {
        let dst = row * out_w;
        out.pixels[dst..dst + width].copy_from_slice(&left.pixels[row * width..(row + 1) * width]);
        let dst = dst + width + GUTTER;
        out.pixels[dst..dst + width].copy_from_slice(&right.pixels[row * width..(row + 1) * width]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_header_and_roundtrip() {
        let img = GrayImage {
            width: 3,
            height: 2,
            pixels: vec![0, 10, 20, 30, 40, 255],
        };
        let bytes = img.to_pgm();
        assert!(bytes.starts_with(b"P5\n3 2\n255\n"));
        assert_eq!(bytes.len(), 11 + 6);
        assert_eq!(GrayImage::from_pgm(&bytes).unwrap(), img);
        let ppm = img.to_ppm();
        assert!(ppm.starts_with(b"P6\n3 2\n255\n"));
        assert_eq!(ppm.len(), 11 + 18);
    }

    #[test]
    fn pgm_with_comment() {
        let mut bytes = b"P5\n# made by hand\n2 1\n255\n".to_vec();
        bytes.extend([7, 9]);
        let img = GrayImage::from_pgm(&bytes).unwrap();
        assert_eq!(img.pixels, vec![7, 9]);
        assert!(GrayImage::from_pgm(b"P2\n1 1\n255\n0").is_err());
    }

    #[test]
    fn minmax_normalization() {
        let img = GrayImage::from_values_minmax(4, 1, &[-2.0, 0.0, 1.0, 2.0]);
        assert_eq!(img.pixels, vec![0, 128, 191, 255]);
        let flat = GrayImage::from_values_minmax(2, 1, &[3.0, 3.0]);
        assert_eq!(flat.pixels, vec![0, 0]);
    }

    #[test]
    fn comparison_layout() {
        let t = vec![1.0, 0.0, 0.0, 1.0];
        let p = vec![0.5, 0.5, 0.0, 1.0];
        let img = render_comparison(2, 2, &t, &p);
        assert_eq!((img.width, img.height), (2 * 2 + GUTTER, 2));
        assert_eq!(img.get(0, 0), 255);
        assert_eq!(img.get(0, 1), 0);
        assert_eq!(img.get(0, 2), 255);
        assert_eq!(img.get(0, 2 + GUTTER), 128);
        assert_eq!(img.get(1, 2 + GUTTER + 1), 255);
    }

    #[test]
    fn float_dump_roundtrip() {
        let v = vec![1.5f32, -0.0, f32::MIN_POSITIVE, 3.0e7];
        let bytes = f32_to_le_bytes(&v);
        assert_eq!(&bytes[..4], &1.5f32.to_le_bytes());
        assert_eq!(f32_from_le_bytes(&bytes).unwrap(), v);
        assert!(f32_from_le_bytes(&bytes[..5]).is_err());
    }
}
