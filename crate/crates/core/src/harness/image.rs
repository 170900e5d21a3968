use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::TransportInstance;
use crate::matrix::Matrix;

/// Grayscale image, row-major, non-negative intensities.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width * height != pixels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{width}x{height} image with {} pixels",
                pixels.len()
            )));
        }
        for (i, &p) in pixels.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::NonFinite {
                    what: "pixel",
                    index: i,
                    value: p,
                });
            }
            if p < 0.0 {
                return Err(Error::NegativeValue {
                    what: "pixel",
                    index: i,
                    value: p,
                });
            }
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    /// Reads a PGM file (`P2` or `P5`) or, failing the magic check, a
    /// whitespace-separated text grid.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        if bytes.starts_with(b"P5") || bytes.starts_with(b"P2") {
            Self::parse_pgm(&bytes)
        } else {
            let text = String::from_utf8(bytes)
                .map_err(|_| Error::Parse("image is neither PGM nor UTF-8 text".into()))?;
            Self::parse_text(&text)
        }
    }

    /// One image row per line, blank lines ignored.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut pixels = Vec::new();
        let mut width = None;
        let mut height = 0;
        for (lineno, line) in text.lines().enumerate() {
            let row: Vec<f64> = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::Parse(format!("line {}: bad intensity {t:?}", lineno + 1)))
                })
                .collect::<Result<_>>()?;
            if row.is_empty() {
                continue;
            }
            match width {
                None => width = Some(row.len()),
                Some(w) if w != row.len() => {
                    return Err(Error::Parse(format!(
                        "line {}: {} values, expected {w}",
                        lineno + 1,
                        row.len()
                    )))
                }
                _ => {}
            }
            pixels.extend(row);
            height += 1;
        }
        let width = width.ok_or_else(|| Error::Parse("image has no pixels".into()))?;
        Self::new(width, height, pixels)
    }

    pub fn parse_pgm(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0;
        let magic = next_token(bytes, &mut pos)?;
        let binary = match magic.as_str() {
            "P5" => true,
            "P2" => false,
            other => return Err(Error::Parse(format!("unsupported PGM magic {other:?}"))),
        };
        let width = parse_header_number(bytes, &mut pos, "width")?;
        let height = parse_header_number(bytes, &mut pos, "height")?;
        let maxval = parse_header_number(bytes, &mut pos, "maxval")?;
        if maxval == 0 || maxval > 65535 {
            return Err(Error::Parse(format!("PGM maxval {maxval} out of range")));
        }
        let count = width * height;
        let pixels = if binary {
            // Exactly one whitespace byte separates the header from the raster.
            pos += 1;
            let depth = if maxval < 256 { 1 } else { 2 };
            let raster = bytes
                .get(pos..pos + count * depth)
                .ok_or_else(|| Error::Parse("PGM raster is truncated".into()))?;
            if depth == 1 {
                raster.iter().map(|&v| v as f64).collect()
            } else {
                raster
                    .chunks_exact(2)
                    .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64)
                    .collect()
            }
        } else {
            (0..count)
                .map(|_| parse_header_number(bytes, &mut pos, "pixel").map(|v| v as f64))
                .collect::<Result<Vec<_>>>()?
        };
        Self::new(width, height, pixels)
    }

    /// Binary PGM encoding; intensities are rounded and clamped to `0..=255`.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.pixels.iter().map(|p| p.round().clamp(0.0, 255.0) as u8));
        out
    }
}

fn next_token(bytes: &[u8], pos: &mut usize) -> Result<String> {
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
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::Parse("unexpected end of PGM data".into()));
    }
    Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
}

fn parse_header_number(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    let tok = next_token(bytes, pos)?;
    tok.parse()
        .map_err(|_| Error::Parse(format!("PGM {what} {tok:?} is not a number")))
}

/// Builds a transport instance from two equally sized images.
///
/// Demands come from `img1` and supplies from `img2`, each normalized to
/// total mass 1. The cost between two pixels is the squared Euclidean
/// distance of their coordinates divided by the largest such distance, so the
/// maximum cost is 1. With `prune_zero`, zero-intensity pixels are dropped.
pub fn image_pair_to_instance(
    img1: &GrayImage,
    img2: &GrayImage,
    prune_zero: bool,
) -> Result<TransportInstance> {
    if img1.width != img2.width || img1.height != img2.height {
        return Err(Error::DimensionMismatch(format!(
            "images are {}x{} and {}x{}",
            img1.width, img1.height, img2.width, img2.height
        )));
    }
    let (m1, m2): (f64, f64) = (img1.pixels.iter().sum(), img2.pixels.iter().sum());
    if m1 <= 0.0 || m2 <= 0.0 {
        return Err(Error::EmptyImage);
    }
    let w = img1.width;
    let keep = |img: &GrayImage| -> Vec<usize> {
        (0..img.pixels.len())
            .filter(|&i| !prune_zero || img.pixels[i] > 0.0)
            .collect()
    };
    let (ka, kb) = (keep(img1), keep(img2));
    let demands: Vec<f64> = ka.iter().map(|&i| img1.pixels[i] / m1).collect();
    let supplies: Vec<f64> = kb.iter().map(|&i| img2.pixels[i] / m2).collect();

    let sq = |p: usize, q: usize| {
        let (dr, dc) = ((p / w) as f64 - (q / w) as f64, (p % w) as f64 - (q % w) as f64);
        dr * dr + dc * dc
    };
    let raw = Matrix::from_fn(ka.len(), kb.len(), |i, j| sq(ka[i], kb[j]));
    let max = raw.max_entry();
    let costs = if max > 0.0 { raw.map(|c| c / max) } else { raw };
    TransportInstance::new(demands, supplies, costs)
}

/// A digit-like test image: a few soft strokes quantized to `0..=255`.
pub fn synthetic_image(width: usize, height: usize, seed: u64) -> GrayImage {
    assert!(width > 0 && height > 0, "image must have at least one pixel");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let strokes = rng.gen_range(2..=4);
    let mut pixels = vec![0.0; width * height];
    for _ in 0..strokes {
        let (r0, c0) = (rng.gen_range(0.0..height as f64), rng.gen_range(0.0..width as f64));
        let (r1, c1) = (rng.gen_range(0.0..height as f64), rng.gen_range(0.0..width as f64));
        let radius = rng.gen_range(0.8..1.8);
        for r in 0..height {
            for c in 0..width {
                let d = segment_distance(r as f64, c as f64, (r0, c0), (r1, c1));
                let v = 255.0 * (-(d * d) / (2.0 * radius * radius)).exp();
                let p = &mut pixels[r * width + c];
                *p = f64::max(*p, v);
            }
        }
    }
    for p in &mut pixels {
        *p = if *p < 16.0 { 0.0 } else { p.round() };
    }
    if pixels.iter().all(|&p| p == 0.0) {
        pixels[(height / 2) * width + width / 2] = 255.0;
    }
    GrayImage {
        width,
        height,
        pixels,
    }
}

fn segment_distance(r: f64, c: f64, p: (f64, f64), q: (f64, f64)) -> f64 {
    let (dr, dc) = (q.0 - p.0, q.1 - p.1);
    let len2 = dr * dr + dc * dc;
    let t = if len2 > 0.0 {
        (((r - p.0) * dr + (c - p.1) * dc) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (er, ec) = (r - (p.0 + t * dr), c - (p.1 + t * dc));
    (er * er + ec * ec).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::exact_transport;

    #[test]
    fn two_pixel_geometry() {
        let a = GrayImage::parse_text("1 0\n").unwrap();
        let b = GrayImage::parse_text("0 1\n").unwrap();
        let inst = image_pair_to_instance(&a, &b, false).unwrap();
        assert_eq!(inst.demands(), &[1.0, 0.0]);
        assert_eq!(inst.supplies(), &[0.0, 1.0]);
        assert_eq!(inst.costs().to_rows(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn mnist_sized_images_give_784_bins() {
        let a = synthetic_image(28, 28, 1);
        let b = synthetic_image(28, 28, 2);
        let inst = image_pair_to_instance(&a, &b, false).unwrap();
        assert_eq!(inst.num_demand(), 784);
        assert_eq!(inst.num_supply(), 784);
        assert_eq!(inst.max_cost(), 1.0);
    }

    #[test]
    fn three_pixel_emd() {
        // Pixels at columns 0, 1, 2; squared distances 1 and 4, normalized by 4.
        let a = GrayImage::parse_text("2 0 2").unwrap();
        let b = GrayImage::parse_text("0 4 0").unwrap();
        let inst = image_pair_to_instance(&a, &b, false).unwrap();
        let (_, cost) = exact_transport(&inst).unwrap();
        // Half the mass moves one step each way: 0.5·0.25 + 0.5·0.25.
        assert!((cost - 0.25).abs() < 1e-12);
        let ints = crate::oracle::brute_force_enumerate(&[1, 0, 1], &[0, 2, 0], inst.costs()).unwrap();
        assert!((ints / 2.0 - cost).abs() < 1e-12);
    }

    #[test]
    fn pruning_drops_zero_pixels() {
        let a = GrayImage::parse_text("1 0\n0 1").unwrap();
        let b = GrayImage::parse_text("0 3\n0 0").unwrap();
        let inst = image_pair_to_instance(&a, &b, true).unwrap();
        assert_eq!(inst.num_demand(), 2);
        assert_eq!(inst.num_supply(), 1);
    }

    #[test]
    fn rejects_bad_pairs() {
        let a = GrayImage::parse_text("1 0").unwrap();
        let b = GrayImage::parse_text("1\n0").unwrap();
        assert!(matches!(image_pair_to_instance(&a, &b, false), Err(Error::DimensionMismatch(_))));
        let z = GrayImage::parse_text("0 0").unwrap();
        assert!(matches!(image_pair_to_instance(&a, &z, false), Err(Error::EmptyImage)));
    }

    #[test]
    fn pgm_round_trip() {
        let img = synthetic_image(14, 14, 3);
        let back = GrayImage::parse_pgm(&img.to_pgm()).unwrap();
        assert_eq!(img, back);
        let ascii = GrayImage::parse_pgm(b"P2\n# comment\n2 1\n255\n7 9\n").unwrap();
        assert_eq!(ascii.pixels(), &[7.0, 9.0]);
    }

    #[test]
    fn ragged_text_is_rejected() {
        assert!(matches!(GrayImage::parse_text("1 2\n3"), Err(Error::Parse(_))));
    }
}
