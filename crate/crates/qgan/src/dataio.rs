//! Image ingestion and export: the big-endian IDX container used by the
//! MNIST distribution, seeded subset selection, and PGM/CSV output.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::Write as _;
use std::path::Path;

pub const IMAGE_SIDE: usize = 28;
pub const IMAGE_PIXELS: usize = IMAGE_SIDE * IMAGE_SIDE;

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

/// A labeled set of 28x28 grayscale images with intensities in `[0, 255]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageSet<T: Real = f64> {
    pixels: Matrix<T>,
    labels: Vec<u8>,
    source: String,
}

impl<T: Real> ImageSet<T> {
    pub fn from_parts(pixels: Matrix<T>, labels: Vec<u8>, source: String) -> Result<Self> {
        if pixels.cols() != IMAGE_PIXELS {
            return Err(Error::invalid(format!(
                "images must have {IMAGE_PIXELS} pixels, got {}",
                pixels.cols()
            )));
        }
        if pixels.rows() != labels.len() {
            return Err(Error::Inconsistent(format!(
                "{} images but {} labels",
                pixels.rows(),
                labels.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 9) {
            return Err(Error::invalid(format!("label {bad} is not a digit")));
        }
        for i in 0..pixels.rows() {
            for &p in pixels.row(i) {
                if !(p >= T::zero() && p <= T::of(255.0)) {
                    return Err(Error::invalid(format!(
                        "pixel value {p} outside [0, 255] in image {i}"
                    )));
                }
            }
        }
        Ok(ImageSet { pixels, labels, source })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn image(&self, i: usize) -> &[T] {
        self.pixels.row(i)
    }

    pub fn label(&self, i: usize) -> u8 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn pixels(&self) -> &Matrix<T> {
        &self.pixels
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// The pixel matrix rescaled to `[0, 1]`, the range the PCA works in.
    pub fn unit_pixels(&self) -> Matrix<T> {
        let mut out = Matrix::zeros(self.pixels.rows(), self.pixels.cols());
        let scale = T::one() / T::of(255.0);
        for i in 0..self.pixels.rows() {
            for (o, &p) in out.row_mut(i).iter_mut().zip(self.pixels.row(i)) {
                *o = p * scale;
            }
        }
        out
    }

    /// Draw `count` images with the given label, deterministically in the
    /// seed: a partial shuffle of the matching indices.
    pub fn select_subset(&self, digit: u8, count: usize, seed: u64) -> Result<ImageSet<T>> {
        if digit > 9 {
            return Err(Error::invalid(format!("label {digit} is not a digit")));
        }
        let mut matching: Vec<usize> = (0..self.len())
            .filter(|&i| self.labels[i] == digit)
            .collect();
        if matching.len() < count {
            return Err(Error::invalid(format!(
                "requested {count} images of digit {digit}, only {} available",
                matching.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..count {
            let j = rng.random_range(i..matching.len());
            matching.swap(i, j);
        }
        let mut pixels = Matrix::zeros(count, IMAGE_PIXELS);
        let mut labels = Vec::with_capacity(count);
        for (row, &idx) in matching[..count].iter().enumerate() {
            pixels.row_mut(row).copy_from_slice(self.pixels.row(idx));
            labels.push(self.labels[idx]);
        }
        ImageSet::from_parts(pixels, labels, format!("{} (digit {digit} subset)", self.source))
    }
}

fn read_be_u32(bytes: &[u8], offset: usize) -> u32 {
    u32::from_be_bytes([bytes[offset], bytes[offset + 1], bytes[offset + 2], bytes[offset + 3]])
}

fn truncated(path: &Path, need: usize, have: usize) -> Error {
    Error::Io(std::io::Error::new(
        std::io::ErrorKind::UnexpectedEof,
        format!("{} is truncated: need {need} bytes, have {have}", path.display()),
    ))
}

/// Load an image file and its label file in the big-endian IDX layout.
pub fn load_idx<T: Real>(images_path: &Path, labels_path: &Path) -> Result<ImageSet<T>> {
    let image_bytes = std::fs::read(images_path)?;
    if image_bytes.len() < 16 {
        return Err(truncated(images_path, 16, image_bytes.len()));
    }
    let magic = read_be_u32(&image_bytes, 0);
    if magic != IMAGES_MAGIC {
        return Err(Error::Format(format!(
            "{} has magic {magic:#010x}, expected {IMAGES_MAGIC:#010x}",
            images_path.display()
        )));
    }
    let n = read_be_u32(&image_bytes, 4) as usize;
    let rows = read_be_u32(&image_bytes, 8) as usize;
    let cols = read_be_u32(&image_bytes, 12) as usize;
    if rows != IMAGE_SIDE || cols != IMAGE_SIDE {
        return Err(Error::Format(format!(
            "{} holds {rows}x{cols} images, expected {IMAGE_SIDE}x{IMAGE_SIDE}",
            images_path.display()
        )));
    }
    let expected = 16 + n * IMAGE_PIXELS;
    if image_bytes.len() < expected {
        return Err(truncated(images_path, expected, image_bytes.len()));
    }
    if image_bytes.len() > expected {
        return Err(Error::Format(format!(
            "{} has {} trailing bytes",
            images_path.display(),
            image_bytes.len() - expected
        )));
    }

    let label_bytes = std::fs::read(labels_path)?;
    if label_bytes.len() < 8 {
        return Err(truncated(labels_path, 8, label_bytes.len()));
    }
    let magic = read_be_u32(&label_bytes, 0);
    if magic != LABELS_MAGIC {
        return Err(Error::Format(format!(
            "{} has magic {magic:#010x}, expected {LABELS_MAGIC:#010x}",
            labels_path.display()
        )));
    }
    let n_labels = read_be_u32(&label_bytes, 4) as usize;
    let expected = 8 + n_labels;
    if label_bytes.len() < expected {
        return Err(truncated(labels_path, expected, label_bytes.len()));
    }
    if label_bytes.len() > expected {
        return Err(Error::Format(format!(
            "{} has {} trailing bytes",
            labels_path.display(),
            label_bytes.len() - expected
        )));
    }
    if n != n_labels {
        return Err(Error::Inconsistent(format!(
            "{n} images but {n_labels} labels"
        )));
    }

    let mut pixels = Matrix::zeros(n, IMAGE_PIXELS);
    for i in 0..n {
        let start = 16 + i * IMAGE_PIXELS;
        for (o, &b) in pixels.row_mut(i).iter_mut().zip(&image_bytes[start..start + IMAGE_PIXELS])
        {
            *o = T::of(b as f64);
        }
    }
    let labels = label_bytes[8..].to_vec();
    if let Some(bad) = labels.iter().find(|&&l| l > 9) {
        return Err(Error::Format(format!("label {bad} is not a digit")));
    }
    let source = format!("{} + {}", images_path.display(), labels_path.display());
    ImageSet::from_parts(pixels, labels, source)
}

/// Write a set back out in the IDX layout, with pixels rounded to bytes.
pub fn write_idx<T: Real>(
    set: &ImageSet<T>,
    images_path: &Path,
    labels_path: &Path,
) -> Result<()> {
    let n = set.len();
    let mut image_bytes = Vec::with_capacity(16 + n * IMAGE_PIXELS);
    image_bytes.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
    image_bytes.extend_from_slice(&(n as u32).to_be_bytes());
    image_bytes.extend_from_slice(&(IMAGE_SIDE as u32).to_be_bytes());
    image_bytes.extend_from_slice(&(IMAGE_SIDE as u32).to_be_bytes());
    for i in 0..n {
        for &p in set.image(i) {
            image_bytes.push(pixel_byte(p));
        }
    }
    std::fs::write(images_path, image_bytes)?;

    let mut label_bytes = Vec::with_capacity(8 + n);
    label_bytes.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    label_bytes.extend_from_slice(&(n as u32).to_be_bytes());
    label_bytes.extend_from_slice(set.labels());
    std::fs::write(labels_path, label_bytes)?;
    Ok(())
}

fn pixel_byte<T: Real>(p: T) -> u8 {
    let v = p.to_f64().unwrap_or(0.0).round();
    v.clamp(0.0, 255.0) as u8
}

/// Write one 784-pixel vector as a binary PGM (P5, maxval 255); values are
/// rounded and clipped into byte range.
pub fn export_pgm<T: Real>(pixels: &[T], path: &Path) -> Result<()> {
    if pixels.len() != IMAGE_PIXELS {
        return Err(Error::invalid(format!(
            "a PGM export needs {IMAGE_PIXELS} pixels, got {}",
            pixels.len()
        )));
    }
    if pixels.iter().any(|p| !p.is_finite()) {
        return Err(Error::invalid("cannot export non-finite pixels"));
    }
    let mut out = Vec::with_capacity(16 + IMAGE_PIXELS);
    write!(out, "P5\n{IMAGE_SIDE} {IMAGE_SIDE}\n255\n").expect("writing to a vec cannot fail");
    for &p in pixels {
        out.push(pixel_byte(p));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Write rows of floats as bare CSV: comma separators, newline rows, no
/// header. Floats print in the shortest form that parses back exactly.
pub fn export_csv<T: Real>(rows: &[Vec<T>], path: &Path) -> Result<()> {
    let mut out = String::new();
    for row in rows {
        let mut first = true;
        for &v in row {
            if !first {
                out.push(',');
            }
            first = false;
            out.push_str(&format!("{}", v.to_f64().unwrap_or(f64::NAN)));
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}
