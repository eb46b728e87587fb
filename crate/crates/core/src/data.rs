//! Dataset ingestion and preprocessing: MNIST-family IDX files, CIFAR-10
//! binary batches, bilinear resizing, grayscale conversion, label filtering,
//! and PGM snapshot output.
//!
//! All loaders normalize pixels to [0, 1] and are pure functions of the file
//! contents, so identical inputs give identical datasets on every platform.

use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

const IDX_IMAGE_MAGIC: u32 = 2051;
const IDX_LABEL_MAGIC: u32 = 2049;
const CIFAR_RECORD_LEN: usize = 3073;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: bad magic number {found} (expected {expected})")]
    BadMagic {
        path: PathBuf,
        expected: u32,
        found: u32,
    },
    #[error("{path}: truncated file, needed {needed} bytes but found {found}")]
    Truncated {
        path: PathBuf,
        needed: usize,
        found: usize,
    },
    #[error("image file has {images} items but label file has {labels}")]
    CountMismatch { images: usize, labels: usize },
    #[error("{path}: length {len} is not a multiple of the {record}-byte record")]
    BadRecordLength {
        path: PathBuf,
        len: usize,
        record: usize,
    },
    #[error("requested {requested} items but only {available} available")]
    NotEnoughItems { requested: usize, available: usize },
    #[error("image dimensions must be positive")]
    ZeroDimension,
    #[error("invalid dataset: {0}")]
    Invalid(String),
}

/// Images as flat pixel vectors in [0, 1] with parallel labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    images: Vec<Vec<f64>>,
    labels: Vec<u8>,
    width: usize,
    height: usize,
}

impl Dataset {
    pub fn new(
        images: Vec<Vec<f64>>,
        labels: Vec<u8>,
        width: usize,
        height: usize,
    ) -> Result<Self, DataError> {
        if width == 0 || height == 0 {
            return Err(DataError::ZeroDimension);
        }
        if images.len() != labels.len() {
            return Err(DataError::CountMismatch {
                images: images.len(),
                labels: labels.len(),
            });
        }
        for img in &images {
            if img.len() != width * height {
                return Err(DataError::Invalid(format!(
                    "image length {} does not match {width}x{height}",
                    img.len()
                )));
            }
            if img.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(DataError::Invalid("pixel outside [0, 1]".into()));
            }
        }
        Ok(Self {
            images,
            labels,
            width,
            height,
        })
    }

    pub fn images(&self) -> &[Vec<f64>] {
        &self.images
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn image_len(&self) -> usize {
        self.width * self.height
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// First `n` items in original index order, after an optional label
    /// filter. Errors when fewer than `n` survive the filter.
    pub fn take_prefix(&self, n: usize, label_filter: Option<u8>) -> Result<Dataset, DataError> {
        let mut images = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for (img, &lab) in self.images.iter().zip(&self.labels) {
            if label_filter.map_or(true, |want| lab == want) {
                images.push(img.clone());
                labels.push(lab);
                if images.len() == n {
                    break;
                }
            }
        }
        if images.len() < n {
            return Err(DataError::NotEnoughItems {
                requested: n,
                available: images.len(),
            });
        }
        Ok(Dataset {
            images,
            labels,
            width: self.width,
            height: self.height,
        })
    }

    /// Bilinear-resize every image.
    pub fn resized(&self, dst_w: usize, dst_h: usize) -> Result<Dataset, DataError> {
        let images = self
            .images
            .iter()
            .map(|img| resize_bilinear(img, self.width, self.height, dst_w, dst_h))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Dataset {
            images,
            labels: self.labels.clone(),
            width: dst_w,
            height: dst_h,
        })
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, DataError> {
    fs::read(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_u32_be(bytes: &[u8], offset: usize, path: &Path) -> Result<u32, DataError> {
    let end = offset + 4;
    if bytes.len() < end {
        return Err(DataError::Truncated {
            path: path.to_path_buf(),
            needed: end,
            found: bytes.len(),
        });
    }
    Ok(u32::from_be_bytes([
        bytes[offset],
        bytes[offset + 1],
        bytes[offset + 2],
        bytes[offset + 3],
    ]))
}

/// Parse the big-endian IDX pair used by MNIST-family datasets
/// (image magic 2051, label magic 2049), dividing pixel bytes by 255.
pub fn load_mnist_idx(image_path: &Path, label_path: &Path) -> Result<Dataset, DataError> {
    let img_bytes = read_file(image_path)?;
    let magic = read_u32_be(&img_bytes, 0, image_path)?;
    if magic != IDX_IMAGE_MAGIC {
        return Err(DataError::BadMagic {
            path: image_path.to_path_buf(),
            expected: IDX_IMAGE_MAGIC,
            found: magic,
        });
    }
    let count = read_u32_be(&img_bytes, 4, image_path)? as usize;
    let rows = read_u32_be(&img_bytes, 8, image_path)? as usize;
    let cols = read_u32_be(&img_bytes, 12, image_path)? as usize;
    if rows == 0 || cols == 0 {
        return Err(DataError::ZeroDimension);
    }
    let needed = 16 + count * rows * cols;
    if img_bytes.len() < needed {
        return Err(DataError::Truncated {
            path: image_path.to_path_buf(),
            needed,
            found: img_bytes.len(),
        });
    }

    let lab_bytes = read_file(label_path)?;
    let magic = read_u32_be(&lab_bytes, 0, label_path)?;
    if magic != IDX_LABEL_MAGIC {
        return Err(DataError::BadMagic {
            path: label_path.to_path_buf(),
            expected: IDX_LABEL_MAGIC,
            found: magic,
        });
    }
    let lab_count = read_u32_be(&lab_bytes, 4, label_path)? as usize;
    if lab_count != count {
        return Err(DataError::CountMismatch {
            images: count,
            labels: lab_count,
        });
    }
    let lab_needed = 8 + lab_count;
    if lab_bytes.len() < lab_needed {
        return Err(DataError::Truncated {
            path: label_path.to_path_buf(),
            needed: lab_needed,
            found: lab_bytes.len(),
        });
    }

    let pixels_per = rows * cols;
    let images = (0..count)
        .map(|i| {
            let start = 16 + i * pixels_per;
            img_bytes[start..start + pixels_per]
                .iter()
                .map(|&b| b as f64 / 255.0)
                .collect()
        })
        .collect();
    let labels = lab_bytes[8..8 + count].to_vec();
    Dataset::new(images, labels, cols, rows)
}

/// Parse a CIFAR-10 binary batch (3073-byte records: label byte then the
/// R, G, B planes of a 32x32 image) and convert to grayscale with the
/// ITU-R 601 luminance weights 0.299 / 0.587 / 0.114.
pub fn load_cifar10_gray(batch_path: &Path) -> Result<Dataset, DataError> {
    let bytes = read_file(batch_path)?;
    if bytes.is_empty() || bytes.len() % CIFAR_RECORD_LEN != 0 {
        return Err(DataError::BadRecordLength {
            path: batch_path.to_path_buf(),
            len: bytes.len(),
            record: CIFAR_RECORD_LEN,
        });
    }
    let count = bytes.len() / CIFAR_RECORD_LEN;
    let plane = 1024;
    let mut images = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    for rec in bytes.chunks_exact(CIFAR_RECORD_LEN) {
        labels.push(rec[0]);
        let (r, g, b) = (&rec[1..], &rec[1 + plane..], &rec[1 + 2 * plane..]);
        let gray = (0..plane)
            .map(|i| {
                (0.299 * r[i] as f64 + 0.587 * g[i] as f64 + 0.114 * b[i] as f64) / 255.0
            })
            .collect();
        images.push(gray);
    }
    Dataset::new(images, labels, 32, 32)
}

/// Bilinear interpolation on a corner-aligned sample grid. Output pixels are
/// convex combinations of input pixels, so the range never grows.
pub fn resize_bilinear(
    image: &[f64],
    src_w: usize,
    src_h: usize,
    dst_w: usize,
    dst_h: usize,
) -> Result<Vec<f64>, DataError> {
    if src_w == 0 || src_h == 0 || dst_w == 0 || dst_h == 0 {
        return Err(DataError::ZeroDimension);
    }
    if image.len() != src_w * src_h {
        return Err(DataError::Invalid(format!(
            "image length {} does not match {src_w}x{src_h}",
            image.len()
        )));
    }
    // Corner alignment; a single-pixel output samples the source center.
    let coord = |dst: usize, dst_n: usize, src_n: usize| -> f64 {
        if dst_n > 1 {
            dst as f64 * (src_n - 1) as f64 / (dst_n - 1) as f64
        } else {
            (src_n - 1) as f64 / 2.0
        }
    };
    let mut out = Vec::with_capacity(dst_w * dst_h);
    for y in 0..dst_h {
        let sy = coord(y, dst_h, src_h);
        let y0 = sy.floor() as usize;
        let y1 = (y0 + 1).min(src_h - 1);
        let fy = sy - y0 as f64;
        for x in 0..dst_w {
            let sx = coord(x, dst_w, src_w);
            let x0 = sx.floor() as usize;
            let x1 = (x0 + 1).min(src_w - 1);
            let fx = sx - x0 as f64;
            let top = image[y0 * src_w + x0] * (1.0 - fx) + image[y0 * src_w + x1] * fx;
            let bottom = image[y1 * src_w + x0] * (1.0 - fx) + image[y1 * src_w + x1] * fx;
            out.push(top * (1.0 - fy) + bottom * fy);
        }
    }
    Ok(out)
}

/// Write one grayscale image as binary PGM (P5, maxval 255,
/// byte = round(255 * pixel)).
pub fn write_pgm(path: &Path, width: usize, height: usize, pixels: &[f64]) -> Result<(), DataError> {
    assert_eq!(pixels.len(), width * height, "pixel count mismatch");
    let mut bytes = format!("P5\n{width} {height}\n255\n").into_bytes();
    bytes.extend(
        pixels
            .iter()
            .map(|&p| (p.clamp(0.0, 1.0) * 255.0).round() as u8),
    );
    let mut file = fs::File::create(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    file.write_all(&bytes).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Lay equal-sized images side by side into one row image.
pub fn tile_row(images: &[Vec<f64>], width: usize, height: usize) -> (Vec<f64>, usize, usize) {
    let n = images.len();
    let mut out = vec![0.0; n * width * height];
    for (k, img) in images.iter().enumerate() {
        for y in 0..height {
            let dst = y * n * width + k * width;
            out[dst..dst + width].copy_from_slice(&img[y * width..(y + 1) * width]);
        }
    }
    (out, n * width, height)
}

/// Declarative dataset selection, resolved to a loaded [`Dataset`].
/// Preprocessing order: label filter and prefix first, then resize.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DatasetSpec {
    /// MNIST-family IDX pair.
    MnistIdx {
        images: PathBuf,
        labels: PathBuf,
        #[serde(default)]
        take: Option<usize>,
        #[serde(default)]
        digit: Option<u8>,
        #[serde(default)]
        resize: Option<(usize, usize)>,
    },
    /// CIFAR-10 binary batch, grayscale converted.
    Cifar10Gray {
        batch: PathBuf,
        #[serde(default)]
        take: Option<usize>,
        #[serde(default)]
        resize: Option<(usize, usize)>,
    },
}

impl DatasetSpec {
    pub fn load(&self) -> Result<Dataset, DataError> {
        let (mut dataset, take, digit, resize) = match self {
            DatasetSpec::MnistIdx {
                images,
                labels,
                take,
                digit,
                resize,
            } => (load_mnist_idx(images, labels)?, *take, *digit, *resize),
            DatasetSpec::Cifar10Gray {
                batch,
                take,
                resize,
            } => (load_cifar10_gray(batch)?, *take, None, *resize),
        };
        if take.is_some() || digit.is_some() {
            let n = take.unwrap_or(dataset.len());
            dataset = dataset.take_prefix(n, digit)?;
        }
        if let Some((w, h)) = resize {
            dataset = dataset.resized(w, h)?;
        }
        Ok(dataset)
    }
}
