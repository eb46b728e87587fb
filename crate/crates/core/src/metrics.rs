//! Evaluation metrics: MSE, sliced Wasserstein distance, kernel-MMD KID,
//! and the Welch-t / Bonferroni seed-comparison matrix.
//!
//! KID here is the unbiased squared MMD with the standard cubic polynomial
//! kernel k(x, y) = ((x.y)/d + 1)^3 evaluated on raw pixel vectors rather
//! than network embeddings; the substitution is recorded in run metadata.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::function::beta::beta_reg;
use std::io::{self, Write};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("image sets must be non-empty")]
    EmptySet,
    #[error("images must share one length, found {0} and {1}")]
    RaggedImages(usize, usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("need at least {needed} samples, got {got}")]
    SetTooSmall { needed: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Ordered list of equal-length pixel vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageSet {
    images: Vec<Vec<f64>>,
    image_len: usize,
}

impl ImageSet {
    pub fn new(images: Vec<Vec<f64>>) -> Result<Self, MetricError> {
        let first = images.first().ok_or(MetricError::EmptySet)?.len();
        for img in &images {
            if img.len() != first {
                return Err(MetricError::RaggedImages(first, img.len()));
            }
        }
        Ok(Self {
            images,
            image_len: first,
        })
    }

    pub fn images(&self) -> &[Vec<f64>] {
        &self.images
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn image_len(&self) -> usize {
        self.image_len
    }
}

fn check_same_shape(a: &ImageSet, b: &ImageSet) -> Result<(), MetricError> {
    if a.image_len() != b.image_len() {
        return Err(MetricError::ShapeMismatch(format!(
            "image lengths differ: {} vs {}",
            a.image_len(),
            b.image_len()
        )));
    }
    Ok(())
}

/// Mean over all images and pixels of the squared difference.
pub fn mse(a: &ImageSet, b: &ImageSet) -> Result<f64, MetricError> {
    check_same_shape(a, b)?;
    if a.len() != b.len() {
        return Err(MetricError::ShapeMismatch(format!(
            "set sizes differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let total: f64 = a
        .images()
        .iter()
        .zip(b.images())
        .flat_map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v) * (u - v)))
        .sum();
    Ok(total / (a.len() * a.image_len()) as f64)
}

/// Sliced Wasserstein-2 distance: the root of the mean, over seeded random
/// unit directions, of the squared 1-D Wasserstein-2 distance between the
/// projected samples (sorted order statistics matched one to one).
pub fn sliced_wasserstein(
    a: &ImageSet,
    b: &ImageSet,
    n_projections: usize,
    seed: u64,
) -> Result<f64, MetricError> {
    check_same_shape(a, b)?;
    if a.len() != b.len() {
        return Err(MetricError::ShapeMismatch(format!(
            "set sizes differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if n_projections == 0 {
        return Err(MetricError::InvalidParameter(
            "n_projections must be at least 1".into(),
        ));
    }
    let dim = a.image_len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0.0;
    for _ in 0..n_projections {
        let dir = random_unit_direction(&mut rng, dim);
        let mut pa: Vec<f64> = a.images().iter().map(|img| dot(img, &dir)).collect();
        let mut pb: Vec<f64> = b.images().iter().map(|img| dot(img, &dir)).collect();
        pa.sort_by(|x, y| x.partial_cmp(y).expect("finite projections"));
        pb.sort_by(|x, y| x.partial_cmp(y).expect("finite projections"));
        let w2_sq: f64 = pa
            .iter()
            .zip(&pb)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            / pa.len() as f64;
        total += w2_sq;
    }
    Ok((total / n_projections as f64).sqrt())
}

fn random_unit_direction(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cubic polynomial kernel ((x.y)/d + 1)^3 on raw pixel vectors.
fn poly_kernel(x: &[f64], y: &[f64], dim: f64) -> f64 {
    let v = dot(x, y) / dim + 1.0;
    v * v * v
}

/// Unbiased squared MMD under the polynomial kernel. Can be slightly
/// negative on identical distributions; that is the estimator, not a bug.
pub fn kid(a: &ImageSet, b: &ImageSet) -> Result<f64, MetricError> {
    check_same_shape(a, b)?;
    let m = a.len();
    let n = b.len();
    if m < 2 || n < 2 {
        return Err(MetricError::SetTooSmall {
            needed: 2,
            got: m.min(n),
        });
    }
    let dim = a.image_len() as f64;
    let mut within_a = 0.0;
    for i in 0..m {
        for j in 0..m {
            if i != j {
                within_a += poly_kernel(&a.images()[i], &a.images()[j], dim);
            }
        }
    }
    let mut within_b = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                within_b += poly_kernel(&b.images()[i], &b.images()[j], dim);
            }
        }
    }
    let mut cross = 0.0;
    for i in 0..m {
        for j in 0..n {
            cross += poly_kernel(&a.images()[i], &b.images()[j], dim);
        }
    }
    Ok(within_a / (m * (m - 1)) as f64 + within_b / (n * (n - 1)) as f64
        - 2.0 * cross / (m * n) as f64)
}

/// Welch's t statistic and its two-sided p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchT {
    pub t: f64,
    pub p: f64,
}

/// Welch's unequal-variance t test with Welch-Satterthwaite degrees of
/// freedom; the p-value comes from the regularized incomplete beta function.
/// Degenerate zero-variance pairs: identical means give (0, 1), distinct
/// means give (+-inf, 0).
pub fn welch_t(x: &[f64], y: &[f64]) -> Result<WelchT, MetricError> {
    if x.len() < 2 || y.len() < 2 {
        return Err(MetricError::SetTooSmall {
            needed: 2,
            got: x.len().min(y.len()),
        });
    }
    let (mx, vx) = mean_var(x);
    let (my, vy) = mean_var(y);
    let sx = vx / x.len() as f64;
    let sy = vy / y.len() as f64;
    let se_sq = sx + sy;
    if se_sq == 0.0 {
        return Ok(if mx == my {
            WelchT { t: 0.0, p: 1.0 }
        } else {
            WelchT {
                t: if mx > my {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                },
                p: 0.0,
            }
        });
    }
    let t = (mx - my) / se_sq.sqrt();
    let df = se_sq * se_sq
        / (sx * sx / (x.len() - 1) as f64 + sy * sy / (y.len() - 1) as f64);
    let p = if t == 0.0 {
        1.0
    } else {
        beta_reg(df / 2.0, 0.5, df / (df + t * t))
    };
    Ok(WelchT { t, p })
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// One seed's metric time series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedGroup {
    pub seed: u64,
    pub values: Vec<f64>,
}

/// Pairwise Welch-t matrices over seed groups with a Bonferroni-style
/// significance mask p < alpha / correction_divisor.
#[derive(Debug, Clone, PartialEq)]
pub struct BonferroniMatrix {
    pub seeds: Vec<u64>,
    pub t: Vec<Vec<f64>>,
    pub p: Vec<Vec<f64>>,
    pub significant: Vec<Vec<bool>>,
    pub threshold: f64,
}

pub fn bonferroni_matrix(
    groups: &[SeedGroup],
    alpha: f64,
    correction_divisor: f64,
) -> Result<BonferroniMatrix, MetricError> {
    if groups.len() < 2 {
        return Err(MetricError::SetTooSmall {
            needed: 2,
            got: groups.len(),
        });
    }
    if correction_divisor <= 0.0 {
        return Err(MetricError::InvalidParameter(
            "correction divisor must be positive".into(),
        ));
    }
    let k = groups.len();
    let threshold = alpha / correction_divisor;
    let mut t = vec![vec![0.0; k]; k];
    let mut p = vec![vec![1.0; k]; k];
    let mut significant = vec![vec![false; k]; k];
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            let wt = welch_t(&groups[i].values, &groups[j].values)?;
            t[i][j] = wt.t;
            p[i][j] = wt.p;
            significant[i][j] = wt.p < threshold;
        }
    }
    Ok(BonferroniMatrix {
        seeds: groups.iter().map(|g| g.seed).collect(),
        t,
        p,
        significant,
        threshold,
    })
}

impl BonferroniMatrix {
    fn write_matrix<W: Write, F: Fn(usize, usize) -> String>(
        &self,
        w: &mut W,
        label: &str,
        cell: F,
    ) -> io::Result<()> {
        write!(w, "{label}")?;
        for s in &self.seeds {
            write!(w, ",{s}")?;
        }
        writeln!(w)?;
        for (i, s) in self.seeds.iter().enumerate() {
            write!(w, "{s}")?;
            for j in 0..self.seeds.len() {
                write!(w, ",{}", cell(i, j))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn write_t_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        self.write_matrix(w, "t_value", |i, j| format!("{}", self.t[i][j]))
    }

    pub fn write_p_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        self.write_matrix(w, "p_value", |i, j| format!("{}", self.p[i][j]))
    }

    pub fn write_significance_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        self.write_matrix(w, "significant", |i, j| {
            if self.significant[i][j] { "1" } else { "0" }.to_string()
        })
    }
}
