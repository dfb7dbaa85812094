//! Stochastic estimates of the SKD gradient.
//!
//! Only `T₁` and `T₂` depend on the data. Both are `N` times a mean over a
//! uniformly drawn data point, so a batch `X` of `b` i.i.d. uniform indices
//! gives the unbiased estimates
//!
//! ```text
//! T̂₁(X) = N/b Σ_i Σ_j K²(s_i, X_j),     T̂₂^{k,l}(X) = N/b Σ_j ∂ˡ K²(s_k, X_j).
//! ```
//!
//! The *one-sample* gradient plugs a single batch into both terms and is
//! biased because it squares `T̂₁`. The *two-sample* gradient uses independent
//! batches `X`, `Y` and is unbiased:
//!
//! ```text
//! T̂₁(X) T̂₁(Y) Υ / ‖K_S‖⁴_F − 2 T̂₁(X) T̂₂(Y) / ‖K_S‖²_F.
//! ```
//!
//! `‖K_S‖²_F` and `Υ` involve landmarks only and are always computed exactly.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, NystromSample};
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::rng::SkdRng;
use crate::skd::{assemble_gradient, data_sums, landmark_terms, DataSums, LandmarkTerms, SkdGradient};

/// Indices into the dataset, drawn with replacement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Batch {
    indices: Vec<usize>,
}

impl Batch {
    pub fn new(indices: Vec<usize>, n_points: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::invalid("batch", "must contain at least one index"));
        }
        if let Some(&i) = indices.iter().find(|&&i| i >= n_points) {
            return Err(Error::IndexOutOfRange { index: i, len: n_points });
        }
        Ok(Self { indices })
    }

    /// Every data index exactly once, in order.
    pub fn full(n_points: usize) -> Self {
        Self {
            indices: (0..n_points).collect(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// `b` i.i.d. uniform indices in `0..n_points`.
pub fn draw_batch(n_points: usize, b: usize, rng: &mut SkdRng) -> Result<Batch> {
    if n_points == 0 || b == 0 {
        return Err(Error::invalid("batch", "need n_points >= 1 and b >= 1"));
    }
    let indices = (0..b).map(|_| rng.random_range(0..n_points)).collect();
    Ok(Batch { indices })
}

/// Which gradient the descent follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimatorKind {
    Exact,
    OneSample { batch_size: usize },
    TwoSample { batch_x: usize, batch_y: usize },
}

impl EstimatorKind {
    /// Two-sample estimator with total batch `b` split as evenly as possible.
    pub fn two_sample_split(b: usize) -> Result<Self> {
        if b < 2 {
            return Err(Error::invalid("batch_size", "two-sample estimator needs b >= 2"));
        }
        Ok(EstimatorKind::TwoSample {
            batch_x: b / 2,
            batch_y: b - b / 2,
        })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            EstimatorKind::Exact => Ok(()),
            EstimatorKind::OneSample { batch_size } if batch_size >= 1 => Ok(()),
            EstimatorKind::TwoSample { batch_x, batch_y } if batch_x >= 1 && batch_y >= 1 => Ok(()),
            _ => Err(Error::invalid("batch_size", "stochastic estimators need batch sizes >= 1")),
        }
    }
}

fn check(data: &Dataset, sample: &NystromSample, batch: &Batch) -> Result<()> {
    if sample.dim() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            got: sample.dim(),
        });
    }
    if let Some(&i) = batch.indices.iter().find(|&&i| i >= data.n_points()) {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: data.n_points(),
        });
    }
    Ok(())
}

/// `T̂₁` and `T̂₂` for one batch.
pub fn batch_sums<K: Kernel + ?Sized>(
    data: &Dataset,
    sample: &NystromSample,
    batch: &Batch,
    kernel: &K,
) -> Result<DataSums> {
    check(data, sample, batch)?;
    let scale = data.n_points() as f64 / batch.len() as f64;
    let rows = batch.indices.iter().map(|&i| data.row(i));
    Ok(data_sums(sample, kernel, rows, scale))
}

pub fn t1_hat<K: Kernel + ?Sized>(data: &Dataset, sample: &NystromSample, batch: &Batch, kernel: &K) -> Result<f64> {
    check(data, sample, batch)?;
    let scale = data.n_points() as f64 / batch.len() as f64;
    // same accumulation order as the exact cross sum
    let mut per_landmark = vec![0.0; sample.n_landmarks()];
    for &i in &batch.indices {
        let x = data.row(i);
        for (acc, s) in per_landmark.iter_mut().zip(sample.landmarks()) {
            *acc += kernel.eval_sq(s, x);
        }
    }
    let total: f64 = per_landmark.iter().sum();
    Ok(if scale == 1.0 { total } else { scale * total })
}

/// `T̂₂^{k,l}` for landmark `k`, coordinate `l` (both 0-based).
pub fn t2_hat<K: Kernel + ?Sized>(
    data: &Dataset,
    sample: &NystromSample,
    batch: &Batch,
    k: usize,
    l: usize,
    kernel: &K,
) -> Result<f64> {
    check(data, sample, batch)?;
    if k >= sample.n_landmarks() {
        return Err(Error::IndexOutOfRange {
            index: k,
            len: sample.n_landmarks(),
        });
    }
    if l >= sample.dim() {
        return Err(Error::CoordinateOutOfRange { index: l, dim: sample.dim() });
    }
    let scale = data.n_points() as f64 / batch.len() as f64;
    let sk = sample.landmark(k);
    let total: f64 = batch.indices.iter().map(|&i| kernel.sq_partial_left(sk, data.row(i), l)).sum();
    Ok(if scale == 1.0 { total } else { scale * total })
}

/// One-sample gradient estimate from precomputed landmark terms.
pub fn one_sample_gradient_with<K: Kernel + ?Sized>(
    data: &Dataset,
    sample: &NystromSample,
    batch: &Batch,
    kernel: &K,
    landmarks: &LandmarkTerms,
) -> Result<SkdGradient> {
    let s = batch_sums(data, sample, batch, kernel)?;
    Ok(assemble_gradient(landmarks, s.t1 * s.t1, s.t1, &s.t2, sample.dim()))
}

/// One-sample (biased) gradient estimate; one batch shared by every
/// coordinate.
pub fn one_sample_gradient<K: Kernel + ?Sized>(
    data: &Dataset,
    sample: &NystromSample,
    batch: &Batch,
    kernel: &K,
) -> Result<SkdGradient> {
    one_sample_gradient_with(data, sample, batch, kernel, &landmark_terms(sample, kernel))
}

/// Two-sample gradient estimate from precomputed landmark terms.
pub fn two_sample_gradient_with<K: Kernel + ?Sized>(
    data: &Dataset,
    sample: &NystromSample,
    batch_x: &Batch,
    batch_y: &Batch,
    kernel: &K,
    landmarks: &LandmarkTerms,
) -> Result<SkdGradient> {
    let x = batch_sums(data, sample, batch_x, kernel)?;
    let y = batch_sums(data, sample, batch_y, kernel)?;
    Ok(assemble_gradient(landmarks, x.t1 * y.t1, x.t1, &y.t2, sample.dim()))
}

/// Two-sample (unbiased) gradient estimate from independent batches.
pub fn two_sample_gradient<K: Kernel + ?Sized>(
    data: &Dataset,
    sample: &NystromSample,
    batch_x: &Batch,
    batch_y: &Batch,
    kernel: &K,
) -> Result<SkdGradient> {
    two_sample_gradient_with(data, sample, batch_x, batch_y, kernel, &landmark_terms(sample, kernel))
}
