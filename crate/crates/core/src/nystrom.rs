//! Nyström approximations and their accuracy.
//!
//! For landmarks `S`, `K̂(S) = C W† Cᵀ` with `C_ik = K(x_i, s_k)` and
//! `W_kj = K(s_k, s_j)`. The pseudoinverse zeroes eigenvalues of `W` below
//! `1e-10 · λ_max(W)`. The residual `K − K̂(S)` is a Schur complement, hence
//! PSD, so its trace norm is its trace and its spectral norm its largest
//! eigenvalue.
//!
//! The free functions build dense `N × N` matrices. [`NystromEvaluator`]
//! caches the `S`-independent parts (kernel matrix, its spectrum, `‖K‖²_F`) to
//! evaluate many samples against one dataset, and computes the trace error
//! without ever forming an `N × N` matrix.

use std::sync::OnceLock;

use faer::{ColRef, Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, NystromSample};
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::linalg::{lanczos_largest, pinv_sqrt_factor, symmetric_eigenvalues, symmetric_pinv};
use crate::skd::{data_frob_sq, SkdObjective};

/// Relative eigenvalue cutoff of the landmark pseudoinverse.
pub const PINV_REL_CUTOFF: f64 = 1e-10;
/// Largest `N` for which residual spectra come from a dense eigensolve;
/// above it the spectral norm comes from Lanczos iterations.
pub const DENSE_SPECTRAL_MAX_N: usize = 2000;
/// Residual eigenvalues below `-PSD_TOLERANCE · ‖K‖₂` are rejected.
pub const PSD_TOLERANCE: f64 = 1e-6;
/// Relative tolerance on the largest residual eigenvalue.
pub const SPECTRAL_TOL: f64 = 1e-10;
const LANCZOS_MAX_STEPS: usize = 500;
const PSD_CHECK_TOL: f64 = 1e-8;
const PSD_CHECK_MAX_STEPS: usize = 100;
/// Norms below this fraction of the matching norm of `K` count as zero when
/// forming approximation factors.
pub const ZERO_NORM_REL: f64 = 1e-8;

/// Trace, Frobenius and spectral norms of a PSD residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualNorms {
    pub trace: f64,
    pub frob: f64,
    pub spec: f64,
}

/// Residual norms of a Nyström sample and their ratios to the optimal
/// rank-`n` residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproximationReport {
    pub trace_err: f64,
    pub frob_err: f64,
    pub spec_err: f64,
    pub optimal: ResidualNorms,
    #[serde(serialize_with = "serialize_factor")]
    pub factor_tr: f64,
    #[serde(serialize_with = "serialize_factor")]
    pub factor_f: f64,
    #[serde(serialize_with = "serialize_factor")]
    pub factor_sp: f64,
    pub rank_used: usize,
}

/// Infinite factors (zero optimal error, nonzero Nyström error) become JSON
/// `null`.
pub fn serialize_factor<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

/// `numerator / denominator`, with `0/0 = 1` and `x/0 = ∞` for `x > 0`;
/// values below `zero_tol` count as zero.
pub fn approximation_factor(numerator: f64, denominator: f64, zero_tol: f64) -> f64 {
    let num_zero = numerator <= zero_tol;
    let den_zero = denominator <= zero_tol;
    match (num_zero, den_zero) {
        (true, true) => 1.0,
        (false, true) => f64::INFINITY,
        _ => numerator / denominator,
    }
}

/// The `N × N` kernel matrix `K(x_i, x_j)`.
pub fn kernel_matrix<K: Kernel + ?Sized>(data: &Dataset, kernel: &K) -> Mat<f64> {
    let n = data.n_points();
    let mut k = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = kernel.eval(data.row(i), data.row(i));
        for j in 0..i {
            let v = kernel.eval(data.row(i), data.row(j));
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// `C` with `C_ik = K(x_i, s_k)`.
pub fn cross_kernel_matrix<K: Kernel + ?Sized>(data: &Dataset, sample: &NystromSample, kernel: &K) -> Mat<f64> {
    Mat::from_fn(data.n_points(), sample.n_landmarks(), |i, k| kernel.eval(data.row(i), sample.landmark(k)))
}

/// `W = K_S` with `W_kj = K(s_k, s_j)`.
pub fn landmark_kernel_matrix<K: Kernel + ?Sized>(sample: &NystromSample, kernel: &K) -> Mat<f64> {
    let n = sample.n_landmarks();
    Mat::from_fn(n, n, |k, j| kernel.eval(sample.landmark(k), sample.landmark(j)))
}

/// `F` (`N × r`, `r = rank W`) with `K̂(S) = F Fᵀ`.
pub fn nystrom_factor<K: Kernel + ?Sized>(data: &Dataset, sample: &NystromSample, kernel: &K) -> Result<Mat<f64>> {
    sample.check_against(data)?;
    let g = pinv_sqrt_factor(landmark_kernel_matrix(sample, kernel).as_ref(), PINV_REL_CUTOFF)?;
    Ok(cross_kernel_matrix(data, sample, kernel) * g)
}

/// Dense `K̂(S)`.
pub fn nystrom_matrix<K: Kernel + ?Sized>(data: &Dataset, sample: &NystromSample, kernel: &K) -> Result<Mat<f64>> {
    let f = nystrom_factor(data, sample, kernel)?;
    Ok(&f * f.transpose())
}

/// Column-sampling form `C W† Cᵀ`, with `C` the columns of `K` at `indices`
/// and `W` the matching principal submatrix.
pub fn nystrom_from_columns<K: Kernel + ?Sized>(data: &Dataset, indices: &[usize], kernel: &K) -> Result<Mat<f64>> {
    let n_points = data.n_points();
    if indices.is_empty() {
        return Err(Error::InvalidInput("column sample must not be empty".into()));
    }
    if let Some(&i) = indices.iter().find(|&&i| i >= n_points) {
        return Err(Error::IndexOutOfRange { index: i, len: n_points });
    }
    let k = kernel_matrix(data, kernel);
    let c = Mat::from_fn(n_points, indices.len(), |i, j| k[(i, indices[j])]);
    let w = Mat::from_fn(indices.len(), indices.len(), |a, b| k[(indices[a], indices[b])]);
    let w_pinv = symmetric_pinv(w.as_ref(), PINV_REL_CUTOFF)?;
    Ok(&c * &w_pinv * c.transpose())
}

fn check_psd(min_eigenvalue: f64, k_spec: f64) -> Result<()> {
    let tolerance = PSD_TOLERANCE * k_spec;
    if min_eigenvalue < -tolerance {
        return Err(Error::NotPsd {
            min_eigenvalue,
            tolerance,
        });
    }
    Ok(())
}

fn dense_residual_norms(residual: MatRef<'_, f64>, k_spec: f64) -> Result<ResidualNorms> {
    let n = residual.nrows();
    let eig = symmetric_eigenvalues(residual)?;
    check_psd(eig.first().copied().unwrap_or(0.0), k_spec)?;
    let trace = (0..n).map(|i| residual[(i, i)]).sum::<f64>();
    let frob = (0..n)
        .flat_map(|j| (0..n).map(move |i| (i, j)))
        .map(|(i, j)| residual[(i, j)].powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(ResidualNorms {
        trace: trace.max(0.0),
        frob,
        spec: eig.last().copied().unwrap_or(0.0).max(0.0),
    })
}

/// Norms of `K − approx` for a Nyström approximation `approx` of this
/// dataset's kernel matrix. Dense eigensolve; rejects residuals that are
/// clearly not PSD.
pub fn residual_norms<K: Kernel + ?Sized>(data: &Dataset, approx: MatRef<'_, f64>, kernel: &K) -> Result<ResidualNorms> {
    let n = data.n_points();
    if approx.nrows() != n || approx.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: approx.nrows(),
        });
    }
    let k = kernel_matrix(data, kernel);
    let k_spec = symmetric_eigenvalues(k.as_ref())?.last().copied().unwrap_or(0.0);
    let residual = &k - approx;
    dense_residual_norms(residual.as_ref(), k_spec)
}

fn optimal_from_spectrum(descending: &[f64], n: usize) -> ResidualNorms {
    let tail = &descending[n.min(descending.len())..];
    ResidualNorms {
        trace: tail.iter().map(|l| l.abs()).sum(),
        frob: tail.iter().map(|l| l * l).sum::<f64>().sqrt(),
        spec: tail.iter().map(|l| l.abs()).fold(0.0, f64::max),
    }
}

fn descending_spectrum(k: MatRef<'_, f64>) -> Result<Vec<f64>> {
    let mut eig = symmetric_eigenvalues(k)?;
    eig.reverse();
    Ok(eig)
}

/// Residual norms of the best rank-`n` approximation of `K` (spectral
/// truncation).
pub fn optimal_rank_n<K: Kernel + ?Sized>(data: &Dataset, n: usize, kernel: &K) -> Result<ResidualNorms> {
    if n == 0 || n > data.n_points() {
        return Err(Error::invalid("n", format!("need 1 <= n <= N = {}, got {n}", data.n_points())));
    }
    let spectrum = descending_spectrum(kernel_matrix(data, kernel).as_ref())?;
    Ok(optimal_from_spectrum(&spectrum, n))
}

/// Residual norms and approximation factors of `K̂(S)` (dense computation).
pub fn approximation_factors<K: Kernel + ?Sized>(
    data: &Dataset,
    sample: &NystromSample,
    kernel: &K,
) -> Result<ApproximationReport> {
    NystromEvaluator::new(data, kernel).report(sample)
}

/// Which quantities to evaluate for a sample.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricSet {
    pub skd: bool,
    pub trace: bool,
    pub frobenius: bool,
    pub spectral: bool,
    /// Approximation factors for every requested norm.
    pub factors: bool,
}

impl MetricSet {
    pub fn all() -> Self {
        Self {
            skd: true,
            trace: true,
            frobenius: true,
            spectral: true,
            factors: true,
        }
    }

    pub fn is_empty(&self) -> bool {
        !(self.skd || self.trace || self.frobenius || self.spectral || self.factors)
    }

    /// Parses a comma-separated list of `skd`, `trace`, `frobenius`,
    /// `spectral`, `factors` (or `all`).
    pub fn parse(list: &str) -> Result<Self> {
        let mut set = Self::default();
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item {
                "skd" => set.skd = true,
                "trace" => set.trace = true,
                "frobenius" | "frob" => set.frobenius = true,
                "spectral" | "spec" => set.spectral = true,
                "factors" => set.factors = true,
                "all" => set = Self::all(),
                other => return Err(Error::InvalidInput(format!("unknown metric {other:?}"))),
            }
        }
        if set.is_empty() {
            return Err(Error::InvalidInput("metric list is empty".into()));
        }
        Ok(set)
    }

    fn needs_kernel_matrix(&self) -> bool {
        self.frobenius || self.spectral
    }
}

/// Values for a [`MetricSet`]; unrequested entries are `None`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricValues {
    pub skd: Option<f64>,
    pub trace: Option<f64>,
    pub frobenius: Option<f64>,
    pub spectral: Option<f64>,
    pub factor_tr: Option<f64>,
    pub factor_f: Option<f64>,
    pub factor_sp: Option<f64>,
}

/// Evaluates Nyström samples against a fixed dataset, caching the
/// sample-independent quantities.
pub struct NystromEvaluator<'a, K: Kernel + ?Sized> {
    data: &'a Dataset,
    kernel: &'a K,
    kernel_matrix: OnceLock<Mat<f64>>,
    spectrum: OnceLock<Result<Vec<f64>>>,
    data_frob_sq: OnceLock<f64>,
    trace_k: f64,
}

impl<'a, K: Kernel + ?Sized> NystromEvaluator<'a, K> {
    pub fn new(data: &'a Dataset, kernel: &'a K) -> Self {
        let trace_k = data.rows().map(|x| kernel.eval(x, x)).sum();
        Self {
            data,
            kernel,
            kernel_matrix: OnceLock::new(),
            spectrum: OnceLock::new(),
            data_frob_sq: OnceLock::new(),
            trace_k,
        }
    }

    /// Seeds the cached `Σ K²(x_i, x_j)` (as computed by the SKD module).
    pub fn with_data_frob_sq(self, value: f64) -> Self {
        let _ = self.data_frob_sq.set(value);
        self
    }

    pub fn data(&self) -> &'a Dataset {
        self.data
    }

    pub fn data_frob_sq(&self) -> f64 {
        *self.data_frob_sq.get_or_init(|| data_frob_sq(self.data, self.kernel))
    }

    pub fn kernel_matrix(&self) -> &Mat<f64> {
        self.kernel_matrix.get_or_init(|| kernel_matrix(self.data, self.kernel))
    }

    /// Eigenvalues of `K`, descending.
    pub fn spectrum(&self) -> Result<&[f64]> {
        match self.spectrum.get_or_init(|| descending_spectrum(self.kernel_matrix().as_ref())) {
            Ok(v) => Ok(v),
            Err(_) => Err(Error::Eigen),
        }
    }

    fn kernel_norms(&self) -> Result<ResidualNorms> {
        let s = self.spectrum()?;
        Ok(ResidualNorms {
            trace: self.trace_k,
            frob: s.iter().map(|l| l * l).sum::<f64>().sqrt(),
            spec: s.first().copied().unwrap_or(0.0),
        })
    }

    pub fn optimal(&self, n: usize) -> Result<ResidualNorms> {
        if n == 0 || n > self.data.n_points() {
            return Err(Error::invalid("n", format!("need 1 <= n <= N = {}, got {n}", self.data.n_points())));
        }
        Ok(optimal_from_spectrum(self.spectrum()?, n))
    }

    /// `trace(K − K̂(S))` from the diagonal of `K̂` only: `O(n³ + N n²)` time,
    /// `O(N n)` memory.
    pub fn trace_residual(&self, sample: &NystromSample) -> Result<f64> {
        let f = nystrom_factor(self.data, sample, self.kernel)?;
        let diag_hat: f64 = (0..f.nrows())
            .map(|i| (0..f.ncols()).map(|j| f[(i, j)] * f[(i, j)]).sum::<f64>())
            .sum();
        Ok((self.trace_k - diag_hat).max(0.0))
    }

    /// Trace, Frobenius and spectral norms of `K − K̂(S)`.
    pub fn residual(&self, sample: &NystromSample) -> Result<ResidualNorms> {
        let f = nystrom_factor(self.data, sample, self.kernel)?;
        let k = self.kernel_matrix();
        let n = self.data.n_points();
        let k_spec = self.spectrum()?.first().copied().unwrap_or(0.0);
        if n <= DENSE_SPECTRAL_MAX_N {
            let residual = k - &f * f.transpose();
            return dense_residual_norms(residual.as_ref(), k_spec);
        }
        // ‖K − FFᵀ‖²_F = ‖K‖²_F − 2 tr(Fᵀ K F) + ‖FᵀF‖²_F
        let kf = k * &f;
        let ftf = f.transpose() * &f;
        let cross: f64 = (0..f.ncols())
            .map(|j| (0..n).map(|i| f[(i, j)] * kf[(i, j)]).sum::<f64>())
            .sum();
        let k_frob_sq: f64 = self.spectrum()?.iter().map(|l| l * l).sum();
        let ftf_sq: f64 = (0..ftf.ncols())
            .flat_map(|j| (0..ftf.nrows()).map(move |i| (i, j)))
            .map(|(i, j)| ftf[(i, j)].powi(2))
            .sum();
        let frob = (k_frob_sq - 2.0 * cross + ftf_sq).max(0.0).sqrt();
        let trace = (0..n)
            .map(|i| k[(i, i)] - (0..f.ncols()).map(|j| f[(i, j)].powi(2)).sum::<f64>())
            .sum::<f64>()
            .max(0.0);
        let residual_apply = |v: &[f64], out: &mut [f64]| {
            let v = ColRef::from_slice(v);
            let r = k * v - &f * (f.transpose() * v);
            out.iter_mut().enumerate().for_each(|(i, o)| *o = r[i]);
        };
        let spec = lanczos_largest(n, residual_apply, SPECTRAL_TOL, LANCZOS_MAX_STEPS)?.max(0.0);
        // λ_min(R) = σ − λ_max(σI − R); the shift keeps the top of the spectrum
        // isolated. Ritz values underestimate, so λ_min is never understated.
        let shift = spec.max(k_spec);
        let shifted = |v: &[f64], out: &mut [f64]| {
            residual_apply(v, out);
            out.iter_mut().zip(v).for_each(|(o, x)| *o = shift * x - *o);
        };
        let min_eig = shift - lanczos_largest(n, shifted, PSD_CHECK_TOL, PSD_CHECK_MAX_STEPS)?;
        check_psd(min_eig, k_spec)?;
        Ok(ResidualNorms {
            trace,
            frob,
            spec,
        })
    }

    /// Full [`ApproximationReport`] for `sample`.
    pub fn report(&self, sample: &NystromSample) -> Result<ApproximationReport> {
        let n = sample.n_landmarks();
        let res = self.residual(sample)?;
        let opt = self.optimal(n)?;
        let kn = self.kernel_norms()?;
        Ok(ApproximationReport {
            trace_err: res.trace,
            frob_err: res.frob,
            spec_err: res.spec,
            optimal: opt,
            factor_tr: approximation_factor(res.trace, opt.trace, ZERO_NORM_REL * kn.trace),
            factor_f: approximation_factor(res.frob, opt.frob, ZERO_NORM_REL * kn.frob),
            factor_sp: approximation_factor(res.spec, opt.spec, ZERO_NORM_REL * kn.spec),
            rank_used: n,
        })
    }

    /// Evaluates only what `metrics` asks for. With `skd` and `trace` alone
    /// no `N × N` matrix is formed.
    pub fn evaluate(&self, sample: &NystromSample, metrics: &MetricSet) -> Result<MetricValues> {
        sample.check_against(self.data)?;
        let mut out = MetricValues::default();
        if metrics.skd {
            let obj = SkdObjective::with_data_frob_sq(self.data, self.kernel, self.data_frob_sq());
            out.skd = Some(obj.value(sample)?);
        }
        let want_trace = metrics.trace || (metrics.factors && !metrics.needs_kernel_matrix());
        if metrics.needs_kernel_matrix() {
            let res = self.residual(sample)?;
            if metrics.trace {
                out.trace = Some(res.trace);
            }
            if metrics.frobenius {
                out.frobenius = Some(res.frob);
            }
            if metrics.spectral {
                out.spectral = Some(res.spec);
            }
        } else if want_trace {
            out.trace = Some(self.trace_residual(sample)?);
        }
        if metrics.factors {
            let opt = self.optimal(sample.n_landmarks())?;
            let kn = self.kernel_norms()?;
            out.factor_tr = out.trace.map(|v| approximation_factor(v, opt.trace, ZERO_NORM_REL * kn.trace));
            out.factor_f = out.frobenius.map(|v| approximation_factor(v, opt.frob, ZERO_NORM_REL * kn.frob));
            out.factor_sp = out.spectral.map(|v| approximation_factor(v, opt.spec, ZERO_NORM_REL * kn.spec));
        }
        Ok(out)
    }
}
