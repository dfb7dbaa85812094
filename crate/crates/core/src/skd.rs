//! The radial squared-kernel discrepancy (SKD) criterion.
//!
//! For data `D = {x_1..x_N}` and landmarks `S = {s_1..s_n}`,
//!
//! ```text
//! R(S) = ‖K‖²_F − T₁² / ‖K_S‖²_F,    T₁ = Σ_i Σ_j K²(s_j, x_i),
//! ```
//!
//! with `R(S) = ‖K‖²_F` when `‖K_S‖_F = 0`. Writing
//! `T₂^{k,l} = Σ_i ∂ˡ K²(s_k, x_i)` (derivative in coordinate `l` of the left
//! argument) and `Υ^{k,l} = ∂ᵈ K²(s_k, s_k) + 2 Σ_{j≠k} ∂ˡ K²(s_k, s_j)`, the
//! gradient is
//!
//! ```text
//! ∂R/∂[s_k]_l = T₁² Υ^{k,l} / ‖K_S‖⁴_F − 2 T₁ T₂^{k,l} / ‖K_S‖²_F.
//! ```
//!
//! `‖K‖²_F` is `O(N²)` and independent of `S`; [`SkdObjective`] computes it
//! once and reuses it. Everything else costs `O(n² d + n N d)`.
//!
//! Sums are accumulated sequentially in a fixed order (data rows outer,
//! landmarks inner), so results are bit-reproducible.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, NystromSample};
use crate::error::{Error, Result};
use crate::kernel::{Kernel, SquaredKernelBounds};

/// The scalar building blocks of `R(S)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkdTerms {
    /// `‖K‖²_F`.
    pub k_frob_sq_data: f64,
    /// `‖K_S‖²_F`.
    pub k_frob_sq_landmarks: f64,
    /// `T₁`.
    pub cross_sum: f64,
    /// `c_S = T₁ / ‖K_S‖²_F` (0 when the landmark norm vanishes).
    pub c_s: f64,
}

impl SkdTerms {
    pub fn value(&self) -> f64 {
        skd_from_parts(self.k_frob_sq_data, self.cross_sum, self.k_frob_sq_landmarks)
    }
}

fn skd_from_parts(k_frob_sq_data: f64, cross_sum: f64, k_frob_sq_landmarks: f64) -> f64 {
    if k_frob_sq_landmarks > 0.0 {
        k_frob_sq_data - cross_sum * cross_sum / k_frob_sq_landmarks
    } else {
        k_frob_sq_data
    }
}

/// Gradient of `R` with respect to all landmark coordinates, flattened in
/// landmark-major order (`n·d` entries).
#[derive(Debug, Clone, PartialEq)]
pub struct SkdGradient {
    values: Vec<f64>,
    dim: usize,
}

impl SkdGradient {
    pub fn new(values: Vec<f64>, dim: usize) -> Self {
        debug_assert!(dim > 0 && values.len().is_multiple_of(dim));
        Self { values, dim }
    }

    pub fn zeros(n_landmarks: usize, dim: usize) -> Self {
        Self::new(vec![0.0; n_landmarks * dim], dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_landmarks(&self) -> usize {
        self.values.len() / self.dim
    }

    /// Gradient block of landmark `k`.
    pub fn block(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Landmark-only quantities: `‖K_S‖²_F` and `Υ` (`n·d`, landmark-major).
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkTerms {
    pub frob_sq: f64,
    pub upsilon: Vec<f64>,
}

/// Computes [`LandmarkTerms`] in `O(n² d)`.
pub fn landmark_terms<K: Kernel + ?Sized>(sample: &NystromSample, kernel: &K) -> LandmarkTerms {
    let n = sample.n_landmarks();
    let d = sample.dim();
    let mut frob_sq = 0.0;
    let mut upsilon = vec![0.0; n * d];
    let mut g = vec![0.0; d];
    for k in 0..n {
        let sk = sample.landmark(k);
        let block = &mut upsilon[k * d..(k + 1) * d];
        for (l, u) in block.iter_mut().enumerate() {
            *u = kernel.sq_partial_diag(sk, l);
        }
        frob_sq += kernel.eval_sq(sk, sk);
        for j in 0..n {
            if j == k {
                continue;
            }
            frob_sq += kernel.eval_sq_with_left_gradient(sk, sample.landmark(j), &mut g);
            block.iter_mut().zip(&g).for_each(|(u, gl)| *u += 2.0 * gl);
        }
    }
    LandmarkTerms { frob_sq, upsilon }
}

/// Data-dependent sums `T₁` and `T₂^{k,l}` (`n·d`, landmark-major) over a
/// collection of data rows, multiplied by `scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSums {
    pub t1: f64,
    pub t2: Vec<f64>,
}

pub(crate) fn data_sums<'a, K: Kernel + ?Sized>(
    sample: &NystromSample,
    kernel: &K,
    rows: impl Iterator<Item = &'a [f64]>,
    scale: f64,
) -> DataSums {
    let n = sample.n_landmarks();
    let d = sample.dim();
    let mut per_landmark = vec![0.0; n];
    let mut t2 = vec![0.0; n * d];
    let mut g = vec![0.0; d];
    for x in rows {
        for k in 0..n {
            per_landmark[k] += kernel.eval_sq_with_left_gradient(sample.landmark(k), x, &mut g);
            t2[k * d..(k + 1) * d].iter_mut().zip(&g).for_each(|(t, gl)| *t += gl);
        }
    }
    let t1 = per_landmark.iter().sum::<f64>() * scale;
    if scale != 1.0 {
        t2.iter_mut().for_each(|t| *t *= scale);
    }
    DataSums { t1, t2 }
}

/// `T₁` and `T₂` over the whole dataset.
pub fn full_data_sums<K: Kernel + ?Sized>(data: &Dataset, sample: &NystromSample, kernel: &K) -> Result<DataSums> {
    sample.check_against(data)?;
    Ok(data_sums(sample, kernel, data.rows(), 1.0))
}

/// `T₁ = Σ_i Σ_j K²(s_j, x_i)` alone, `O(n N d)`.
pub fn cross_sum<K: Kernel + ?Sized>(data: &Dataset, sample: &NystromSample, kernel: &K) -> f64 {
    let mut per_landmark = vec![0.0; sample.n_landmarks()];
    for x in data.rows() {
        for (k, acc) in per_landmark.iter_mut().enumerate() {
            *acc += kernel.eval_sq(sample.landmark(k), x);
        }
    }
    per_landmark.iter().sum()
}

/// `‖K_S‖²_F` alone, `O(n² d)`.
pub fn landmark_frob_sq<K: Kernel + ?Sized>(sample: &NystromSample, kernel: &K) -> f64 {
    let n = sample.n_landmarks();
    let mut total = 0.0;
    for k in 0..n {
        let sk = sample.landmark(k);
        total += kernel.eval_sq(sk, sk);
        for j in (k + 1)..n {
            total += 2.0 * kernel.eval_sq(sk, sample.landmark(j));
        }
    }
    total
}

/// `‖K‖²_F = Σ_i Σ_j K²(x_i, x_j)`, `O(N² d)`.
pub fn data_frob_sq<K: Kernel + ?Sized>(data: &Dataset, kernel: &K) -> f64 {
    let n = data.n_points();
    let mut total = 0.0;
    for i in 0..n {
        let xi = data.row(i);
        let mut row = 0.0;
        for j in (i + 1)..n {
            row += kernel.eval_sq(xi, data.row(j));
        }
        total += 2.0 * row + kernel.eval_sq(xi, xi);
    }
    total
}

/// Combines exact or estimated data sums with landmark terms into a gradient.
///
/// `t1_sq` stands for `T₁²` (or its estimate), `t1` multiplies `T₂`.
pub(crate) fn assemble_gradient(
    landmarks: &LandmarkTerms,
    t1_sq: f64,
    t1: f64,
    t2: &[f64],
    dim: usize,
) -> SkdGradient {
    let f = landmarks.frob_sq;
    if f <= 0.0 {
        return SkdGradient::zeros(t2.len() / dim, dim);
    }
    let a = t1_sq / (f * f);
    let b = 2.0 * t1 / f;
    let values = landmarks
        .upsilon
        .iter()
        .zip(t2)
        .map(|(u, t)| a * u - b * t)
        .collect();
    SkdGradient::new(values, dim)
}

/// The SKD criterion bound to a dataset and kernel, with `‖K‖²_F` cached.
#[derive(Debug, Clone)]
pub struct SkdObjective<'a, K: Kernel + ?Sized> {
    data: &'a Dataset,
    kernel: &'a K,
    data_frob_sq: f64,
}

impl<'a, K: Kernel + ?Sized> SkdObjective<'a, K> {
    /// Computes `‖K‖²_F` (`O(N²)`).
    pub fn new(data: &'a Dataset, kernel: &'a K) -> Self {
        let data_frob_sq = data_frob_sq(data, kernel);
        Self::with_data_frob_sq(data, kernel, data_frob_sq)
    }

    /// Uses a caller-supplied `‖K‖²_F`, e.g. 0 to work with `R` up to its
    /// constant on very large datasets.
    pub fn with_data_frob_sq(data: &'a Dataset, kernel: &'a K, data_frob_sq: f64) -> Self {
        Self {
            data,
            kernel,
            data_frob_sq,
        }
    }

    pub fn data(&self) -> &'a Dataset {
        self.data
    }

    pub fn kernel(&self) -> &'a K {
        self.kernel
    }

    pub fn data_frob_sq(&self) -> f64 {
        self.data_frob_sq
    }

    pub fn terms(&self, sample: &NystromSample) -> Result<SkdTerms> {
        sample.check_against(self.data)?;
        let t1 = cross_sum(self.data, sample, self.kernel);
        let f = landmark_frob_sq(sample, self.kernel);
        Ok(SkdTerms {
            k_frob_sq_data: self.data_frob_sq,
            k_frob_sq_landmarks: f,
            cross_sum: t1,
            c_s: if f > 0.0 { t1 / f } else { 0.0 },
        })
    }

    pub fn value(&self, sample: &NystromSample) -> Result<f64> {
        Ok(self.terms(sample)?.value())
    }

    pub fn gradient(&self, sample: &NystromSample) -> Result<SkdGradient> {
        gradient_impl(self.data, sample, self.kernel)
    }
}

fn gradient_impl<K: Kernel + ?Sized>(data: &Dataset, sample: &NystromSample, kernel: &K) -> Result<SkdGradient> {
    let sums = full_data_sums(data, sample, kernel)?;
    let lm = landmark_terms(sample, kernel);
    Ok(assemble_gradient(&lm, sums.t1 * sums.t1, sums.t1, &sums.t2, sample.dim()))
}

pub fn skd_terms<K: Kernel + ?Sized>(data: &Dataset, sample: &NystromSample, kernel: &K) -> Result<SkdTerms> {
    SkdObjective::new(data, kernel).terms(sample)
}

pub fn skd_value<K: Kernel + ?Sized>(data: &Dataset, sample: &NystromSample, kernel: &K) -> Result<f64> {
    Ok(skd_terms(data, sample, kernel)?.value())
}

/// Exact gradient of `R`; does not need `‖K‖²_F`.
pub fn skd_gradient<K: Kernel + ?Sized>(data: &Dataset, sample: &NystromSample, kernel: &K) -> Result<SkdGradient> {
    gradient_impl(data, sample, kernel)
}

/// The gradient in its `c_S` form, `∂R = c_S² Υ − 2 c_S T₂`, evaluated
/// coordinate by coordinate straight from the kernel partials.
///
/// Slower than [`skd_gradient`]; kept as an independent route for checking.
pub fn skd_gradient_csum<K: Kernel + ?Sized>(
    data: &Dataset,
    sample: &NystromSample,
    kernel: &K,
) -> Result<SkdGradient> {
    sample.check_against(data)?;
    let n = sample.n_landmarks();
    let d = sample.dim();
    let f = landmark_frob_sq(sample, kernel);
    if f <= 0.0 {
        return Ok(SkdGradient::zeros(n, d));
    }
    let c = cross_sum(data, sample, kernel) / f;
    let mut values = Vec::with_capacity(n * d);
    for k in 0..n {
        let sk = sample.landmark(k);
        for l in 0..d {
            let mut upsilon = kernel.sq_partial_diag(sk, l);
            for j in (0..n).filter(|&j| j != k) {
                upsilon += 2.0 * kernel.sq_partial_left(sk, sample.landmark(j), l);
            }
            let t2: f64 = data.rows().map(|x| kernel.sq_partial_left(sk, x, l)).sum();
            values.push(c * c * upsilon - 2.0 * c * t2);
        }
    }
    Ok(SkdGradient::new(values, d))
}

/// Hessian of `R` as an `nd × nd` matrix, assembled block by block from the
/// second-order formulas in terms of `c_S` and its partials
/// `∂c_S = (T₂ − c_S Υ) / ‖K_S‖²_F`. Costs `O(n N d²)`; diagnostic use.
pub fn skd_hessian<K: Kernel + ?Sized>(data: &Dataset, sample: &NystromSample, kernel: &K) -> Result<Mat<f64>> {
    sample.check_against(data)?;
    let n = sample.n_landmarks();
    let d = sample.dim();
    let nd = n * d;
    let lm = landmark_terms(sample, kernel);
    let f = lm.frob_sq;
    if f <= 0.0 {
        return Ok(Mat::zeros(nd, nd));
    }
    let sums = data_sums(sample, kernel, data.rows(), 1.0);
    let c = sums.t1 / f;
    let t2 = &sums.t2;
    let dc: Vec<f64> = (0..nd).map(|i| (t2[i] - c * lm.upsilon[i]) / f).collect();
    // diagonal-derivative part D and off-diagonal landmark part P of Υ = D + 2P
    let diag_part: Vec<f64> = (0..nd).map(|i| kernel.sq_partial_diag(sample.landmark(i / d), i % d)).collect();
    let pair_part: Vec<f64> = (0..nd).map(|i| 0.5 * (lm.upsilon[i] - diag_part[i])).collect();

    let mut h = Mat::<f64>::zeros(nd, nd);
    for k in 0..n {
        let sk = sample.landmark(k);
        for l in 0..d {
            let row = k * d + l;
            for lp in 0..d {
                // same landmark block
                let col = k * d + lp;
                let dd = kernel.sq_second_partials(sk, sk, l, lp).diag_diag;
                let mut ll_landmarks = 0.0;
                for j in (0..n).filter(|&j| j != k) {
                    ll_landmarks += kernel.sq_second_partials(sk, sample.landmark(j), l, lp).left_left;
                }
                let ll_data: f64 = data
                    .rows()
                    .map(|x| kernel.sq_second_partials(sk, x, l, lp).left_left)
                    .sum();
                h[(row, col)] = c * c * dd
                    + 2.0 * c * dc[col] * diag_part[row]
                    + 2.0 * c * c * ll_landmarks
                    + 4.0 * c * dc[col] * pair_part[row]
                    - 2.0 * c * ll_data
                    - 2.0 * dc[col] * t2[row];
            }
            for kp in (0..n).filter(|&kp| kp != k) {
                let skp = sample.landmark(kp);
                for lp in 0..d {
                    let col = kp * d + lp;
                    let lr = kernel.sq_second_partials(sk, skp, l, lp).left_right;
                    h[(row, col)] = 2.0 * c * dc[col] * diag_part[row]
                        + 2.0 * c * c * lr
                        + 4.0 * c * dc[col] * pair_part[row]
                        - 2.0 * dc[col] * t2[row];
                }
            }
        }
    }
    Ok(h)
}

/// Constants of the gradient Lipschitz bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzBounds {
    /// Upper bound on `c_S`.
    pub c0: f64,
    /// Upper bound on every `|∂c_S|`.
    pub c1: f64,
    /// Upper bound on the Frobenius (hence spectral) norm of the Hessian.
    pub l_const: f64,
}

/// Lipschitz constant of `∇R` for `n` landmarks, `N` data points in `ℝᵈ`:
///
/// ```text
/// C₀ = ‖K‖_F / √(nα)
/// C₁ = M₁ / (nα) · [N + (2n−1) C₀]
/// L  = ( n d² [(2n−1)C₀²M₂ + (4n−2)C₀C₁M₁ + 2N(C₀M₂ + C₁M₁)]²
///      + 4n(n−1) d² [C₀²M₂ + (2n−1)C₀C₁M₁ + N C₁M₁]² )^{1/2}
/// ```
pub fn lipschitz_bounds(
    n: usize,
    n_points: usize,
    dim: usize,
    bounds: SquaredKernelBounds,
    k_frob: f64,
) -> Result<LipschitzBounds> {
    if n == 0 || n_points == 0 || dim == 0 {
        return Err(Error::invalid("counts", "n, N and d must all be at least 1"));
    }
    if bounds.alpha.is_nan() || bounds.alpha <= 0.0 {
        return Err(Error::invalid("alpha", format!("must be positive, got {}", bounds.alpha)));
    }
    if k_frob.is_nan() || k_frob < 0.0 {
        return Err(Error::invalid("k_frob", format!("must be nonnegative, got {k_frob}")));
    }
    let SquaredKernelBounds { alpha, m1, m2 } = bounds;
    let nf = n as f64;
    let big_n = n_points as f64;
    let d2 = (dim * dim) as f64;
    let c0 = k_frob / (nf * alpha).sqrt();
    let c1 = m1 / (nf * alpha) * (big_n + (2.0 * nf - 1.0) * c0);
    let same = (2.0 * nf - 1.0) * c0 * c0 * m2 + (4.0 * nf - 2.0) * c0 * c1 * m1 + 2.0 * big_n * (c0 * m2 + c1 * m1);
    let cross = c0 * c0 * m2 + (2.0 * nf - 1.0) * c0 * c1 * m1 + big_n * c1 * m1;
    let l_const = (nf * d2 * same * same + 4.0 * nf * (nf - 1.0) * d2 * cross * cross).sqrt();
    Ok(LipschitzBounds { c0, c1, l_const })
}

/// [`lipschitz_bounds`] for a concrete dataset, kernel and landmark count.
pub fn lipschitz_for<K: Kernel + ?Sized>(data: &Dataset, kernel: &K, n: usize, data_frob_sq: f64) -> Result<LipschitzBounds> {
    lipschitz_bounds(n, data.n_points(), data.dim(), kernel.derivative_bounds(), data_frob_sq.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::GaussianKernel;

    fn line(points: &[f64]) -> Dataset {
        Dataset::new(points.to_vec(), 1).unwrap()
    }

    fn landmarks(points: &[f64]) -> NystromSample {
        NystromSample::new(points.to_vec(), 1).unwrap()
    }

    const E2: f64 = 0.135_335_283_236_612_7;

    #[test]
    fn terms_single_point() {
        let k = GaussianKernel::new(1.0).unwrap();
        let t = skd_terms(&line(&[0.0]), &landmarks(&[0.0]), &k).unwrap();
        assert_eq!(
            t,
            SkdTerms {
                k_frob_sq_data: 1.0,
                k_frob_sq_landmarks: 1.0,
                cross_sum: 1.0,
                c_s: 1.0
            }
        );
        assert_eq!(t.value(), 0.0);
    }

    #[test]
    fn terms_two_points_match_dense_oracle() {
        let k = GaussianKernel::new(1.0).unwrap();
        let data = line(&[0.0, 1.0]);
        let t = skd_terms(&data, &landmarks(&[0.0]), &k).unwrap();
        // dense oracle: square every entry of K and sum
        let km = [[1.0, (-1.0f64).exp()], [(-1.0f64).exp(), 1.0]];
        let frob: f64 = km.iter().flatten().map(|v| v * v).sum();
        assert!((t.k_frob_sq_data - frob).abs() < 1e-15);
        assert!((t.k_frob_sq_data - (2.0 + 2.0 * E2)).abs() < 1e-15);
        assert_eq!(t.k_frob_sq_landmarks, 1.0);
        assert!((t.cross_sum - (1.0 + E2)).abs() < 1e-15);
        let r = skd_value(&data, &landmarks(&[0.0]), &k).unwrap();
        assert!((r - (1.0 - (-4.0f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn duplicated_landmarks() {
        let k = GaussianKernel::new(1.0).unwrap();
        let t = skd_terms(&line(&[0.0]), &landmarks(&[0.0, 0.0]), &k).unwrap();
        assert_eq!(t.k_frob_sq_landmarks, 4.0);
        assert!(t.value().abs() < 1e-15);
    }

    #[test]
    fn symmetric_configuration_has_zero_gradient() {
        let k = GaussianKernel::new(1.0).unwrap();
        let g = skd_gradient(&line(&[-1.0, 1.0]), &landmarks(&[0.0]), &k).unwrap();
        assert_eq!(g.as_slice(), &[0.0]);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let k = GaussianKernel::new(1.0).unwrap();
        let s = NystromSample::new(vec![0.0, 0.0], 2).unwrap();
        assert!(matches!(skd_value(&line(&[0.0]), &s, &k), Err(Error::DimensionMismatch { .. })));
        assert!(skd_gradient(&line(&[0.0]), &s, &k).is_err());
    }

    /// A kernel that vanishes everywhere, to reach the zero-norm branch.
    struct ZeroKernel;

    impl Kernel for ZeroKernel {
        fn eval(&self, _: &[f64], _: &[f64]) -> f64 {
            0.0
        }
        fn sq_partial_left(&self, _: &[f64], _: &[f64], _: usize) -> f64 {
            0.0
        }
        fn sq_partial_diag(&self, _: &[f64], _: usize) -> f64 {
            0.0
        }
        fn sq_second_partials(&self, _: &[f64], _: &[f64], _: usize, _: usize) -> crate::kernel::SecondPartials {
            crate::kernel::SecondPartials {
                left_left: 0.0,
                left_right: 0.0,
                diag_diag: 0.0,
            }
        }
        fn derivative_bounds(&self) -> SquaredKernelBounds {
            SquaredKernelBounds { alpha: 0.0, m1: 0.0, m2: 0.0 }
        }
    }

    #[test]
    fn zero_landmark_norm_branch() {
        let data = line(&[0.0, 1.0]);
        let s = landmarks(&[0.5]);
        let obj = SkdObjective::with_data_frob_sq(&data, &ZeroKernel, 3.5);
        assert_eq!(obj.value(&s).unwrap(), 3.5);
        assert_eq!(obj.gradient(&s).unwrap().as_slice(), &[0.0]);
        assert_eq!(obj.terms(&s).unwrap().c_s, 0.0);
    }

    #[test]
    fn lipschitz_degenerate_and_structural_cases() {
        let b = SquaredKernelBounds { alpha: 1.0, m1: 0.0, m2: 0.0 };
        let lb = lipschitz_bounds(3, 10, 2, b, 4.0).unwrap();
        assert_eq!((lb.c1, lb.l_const), (0.0, 0.0));
        // with n = 1 only the diagonal-block term contributes
        let b = SquaredKernelBounds { alpha: 1.0, m1: 1.0, m2: 1.0 };
        let lb = lipschitz_bounds(1, 5, 3, b, 2.0).unwrap();
        let (c0, c1) = (lb.c0, lb.c1);
        let same = c0 * c0 + 2.0 * c0 * c1 + 10.0 * (c0 + c1);
        assert!((lb.l_const - 3.0 * same).abs() < 1e-12 * lb.l_const);
        let bad = SquaredKernelBounds { alpha: 0.0, m1: 1.0, m2: 1.0 };
        assert!(lipschitz_bounds(1, 2, 1, bad, 1.0).is_err());
    }

    #[test]
    fn lipschitz_matches_independent_transcription() {
        // values from an independent scripted transcription of the formulas
        let b = SquaredKernelBounds { alpha: 1.0, m1: 1.0, m2: 1.0 };
        let lb = lipschitz_bounds(1, 2, 1, b, 2f64.sqrt()).unwrap();
        assert!((lb.c0 - 2f64.sqrt()).abs() < 1e-15);
        assert!((lb.c1 - (2.0 + 2f64.sqrt())).abs() < 1e-14);
        assert!((lb.l_const - 30.970_562_748_477_14).abs() < 1e-12);
        let b = SquaredKernelBounds {
            alpha: 1.0,
            m1: 2.0 * (-0.5f64).exp(),
            m2: 4.0,
        };
        let lb = lipschitz_bounds(3, 10, 2, b, 5.0).unwrap();
        assert!((lb.c0 - 2.886_751_345_948_129).abs() < 1e-14);
        assert!((lb.c1 - 9.879_881_725_698_393).abs() < 1e-12);
        assert!((lb.l_const - 4_670.670_633_805_421).abs() < 1e-9);
    }
}
