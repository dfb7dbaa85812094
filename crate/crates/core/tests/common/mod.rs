#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use nystrom_skd::{Dataset, GaussianKernel, NystromSample, SkdRng};
use rand::Rng;

pub struct Instance {
    pub data: Dataset,
    pub sample: NystromSample,
    pub kernel: GaussianKernel,
}

pub fn uniform_points(rng: &mut SkdRng, count: usize, dim: usize, half_width: f64) -> Vec<f64> {
    (0..count * dim).map(|_| rng.random_range(-half_width..half_width)).collect()
}

/// Data uniform in `[-1, 1]^d`; landmarks are jittered data points so the
/// instance is neither degenerate nor trivially separated.
pub fn random_instance(rng: &mut SkdRng, n_points: usize, n: usize, dim: usize, rho: f64) -> Instance {
    let data = Dataset::new(uniform_points(rng, n_points, dim, 1.0), dim).unwrap();
    let mut landmarks = Vec::with_capacity(n * dim);
    for _ in 0..n {
        let i = rng.random_range(0..n_points);
        landmarks.extend(data.row(i).iter().map(|v| v + rng.random_range(-0.2..0.2)));
    }
    Instance {
        data,
        sample: NystromSample::new(landmarks, dim).unwrap(),
        kernel: GaussianKernel::new(rho).unwrap(),
    }
}

pub fn gaussian(rho: f64, x: &[f64], y: &[f64]) -> f64 {
    (-rho * x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()).exp()
}

/// Dense kernel matrices built directly with nalgebra.
pub fn oracle_k(data: &Dataset, rho: f64) -> DMatrix<f64> {
    let n = data.n_points();
    DMatrix::from_fn(n, n, |i, j| gaussian(rho, data.row(i), data.row(j)))
}

/// `C W⁺ Cᵀ` with the pseudoinverse from nalgebra's SVD.
pub fn oracle_nystrom(data: &Dataset, sample: &NystromSample, rho: f64) -> DMatrix<f64> {
    let c = DMatrix::from_fn(data.n_points(), sample.n_landmarks(), |i, k| {
        gaussian(rho, data.row(i), sample.landmark(k))
    });
    let n = sample.n_landmarks();
    let w = DMatrix::from_fn(n, n, |a, b| gaussian(rho, sample.landmark(a), sample.landmark(b)));
    let eig = SymmetricEigen::new(w);
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let inv = eig.eigenvalues.map(|l| if l > 1e-10 * lmax { 1.0 / l } else { 0.0 });
    let pinv = &eig.eigenvectors * DMatrix::from_diagonal(&inv) * eig.eigenvectors.transpose();
    &c * pinv * c.transpose()
}

/// Eigenvalues, descending.
pub fn oracle_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut e: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().cloned().collect();
    e.sort_by(|a, b| b.partial_cmp(a).unwrap());
    e
}

pub fn faer_to_nalgebra(m: &faer::Mat<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// `|a − b| / max(|a|, |b|)`, zero when both vanish.
pub fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 { 0.0 } else { (a - b).abs() / scale }
}

/// `K²(a, x) − K²(b, x)` where `a`, `b` differ only in coordinate `l`.
fn sq_kernel_diff(rho: f64, a: &[f64], b: &[f64], x: &[f64], l: usize) -> f64 {
    let rb: f64 = b.iter().zip(x).map(|(p, q)| (p - q) * (p - q)).sum();
    let delta = (a[l] - b[l]) * (a[l] + b[l] - 2.0 * x[l]);
    (-2.0 * rho * rb).exp() * (-2.0 * rho * delta).exp_m1()
}

/// Central differences `(R(S + h e_i) − R(S − h e_i)) / 2h` of the SKD for
/// the Gaussian kernel, written independently of the library. The
/// differences of `T₁` and `‖K_S‖²_F` are accumulated term by term so the
/// quotient is not swamped by cancellation against `‖K‖²_F`.
pub fn fd_skd_gradient(data: &Dataset, sample: &NystromSample, rho: f64, h: f64) -> Vec<f64> {
    let n = sample.n_landmarks();
    let d = sample.dim();
    let k2 = |x: &[f64], y: &[f64]| gaussian(rho, x, y).powi(2);
    let mut out = Vec::with_capacity(n * d);
    for k in 0..n {
        for l in 0..d {
            let sk = sample.landmark(k);
            let mut plus = sk.to_vec();
            plus[l] += h;
            let mut minus = sk.to_vec();
            minus[l] -= h;
            let t1_rest: f64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| data.rows().map(|x| k2(sample.landmark(j), x)).sum::<f64>())
                .sum();
            let t1_minus = t1_rest + data.rows().map(|x| k2(&minus, x)).sum::<f64>();
            let dt1: f64 = data.rows().map(|x| sq_kernel_diff(rho, &plus, &minus, x, l)).sum();
            let t1_plus = t1_minus + dt1;
            let f_rest: f64 = (0..n)
                .filter(|&j| j != k)
                .flat_map(|j| (0..n).filter(move |&i| i != k).map(move |i| (i, j)))
                .map(|(i, j)| k2(sample.landmark(i), sample.landmark(j)))
                .sum();
            let cross_minus: f64 = (0..n).filter(|&j| j != k).map(|j| k2(&minus, sample.landmark(j))).sum();
            let f_minus = f_rest + 2.0 * cross_minus + 1.0;
            let df: f64 = 2.0
                * (0..n)
                    .filter(|&j| j != k)
                    .map(|j| sq_kernel_diff(rho, &plus, &minus, sample.landmark(j), l))
                    .sum::<f64>();
            let f_plus = f_minus + df;
            // T₁₊²/F₊ − T₁₋²/F₋ over a common denominator
            let num = f_minus * dt1 * (t1_plus + t1_minus) - t1_minus * t1_minus * df;
            out.push(-num / (f_plus * f_minus) / (2.0 * h));
        }
    }
    out
}
