//! Small dense linear-algebra helpers on top of `faer`.

use faer::{Mat, MatRef, Side};
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::rng::SkdRng;

/// Maximises a unimodal `f` on `[lo, hi]`; returns the argmax.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    while hi - lo > tol {
        if fa >= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = f(b);
        }
    }
    0.5 * (lo + hi)
}

/// Ascending eigenvalues of a symmetric matrix (lower triangle is read).
pub fn symmetric_eigenvalues(a: MatRef<'_, f64>) -> Result<Vec<f64>> {
    a.self_adjoint_eigenvalues(Side::Lower).map_err(|_| Error::Eigen)
}

/// Factor `G` (n×r) with `G Gᵀ = W†` for a symmetric PSD `W`.
///
/// Eigenvalues below `rel_cutoff · λ_max(W)` are treated as zero, so `r` is
/// the numerical rank.
pub fn pinv_sqrt_factor(w: MatRef<'_, f64>, rel_cutoff: f64) -> Result<Mat<f64>> {
    let n = w.nrows();
    let evd = w.self_adjoint_eigen(Side::Lower).map_err(|_| Error::Eigen)?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let lmax = (0..n).map(|i| s[i]).fold(0.0f64, f64::max);
    let keep: Vec<usize> = (0..n).filter(|&i| lmax > 0.0 && s[i] > rel_cutoff * lmax).collect();
    Ok(Mat::from_fn(n, keep.len(), |i, j| {
        let c = keep[j];
        u[(i, c)] / s[c].sqrt()
    }))
}

/// Moore-Penrose pseudoinverse of a symmetric PSD matrix with a relative
/// eigenvalue cutoff.
pub fn symmetric_pinv(w: MatRef<'_, f64>, rel_cutoff: f64) -> Result<Mat<f64>> {
    let g = pinv_sqrt_factor(w, rel_cutoff)?;
    Ok(&g * g.transpose())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn start_vector(n: usize) -> Vec<f64> {
    let mut rng = SkdRng::seed_from_u64(0x005e_ed1a_2c05);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    v
}

/// Largest eigenvalue of a symmetric operator by power iteration.
///
/// Stops when successive Rayleigh quotients agree to `tol` relative, or after
/// `max_iter` products. Meaningful as the spectral norm only for PSD operators.
pub fn power_iteration(
    n: usize,
    mut apply: impl FnMut(&[f64], &mut [f64]),
    tol: f64,
    max_iter: usize,
) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let mut v = start_vector(n);
    let mut w = vec![0.0; n];
    let mut lambda = 0.0;
    for _ in 0..max_iter {
        apply(&v, &mut w);
        let next = dot(&v, &w);
        let nw = norm(&w);
        if nw == 0.0 {
            return 0.0;
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / nw;
        }
        if (next - lambda).abs() <= tol * next.abs() {
            return next;
        }
        lambda = next;
    }
    lambda
}

/// Largest eigenvalue of a symmetric operator by Lanczos with full
/// reorthogonalisation.
///
/// Converged when the Ritz residual `|β_k y_k|` falls below `tol · θ_max`.
pub fn lanczos_largest(
    n: usize,
    mut apply: impl FnMut(&[f64], &mut [f64]),
    tol: f64,
    max_steps: usize,
) -> Result<f64> {
    if n == 0 {
        return Ok(0.0);
    }
    let max_steps = max_steps.min(n);
    let mut basis: Vec<Vec<f64>> = vec![start_vector(n)];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut theta = 0.0_f64;
    for k in 0..max_steps {
        apply(&basis[k], &mut w);
        let alpha = dot(&basis[k], &w);
        alphas.push(alpha);
        // full reorthogonalisation, twice for stability
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
            }
        }
        let beta = norm(&w);

        let m = alphas.len();
        // the tridiagonal solve is O(m³); past a few dozen steps test every tenth
        if m > 30 && !m.is_multiple_of(10) && k + 1 < max_steps && beta > 1e-14 * theta.abs() {
            betas.push(beta);
            basis.push(w.iter().map(|x| x / beta).collect());
            continue;
        }
        let t = Mat::from_fn(m, m, |i, j| {
            if i == j {
                alphas[i]
            } else if i == j + 1 {
                betas.get(j).copied().unwrap_or(0.0)
            } else if j == i + 1 {
                betas.get(i).copied().unwrap_or(0.0)
            } else {
                0.0
            }
        });
        let evd = t.self_adjoint_eigen(Side::Lower).map_err(|_| Error::Eigen)?;
        theta = evd.S().column_vector()[m - 1];
        let last = evd.U()[(m - 1, m - 1)];
        let scale = theta.abs().max(f64::MIN_POSITIVE);
        if beta <= 1e-14 * scale || (beta * last).abs() <= tol * scale {
            return Ok(theta);
        }
        betas.push(beta);
        basis.push(w.iter().map(|x| x / beta).collect());
    }
    Ok(theta)
}
