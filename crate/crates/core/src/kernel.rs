//! Kernels and the squared-kernel derivatives needed by the discrepancy
//! criterion.
//!
//! Everything downstream works with the squared kernel `K²(x, y)` and its
//! first and second partial derivatives. Three flavours of derivative appear:
//!
//! * *left*: derivative of `s ↦ K²(s, y)` at `s = x`;
//! * *right*: derivative of `s ↦ K²(x, s)` at `s = y`;
//! * *diagonal*: derivative of `s ↦ K²(s, s)` at `s = x`.
//!
//! Coordinate indices are 0-based. The [`Kernel`] trait methods are the hot
//! path and do not validate their arguments; the free functions at the
//! bottom of this module perform the dimension and index checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Second-order partial derivatives of the squared kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondPartials {
    /// `∂ˡ_l ∂ˡ_l' K²(x, y)`.
    pub left_left: f64,
    /// `∂ˡ_l ∂ʳ_l' K²(x, y)`.
    pub left_right: f64,
    /// `∂ᵈ_l ∂ᵈ_l' K²(x, x)`.
    pub diag_diag: f64,
}

/// Uniform bounds on the squared kernel and its derivatives.
///
/// `alpha` lower-bounds the diagonal `K²(x, x)`, `m1` bounds every first
/// derivative and `m2` every second derivative, over all `x, y` and all
/// coordinate pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SquaredKernelBounds {
    pub alpha: f64,
    pub m1: f64,
    pub m2: f64,
}

/// A symmetric positive-semidefinite kernel on `ℝᵈ` with a twice
/// differentiable square.
pub trait Kernel: Send + Sync {
    /// `K(x, y)`.
    fn eval(&self, x: &[f64], y: &[f64]) -> f64;

    /// `K²(x, y)`.
    fn eval_sq(&self, x: &[f64], y: &[f64]) -> f64 {
        let k = self.eval(x, y);
        k * k
    }

    fn sq_partial_left(&self, x: &[f64], y: &[f64], l: usize) -> f64;

    fn sq_partial_right(&self, x: &[f64], y: &[f64], l: usize) -> f64 {
        self.sq_partial_left(y, x, l)
    }

    fn sq_partial_diag(&self, x: &[f64], l: usize) -> f64;

    fn sq_second_partials(&self, x: &[f64], y: &[f64], l: usize, l2: usize) -> SecondPartials;

    /// Returns `K²(x, y)` and writes the left gradient of `K²` into `grad`.
    fn eval_sq_with_left_gradient(&self, x: &[f64], y: &[f64], grad: &mut [f64]) -> f64 {
        for (l, g) in grad.iter_mut().enumerate() {
            *g = self.sq_partial_left(x, y, l);
        }
        self.eval_sq(x, y)
    }

    /// Bounds on `K²` and its derivatives, see [`SquaredKernelBounds`].
    fn derivative_bounds(&self) -> SquaredKernelBounds;
}

/// Squared-exponential kernel `K(x, y) = exp(-ρ‖x - y‖²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianKernel {
    rho: f64,
}

impl GaussianKernel {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::invalid("rho", format!("must be positive and finite, got {rho}")));
        }
        Ok(Self { rho })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `sup_r 4ρ r exp(-2ρr²)`, attained at `r = 1/(2√ρ)`.
    pub fn first_derivative_bound(&self) -> f64 {
        2.0 * self.rho.sqrt() * (-0.5f64).exp()
    }

    /// Largest magnitude of any second derivative of `K²` at separation `r`.
    ///
    /// With `u = x - y`, `|u| = r`, the same-coordinate second derivative is
    /// `(-4ρ + 16ρ²u_l²) K²`, maximised in magnitude at `u_l² ∈ {0, r²}`; the
    /// cross-coordinate one is `16ρ² u_l u_l' K²`, at most `8ρ²r² K²`.
    fn second_derivative_profile(&self, r: f64) -> f64 {
        let rho = self.rho;
        let r2 = r * r;
        let same = (4.0 * rho).max((16.0 * rho * rho * r2 - 4.0 * rho).abs());
        let cross = 8.0 * rho * rho * r2;
        same.max(cross) * (-2.0 * rho * r2).exp()
    }

    /// Numerical supremum of [`Self::second_derivative_profile`] over
    /// `r ∈ [0, 10/√ρ]`: dense grid, then golden-section refinement around the
    /// best grid point.
    pub fn second_derivative_bound(&self) -> f64 {
        const GRID: usize = 10_000;
        let upper = 10.0 / self.rho.sqrt();
        let h = upper / GRID as f64;
        let (best_i, best) = (0..=GRID)
            .map(|i| (i, self.second_derivative_profile(i as f64 * h)))
            .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        let lo = best_i.saturating_sub(1) as f64 * h;
        let hi = ((best_i + 1).min(GRID)) as f64 * h;
        let refined = crate::linalg::golden_section_max(|r| self.second_derivative_profile(r), lo, hi, 1e-10);
        best.max(self.second_derivative_profile(refined))
    }
}

#[inline]
pub(crate) fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

impl Kernel for GaussianKernel {
    #[inline]
    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        (-self.rho * sq_dist(x, y)).exp()
    }

    #[inline]
    fn eval_sq(&self, x: &[f64], y: &[f64]) -> f64 {
        (-2.0 * self.rho * sq_dist(x, y)).exp()
    }

    fn sq_partial_left(&self, x: &[f64], y: &[f64], l: usize) -> f64 {
        -4.0 * self.rho * (x[l] - y[l]) * self.eval_sq(x, y)
    }

    fn sq_partial_diag(&self, _x: &[f64], _l: usize) -> f64 {
        0.0
    }

    fn sq_second_partials(&self, x: &[f64], y: &[f64], l: usize, l2: usize) -> SecondPartials {
        let rho = self.rho;
        let delta = if l == l2 { 1.0 } else { 0.0 };
        let left_left =
            (-4.0 * rho * delta + 16.0 * rho * rho * (x[l] - y[l]) * (x[l2] - y[l2])) * self.eval_sq(x, y);
        SecondPartials {
            left_left,
            left_right: -left_left,
            diag_diag: 0.0,
        }
    }

    #[inline]
    fn eval_sq_with_left_gradient(&self, x: &[f64], y: &[f64], grad: &mut [f64]) -> f64 {
        let k2 = self.eval_sq(x, y);
        let scale = -4.0 * self.rho * k2;
        for ((g, a), b) in grad.iter_mut().zip(x).zip(y) {
            *g = scale * (a - b);
        }
        k2
    }

    fn derivative_bounds(&self) -> SquaredKernelBounds {
        SquaredKernelBounds {
            alpha: 1.0,
            m1: self.first_derivative_bound(),
            m2: self.second_derivative_bound(),
        }
    }
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::InvalidInput("points must have dimension at least 1".into()));
    }
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    Ok(())
}

fn check_coord(l: usize, dim: usize) -> Result<()> {
    if l >= dim {
        return Err(Error::CoordinateOutOfRange { index: l, dim });
    }
    Ok(())
}

/// Checked `K²(x, y)`.
pub fn k2<K: Kernel + ?Sized>(x: &[f64], y: &[f64], kernel: &K) -> Result<f64> {
    check_pair(x, y)?;
    Ok(kernel.eval_sq(x, y))
}

/// Checked left partial derivative of `K²` in coordinate `l`.
pub fn k2_partial_left<K: Kernel + ?Sized>(x: &[f64], y: &[f64], l: usize, kernel: &K) -> Result<f64> {
    check_pair(x, y)?;
    check_coord(l, x.len())?;
    Ok(kernel.sq_partial_left(x, y, l))
}

/// Checked right partial derivative of `K²` in coordinate `l`.
pub fn k2_partial_right<K: Kernel + ?Sized>(x: &[f64], y: &[f64], l: usize, kernel: &K) -> Result<f64> {
    check_pair(x, y)?;
    check_coord(l, x.len())?;
    Ok(kernel.sq_partial_right(x, y, l))
}

/// Checked diagonal partial derivative of `K²` in coordinate `l`.
pub fn k2_partial_diag<K: Kernel + ?Sized>(x: &[f64], l: usize, kernel: &K) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::InvalidInput("points must have dimension at least 1".into()));
    }
    check_coord(l, x.len())?;
    Ok(kernel.sq_partial_diag(x, l))
}

pub fn k2_second_partials<K: Kernel + ?Sized>(
    x: &[f64],
    y: &[f64],
    l: usize,
    l2: usize,
    kernel: &K,
) -> Result<SecondPartials> {
    check_pair(x, y)?;
    check_coord(l, x.len())?;
    check_coord(l2, x.len())?;
    Ok(kernel.sq_second_partials(x, y, l, l2))
}
