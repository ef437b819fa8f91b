//! Scalar losses `φ_j` and the smooth part `f(x) = Σ_j φ_j(e_jᵀ A x)`.
//!
//! Block gradients are evaluated at `y = θ² u + z̃` through the maintained
//! residuals `r_u = A u` and `r_z = A z̃`, so `y` is never formed.

use crate::blocks::BlockPartition;
use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, PartialEq)]
pub enum ScalarLoss {
    /// `φ_j(s) = ½ (s − b_j)²`
    Square { targets: Vec<f64> },
    /// `φ(s) = log(1 + eˢ)`; labels are expected to be folded into the rows.
    Logistic,
    /// `φ_j(s) = ψ_μ(|s − b_j|)` with the Huber-type `ψ_μ`.
    SmoothedAbs { targets: Vec<f64>, mu: f64 },
}

impl ScalarLoss {
    pub fn square(targets: Vec<f64>) -> Self {
        Self::Square { targets }
    }

    pub fn smoothed_abs(targets: Vec<f64>, mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidArgument(format!("smoothing parameter mu = {mu} must be positive")));
        }
        Ok(Self::SmoothedAbs { targets, mu })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Square { .. } => "square",
            Self::Logistic => "logistic",
            Self::SmoothedAbs { .. } => "smoothed-abs",
        }
    }

    /// Number of rows this loss is bound to, if it carries targets.
    pub fn num_rows(&self) -> Option<usize> {
        match self {
            Self::Square { targets } | Self::SmoothedAbs { targets, .. } => Some(targets.len()),
            Self::Logistic => None,
        }
    }

    /// Lipschitz constant of `φ_j'`, the same for every row.
    pub fn lipschitz(&self) -> f64 {
        match self {
            Self::Square { .. } => 1.0,
            Self::Logistic => 0.25,
            Self::SmoothedAbs { mu, .. } => 1.0 / mu,
        }
    }

    #[inline]
    pub fn phi(&self, j: usize, s: f64) -> f64 {
        match self {
            Self::Square { targets } => {
                let d = s - targets[j];
                0.5 * d * d
            }
            Self::Logistic => (-s.abs()).exp().ln_1p() + s.max(0.0),
            Self::SmoothedAbs { targets, mu } => {
                let t = (s - targets[j]).abs();
                if t <= *mu {
                    t * t / (2.0 * mu)
                } else {
                    t - mu / 2.0
                }
            }
        }
    }

    #[inline]
    pub fn phi_prime(&self, j: usize, s: f64) -> f64 {
        match self {
            Self::Square { targets } => s - targets[j],
            Self::Logistic => 1.0 / (1.0 + (-s).exp()),
            Self::SmoothedAbs { targets, mu } => ((s - targets[j]) / mu).clamp(-1.0, 1.0),
        }
    }

    /// `Σ_j φ_j(r_j)` for `r = A x`.
    pub fn f_value(&self, r: &[f64]) -> f64 {
        r.iter().enumerate().map(|(j, &s)| self.phi(j, s)).sum()
    }

    /// Full gradient `Aᵀ φ'(A x)` given `r = A x`.
    pub fn dense_gradient(&self, a: &SparseMatrix, r: &[f64]) -> Vec<f64> {
        let d: Vec<f64> = r.iter().enumerate().map(|(j, &s)| self.phi_prime(j, s)).collect();
        a.transpose_mul_vec(&d)
    }
}

/// Maintained products `r_u = A u` and `r_z = A z̃`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualPair {
    pub r_u: Vec<f64>,
    pub r_z: Vec<f64>,
}

impl ResidualPair {
    /// Exact products with the given `u` and `z̃`.
    pub fn compute(a: &SparseMatrix, u: &[f64], z: &[f64]) -> Self {
        Self {
            r_u: a.mul_vec(u),
            r_z: a.mul_vec(z),
        }
    }

    /// `A y` for `y = θ² u + z̃`.
    pub fn combined(&self, theta_sq: f64) -> Vec<f64> {
        self.r_u
            .iter()
            .zip(&self.r_z)
            .map(|(u, z)| theta_sq * u + z)
            .collect()
    }
}

/// Block `i` of `∇f(θ² u + z̃)`, written into `out` (length `N_i`).
///
/// Only the rows hit by the block's columns are read.
pub fn block_gradient(
    loss: &ScalarLoss,
    a: &SparseMatrix,
    p: &BlockPartition,
    i: usize,
    theta_sq: f64,
    rp: &ResidualPair,
    out: &mut [f64],
) {
    for (o, c) in out.iter_mut().zip(p.range(i)) {
        let (rows, vals) = a.column(c);
        let mut g = 0.0;
        for (&j, &v) in rows.iter().zip(vals) {
            g += v * loss.phi_prime(j, theta_sq * rp.r_u[j] + rp.r_z[j]);
        }
        *o = g;
    }
}

/// Block `i` of `∇f(x)` given the full residual `r = A x`.
pub fn block_gradient_at(
    loss: &ScalarLoss,
    a: &SparseMatrix,
    p: &BlockPartition,
    i: usize,
    r: &[f64],
    out: &mut [f64],
) {
    for (o, c) in out.iter_mut().zip(p.range(i)) {
        let (rows, vals) = a.column(c);
        *o = rows
            .iter()
            .zip(vals)
            .fold(0.0, |g, (&j, &v)| g + v * loss.phi_prime(j, r[j]));
    }
}

/// Applies an accepted step `t` on block `i`: `r_z += A_i t` and
/// `r_u += coeff_u · A_i t`. A zero `coeff_u` leaves `r_u` untouched.
pub fn residual_update(
    rp: &mut ResidualPair,
    a: &SparseMatrix,
    p: &BlockPartition,
    i: usize,
    t: &[f64],
    coeff_u: f64,
) {
    for (&tc, c) in t.iter().zip(p.range(i)) {
        if tc == 0.0 {
            continue;
        }
        let (rows, vals) = a.column(c);
        for (&j, &v) in rows.iter().zip(vals) {
            let delta = v * tc;
            rp.r_z[j] += delta;
            if coeff_u != 0.0 {
                rp.r_u[j] += coeff_u * delta;
            }
        }
    }
}
