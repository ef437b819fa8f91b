//! Separable regularizers `ψ` and their closed-form block proximal steps.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularizer {
    Zero,
    /// `λ ‖x‖₁`
    L1 { lambda: f64 },
    /// `Σ c·x_i` plus the indicator of `[lo, hi]^N`.
    BoxLinear { lo: f64, hi: f64, c: f64 },
}

impl Regularizer {
    pub fn l1(lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("lambda = {lambda} must be nonnegative")));
        }
        Ok(Self::L1 { lambda })
    }

    pub fn box_linear(lo: f64, hi: f64, c: f64) -> Result<Self> {
        if !(lo <= hi) || !c.is_finite() {
            return Err(Error::InvalidArgument(format!("invalid box [{lo}, {hi}] with slope {c}")));
        }
        Ok(Self::BoxLinear { lo, hi, c })
    }

    /// The separable part of the dual SVM objective: `−x_i/N` on `[0, 1]`.
    pub fn dual_svm(num_coords: usize) -> Self {
        Self::BoxLinear {
            lo: 0.0,
            hi: 1.0,
            c: -1.0 / num_coords as f64,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Zero => "none",
            Self::L1 { .. } => "l1",
            Self::BoxLinear { .. } => "box-linear",
        }
    }

    /// `ψ(x)`; `+∞` outside the domain.
    pub fn value(&self, x: &[f64]) -> f64 {
        match *self {
            Self::Zero => 0.0,
            Self::L1 { lambda } => lambda * x.iter().map(|v| v.abs()).sum::<f64>(),
            Self::BoxLinear { lo, hi, c } => {
                if x.iter().all(|&v| lo <= v && v <= hi) {
                    c * x.iter().sum::<f64>()
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Euclidean projection onto `dom ψ`, in place.
    pub fn project_domain(&self, x: &mut [f64]) {
        if let Self::BoxLinear { lo, hi, .. } = *self {
            for v in x {
                *v = v.clamp(lo, hi);
            }
        }
    }

    /// Minimizer of `⟨g, z⟩ + (a/2)‖z − z0‖² + ψ_i(z)`, written into `out`.
    pub fn prox_step(&self, z0: &[f64], g: &[f64], a: f64, out: &mut [f64]) -> Result<()> {
        if !(a > 0.0) {
            return Err(Error::InvalidArgument(format!("prox stiffness a = {a} must be positive")));
        }
        self.prox_step_unchecked(z0, g, a, out);
        Ok(())
    }

    #[inline]
    pub(crate) fn prox_step_unchecked(&self, z0: &[f64], g: &[f64], a: f64, out: &mut [f64]) {
        for ((o, &z), &gc) in out.iter_mut().zip(z0).zip(g) {
            *o = match *self {
                Self::Zero => z - gc / a,
                Self::L1 { lambda } => soft_threshold(z - gc / a, lambda / a),
                Self::BoxLinear { lo, hi, c } => (z - (gc + c) / a).clamp(lo, hi),
            };
        }
    }
}

#[inline]
pub fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}
