//! Composite objective `F(x) = Σ_j φ_j(e_jᵀ A x) + ψ(x)`.

use crate::blocks::BlockPartition;
use crate::error::{Error, Result};
use crate::losses::ScalarLoss;
use crate::prox::Regularizer;
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone)]
pub struct CompositeProblem {
    pub matrix: SparseMatrix,
    pub partition: BlockPartition,
    pub loss: ScalarLoss,
    pub reg: Regularizer,
}

impl CompositeProblem {
    pub fn new(
        matrix: SparseMatrix,
        partition: BlockPartition,
        loss: ScalarLoss,
        reg: Regularizer,
    ) -> Result<Self> {
        matrix.check_partition(&partition)?;
        if let Some(rows) = loss.num_rows() {
            if rows != matrix.rows() {
                return Err(Error::Dimension {
                    what: "loss targets vs matrix rows",
                    expected: matrix.rows(),
                    got: rows,
                });
            }
        }
        Ok(Self {
            matrix,
            partition,
            loss,
            reg,
        })
    }

    /// `½‖Ax − b‖² + λ‖x‖₁` with unit blocks.
    pub fn lasso(matrix: SparseMatrix, b: Vec<f64>, lambda: f64) -> Result<Self> {
        let p = BlockPartition::unit(matrix.cols())?;
        Self::new(matrix, p, ScalarLoss::square(b), Regularizer::l1(lambda)?)
    }

    /// Dual of the linear SVM over `x ∈ [0, 1]^N`:
    ///
    /// `F(x) = 1/(2λN²) Σ_j (Σ_i b_i A_ji x_i)² − (1/N) Σ_i x_i`.
    ///
    /// `data` is `m × N` with one column per example and `labels` holds the
    /// `±1` label `b_i` of each column.
    pub fn dual_svm(data: &SparseMatrix, labels: &[f64], lambda: f64) -> Result<Self> {
        let n = data.cols();
        if labels.len() != n {
            return Err(Error::Dimension {
                what: "labels vs data columns",
                expected: n,
                got: labels.len(),
            });
        }
        if let Some(bad) = labels.iter().find(|&&y| y != 1.0 && y != -1.0) {
            return Err(Error::InvalidArgument(format!("dual SVM labels must be +1 or -1, found {bad}")));
        }
        if !(lambda > 0.0) {
            return Err(Error::InvalidArgument(format!("lambda = {lambda} must be positive")));
        }
        let s = 1.0 / (lambda.sqrt() * n as f64);
        let scale: Vec<f64> = labels.iter().map(|y| y * s).collect();
        let matrix = data.scale_columns(&scale)?;
        let rows = matrix.rows();
        Self::new(
            matrix,
            BlockPartition::unit(n)?,
            ScalarLoss::square(vec![0.0; rows]),
            Regularizer::dual_svm(n),
        )
    }

    pub fn num_blocks(&self) -> usize {
        self.partition.num_blocks()
    }

    pub fn dim(&self) -> usize {
        self.partition.dim()
    }

    pub fn smooth_value(&self, x: &[f64]) -> f64 {
        self.loss.f_value(&self.matrix.mul_vec(x))
    }

    /// `F(x)`, computed from scratch.
    pub fn objective(&self, x: &[f64]) -> f64 {
        self.smooth_value(x) + self.reg.value(x)
    }

    /// `F(x)` given a precomputed `r = A x`.
    pub fn objective_with_residual(&self, x: &[f64], r: &[f64]) -> f64 {
        self.loss.f_value(r) + self.reg.value(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.loss.dense_gradient(&self.matrix, &self.matrix.mul_vec(x))
    }
}
