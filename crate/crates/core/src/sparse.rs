//! Column-compressed sparse data matrix `A ∈ R^{m×N}`.
//!
//! Columns are the natural unit here: a block update touches only the
//! columns of that block, and the rows those columns hit (`D_i`).

use crate::blocks::BlockPartition;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from `(row, col, value)` triplets. Explicit zeros are dropped;
    /// a repeated `(row, col)` position is an error.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for &(r, c, v) in triplets {
            if r >= rows || c >= cols {
                return Err(Error::InvalidArgument(format!(
                    "entry ({r}, {c}) outside a {rows}x{cols} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite entry at ({r}, {c})")));
            }
            if v != 0.0 {
                entries.push((c, r, v));
            }
        }
        entries.sort_unstable_by_key(|&(c, r, _)| (c, r));
        if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0 && w[0].1 == w[1].1) {
            return Err(Error::InvalidArgument(format!(
                "duplicate entry at ({}, {})",
                w[0].1, w[0].0
            )));
        }

        let mut col_ptr = vec![0usize; cols + 1];
        for &(c, _, _) in &entries {
            col_ptr[c + 1] += 1;
        }
        for c in 0..cols {
            col_ptr[c + 1] += col_ptr[c];
        }
        let row_idx = entries.iter().map(|e| e.1).collect();
        let values = entries.iter().map(|e| e.2).collect();
        Ok(Self {
            rows,
            cols,
            col_ptr,
            row_idx,
            values,
        })
    }

    /// Builds from a dense row-major matrix.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        let mut triplets = Vec::new();
        for (j, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension {
                    what: "dense row length",
                    expected: n,
                    got: row.len(),
                });
            }
            for (c, &v) in row.iter().enumerate() {
                triplets.push((j, c, v));
            }
        }
        Self::from_triplets(m, n, &triplets)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Row indices and values of column `c`, rows increasing.
    pub fn column(&self, c: usize) -> (&[usize], &[f64]) {
        let r = self.col_ptr[c]..self.col_ptr[c + 1];
        (&self.row_idx[r.clone()], &self.values[r])
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.cols).flat_map(move |c| {
            let (rows, vals) = self.column(c);
            rows.iter().zip(vals).map(move |(&r, &v)| (r, c, v))
        })
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "mul_vec: length mismatch");
        let mut out = vec![0.0; self.rows];
        for (c, &xc) in x.iter().enumerate() {
            if xc == 0.0 {
                continue;
            }
            let (rows, vals) = self.column(c);
            for (&r, &v) in rows.iter().zip(vals) {
                out[r] += v * xc;
            }
        }
        out
    }

    /// `Aᵀ r`.
    pub fn transpose_mul_vec(&self, r: &[f64]) -> Vec<f64> {
        assert_eq!(r.len(), self.rows, "transpose_mul_vec: length mismatch");
        (0..self.cols)
            .map(|c| {
                let (rows, vals) = self.column(c);
                rows.iter().zip(vals).map(|(&j, &v)| v * r[j]).sum()
            })
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let t: Vec<_> = self.triplets().map(|(r, c, v)| (c, r, v)).collect();
        Self::from_triplets(self.cols, self.rows, &t).expect("transpose of a valid matrix")
    }

    /// Multiplies column `c` by `scale[c]`.
    pub fn scale_columns(&self, scale: &[f64]) -> Result<Self> {
        if scale.len() != self.cols {
            return Err(Error::Dimension {
                what: "column scale",
                expected: self.cols,
                got: scale.len(),
            });
        }
        let t: Vec<_> = self.triplets().map(|(r, c, v)| (r, c, v * scale[c])).collect();
        Self::from_triplets(self.rows, self.cols, &t)
    }

    /// Multiplies row `r` by `scale[r]`.
    pub fn scale_rows(&self, scale: &[f64]) -> Result<Self> {
        if scale.len() != self.rows {
            return Err(Error::Dimension {
                what: "row scale",
                expected: self.rows,
                got: scale.len(),
            });
        }
        let t: Vec<_> = self.triplets().map(|(r, c, v)| (r, c, v * scale[r])).collect();
        Self::from_triplets(self.rows, self.cols, &t)
    }

    /// Squared Euclidean norms `‖A_{j:}‖²` of every row.
    pub fn row_sq_norms(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        for (&r, &v) in self.row_idx.iter().zip(&self.values) {
            out[r] += v * v;
        }
        out
    }

    /// Structural nonzero count per row.
    pub fn row_nnz(&self) -> Vec<usize> {
        let mut out = vec![0; self.rows];
        for &r in &self.row_idx {
            out[r] += 1;
        }
        out
    }

    /// `ω_j`: number of blocks in which row `j` has a nonzero.
    pub fn row_block_counts(&self, p: &BlockPartition) -> Vec<usize> {
        let mut counts = vec![0usize; self.rows];
        let mut last_block = vec![usize::MAX; self.rows];
        for i in 0..p.num_blocks() {
            for c in p.range(i) {
                for &r in self.column(c).0 {
                    if last_block[r] != i {
                        last_block[r] = i;
                        counts[r] += 1;
                    }
                }
            }
        }
        counts
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.cols]; self.rows];
        for (r, c, v) in self.triplets() {
            d[r][c] = v;
        }
        d
    }

    pub(crate) fn check_partition(&self, p: &BlockPartition) -> Result<()> {
        if p.dim() != self.cols {
            return Err(Error::Dimension {
                what: "partition size vs matrix columns",
                expected: self.cols,
                got: p.dim(),
            });
        }
        Ok(())
    }
}
