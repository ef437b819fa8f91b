//! Block partition of the coordinate space and block-weighted norms.
//!
//! The coordinate vector `x ∈ R^N` is split into `n` contiguous blocks
//! `x^(1), …, x^(n)`. All block norms are Euclidean, so the weighted norm is
//! `‖x‖²_v = Σ_i v_i ‖x^(i)‖²`.

use std::ops::Range;

use crate::error::{Error, Result};

/// Partition of `N` coordinates into `n` contiguous, nonempty blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition {
    offsets: Vec<usize>,
}

impl BlockPartition {
    pub fn new(sizes: &[usize]) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::Partition("no blocks given".into()));
        }
        let mut offsets = Vec::with_capacity(sizes.len() + 1);
        offsets.push(0);
        let mut total = 0usize;
        for (i, &s) in sizes.iter().enumerate() {
            if s == 0 {
                return Err(Error::Partition(format!("block {i} has size 0")));
            }
            total += s;
            offsets.push(total);
        }
        Ok(Self { offsets })
    }

    /// `n` blocks of size one.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new(&vec![1; n])
    }

    /// Number of blocks `n`.
    pub fn num_blocks(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Total coordinate count `N`.
    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn block_size(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    /// Coordinate range of block `i`.
    pub fn range(&self, i: usize) -> Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    pub fn is_unit(&self) -> bool {
        self.num_blocks() == self.dim()
    }

    /// Block `x^(i)` of a full vector.
    pub fn block<'a>(&self, x: &'a [f64], i: usize) -> &'a [f64] {
        &x[self.range(i)]
    }

    pub fn block_mut<'a>(&self, x: &'a mut [f64], i: usize) -> &'a mut [f64] {
        &mut x[self.range(i)]
    }

    /// `h_[S]`: copy of `h` with every block outside `set` zeroed.
    pub fn restrict(&self, h: &[f64], set: &[usize]) -> Vec<f64> {
        let mut out = vec![0.0; h.len()];
        for &i in set {
            let r = self.range(i);
            out[r.clone()].copy_from_slice(&h[r]);
        }
        out
    }

    pub(crate) fn check_vector(&self, what: &'static str, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Dimension {
                what,
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_weights(&self, v: &WeightVector) -> Result<()> {
        if v.len() != self.num_blocks() {
            return Err(Error::Dimension {
                what: "weight vector",
                expected: self.num_blocks(),
                got: v.len(),
            });
        }
        Ok(())
    }
}

/// One nonnegative weight per block.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if let Some(bad) = w.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "weights must be finite and nonnegative, found {bad}"
            )));
        }
        Ok(Self(w))
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn l1(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Rescaled copy `ṽ = n v / ‖v‖₁`, whose entries sum to `n`.
    pub fn normalized(&self) -> Result<Self> {
        let s = self.l1();
        if s <= 0.0 {
            return Err(Error::InvalidArgument("cannot normalize a zero weight vector".into()));
        }
        let n = self.0.len() as f64;
        Ok(Self(self.0.iter().map(|w| n * w / s).collect()))
    }
}

impl std::ops::Index<usize> for WeightVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// `Σ_i v_i ‖x^(i)‖²`.
pub fn weighted_norm_sq(x: &[f64], v: &WeightVector, p: &BlockPartition) -> Result<f64> {
    weighted_inner(x, x, v, p)
}

/// `⟨a, h⟩_v = Σ_i v_i ⟨a^(i), h^(i)⟩`.
pub fn weighted_inner(a: &[f64], h: &[f64], v: &WeightVector, p: &BlockPartition) -> Result<f64> {
    p.check_vector("first vector", a)?;
    p.check_vector("second vector", h)?;
    p.check_weights(v)?;
    Ok((0..p.num_blocks())
        .map(|i| {
            let r = p.range(i);
            let dot: f64 = a[r.clone()].iter().zip(&h[r]).map(|(x, y)| x * y).sum();
            v[i] * dot
        })
        .sum())
}
