//! Expected separable overapproximation (ESO) stepsizes.
//!
//! For `f = Σ_j φ_j(e_jᵀ A x)` and a τ-nice sampling the stepsizes
//! `v_i = Σ_j β_j L_ji` with `β_j = 1 + (ω_j − 1)(τ − 1)/max{1, n − 1}`
//! satisfy
//!
//! ```text
//! E[f(x + h_[S])] ≤ f(x) + (τ/n)(⟨∇f(x), h⟩ + ½‖h‖²_v).
//! ```
//!
//! The `rt` variant uses the global `ω = max_j ω_j` in place of `ω_j` and
//! the `nc` variant is `v_i = Σ_{j: i ∈ C_j} ‖A_{j:}‖²` (square loss, unit
//! blocks only).

use std::fmt;
use std::str::FromStr;

use crate::blocks::{weighted_norm_sq, BlockPartition, WeightVector};
use crate::error::{Error, Result};
use crate::losses::ScalarLoss;
use crate::problem::CompositeProblem;
use crate::sampling::{enumerate_tau_nice, SamplingScheme};
use crate::sparse::SparseMatrix;

/// Block Lipschitz constants `L_ji`, stored per block over the rows the
/// block touches.
#[derive(Debug, Clone)]
pub struct LipschitzTable {
    num_rows: usize,
    /// `(row, L_ji)` for every row hit by block `i`, rows increasing.
    by_block: Vec<Vec<(usize, f64)>>,
    omega: Vec<usize>,
    omega_max: usize,
}

impl LipschitzTable {
    /// `L_ji = L_φj ‖A_ji‖²` for Euclidean block norms.
    pub fn new(a: &SparseMatrix, p: &BlockPartition, loss_lipschitz: &[f64]) -> Result<Self> {
        a.check_partition(p)?;
        if loss_lipschitz.len() != a.rows() {
            return Err(Error::Dimension {
                what: "loss Lipschitz constants vs matrix rows",
                expected: a.rows(),
                got: loss_lipschitz.len(),
            });
        }
        if let Some(bad) = loss_lipschitz.iter().find(|l| !(**l >= 0.0)) {
            return Err(Error::InvalidArgument(format!("loss Lipschitz constant {bad} is negative")));
        }

        let m = a.rows();
        let mut acc = vec![0.0; m];
        let mut touched: Vec<usize> = Vec::new();
        let mut by_block = Vec::with_capacity(p.num_blocks());
        for i in 0..p.num_blocks() {
            for c in p.range(i) {
                let (rows, vals) = a.column(c);
                for (&j, &v) in rows.iter().zip(vals) {
                    if acc[j] == 0.0 {
                        touched.push(j);
                    }
                    acc[j] += v * v;
                }
            }
            touched.sort_unstable();
            let entries = touched
                .drain(..)
                .map(|j| {
                    let sq = std::mem::take(&mut acc[j]);
                    (j, loss_lipschitz[j] * sq)
                })
                .collect();
            by_block.push(entries);
        }

        let omega = a.row_block_counts(p);
        let omega_max = omega.iter().copied().max().unwrap_or(0);
        Ok(Self {
            num_rows: m,
            by_block,
            omega,
            omega_max,
        })
    }

    pub fn for_problem(problem: &CompositeProblem) -> Result<Self> {
        let l = vec![problem.loss.lipschitz(); problem.matrix.rows()];
        Self::new(&problem.matrix, &problem.partition, &l)
    }

    pub fn num_blocks(&self) -> usize {
        self.by_block.len()
    }

    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    /// `(row, L_ji)` pairs of block `i`.
    pub fn block(&self, i: usize) -> &[(usize, f64)] {
        &self.by_block[i]
    }

    /// `L_ji`, zero when block `i` does not touch row `j`.
    pub fn get(&self, j: usize, i: usize) -> f64 {
        let b = &self.by_block[i];
        b.binary_search_by_key(&j, |e| e.0).map_or(0.0, |k| b[k].1)
    }

    /// `ω_j` for every row.
    pub fn omega(&self) -> &[usize] {
        &self.omega
    }

    /// `ω = max_j ω_j`.
    pub fn omega_max(&self) -> usize {
        self.omega_max
    }
}

/// `β = 1 + (ω_j − 1)(τ − 1)/max{1, n − 1}`.
pub fn beta(omega_j: usize, tau: usize, n: usize) -> f64 {
    let denom = n.saturating_sub(1).max(1) as f64;
    1.0 + (omega_j as f64 - 1.0) * (tau as f64 - 1.0) / denom
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepsizeKind {
    /// Per-row separability `ω_j`.
    Fr,
    /// Global separability `ω`.
    Rt,
    /// Sum of the full squared row norms over the rows hitting each block.
    Nc,
}

impl fmt::Display for StepsizeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Fr => "fr",
            Self::Rt => "rt",
            Self::Nc => "nc",
        })
    }
}

impl FromStr for StepsizeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fr" => Ok(Self::Fr),
            "rt" => Ok(Self::Rt),
            "nc" => Ok(Self::Nc),
            other => Err(Error::InvalidArgument(format!("unknown stepsize kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepsizeVector {
    pub v: WeightVector,
    pub kind: StepsizeKind,
    pub tau: usize,
}

/// ESO stepsizes of the requested kind for a τ-nice sampling.
pub fn stepsizes(
    kind: StepsizeKind,
    table: &LipschitzTable,
    problem: &CompositeProblem,
    tau: usize,
) -> Result<StepsizeVector> {
    let n = table.num_blocks();
    SamplingScheme::tau_nice(tau).validate(n)?;
    let v: Vec<f64> = match kind {
        StepsizeKind::Fr => {
            let betas: Vec<f64> = table.omega().iter().map(|&w| beta(w, tau, n)).collect();
            (0..n)
                .map(|i| table.block(i).iter().map(|&(j, l)| betas[j] * l).sum())
                .collect()
        }
        StepsizeKind::Rt => {
            let b = beta(table.omega_max(), tau, n);
            (0..n)
                .map(|i| table.block(i).iter().map(|&(_, l)| b * l).sum())
                .collect()
        }
        StepsizeKind::Nc => {
            if !problem.partition.is_unit() {
                return Err(Error::Unsupported("nc stepsizes require unit blocks".into()));
            }
            if !matches!(problem.loss, ScalarLoss::Square { .. }) {
                return Err(Error::Unsupported(format!(
                    "nc stepsizes require the square loss, not {}",
                    problem.loss.name()
                )));
            }
            let norms = problem.matrix.row_sq_norms();
            (0..n)
                .map(|i| table.block(i).iter().map(|&(j, _)| norms[j]).sum())
                .collect()
        }
    };
    Ok(StepsizeVector {
        v: WeightVector::new(v)?,
        kind,
        tau,
    })
}

/// Separability averages `ω̄`, `L̄` and the normalized weights `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparabilityAverages {
    pub omega_bar: f64,
    pub l_bar: f64,
    pub w: WeightVector,
}

pub fn separability_averages(table: &LipschitzTable) -> Result<SeparabilityAverages> {
    let n = table.num_blocks();
    let omega = table.omega();
    let mut row_l = vec![0.0; table.num_rows()];
    let mut weighted = vec![0.0; n];
    for (i, wi) in weighted.iter_mut().enumerate() {
        for &(j, l) in table.block(i) {
            row_l[j] += l;
            *wi += omega[j] as f64 * l;
        }
    }
    let total: f64 = row_l.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidArgument("all Lipschitz constants are zero".into()));
    }
    let omega_bar = row_l
        .iter()
        .zip(omega)
        .map(|(l, &w)| w as f64 * l / total)
        .sum();
    let weighted_total: f64 = weighted.iter().sum();
    let w = weighted.iter().map(|x| n as f64 * x / weighted_total).collect();
    Ok(SeparabilityAverages {
        omega_bar,
        l_bar: total / n as f64,
        w: WeightVector::new(w)?,
    })
}

/// One row of a stepsize comparison: `‖v‖₁` of each kind at a given `τ`,
/// together with `ω` and `ω̄`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepsizeComparison {
    pub tau: usize,
    pub l1_fr: f64,
    pub l1_rt: f64,
    pub l1_nc: f64,
    pub omega: usize,
    pub omega_bar: f64,
}

/// Compares the three stepsize kinds on a square-loss, unit-block problem.
pub fn compare_stepsizes(problem: &CompositeProblem, taus: &[usize]) -> Result<Vec<StepsizeComparison>> {
    let table = LipschitzTable::for_problem(problem)?;
    let avg = separability_averages(&table)?;
    taus.iter()
        .map(|&tau| {
            let l1 = |kind| stepsizes(kind, &table, problem, tau).map(|s| s.v.l1());
            Ok(StepsizeComparison {
                tau,
                l1_fr: l1(StepsizeKind::Fr)?,
                l1_rt: l1(StepsizeKind::Rt)?,
                l1_nc: l1(StepsizeKind::Nc)?,
                omega: table.omega_max(),
                omega_bar: avg.omega_bar,
            })
        })
        .collect()
}

/// `RHS − LHS` of the ESO inequality at `(x, h)`, with the expectation taken
/// exactly over all τ-nice subsets. Nonnegative slack certifies the ESO.
pub fn eso_slack(problem: &CompositeProblem, tau: usize, v: &WeightVector, x: &[f64], h: &[f64]) -> Result<f64> {
    let p = &problem.partition;
    p.check_vector("x", x)?;
    p.check_vector("h", h)?;
    let n = p.num_blocks();
    let subsets = enumerate_tau_nice(n, tau)?;

    let fx = problem.smooth_value(x);
    let grad = problem.gradient(x);
    let gh: f64 = grad.iter().zip(h).map(|(g, h)| g * h).sum();
    let rhs = fx + tau as f64 / n as f64 * (gh + 0.5 * weighted_norm_sq(h, v, p)?);

    let mut lhs = 0.0;
    let mut point = vec![0.0; x.len()];
    for s in &subsets {
        point.copy_from_slice(x);
        for &i in s {
            for c in p.range(i) {
                point[c] += h[c];
            }
        }
        lhs += problem.smooth_value(&point);
    }
    lhs /= subsets.len() as f64;
    Ok(rhs - lhs)
}

/// `f(x) + ⟨∇f(x), h⟩ + (ω̄L̄/2)‖h‖²_w − f(x + h)`.
pub fn full_overapprox_slack(
    problem: &CompositeProblem,
    avg: &SeparabilityAverages,
    x: &[f64],
    h: &[f64],
) -> Result<f64> {
    let p = &problem.partition;
    p.check_vector("x", x)?;
    p.check_vector("h", h)?;
    let grad = problem.gradient(x);
    let gh: f64 = grad.iter().zip(h).map(|(g, h)| g * h).sum();
    let moved: Vec<f64> = x.iter().zip(h).map(|(a, b)| a + b).collect();
    let rhs = problem.smooth_value(x) + gh + 0.5 * avg.omega_bar * avg.l_bar * weighted_norm_sq(h, &avg.w, p)?;
    Ok(rhs - problem.smooth_value(&moved))
}
