//! Instances and independent oracles shared by the integration tests.
#![allow(dead_code)]

use approx_cd::io::{gen_synthetic_problem, Regime};
use approx_cd::{BlockPartition, CompositeProblem, Regularizer, ScalarLoss, SparseMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `‖a − b‖ / ‖b‖`, with `0/0 = 0`.
pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let (num, den) = (norm(&d), norm(b));
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// `λ_max = ‖Aᵀb‖_∞`, the smallest weight with a zero LASSO solution.
pub fn lambda_max(a: &SparseMatrix, b: &[f64]) -> f64 {
    a.transpose_mul_vec(b).iter().fold(0.0, |m: f64, v| m.max(v.abs()))
}

/// Synthetic LASSO with `λ = frac · λ_max`.
pub fn lasso(regime: Regime, m: usize, n: usize, seed: u64, frac: f64) -> CompositeProblem {
    let data = gen_synthetic_problem(regime, m, n, seed).unwrap();
    let lambda = frac * lambda_max(&data.matrix, &data.targets);
    CompositeProblem::lasso(data.matrix, data.targets, lambda).unwrap()
}

/// Random sparse matrix where each entry is nonzero with probability `density`.
pub fn random_sparse(m: usize, n: usize, density: f64, rng: &mut ChaCha8Rng) -> SparseMatrix {
    let mut t = Vec::new();
    for r in 0..m {
        for c in 0..n {
            if rng.random::<f64>() < density {
                let v: f64 = StandardNormal.sample(rng);
                t.push((r, c, v));
            }
        }
    }
    SparseMatrix::from_triplets(m, n, &t).unwrap()
}

pub fn normal_vec(len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}

/// Random partition of `dim` coordinates into blocks of size 1 to `max`.
pub fn random_partition(dim: usize, max: usize, rng: &mut ChaCha8Rng) -> BlockPartition {
    let mut sizes = Vec::new();
    let mut left = dim;
    while left > 0 {
        let s = rng.random_range(1..=max.min(left));
        sizes.push(s);
        left -= s;
    }
    BlockPartition::new(&sizes).unwrap()
}

/// Tiny dual SVM: `m` features, `n` examples with random `±1` labels.
/// Returns the problem with the raw data and labels.
pub fn tiny_svm(m: usize, n: usize, seed: u64) -> (CompositeProblem, SparseMatrix, Vec<f64>) {
    let mut r = rng(seed);
    let data = random_sparse(m, n, 0.3, &mut r);
    let labels: Vec<f64> = (0..n).map(|_| if r.random::<bool>() { 1.0 } else { -1.0 }).collect();
    let pb = CompositeProblem::dual_svm(&data, &labels, 1.0 / n as f64).unwrap();
    (pb, data, labels)
}

/// Dual SVM objective straight from its definition.
pub fn svm_dense_objective(data: &SparseMatrix, labels: &[f64], lambda: f64, x: &[f64]) -> f64 {
    let n = labels.len() as f64;
    let dense = data.to_dense();
    let quad: f64 = dense
        .iter()
        .map(|row| {
            let s: f64 = row.iter().zip(labels).zip(x).map(|((a, y), xi)| a * y * xi).sum();
            s * s
        })
        .sum();
    quad / (2.0 * lambda * n * n) - x.iter().sum::<f64>() / n
}

/// Exact cyclic coordinate minimization for square loss with unit blocks.
///
/// Each coordinate step minimizes `F` exactly along that coordinate. Stops
/// once a full sweep moves no coordinate by more than `tol`.
pub fn coordinate_descent_oracle(pb: &CompositeProblem, tol: f64, max_sweeps: usize) -> (Vec<f64>, f64) {
    let ScalarLoss::Square { targets } = &pb.loss else {
        panic!("oracle needs the square loss");
    };
    assert!(pb.partition.is_unit());
    let a = &pb.matrix;
    let n = a.cols();
    let mut x = vec![0.0; n];
    pb.reg.project_domain(&mut x);
    let mut r: Vec<f64> = a.mul_vec(&x).iter().zip(targets).map(|(ax, b)| ax - b).collect();
    let curv: Vec<f64> = (0..n).map(|c| a.column(c).1.iter().map(|v| v * v).sum()).collect();
    for sweep in 0..max_sweeps {
        let mut moved: f64 = 0.0;
        for c in 0..n {
            if curv[c] == 0.0 {
                continue;
            }
            let (rows, vals) = a.column(c);
            let g: f64 = rows.iter().zip(vals).map(|(&j, v)| v * r[j]).sum();
            let z = x[c] - g / curv[c];
            let new = match pb.reg {
                Regularizer::Zero => z,
                Regularizer::L1 { lambda } => {
                    let t = lambda / curv[c];
                    z.signum() * (z.abs() - t).max(0.0)
                }
                Regularizer::BoxLinear { lo, hi, c: slope } => (z - slope / curv[c]).clamp(lo, hi),
            };
            let d = new - x[c];
            if d != 0.0 {
                for (&j, v) in rows.iter().zip(vals) {
                    r[j] += v * d;
                }
                x[c] = new;
                moved = moved.max(d.abs());
            }
        }
        if sweep % 50 == 49 {
            r = a.mul_vec(&x).iter().zip(targets).map(|(ax, b)| ax - b).collect();
        }
        if moved <= tol {
            break;
        }
    }
    let f = pb.objective(&x);
    (x, f)
}

/// Largest violation of the LASSO optimality conditions at `x`.
pub fn lasso_kkt(pb: &CompositeProblem, x: &[f64]) -> f64 {
    let Regularizer::L1 { lambda } = pb.reg else {
        panic!("needs the L1 regularizer");
    };
    let g = pb.gradient(x);
    g.iter()
        .zip(x)
        .map(|(g, &xi)| {
            if xi != 0.0 {
                (g + lambda * xi.signum()).abs()
            } else {
                (g.abs() - lambda).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}
