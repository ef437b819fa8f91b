//! Python bindings for the `approx_cd` solver.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use approx_cd::eso::{compare_stepsizes, separability_averages};
use approx_cd::io::{self, Regime};
use approx_cd::solver::{self, Engine, Mode};
use approx_cd::{
    BlockPartition, CompositeProblem, Error, LipschitzTable, Regularizer, SamplingKind, ScalarLoss, SolverConfig,
    StepsizeKind,
};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(to_py)
}

/// Column-compressed sparse matrix.
#[pyclass(name = "SparseMatrix", module = "approx_cd", from_py_object)]
#[derive(Clone)]
struct PySparseMatrix {
    inner: approx_cd::SparseMatrix,
}

#[pymethods]
impl PySparseMatrix {
    /// Builds an `rows x cols` matrix from `(row, col, value)` triplets.
    #[new]
    fn new(rows: usize, cols: usize, triplets: Vec<(usize, usize, f64)>) -> PyResult<Self> {
        let inner = approx_cd::SparseMatrix::from_triplets(rows, cols, &triplets).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_dense(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        let inner = approx_cd::SparseMatrix::from_dense(&rows).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn rows(&self) -> usize {
        self.inner.rows()
    }

    #[getter]
    fn cols(&self) -> usize {
        self.inner.cols()
    }

    #[getter]
    fn nnz(&self) -> usize {
        self.inner.nnz()
    }

    fn triplets(&self) -> Vec<(usize, usize, f64)> {
        self.inner.triplets().collect()
    }

    fn to_dense(&self) -> Vec<Vec<f64>> {
        self.inner.to_dense()
    }

    fn transpose(&self) -> Self {
        Self {
            inner: self.inner.transpose(),
        }
    }

    fn __repr__(&self) -> String {
        format!("SparseMatrix({}x{}, nnz={})", self.inner.rows(), self.inner.cols(), self.inner.nnz())
    }
}

/// Composite objective `sum_j phi_j((Ax)_j) + psi(x)`.
#[pyclass(name = "Problem", module = "approx_cd", from_py_object)]
#[derive(Clone)]
struct PyProblem {
    inner: CompositeProblem,
}

#[pymethods]
impl PyProblem {
    /// `loss` is one of `square`, `logistic`, `smoothed-abs`; `reg` one of
    /// `none`, `l1`, `box-linear`. `block_sizes` defaults to one coordinate
    /// per block.
    #[new]
    #[pyo3(signature = (matrix, loss="square", targets=None, mu=1.0, reg="none", lam=0.0, box_bounds=(0.0, 1.0), box_slope=0.0, block_sizes=None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        matrix: PySparseMatrix,
        loss: &str,
        targets: Option<Vec<f64>>,
        mu: f64,
        reg: &str,
        lam: f64,
        box_bounds: (f64, f64),
        box_slope: f64,
        block_sizes: Option<Vec<usize>>,
    ) -> PyResult<Self> {
        let m = matrix.inner.rows();
        let targets = targets.unwrap_or_else(|| vec![0.0; m]);
        let loss = match loss {
            "square" => ScalarLoss::square(targets),
            "logistic" => ScalarLoss::Logistic,
            "smoothed-abs" => ScalarLoss::smoothed_abs(targets, mu).map_err(to_py)?,
            other => return Err(PyValueError::new_err(format!("unknown loss '{other}'"))),
        };
        let reg = match reg {
            "none" => Regularizer::Zero,
            "l1" => Regularizer::l1(lam).map_err(to_py)?,
            "box-linear" => Regularizer::box_linear(box_bounds.0, box_bounds.1, box_slope).map_err(to_py)?,
            other => return Err(PyValueError::new_err(format!("unknown regularizer '{other}'"))),
        };
        let partition = match block_sizes {
            Some(sizes) => BlockPartition::new(&sizes),
            None => BlockPartition::unit(matrix.inner.cols()),
        }
        .map_err(to_py)?;
        let inner = CompositeProblem::new(matrix.inner, partition, loss, reg).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// `1/2 ||Ax - b||^2 + lam ||x||_1`.
    #[staticmethod]
    fn lasso(matrix: PySparseMatrix, targets: Vec<f64>, lam: f64) -> PyResult<Self> {
        let inner = CompositeProblem::lasso(matrix.inner, targets, lam).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Dual linear SVM over `[0, 1]^N`; `data` has one column per example.
    #[staticmethod]
    fn dual_svm(data: PySparseMatrix, labels: Vec<f64>, lam: f64) -> PyResult<Self> {
        let inner = CompositeProblem::dual_svm(&data.inner, &labels, lam).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn num_blocks(&self) -> usize {
        self.inner.num_blocks()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn objective(&self, x: Vec<f64>) -> PyResult<f64> {
        self.check(&x)?;
        Ok(self.inner.objective(&x))
    }

    fn gradient(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.check(&x)?;
        Ok(self.inner.gradient(&x))
    }

    /// ESO stepsizes of kind `fr`, `rt` or `nc` for a tau-nice sampling.
    fn stepsizes(&self, kind: &str, tau: usize) -> PyResult<Vec<f64>> {
        let table = LipschitzTable::for_problem(&self.inner).map_err(to_py)?;
        let v = approx_cd::stepsizes(parse(kind)?, &table, &self.inner, tau).map_err(to_py)?;
        Ok(v.v.into_inner())
    }

    /// Returns `(omega_bar, l_bar, w)`.
    fn separability(&self) -> PyResult<(f64, f64, Vec<f64>)> {
        let table = LipschitzTable::for_problem(&self.inner).map_err(to_py)?;
        let avg = separability_averages(&table).map_err(to_py)?;
        Ok((avg.omega_bar, avg.l_bar, avg.w.into_inner()))
    }

    /// One dict per tau with keys `tau, l1_fr, l1_rt, l1_nc, omega, omega_bar`.
    fn compare_stepsizes<'py>(&self, py: Python<'py>, taus: Vec<usize>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let rows = compare_stepsizes(&self.inner, &taus).map_err(to_py)?;
        rows.into_iter()
            .map(|r| {
                let d = PyDict::new(py);
                d.set_item("tau", r.tau)?;
                d.set_item("l1_fr", r.l1_fr)?;
                d.set_item("l1_rt", r.l1_rt)?;
                d.set_item("l1_nc", r.l1_nc)?;
                d.set_item("omega", r.omega)?;
                d.set_item("omega_bar", r.omega_bar)?;
                Ok(d)
            })
            .collect()
    }

    /// Runs the solver. Returns a dict with `x`, `iterations` and `log`, a
    /// list of `(k, elapsed_s, objective)` tuples.
    #[pyo3(signature = (tau=1, mode="approx", stepsizes="fr", sampling="nice", max_iters=1000, seed=0, log_period=1, tolerance=None, threads=1, x0=None, reference=false))]
    #[allow(clippy::too_many_arguments)]
    fn solve<'py>(
        &self,
        py: Python<'py>,
        tau: usize,
        mode: &str,
        stepsizes: &str,
        sampling: &str,
        max_iters: usize,
        seed: u64,
        log_period: usize,
        tolerance: Option<f64>,
        threads: usize,
        x0: Option<Vec<f64>>,
        reference: bool,
    ) -> PyResult<Bound<'py, PyDict>> {
        let sampling = match sampling {
            "nice" => SamplingKind::TauNice,
            "independent" => SamplingKind::TauIndependent,
            other => return Err(PyValueError::new_err(format!("unknown sampling '{other}'"))),
        };
        let mode: Mode = parse(mode)?;
        let kind: StepsizeKind = parse(stepsizes)?;
        let config = SolverConfig {
            tau,
            sampling,
            mode,
            engine: if reference { Engine::Reference } else { Engine::Efficient },
            stepsizes: kind,
            max_iters,
            seed,
            log_period,
            tolerance,
            threads,
            x0,
            ..SolverConfig::default()
        };
        let problem = &self.inner;
        let result = py.detach(|| solver::run(problem, &config)).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("x", result.x)?;
        d.set_item("iterations", result.iterations)?;
        let log: Vec<(usize, f64, f64)> = result
            .log
            .records
            .iter()
            .map(|r| (r.k, r.elapsed_s, r.objective))
            .collect();
        d.set_item("log", log)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!(
            "Problem(loss={}, reg={}, rows={}, dim={}, blocks={})",
            self.inner.loss.name(),
            self.inner.reg.name(),
            self.inner.matrix.rows(),
            self.inner.dim(),
            self.inner.num_blocks()
        )
    }
}

impl PyProblem {
    fn check(&self, x: &[f64]) -> PyResult<()> {
        if x.len() != self.inner.dim() {
            return Err(PyValueError::new_err(format!(
                "expected a vector of length {}, got {}",
                self.inner.dim(),
                x.len()
            )));
        }
        Ok(())
    }
}

#[pyfunction]
fn theta_next(theta: f64) -> PyResult<f64> {
    solver::theta_next(theta).map_err(to_py)
}

#[pyfunction]
fn beta(omega: usize, tau: usize, n: usize) -> f64 {
    approx_cd::beta(omega, tau, n)
}

#[pyfunction]
fn complexity_bound(k: usize, tau: usize, n: usize, c: f64) -> PyResult<f64> {
    solver::complexity_bound(k, tau, n, c).map_err(to_py)
}

#[pyfunction]
fn iterations_for_accuracy(c: f64, eps: f64, tau: usize, n: usize) -> PyResult<u64> {
    solver::iterations_for_accuracy(c, eps, tau, n).map_err(to_py)
}

#[pyfunction]
fn gamma_coeffs(thetas: Vec<f64>, tau: usize, n: usize, k: usize) -> PyResult<Vec<f64>> {
    solver::gamma_coeffs(&thetas, tau, n, k).map_err(to_py)
}

/// Returns `(matrix, targets)`.
#[pyfunction]
fn read_libsvm(path: &str) -> PyResult<(PySparseMatrix, Vec<f64>)> {
    let data = io::read_libsvm(path).map_err(to_py)?;
    Ok((PySparseMatrix { inner: data.matrix }, data.targets))
}

#[pyfunction]
fn write_libsvm(path: &str, matrix: PySparseMatrix, targets: Vec<f64>) -> PyResult<()> {
    let data = io::LibsvmData {
        matrix: matrix.inner,
        targets,
    };
    io::write_libsvm(&data, path).map_err(to_py)
}

/// Synthetic matrix with the row nonzero counts of `regime`.
#[pyfunction]
fn gen_synthetic(regime: &str, m: usize, n: usize, seed: u64) -> PyResult<PySparseMatrix> {
    let regime: Regime = parse(regime)?;
    let inner = io::gen_synthetic(regime, m, n, seed).map_err(to_py)?;
    Ok(PySparseMatrix { inner })
}

#[pymodule(name = "approx_cd")]
fn init_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySparseMatrix>()?;
    m.add_class::<PyProblem>()?;
    m.add_function(wrap_pyfunction!(theta_next, m)?)?;
    m.add_function(wrap_pyfunction!(beta, m)?)?;
    m.add_function(wrap_pyfunction!(complexity_bound, m)?)?;
    m.add_function(wrap_pyfunction!(iterations_for_accuracy, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_coeffs, m)?)?;
    m.add_function(wrap_pyfunction!(read_libsvm, m)?)?;
    m.add_function(wrap_pyfunction!(write_libsvm, m)?)?;
    m.add_function(wrap_pyfunction!(gen_synthetic, m)?)?;
    Ok(())
}
