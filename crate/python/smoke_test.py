"""Smoke test for the approx_cd Python module.

Build and install the extension first, for example

    maturin build --release -m crates/python/Cargo.toml
    pip install target/wheels/approx_cd-*.whl

then run ``python python/smoke_test.py``.
"""

import math
import os
import random
import tempfile

import approx_cd as ac


def check_scalars():
    golden = (math.sqrt(5.0) - 1.0) / 2.0
    assert abs(ac.theta_next(1.0) - golden) < 1e-15
    assert ac.beta(1, 7, 10) == 1.0
    assert ac.complexity_bound(1, 3, 10, 2.5) == 2.5
    assert ac.gamma_coeffs([0.5], 1, 2, 1) == [0.0, 1.0]
    try:
        ac.theta_next(0.0)
    except ValueError:
        pass
    else:
        raise AssertionError("theta_next(0) should fail")


def check_lasso():
    a = ac.gen_synthetic("intermediate", 120, 80, 3)
    assert a.rows == 120 and a.cols == 80
    rng = random.Random(0)
    b = [rng.gauss(0.0, 1.0) for _ in range(a.rows)]
    problem = ac.Problem.lasso(a, b, 0.5)
    fr = problem.stepsizes("fr", 8)
    rt = problem.stepsizes("rt", 8)
    assert all(f <= r + 1e-12 for f, r in zip(fr, rt))

    out = problem.solve(tau=8, max_iters=500, log_period=100, seed=1)
    log = out["log"]
    assert [rec[0] for rec in log] == [0, 100, 200, 300, 400, 500]
    assert log[-1][2] < log[0][2]
    assert abs(problem.objective(out["x"]) - log[-1][2]) < 1e-8 * (1 + abs(log[-1][2]))

    same = problem.solve(tau=8, max_iters=500, log_period=100, seed=1, threads=3)
    assert same["x"] == out["x"]
    ref = problem.solve(tau=8, max_iters=500, log_period=100, seed=1, reference=True)
    diff = math.sqrt(sum((p - q) ** 2 for p, q in zip(ref["x"], out["x"])))
    assert diff <= 1e-8 * math.sqrt(sum(q * q for q in ref["x"]))

    rows = problem.compare_stepsizes([1, 8, 80])
    assert [r["tau"] for r in rows] == [1, 8, 80]
    return a, b


def check_svm():
    rng = random.Random(1)
    dense = [[rng.gauss(0.0, 1.0) if rng.random() < 0.3 else 0.0 for _ in range(30)] for _ in range(40)]
    labels = [rng.choice([-1.0, 1.0]) for _ in range(30)]
    problem = ac.Problem.dual_svm(ac.SparseMatrix.from_dense(dense), labels, 1.0 / 30)
    out = problem.solve(tau=5, max_iters=1000, log_period=1000)
    assert all(0.0 <= x <= 1.0 for x in out["x"])
    assert out["log"][-1][2] < 0.0


def check_io(a, b):
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "data.svm")
        ac.write_libsvm(path, a, b)
        back, targets = ac.read_libsvm(path)
        assert back.nnz == a.nnz
        assert targets == b
        with open(path, "w") as f:
            f.write("1 2:1 2:3\n")
        try:
            ac.read_libsvm(path)
        except ValueError as e:
            assert ":1:" in str(e)
        else:
            raise AssertionError("duplicate index should fail")


def main():
    check_scalars()
    a, b = check_lasso()
    check_svm()
    check_io(a, b)
    print("smoke test passed")


if __name__ == "__main__":
    main()
