"""Smoke test for the pyspherelab extension.

Build and install first:  pip install --no-build-isolation ./crates/python
Then run:                 python python/smoke_test.py
"""

import math

import pyspherelab as sl


def main():
    ops = sl.OperatorSet(6, eta=1.0)
    assert ops.dim == 28
    assert ops.basis()[:3] == [(0, 0), (1, 0), (0, 1)]
    assert "Piz" in sl.OperatorSet.operator_names()

    nz = {(r, c): v for r, c, v in ops.nonzeros("Nz")}
    vac = ops.basis().index((0, 0))
    up = ops.basis().index((1, 1))
    assert abs(nz[(up, vac)] - 1 / math.sqrt(3)) < 1e-15

    jz = ops.dense("Jz")
    assert all(jz[i][k] == 0 for i in range(ops.dim) for k in range(ops.dim) if i != k)

    try:
        ops.nonzeros("Qx")
    except KeyError:
        pass
    else:
        raise AssertionError("unknown operator accepted")

    reports = sl.verify(n_max=20, eta=0.5)
    failing = sorted(r["name"] for r in reports if r["status"] == "fail")
    assert failing == [f"cross_pi_j.pi_cross_j.{c}" for c in "xyz"], failing
    assert all(r["status"] == "pass" for r in reports if r["family"] == "z_squared")

    xc = sl.xcheck(j_max=4, n_max=10)
    assert len(xc["entries"]) == 6
    assert max(e["max_deviation"] for e in xc["entries"]) < 1e-9

    z = sl.classical_label([0.0, 0.6, 0.8], [1.0, 0.0, 0.0])
    assert abs(sum(c * c for c in z) - 1) < 1e-12

    psi = sl.solve_coherent(x=[0.0, 0.6, 0.8], p=[1.0, 0.0, 0.0], n_max=24)
    assert psi.residual < 1e-8, psi.residual
    assert psi.label_mismatch() <= 10 * psi.residual + 1e-15
    norm = sum(abs(c) ** 2 for _, _, c in psi.coefficients)
    assert abs(norm - 1) < 1e-12
    exp = psi.expectations()
    assert abs(exp["n_squared"] - 1) < 1e-12

    try:
        sl.solve_coherent([1, 1, 0])
    except ValueError:
        pass
    else:
        raise AssertionError("z.z != 1 accepted")

    print("pyspherelab smoke test passed:", psi)


if __name__ == "__main__":
    main()
