"""Smoke tests for the python bindings: one pass through each operation family.

Runnable under pytest or directly (python3 test_smoke.py).
"""

import numpy as np

import dhs


def _sym(rng, n):
    a = rng.standard_normal((n, n))
    return 0.5 * (a + a.T)


def test_geometry_backend():
    bk = dhs.sphere_backend(2)
    assert bk.m == 2 and bk.n == 3
    assert bk.kind == "analytic-sphere"
    assert bk.shrinker_residual() <= 1e-12
    assert abs(bk.weighted_volume() - 4 * np.pi * 2 * np.exp(-1.0)) <= 1e-6

    try:
        dhs.sphere_backend(2, ambient_n=2)
    except dhs.DimensionError:
        pass
    else:
        raise AssertionError("expected DimensionError")


def test_discrete_spectrum_matches_oracle():
    bk = dhs.sphere_backend(2, resolution=3)
    cx = dhs.build_complex(bk)
    assert cx.cells(0) > 0
    k, m = dhs.hodge_laplacian(cx, 0)
    sp = dhs.solve_spectrum(k, m, 9, seed=7)
    expect = np.array([0, 1, 1, 1, 3, 3, 3, 3, 3], dtype=float)
    assert np.all(np.abs(sp.eigenvalues - expect) <= 0.02 * (1 + expect))
    assert np.max(sp.residuals) <= 1e-9
    assert dhs.coordinate_eigenfunction_check(cx, bk) <= 0.05

    ones = np.ones(cx.cells(0))
    assert np.max(np.abs(dhs.drift_apply(cx, ones))) == 0.0


def test_bound_suite_and_formulas():
    assert abs(dhs.phi(1.0, 2.0, 2, 1) - 0.5) <= 1e-12
    assert abs(dhs.yang_bound(np.array([0.0]), np.array([2.0]), 2) - 1.0) <= 1e-12
    assert abs(dhs.gap_bound(np.array([0.0]), 2, -0.5) - 1.0) <= 1e-12

    sp = dhs.analytic_sphere_spectrum(2, 0, 53)
    bk = dhs.sphere_backend(2)
    report = dhs.bound_suite(sp, bk, mode="exact-integral", k_max=50)
    assert report.all_pass()
    assert report.provenance.m == 2
    kinds = {row.inequality for row in report.rows}
    assert kinds == {"yang", "gap", "levitin-parnovski", "cheng-yang"}
    equalities = [row for row in report.rows if abs(row.slack) <= 1e-9]
    assert len(equalities) >= 7
    assert dhs.bound_report_csv(report).startswith("inequality,p,index,")

    g = dhs.geometric_term(bk, 0)
    assert abs(g.g + 0.5) <= 1e-12 and abs(g.min_xsq - 2.0) <= 1e-12


def test_operator_identities():
    rng = np.random.default_rng(1)
    a = _sym(rng, 8)
    bs = [_sym(rng, 8), _sym(rng, 8)]
    lhs, rhs, slack = dhs.ah_check(a, bs, 3)
    assert slack >= -1e-10 * (1 + abs(rhs))
    rho, gain = dhs.commutator_terms(a, bs, 4)
    assert rho.shape == (4,) and gain.shape == (4,)
    assert np.all(gain >= 0)

    g = _sym(rng, 8)
    for j in range(1, 9):
        assert dhs.lpt_identity_residual(a, g, j) <= 1e-10

    rot = dhs.triangularize_coupling(a, [g, bs[0]], 1)
    assert abs(rot["coupling"][0, 1]) <= 1e-10 * (1 + np.linalg.norm(rot["coupling"]))
    assert np.allclose(rot["rotation"].T @ rot["rotation"], np.eye(2), atol=1e-12)

    c = dhs.commutator(a, g)
    assert np.allclose(c, -c.T, atol=1e-12 * (1 + np.linalg.norm(a) * np.linalg.norm(g)))

    for batch in (dhs.ah_batch(100, 5), dhs.lpt_batch(100, 6), dhs.triangularize_batch(50, 7)):
        assert batch["max_violation"] <= 1e-10
        assert batch["failures"] == []


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            fn()
            print(f"{name}: ok")
    print("smoke tests passed")
