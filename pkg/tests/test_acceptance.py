"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines; every tolerance is pinned here, nothing is deferred.
"""

import time

import numpy as np
import pytest

import quadstab as qs
import quadstab.harness as h
from quadstab import EquationSpec, GroupSpec

QS = [5, 7, 11, 13]
DS = [1, 2]


def _report(num: int, text: str):
    print(f"[acceptance] criterion {num}: PASS - {text}")


def test_criterion_1_centroid_equation_oracle():
    t0 = time.monotonic()
    checked = 0
    for q in QS:
        for d in DS:
            g = GroupSpec(q, d)
            fe1_dim = len(qs.nullspace_basis(qs.enumerate_constraints(EquationSpec("fe1"), g)))
            assert fe1_dim == d * (d + 1) // 2, (q, d, fe1_dim)
            for n in (3, 4, 5):
                eq = EquationSpec("fe3", n=n)
                try:
                    qs.check_admissible(eq, g)
                except qs.InadmissibleGroupError:
                    assert n in (4, 5) and q in (5, 7), (q, d, n)
                    continue
                cmp = qs.spaces_equal(eq, EquationSpec("fe1"), g)
                assert cmp.equal, (q, d, n, cmp.dim_left, cmp.dim_right)
                assert cmp.dim_left == d * (d + 1) // 2
                checked += 1
    elapsed = time.monotonic() - t0
    assert elapsed < 60.0, f"oracle grid took {elapsed:.1f}s"
    assert checked >= 16
    _report(1, f"nullspace(fe3) = nullspace(fe1) on {checked} admissible (q,d,n) combos, "
               f"fe1 dim = d(d+1)/2, in {elapsed:.1f}s")


def test_criterion_2_shifted_equation_oracle():
    checked = 0
    for a in (0, 2, 3, 4):
        for q in QS:
            for d in DS:
                g = GroupSpec(q, d)
                eq = EquationSpec("fe3_0", a=a)
                try:
                    qs.check_admissible(eq, g)
                except qs.InadmissibleGroupError:
                    assert a in (3, 4) and q in (5, 7), (a, q, d)
                    continue
                cmp = qs.spaces_equal(eq, EquationSpec("fe1"), g)
                assert cmp.equal, (a, q, d)
                checked += 1
    assert checked >= 20
    _report(2, f"nullspace(fe3_0, a in {{0,2,3,4}}) = nullspace(fe1) on {checked} admissible combos")


def test_criterion_3_forward_direction_residuals():
    rng = np.random.default_rng(314)
    trials = 10_000
    # scalar equations on random quadratic forms
    eqs = [EquationSpec("fe1"), EquationSpec("fe2"), EquationSpec("fe3", n=3),
           EquationSpec("fe3", n=4), EquationSpec("fe3", n=5), EquationSpec("fe3_0", a=2),
           EquationSpec("fe3_0", a=3)]
    worst = 0.0
    for eq in eqs:
        f = None
        for t in range(trials):
            if t % 500 == 0:
                d = int(rng.integers(1, 4))
                m = rng.uniform(-1.0, 1.0, (d, d))
                f = qs.QuadraticForm((m + m.T) / 2.0)
            pts = tuple(rng.uniform(-10.0, 10.0, f.domain.d) for _ in range(eq.arity))
            scale = 1.0 + sum(float(p @ p) for p in pts)
            ratio = abs(qs.equation_residual(f, eq, pts)) / (1e-9 * scale)
            worst = max(worst, ratio)
            assert ratio <= 1.0, (eq.label(), ratio)
    # twisted residual of the matrix square under Haar unitaries
    fm = qs.MatrixSquare(2)
    for t in range(trials):
        u = qs.sample_unitary(2, seed=t)
        xs = tuple(qs.random_point(rng, d=1, k=2, box=10.0) for _ in range(3))
        scale = 1.0 + sum(qs.coordinate_magnitudes(x)[0] ** 2 for x in xs)
        ratio = np.linalg.norm(qs.approximate_remainder(fm, u, 3, xs)) / (1e-9 * scale)
        worst = max(worst, ratio)
        assert ratio <= 1.0
    _report(3, f"10^4 random tuples per equation, all residuals <= 1e-9 * (1 + scale); "
               f"worst fill {worst:.2e} of budget")


def test_criterion_4_power_budget_reproduction():
    t0 = time.monotonic()
    rng = np.random.default_rng(27)
    phi = qs.power(1.0, 1.0)
    for _ in range(100):
        norm_x = float(rng.uniform(0.05, 10.0))
        closed = qs.closed_form_bounds(3, "power", "forward", norm_x=norm_x,
                                       K=1.0, epsilon=1.0, r=1.0)
        assert closed == pytest.approx(5.0 / 6.0 * norm_x, rel=1e-12)
        series = qs.series_bound_forward(phi, 3, 1.0, np.array([norm_x]), series_tol=1e-15)
        assert abs(series - closed) <= 1e-12 * abs(closed)
    res = h.run_preset("power-forward", write_csv=False)
    assert res.exit_code == 0
    assert len(res.rows) == 100
    eps = res.summary["control"]["epsilon"]
    for row in res.rows:
        assert row.status == "pass"
        assert row.deviation <= row.bound + 1e-9
        expect = qs.closed_form_bounds(3, "power", "forward", norm_x=row.norm_x,
                                       K=1.0, epsilon=eps, r=1.0)
        assert row.bound == pytest.approx(expect, rel=1e-9)
    elapsed = time.monotonic() - t0
    assert elapsed < 10.0, f"took {elapsed:.1f}s"
    _report(4, f"bound 5/6*|x| by closed form and series (<=1e-12 rel); fitted-eps run: "
               f"100/100 probes within bound, in {elapsed:.1f}s")


def test_criterion_5_constant_budget_quasi_banach():
    res = h.run_preset("constant-quasinorm", write_csv=False)
    assert res.exit_code == 0
    theta = res.summary["control"]["theta"]
    bound = 5.0 * 2.0 * theta / (3.0 * 2.0)  # (n+2) K theta / (n [(n-1)^2 - K]) at n=3, K=2
    assert bound == pytest.approx(5.0 * theta / 3.0, rel=1e-12)
    for row in res.rows:
        assert row.status == "pass"
        assert row.bound == pytest.approx(bound, rel=1e-9)
        assert row.deviation <= bound + 1e-9
    _report(5, f"l^(1/2) plane (K=2): all {len(res.rows)} probes within 5*theta/3 = {bound:.4f}")


def test_criterion_6_modulus_one_equals_exponent_one():
    res = h.run_preset("k1-equals-p1", write_csv=False)
    assert res.exit_code == 0
    for row in res.rows:
        assert row.status == "pass"
        assert row.deviation <= 1e-12  # relative disagreement column
    worst = res.summary["worst"]
    _report(6, f"K=1 and p=1 bounds agree to {worst:.2e} relative on {len(res.rows)} grid points "
               f"(forward and backward, closed form and series)")


def test_criterion_7_inner_product_characterization():
    for dim, mode, param in ((2, "b", 2), (3, "b", 2), (3, "c", 3)):
        res = qs.inner_product_characterization(qs.euclidean(dim), mode, param,
                                                trials=10_000, seed=0)
        assert res.passed, (dim, mode)
        assert res.sup_residual <= 1e-9 * 1e4
    bad = qs.inner_product_characterization(qs.l1(2), "b", 2, trials=10_000, seed=0)
    assert not bad.passed
    assert np.allclose(bad.witness[0], [1.0, 0.0])
    assert np.allclose(bad.witness[1], [0.0, 1.0])
    assert bad.witness_residual == pytest.approx(4.0, abs=1e-12)
    _report(7, "Euclidean spaces pass identities (b) and (c) at 1e-9 over 10^4 samples; "
               "l1 plane fails with witness x=(1,0), y=(0,1), residual 4")


def test_criterion_8_convergence_rate():
    f = qs.Perturbed(qs.QuadraticForm([[1.0]]), qs.Sine(), 1.0)
    x = np.array([1.0])
    gaps = []
    for m in range(1, 21):
        gap = abs(qs.hyers_iterate(f, 3, m, x) - qs.hyers_iterate(f, 3, m - 1, x))
        gaps.append(gap)
    fitted_c = max(gap * 4.0**m for m, gap in zip(range(1, 21), gaps))
    # term-count oracle: |sin(2^m x)/4^m - sin(2^(m-1) x)/4^(m-1)| <= 5 / 4^m
    assert fitted_c <= 5.0 * (1.0 + 1e-9)
    for m, gap in zip(range(1, 21), gaps):
        assert gap <= fitted_c * 4.0**-m * (1.0 + 1e-12)
        assert gap <= 5.0 * 4.0**-m * (1.0 + 1e-9)
    _report(8, f"iterate gaps of t^2 + sin t obey gap_m <= C * 4^-m for m <= 20, fitted C = "
               f"{fitted_c:.3f} <= 5")


def test_criterion_9_unitary_covariance():
    res = h.run_preset("unitary-covariance", write_csv=False)
    assert res.exit_code == 0
    dev = res.summary["max_relative_deviation"]
    assert dev <= 1e-6
    _report(9, f"Q_est from perturbed matrix square on M_2(C): max relative covariance "
               f"deviation {dev:.2e} <= 1e-6 over 100 Haar unitaries")


def test_criterion_10_open_problem_boundary():
    with pytest.raises(qs.OpenProblemError) as err:
        qs.closed_form_bounds(3, "constant", "forward", K=4.0, theta=1.0)
    assert "open-problem region" in str(err.value)
    res = h.run_preset("open-problem-deadzone", write_csv=False)
    assert res.exit_code == h.EXIT_EXPECTED_REJECTION
    denoms = [e["denominator"] for e in res.summary["sweep"]]
    assert max(denoms) > 0.0 and min(denoms) <= 0.0
    signs = [np.sign(v) for v in denoms]
    assert 1.0 in signs and -1.0 in signs
    _report(10, "closed-form bound rejects (n=3, K=4) with the open-problem tag; sweep shows "
                "the denominator (n-1)^2 - K crossing zero; run exits with code 4")
