import numpy as np
import pytest

import quadstab as qs


def naive_forward_sum(phi, n, K, x, terms=400):
    # independent reimplementation of the forward series, straight loop
    lam = n - 1
    total = 0.0
    for i in range(terms):
        total += K**i * qs.phi_cap(phi, n, np.asarray(x) * lam**i) / lam ** (2 * i)
    return K / lam**2 * total


def naive_backward_sum(phi, n, K, x, terms=400):
    lam = n - 1
    total = 0.0
    for i in range(1, terms + 1):
        total += K**i * lam ** (2 * i) * qs.phi_cap(phi, n, np.asarray(x) / lam**i)
    return total / lam**2


def naive_forward_sum_p(phi, n, p, x, terms=400):
    lam = n - 1
    total = 0.0
    for i in range(terms):
        total += (qs.phi_cap(phi, n, np.asarray(x) * lam**i) / lam ** (2 * i)) ** p
    return total ** (1.0 / p) / lam**2


def test_phi_component_values():
    phi = qs.power(2.0, 1.5)
    x = np.array([2.0])
    for i in (1, 2, 3):
        assert qs.phi_component(phi, 3, i, x) == pytest.approx(2.0 * 2.0**1.5)
    assert qs.phi_component(qs.constant(0.7), 4, 2, x) == pytest.approx(0.7)
    assert qs.phi_component(phi, 3, 1, np.array([0.0])) == 0.0
    with pytest.raises(ValueError):
        qs.phi_component(phi, 3, 4, x)
    with pytest.raises(ValueError):
        qs.phi_component(phi, 3, 0, x)


def test_phi_tilde_values():
    x = np.array([1.0])
    assert qs.phi_tilde(qs.power(1.0, 1.0), 3, x) == pytest.approx(2.0)
    assert qs.phi_tilde(qs.constant(0.5), 5, x) == pytest.approx(1.0)

    # custom control: zero whenever only slot 1 is active, large otherwise
    def fn(xs):
        active = [i for i, p in enumerate(xs) if np.any(np.asarray(p) != 0)]
        return 0.0 if active == [0] else 7.0

    phi = qs.custom_control(fn)
    assert qs.phi_tilde(phi, 3, x) == pytest.approx(7.0)  # phi_1 + phi_2 = 0 + 7


def test_phi_cap_values():
    x = np.array([1.0])
    n = 3
    # enumerated weights |(n^2+1)-(i+1)n| for i=1..n are {4,1,2}; min at i = 2
    weights = [w * n for w in qs.cap_weights(n)]
    assert weights == pytest.approx([4.0, 1.0, 2.0])
    assert int(np.argmin(weights)) + 1 == n - 1
    assert qs.phi_cap(qs.power(1.0, 1.0), 3, x) == pytest.approx(1.0 + 2.0 / 3.0)
    assert qs.phi_cap(qs.constant(1.0), 3, x) == pytest.approx(5.0 / 3.0)
    assert qs.phi_cap(qs.constant(2.0), 5, x) == pytest.approx((5 + 2) / 5 * 2.0)


def test_phi_cap_fast_path_matches_enumeration():
    rng = np.random.default_rng(0)
    for phi in (qs.power(0.8, 1.3), qs.power(2.0, 3.0), qs.constant(2.5)):
        for n in (3, 4, 5):
            for _ in range(10):
                x = rng.uniform(-5, 5, 2)
                a = qs.phi_cap(phi, n, x)
                b = qs.phi_cap_enumerated(phi, n, x)
                assert a == pytest.approx(b, rel=1e-12)


def test_series_bound_forward_values():
    x = np.array([1.0])
    phi = qs.power(1.0, 1.0)
    got = qs.series_bound_forward(phi, 3, 1.0, x, series_tol=1e-15)
    assert got == pytest.approx(5.0 / 6.0, rel=1e-12)
    assert got == pytest.approx(naive_forward_sum(phi, 3, 1.0, x), rel=1e-12)
    const = qs.constant(1.0)
    got_c = qs.series_bound_forward(const, 3, 1.0, x, series_tol=1e-15)
    assert got_c == pytest.approx(5.0 / 9.0, rel=1e-12)
    assert got_c == pytest.approx(naive_forward_sum(const, 3, 1.0, x), rel=1e-12)
    with pytest.raises(qs.DivergenceError):
        qs.series_bound_forward(qs.power(1.0, 2.0), 3, 1.0, x)


def test_series_bound_backward_values():
    x = np.array([1.0])
    phi = qs.power(1.0, 3.0)
    got = qs.series_bound_backward(phi, 3, 1.0, x, series_tol=1e-15)
    assert got == pytest.approx(5.0 / 12.0, rel=1e-12)
    assert got == pytest.approx(naive_backward_sum(phi, 3, 1.0, x), rel=1e-12)
    x2 = np.array([2.0])
    got2 = qs.series_bound_backward(qs.power(1.0, 4.0), 3, 1.0, x2, series_tol=1e-15)
    assert got2 == pytest.approx(20.0 / 9.0, rel=1e-12)
    with pytest.raises(qs.DivergenceError):
        qs.series_bound_backward(qs.constant(1.0), 3, 1.0, x)


def test_series_bound_p_values():
    x = np.array([1.0])
    phi = qs.power(1.0, 1.0)
    # p = 1 equals the K = 1 quasi-norm bound
    assert qs.series_bound_forward_p(phi, 3, 1.0, x, 1e-15) == pytest.approx(
        qs.series_bound_forward(phi, 3, 1.0, x, 1e-15), rel=1e-12)
    # p = 1/2 closed form: (n+2) eps / (n [ (n-1)^(2p) - (n-1)^(rp) ]^(1/p))
    expect = 5.0 / (3.0 * (2.0 - np.sqrt(2.0)) ** 2)
    got = qs.series_bound_forward_p(phi, 3, 0.5, x, 1e-15)
    assert got == pytest.approx(expect, rel=1e-12)
    assert got == pytest.approx(naive_forward_sum_p(phi, 3, 0.5, x), rel=1e-10)
    with pytest.raises(qs.DivergenceError):
        qs.series_bound_forward_p(qs.power(1.0, 2.0), 3, 0.5, x)
    with pytest.raises(qs.DivergenceError):
        qs.series_bound_backward_p(qs.power(1.0, 1.0), 3, 0.5, x)
    got_b = qs.series_bound_backward_p(qs.power(1.0, 3.0), 3, 0.5, x, 1e-15)
    expect_b = 5.0 / (3.0 * (2.0**1.5 - 2.0) ** 2)
    assert got_b == pytest.approx(expect_b, rel=1e-12)


def test_series_bounds_vanish_at_zero():
    zero = np.array([0.0])
    assert qs.series_bound_forward(qs.power(1.0, 1.0), 3, 1.0, zero) == 0.0
    assert qs.series_bound_backward(qs.power(1.0, 3.0), 3, 1.0, zero) == 0.0
    assert qs.series_bound_forward_p(qs.power(1.0, 1.0), 3, 0.5, zero) == 0.0
    # a constant budget does not vanish at the origin
    assert qs.series_bound_forward(qs.constant(1.0), 3, 1.0, zero) > 0.0


def test_custom_control_series_matches_power():
    x = np.array([1.0])
    fn = lambda xs: sum(float(np.abs(np.asarray(p)).sum()) for p in xs)  # eps=1, r=1 on d=1
    phi = qs.custom_control(fn)
    got = qs.series_bound_forward(phi, 3, 1.0, x, series_tol=1e-13)
    assert got == pytest.approx(5.0 / 6.0, rel=1e-10)
    diverging = qs.custom_control(lambda xs: 1.0)  # constant 1, backward diverges
    with pytest.raises(qs.DivergenceError):
        qs.series_bound_backward(diverging, 3, 1.0, x)


def test_closed_form_bounds_values():
    assert qs.closed_form_bounds(3, "power", "forward", norm_x=1.0, K=1.0, epsilon=1.0,
                                 r=1.0) == pytest.approx(5.0 / 6.0)
    assert qs.closed_form_bounds(3, "constant", "forward", K=2.0,
                                 theta=1.0) == pytest.approx(5.0 / 3.0)
    assert qs.closed_form_bounds(3, "power", "backward", norm_x=2.0, K=1.0, epsilon=1.0,
                                 r=4.0) == pytest.approx(20.0 / 9.0)
    assert qs.closed_form_bounds(3, "power", "forward", norm_x=1.0, p=0.5, epsilon=1.0,
                                 r=1.0) == pytest.approx(5.0 / (3.0 * (2.0 - np.sqrt(2.0)) ** 2))


def test_closed_form_dead_zone():
    with pytest.raises(qs.OpenProblemError) as err:
        qs.closed_form_bounds(3, "constant", "forward", K=4.0, theta=1.0)
    assert "open-problem region" in str(err.value)
    with pytest.raises(qs.OpenProblemError):
        qs.closed_form_bounds(3, "power", "forward", norm_x=1.0, K=1.0, epsilon=1.0, r=2.0)
    with pytest.raises(qs.OpenProblemError):
        qs.closed_form_bounds(3, "power", "forward", norm_x=1.0, p=0.5, epsilon=1.0, r=2.0)
    # K = 2, n = 3: dead zone is 2 - log2(2) <= r <= 2 + log2(2), i.e. [1, 3]
    with pytest.raises(qs.OpenProblemError):
        qs.closed_form_bounds(3, "power", "forward", norm_x=1.0, K=2.0, epsilon=1.0, r=1.5)
    # wrong direction outside the dead zone is divergence, not open-problem
    with pytest.raises(qs.DivergenceError) as err2:
        qs.closed_form_bounds(3, "power", "forward", norm_x=1.0, K=1.0, epsilon=1.0, r=3.0)
    assert not isinstance(err2.value, qs.OpenProblemError)
    with pytest.raises(qs.DivergenceError):
        qs.closed_form_bounds(3, "constant", "backward", K=1.0, theta=1.0)
    with pytest.raises(ValueError):
        qs.closed_form_bounds(3, "power", "forward", K=1.0, p=1.0, epsilon=1.0, r=1.0)


def test_power_regime():
    assert qs.power_regime(3, 1.0, 1.0) == "forward"
    assert qs.power_regime(3, 1.0, 3.0) == "backward"
    assert qs.power_regime(3, 1.0, 2.0) == "dead_zone"
    assert qs.power_regime(3, 2.0, 1.5) == "dead_zone"
    assert qs.power_regime(3, 2.0, 0.5) == "forward"


def test_hyers_iterate_fixed_point():
    f = qs.QuadraticForm([[1.0]])
    x = np.array([1.7])
    vals = [qs.hyers_iterate(f, 3, m, x) for m in range(7)]
    for v in vals:
        assert v == pytest.approx(1.7**2, rel=1e-12)
    for n in (4, 5):
        assert qs.hyers_iterate(f, n, 3, x) == pytest.approx(1.7**2, rel=1e-12)


def test_hyers_iterate_sine_perturbation():
    f = qs.Perturbed(qs.QuadraticForm([[1.0]]), qs.Sine(), 1.0)
    x = np.array([1.0])
    for m in range(1, 12):
        got = qs.hyers_iterate(f, 3, m, x)
        expect = 1.0 + np.sin(2.0**m) / 4.0**m
        assert got == pytest.approx(expect, rel=1e-12)
        assert abs(got - 1.0) <= 4.0**-m


def test_hyers_iterate_constant_shift():
    c = 0.9
    f = qs.SumMapping([qs.QuadraticForm([[1.0]]), qs.ConstantMap(c)])
    x = np.array([2.0])
    # the shifted forward iterate converges to the exact square
    vals = [qs.hyers_iterate(f, 3, m, x, "forward") for m in range(20)]
    assert vals[0] == pytest.approx(4.0 + c + c)  # f(x) + (n-1) f(0) / 2 = x^2 + 2c
    assert vals[-1] == pytest.approx(4.0, abs=1e-9)


def test_hyers_iterate_backward():
    f = qs.Perturbed(qs.QuadraticForm([[1.0]]), qs.Monomial(3), 0.1)
    x = np.array([2.0])
    got = qs.hyers_iterate(f, 3, 10, x, "backward")
    assert got == pytest.approx(4.0 + 0.1 * 8.0 / 2.0**10, rel=1e-12)
    fc = qs.SumMapping([qs.QuadraticForm([[1.0]]), qs.ConstantMap(1.0)])
    with pytest.raises(ValueError, match="f\\(0\\) = 0"):
        qs.hyers_iterate(fc, 3, 2, x, "backward")


def test_hyers_iterate_overflow_guard():
    f = qs.QuadraticForm([[1.0]])
    with pytest.raises(ValueError, match="overflow"):
        qs.hyers_iterate(f, 3, 400, np.array([1.0]))


def test_iterate_gap_bound_dominates():
    theta = 12.0
    phi = qs.constant(theta)
    f = qs.Perturbed(qs.QuadraticForm([[1.0]]), qs.Sine(), 1.0)
    n, K = 3, 1.0
    for x0 in (0.5, 1.0, 3.0):
        x = np.array([x0])
        iters = [qs.hyers_iterate(f, n, m, x) for m in range(9)]
        for l in range(8):
            for m in range(l + 1, 9):
                gap = abs(iters[l] - iters[m])
                bound = qs.iterate_gap_bound(phi, n, K, x, l, m)
                assert gap <= bound + 1e-12
    # one-step case collapses to Phi(lam^l x) / lam^(2l+2)
    x = np.array([1.0])
    one = qs.iterate_gap_bound(phi, 3, 1.0, x, 2, 3)
    assert one == pytest.approx(qs.phi_cap(phi, 3, 4.0 * x) / 4.0**3)


def test_iterate_gap_bound_backward_dominates():
    phi = qs.power(24.0, 3.0)
    f = qs.Perturbed(qs.QuadraticForm([[1.0]]), qs.Monomial(3), 0.5)
    n, K = 3, 1.0
    x = np.array([2.0])
    iters = [qs.hyers_iterate(f, n, m, x, "backward") for m in range(8)]
    for l in range(7):
        for m in range(l + 1, 8):
            gap = abs(iters[l] - iters[m])
            bound = qs.iterate_gap_bound(phi, n, K, x, l, m, direction="backward")
            assert gap <= bound + 1e-12


def test_stabilize_exact_quadratic():
    f = qs.QuadraticForm([[1.0]])
    cfg = qs.StabilityConfig(n=3, norm_spec=qs.euclidean(1),
                             probes=(np.array([0.5]), np.array([2.0])),
                             m_max=30, tol=1e-9)
    rep = qs.stabilize(f, qs.constant(0.5), cfg)
    assert rep.passed
    for p in rep.probes:
        assert p.deviation <= 1e-9
        assert p.margin == pytest.approx(p.bound, abs=1e-8)


def test_stabilize_constant_budget_example():
    f = qs.Perturbed(qs.QuadraticForm([[1.0]]), qs.Sine(), 0.1)
    probes = tuple(np.array([v]) for v in (0.25, 1.0, 2.0, 5.0, 9.5))
    cfg = qs.StabilityConfig(n=3, norm_spec=qs.euclidean(1), probes=probes,
                             m_max=40, tol=1e-9)
    rep = qs.stabilize(f, qs.constant(1.2), cfg)
    assert rep.passed
    for p in rep.probes:
        assert p.bound == pytest.approx(2.0 / 3.0, rel=1e-9)
        assert p.deviation <= 2.0 / 3.0


def test_stabilized_estimate_obeys_scaling_law():
    # Q_est((n-1) x) = (n-1)^2 Q_est(x) within tolerance on probes
    f = qs.Perturbed(qs.QuadraticForm([[1.0]]), qs.Sine(), 0.1)
    n = 3
    probes = tuple(np.array([v]) for v in (0.4, 1.0, 2.5))
    cfg = qs.StabilityConfig(n=n, norm_spec=qs.euclidean(1), probes=probes,
                             m_max=40, tol=1e-10)
    rep = qs.stabilize(f, qs.constant(1.2), cfg)
    m_star = max(p.iterations for p in rep.probes)
    for x in probes:
        qx = qs.hyers_iterate(f, n, m_star, x)
        qlx = qs.hyers_iterate(f, n, m_star, (n - 1) * x)
        assert abs(qlx - (n - 1) ** 2 * qx) <= 1e-8 * (1.0 + abs(qlx))


def test_stabilize_flags_nonconvergence():
    f = qs.Perturbed(qs.QuadraticForm([[1.0]]), qs.Sine(), 0.1)
    cfg = qs.StabilityConfig(n=3, norm_spec=qs.euclidean(1),
                             probes=(np.array([1.0]),), m_max=2, tol=1e-15)
    rep = qs.stabilize(f, qs.constant(1.2), cfg)
    assert not rep.passed
    assert not rep.probes[0].converged
    assert rep.probes[0].status == "fail"


def test_stabilize_warns_on_inconsistent_control():
    f = qs.Perturbed(qs.QuadraticForm([[1.0]]), qs.Sine(), 1.0)
    cfg = qs.StabilityConfig(n=3, norm_spec=qs.euclidean(1),
                             probes=(np.array([1.0]),), m_max=30, tol=1e-9)
    with pytest.warns(RuntimeWarning, match="does not dominate"):
        qs.stabilize(f, qs.constant(1e-6), cfg)


def test_stabilize_rejects_divergent_series():
    f = qs.QuadraticForm([[1.0]])
    cfg = qs.StabilityConfig(n=3, norm_spec=qs.euclidean(1),
                             probes=(np.array([1.0]),), m_max=10, tol=1e-9)
    with pytest.raises(qs.OpenProblemError):
        qs.stabilize(f, qs.power(1.0, 2.0), cfg, check_consistency=False)


def test_stability_config_validation():
    with pytest.raises(ValueError):
        qs.StabilityConfig(n=2, norm_spec=qs.euclidean(1))
    with pytest.raises(ValueError):
        qs.StabilityConfig(n=3, norm_spec=qs.euclidean(1), m_max=0)
    with pytest.raises(ValueError):
        qs.StabilityConfig(n=3, norm_spec=qs.euclidean(1), tol=0.0)
    with pytest.raises(ValueError):
        qs.StabilityConfig(n=3, norm_spec=qs.euclidean(1), direction="sideways")
    with pytest.raises(ValueError):
        qs.StabilityConfig(n=3, norm_spec=qs.euclidean(1), bound_mode="r")


def test_codomain_norm_shapes():
    spec = qs.lp_quasi(0.5, 2)
    assert qs.codomain_norm(spec, np.array([1.0, 1.0])) == pytest.approx(4.0)
    assert qs.codomain_norm(qs.euclidean(1), 3.0) == pytest.approx(3.0)
    assert qs.codomain_norm(qs.euclidean(1), np.eye(2)) == pytest.approx(np.sqrt(2.0))
    with pytest.raises(ValueError):
        qs.codomain_norm(qs.euclidean(1), np.zeros((2, 2, 2, 2)))


def test_remark_equality_grid():
    # K = 1 quasi-norm numbers equal p = 1 numbers, closed form and series
    for n in (3, 4, 5):
        for r in (0.5, 1.0, 1.5, 2.5, 3.0, 4.0):
            direction = "forward" if r < 2.0 else "backward"
            for norm_x in (0.5, 1.0, 2.0):
                ck = qs.closed_form_bounds(n, "power", direction, norm_x=norm_x,
                                           K=1.0, epsilon=1.0, r=r)
                cp = qs.closed_form_bounds(n, "power", direction, norm_x=norm_x,
                                           p=1.0, epsilon=1.0, r=r)
                assert abs(ck - cp) <= 1e-12 * abs(ck)
                phi = qs.power(1.0, r)
                x = np.array([norm_x])
                if direction == "forward":
                    sk = qs.series_bound_forward(phi, n, 1.0, x, 1e-15)
                    sp = qs.series_bound_forward_p(phi, n, 1.0, x, 1e-15)
                else:
                    sk = qs.series_bound_backward(phi, n, 1.0, x, 1e-15)
                    sp = qs.series_bound_backward_p(phi, n, 1.0, x, 1e-15)
                assert abs(sk - sp) <= 1e-12 * abs(sk)
    # the constant-budget closed forms agree as well
    assert qs.closed_form_bounds(3, "constant", "forward", K=1.0, theta=1.0) == pytest.approx(
        qs.closed_form_bounds(3, "constant", "forward", p=1.0, theta=1.0), rel=1e-12)


def test_truncated_vs_closed_within_series_tol():
    # |closed - truncated| <= 10 * series_tol across a parameter grid
    for tol in (1e-8, 1e-10, 1e-12):
        for n in (3, 4):
            for r in (0.5, 1.0, 1.5):
                for norm_x in (0.5, 1.0, 3.0):
                    phi = qs.power(1.0, r)
                    x = np.array([norm_x])
                    truncated = qs.series_bound_forward(phi, n, 1.0, x, tol)
                    closed = qs.closed_form_bounds(n, "power", "forward", norm_x=norm_x,
                                                   K=1.0, epsilon=1.0, r=r)
                    assert abs(closed - truncated) <= 10.0 * tol


def test_fit_power_amplitude():
    f = qs.Perturbed(qs.QuadraticForm([[1.0]]), qs.OddGrowth(), 0.05)
    eps = qs.fit_power_amplitude(f, 3, 1.0, trials=300, seed=0)
    assert eps > 0.0
    # the bump satisfies |b(t)| <= |t|, so the residual is at most
    # 0.05 * (3 * sum_pairs |xi - xj| + sum_i (|s| + n|xi|)) <= 0.05 * 12 * sum |xi|
    assert eps <= 0.05 * 12.0 + 1e-9


def test_fit_constant_level():
    f = qs.Perturbed(qs.QuadraticForm([[1.0]]), qs.Sine(), 0.1)
    theta = qs.fit_constant_level(f, 3, trials=300, seed=0)
    assert 0.0 < theta <= 1.2 + 1e-9


def test_verify_unitary_covariance_exact():
    f = qs.MatrixSquare(2)
    rng = np.random.default_rng(3)
    probes = tuple(qs.random_point(rng, d=1, k=2, box=3.0) for _ in range(3))
    cfg = qs.StabilityConfig(n=3, norm_spec=qs.euclidean(1), probes=probes,
                             m_max=12, tol=1e-10)
    rep = qs.verify_unitary_covariance(f, 3, cfg, phi=qs.constant(1e-6),
                                       unitary_count=40, seed=0, tol=1e-10)
    assert rep.passed
    assert rep.max_relative_deviation <= 1e-10


def test_verify_unitary_covariance_scalar_hat_case():
    # k = 1: the stabilized limit scales by |u|^2 under unit scalars
    f = qs.Perturbed(
        qs.QuadraticForm([[1.0]], complex_scalars=True),
        qs.Custom(lambda x: float(np.sin(x[0].real)), qs.Domain(1, complex_scalars=True)),
        0.05,
    )
    rng = np.random.default_rng(4)
    probes = tuple(rng.uniform(-3, 3, 1) + 1j * rng.uniform(-3, 3, 1) for _ in range(3))
    cfg = qs.StabilityConfig(n=3, norm_spec=qs.euclidean(1), probes=probes,
                             m_max=25, tol=1e-10)
    rep = qs.verify_unitary_covariance(f, 3, cfg, unitary_count=50, seed=1, tol=1e-6)
    assert rep.passed
