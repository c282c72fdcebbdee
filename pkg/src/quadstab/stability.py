"""Constructive stability machinery for the n-point quadratic equation.

Given a mapping f whose twisted residual is dominated by a control
function, the direct method manufactures the nearby exact solution as the
limit of rescaled dilated iterates, with an a-priori error bound assembled
from the control function.  This module provides the control-function
derived quantities, the truncated-series and closed-form bounds for the
quasi-norm (modulus K) and p-norm settings, the forward/backward iteration
schemes, and the experiment driver that checks empirical deviations against
the guaranteed bounds.

Conventions:
  forward scheme    iterate_m(x) = g((n-1)^m x) / (n-1)^{2m},
                    g = f + (n-1) f(0) / 2; deviations are reported against g
  backward scheme   iterate_m(x) = (n-1)^{2m} f(x / (n-1)^m); needs f(0) = 0
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .algebra import QuasiNormSpec, coordinate_magnitudes, norm_eval
from .mappings import Mapping, approximate_remainder, draw_unitary

MAX_SERIES_TERMS = 100_000
SCALE_GUARD = 1e100


class DivergenceError(ValueError):
    """The requested bound's series does not converge for these parameters."""

    def __init__(self, message: str, diagnosis: str | None = None):
        super().__init__(message if diagnosis is None else f"{message} ({diagnosis})")
        self.diagnosis = diagnosis


class OpenProblemError(DivergenceError):
    """Parameters in the dead zone where no scheme is guaranteed to work."""

    tag = "open-problem region"

    def __init__(self, message: str, diagnosis: str | None = None):
        super().__init__(f"{self.tag}: {message}", diagnosis=diagnosis)


def point_norm(x) -> float:
    """Default domain norm: Euclidean aggregate of coordinate magnitudes."""
    return float(np.sqrt((coordinate_magnitudes(x) ** 2).sum()))


@dataclass(frozen=True)
class ControlFunction:
    """Perturbation budget phi on n-tuples of domain points.

    power    phi(xs) = epsilon * sum_i ||x_i||^r
    constant phi(xs) = theta
    custom   phi(xs) = fn(xs)   (tests and ad-hoc experiments)
    """

    variant: str
    epsilon: float = 0.0
    r: float = 1.0
    theta: float = 0.0
    fn: object = None
    norm: object = None

    def __post_init__(self):
        if self.variant not in ("power", "constant", "custom"):
            raise ValueError(f"unknown control variant {self.variant!r}")
        if self.variant == "power" and (self.epsilon < 0 or self.r <= 0):
            raise ValueError("power control needs epsilon >= 0 and r > 0")
        if self.variant == "constant" and self.theta < 0:
            raise ValueError("constant control needs theta >= 0")
        if self.variant == "custom" and not callable(self.fn):
            raise ValueError("custom control needs a callable")

    def _norm(self, x) -> float:
        return (self.norm or point_norm)(x)

    def evaluate(self, xs) -> float:
        if self.variant == "power":
            return self.epsilon * sum(self._norm(x) ** self.r for x in xs)
        if self.variant == "constant":
            return self.theta
        return float(self.fn(xs))

    __call__ = evaluate


def power(epsilon: float, r: float, norm=None) -> ControlFunction:
    return ControlFunction("power", epsilon=float(epsilon), r=float(r), norm=norm)


def constant(theta: float) -> ControlFunction:
    return ControlFunction("constant", theta=float(theta))


def custom_control(fn, norm=None) -> ControlFunction:
    return ControlFunction("custom", fn=fn, norm=norm)


# ---------------------------------------------------------------------------
# derived control quantities


def phi_component(phi: ControlFunction, n: int, i: int, x) -> float:
    """phi on the one-hot tuple with x in slot i (1-indexed).

    Slot-independent for the power and constant families (evaluated in
    closed form); the generic one-hot evaluation handles custom controls.
    """
    if not 1 <= i <= n:
        raise ValueError(f"slot index {i} out of range 1..{n}")
    if phi.variant == "power":
        return phi.epsilon * phi._norm(x) ** phi.r
    if phi.variant == "constant":
        return phi.theta
    x = np.asarray(x)
    zero = np.zeros_like(x)
    return phi.evaluate([x if j == i else zero for j in range(1, n + 1)])


def phi_tilde(phi: ControlFunction, n: int, x) -> float:
    """min over adjacent slot pairs of phi_i(x) + phi_{i+1}(x)."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if phi.variant == "power":
        return 2.0 * phi.epsilon * phi._norm(x) ** phi.r
    if phi.variant == "constant":
        return 2.0 * phi.theta
    comps = [phi_component(phi, n, i, x) for i in range(1, n + 1)]
    return min(comps[i] + comps[i + 1] for i in range(n - 1))


def cap_weights(n: int) -> list[float]:
    """The slot weights |(n^2+1)-(i+1)n| / n for i = 1..n."""
    return [abs((n * n + 1) - (i + 1) * n) / n for i in range(1, n + 1)]


def phi_cap(phi: ControlFunction, n: int, x) -> float:
    """min over slots of phi_i(-x) + |(n^2+1)-(i+1)n|/n * phi_tilde(x).

    The weight at slot i = n-1 equals 1/n, which is minimal, so symmetric
    control families reduce to phi_1(x) + (2/n) phi_1(x)-type closed forms.
    """
    if n < 3:
        raise ValueError("n must be >= 3")
    if phi.variant == "power":
        return (1.0 + 2.0 / n) * phi.epsilon * phi._norm(x) ** phi.r
    if phi.variant == "constant":
        return (1.0 + 2.0 / n) * phi.theta
    x = np.asarray(x)
    tilde = phi_tilde(phi, n, x)
    weights = cap_weights(n)
    return min(
        phi_component(phi, n, i, -x) + weights[i - 1] * tilde
        for i in range(1, n + 1)
    )


def phi_cap_enumerated(phi: ControlFunction, n: int, x) -> float:
    """phi_cap by literal slot enumeration, ignoring closed-form shortcuts."""
    if n < 3:
        raise ValueError("n must be >= 3")
    x = np.asarray(x)
    zero = np.zeros_like(x)

    def component(i, pt):
        return phi.evaluate([pt if j == i else zero for j in range(1, n + 1)])

    comps = [component(i, x) for i in range(1, n + 1)]
    tilde = min(comps[i] + comps[i + 1] for i in range(n - 1))
    weights = cap_weights(n)
    return min(component(i, -x) + weights[i - 1] * tilde for i in range(1, n + 1))


# ---------------------------------------------------------------------------
# convergence regimes


def power_regime(n: int, K: float, r: float) -> str:
    """Which scheme converges for a power budget: forward, backward, or dead_zone."""
    lam = n - 1.0
    if K * lam ** (r - 2.0) < 1.0:
        return "forward"
    if K * lam ** (2.0 - r) < 1.0:
        return "backward"
    return "dead_zone"


def _require_regime(requested: str, actual: str, detail: str):
    if actual == requested:
        return
    if actual == "dead_zone":
        raise OpenProblemError(f"no convergent scheme: {detail}")
    raise DivergenceError(
        f"the {requested} series diverges for these parameters", diagnosis=f"use the {actual} scheme; {detail}"
    )


# ---------------------------------------------------------------------------
# series bounds (quasi-norm, modulus K)


def _truncate_geometric(first_term: float, ratio: float, series_tol: float, transform) -> float:
    """Truncated geometric sum, stopped when the transformed tail is below series_tol.

    `transform` maps the partial sum to the reported bound, so the stop rule
    controls the error of the bound itself (matters for the 1/p-th root).
    """
    total = 0.0
    term = first_term
    for _ in range(MAX_SERIES_TERMS):
        total += term
        term *= ratio
        tail = term / (1.0 - ratio)
        if transform(total + tail) - transform(total) < series_tol:
            return transform(total)
    raise DivergenceError("series truncation cap reached", diagnosis=f"ratio={ratio}")


def _truncate_monitored(term_at, series_tol: float, transform) -> float:
    """Sum term_at(i) for i = 0, 1, ... with empirical ratio monitoring."""
    total = 0.0
    prev = None
    for i in range(MAX_SERIES_TERMS):
        term = term_at(i)
        total += term
        if prev is not None and prev > 0.0:
            ratio = term / prev
            if ratio >= 1.0 and i > 4 and transform(total + term) - transform(total) > series_tol:
                raise DivergenceError(
                    "series terms stopped decreasing", diagnosis=f"term[{i}]={term:.3e}"
                )
            if ratio < 1.0:
                tail = term * ratio / (1.0 - ratio)
                if transform(total + tail) - transform(total) < series_tol:
                    return transform(total)
        elif term == 0.0:
            return transform(total)
        prev = term
    raise DivergenceError("series truncation cap reached", diagnosis="slow convergence")


def series_bound_forward(phi: ControlFunction, n: int, K: float, x,
                         series_tol: float = 1e-12) -> float:
    """K/(n-1)^2 * sum_{i>=0} K^i Phi((n-1)^i x) / (n-1)^{2i}, truncated."""
    if n < 3 or K < 1.0 or series_tol <= 0:
        raise ValueError("need n >= 3, K >= 1, series_tol > 0")
    lam = float(n - 1)
    x = np.asarray(x)
    pref = K / lam**2
    linear = lambda s: pref * s
    cap0 = phi_cap(phi, n, x)
    if phi.variant == "power":
        _require_regime("forward", power_regime(n, K, phi.r),
                        f"K*(n-1)^(r-2) = {K * lam ** (phi.r - 2.0)}")
        if cap0 == 0.0:
            return 0.0
        return _truncate_geometric(cap0, K * lam ** (phi.r - 2.0), series_tol, linear)
    if phi.variant == "constant":
        if K >= lam**2:
            raise OpenProblemError(f"constant budget needs K < (n-1)^2, got K={K}")
        return _truncate_geometric(cap0, K / lam**2, series_tol, linear)

    def term_at(i):
        scale = lam**i
        if scale > SCALE_GUARD:
            raise DivergenceError("argument scale overflow before convergence")
        return K**i * phi_cap(phi, n, x * scale) / lam ** (2 * i)

    return _truncate_monitored(term_at, series_tol, linear)


def series_bound_backward(phi: ControlFunction, n: int, K: float, x,
                          series_tol: float = 1e-12) -> float:
    """1/(n-1)^2 * sum_{i>=1} K^i (n-1)^{2i} Phi(x / (n-1)^i), truncated."""
    if n < 3 or K < 1.0 or series_tol <= 0:
        raise ValueError("need n >= 3, K >= 1, series_tol > 0")
    lam = float(n - 1)
    x = np.asarray(x)
    pref = 1.0 / lam**2
    linear = lambda s: pref * s
    if phi.variant == "power":
        _require_regime("backward", power_regime(n, K, phi.r),
                        f"K*(n-1)^(2-r) = {K * lam ** (2.0 - phi.r)}")
        first = K * lam**2 * phi_cap(phi, n, x / lam)
        if first == 0.0:
            return 0.0
        return _truncate_geometric(first, K * lam ** (2.0 - phi.r), series_tol, linear)
    if phi.variant == "constant":
        raise DivergenceError(
            "no backward scheme for a constant budget",
            diagnosis=f"series ratio K*(n-1)^2 = {K * lam**2} >= 1",
        )

    def term_at(i):
        scale = lam ** (i + 1)
        return K ** (i + 1) * scale**2 * phi_cap(phi, n, x / scale)

    return _truncate_monitored(term_at, series_tol, linear)


# ---------------------------------------------------------------------------
# series bounds (p-norm)


def _check_p(p: float):
    if not 0.0 < p <= 1.0:
        raise ValueError("need 0 < p <= 1")


def series_bound_forward_p(phi: ControlFunction, n: int, p: float, x,
                           series_tol: float = 1e-12) -> float:
    """1/(n-1)^2 * [ sum_{i>=0} Phi((n-1)^i x)^p / (n-1)^{2ip} ]^{1/p}, truncated."""
    if n < 3 or series_tol <= 0:
        raise ValueError("need n >= 3 and series_tol > 0")
    _check_p(p)
    lam = float(n - 1)
    x = np.asarray(x)
    pref = 1.0 / lam**2
    root = lambda s: pref * s ** (1.0 / p)
    cap0 = phi_cap(phi, n, x)
    if phi.variant == "power":
        if phi.r == 2.0:
            raise OpenProblemError("power budget with r = 2 admits no scheme")
        if phi.r > 2.0:
            raise DivergenceError("forward p-series diverges for r > 2",
                                  diagnosis="use the backward scheme")
        sigma = lam ** ((phi.r - 2.0) * p)
    elif phi.variant == "constant":
        sigma = lam ** (-2.0 * p)
    else:
        def term_at(i):
            scale = lam**i
            if scale > SCALE_GUARD:
                raise DivergenceError("argument scale overflow before convergence")
            return (phi_cap(phi, n, x * scale) / lam ** (2 * i)) ** p

        return _truncate_monitored(term_at, series_tol, root)
    if cap0 == 0.0:
        return 0.0
    return _truncate_geometric(cap0**p, sigma, series_tol, root)


def series_bound_backward_p(phi: ControlFunction, n: int, p: float, x,
                            series_tol: float = 1e-12) -> float:
    """1/(n-1)^2 * [ sum_{i>=1} (n-1)^{2ip} Phi(x / (n-1)^i)^p ]^{1/p}, truncated."""
    if n < 3 or series_tol <= 0:
        raise ValueError("need n >= 3 and series_tol > 0")
    _check_p(p)
    lam = float(n - 1)
    x = np.asarray(x)
    pref = 1.0 / lam**2
    root = lambda s: pref * s ** (1.0 / p)
    if phi.variant == "power":
        if phi.r == 2.0:
            raise OpenProblemError("power budget with r = 2 admits no scheme")
        if phi.r < 2.0:
            raise DivergenceError("backward p-series diverges for r < 2",
                                  diagnosis="use the forward scheme")
        sigma = lam ** ((2.0 - phi.r) * p)
        first = (lam**2 * phi_cap(phi, n, x / lam)) ** p
        if first == 0.0:
            return 0.0
        return _truncate_geometric(first, sigma, series_tol, root)
    if phi.variant == "constant":
        raise DivergenceError("no backward scheme for a constant budget",
                              diagnosis=f"series ratio (n-1)^(2p) = {lam ** (2 * p)} >= 1")

    def term_at(i):
        scale = lam ** (i + 1)
        return (scale**2 * phi_cap(phi, n, x / scale)) ** p

    return _truncate_monitored(term_at, series_tol, root)


# ---------------------------------------------------------------------------
# closed forms


def closed_form_bounds(n: int, variant: str, direction: str, norm_x: float = 1.0,
                       K: float | None = None, p: float | None = None,
                       epsilon: float | None = None, r: float | None = None,
                       theta: float | None = None) -> float:
    """Closed-form bound values for power and constant budgets.

    Pass K for the quasi-norm setting or p for the p-norm setting (exactly
    one).  Parameters in the dead zone, where no scheme converges, raise
    OpenProblemError carrying the tag "open-problem region".
    """
    if (K is None) == (p is None):
        raise ValueError("pass exactly one of K (quasi-norm) or p (p-norm)")
    if n < 3:
        raise ValueError("n must be >= 3")
    if direction not in ("forward", "backward"):
        raise ValueError("direction must be forward or backward")
    lam = float(n - 1)
    if K is not None:
        if K < 1.0:
            raise ValueError("K must be >= 1")
        if variant == "power":
            if epsilon is None or r is None:
                raise ValueError("power budget needs epsilon and r")
            regime = power_regime(n, K, r)
            _require_regime(direction, regime,
                            f"dead zone is -log_(n-1) K <= r-2 <= log_(n-1) K at K={K}, r={r}")
            if direction == "forward":
                return (n + 2) * K * epsilon * norm_x**r / (n * (lam**2 - K * lam**r))
            return (n + 2) * K * epsilon * norm_x**r / (n * (lam**r - K * lam**2))
        if variant == "constant":
            if theta is None:
                raise ValueError("constant budget needs theta")
            if direction == "backward":
                raise DivergenceError("no backward scheme for a constant budget")
            if K >= lam**2:
                raise OpenProblemError(
                    f"constant budget needs K < (n-1)^2; K={K}, (n-1)^2={lam**2}")
            return (n + 2) * K * theta / (n * (lam**2 - K))
        raise ValueError(f"unknown budget variant {variant!r}")
    _check_p(p)
    if variant == "power":
        if epsilon is None or r is None:
            raise ValueError("power budget needs epsilon and r")
        if r == 2.0:
            raise OpenProblemError("power budget with r = 2 admits no scheme")
        if direction == "forward":
            if r > 2.0:
                raise DivergenceError("forward p-series diverges for r > 2",
                                      diagnosis="use the backward scheme")
            return (n + 2) * epsilon * norm_x**r / (n * (lam ** (2 * p) - lam ** (r * p)) ** (1.0 / p))
        if r < 2.0:
            raise DivergenceError("backward p-series diverges for r < 2",
                                  diagnosis="use the forward scheme")
        return (n + 2) * epsilon * norm_x**r / (n * (lam ** (r * p) - lam ** (2 * p)) ** (1.0 / p))
    if variant == "constant":
        if theta is None:
            raise ValueError("constant budget needs theta")
        if direction == "backward":
            raise DivergenceError("no backward scheme for a constant budget")
        return (n + 2) * theta / (n * (lam ** (2 * p) - 1.0) ** (1.0 / p))
    raise ValueError(f"unknown budget variant {variant!r}")


# ---------------------------------------------------------------------------
# iterate gap bounds


def iterate_gap_bound(phi: ControlFunction, n: int, K: float, x, l: int, m: int,
                      direction: str = "forward") -> float:
    """A-priori bound on the distance between the l-th and m-th rescaled iterates.

    Forward: K^(1-l)/(n-1)^2 * sum_{i=l}^{m-2} K^i Phi((n-1)^i x)/(n-1)^{2i}
             + K^(m-1-l)/(n-1)^2 * Phi((n-1)^{m-1} x)/(n-1)^{2(m-1)}.
    """
    if not 0 <= l < m:
        raise ValueError("need 0 <= l < m")
    lam = float(n - 1)
    x = np.asarray(x)
    if direction == "forward":
        total = 0.0
        for i in range(l, m - 1):
            total += K ** (i + 1 - l) * phi_cap(phi, n, x * lam**i) / lam ** (2 * i + 2)
        total += K ** (m - 1 - l) * phi_cap(phi, n, x * lam ** (m - 1)) / lam ** (2 * m)
        return total
    if direction == "backward":
        total = 0.0
        for i in range(1, m - l):
            total += K**i * lam ** (2 * i + 2 * l - 2) * phi_cap(phi, n, x / lam ** (i + l))
        total += K ** (m - l - 1) * lam ** (2 * m - 2) * phi_cap(phi, n, x / lam**m)
        return total
    raise ValueError("direction must be forward or backward")


def _tail_bound(phi: ControlFunction, n: int, K: float, p: float | None, x, m: int,
                direction: str, bound_mode: str) -> float | None:
    """Guaranteed remaining distance to the limit after iterate m, when analytic."""
    lam = float(n - 1)
    if phi.variant not in ("power", "constant"):
        return None
    if bound_mode == "quasi":
        if direction == "forward":
            ratio = K * lam ** (phi.r - 2.0) if phi.variant == "power" else K / lam**2
            if ratio >= 1.0:
                return None
            first = K * phi_cap(phi, n, x * lam**m) / lam ** (2 * m + 2)
            return first / (1.0 - ratio)
        ratio = K * lam ** (2.0 - phi.r) if phi.variant == "power" else K * lam**2
        if ratio >= 1.0:
            return None
        first = K * lam ** (2 * m) * phi_cap(phi, n, x / lam ** (m + 1))
        return first / (1.0 - ratio)
    # p-mode tails
    if direction == "forward":
        sigma = lam ** ((phi.r - 2.0) * p) if phi.variant == "power" else lam ** (-2.0 * p)
        if sigma >= 1.0:
            return None
        first = (phi_cap(phi, n, x * lam**m) / lam ** (2 * m)) ** p
        return (first / (1.0 - sigma)) ** (1.0 / p) / lam**2
    if phi.variant != "power" or phi.r <= 2.0:
        return None
    sigma = lam ** ((2.0 - phi.r) * p)
    first = (lam ** (2 * m + 2) * phi_cap(phi, n, x / lam ** (m + 1))) ** p
    return (first / (1.0 - sigma)) ** (1.0 / p) / lam**2


# ---------------------------------------------------------------------------
# the direct-method iteration


def hyers_iterate(f: Mapping, n: int, m: int, x, direction: str = "forward"):
    """The m-th iterate of the chosen rescaling scheme at the point x."""
    if n < 3:
        raise ValueError("n must be >= 3")
    if m < 0:
        raise ValueError("m must be >= 0")
    lam = n - 1
    if float(lam) ** m > SCALE_GUARD:
        raise ValueError(f"(n-1)^m exceeds the overflow guard {SCALE_GUARD:g}")
    x = np.asarray(x)
    f0 = np.asarray(f(np.zeros_like(x)))
    if direction == "forward":
        shift = (n - 1) / 2.0 * f0
        return (np.asarray(f(x * float(lam) ** m)) + shift) / float(lam) ** (2 * m)
    if direction == "backward":
        if float(np.linalg.norm(np.atleast_1d(f0))) > 1e-9:
            raise ValueError("backward scheme requires f(0) = 0")
        return float(lam) ** (2 * m) * np.asarray(f(x / float(lam) ** m))
    raise ValueError("direction must be forward or backward")


@dataclass(frozen=True)
class StabilityConfig:
    """Settings for a stabilization experiment.

    norm_spec is the codomain quasi-norm; it supplies K (bound_mode "quasi")
    or p (bound_mode "p", with p = 1 for genuine norms).  domain_norm feeds
    the control function and probe magnitudes; default is the Euclidean
    aggregate.
    """

    n: int
    norm_spec: QuasiNormSpec
    direction: str = "forward"
    m_max: int = 40
    tol: float = 1e-9
    probes: tuple = ()
    series_tol: float = 1e-12
    bound_mode: str = "quasi"
    domain_norm: QuasiNormSpec | None = None

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("n must be >= 3")
        if self.m_max < 1:
            raise ValueError("m_max must be >= 1")
        if self.tol <= 0 or self.series_tol <= 0:
            raise ValueError("tol and series_tol must be positive")
        if self.direction not in ("forward", "backward"):
            raise ValueError("direction must be forward or backward")
        if self.bound_mode not in ("quasi", "p"):
            raise ValueError("bound_mode must be quasi or p")

    @property
    def p_exponent(self) -> float:
        return self.norm_spec.p if self.norm_spec.kind == "lp_quasi" else 1.0

    def domain_norm_fn(self):
        if self.domain_norm is None:
            return point_norm
        return lambda x: norm_eval(self.domain_norm, x)


def codomain_norm(spec: QuasiNormSpec, v) -> float:
    """Norm of a codomain value: scalars and matrices count as one coordinate."""
    v = np.asarray(v)
    if v.ndim == 0:
        point = v.reshape(1)
    elif v.ndim == 1:
        point = v
    elif v.ndim == 2:
        point = v[np.newaxis]
    else:
        raise ValueError("codomain values are scalars, vectors, or matrices")
    return norm_eval(spec, point)


@dataclass
class ProbeResult:
    probe: np.ndarray
    norm_x: float
    q_estimate: object
    trace: tuple
    iterations: int
    converged: bool
    deviation: float
    bound: float
    margin: float
    tail_bound: float | None
    status: str


@dataclass
class StabilityReport:
    config: StabilityConfig
    control: ControlFunction
    probes: list[ProbeResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(p.status == "pass" for p in self.probes)

    @property
    def worst_margin(self) -> float:
        return min((p.margin for p in self.probes), default=float("inf"))

    def failures(self) -> list[ProbeResult]:
        return [p for p in self.probes if p.status != "pass"]


def probe_bound(phi: ControlFunction, cfg: StabilityConfig, x) -> float:
    """The series bound matching the configured direction and bound mode."""
    if cfg.bound_mode == "quasi":
        K = cfg.norm_spec.K
        if cfg.direction == "forward":
            return series_bound_forward(phi, cfg.n, K, x, cfg.series_tol)
        return series_bound_backward(phi, cfg.n, K, x, cfg.series_tol)
    p = cfg.p_exponent
    if cfg.direction == "forward":
        return series_bound_forward_p(phi, cfg.n, p, x, cfg.series_tol)
    return series_bound_backward_p(phi, cfg.n, p, x, cfg.series_tol)


def _consistency_warn(f: Mapping, phi: ControlFunction, cfg: StabilityConfig, seed: int = 0):
    rng = np.random.default_rng(seed)
    for _ in range(48):
        pts = tuple(f.domain.random(rng, box=10.0) for _ in range(cfg.n))
        u = draw_unitary(rng, f.domain)
        res = codomain_norm(cfg.norm_spec, approximate_remainder(f, u, cfg.n, pts))
        budget = phi.evaluate(pts)
        if res > budget * (1.0 + 1e-9) + 1e-12:
            warnings.warn(
                f"control function does not dominate sampled residuals "
                f"({res:.6g} > {budget:.6g}); bounds may not hold",
                RuntimeWarning,
                stacklevel=3,
            )
            return


def stabilize(f: Mapping, phi: ControlFunction, cfg: StabilityConfig,
              check_consistency: bool = True) -> StabilityReport:
    """Run the direct-method iteration on every probe and audit the bound.

    Raises DivergenceError/OpenProblemError when the configured series does
    not converge.  Probes that fail to converge within m_max, or whose
    deviation exceeds bound + tol, are flagged as failures in the report
    rather than silently accepted.
    """
    if not cfg.probes:
        raise ValueError("config needs at least one probe")
    bounds = [probe_bound(phi, cfg, x) for x in cfg.probes]
    if check_consistency:
        _consistency_warn(f, phi, cfg)
    lam = cfg.n - 1
    dnorm = cfg.domain_norm_fn()
    report = StabilityReport(config=cfg, control=phi)
    K = cfg.norm_spec.K
    p = cfg.p_exponent
    for x, bound in zip(cfg.probes, bounds):
        x = np.asarray(x)
        trace = []
        converged = False
        iterations = 0
        tail = None
        prev = None
        for m in range(cfg.m_max + 1):
            if float(lam) ** m > SCALE_GUARD:
                break
            val = hyers_iterate(f, cfg.n, m, x, cfg.direction)
            trace.append(val)
            if prev is not None:
                gap = codomain_norm(cfg.norm_spec, val - prev)
                tail = _tail_bound(phi, cfg.n, K, p, x, m, cfg.direction, cfg.bound_mode)
                iterations = m
                if gap < cfg.tol and (tail is None or tail < cfg.tol):
                    converged = True
                    break
            prev = val
        q_est = trace[-1]
        deviation = codomain_norm(cfg.norm_spec, trace[0] - q_est)
        margin = bound - deviation
        status = "pass" if (converged and margin >= -cfg.tol) else "fail"
        report.probes.append(ProbeResult(
            probe=x,
            norm_x=dnorm(x),
            q_estimate=q_est,
            trace=tuple(trace),
            iterations=iterations,
            converged=converged,
            deviation=deviation,
            bound=bound,
            margin=margin,
            tail_bound=tail,
            status=status,
        ))
    return report


# ---------------------------------------------------------------------------
# control-function fitting


def fit_power_amplitude(f: Mapping, n: int, r: float, trials: int = 400, seed: int = 0,
                        box: float = 10.0, domain_norm=None, codomain=None) -> float:
    """Fit epsilon as (sup residual norm) / (sup of sum_i ||x_i||^r) over a box sample."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    dnorm = domain_norm or point_norm
    cnorm = codomain or (lambda v: float(np.linalg.norm(np.atleast_1d(np.asarray(v)))))
    sup_res = 0.0
    sup_weight = 0.0
    for _ in range(trials):
        pts = tuple(f.domain.random(rng, box=box) for _ in range(n))
        u = draw_unitary(rng, f.domain)
        sup_res = max(sup_res, cnorm(approximate_remainder(f, u, n, pts)))
        sup_weight = max(sup_weight, sum(dnorm(pt) ** r for pt in pts))
    if sup_weight == 0.0:
        raise ValueError("sample produced no usable weight")
    return sup_res / sup_weight


def fit_constant_level(f: Mapping, n: int, trials: int = 400, seed: int = 0,
                       box: float = 10.0, codomain=None) -> float:
    """Fit theta as the sampled sup of the twisted residual norm."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    cnorm = codomain or (lambda v: float(np.linalg.norm(np.atleast_1d(np.asarray(v)))))
    sup_res = 0.0
    for _ in range(trials):
        pts = tuple(f.domain.random(rng, box=box) for _ in range(n))
        u = draw_unitary(rng, f.domain)
        sup_res = max(sup_res, cnorm(approximate_remainder(f, u, n, pts)))
    return sup_res


# ---------------------------------------------------------------------------
# covariance of the stabilized limit under the unitary action


@dataclass
class CovarianceReport:
    max_relative_deviation: float
    passed: bool
    unitary_count: int
    iterations_used: int

    def __bool__(self) -> bool:
        return self.passed


def verify_unitary_covariance(f: Mapping, n: int, cfg: StabilityConfig,
                              phi: ControlFunction | None = None,
                              unitary_count: int = 100, seed: int = 0,
                              tol: float = 1e-6) -> CovarianceReport:
    """Check Q_est(u x) = u Q_est(x) u* for the stabilized limit over sampled unitaries.

    Relative to 1 + ||Q_est(x)||; for scalar algebras the conjugation
    degenerates to multiplication by |u|^2.
    """
    from .algebra import act, conjugate_value

    if phi is None:
        level = fit_constant_level(f, n, seed=seed,
                                   codomain=lambda v: codomain_norm(cfg.norm_spec, v))
        phi = constant(level * 1.05 + 1e-12)
    report = stabilize(f, phi, cfg, check_consistency=False)
    m_star = max((p.iterations for p in report.probes), default=cfg.m_max)
    m_star = max(m_star, 1)

    def q_est(x):
        return hyers_iterate(f, n, m_star, x, cfg.direction)

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(unitary_count):
        u = draw_unitary(rng, f.domain)
        for x in cfg.probes:
            base = q_est(np.asarray(x))
            dev = codomain_norm(cfg.norm_spec, q_est(act(u, np.asarray(x))) - conjugate_value(u, base))
            rel = dev / (1.0 + codomain_norm(cfg.norm_spec, base))
            worst = max(worst, rel)
    return CovarianceReport(
        max_relative_deviation=worst,
        passed=worst <= tol,
        unitary_count=unitary_count,
        iterations_used=m_star,
    )
