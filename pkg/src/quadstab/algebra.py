"""Quasi-normed coordinate spaces and a small matrix *-algebra model.

A quasi-norm relaxes the triangle inequality to
``norm(x + y) <= K * (norm(x) + norm(y))`` for some constant ``K >= 1``,
the modulus of concavity.  The scalars acting on module points are drawn
from M_k(C) with small k; k = 1 recovers the complex numbers.  A module
point is a length-d vector whose coordinates are either scalars or
k x k matrices, and matrix coordinates enter every norm through their
Frobenius norm before the scalar aggregation.

All values are immutable after construction and every operation here is
pure given its inputs, so concurrent evaluation needs no coordination.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ATOL = 1e-10
UNITARY_TOL = 1e-10

_KINDS = ("lp_quasi", "euclidean", "l1", "weighted")


@dataclass(frozen=True)
class QuasiNormSpec:
    """A norm family together with its exponent p and concavity modulus K.

    For ``lp_quasi`` the modulus is forced to K = 2^(1/p - 1); the other
    kinds are genuine norms with K = 1.
    """

    kind: str
    dim: int
    p: float = 1.0
    K: float = 1.0
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown norm kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.kind == "lp_quasi":
            if not 0.0 < self.p <= 1.0:
                raise ValueError("lp_quasi requires 0 < p <= 1")
            expected = 2.0 ** (1.0 / self.p - 1.0)
            if abs(self.K - expected) > 1e-9 * expected:
                raise ValueError("lp_quasi requires K = 2^(1/p - 1)")
        elif self.K < 1.0:
            raise ValueError("K must be >= 1")
        if self.kind == "weighted":
            if self.weights is None or len(self.weights) != self.dim:
                raise ValueError("weighted norm needs one positive weight per coordinate")
            if any(w <= 0.0 for w in self.weights):
                raise ValueError("weights must be positive")

    def norm(self, x) -> float:
        return norm_eval(self, x)


def euclidean(dim: int) -> QuasiNormSpec:
    return QuasiNormSpec("euclidean", dim)


def l1(dim: int) -> QuasiNormSpec:
    return QuasiNormSpec("l1", dim)


def lp_quasi(p: float, dim: int) -> QuasiNormSpec:
    p = float(p)
    return QuasiNormSpec("lp_quasi", dim, p=p, K=2.0 ** (1.0 / p - 1.0))


def weighted(weights) -> QuasiNormSpec:
    ws = tuple(float(w) for w in weights)
    return QuasiNormSpec("weighted", len(ws), weights=ws)


def module_point(coords) -> np.ndarray:
    """Normalize input into a module point: shape (d,) or (d, k, k)."""
    x = np.asarray(coords)
    if x.ndim == 0:
        x = x.reshape(1)
    if x.ndim == 2 and x.shape[0] == x.shape[1]:
        # single matrix coordinate
        x = x[np.newaxis]
    if x.ndim not in (1, 3):
        raise ValueError("module points are 1-d scalar vectors or 3-d stacks of square matrices")
    if x.ndim == 3 and x.shape[1] != x.shape[2]:
        raise ValueError("matrix coordinates must be square")
    if not np.all(np.isfinite(x if not np.iscomplexobj(x) else x.view(float))):
        raise ValueError("module point entries must be finite")
    return x


def coordinate_magnitudes(x) -> np.ndarray:
    """Per-coordinate magnitude: |.| for scalars, Frobenius norm for matrices."""
    x = np.asarray(x)
    if x.ndim == 0:
        x = x.reshape(1)
    if x.ndim == 1:
        return np.abs(x)
    if x.ndim == 3:
        return np.sqrt((np.abs(x) ** 2).sum(axis=(1, 2)))
    raise ValueError("module points are 1-d (scalars) or 3-d (matrix coordinates)")


def norm_eval(spec: QuasiNormSpec, x) -> float:
    """Evaluate the quasi-norm of a module point under `spec`.

    The point must have exactly `spec.dim` coordinates; matrix coordinates
    contribute their Frobenius norm before aggregation.
    """
    mags = coordinate_magnitudes(x)
    if mags.shape[0] != spec.dim:
        raise ValueError(
            f"dimension mismatch: spec.dim={spec.dim}, point has {mags.shape[0]} coordinates"
        )
    if spec.kind == "euclidean":
        return float(np.sqrt((mags**2).sum()))
    if spec.kind == "l1":
        return float(mags.sum())
    if spec.kind == "weighted":
        w = np.asarray(spec.weights)
        return float(np.sqrt((w * mags**2).sum()))
    # lp_quasi
    return float((mags**spec.p).sum() ** (1.0 / spec.p))


def concavity_modulus_estimate(spec: QuasiNormSpec, sampler=None, trials: int = 200, seed: int = 0) -> float:
    """Estimate the smallest workable K as sup ||x+y|| / (||x|| + ||y||) over sampled pairs."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    if sampler is None:
        def sampler(r):
            return (r.uniform(-10.0, 10.0, spec.dim), r.uniform(-10.0, 10.0, spec.dim))
    best = 0.0
    for _ in range(trials):
        x, y = sampler(rng)
        x = np.asarray(x)
        y = np.asarray(y)
        denom = norm_eval(spec, x) + norm_eval(spec, y)
        if denom <= 0.0:
            continue
        best = max(best, norm_eval(spec, x + y) / denom)
    return best


def _haar_unitary(rng: np.random.Generator, k: int) -> np.ndarray:
    """Haar-distributed k x k unitary: QR of a complex Ginibre matrix, phases fixed."""
    z = (rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    safe = np.where(np.abs(d) > 0, d, 1.0)
    return q * (safe / np.abs(safe))


def sample_unitary(k: int, seed: int = 0) -> np.ndarray:
    """Deterministic Haar-random unitary in M_k(C) for the given seed."""
    if k < 1:
        raise ValueError("k must be >= 1")
    rng = np.random.default_rng(seed)
    return _haar_unitary(rng, k)


def is_unitary(u, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u, dtype=complex)
    if u.ndim == 0:
        return abs(abs(complex(u)) - 1.0) <= tol
    ident = np.eye(u.shape[0])
    return float(np.linalg.norm(u @ u.conj().T - ident)) <= tol


def hat(a, mode: str = "avg"):
    """Self-adjoint companion of an algebra element: aa*, a*a, or their mean."""
    a = np.asarray(a, dtype=complex)
    if a.ndim == 0:
        return float((a * np.conj(a)).real)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("algebra elements are scalars or square matrices")
    if mode == "left":
        return a @ a.conj().T
    if mode == "right":
        return a.conj().T @ a
    if mode == "avg":
        return (a @ a.conj().T + a.conj().T @ a) / 2.0
    raise ValueError(f"unknown mode {mode!r}, expected left|right|avg")


def act(u, x) -> np.ndarray:
    """Module action of an algebra element on a point, coordinatewise from the left."""
    x = np.asarray(x)
    u_arr = np.asarray(u)
    if x.ndim == 1:
        if u_arr.ndim != 0:
            raise ValueError("scalar module coordinates need a scalar algebra element")
        return u_arr * x
    if x.ndim == 3:
        if u_arr.ndim == 0:
            return u_arr * x
        if u_arr.shape != x.shape[1:]:
            raise ValueError(
                f"algebra dimension mismatch: element {u_arr.shape}, coordinates {x.shape[1:]}"
            )
        return np.einsum("ab,ibc->iac", u_arr, x)
    raise ValueError("module points are 1-d or 3-d arrays")


def conjugate_value(u, b):
    """Conjugation u b u* on a codomain value; for scalar u this is |u|^2 b."""
    b = np.asarray(b)
    u_arr = np.asarray(u)
    if u_arr.ndim == 0:
        return u_arr * b * np.conj(u_arr)
    if b.ndim != 2 or b.shape != u_arr.shape:
        raise ValueError("matrix conjugation needs a matching square codomain value")
    return u_arr @ b @ u_arr.conj().T


def random_point(rng: np.random.Generator, d: int, k: int = 1, box: float = 10.0,
                 complex_coords: bool | None = None) -> np.ndarray:
    """Uniform module point with coordinates in [-box, box] (per real component)."""
    if complex_coords is None:
        complex_coords = k > 1
    shape = (d,) if k == 1 else (d, k, k)
    x = rng.uniform(-box, box, shape)
    if complex_coords:
        x = x + 1j * rng.uniform(-box, box, shape)
    return x
