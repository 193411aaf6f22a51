"""Exact results for the nearest-neighbour model on the square lattice at zero field.

Free energies are reported as ``lim log(Z) / |sites|`` (the quantity written
``beta f`` throughout).  The transfer matrix acts on rows of a width-``W``
ring; it is applied matrix-free, so widths up to 12 stay cheap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError


def critical_beta_2d() -> float:
    return 0.5 * math.log1p(math.sqrt(2.0))


BETA_C = critical_beta_2d()


def onsager_free_energy(beta: float, resolution: int = 256) -> float:
    """Onsager's double integral by the midpoint rule on a ``resolution``-square grid.

    The integrand is ``log(cosh(2b)^2 - sinh(2b)(cos t1 + cos t2))``; it has a
    logarithmic singularity at ``t1 = t2 = 0`` when ``b`` is critical.
    """
    if beta < 0:
        raise DomainError("beta must be >= 0")
    if resolution < 16:
        raise DomainError("resolution must be at least 16")
    if abs(beta - BETA_C) < 1e-6:
        raise DomainError("beta is within 1e-6 of the critical point; the integrand is singular")
    theta = (np.arange(resolution) + 0.5) * (2 * np.pi / resolution)
    c = np.cos(theta)
    ch, sh = math.cosh(2 * beta), math.sinh(2 * beta)
    integrand = np.log(ch * ch - sh * (c[:, None] + c[None, :]))
    return math.log(2.0) + 0.5 * float(integrand.mean())


def onsager_magnetization(beta: float) -> float:
    """Spontaneous magnetization ``(1 - sinh(2b)^-4)^(1/8)`` above ``beta_c``, else 0."""
    if beta <= BETA_C:
        return 0.0
    return max(0.0, 1.0 - math.sinh(2 * beta) ** -4) ** 0.125


# --- transfer matrices ------------------------------------------------------------


@dataclass(frozen=True)
class StripSpec:
    width: int
    beta: float

    def __post_init__(self):
        if not 1 <= self.width <= 12:
            raise DomainError("strip width must be between 1 and 12")
        if self.beta < 0:
            raise DomainError("beta must be >= 0")


def _row_spins(width: int) -> np.ndarray:
    """Spins of every row state; bit ``i`` of the state set means ``sigma_i = -1``."""
    states = np.arange(1 << width)
    return 1 - 2 * ((states[:, None] >> np.arange(width)) & 1)


def _half_row_factor(spec: StripSpec) -> np.ndarray:
    s = _row_spins(spec.width)
    ring = (s * np.roll(s, -1, axis=1)).sum(axis=1)
    return np.exp(0.5 * spec.beta * ring)


def _apply_vertical(spec: StripSpec, v: np.ndarray) -> np.ndarray:
    """Multiply by the product over columns of ``[[e^b, e^-b], [e^-b, e^b]]``."""
    W = spec.width
    eb, emb = math.exp(spec.beta), math.exp(-spec.beta)
    t = v.reshape((2,) * W)
    for axis in range(W):
        t = np.moveaxis(t, axis, 0)
        t = np.stack((eb * t[0] + emb * t[1], emb * t[0] + eb * t[1]))
        t = np.moveaxis(t, 0, axis)
    return t.reshape(-1)


def transfer_apply(spec: StripSpec, v: np.ndarray) -> np.ndarray:
    """Symmetric row-to-row transfer matrix: half the ring bonds on each side."""
    d = _half_row_factor(spec)
    return d * _apply_vertical(spec, d * v)


def transfer_matrix(spec: StripSpec) -> np.ndarray:
    """Dense transfer matrix (for checks on small widths)."""
    n = 1 << spec.width
    return np.column_stack([transfer_apply(spec, e) for e in np.eye(n)])


def leading_eigenpair(spec: StripSpec, tol: float = 1e-15, max_iter: int = 100_000) -> tuple[float, np.ndarray]:
    """Power iteration; the matrix is entrywise positive so the top eigenvalue is simple."""
    v = np.ones(1 << spec.width)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = transfer_apply(spec, v)
        new = float(np.dot(v, w))
        w /= np.linalg.norm(w)
        if abs(new - lam) <= tol * abs(new) and np.linalg.norm(w - v) < 1e-12:
            return new, w
        v, lam = w, new
    raise ConvergenceError(f"power iteration did not converge for {spec}")


def strip_free_energy(spec: StripSpec) -> float:
    """``log(largest eigenvalue) / W`` for the infinitely long ring of circumference ``W``."""
    lam, _ = leading_eigenpair(spec)
    return math.log(lam) / spec.width


def torus_log_partition(width: int, length: int, beta: float) -> float:
    """``log Tr T^L`` for the ``width x length`` torus, by dense diagonalisation."""
    spec = StripSpec(width, beta)
    eig = np.linalg.eigvalsh(transfer_matrix(spec))
    top = eig.max()
    return length * math.log(top) + math.log(float(np.sum((eig / top) ** length)))


def torus_correlation(width: int, length: int, beta: float, a: tuple[int, int], b: tuple[int, int]) -> float:
    """``<sigma_a sigma_b>`` on the ``width x length`` torus; sites are ``(row, column)``."""
    spec = StripSpec(width, beta)
    vals, vecs = np.linalg.eigh(transfer_matrix(spec))
    s = _row_spins(width)
    (ra, ca), (rb, cb) = a, b
    gap = (rb - ra) % length
    scaled = vals / vals.max()
    da = vecs.T @ (s[:, ca, None] * vecs)
    db = vecs.T @ (s[:, cb, None] * vecs)
    if gap == 0:
        diag = vecs.T @ ((s[:, ca] * s[:, cb])[:, None] * vecs)
        num = float(np.sum(np.diag(diag) * scaled ** length))
    else:
        # Tr(D_a T^gap D_b T^(L-gap)) in the eigenbasis of T
        num = float(np.einsum("ij,j,ji,i->", da, scaled ** gap, db, scaled ** (length - gap)))
    return num / float(np.sum(scaled ** length))
