"""Finite-dimensional Sylvester equation A1 S - S A2 = Q.

Two independent solution routes are provided: a dense Kronecker
vectorization solve and a resolvent contour quadrature

    S = (1/2 pi i) oint (A1 - z)^-1 Q (A2 - z)^-1 dz

over a circle enclosing the spectrum of A1 and excluding that of A2.
Cross-checking the two certifies a solution independently of either
method's failure modes.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ContourError,
    DimensionError,
    IllConditionedSeparationWarning,
    NumericalError,
    SpectrumSeparationError,
)
from .matops import as_matrix, as_square, eig, solve_linear

__all__ = [
    "SylvesterProblem",
    "Contour",
    "default_contour",
    "solve_direct",
    "solve_contour",
    "residual",
    "spectrum_gap",
]

GAP_MIN = 1e-8      # below this the equation is treated as unsolvable
GAP_WARN = 1e-6     # below this a conditioning warning is attached
_NODE_CAP = 4096
_CONVERGED = 1e-10


def spectrum_gap(a1, a2):
    """Smallest distance between the spectra of two square matrices."""
    w1 = eig(a1)
    w2 = eig(a2)
    return float(np.min(np.abs(w1[:, None] - w2[None, :])))


@dataclass
class SylvesterProblem:
    """Data (A1, A2, Q) for A1 S - S A2 = Q with separated spectra."""

    a1: np.ndarray
    a2: np.ndarray
    q: np.ndarray
    gap: float = field(init=False)

    def __post_init__(self):
        self.a1 = as_square(self.a1, "a1")
        self.a2 = as_square(self.a2, "a2")
        self.q = as_matrix(self.q, "q")
        n, m = self.a1.shape[0], self.a2.shape[0]
        if self.q.shape != (n, m):
            raise DimensionError(f"q has shape {self.q.shape}, expected {(n, m)}")
        self.gap = spectrum_gap(self.a1, self.a2)
        if self.gap < GAP_MIN:
            raise SpectrumSeparationError(
                f"spectra of a1 and a2 are separated by only {self.gap:.3e} "
                f"(< {GAP_MIN:.0e}); no unique solution"
            )


@dataclass
class Contour:
    """Circle center/radius plus a starting node count (>= 8)."""

    center: complex
    radius: float
    nodes: int = 64

    def __post_init__(self):
        self.center = complex(self.center)
        self.radius = float(self.radius)
        self.nodes = int(self.nodes)
        if not (self.radius > 0):
            raise ContourError(f"radius must be positive, got {self.radius}")
        if self.nodes < 8:
            raise ContourError(f"need at least 8 nodes, got {self.nodes}")


def default_contour(p):
    """Circle centered at the mean of sigma(a1), radius 1.5x the spectral
    spread (floored at 1.0 for near-coincident spectra)."""
    w1 = eig(p.a1)
    center = complex(np.mean(w1))
    spread = float(np.max(np.abs(w1 - center))) if w1.size else 0.0
    return Contour(center=center, radius=max(1.5 * spread, 1.0))


def _validate_contour(p, c):
    w1 = eig(p.a1)
    w2 = eig(p.a2)
    margin = 1e-6
    d1 = np.abs(w1 - c.center)
    d2 = np.abs(w2 - c.center)
    if np.any(d1 > c.radius - margin):
        raise ContourError(
            f"contour (center {c.center:g}, radius {c.radius:g}) does not "
            f"enclose sigma(a1): eigenvalue at distance {np.max(d1):.6g}"
        )
    if np.any(d2 < c.radius + margin):
        raise ContourError(
            f"contour (center {c.center:g}, radius {c.radius:g}) does not "
            f"exclude sigma(a2): eigenvalue at distance {np.min(d2):.6g}"
        )


def solve_direct(p):
    """Dense Kronecker solve of (I (x) A1 - A2^T (x) I) vec(S) = vec(Q).

    Problem sizes here are tiny, so the n*m x n*m dense solve is the
    simplest reliable route.
    """
    if p.gap < GAP_WARN:
        warnings.warn(
            f"spectrum gap {p.gap:.3e} below {GAP_WARN:.0e}; solution may be "
            "ill-conditioned",
            IllConditionedSeparationWarning,
            stacklevel=2,
        )
    n, m = p.a1.shape[0], p.a2.shape[0]
    k = np.kron(np.eye(m), p.a1) - np.kron(p.a2.T, np.eye(n))
    vec_s = solve_linear(k, p.q.reshape(-1, order="F"))
    s = vec_s.reshape((n, m), order="F")
    scale = (np.linalg.norm(p.a1) + np.linalg.norm(p.a2)) * max(
        np.linalg.norm(s), 1e-300
    )
    if residual(p, s) > 1e-9 * scale:
        raise NumericalError(
            f"direct solve residual {residual(p, s):.3e} exceeds 1e-9 scaled"
        )
    return s


def solve_contour(p, c=None):
    """Trapezoidal resolvent quadrature over a validated circle.

    The node count doubles (starting from ``c.nodes``, capped at 4096)
    until two successive quadratures differ by less than 1e-10 in
    Frobenius norm.
    """
    if c is None:
        c = default_contour(p)
    _validate_contour(p, c)
    n, m = p.a1.shape[0], p.a2.shape[0]
    eye_n = np.eye(n)
    eye_m = np.eye(m)

    def quadrature(nodes):
        theta = 2.0 * np.pi * np.arange(nodes) / nodes
        z = c.center + c.radius * np.exp(1j * theta)
        acc = np.zeros((n, m), dtype=complex)
        for zj, tj in zip(z, np.exp(1j * theta)):
            x = np.linalg.solve(p.a1 - zj * eye_n, p.q.astype(complex))
            y = np.linalg.solve((p.a2 - zj * eye_m).T, x.T).T
            acc += y * (c.radius * tj)
        return acc / nodes

    prev = quadrature(c.nodes)
    nodes = c.nodes
    while nodes <= _NODE_CAP:
        nodes *= 2
        cur = quadrature(nodes)
        if np.linalg.norm(cur - prev) < _CONVERGED:
            return np.real(cur)
        prev = cur
    raise NumericalError(
        f"contour quadrature did not converge below {_CONVERGED:.0e} "
        f"within {_NODE_CAP} nodes"
    )


def residual(p, s):
    """Frobenius norm of A1 S - S A2 - Q."""
    s = as_matrix(s, "s")
    return float(np.linalg.norm(p.a1 @ s - s @ p.a2 - p.q))
