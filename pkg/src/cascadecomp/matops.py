"""Dense real matrix operations.

Everything here works on plain float64 ndarrays: the matrix exponential,
eigenvalue computation, linear solves with a conditioning guard, and the
two even matrix series

    cosh_sqrt(M)  = cosh(G)        for any G with G^2 = M,
    sinhc_sqrt(M) = sinh(G)/G,

which are well defined as power series in M itself, so no matrix square
root is ever formed and negative (trigonometric-branch) eigenvalues of M
are handled transparently.
"""

import numpy as np

from .errors import (
    DimensionError,
    InputError,
    NumericalError,
    SingularMatrixError,
)

__all__ = [
    "as_matrix",
    "as_square",
    "as_col",
    "as_row",
    "expm",
    "eig",
    "cosh_sqrt",
    "sinhc_sqrt",
    "solve_linear",
]

_SERIES_CAP = 64  # series terms; generous, hit only on non-finite input
_RCOND_MIN = 1e-12


def as_matrix(a, name="matrix"):
    """Coerce to a 2-D float64 array, validating finiteness.

    Scalars become 1x1. 1-D input is rejected so row/column intent stays
    explicit (see ``as_col``/``as_row``).
    """
    m = np.array(a, dtype=float)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2:
        raise DimensionError(f"{name}: expected a 2-D array, got ndim={m.ndim}")
    if not np.all(np.isfinite(m)):
        raise InputError(f"{name}: entries must be finite")
    return m


def as_square(a, name="matrix"):
    m = as_matrix(a, name)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name}: expected square, got {m.shape}")
    return m


def as_col(a, name="vector"):
    """Coerce to an n x 1 column; accepts 1-D input."""
    v = np.array(a, dtype=float)
    if v.ndim == 1:
        v = v.reshape(-1, 1)
    if v.ndim != 2 or v.shape[1] != 1:
        raise DimensionError(f"{name}: expected a column, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InputError(f"{name}: entries must be finite")
    return v


def as_row(a, name="vector"):
    """Coerce to a 1 x n row; accepts 1-D input."""
    v = np.array(a, dtype=float)
    if v.ndim == 1:
        v = v.reshape(1, -1)
    if v.ndim != 2 or v.shape[0] != 1:
        raise DimensionError(f"{name}: expected a row, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InputError(f"{name}: entries must be finite")
    return v


def expm(a, t=1.0):
    """Matrix exponential e^{A t} by scaling and squaring.

    A t is scaled by 2^-s until its 1-norm is at most 1/2, the Taylor
    series is summed to machine tolerance, and the result is squared s
    times.  Relative accuracy is ~1e-12 for ||A t|| <= 10.
    """
    a = as_square(a, "expm")
    if not np.isfinite(t):
        raise InputError("expm: t must be finite")
    m = a * t
    n = m.shape[0]
    norm = np.linalg.norm(m, 1)
    s = 0
    if norm > 0.5:
        s = int(np.ceil(np.log2(norm / 0.5)))
    m = m / 2.0**s

    out = np.eye(n)
    term = np.eye(n)
    for k in range(1, _SERIES_CAP):
        term = term @ m / k
        out = out + term
        if np.linalg.norm(term, 1) <= np.finfo(float).eps * np.linalg.norm(out, 1):
            break
    else:
        raise NumericalError("expm: Taylor series did not converge")

    for _ in range(s):
        out = out @ out
    return out


def eig(a, return_vectors=False):
    """Eigenvalues (with multiplicity) of a real square matrix.

    With ``return_vectors=True`` returns ``(w, V)`` and verifies the
    residual ||A v - lambda v|| <= 1e-8 ||A|| for every pair.
    """
    a = as_square(a, "eig")
    try:
        w, v = np.linalg.eig(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eig: iteration failed: {exc}") from exc
    if not return_vectors:
        return w
    scale = max(np.linalg.norm(a, 2), 1e-300)
    resid = np.linalg.norm(a @ v - v * w, axis=0)  # columns are unit-norm
    worst = float(np.max(resid))
    if worst > 1e-8 * scale:
        raise NumericalError(
            f"eig: eigenpair residual {worst:.3e} exceeds 1e-8*||A|| = {1e-8 * scale:.3e}"
        )
    return w, v


def _even_series_pair(m):
    """Sum C = sum_k m^k/(2k)! and S = sum_k m^k/(2k+1)! to machine tolerance."""
    n = m.shape[0]
    c = np.eye(n)
    s = np.eye(n)
    term_c = np.eye(n)
    term_s = np.eye(n)
    for k in range(1, _SERIES_CAP):
        term_c = term_c @ m / ((2 * k - 1) * (2 * k))
        term_s = term_s @ m / ((2 * k) * (2 * k + 1))
        c = c + term_c
        s = s + term_s
        tiny = np.finfo(float).eps
        if (
            np.linalg.norm(term_c, 1) <= tiny * np.linalg.norm(c, 1)
            and np.linalg.norm(term_s, 1) <= tiny * max(np.linalg.norm(s, 1), 1.0)
        ):
            return c, s
    raise NumericalError("even matrix series did not converge under scaling")


def _cosh_sinhc_sqrt(m):
    """cosh(G) and sinh(G)/G for G^2 = m, via 4^-s scaling and
    double-argument reconstruction (no square root of m is formed)."""
    m = as_square(m, "even series")
    norm = np.linalg.norm(m, 1)
    s = 0
    if norm > 1.0:
        s = int(np.ceil(np.log2(norm) / 2.0))
    c, h = _even_series_pair(m / 4.0**s)
    eye = np.eye(m.shape[0])
    for _ in range(s):
        # cosh(2x) = 2 cosh^2(x) - 1,  sinhc(2x) = sinhc(x) cosh(x)
        h = h @ c
        c = 2.0 * (c @ c) - eye
    return c, h


def cosh_sqrt(m):
    """cosh(G) for any square root G of M, as an even series in M."""
    return _cosh_sinhc_sqrt(m)[0]


def sinhc_sqrt(m):
    """sinh(G)/G for any square root G of M, as an even series in M."""
    return _cosh_sinhc_sqrt(m)[1]


def solve_linear(a, b):
    """Solve A X = B with a reciprocal-condition guard.

    Raises SingularMatrixError when the 1-norm reciprocal condition
    estimate falls below 1e-12; near-singularity here always signals a
    genuine design failure downstream and must surface loudly.
    """
    a = as_square(a, "solve_linear")
    b_arr = np.asarray(b, dtype=float)
    squeeze = b_arr.ndim == 1
    b2 = b_arr.reshape(-1, 1) if squeeze else b_arr
    if b2.ndim != 2 or b2.shape[0] != a.shape[0]:
        raise DimensionError(
            f"solve_linear: rhs shape {b_arr.shape} incompatible with {a.shape}"
        )
    if np.linalg.norm(a, 1) < 1e-13:
        # entries at rounding-noise level: a zero pivot in disguise
        raise SingularMatrixError("solve_linear: matrix is numerically zero")
    try:
        inv = np.linalg.inv(a)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(f"solve_linear: singular matrix: {exc}") from exc
    norm_a = np.linalg.norm(a, 1)
    rcond = 1.0 / (norm_a * np.linalg.norm(inv, 1)) if norm_a > 0 else 0.0
    if not np.isfinite(rcond) or rcond < _RCOND_MIN:
        raise SingularMatrixError(
            f"solve_linear: reciprocal condition {rcond:.3e} below {_RCOND_MIN:.0e}"
        )
    x = np.linalg.solve(a, b2)
    return x[:, 0] if squeeze else x
