"""Compensator for the unstable heat equation driven through ODE actuator
dynamics.

Plant: w_t = w_xx + mu w on (0,1), w(0,t) = 0, w_x(1,t) = C2 x2(t), with
actuator x2' = A2 x2 + B2 u.  The decoupling operator is S h = <Psi, h>
where the kernel solves

    Psi''(x) = (A2^T - mu) Psi(x),   Psi(0) = 0,   Psi'(1) = -C2^T,

i.e. Psi(x) = -x sinhc(x^2 M) (cosh_sqrt(M))^-1 C2^T with M = A2^T - mu I.
Stabilization then truncates the decoupled heat dynamics to its unstable
modes: with lambda_n = (n - 1/2)^2 pi^2 and phi_n = sqrt(2) sin(sqrt(lambda_n) x),
only the N modes with mu - lambda_n >= 0 need feedback, placed by a
finite-dimensional gain L_N and lifted back through

    u = K_N [ <Psi, x2> + w(.,t) ],   K_N f = integral f(x) sum_k l_k phi_k(x) dx.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .cascade_fd import place_poles_siso
from .errors import (
    DimensionError,
    InfeasibleDesignError,
    InputError,
    NumericalError,
    SingularMatrixError,
    SpectrumSeparationError,
    UncontrollableModeError,
)
from .matops import as_col, as_row, as_square, cosh_sqrt, eig, solve_linear
from .quadrature import simpson_weights

__all__ = [
    "HeatOdePlant",
    "PsiKernel",
    "ModalGains",
    "lambda_n",
    "phi_n",
    "psi_eval",
    "psi_on_grid",
    "input_shape_b",
    "select_n",
    "separation_gap",
    "modal_coeff",
    "design_heat_compensator",
    "kn_apply",
    "gain_shape_on_grid",
    "heat_controller",
    "galerkin_spectrum",
    "projected_sylvester_residual",
]

SEPARATION_GAP = 1e-6
_COEFF_CAP = 96


def lambda_n(n):
    """n-th Dirichlet/Neumann eigenvalue (n - 1/2)^2 pi^2 of -d^2/dx^2."""
    return (n - 0.5) ** 2 * np.pi**2


def phi_n(n, x):
    """Orthonormal eigenmode sqrt(2) sin(sqrt(lambda_n) x)."""
    return np.sqrt(2.0) * np.sin((n - 0.5) * np.pi * np.asarray(x, dtype=float))


def heat_mode_values(mu, count):
    """The first ``count`` open-loop mode rates mu - lambda_n."""
    n = np.arange(1, count + 1)
    return mu - (n - 0.5) ** 2 * np.pi**2


def separation_gap(mu, a2_eigs):
    """Distance from sigma(A2) to the heat spectrum {mu - lambda_n}."""
    gap = np.inf
    for nu in np.atleast_1d(a2_eigs):
        # only modes down to Re(nu) - 1 can come close
        top = max(mu - np.real(nu) + 1.0, lambda_n(1) + 1.0)
        n_max = int(np.ceil(np.sqrt(top) / np.pi + 0.5)) + 2
        modes = heat_mode_values(mu, n_max)
        gap = min(gap, float(np.min(np.abs(nu - modes))))
    return gap


@dataclass
class HeatOdePlant:
    """Reaction coefficient mu > 0 plus Hurwitz actuator data (A2, B2, C2).

    Construction verifies the spectrum-separation hypothesis: no actuator
    eigenvalue may coincide with a heat mode mu - (n-1/2)^2 pi^2.
    """

    mu: float
    a2: np.ndarray
    b2: np.ndarray
    c2: np.ndarray

    def __post_init__(self):
        self.mu = float(self.mu)
        self.a2 = as_square(self.a2, "a2")
        self.b2 = as_col(self.b2, "b2")
        self.c2 = as_row(self.c2, "c2")
        m = self.a2.shape[0]
        if self.b2.shape[0] != m or self.c2.shape[1] != m:
            raise DimensionError("b2 and c2 must match the a2 dimension")
        # mu = 0 (no reaction, all modes stable) is allowed for diagnostics
        if not self.mu >= 0:
            raise InputError(f"mu must be nonnegative, got {self.mu}")
        w = eig(self.a2)
        if float(np.max(np.real(w))) >= -1e-8:
            raise InputError("a2 must be Hurwitz")
        gap = separation_gap(self.mu, w)
        if gap < SEPARATION_GAP:
            raise SpectrumSeparationError(
                "spectrum separation violated: an actuator eigenvalue sits "
                f"within {gap:.3e} of a heat mode mu - (n-1/2)^2 pi^2 "
                f"(need >= {SEPARATION_GAP:.0e})"
            )

    @property
    def m(self):
        return self.a2.shape[0]


@dataclass
class PsiKernel:
    """Evaluator for the decoupling kernel Psi on [0, 1].

    Stores M = A2^T - mu I and y = (cosh_sqrt(M))^-1 C2^T; evaluation uses
    the cached vector series c_k = M^k y / (2k+1)! so that
    Psi(x) = -x sum_k (x^2)^k c_k, identical to -x sinhc(x^2 M) y.
    """

    m_matrix: np.ndarray
    inv_cosh_c: np.ndarray
    _coeffs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.m_matrix = as_square(self.m_matrix, "m_matrix")
        self.inv_cosh_c = np.asarray(self.inv_cosh_c, dtype=float).ravel()
        if self.inv_cosh_c.size != self.m_matrix.shape[0]:
            raise DimensionError("inv_cosh_c must match the m_matrix dimension")
        self._coeffs = self._vector_series()
        self._check_boundary_slope()

    @classmethod
    def from_plant(cls, plant):
        m = plant.a2.T - plant.mu * np.eye(plant.m)
        try:
            y = solve_linear(cosh_sqrt(m), plant.c2.T).ravel()
        except SingularMatrixError as exc:
            raise InfeasibleDesignError(
                "cosh of the kernel matrix is singular; the spectrum-"
                "separation hypothesis fails for this plant"
            ) from exc
        return cls(m_matrix=m, inv_cosh_c=y)

    def _vector_series(self):
        coeffs = [self.inv_cosh_c.copy()]
        floor = max(np.linalg.norm(self.inv_cosh_c, 1), 1.0)
        for k in range(1, _COEFF_CAP):
            nxt = self.m_matrix @ coeffs[-1] / ((2 * k) * (2 * k + 1))
            coeffs.append(nxt)
            if np.linalg.norm(nxt, 1) <= 1e-18 * floor:
                return np.array(coeffs)
        raise NumericalError("kernel coefficient series did not converge")

    def _check_boundary_slope(self):
        # second-order one-sided difference of Psi at x = 1
        h = 1e-5
        slope = (
            3.0 * self.eval(1.0) - 4.0 * self.eval(1.0 - h) + self.eval(1.0 - 2 * h)
        ) / (2.0 * h)
        target = -(cosh_sqrt(self.m_matrix) @ self.inv_cosh_c)
        if np.max(np.abs(slope - target)) > 1e-6 * max(np.max(np.abs(target)), 1.0):
            raise NumericalError(
                "kernel boundary slope check failed: finite-difference "
                f"Psi'(1) = {slope} vs {target}"
            )

    def eval(self, x):
        x = float(x)
        if not 0.0 <= x <= 1.0:
            raise InputError(f"x must lie in [0, 1], got {x}")
        x2 = x * x
        acc = self._coeffs[-1].copy()
        for c in self._coeffs[-2::-1]:
            acc = acc * x2 + c
        return -x * acc

    @property
    def m(self):
        return self.m_matrix.shape[0]


def psi_eval(kernel, x):
    """Psi(x) = -x sinhc(x^2 M) (cosh_sqrt M)^-1 C2^T as an m-vector."""
    return kernel.eval(x)


def psi_on_grid(kernel, xs):
    """Vectorized kernel evaluation, rows Psi(x) for each x in xs."""
    xs = np.asarray(xs, dtype=float)
    if xs.size and (xs.min() < 0.0 or xs.max() > 1.0):
        raise InputError("grid points must lie in [0, 1]")
    x2 = (xs * xs)[:, None]
    acc = np.broadcast_to(kernel._coeffs[-1], (xs.size, kernel.m)).copy()
    for c in kernel._coeffs[-2::-1]:
        acc = acc * x2 + c
    return -xs[:, None] * acc


def input_shape_b(plant, kernel, x):
    """Input shape b(x) = <Psi(x), B2> of the decoupled heat system."""
    return float(psi_eval(kernel, x) @ plant.b2.ravel())


def select_n(mu):
    """Smallest N >= 0 with (N + 1/2)^2 pi^2 > mu, so that every mode
    beyond N is open-loop stable."""
    if not np.isfinite(mu):
        raise InputError("mu must be finite")
    n = 0
    while (n + 0.5) ** 2 * np.pi**2 <= mu:
        n += 1
    return n


def modal_coeff(b, n):
    """Adaptive quadrature of b against phi_n, relative tolerance 1e-8."""
    if n < 1:
        raise InputError(f"mode index must be >= 1, got {n}")
    out = quad(
        lambda x: b(x) * phi_n(n, x),
        0.0,
        1.0,
        epsabs=1e-12,
        epsrel=1e-8,
        limit=200,
        full_output=1,
    )
    if len(out) > 3:
        raise NumericalError(f"modal quadrature failed for mode {n}: {out[3]}")
    return float(out[0])


@dataclass
class ModalGains:
    """Spectral-truncation design data: the retained mode rates, their
    input coefficients, and the feedback row L_N."""

    n_modes: int
    lambda_n: np.ndarray
    b_n: np.ndarray
    l: np.ndarray

    def __post_init__(self):
        self.n_modes = int(self.n_modes)
        self.lambda_n = np.asarray(self.lambda_n, dtype=float).ravel()
        self.b_n = np.asarray(self.b_n, dtype=float).ravel()
        self.l = np.asarray(self.l, dtype=float).ravel()
        if not (
            self.lambda_n.size == self.n_modes
            and self.b_n.size == self.n_modes
            and self.l.size == self.n_modes
        ):
            raise DimensionError("gain sequences must all have length n_modes")

    def closed_block(self):
        """Lambda_N + B_N L_N (empty for the vacuous N = 0 design)."""
        return np.diag(self.lambda_n) + np.outer(self.b_n, self.l)


def design_heat_compensator(plant, desired, kernel=None):
    """Truncate to the N unstable modes and place their poles.

    ``desired`` must list exactly N = select_n(mu) stable, conjugate-closed
    targets; N = 0 yields the legal empty design (zero controller).
    """
    n_modes = select_n(plant.mu)
    desired = np.asarray(desired, dtype=complex).ravel()
    if desired.size != n_modes:
        raise InputError(
            f"this plant retains {n_modes} unstable mode(s); "
            f"got {desired.size} target pole(s)"
        )
    if n_modes == 0:
        return ModalGains(n_modes=0, lambda_n=[], b_n=[], l=[])
    if float(np.max(np.real(desired))) >= -1e-8:
        raise InputError("target poles must have negative real parts")
    if kernel is None:
        kernel = PsiKernel.from_plant(plant)

    def b(x):
        return input_shape_b(plant, kernel, x)

    b_vec = np.array([modal_coeff(b, n) for n in range(1, n_modes + 1)])
    dead = np.abs(b_vec) < 1e-10
    if np.any(dead):
        idx = int(np.argmax(dead)) + 1
        raise UncontrollableModeError(
            f"mode {idx} has input coefficient {b_vec[idx - 1]:.3e}; the "
            "approximate-controllability hypothesis fails"
        )
    lam_vec = heat_mode_values(plant.mu, n_modes)
    l_row = place_poles_siso(np.diag(lam_vec), b_vec.reshape(-1, 1), desired)
    return ModalGains(n_modes=n_modes, lambda_n=lam_vec, b_n=b_vec, l=l_row.ravel())


def gain_shape_on_grid(gains, xs):
    """sum_k l_k phi_k evaluated on the grid (zero for the empty design)."""
    xs = np.asarray(xs, dtype=float)
    shape = np.zeros_like(xs)
    for k in range(1, gains.n_modes + 1):
        shape += gains.l[k - 1] * phi_n(k, xs)
    return shape


def kn_apply(gains, f):
    """K_N f = integral f(x) sum_k l_k phi_k(x) dx by composite Simpson on
    the sample grid of f."""
    f = np.asarray(f, dtype=float).ravel()
    intervals = f.size - 1
    if gains.n_modes == 0:
        return 0.0
    xs = np.linspace(0.0, 1.0, f.size)
    w = simpson_weights(intervals, 1.0 / intervals)
    return float(w @ (f * gain_shape_on_grid(gains, xs)))


def heat_controller(plant, kernel, gains, w, x2):
    """u = K_N [ <Psi, x2> + w ] for a sampled heat profile w."""
    x2 = np.asarray(x2, dtype=float).ravel()
    if x2.size != plant.m:
        raise DimensionError(f"x2 has size {x2.size}, expected {plant.m}")
    w = np.asarray(w, dtype=float).ravel()
    if gains.n_modes == 0:
        return 0.0
    xs = np.linspace(0.0, 1.0, w.size)
    f = psi_on_grid(kernel, xs) @ x2 + w
    return kn_apply(gains, f)


def modal_coeffs_batch(plant, kernel, count):
    """Input coefficients b_1..b_count in one pass.

    Vectorized composite Simpson with grid doubling until every
    coefficient settles to 1e-9; agrees with per-mode ``modal_coeff`` at
    its tolerance but runs orders of magnitude faster for large counts.
    """
    prev = None
    j = 512
    while j <= 32768:
        xs = np.linspace(0.0, 1.0, j + 1)
        bx = psi_on_grid(kernel, xs) @ plant.b2.ravel()
        weighted = simpson_weights(j, 1.0 / j) * bx
        roots = (np.arange(1, count + 1) - 0.5) * np.pi
        vals = np.sqrt(2.0) * (np.sin(np.outer(roots, xs)) @ weighted)
        if prev is not None and float(np.max(np.abs(vals - prev))) <= 1e-9 * max(
            1.0, float(np.max(np.abs(vals)))
        ):
            return vals
        prev = vals
        j *= 2
    raise NumericalError("batched modal quadrature did not converge")


def galerkin_spectrum(plant, kernel, gains, modes):
    """Eigenvalues of the modes x modes truncation of the stabilized heat
    operator: diag(mu - lambda_n) + b l^T with l zero-padded beyond N.

    Because K_N annihilates modes beyond N the matrix is block lower-
    triangular, so the spectrum is exactly sigma(Lambda_N + B_N L_N)
    together with the untouched rates mu - lambda_n for n > N.
    """
    modes = int(modes)
    if modes <= gains.n_modes:
        raise InputError(
            f"need more Galerkin modes than the {gains.n_modes} retained ones"
        )
    b_vec = modal_coeffs_batch(plant, kernel, modes)
    l_vec = np.zeros(modes)
    l_vec[: gains.n_modes] = gains.l
    mat = np.diag(heat_mode_values(plant.mu, modes)) + np.outer(b_vec, l_vec)
    return eig(mat)


def projected_sylvester_residual(plant, kernel, modes):
    """Weak-form decoupling check: the modal coefficients p_n of Psi must
    satisfy ((mu - lambda_n) I - A2^T) p_n = phi_n(1) C2^T.

    This is the mode-n projection of the operator identity that Psi
    realizes, computed by the same quadrature as the modal coefficients,
    so it cross-validates the kernel independently of its power-series
    construction.  Returns the worst absolute residual over n <= modes.
    """
    worst = 0.0
    eye = np.eye(kernel.m)
    for n in range(1, modes + 1):
        p_n = np.array(
            [
                modal_coeff(lambda x, i=i: float(kernel.eval(x)[i]), n)
                for i in range(kernel.m)
            ]
        )
        lhs = ((plant.mu - lambda_n(n)) * eye - plant.a2.T) @ p_n
        rhs = phi_n(n, 1.0) * plant.c2.ravel()
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst
