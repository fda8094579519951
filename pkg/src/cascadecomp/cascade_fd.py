"""Compensator design for fully finite-dimensional cascades.

The pipeline: (a) stabilize the actuator pair (A2, B2) by pole
placement, (b) decouple the cascade by solving
A1 S - S (A2 + B2 K2) = B1 C2, (c) stabilize (A1, S B2).  The assembled
feedback is

    u = K2 x2 + K1 x1 + K1 S x2,

and the closed-loop system matrix is block-similar to
diag-structured [[A1 + S B2 K1, 0], [B2 K1, A2 + B2 K2]], which is what
the verification helpers check numerically.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DesignError, DimensionError, DivergenceError, InputError
from .matops import as_col, as_matrix, as_square, eig, expm, solve_linear
from .results import SimResult
from .sylvester import SylvesterProblem, residual, solve_direct

__all__ = [
    "CascadePlant",
    "CompensatorGains",
    "HURWITZ_TOL",
    "controllability_rank",
    "place_poles_siso",
    "design_compensator",
    "closed_loop_matrix",
    "decoupled_matrix",
    "block_transform",
    "simulate_cascade",
]

HURWITZ_TOL = 1e-8  # max Re(eig) must sit below -HURWITZ_TOL


def is_hurwitz(a, tol=HURWITZ_TOL):
    return float(np.max(np.real(eig(a)))) < -tol


@dataclass
class CascadePlant:
    """Cascade data (A1, B1, C2, A2, B2): the plant x1 is driven by
    B1 C2 x2 and the control enters only the actuator state x2."""

    a1: np.ndarray
    b1: np.ndarray
    c2: np.ndarray
    a2: np.ndarray
    b2: np.ndarray

    def __post_init__(self):
        self.a1 = as_square(self.a1, "a1")
        self.b1 = as_matrix(self.b1, "b1")
        self.c2 = as_matrix(self.c2, "c2")
        self.a2 = as_square(self.a2, "a2")
        self.b2 = as_matrix(self.b2, "b2")
        n, m = self.a1.shape[0], self.a2.shape[0]
        if self.b1.shape[0] != n:
            raise DimensionError(f"b1 has {self.b1.shape[0]} rows, expected {n}")
        if self.c2.shape != (self.b1.shape[1], m):
            raise DimensionError(
                f"c2 has shape {self.c2.shape}, expected {(self.b1.shape[1], m)}"
            )
        if self.b2.shape[0] != m:
            raise DimensionError(f"b2 has {self.b2.shape[0]} rows, expected {m}")

    @property
    def n(self):
        return self.a1.shape[0]

    @property
    def m(self):
        return self.a2.shape[0]


@dataclass
class CompensatorGains:
    """Feedback data (K1, K2, S).  Invariants are checked against a plant
    by ``validate``; construction itself stays unchecked so that
    deliberately bad gains can be simulated as negative controls."""

    k1: np.ndarray
    k2: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        self.k1 = as_matrix(self.k1, "k1")
        self.k2 = as_matrix(self.k2, "k2")
        self.s = as_matrix(self.s, "s")

    def validate(self, plant):
        """Raise DesignError unless both closed-loop blocks are Hurwitz and
        S solves the decoupling equation to 1e-9 (scaled)."""
        a2cl = plant.a2 + plant.b2 @ self.k2
        if not is_hurwitz(a2cl):
            raise DesignError("A2 + B2 K2 is not Hurwitz", stage="a")
        sb2 = self.s @ plant.b2
        if not is_hurwitz(plant.a1 + sb2 @ self.k1):
            raise DesignError("A1 + S B2 K1 is not Hurwitz", stage="c")
        prob = SylvesterProblem(plant.a1, a2cl, plant.b1 @ plant.c2)
        res = residual(prob, self.s)
        scale = (np.linalg.norm(plant.a1) + np.linalg.norm(a2cl)) * max(
            np.linalg.norm(self.s), 1e-300
        )
        if res > 1e-9 * scale:
            raise DesignError(
                f"decoupling residual {res:.3e} exceeds 1e-9 scaled", stage="b"
            )


def controllability_rank(a, b):
    """Rank of the Kalman matrix [B, AB, ..., A^(n-1) B]."""
    a = as_square(a, "a")
    b = as_matrix(b, "b")
    if b.shape[0] != a.shape[0]:
        raise DimensionError(f"b has {b.shape[0]} rows, expected {a.shape[0]}")
    n = a.shape[0]
    blocks = [b]
    for _ in range(n - 1):
        blocks.append(a @ blocks[-1])
    k = np.hstack(blocks)
    smax = np.linalg.norm(k, 2)
    if smax == 0.0:
        return 0
    return int(np.linalg.matrix_rank(k, tol=1e-10 * smax))


def _conjugate_closed(poles, tol=1e-9):
    poles = np.asarray(poles, dtype=complex)
    a = np.sort_complex(poles)
    b = np.sort_complex(np.conj(poles))
    return poles.size > 0 and np.allclose(a, b, atol=tol)


def place_poles_siso(a, b, desired):
    """Single-input pole placement (Ackermann), returning K with
    sigma(A + B K) equal to the requested set."""
    a = as_square(a, "a")
    b = as_col(b) if np.asarray(b).ndim == 1 else as_matrix(b, "b")
    if b.shape != (a.shape[0], 1):
        raise DimensionError(f"b has shape {b.shape}, expected ({a.shape[0]}, 1)")
    n = a.shape[0]
    desired = np.asarray(desired, dtype=complex)
    if desired.size != n:
        raise InputError(f"need {n} target poles, got {desired.size}")
    if not _conjugate_closed(desired):
        raise InputError("target poles must be closed under conjugation")
    if controllability_rank(a, b) < n:
        raise DesignError("pair (a, b) is not controllable")

    blocks = [b]
    for _ in range(n - 1):
        blocks.append(a @ blocks[-1])
    ctrb = np.hstack(blocks)

    coeffs = np.poly(desired)
    if np.max(np.abs(coeffs.imag)) > 1e-9 * max(np.max(np.abs(coeffs.real)), 1.0):
        raise InputError("target poles must be closed under conjugation")
    coeffs = coeffs.real
    phi = np.zeros_like(a)
    for c in coeffs:  # Horner evaluation of the target polynomial at A
        phi = phi @ a + c * np.eye(n)

    e_last = np.zeros(n)
    e_last[-1] = 1.0
    row = solve_linear(ctrb.T, e_last)
    k = -(row @ phi).reshape(1, n)

    achieved = np.sort_complex(eig(a + b @ k))
    if not np.allclose(achieved, np.sort_complex(desired), atol=1e-6):
        raise DesignError(
            f"pole placement missed targets: got {achieved}, wanted {desired}"
        )
    return k


def design_compensator(p, actuator_poles, plant_poles):
    """Run the three-stage synthesis and return validated gains.

    ``actuator_poles=None`` keeps K2 = 0, which requires A2 to be Hurwitz
    already.  Pole sets are caller judgment; there are no defaults.
    """
    # stage (a): stabilize the actuator
    if actuator_poles is None:
        if not is_hurwitz(p.a2):
            raise DesignError(
                "A2 is not Hurwitz and no actuator poles were given", stage="a"
            )
        k2 = np.zeros((p.b2.shape[1], p.m))
    else:
        if controllability_rank(p.a2, p.b2) < p.m:
            raise DesignError("actuator pair (A2, B2) is not controllable", stage="a")
        try:
            k2 = place_poles_siso(p.a2, p.b2, actuator_poles)
        except (DesignError, InputError) as exc:
            raise DesignError(str(exc), stage="a") from exc

    # stage (b): decouple through the Sylvester equation
    a2cl = p.a2 + p.b2 @ k2
    try:
        prob = SylvesterProblem(p.a1, a2cl, p.b1 @ p.c2)
        s = solve_direct(prob)
    except Exception as exc:
        raise DesignError(str(exc), stage="b") from exc

    # stage (c): stabilize the decoupled plant
    sb2 = s @ p.b2
    if controllability_rank(p.a1, sb2) < p.n:
        raise DesignError("pair (A1, S B2) is not controllable", stage="c")
    try:
        k1 = place_poles_siso(p.a1, sb2, plant_poles)
    except (DesignError, InputError) as exc:
        raise DesignError(str(exc), stage="c") from exc

    gains = CompensatorGains(k1=k1, k2=k2, s=s)
    gains.validate(p)
    return gains


def closed_loop_matrix(p, g):
    """[[A1, B1 C2], [B2 K1, A2 + B2 K2 + B2 K1 S]]."""
    return np.block(
        [
            [p.a1, p.b1 @ p.c2],
            [p.b2 @ g.k1, p.a2 + p.b2 @ g.k2 + p.b2 @ g.k1 @ g.s],
        ]
    )


def decoupled_matrix(p, g):
    """Block-triangular similar form [[A1 + S B2 K1, 0], [B2 K1, A2 + B2 K2]]."""
    n, m = p.n, p.m
    return np.block(
        [
            [p.a1 + g.s @ p.b2 @ g.k1, np.zeros((n, m))],
            [p.b2 @ g.k1, p.a2 + p.b2 @ g.k2],
        ]
    )


def block_transform(s):
    """The similarity [[I, S], [0, I]] that exhibits the decoupling."""
    s = as_matrix(s, "s")
    n, m = s.shape
    return np.block([[np.eye(n), s], [np.zeros((m, n)), np.eye(m)]])


def simulate_cascade(p, g, x0, horizon, dt):
    """Fixed-step RK4 integration of the closed loop from x0.

    Returns a SimResult whose state trajectory stacks (x1, x2) and whose
    energy track is the Euclidean norm of the full state.
    """
    if dt <= 0:
        raise InputError("dt must be positive")
    x0 = np.asarray(x0, dtype=float).ravel()
    if x0.size != p.n + p.m:
        raise DimensionError(f"x0 has size {x0.size}, expected {p.n + p.m}")
    a_cl = closed_loop_matrix(p, g)
    # feedback row recovering u(t) = K2 x2 + K1 x1 + K1 S x2
    u_row = np.hstack([g.k1, g.k2 + g.k1 @ g.s]).ravel()

    nt = int(round(horizon / dt))
    times = np.empty(nt + 1)
    states = np.empty((nt + 1, x0.size))
    u = np.empty(nt + 1)
    x = x0.copy()
    for i in range(nt + 1):
        times[i] = i * dt
        states[i] = x
        u[i] = u_row @ x
        if i == nt:
            break
        k1v = a_cl @ x
        k2v = a_cl @ (x + 0.5 * dt * k1v)
        k3v = a_cl @ (x + 0.5 * dt * k2v)
        k4v = a_cl @ (x + dt * k3v)
        x = x + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > 1e12:
            raise DivergenceError("cascade simulation diverged", step=i + 1)

    labels = tuple(f"x1_{i + 1}" for i in range(p.n)) + tuple(
        f"x2_{i + 1}" for i in range(p.m)
    )
    return SimResult(
        times=times,
        w_snapshots=np.zeros((nt + 1, 0)),
        x2_traj=states,
        u_traj=u,
        energy=np.linalg.norm(states, axis=1),
        state_labels=labels,
    )


def exact_closed_loop_state(p, g, x0, t):
    """Reference solution e^{A_cl t} x0 for integrator accuracy checks."""
    a_cl = closed_loop_matrix(p, g)
    return expm(a_cl, t) @ np.asarray(x0, dtype=float).ravel()
