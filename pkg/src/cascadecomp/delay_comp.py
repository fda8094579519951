"""Input-delay compensation via the transport-equation realization.

A delay of tau seconds is the boundary-controlled transport system
w_t + w_x = 0 on [0, tau] with w(0,t) = u(t), so the plant sees
w(tau,t) = u(t - tau).  The decoupling operator has the closed form

    S f = integral_0^tau e^{A1 (x - tau)} B1 f(x) dx,

the compensator gain is K1 = K e^{A1 tau}, and the resulting feedback is
algebraically identical to the classical predictor

    u(t) = K [ e^{A1 tau} x1(t) + integral_{t-tau}^t e^{A1 (t-s)} B1 u(s) ds ].

Both controller forms are implemented and must agree for t >= tau.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigError,
    DimensionError,
    DivergenceError,
    InputError,
)
from .matops import as_col, as_row, as_square, eig, expm
from .quadrature import simpson_weights
from .results import SimResult

__all__ = [
    "DelayPlant",
    "TransportState",
    "transport_s_apply",
    "predictor_gain",
    "pde_controller",
    "history_controller",
    "simulate_delay_closed_loop",
]

DEFAULT_GRID = 100  # transport intervals per delay window


@dataclass
class DelayPlant:
    """ODE x1' = A1 x1 + B1 u(t - tau) with a nominal gain K for which
    A1 + B1 K is Hurwitz (verified at construction)."""

    a1: np.ndarray
    b1: np.ndarray
    tau: float
    k: np.ndarray

    def __post_init__(self):
        self.a1 = as_square(self.a1, "a1")
        self.b1 = as_col(self.b1, "b1")
        self.k = as_row(self.k, "k")
        self.tau = float(self.tau)
        n = self.a1.shape[0]
        if self.b1.shape[0] != n or self.k.shape[1] != n:
            raise DimensionError("b1 and k must match the a1 dimension")
        if not self.tau > 0:
            raise InputError(f"tau must be positive, got {self.tau}")
        if float(np.max(np.real(eig(self.a1 + self.b1 @ self.k)))) >= -1e-8:
            raise InputError("A1 + B1 K must be Hurwitz for the nominal gain k")

    @property
    def n(self):
        return self.a1.shape[0]


@dataclass
class TransportState:
    """Sampled delay line: w[j] ~ u(t - j dx) on equispaced nodes of
    [0, tau]; node 0 carries the boundary value w(0,t) = u(t)."""

    tau: float
    w: np.ndarray

    def __post_init__(self):
        self.tau = float(self.tau)
        self.w = np.asarray(self.w, dtype=float).ravel()
        if self.tau <= 0:
            raise InputError("tau must be positive")
        m = self.w.size - 1
        if m < 2 or m % 2:
            raise InputError(
                f"transport grid needs an even interval count >= 2, got {m}"
            )
        if not np.all(np.isfinite(self.w)):
            raise InputError("transport values must be finite")

    @property
    def intervals(self):
        return self.w.size - 1


def _exp_weights(p, m):
    """Row coefficients c[j] = simpson_w[j] * e^{A1 (x_j - tau)} B1."""
    h = p.tau / m
    weights = simpson_weights(m, h)
    cols = np.empty((p.n, m + 1))
    for j in range(m + 1):
        cols[:, j] = (expm(p.a1, j * h - p.tau) @ p.b1).ravel()
    return cols * weights


def transport_s_apply(p, state):
    """Composite-Simpson value of integral_0^tau e^{A1 (x-tau)} B1 w(x) dx."""
    if abs(state.tau - p.tau) > 1e-12 * max(p.tau, 1.0):
        raise InputError(
            f"transport state has tau={state.tau}, plant has tau={p.tau}"
        )
    return _exp_weights(p, state.intervals) @ state.w


def predictor_gain(p):
    """K1 = K e^{A1 tau}; the loop A1 + e^{-A1 tau} B1 K1 is similar to
    A1 + B1 K and therefore Hurwitz."""
    return p.k @ expm(p.a1, p.tau)


def pde_controller(p, x1, state):
    """u = K1 [ S w + x1 ] with S applied by quadrature."""
    x1 = np.asarray(x1, dtype=float).ravel()
    if x1.size != p.n:
        raise DimensionError(f"x1 has size {x1.size}, expected {p.n}")
    k1 = predictor_gain(p).ravel()
    return float(k1 @ (transport_s_apply(p, state) + x1))


def history_controller(p, x1, u_hist):
    """u = K [ e^{A1 tau} x1 + integral_{t-tau}^t e^{A1 (t-s)} B1 u(s) ds ]
    from input samples covering exactly one delay window [t - tau, t]."""
    x1 = np.asarray(x1, dtype=float).ravel()
    if x1.size != p.n:
        raise DimensionError(f"x1 has size {x1.size}, expected {p.n}")
    u_hist = np.asarray(u_hist, dtype=float).ravel()
    m = u_hist.size - 1
    if m < 2 or m % 2:
        raise InputError(
            "history must sample one delay window on an even grid "
            f"(>= 3 points), got {u_hist.size} samples"
        )
    h = p.tau / m
    weights = simpson_weights(m, h)
    acc = expm(p.a1, p.tau) @ x1
    for i in range(m + 1):  # sample i sits at s = t - tau + i h
        acc = acc + weights[i] * u_hist[i] * (expm(p.a1, p.tau - i * h) @ p.b1).ravel()
    return float(p.k.ravel() @ acc)


def simulate_delay_closed_loop(
    p,
    x1_0,
    w_0=None,
    t_end=10.0,
    dt=None,
    grid=DEFAULT_GRID,
    snapshot_stride=1,
    controller="predictor",
):
    """March the coupled plant/delay-line system.

    First-order upwind moves the delay line (exact at the default unit
    Courant number dt = dx), RK4 advances the ODE with the outflow value
    held over the step.  ``controller`` may be "predictor" (the
    compensated feedback) or "naive" (u = K x1, ignoring the delay; used
    as a negative control).
    """
    if controller not in ("predictor", "naive"):
        raise InputError(f"unknown controller {controller!r}")
    m = int(grid)
    if m < 2 or m % 2:
        raise ConfigError(f"grid must be an even count >= 2, got {grid}")
    dx = p.tau / m
    if dt is None:
        dt = dx
    if dt > dx * (1 + 1e-12):
        raise ConfigError(
            f"transport stability requires dt <= dx: dt={dt}, dx={dx}"
        )
    if dt <= 0:
        raise ConfigError("dt must be positive")

    x1 = np.asarray(x1_0, dtype=float).ravel().copy()
    if x1.size != p.n:
        raise DimensionError(f"x1_0 has size {x1.size}, expected {p.n}")
    if w_0 is None:
        w = np.zeros(m + 1)
    else:
        w = np.asarray(w_0, dtype=float).ravel().copy()
        if w.size != m + 1:
            raise DimensionError(f"w_0 has size {w.size}, expected {m + 1}")

    k1 = predictor_gain(p)
    kvec = (k1 @ _exp_weights(p, m)).ravel()
    k1row = k1.ravel()
    krow = p.k.ravel()
    nu = dt / dx
    nt = int(round(t_end / dt))

    def control():
        if controller == "naive":
            return float(krow @ x1)
        # node 0 is u itself; solving the scalar fixed point keeps the
        # boundary invariant w[0] = u(t) exact at every level
        rest = float(k1row @ x1 + kvec[1:] @ w[1:])
        return rest / (1.0 - kvec[0])

    times, snaps, states, controls, energies = [], [], [], [], []

    def record(i, u):
        times.append(i * dt)
        snaps.append(w.copy())
        states.append(x1.copy())
        controls.append(u)
        energies.append(
            float(np.sqrt(np.trapezoid(w * w, dx=dx)) + np.linalg.norm(x1))
        )

    for i in range(nt + 1):
        u = control()
        w[0] = u
        if i % snapshot_stride == 0 or i == nt:
            record(i, u)
        if i == nt:
            break
        inflow = w[m]  # held during the RK4 step
        k1v = (p.a1 @ x1 + p.b1.ravel() * inflow)
        k2v = p.a1 @ (x1 + 0.5 * dt * k1v) + p.b1.ravel() * inflow
        k3v = p.a1 @ (x1 + 0.5 * dt * k2v) + p.b1.ravel() * inflow
        k4v = p.a1 @ (x1 + dt * k3v) + p.b1.ravel() * inflow
        x1 = x1 + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        w[1:] = w[1:] - nu * (w[1:] - w[:-1])
        if not np.all(np.isfinite(x1)) or np.max(np.abs(x1)) > 1e12:
            raise DivergenceError("delay simulation diverged", step=i + 1)

    return SimResult(
        times=np.array(times),
        w_snapshots=np.array(snaps),
        x2_traj=np.array(states),
        u_traj=np.array(controls),
        energy=np.array(energies),
        x_grid=np.linspace(0.0, p.tau, m + 1),
        state_labels=tuple(f"x1_{i + 1}" for i in range(p.n)),
    )
