"""Finite-difference simulation of the heat/ODE closed loop.

Explicit FTCS in space-time (the step pair dt = 4e-5, dx = 1e-2 satisfies
the diffusion CFL bound dt <= dx^2/2 and is the reference resolution),
a second-order ghost node for the actuated Neumann boundary, and RK4 for
the actuator with the feedback held over each step.

The hot stepping loop lives in a compiled extension when available; set
CASCADECOMP_BACKEND=python (or =compiled) to force a choice.  Both
backends implement identical update order, so results agree to rounding.
"""

import os
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionError, DivergenceError, InputError
from .heat_ode import gain_shape_on_grid, psi_on_grid
from .quadrature import simpson_weights
from .results import SimResult, export_csv, snapshot_path

__all__ = [
    "SimConfig",
    "SimResult",
    "backend_name",
    "simulate_heat_open_loop",
    "simulate_heat_closed_loop",
    "export_csv",
    "snapshot_path",
]

_FORCE = os.environ.get("CASCADECOMP_BACKEND", "").strip().lower()
if _FORCE == "python":
    from . import _heat_kernel_py as _kernel
elif _FORCE == "compiled":
    from . import _heat_kernel as _kernel
elif _FORCE == "":
    try:
        from . import _heat_kernel as _kernel
    except ImportError:
        from . import _heat_kernel_py as _kernel
else:
    raise ImportError(
        f"CASCADECOMP_BACKEND={_FORCE!r} not understood (use 'compiled' or 'python')"
    )


def backend_name():
    """Which stepping kernel is active: 'compiled' or 'python'."""
    return _kernel.BACKEND


@dataclass
class SimConfig:
    """Space step, time step, horizon and snapshot decimation.

    dx must divide [0, 1] into an even number of intervals (the
    controller quadrature is composite Simpson on the same grid) and dt
    must satisfy the explicit-diffusion bound dt <= dx^2/2.
    """

    dx: float
    dt: float
    t_end: float
    snapshot_stride: int = 100

    def __post_init__(self):
        self.dx = float(self.dx)
        self.dt = float(self.dt)
        self.t_end = float(self.t_end)
        self.snapshot_stride = int(self.snapshot_stride)
        errors = []
        if not self.dx > 0:
            errors.append(f"dx must be positive, got {self.dx}")
        if not self.dt > 0:
            errors.append(f"dt must be positive, got {self.dt}")
        if not self.t_end > 0:
            errors.append(f"t_end must be positive, got {self.t_end}")
        if self.snapshot_stride < 1:
            errors.append(f"snapshot_stride must be >= 1, got {self.snapshot_stride}")
        if errors:
            raise ConfigError(errors)
        if self.dt > 0.5 * self.dx * self.dx * (1 + 1e-12):
            raise ConfigError(
                f"diffusion stability requires dt <= dx^2/2: "
                f"dt={self.dt:g}, dx^2/2={0.5 * self.dx * self.dx:g}"
            )
        j = int(round(1.0 / self.dx))
        if abs(j * self.dx - 1.0) > 1e-9 or j < 4 or j % 2:
            raise ConfigError(
                f"dx={self.dx:g} must split [0,1] into an even number (>=4) "
                "of equal intervals"
            )

    @property
    def intervals(self):
        return int(round(1.0 / self.dx))

    @property
    def steps(self):
        return int(round(self.t_end / self.dt))


def _initial_grid_values(w0, xs):
    if callable(w0):
        w = np.asarray([w0(x) for x in xs], dtype=float)
    else:
        w = np.asarray(w0, dtype=float).ravel().copy()
        if w.size != xs.size:
            raise DimensionError(
                f"w0 has {w.size} samples, expected {xs.size} grid nodes"
            )
    if not np.all(np.isfinite(w)):
        raise InputError("w0 must be finite")
    w[0] = 0.0  # Dirichlet node
    return w


def _feedback_arrays(kernel, gains, xs, dx):
    """Weights (gw, cpsi) with u = gw.w + cpsi.x2; zeros when no feedback."""
    j = xs.size - 1
    if gains is None or kernel is None or gains.n_modes == 0:
        return np.zeros(j + 1), None
    shape = gain_shape_on_grid(gains, xs)
    gw = simpson_weights(j, dx) * shape
    cpsi = psi_on_grid(kernel, xs).T @ gw
    return gw, cpsi


def _simulate(p, kernel, gains, w0, x2_0, cfg):
    j = cfg.intervals
    xs = np.linspace(0.0, 1.0, j + 1)
    w = _initial_grid_values(w0, xs)
    x2 = np.asarray(x2_0, dtype=float).ravel().copy()
    if x2.size != p.m:
        raise DimensionError(f"x2_0 has size {x2.size}, expected {p.m}")

    gw, cpsi = _feedback_arrays(kernel, gains, xs, cfg.dx)
    if cpsi is None:
        cpsi = np.zeros(p.m)
    a2 = np.ascontiguousarray(p.a2)
    b2 = np.ascontiguousarray(p.b2.ravel())
    c2 = np.ascontiguousarray(p.c2.ravel())

    times, snaps, states, controls, energies = [], [], [], [], []

    def record(step):
        times.append(step * cfg.dt)
        snaps.append(w.copy())
        states.append(x2.copy())
        controls.append(float(cpsi @ x2) + float(gw @ w))
        energies.append(
            float(np.sqrt(np.trapezoid(w * w, dx=cfg.dx)) + np.linalg.norm(x2))
        )

    record(0)
    step = 0
    total = cfg.steps
    while step < total:
        chunk = min(cfg.snapshot_stride, total - step)
        _kernel.heat_march(w, x2, gw, cpsi, a2, b2, c2, p.mu, cfg.dx, cfg.dt, chunk)
        step += chunk
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(x2))) or (
            max(np.max(np.abs(w)), np.max(np.abs(x2))) > 1e12
        ):
            raise DivergenceError("heat simulation diverged", step=step)
        record(step)

    return SimResult(
        times=np.array(times),
        w_snapshots=np.array(snaps),
        x2_traj=np.array(states),
        u_traj=np.array(controls),
        energy=np.array(energies),
        x_grid=xs,
        state_labels=tuple(f"x2_{i + 1}" for i in range(p.m)),
    )


def simulate_heat_open_loop(p, w0, x2_0, cfg):
    """Control-free run (u = 0); with mu > lambda_1 the energy grows at
    the rate of the dominant unstable mode."""
    return _simulate(p, None, None, w0, x2_0, cfg)


def simulate_heat_closed_loop(p, kernel, gains, w0, x2_0, cfg):
    """Feedback run; the total energy decays exponentially when the
    design hypotheses hold."""
    return _simulate(p, kernel, gains, w0, x2_0, cfg)
