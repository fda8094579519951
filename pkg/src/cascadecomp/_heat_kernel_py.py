"""Pure-numpy fallback for the heat time-stepping kernel.

Semantics must match cascadecomp._heat_kernel exactly: per step, the
feedback u is evaluated from the current state, the grid is advanced by
FTCS with a Dirichlet node at x=0 and a second-order ghost-node Neumann
boundary at x=1, and the actuator is advanced by RK4 with u held.
"""

import numpy as np

BACKEND = "python"


def heat_march(w, x2, gw, cpsi, a2, b2, c2, mu, dx, dt, nsteps):
    """Advance ``nsteps`` steps in place.

    w     : grid values, length J+1 (w[0] stays 0)
    x2    : actuator state, length m
    gw    : feedback weights against w (zeros for the open loop)
    cpsi  : feedback weights against x2 (zeros for the open loop)
    """
    r = dt / (dx * dx)
    j = w.size - 1
    lap = np.empty_like(w)
    lap[0] = 0.0
    for _ in range(nsteps):
        u = float(cpsi @ x2) + float(gw @ w)
        ghost = w[j - 1] + 2.0 * dx * float(c2 @ x2)
        lap[1:j] = w[2:] - 2.0 * w[1:j] + w[: j - 1]
        lap[j] = ghost - 2.0 * w[j] + w[j - 1]
        w += r * lap + (dt * mu) * w
        w[0] = 0.0
        bu = b2 * u
        k1 = a2 @ x2 + bu
        k2 = a2 @ (x2 + (0.5 * dt) * k1) + bu
        k3 = a2 @ (x2 + (0.5 * dt) * k2) + bu
        k4 = a2 @ (x2 + dt * k3) + bu
        x2 += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
