"""Simulation results and CSV persistence.

A SimResult carries everything the plotting and analysis tooling needs:
the snapshot time grid, PDE grid snapshots (empty for pure-ODE runs),
the ODE state trajectory, the control signal and the energy history.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError

__all__ = ["SimResult", "export_csv", "snapshot_path"]


@dataclass
class SimResult:
    times: np.ndarray
    w_snapshots: np.ndarray  # (nt, J+1); (nt, 0) when there is no PDE state
    x2_traj: np.ndarray      # (nt, m)
    u_traj: np.ndarray
    energy: np.ndarray
    x_grid: np.ndarray = field(default_factory=lambda: np.zeros(0))
    state_labels: tuple = ()

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.w_snapshots = np.asarray(self.w_snapshots, dtype=float)
        self.x2_traj = np.asarray(self.x2_traj, dtype=float)
        self.u_traj = np.asarray(self.u_traj, dtype=float)
        self.energy = np.asarray(self.energy, dtype=float)
        self.x_grid = np.asarray(self.x_grid, dtype=float)
        nt = self.times.size
        if self.w_snapshots.ndim != 2:
            self.w_snapshots = self.w_snapshots.reshape(nt, -1)
        if self.x2_traj.ndim != 2:
            self.x2_traj = self.x2_traj.reshape(nt, -1)
        for name, arr in (
            ("w_snapshots", self.w_snapshots),
            ("x2_traj", self.x2_traj),
            ("u_traj", self.u_traj),
            ("energy", self.energy),
        ):
            if arr.shape[0] != nt:
                raise DimensionError(
                    f"{name} has {arr.shape[0]} rows, expected {nt} snapshot times"
                )
        if nt and np.min(self.energy) < 0:
            raise DimensionError("energy entries must be nonnegative")
        if not self.state_labels:
            self.state_labels = tuple(
                f"x2_{i + 1}" for i in range(self.x2_traj.shape[1])
            )


def snapshot_path(path):
    """Companion snapshot-file path for a main CSV path."""
    path = str(path)
    stem, dot, _ = path.rpartition(".")
    return (stem if dot else path) + "_snapshots.csv"


def _fmt(x):
    return format(float(x), ".9g")


def export_csv(r, path):
    """Write ``t,energy,u,<state columns>`` to ``path`` and the grid
    snapshots (header row = x-coordinates) to the companion file.

    Numbers carry 9 significant digits; output is deterministic.
    """
    path = str(path)
    header = ["t", "energy", "u", *r.state_labels]
    with open(path, "w", encoding="utf-8") as f:
        f.write(",".join(header) + "\n")
        for i in range(r.times.size):
            row = [r.times[i], r.energy[i], r.u_traj[i], *r.x2_traj[i]]
            f.write(",".join(_fmt(v) for v in row) + "\n")
    with open(snapshot_path(path), "w", encoding="utf-8") as f:
        f.write(",".join(_fmt(x) for x in r.x_grid) + "\n")
        for i in range(r.times.size):
            f.write(",".join(_fmt(v) for v in r.w_snapshots[i]) + "\n")
