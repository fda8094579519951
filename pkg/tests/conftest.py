"""Shared fixtures and helpers for the test suite."""

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from cascadecomp import (
    CascadePlant,
    HeatOdePlant,
    PsiKernel,
    design_compensator,
    design_heat_compensator,
)

REF_MU = 10.0
REF_A2 = np.diag([-1.0, -2.0])
REF_B2 = np.array([1.0, 1.0])
REF_C2 = np.array([1.0, 1.0])


def match_spectra(got, want):
    """Best-case pairing distance between two eigenvalue multisets."""
    got = np.asarray(got, dtype=complex).ravel()
    want = np.asarray(want, dtype=complex).ravel()
    assert got.size == want.size, f"multiset sizes differ: {got.size} vs {want.size}"
    cost = np.abs(got[:, None] - want[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(np.max(cost[rows, cols]))


def random_diagonalizable(rng, n, low, high):
    """Matrix with distinct real eigenvalues drawn from [low, high]."""
    gap = (high - low) / (2.0 * n)
    eigs = low + (high - low) * (np.arange(n) + rng.uniform(0.25, 0.75, n)) / n
    assert np.min(np.diff(np.sort(eigs), prepend=low - gap)) > 0
    v = rng.uniform(-1.0, 1.0, (n, n)) + 2.0 * np.eye(n)
    return v @ np.diag(eigs) @ np.linalg.inv(v), eigs


def random_cascade_design(rng, n=3, m=2, norm_cap=2000.0):
    """A random controllable cascade plant plus separated pole targets.

    Plant eigenvalues land in [0.5, 2] (unstable), actuator in [-1, 1];
    the requested closed-loop poles keep all spectra pairwise disjoint.
    Designs whose closed-loop matrix norm exceeds ``norm_cap`` are
    redrawn: near-uncontrollable draws produce gains so large that the
    absolute residual tolerances under test become meaningless noise.
    """
    from cascadecomp.cascade_fd import closed_loop_matrix

    while True:
        a1, _ = random_diagonalizable(rng, n, 0.5, 2.0)
        a2, _ = random_diagonalizable(rng, m, -1.0, 1.0)
        b1 = rng.uniform(-1.0, 1.0, (n, 1))
        c2 = rng.uniform(-1.0, 1.0, (1, m))
        b2 = rng.uniform(0.5, 1.5, (m, 1)) * rng.choice([-1.0, 1.0], (m, 1))
        plant = CascadePlant(a1=a1, b1=b1, c2=c2, a2=a2, b2=b2)
        actuator_poles = -np.linspace(1.5, 3.5, m) - rng.uniform(0.0, 0.4, m)
        plant_poles = -np.linspace(0.4, 1.3, n) - rng.uniform(0.0, 0.05, n)
        try:
            gains = design_compensator(plant, actuator_poles, plant_poles)
        except Exception:
            continue
        if np.linalg.norm(closed_loop_matrix(plant, gains), 2) > norm_cap:
            continue
        return plant, gains, actuator_poles, plant_poles


@pytest.fixture(scope="session")
def heat_plant():
    return HeatOdePlant(mu=REF_MU, a2=REF_A2, b2=REF_B2, c2=REF_C2)


@pytest.fixture(scope="session")
def heat_design(heat_plant):
    kernel = PsiKernel.from_plant(heat_plant)
    gains = design_heat_compensator(heat_plant, [-2.0], kernel=kernel)
    return heat_plant, kernel, gains
