#!/usr/bin/env python3
"""Benchmark the compiled heat-stepping kernel against the numpy fallback.

Runs the reference scenario (mu = 10, two-state actuator) at the paper
resolution dt = 4e-5, dx = 1e-2 for a configurable number of steps and
reports steps/second for each available backend plus the speedup.

Usage: python benchmarks/compare_backends.py [--steps N]
"""

import argparse
import importlib
import time

import numpy as np

from cascadecomp import HeatOdePlant, PsiKernel, design_heat_compensator
from cascadecomp.pde_sim import SimConfig, _feedback_arrays


def load_backends():
    backends = {}
    for name, module in (
        ("compiled", "cascadecomp._heat_kernel"),
        ("python", "cascadecomp._heat_kernel_py"),
    ):
        if importlib.util.find_spec(module) is not None:
            backends[name] = importlib.import_module(module)
    return backends


def bench(kernel, steps, repeat=3):
    plant = HeatOdePlant(
        mu=10.0, a2=np.diag([-1.0, -2.0]), b2=[1.0, 1.0], c2=[1.0, 1.0]
    )
    psi = PsiKernel.from_plant(plant)
    gains = design_heat_compensator(plant, [-2.0], kernel=psi)
    cfg = SimConfig(dx=1e-2, dt=4e-5, t_end=1.0)
    xs = np.linspace(0.0, 1.0, cfg.intervals + 1)
    gw, cpsi = _feedback_arrays(psi, gains, xs, cfg.dx)
    a2 = np.ascontiguousarray(plant.a2)
    b2 = plant.b2.ravel().copy()
    c2 = plant.c2.ravel().copy()

    best = np.inf
    result = None
    for _ in range(repeat):
        w = np.sin(np.pi * xs)
        w[0] = 0.0
        x2 = np.array([1.0, 1.0])
        t0 = time.perf_counter()
        kernel.heat_march(w, x2, gw, cpsi, a2, b2, c2, plant.mu, cfg.dx, cfg.dt, steps)
        best = min(best, time.perf_counter() - t0)
        result = (w.copy(), x2.copy())
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=100_000)
    args = parser.parse_args()

    backends = load_backends()
    if not backends:
        raise SystemExit("no stepping backend importable")

    print(f"heat stepping kernel, {args.steps} steps, grid 101 nodes")
    times = {}
    results = {}
    for name, module in backends.items():
        elapsed, state = bench(module, args.steps)
        times[name] = elapsed
        results[name] = state
        print(f"  {name:9s} {elapsed:8.3f} s   {args.steps / elapsed:12.0f} steps/s")

    if len(results) == 2:
        dw = np.max(np.abs(results["compiled"][0] - results["python"][0]))
        dx2 = np.max(np.abs(results["compiled"][1] - results["python"][1]))
        print(f"  agreement: max |dw| = {dw:.3e}, max |dx2| = {dx2:.3e}")
        print(f"  speedup: {times['python'] / times['compiled']:.1f}x")


if __name__ == "__main__":
    main()
