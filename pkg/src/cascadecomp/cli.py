"""Batch front end: parse scenario configs, run the synthesis /
verification / simulation pipelines, persist CSV artifacts and emit
plain-text plot scripts.

Configs are YAML with explicit matrix literals (lists of row lists).
Schema by kind:

    kind: heat_ode | delay | cascade_fd
    output: <directory>                  # default "out"

    # kind: heat_ode
    plant:  {mu, a2, b2, c2}
    design: {plant_poles}                # one target per retained mode
    sim:    {dx, dt, t_end, snapshot_stride, open_loop, w0, x2_0}
            # w0: zero | sin_pi_x | phi_<n> | [grid values]

    # kind: delay
    plant:  {a1, b1, tau, k}
    sim:    {grid, dt, t_end, snapshot_stride, x1_0, w0}
            # dt defaults to tau/grid (exact transport); w0: zero | [values]

    # kind: cascade_fd
    plant:  {a1, b1, c2, a2, b2}
    design: {actuator_poles, plant_poles}   # omit actuator_poles => K2 = 0
    sim:    {dt, t_end, snapshot_stride, x0}

Poles are reals or [re, im] pairs.  Exit codes: 0 success, 1 validation,
2 design failure, 3 numerical failure, 4 I/O.
"""

import argparse
import concurrent.futures
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from . import cascade_fd, delay_comp, heat_ode, pde_sim
from .errors import (
    CascadeCompError,
    ConfigError,
    ContourError,
    DesignError,
    DimensionError,
    DivergenceError,
    InputError,
    NumericalError,
)
from .matops import eig, expm
from .quadrature import simpson_weights
from .results import export_csv, snapshot_path

__all__ = ["ScenarioConfig", "parse_config", "run", "emit_plot_script", "main"]

KINDS = ("cascade_fd", "delay", "heat_ode")


@dataclass
class ScenarioConfig:
    kind: str
    plant: dict
    design: dict
    sim: dict
    output: str = "out"


# ---------------------------------------------------------------------------
# parsing and validation


def _is_num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _get_matrix(section, key, path, errors, rows=None, cols=None):
    v = section.get(key)
    if v is None:
        errors.append(f"{path}.{key}: required field is missing")
        return None
    if not isinstance(v, list) or not v:
        errors.append(f"{path}.{key}: expected a list of row lists")
        return None
    if all(_is_num(x) for x in v):
        v = [v] if rows == 1 or (rows is None and cols != 1) else [[x] for x in v]
    if not all(isinstance(r, list) and r and all(_is_num(x) for x in r) for r in v):
        errors.append(f"{path}.{key}: rows must be non-empty lists of numbers")
        return None
    width = len(v[0])
    if any(len(r) != width for r in v):
        errors.append(f"{path}.{key}: rows have unequal lengths")
        return None
    m = np.array(v, dtype=float)
    if rows is not None and m.shape[0] != rows:
        errors.append(f"{path}.{key}: expected {rows} row(s), got {m.shape[0]}")
        return None
    if cols is not None and m.shape[1] != cols:
        errors.append(f"{path}.{key}: expected {cols} column(s), got {m.shape[1]}")
        return None
    return m


def _get_vector(section, key, path, errors, size=None):
    v = section.get(key)
    if v is None:
        errors.append(f"{path}.{key}: required field is missing")
        return None
    if not isinstance(v, list) or not all(_is_num(x) for x in v):
        errors.append(f"{path}.{key}: expected a flat list of numbers")
        return None
    vec = np.array(v, dtype=float)
    if size is not None and vec.size != size:
        errors.append(f"{path}.{key}: expected {size} entries, got {vec.size}")
        return None
    return vec


def _get_number(section, key, path, errors, positive=False, default=None):
    v = section.get(key, default)
    if v is None:
        errors.append(f"{path}.{key}: required field is missing")
        return None
    if not _is_num(v):
        errors.append(f"{path}.{key}: expected a number, got {v!r}")
        return None
    if positive and not v > 0:
        errors.append(f"{path}.{key}: must be positive, got {v}")
        return None
    return float(v)


def _get_poles(section, key, path, errors, required=True):
    v = section.get(key)
    if v is None:
        if required:
            errors.append(f"{path}.{key}: required field is missing")
        return None
    if not isinstance(v, list):
        errors.append(f"{path}.{key}: expected a list of poles")
        return None
    poles = []
    for i, entry in enumerate(v):
        if _is_num(entry):
            poles.append(complex(entry))
        elif (
            isinstance(entry, list)
            and len(entry) == 2
            and all(_is_num(x) for x in entry)
        ):
            poles.append(complex(entry[0], entry[1]))
        else:
            errors.append(
                f"{path}.{key}[{i}]: pole must be a number or an [re, im] pair"
            )
    return np.array(poles, dtype=complex) if not errors else poles


def parse_config(text):
    """Parse and validate a YAML scenario; collects every semantic error."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError([f"syntax error{where}: {exc}"]) from exc
    if not isinstance(raw, dict):
        raise ConfigError(["config must be a mapping"])

    errors = []
    kind = raw.get("kind")
    if kind not in KINDS:
        raise ConfigError([f"kind: must be one of {KINDS}, got {kind!r}"])
    output = raw.get("output", "out")
    if not isinstance(output, str):
        errors.append("output: expected a directory path string")
        output = "out"
    plant = raw.get("plant")
    sim = raw.get("sim")
    design = raw.get("design", {})
    if not isinstance(plant, dict):
        errors.append("plant: required section is missing")
        plant = {}
    if not isinstance(sim, dict):
        errors.append("sim: required section is missing")
        sim = {}
    if not isinstance(design, dict):
        errors.append("design: expected a mapping")
        design = {}

    checked = {"plant": {}, "design": {}, "sim": {}}
    if kind == "heat_ode":
        _check_heat(plant, design, sim, checked, errors)
    elif kind == "delay":
        _check_delay(plant, sim, checked, errors)
    else:
        _check_cascade(plant, design, sim, checked, errors)

    if errors:
        raise ConfigError(errors)
    return ScenarioConfig(
        kind=kind,
        plant=checked["plant"],
        design=checked["design"],
        sim=checked["sim"],
        output=output,
    )


def _check_heat(plant, design, sim, out, errors):
    mu = _get_number(plant, "mu", "plant", errors, positive=True)
    a2 = _get_matrix(plant, "a2", "plant", errors)
    m = a2.shape[0] if a2 is not None else None
    if a2 is not None and a2.shape[0] != a2.shape[1]:
        errors.append("plant.a2: must be square")
        m = None
    b2 = _get_matrix(plant, "b2", "plant", errors, rows=m, cols=1)
    c2 = _get_matrix(plant, "c2", "plant", errors, rows=1, cols=m)
    out["plant"] = {"mu": mu, "a2": a2, "b2": b2, "c2": c2}

    poles = _get_poles(design, "plant_poles", "design", errors)
    if mu is not None and isinstance(poles, np.ndarray):
        want = heat_ode.select_n(mu)
        if poles.size != want:
            errors.append(
                f"design.plant_poles: mu={mu:g} retains {want} unstable "
                f"mode(s), so exactly {want} pole(s) are required, got {poles.size}"
            )
    out["design"] = {"plant_poles": poles}

    dx = _get_number(sim, "dx", "sim", errors, positive=True)
    dt = _get_number(sim, "dt", "sim", errors, positive=True)
    t_end = _get_number(sim, "t_end", "sim", errors, positive=True)
    stride = sim.get("snapshot_stride", 100)
    if not isinstance(stride, int) or stride < 1:
        errors.append(f"sim.snapshot_stride: expected a positive integer, got {stride!r}")
        stride = 100
    if dx is not None and dt is not None and dt > 0.5 * dx * dx * (1 + 1e-12):
        errors.append(
            f"sim.dt: diffusion stability requires dt <= dx^2/2 "
            f"(dt={dt:g}, dx^2/2={0.5 * dx * dx:g})"
        )
    if dx is not None:
        j = int(round(1.0 / dx))
        if abs(j * dx - 1.0) > 1e-9 or j < 4 or j % 2:
            errors.append(
                f"sim.dx: must split [0,1] into an even number (>=4) of intervals"
            )
    w0 = sim.get("w0", "zero")
    if isinstance(w0, list):
        w0 = _get_vector(sim, "w0", "sim", errors)
    elif not (
        w0 in ("zero", "sin_pi_x")
        or (isinstance(w0, str) and w0.startswith("phi_") and w0[4:].isdigit())
    ):
        errors.append(f"sim.w0: expected zero | sin_pi_x | phi_<n> | [values], got {w0!r}")
    x2_0 = _get_vector(sim, "x2_0", "sim", errors, size=m)
    open_loop = sim.get("open_loop", False)
    if not isinstance(open_loop, bool):
        errors.append(f"sim.open_loop: expected a boolean, got {open_loop!r}")
        open_loop = False
    out["sim"] = {
        "dx": dx,
        "dt": dt,
        "t_end": t_end,
        "snapshot_stride": stride,
        "w0": w0,
        "x2_0": x2_0,
        "open_loop": open_loop,
    }


def _check_delay(plant, sim, out, errors):
    a1 = _get_matrix(plant, "a1", "plant", errors)
    n = a1.shape[0] if a1 is not None else None
    if a1 is not None and a1.shape[0] != a1.shape[1]:
        errors.append("plant.a1: must be square")
        n = None
    b1 = _get_matrix(plant, "b1", "plant", errors, rows=n, cols=1)
    k = _get_matrix(plant, "k", "plant", errors, rows=1, cols=n)
    tau = _get_number(plant, "tau", "plant", errors, positive=True)
    out["plant"] = {"a1": a1, "b1": b1, "tau": tau, "k": k}

    grid = sim.get("grid", delay_comp.DEFAULT_GRID)
    if not isinstance(grid, int) or grid < 2 or grid % 2:
        errors.append(f"sim.grid: expected an even integer >= 2, got {grid!r}")
        grid = delay_comp.DEFAULT_GRID
    t_end = _get_number(sim, "t_end", "sim", errors, positive=True)
    dt = None
    if "dt" in sim:
        dt = _get_number(sim, "dt", "sim", errors, positive=True)
        if dt is not None and tau is not None and dt > tau / grid * (1 + 1e-12):
            errors.append(
                f"sim.dt: transport stability requires dt <= dx = tau/grid "
                f"({tau / grid:g})"
            )
    stride = sim.get("snapshot_stride", 1)
    if not isinstance(stride, int) or stride < 1:
        errors.append(f"sim.snapshot_stride: expected a positive integer, got {stride!r}")
        stride = 1
    x1_0 = _get_vector(sim, "x1_0", "sim", errors, size=n)
    w0 = sim.get("w0", "zero")
    if isinstance(w0, list):
        w0 = _get_vector(sim, "w0", "sim", errors, size=None if grid is None else grid + 1)
    elif w0 != "zero":
        errors.append(f"sim.w0: expected zero | [values], got {w0!r}")
    out["sim"] = {
        "grid": grid,
        "dt": dt,
        "t_end": t_end,
        "snapshot_stride": stride,
        "x1_0": x1_0,
        "w0": w0,
    }
    out["design"] = {}


def _check_cascade(plant, design, sim, out, errors):
    a1 = _get_matrix(plant, "a1", "plant", errors)
    n = a1.shape[0] if a1 is not None else None
    if a1 is not None and a1.shape[0] != a1.shape[1]:
        errors.append("plant.a1: must be square")
        n = None
    a2 = _get_matrix(plant, "a2", "plant", errors)
    m = a2.shape[0] if a2 is not None else None
    if a2 is not None and a2.shape[0] != a2.shape[1]:
        errors.append("plant.a2: must be square")
        m = None
    b1 = _get_matrix(plant, "b1", "plant", errors, rows=n)
    p = b1.shape[1] if b1 is not None else None
    c2 = _get_matrix(plant, "c2", "plant", errors, rows=p, cols=m)
    b2 = _get_matrix(plant, "b2", "plant", errors, rows=m, cols=1)
    out["plant"] = {"a1": a1, "b1": b1, "c2": c2, "a2": a2, "b2": b2}

    actuator = _get_poles(design, "actuator_poles", "design", errors, required=False)
    if isinstance(actuator, np.ndarray) and m is not None and actuator.size != m:
        errors.append(f"design.actuator_poles: expected {m} pole(s), got {actuator.size}")
    plant_poles = _get_poles(design, "plant_poles", "design", errors)
    if isinstance(plant_poles, np.ndarray) and n is not None and plant_poles.size != n:
        errors.append(f"design.plant_poles: expected {n} pole(s), got {plant_poles.size}")
    out["design"] = {"actuator_poles": actuator, "plant_poles": plant_poles}

    dt = _get_number(sim, "dt", "sim", errors, positive=True)
    t_end = _get_number(sim, "t_end", "sim", errors, positive=True)
    stride = sim.get("snapshot_stride", 1)
    if not isinstance(stride, int) or stride < 1:
        errors.append(f"sim.snapshot_stride: expected a positive integer, got {stride!r}")
        stride = 1
    size = None if (n is None or m is None) else n + m
    x0 = _get_vector(sim, "x0", "sim", errors, size=size)
    out["sim"] = {"dt": dt, "t_end": t_end, "snapshot_stride": stride, "x0": x0}


# ---------------------------------------------------------------------------
# plant construction and per-kind pipelines


def build_plant(cfg):
    p = cfg.plant
    if cfg.kind == "heat_ode":
        return heat_ode.HeatOdePlant(mu=p["mu"], a2=p["a2"], b2=p["b2"], c2=p["c2"])
    if cfg.kind == "delay":
        return delay_comp.DelayPlant(a1=p["a1"], b1=p["b1"], tau=p["tau"], k=p["k"])
    return cascade_fd.CascadePlant(
        a1=p["a1"], b1=p["b1"], c2=p["c2"], a2=p["a2"], b2=p["b2"]
    )


def _initial_w(cfg, xs):
    w0 = cfg.sim["w0"]
    if isinstance(w0, np.ndarray):
        return w0
    if w0 == "zero":
        return np.zeros_like(xs)
    if w0 == "sin_pi_x":
        return np.sin(np.pi * xs)
    return heat_ode.phi_n(int(w0[4:]), xs)


def _write_gains_csv(path, named):
    with open(path, "w", encoding="utf-8") as f:
        f.write("name,row,col,value\n")
        for name, mat in named:
            mat = np.atleast_2d(np.asarray(mat, dtype=float))
            for i in range(mat.shape[0]):
                for j in range(mat.shape[1]):
                    f.write(f"{name},{i + 1},{j + 1},{format(mat[i, j], '.9g')}\n")


def _write_spectrum_csv(path, values):
    values = np.asarray(values, dtype=complex)
    order = np.lexsort((values.imag, -values.real))
    with open(path, "w", encoding="utf-8") as f:
        f.write("re,im\n")
        for v in values[order]:
            f.write(f"{format(v.real, '.9g')},{format(v.imag, '.9g')}\n")


def _heat_design(cfg, plant):
    kernel = heat_ode.PsiKernel.from_plant(plant)
    gains = heat_ode.design_heat_compensator(
        plant, cfg.design["plant_poles"], kernel=kernel
    )
    return kernel, gains


def _run_heat(cmd, cfg, out):
    plant = build_plant(cfg)
    if cmd == "synthesize":
        _, gains = _heat_design(cfg, plant)
        _write_gains_csv(
            out / "gains.csv",
            [
                ("Lambda_N", np.diag(gains.lambda_n)),
                ("B_N", gains.b_n.reshape(-1, 1)),
                ("L_N", gains.l.reshape(1, -1)),
            ],
        )
        return 0
    if cmd == "spectrum":
        kernel, gains = _heat_design(cfg, plant)
        _write_spectrum_csv(
            out / "spectrum.csv",
            heat_ode.galerkin_spectrum(plant, kernel, gains, modes=60),
        )
        return 0
    if cmd == "verify":
        return _report(out, _verify_heat(cfg, plant))
    # simulate
    s = cfg.sim
    config = pde_sim.SimConfig(
        dx=s["dx"], dt=s["dt"], t_end=s["t_end"], snapshot_stride=s["snapshot_stride"]
    )
    xs = np.linspace(0.0, 1.0, config.intervals + 1)
    w0 = _initial_w(cfg, xs)
    if s["open_loop"]:
        result = pde_sim.simulate_heat_open_loop(plant, w0, s["x2_0"], config)
    else:
        kernel, gains = _heat_design(cfg, plant)
        result = pde_sim.simulate_heat_closed_loop(
            plant, kernel, gains, w0, s["x2_0"], config
        )
    _emit_simulation(result, out)
    return 0


def _run_delay(cmd, cfg, out):
    plant = build_plant(cfg)
    k1 = delay_comp.predictor_gain(plant)
    if cmd == "synthesize":
        _write_gains_csv(out / "gains.csv", [("K1", k1)])
        return 0
    if cmd == "spectrum":
        loop = plant.a1 + expm(plant.a1, -plant.tau) @ plant.b1 @ k1
        _write_spectrum_csv(out / "spectrum.csv", eig(loop))
        return 0
    if cmd == "verify":
        return _report(out, _verify_delay(cfg, plant))
    s = cfg.sim
    w0 = s["w0"] if isinstance(s["w0"], np.ndarray) else None
    result = delay_comp.simulate_delay_closed_loop(
        plant,
        s["x1_0"],
        w_0=w0,
        t_end=s["t_end"],
        dt=s["dt"],
        grid=s["grid"],
        snapshot_stride=s["snapshot_stride"],
    )
    _emit_simulation(result, out)
    return 0


def _run_cascade(cmd, cfg, out):
    plant = build_plant(cfg)
    gains = cascade_fd.design_compensator(
        plant, cfg.design["actuator_poles"], cfg.design["plant_poles"]
    )
    if cmd == "synthesize":
        _write_gains_csv(
            out / "gains.csv", [("K1", gains.k1), ("K2", gains.k2), ("S", gains.s)]
        )
        return 0
    if cmd == "spectrum":
        _write_spectrum_csv(
            out / "spectrum.csv", eig(cascade_fd.closed_loop_matrix(plant, gains))
        )
        return 0
    if cmd == "verify":
        return _report(out, _verify_cascade(cfg, plant, gains))
    s = cfg.sim
    result = cascade_fd.simulate_cascade(plant, gains, s["x0"], s["t_end"], s["dt"])
    _emit_simulation(result, out)
    return 0


# ---------------------------------------------------------------------------
# verification reports


def _report(out, checks):
    lines = []
    ok = True
    for name, passed, detail in checks:
        ok &= passed
        lines.append(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
    text = "\n".join(lines) + "\n"
    (out / "verify_report.txt").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return 0 if ok else 2


def _verify_heat(cfg, plant):
    checks = []
    rates = np.real(eig(plant.a2))
    checks.append(
        (
            "actuator-stability",
            float(np.max(rates)) < -1e-8,
            f"max Re sigma(A2) = {float(np.max(rates)):.6g}",
        )
    )
    gap = heat_ode.separation_gap(plant.mu, eig(plant.a2))
    checks.append(
        (
            "spectrum-separation",
            gap >= heat_ode.SEPARATION_GAP,
            f"gap to heat modes = {gap:.6g} (need >= {heat_ode.SEPARATION_GAP:g})",
        )
    )
    kernel = heat_ode.PsiKernel.from_plant(plant)
    h = 1e-5
    slope = (
        3.0 * kernel.eval(1.0) - 4.0 * kernel.eval(1.0 - h) + kernel.eval(1.0 - 2 * h)
    ) / (2.0 * h)
    bd = float(np.max(np.abs(slope + plant.c2.ravel())))
    checks.append(("kernel-boundary-slope", bd <= 1e-6, f"|Psi'(1) + C2^T| = {bd:.3e}"))

    h = 1e-3
    xs = np.linspace(2 * h, 1.0 - 2 * h, 21)
    worst = 0.0
    for x in xs:
        second = (kernel.eval(x + h) - 2.0 * kernel.eval(x) + kernel.eval(x - h)) / h**2
        worst = max(worst, float(np.max(np.abs(second - kernel.m_matrix @ kernel.eval(x)))))
    tol = h**2 * np.linalg.norm(kernel.m_matrix, 2) ** 2
    checks.append(
        ("kernel-ode-residual", worst <= tol, f"max |Psi'' - M Psi| = {worst:.3e} (tol {tol:.3e})")
    )

    n_modes = heat_ode.select_n(plant.mu)
    proj = heat_ode.projected_sylvester_residual(plant, kernel, max(n_modes, 3))
    checks.append(
        ("projected-decoupling", proj <= 1e-6, f"max modal residual = {proj:.3e}")
    )

    gains = heat_ode.design_heat_compensator(
        plant, cfg.design["plant_poles"], kernel=kernel
    )
    if n_modes:
        bmin = float(np.min(np.abs(gains.b_n)))
        checks.append(
            ("mode-controllability", bmin > 1e-10, f"min |b_n| = {bmin:.6g}")
        )
        placed = np.sort_complex(eig(gains.closed_block()))
        want = np.sort_complex(np.asarray(cfg.design["plant_poles"], dtype=complex))
        err = float(np.max(np.abs(placed - want)))
        checks.append(("pole-placement", err <= 1e-6, f"max pole error = {err:.3e}"))
    else:
        checks.append(("mode-controllability", True, "no retained modes (N = 0)"))

    spec = heat_ode.galerkin_spectrum(plant, kernel, gains, modes=60)
    top = float(np.max(np.real(spec)))
    checks.append(("galerkin-stability", top < 0.0, f"max Re = {top:.6g} over 60 modes"))

    j = 100
    xs = np.linspace(0.0, 1.0, j + 1)
    weights = simpson_weights(j, 1.0 / j)
    basis = np.stack([heat_ode.phi_n(n, xs) for n in range(1, 11)])
    gram = basis @ (weights[:, None] * basis.T)
    gerr = float(np.max(np.abs(gram - np.eye(10))))
    checks.append(("basis-orthonormality", gerr <= 1e-8, f"max Gram error = {gerr:.3e}"))
    return checks


def _verify_delay(cfg, plant):
    checks = []
    nominal = np.real(eig(plant.a1 + plant.b1 @ plant.k))
    checks.append(
        (
            "nominal-stability",
            float(np.max(nominal)) < -1e-8,
            f"max Re sigma(A1 + B1 K) = {float(np.max(nominal)):.6g}",
        )
    )
    k1 = delay_comp.predictor_gain(plant)
    shifted = plant.a1 + expm(plant.a1, -plant.tau) @ plant.b1 @ k1
    a = np.sort_complex(eig(shifted))
    b = np.sort_complex(eig(plant.a1 + plant.b1 @ plant.k))
    sim_err = float(np.max(np.abs(a - b)))
    checks.append(
        ("gain-similarity", sim_err <= 1e-8, f"spectrum mismatch = {sim_err:.3e}")
    )

    s = cfg.sim
    grid = s["grid"]
    result = delay_comp.simulate_delay_closed_loop(
        plant, s["x1_0"], t_end=2.0 * plant.tau, grid=grid, snapshot_stride=1
    )
    # at dt = dx the recorded u samples are the one-delay-window history
    worst = 0.0
    exact = 0.0
    for i in range(grid, result.times.size):
        state = delay_comp.TransportState(tau=plant.tau, w=result.w_snapshots[i])
        u_pde = delay_comp.pde_controller(plant, result.x2_traj[i], state)
        u_hist = delay_comp.history_controller(
            plant, result.x2_traj[i], result.u_traj[i - grid : i + 1]
        )
        worst = max(worst, abs(u_pde - u_hist))
        exact = max(exact, abs(result.w_snapshots[i][-1] - result.u_traj[i - grid]))
    checks.append(
        ("controller-equivalence", worst <= 1e-6, f"max |u_pde - u_hist| = {worst:.3e}")
    )
    checks.append(
        ("transport-exactness", exact <= 1e-12, f"max |w(tau,t) - u(t-tau)| = {exact:.3e}")
    )
    return checks


def _verify_cascade(cfg, plant, gains):
    checks = []
    a2cl = plant.a2 + plant.b2 @ gains.k2
    top2 = float(np.max(np.real(eig(a2cl))))
    checks.append(("actuator-loop-stability", top2 < -1e-8, f"max Re = {top2:.6g}"))
    sb2 = gains.s @ plant.b2
    top1 = float(np.max(np.real(eig(plant.a1 + sb2 @ gains.k1))))
    checks.append(("plant-loop-stability", top1 < -1e-8, f"max Re = {top1:.6g}"))

    from .sylvester import SylvesterProblem, residual

    prob = SylvesterProblem(plant.a1, a2cl, plant.b1 @ plant.c2)
    res = residual(prob, gains.s)
    scale = (np.linalg.norm(plant.a1) + np.linalg.norm(a2cl)) * max(
        np.linalg.norm(gains.s), 1e-300
    )
    checks.append(
        (
            "decoupling-residual",
            res <= 1e-9 * scale,
            f"residual = {res:.3e} (scaled tol {1e-9 * scale:.3e})",
        )
    )

    t = cascade_fd.block_transform(gains.s)
    a_cl = cascade_fd.closed_loop_matrix(plant, gains)
    a_dec = cascade_fd.decoupled_matrix(plant, gains)
    sim_res = float(np.linalg.norm(t @ a_cl @ np.linalg.inv(t) - a_dec))
    checks.append(
        ("similarity-residual", sim_res <= 1e-9, f"residual = {sim_res:.3e}")
    )

    union = np.concatenate(
        [eig(plant.a1 + sb2 @ gains.k1), eig(a2cl)]
    )
    got = np.sort_complex(eig(a_cl))
    err = float(np.max(np.abs(got - np.sort_complex(union))))
    checks.append(("spectrum-union", err <= 1e-6, f"max eigenvalue error = {err:.3e}"))

    joint_a = np.block(
        [
            [plant.a1, np.zeros((plant.n, plant.m))],
            [np.zeros((plant.m, plant.n)), a2cl],
        ]
    )
    joint_b = np.vstack([sb2, plant.b2])
    joint = cascade_fd.controllability_rank(joint_a, joint_b)
    sub1 = cascade_fd.controllability_rank(plant.a1, sb2)
    sub2 = cascade_fd.controllability_rank(a2cl, plant.b2)
    ok = joint < plant.n + plant.m or (sub1 == plant.n and sub2 == plant.m)
    checks.append(
        (
            "joint-controllability",
            ok,
            f"joint rank {joint}/{plant.n + plant.m}, subsystems {sub1}/{plant.n}, {sub2}/{plant.m}",
        )
    )
    return checks


# ---------------------------------------------------------------------------
# simulation artifacts


_LINES_TEMPLATE = '''#!/usr/bin/env python3
"""Line plots of energy, control and state trajectories from {csv}."""
import csv

import matplotlib.pyplot as plt
import numpy as np

with open("{csv}", newline="") as f:
    reader = csv.reader(f)
    header = next(reader)
    rows = [[float(v) for v in row] for row in reader if row]
data = np.array(rows, dtype=float) if rows else np.zeros((0, len(header)))

fig, axes = plt.subplots(3, 1, figsize=(7, 9), sharex=True)
axes[0].plot(data[:, 0], data[:, 1])
axes[0].set_ylabel(header[1])
axes[1].plot(data[:, 0], data[:, 2])
axes[1].set_ylabel(header[2])
for col in range(3, len(header)):
    axes[2].plot(data[:, 0], data[:, col], label=header[col])
if len(header) > 3:
    axes[2].legend()
axes[2].set_ylabel("state")
axes[2].set_xlabel("t")
fig.tight_layout()
fig.savefig("lines.png", dpi=150)
print("wrote lines.png")
'''

_SURFACE_TEMPLATE = '''#!/usr/bin/env python3
"""Surface plot of the grid state w(x, t) from {snap}."""
import csv

import matplotlib.pyplot as plt
import numpy as np

with open("{snap}", newline="") as f:
    reader = csv.reader(f)
    x = np.array(next(reader), dtype=float)
    rows = [[float(v) for v in row] for row in reader if row]
w = np.array(rows, dtype=float) if rows else np.zeros((0, x.size))
with open("{csv}", newline="") as f:
    reader = csv.reader(f)
    next(reader)
    t = np.array([float(row[0]) for row in reader if row])

fig = plt.figure(figsize=(8, 6))
ax = fig.add_subplot(projection="3d")
if w.size:
    tt, xx = np.meshgrid(t, x, indexing="ij")
    ax.plot_surface(xx, tt, w, cmap="viridis", linewidth=0)
ax.set_xlabel("x")
ax.set_ylabel("t")
ax.set_zlabel("w(x,t)")
fig.savefig("surface.png", dpi=150)
print("wrote surface.png")
'''


def emit_plot_script(result, style, csv_file, out_path):
    """Write a standalone plotting script that reads the exported CSVs by
    relative path.  ``style`` is "lines" or "surface"."""
    if style == "surface" and result.w_snapshots.shape[1] == 0:
        raise InputError("result has no grid snapshots for a surface plot")
    csv_file = Path(csv_file)
    if not csv_file.exists():
        raise FileNotFoundError(f"missing CSV artifact: {csv_file}")
    snap = Path(snapshot_path(csv_file))
    if style == "surface" and not snap.exists():
        raise FileNotFoundError(f"missing CSV artifact: {snap}")
    if style == "lines":
        text = _LINES_TEMPLATE.format(csv=csv_file.name)
    elif style == "surface":
        text = _SURFACE_TEMPLATE.format(csv=csv_file.name, snap=snap.name)
    else:
        raise InputError(f"unknown plot style {style!r}")
    Path(out_path).write_text(text, encoding="utf-8")
    return out_path


def _emit_simulation(result, out):
    csv_file = out / "sim.csv"
    export_csv(result, csv_file)
    emit_plot_script(result, "lines", csv_file, out / "plot_lines.py")
    if result.w_snapshots.shape[1]:
        emit_plot_script(result, "surface", csv_file, out / "plot_surface.py")


# ---------------------------------------------------------------------------
# entry point


def run(cmd, cfg, out_dir=None):
    """Execute one subcommand for one scenario; returns the exit code."""
    out = Path(out_dir if out_dir is not None else cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.kind == "heat_ode":
        return _run_heat(cmd, cfg, out)
    if cfg.kind == "delay":
        return _run_delay(cmd, cfg, out)
    return _run_cascade(cmd, cfg, out)


def _code_for(exc):
    if isinstance(exc, (ConfigError, DimensionError, InputError)):
        return 1
    if isinstance(exc, (DesignError, ContourError)):
        return 2
    if isinstance(exc, (NumericalError, DivergenceError)):
        return 3
    if isinstance(exc, OSError):
        return 4
    if isinstance(exc, CascadeCompError):
        return 3
    raise exc


def _run_one(cmd, path, out_dir):
    try:
        cfg = parse_config(Path(path).read_text(encoding="utf-8"))
        return run(cmd, cfg, out_dir)
    except Exception as exc:  # noqa: BLE001 - mapped to exit codes
        code = _code_for(exc)
        if isinstance(exc, ConfigError):
            for e in exc.errors:
                print(f"{path}: {e}", file=sys.stderr)
        else:
            print(f"{path}: {exc}", file=sys.stderr)
        return code


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="cascadecomp",
        description="Compensator synthesis and simulation for cascade linear systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (
        ("synthesize", "design gains and write gains.csv"),
        ("verify", "run all invariant checks and write verify_report.txt"),
        ("simulate", "run the closed-loop simulation and write CSV + plot scripts"),
        ("spectrum", "write the relevant eigenvalue listing"),
    ):
        p = sub.add_parser(name, help=doc)
        p.add_argument(
            "--config",
            action="append",
            required=True,
            metavar="PATH",
            help="scenario config (repeat with --batch)",
        )
        p.add_argument("--out", metavar="DIR", help="output directory override")
        p.add_argument(
            "--batch",
            action="store_true",
            help="run several configs concurrently (CASCADECOMP_THREADS caps workers)",
        )
    args = parser.parse_args(argv)

    if not args.batch:
        if len(args.config) != 1:
            print("multiple --config requires --batch", file=sys.stderr)
            return 1
        return _run_one(args.command, args.config[0], args.out)

    threads = os.environ.get("CASCADECOMP_THREADS")
    workers = max(1, int(threads)) if threads else min(8, len(args.config))
    codes = []
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        futures = []
        for path in args.config:
            out = Path(args.out) / Path(path).stem if args.out else None
            futures.append(pool.submit(_run_one, args.command, path, out))
        codes = [f.result() for f in futures]
    return max(codes)


if __name__ == "__main__":
    sys.exit(main())
