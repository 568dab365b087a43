"""Experiment runner: configs, scenarios, the full-basis sweep, CSV output.

A scenario is a named recipe turning an ExperimentConfig into one or
more CSV files plus a JSON run manifest.  Everything is deterministic:
no seeds, stable ordering, floats printed with 17 significant digits
and LF line endings, so reruns are byte-identical.
"""

from __future__ import annotations

import dataclasses
import json
import math
import multiprocessing
import os
import re
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .basis import FibonacciBasis, _wall_count_masks, build_basis
from .classical import find_cycles, make_named_state
from .diagnostics import (
    concurrence,
    entropy,
    fidelity,
    global_Q,
    ipr,
    loschmidt_numeric,
    negativity,
    r_statistics,
    rate_function,
    reduced_density,
    reference_pdf,
    schmidt_spectrum,
    spin_z_profile,
    tangle_profile,
)
from .evolve import COMPILED_KERNEL, StateVector, StepParams, step
from .quasiparticle import (
    GliderIndex,
    build_lrk,
    first_order_energy,
    glider_sector_quasienergies,
    hbc_matrix,
    loschmidt_analytic,
    loschmidt_gaussian,
    mode_grid,
    momentum_values,
)

SCENARIOS = (
    "propagation",
    "concurrence",
    "spectrum_stats",
    "sweep",
    "negativity",
    "loschmidt",
    "dispersion",
    "fidelity",
    "rate_function",
)


@dataclass
class ExperimentConfig:
    """Declarative description of one run; unset fields pick scenario defaults."""

    scenario: str
    n_sites: int = 20
    epsilon: float = 0.01
    steps: int = 0
    initial: object = ""  # spec string, ";"-joined specs, list, or ALL
    measure: object = ""
    measure_every: int = 0
    output_dir: str = "."
    pairs: list = field(default_factory=list)
    epsilon1: float = 0.001
    epsilon2: float = 0.002
    sizes: list = field(default_factory=list)
    mode_left: int = 0
    mode_right: int = 0
    k_index: int = 0
    k_indices: list = field(default_factory=list)
    k_points: list = field(default_factory=list)
    epsilon_scan: list = field(default_factory=list)
    center_times: list = field(default_factory=list)
    subsystem_adjacent: object = None
    subsystem_disjoint: object = None
    workers: int = 0
    steady_fraction: float = 0.95
    analytic_only: bool = False
    z_max: float = 0.3
    z_points: int = 151

    @classmethod
    def from_mapping(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        if "scenario" not in data:
            raise ValueError("config requires a scenario")
        return cls(**data)

    def resolved(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class SweepRecord:
    """Outcome of evolving one basis configuration to the final step."""

    config_index: int
    bits: str
    wall_count: int
    entropy_half: float
    neg_ln_ipr: float
    steady_state_time: int


# scenario defaults filled in by resolve_config when a field is unset
_DEFAULTS = {
    "propagation": dict(steps=600, initial="A", measure="tangle_profile,q", measure_every=1),
    "concurrence": dict(steps=300, initial="glider_BC:0", measure_every=3),
    "spectrum_stats": dict(n_default=18, initial="A;glider_BC:0", measure_every=3),
    "sweep": dict(steps=1200, initial="ALL", measure_every=12),
    "negativity": dict(
        steps=600,
        initial="A;glider_BC:0;double_wall:0",
        measure="negativity:adjacent,negativity:disjoint",
        measure_every=3,
    ),
    "loschmidt": dict(steps=150, measure_every=1),
    "dispersion": dict(n_default=100),
    "fidelity": dict(steps=3000, initial="A", measure="fidelity_A", measure_every=3),
    "rate_function": dict(steps=2000, initial="mode:0,0,0", measure_every=3),
}


def resolve_config(cfg: ExperimentConfig) -> ExperimentConfig:
    """Fill scenario defaults and validate completeness; raises ValueError."""
    if cfg.scenario not in SCENARIOS:
        raise ValueError(f"unknown scenario {cfg.scenario!r}")
    slot = dict(_DEFAULTS[cfg.scenario])
    updates = {}
    if cfg.steps == 0 and "steps" in slot:
        updates["steps"] = slot["steps"]
    if not cfg.initial and "initial" in slot:
        updates["initial"] = slot["initial"]
    if not cfg.measure and "measure" in slot:
        updates["measure"] = slot["measure"]
    if cfg.measure_every == 0:
        updates["measure_every"] = slot.get("measure_every", 1)
    out = dataclasses.replace(cfg, **updates)

    if out.n_sites < 4 or out.n_sites % 2:
        raise ValueError("n_sites must be even and at least 4")
    if out.steps < 0:
        raise ValueError("steps must be nonnegative")
    if out.measure_every < 1:
        raise ValueError("measure_every must be positive")
    if out.epsilon < 0:
        raise ValueError("epsilon must be nonnegative")

    if out.scenario == "sweep":
        if initial_specs(out.initial) != ["ALL"]:
            raise ValueError("sweep runs the whole basis; set initial to ALL")
    elif out.scenario == "spectrum_stats":
        for spec in initial_specs(out.initial):
            if spec != "A" and not spec.startswith("glider_"):
                raise ValueError("spectrum_stats takes A or glider initial states")
        if not out.center_times:
            out = dataclasses.replace(out, center_times=[1000])
    elif out.scenario == "concurrence":
        pairs = out.pairs or [[5, 7]]
        for pair in pairs:
            if len(pair) != 2:
                raise ValueError("each concurrence pair needs exactly two sites")
        out = dataclasses.replace(out, pairs=pairs)
    elif out.scenario in ("loschmidt", "rate_function"):
        sizes = [int(s) for s in (out.sizes or [out.n_sites])]
        for size in sizes:
            if not 0 <= out.k_index < size // 2:
                raise ValueError(f"k_index {out.k_index} out of range for {size} sites")
        out = dataclasses.replace(out, sizes=sizes)
    elif out.scenario == "dispersion":
        if out.epsilon_scan and any(e <= 0 for e in out.epsilon_scan):
            raise ValueError("epsilon_scan values must be positive")
        for idx in [int(i) for i in (out.k_indices or [out.k_index])]:
            if not 0 <= idx < out.n_sites // 2:
                raise ValueError(f"momentum index {idx} out of range")
    return out


def initial_specs(value) -> list[str]:
    """Split an initial-state field into individual spec strings."""
    if isinstance(value, (list, tuple)):
        return [str(v).strip() for v in value]
    return [part.strip() for part in str(value).split(";") if part.strip()]


def parse_initial_config(spec: str, n_sites: int):
    """Named configuration grammar: A, B_vac, C_vac, double_wall:x,
    glider_BC:x, glider_CB:x, composite:kind@x+kind@x."""
    spec = spec.strip()
    if spec in ("A", "B_vac", "C_vac"):
        return make_named_state(spec, n_sites=n_sites)
    kind, _, arg = spec.partition(":")
    if kind in ("double_wall", "glider_BC", "glider_CB"):
        return make_named_state(kind, int(arg), n_sites=n_sites)
    if kind == "composite":
        parts = []
        for token in arg.split("+"):
            sub, _, pos = token.partition("@")
            parts.append((sub.strip(), int(pos)))
        return make_named_state("composite", parts, n_sites=n_sites)
    raise ValueError(f"unknown initial state spec {spec!r}")


def parse_initial(spec: str, basis: FibonacciBasis) -> StateVector:
    """Build the starting vector; mode:left,right,n is the traveling
    plane-wave glider over the momentum grid, everything else a config."""
    spec = spec.strip()
    if spec.startswith("mode:"):
        try:
            left, right, idx = (int(p) for p in spec[5:].split(","))
        except ValueError as exc:
            raise ValueError(f"bad mode spec {spec!r}") from exc
        grid = momentum_values(basis.n_sites)
        if not 0 <= idx < grid.size:
            raise ValueError(f"momentum index {idx} out of range")
        return build_lrk(GliderIndex(left, right, float(grid[idx]), basis.n_sites), basis)
    return StateVector.from_config(basis, parse_initial_config(spec, basis.n_sites))


def _slug(spec: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", spec).strip("_")


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        # non-finite sentinel (saturated rate function) prints as empty
        return "%.17g" % v if math.isfinite(v) else ""
    return str(value)


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _sample_times(steps: int, every: int) -> list[int]:
    times = list(range(0, steps + 1, every))
    if times[-1] != steps:
        times.append(steps)
    return times


# ---------------------------------------------------------------- measurements

_PROFILE, _SCALAR, _RAGGED = "profile", "scalar", "ragged"


@dataclass
class _Measure:
    name: str  # column or file stem
    kind: str
    fn: object


def _split_measures(text) -> list[str]:
    """Split a comma-joined measure list, keeping concurrence:x,y intact."""
    if isinstance(text, (list, tuple)):
        return [str(t).strip() for t in text]
    tokens = [t.strip() for t in str(text).split(",") if t.strip()]
    merged = []
    for token in tokens:
        if merged and re.fullmatch(r"concurrence:\d+", merged[-1]):
            merged[-1] = merged[-1] + "," + token
        else:
            merged.append(token)
    return merged


def _cached_profile(state, cache):
    if "tangle_profile" not in cache:
        cache["tangle_profile"] = tangle_profile(state)
    return cache["tangle_profile"]


def _build_measure(spec: str, cfg: ExperimentConfig, basis: FibonacciBasis) -> _Measure:
    base, _, arg = spec.partition(":")
    n = basis.n_sites
    if base == "tangle_profile":
        return _Measure("tangle_profile", _PROFILE, lambda s, c: _cached_profile(s, c))
    if base == "spin_z_profile":
        return _Measure("spin_z_profile", _PROFILE, lambda s, c: spin_z_profile(s))
    if base == "q":
        return _Measure("q", _SCALAR, lambda s, c: float(np.mean(_cached_profile(s, c))))
    if base == "entropy_half":
        return _Measure("entropy_half", _SCALAR, lambda s, c: entropy(schmidt_spectrum(s)))
    if base == "ipr":
        return _Measure("ipr", _SCALAR, lambda s, c: ipr(s))
    if base == "fidelity_A":
        target = make_named_state("A", n_sites=n)
        return _Measure("fidelity_A", _SCALAR, lambda s, c: fidelity(s, target))
    if base == "concurrence":
        x, y = (int(p) for p in arg.split(","))
        fn = lambda s, c: concurrence(reduced_density(s, [x, y]))
        return _Measure(f"concurrence_{x}_{y}", _SCALAR, fn)
    if base == "negativity":
        part_a, part_b = _negativity_sites(arg, cfg, n)
        sites = list(part_a) + list(part_b)
        split = len(part_a)
        fn = lambda s, c: negativity(reduced_density(s, sites, split=split))
        return _Measure(f"negativity_{arg}", _SCALAR, fn)
    if base == "spectrum_r":
        def ragged(s, c):
            try:
                return r_statistics(schmidt_spectrum(s))
            except ValueError:
                return np.empty(0)  # fewer than 3 retained levels
        return _Measure("spectrum_r", _RAGGED, ragged)
    raise ValueError(f"unknown measurement {spec!r}")


def _negativity_sites(arg: str, cfg: ExperimentConfig, n: int):
    if arg == "adjacent":
        override = cfg.subsystem_adjacent
        default = (list(range(0, 5)), list(range(5, 10)))
    elif arg == "disjoint":
        override = cfg.subsystem_disjoint
        default = (list(range(0, 5)), list(range(n // 2, n // 2 + 5)))
    else:
        raise ValueError(f"negativity subsystem must be adjacent or disjoint, not {arg!r}")
    if override is not None:
        part_a, part_b = ([int(x) for x in half] for half in override)
    else:
        part_a, part_b = default
    if set(part_a) & set(part_b):
        raise ValueError("negativity subsystems overlap")
    return part_a, part_b


def _measured_run(cfg: ExperimentConfig, spec: str, outdir: Path) -> list[str]:
    """Evolve one initial state, measuring on the sampling schedule."""
    basis = build_basis(cfg.n_sites)
    state = parse_initial(spec, basis)
    measures = [_build_measure(m, cfg, basis) for m in _split_measures(cfg.measure)]
    params = StepParams(epsilon=cfg.epsilon)
    times = set(_sample_times(cfg.steps, cfg.measure_every))

    scalar_cols = [m for m in measures if m.kind == _SCALAR]
    profiles = [m for m in measures if m.kind == _PROFILE]
    ragged = [m for m in measures if m.kind == _RAGGED]
    scalar_rows = []
    profile_rows = {m.name: [] for m in profiles}
    ragged_rows = {m.name: [] for m in ragged}

    def record(t):
        cache = {}
        if scalar_cols:
            scalar_rows.append([t] + [m.fn(state, cache) for m in scalar_cols])
        for m in profiles:
            profile_rows[m.name].append([t] + list(m.fn(state, cache)))
        for m in ragged:
            for value in m.fn(state, cache):
                ragged_rows[m.name].append([t, value])

    record(0)
    for t in range(1, cfg.steps + 1):
        step(state, params)
        if t in times:
            record(t)

    slug = _slug(spec)
    written = []
    if scalar_cols:
        name = f"measurements_{slug}.csv"
        write_csv(outdir / name, ["t"] + [m.name for m in scalar_cols], scalar_rows)
        written.append(name)
    site_cols = [f"site_{x}" for x in range(cfg.n_sites)]
    for m in profiles:
        name = f"{m.name}_{slug}.csv"
        write_csv(outdir / name, ["t"] + site_cols, profile_rows[m.name])
        written.append(name)
    for m in ragged:
        name = f"{m.name}_{slug}.csv"
        write_csv(outdir / name, ["t", "r"], ragged_rows[m.name])
        written.append(name)
    return written


# ------------------------------------------------------------------- scenarios

def _run_propagation(cfg: ExperimentConfig, outdir: Path) -> list[str]:
    written = []
    for spec in initial_specs(cfg.initial):
        written += _measured_run(cfg, spec, outdir)
    return written


def _run_fidelity(cfg, outdir):
    return _run_propagation(cfg, outdir)


def _run_negativity(cfg, outdir):
    return _run_propagation(cfg, outdir)


def _run_concurrence(cfg: ExperimentConfig, outdir: Path) -> list[str]:
    measure = ",".join(f"concurrence:{x},{y}" for x, y in cfg.pairs)
    cfg = dataclasses.replace(cfg, measure=measure)
    return _run_propagation(cfg, outdir)


def _sweep_worker(task):
    n, epsilon, steps, every, fraction, index = task
    basis = build_basis(n)
    amps = np.zeros(basis.dim, dtype=np.complex128)
    amps[index] = 1.0
    state = StateVector(basis, amps)
    params = StepParams(epsilon=epsilon)
    samples = [(0, entropy(schmidt_spectrum(state)))]
    for t in range(1, steps + 1):
        step(state, params)
        if t % every == 0 or t == steps:
            samples.append((t, entropy(schmidt_spectrum(state))))
    final = samples[-1][1]
    steady = next(t for t, s in samples if s >= fraction * final)
    return (
        index,
        basis.bit_string(index),
        int(_wall_count_masks(basis.configs[index], n)),
        final,
        float(-np.log(ipr(state))),
        steady,
    )


def sweep_all_configs(cfg: ExperimentConfig) -> list[SweepRecord]:
    """Evolve every basis configuration and classify the outcome.

    Work is farmed out one configuration per task; the output order is
    the basis order regardless of worker scheduling.
    """
    cfg = resolve_config(cfg)
    if cfg.scenario != "sweep":
        raise ValueError("sweep_all_configs requires the sweep scenario")
    basis = build_basis(cfg.n_sites)
    tasks = [
        (cfg.n_sites, cfg.epsilon, cfg.steps, cfg.measure_every, cfg.steady_fraction, i)
        for i in range(basis.dim)
    ]
    workers = cfg.workers or os.cpu_count() or 1
    if workers > 1:
        ctx = multiprocessing.get_context("fork")
        chunk = max(1, basis.dim // (workers * 8))
        with ctx.Pool(workers) as pool:
            raw = pool.map(_sweep_worker, tasks, chunksize=chunk)
    else:
        raw = [_sweep_worker(t) for t in tasks]
    return [SweepRecord(*row) for row in raw]


def _run_sweep(cfg: ExperimentConfig, outdir: Path) -> list[str]:
    records = sweep_all_configs(cfg)
    rows = [dataclasses.astuple(rec) for rec in records]
    header = [f.name for f in dataclasses.fields(SweepRecord)]
    write_csv(outdir / "sweep.csv", header, rows)
    return ["sweep.csv"]


def spectrum_stats_scenario(cfg: ExperimentConfig, outdir=None):
    """Entanglement-spectrum spacing histograms near configured times.

    For each initial state and center time, r values are pooled from 10
    consecutive period-3 samples; the histogram uses 25 uniform bins on
    [0, 1], density-normalized, with reference curves alongside.
    """
    cfg = resolve_config(cfg)
    if cfg.scenario != "spectrum_stats":
        raise ValueError("spectrum_stats_scenario requires the spectrum_stats scenario")
    outdir = Path(outdir) if outdir is not None else Path(cfg.output_dir)
    basis = build_basis(cfg.n_sites)
    params = StepParams(epsilon=cfg.epsilon)
    edges = np.linspace(0.0, 1.0, 26)
    centers = 0.5 * (edges[:-1] + edges[1:])
    written, summary_rows, summaries = [], [], []

    for spec in initial_specs(cfg.initial):
        for center in [int(c) for c in cfg.center_times]:
            first = 3 * max(1, round(center / 3) - 4)
            sample_at = {first + 3 * j for j in range(10)}
            last = max(sample_at)
            state = parse_initial(spec, basis)
            pooled = []
            for t in range(1, last + 1):
                step(state, params)
                if t in sample_at:
                    pooled.append(r_statistics(schmidt_spectrum(state)))
            values = np.concatenate(pooled)
            density, _ = np.histogram(values, bins=edges, density=True)
            mean_r = float(np.mean(values))
            name = f"spectrum_hist_{_slug(spec)}_t{center}.csv"
            write_csv(
                outdir / name,
                ["bin_center", "density", "poisson", "goe"],
                [
                    [centers[i], density[i],
                     reference_pdf("poisson", centers[i]), reference_pdf("goe", centers[i])]
                    for i in range(len(centers))
                ],
            )
            written.append(name)
            summary_rows.append([spec, center, values.size, mean_r])
            summaries.append(
                {"initial": spec, "center_time": center, "samples": int(values.size),
                 "mean_r": mean_r}
            )
    write_csv(
        outdir / "spectrum_summary.csv",
        ["initial", "center_time", "r_count", "mean_r"],
        summary_rows,
    )
    written.append("spectrum_summary.csv")
    return summaries, written


def _run_spectrum_stats(cfg, outdir):
    _, written = spectrum_stats_scenario(cfg, outdir)
    return written


def _run_loschmidt(cfg: ExperimentConfig, outdir: Path) -> list[str]:
    delta = cfg.epsilon2 - cfg.epsilon1
    if cfg.analytic_only:
        z = np.linspace(0.0, cfg.z_max, cfg.z_points)
        ks = [float(k) for k in (cfg.k_points or [0.0])]
        cols = {f"echo_k{i}": loschmidt_analytic(z, k=k) for i, k in enumerate(ks)}
        rows = [[z[j]] + [cols[c][j] for c in cols] + [loschmidt_gaussian(z[j])]
                for j in range(z.size)]
        write_csv(outdir / "echo_analytic.csv", ["z"] + list(cols) + ["gaussian"], rows)
        return ["echo_analytic.csv"]

    units = cfg.steps  # three automaton steps per unit
    sampled = _sample_times(units, cfg.measure_every)
    echoes = {}
    for size in cfg.sizes:
        basis = build_basis(size)
        grid = momentum_values(size)
        g = GliderIndex(cfg.mode_left, cfg.mode_right, float(grid[cfg.k_index]), size)
        start = build_lrk(g, basis)
        s1, s2 = start.copy(), start.copy()
        p1, p2 = StepParams(epsilon=cfg.epsilon1), StepParams(epsilon=cfg.epsilon2)
        series = {0: 1.0}
        for unit in range(1, units + 1):
            for _ in range(3):
                step(s1, p1)
                step(s2, p2)
            if unit in sampled or unit == units:
                series[unit] = float(abs(s2.overlap(s1)) ** 2)
        echoes[size] = series
    rows = []
    for unit in sampled:
        z = delta * unit
        rows.append(
            [unit, z]
            + [echoes[size][unit] for size in cfg.sizes]
            + [float(loschmidt_analytic(z)), loschmidt_gaussian(z)]
        )
    header = ["t", "z"] + [f"echo_n{size}" for size in cfg.sizes] + ["analytic", "gaussian"]
    write_csv(outdir / "loschmidt.csv", header, rows)
    return ["loschmidt.csv"]


def _run_dispersion(cfg: ExperimentConfig, outdir: Path) -> list[str]:
    n = cfg.n_sites
    grid = momentum_values(n)
    if cfg.epsilon_scan:
        k = float(grid[cfg.k_index])
        basis = build_basis(n)
        matrix_evals = np.sort(np.linalg.eigvalsh(hbc_matrix(n, k).entries))
        rows = []
        for eps in cfg.epsilon_scan:
            exact = glider_sector_quasienergies(n, k, float(eps), basis)
            rows.append([eps] + list(exact) + list(eps * matrix_evals))
        count = matrix_evals.size
        header = (
            ["epsilon"]
            + [f"exact_{j}" for j in range(count)]
            + [f"perturbative_{j}" for j in range(count)]
        )
        write_csv(outdir / "quasienergy_scan.csv", header, rows)
        return ["quasienergy_scan.csv"]

    indices = [int(i) for i in (cfg.k_indices or [cfg.k_index])]
    rows = []
    for idx in indices:
        k = float(grid[idx])
        modes = sorted(mode_grid(n, k), key=first_order_energy)
        numeric = np.sort(np.linalg.eigvalsh(hbc_matrix(n, k).entries))
        for rank, m in enumerate(modes):
            rows.append([k, m.q1, m.q2, first_order_energy(m), numeric[rank]])
    write_csv(
        outdir / "dispersion.csv",
        ["k", "q1", "q2", "E_first_order", "E_numeric"],
        rows,
    )
    return ["dispersion.csv"]


def _run_rate_function(cfg: ExperimentConfig, outdir: Path) -> list[str]:
    specs = initial_specs(cfg.initial)
    if len(specs) != 1:
        raise ValueError("rate_function takes a single initial state")
    written = []
    delta = cfg.epsilon2 - cfg.epsilon1
    for size in cfg.sizes:
        basis = build_basis(size)
        start = parse_initial(specs[0], basis)
        s1, s2 = start.copy(), start.copy()
        p1, p2 = StepParams(epsilon=cfg.epsilon1), StepParams(epsilon=cfg.epsilon2)
        times = set(_sample_times(cfg.steps, cfg.measure_every))
        rows = [[0, 0.0, 1.0, 0.0, global_Q(s2)]]
        for t in range(1, cfg.steps + 1):
            step(s1, p1)
            step(s2, p2)
            if t in times:
                echo = float(abs(s2.overlap(s1)) ** 2)
                # z counts three-step units to match the analytic echo
                rows.append([t, delta * t / 3.0, echo, rate_function(echo, size), global_Q(s2)])
        name = f"rate_function_n{size}.csv"
        write_csv(outdir / name, ["t", "z", "echo", "rate", "q"], rows)
        written.append(name)
    return written


_RUNNERS = {
    "propagation": _run_propagation,
    "concurrence": _run_concurrence,
    "spectrum_stats": _run_spectrum_stats,
    "sweep": _run_sweep,
    "negativity": _run_negativity,
    "loschmidt": _run_loschmidt,
    "dispersion": _run_dispersion,
    "fidelity": _run_fidelity,
    "rate_function": _run_rate_function,
}


def run_scenario(cfg: ExperimentConfig) -> dict:
    """Run one scenario to CSV files plus a run_manifest.json."""
    cfg = resolve_config(cfg)
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    begun = time.monotonic()
    outputs = _RUNNERS[cfg.scenario](cfg, outdir)
    from . import __version__

    manifest = {
        "scenario": cfg.scenario,
        "parameters": cfg.resolved(),
        "package_version": __version__,
        "kernel": "compiled" if COMPILED_KERNEL else "python",
        "wall_clock_seconds": round(time.monotonic() - begun, 3),
        "outputs": outputs,
    }
    with open(outdir / "run_manifest.json", "w", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


# --------------------------------------------------------------------- presets

PRESETS = {
    "classical-glider-trajectories": {
        "description": "Exact automaton trajectories of the vacuum, a double wall, "
        "and a glider, as spin-z profiles.",
        "config": dict(scenario="propagation", n_sites=20, epsilon=0.0, steps=60,
                       initial="A;double_wall:0;glider_BC:0", measure="spin_z_profile",
                       measure_every=1),
    },
    "echo-glider-small-couplings": {
        "description": "Numeric echo between two small detunings for three chain "
        "sizes against the analytic mode-continuum echo.",
        "config": dict(scenario="loschmidt", sizes=[14, 16, 18], epsilon1=0.001,
                       epsilon2=0.002, steps=1000, measure_every=5),
    },
    "entanglement-propagation": {
        "description": "Tangle maps and mean entanglement for vacuum, double-wall, "
        "and glider starts.",
        "config": dict(scenario="propagation", n_sites=20, epsilon=0.01, steps=600,
                       initial="A;double_wall:0;glider_BC:0"),
    },
    "glider-concurrence-passages": {
        "description": "Two-site concurrence pulsing at each passage of a glider.",
        "config": dict(scenario="concurrence", n_sites=20, epsilon=0.01, steps=300,
                       initial="glider_BC:0", pairs=[[5, 7]], measure_every=3),
    },
    "entanglement-spectrum-statistics": {
        "description": "Spacing-ratio histograms of the entanglement spectrum for "
        "vacuum and glider starts, desk size.",
        "config": dict(scenario="spectrum_stats", n_sites=18, epsilon=0.01,
                       initial="A;glider_BC:0", center_times=[1000]),
    },
    "entanglement-spectrum-statistics-large": {
        "description": "Same spacing-ratio histograms at the publication size "
        "(hours of runtime).",
        "config": dict(scenario="spectrum_stats", n_sites=26, epsilon=0.01,
                       initial="A;glider_BC:0", center_times=[1000]),
    },
    "entropy-stratification": {
        "description": "Full-basis sweep: half-chain entropy and participation "
        "layering by domain-wall count.",
        "config": dict(scenario="sweep", n_sites=18, epsilon=0.01, steps=1200,
                       measure_every=12),
    },
    "entropy-stratification-desk": {
        "description": "The same sweep at a size that finishes in minutes.",
        "config": dict(scenario="sweep", n_sites=14, epsilon=0.01, steps=1200,
                       measure_every=12),
    },
    "entropy-stratification-intermediate-coupling": {
        "description": "Sweep at tenfold detuning, where the layering blurs.",
        "config": dict(scenario="sweep", n_sites=18, epsilon=0.1, steps=600,
                       measure_every=12),
    },
    "entropy-stratification-strong-coupling": {
        "description": "Sweep far from the automaton point; no stratification.",
        "config": dict(scenario="sweep", n_sites=18, epsilon=1.0, steps=900,
                       measure_every=12),
    },
    "negativity-locality": {
        "description": "Adjacent versus disjoint-subsystem negativity for vacuum, "
        "glider, and double-wall starts.",
        "config": dict(scenario="negativity", n_sites=20, epsilon=0.01, steps=600,
                       initial="A;glider_BC:0;double_wall:0", measure_every=3),
    },
    "glider-spin-pattern": {
        "description": "Spin-z and tangle profiles tracing the glider world line.",
        "config": dict(scenario="propagation", n_sites=20, epsilon=0.01, steps=600,
                       initial="glider_BC:0", measure="spin_z_profile,tangle_profile",
                       measure_every=3),
    },
    "sector-quasienergy-scan": {
        "description": "Exact versus first-order sector quasienergies as the "
        "detuning grows.",
        "config": dict(scenario="dispersion", n_sites=18, k_index=2,
                       epsilon_scan=[1e-5, 2e-5, 5e-5, 1e-4, 2e-4, 5e-4,
                                     1e-3, 2e-3, 5e-3, 1e-2]),
    },
    "first-order-spectrum-large-chain": {
        "description": "Sorted first-order mode energies against the hopping-matrix "
        "spectrum on a long chain.",
        "config": dict(scenario="dispersion", n_sites=100, k_indices=[0, 40]),
    },
    "analytic-echo-momentum-scan": {
        "description": "Analytic echo curves at several ring momenta.",
        "config": dict(scenario="loschmidt", analytic_only=True, z_max=1.0,
                       z_points=201, k_points=[0.0, 0.7853981633974483,
                                               1.5707963267948966, 3.141592653589793]),
    },
    "echo-rate-kinks": {
        "description": "Echo rate function and mean entanglement along one "
        "trajectory, two sizes.",
        "config": dict(scenario="rate_function", sizes=[16, 18], epsilon1=0.0,
                       epsilon2=0.001, steps=2000, initial="mode:0,0,0",
                       measure_every=3),
    },
    "double-wall-concurrence": {
        "description": "Concurrence pulses from the slower double-wall fronts.",
        "config": dict(scenario="concurrence", n_sites=20, epsilon=0.01, steps=300,
                       initial="double_wall:0", pairs=[[7, 11]], measure_every=3),
    },
    "vacuum-spectrum-peak-vs-dip": {
        "description": "Spacing statistics of the vacuum trajectory at an "
        "entanglement maximum and at the following minimum.",
        "config": dict(scenario="spectrum_stats", n_sites=18, epsilon=0.01,
                       initial="A", center_times=[603, 903]),
    },
    "vacuum-revival-fidelity": {
        "description": "Return probability of the empty chain, sampled each cycle.",
        "config": dict(scenario="fidelity", n_sites=20, epsilon=0.01, steps=3000,
                       initial="A", measure_every=3),
    },
    "long-time-entropy-saturation": {
        "description": "Half-chain entropy out to long times for single and "
        "interacting quasiparticles.",
        "config": dict(scenario="propagation", n_sites=18, epsilon=0.01, steps=6000,
                       initial="glider_BC:0;double_wall:0;composite:glider_BC@0+glider_CB@2",
                       measure="entropy_half,q", measure_every=3),
    },
}


def preset_config(name: str, output_dir=None) -> ExperimentConfig:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}")
    data = dict(PRESETS[name]["config"])
    if output_dir is not None:
        data["output_dir"] = str(output_dir)
    return ExperimentConfig.from_mapping(data)


# ------------------------------------------------------------- CLI table dumps

def basis_rows(n_sites: int):
    """(index, bits, wall_count) over the whole basis."""
    basis = build_basis(n_sites)
    walls = _wall_count_masks(basis.configs, n_sites)
    return [
        (i, basis.bit_string(i), int(walls[i]))
        for i in range(basis.dim)
    ]


def cycle_rows(n_sites: int):
    """(cycle_id, length, representative_bits) over the automaton orbits."""
    basis = build_basis(n_sites)
    rows = []
    for cid, cycle in enumerate(find_cycles(basis)):
        rows.append((cid, cycle.length, basis.bit_string(cycle.members[0])))
    return rows


def evolve_command(n_sites, epsilon, steps, initial, measure, every, out_path) -> list[str]:
    """One measured evolution with an explicit scalar-CSV destination."""
    out_path = Path(out_path)
    cfg = resolve_config(
        ExperimentConfig(
            scenario="propagation",
            n_sites=n_sites,
            epsilon=epsilon,
            steps=steps,
            initial=initial,
            measure=measure,
            measure_every=every,
            output_dir=str(out_path.parent),
        )
    )
    specs = initial_specs(cfg.initial)
    if len(specs) != 1:
        raise ValueError("evolve takes a single initial state")
    written = _measured_run(cfg, specs[0], out_path.parent)
    renamed = []
    slug = _slug(specs[0])
    for name in written:
        src = out_path.parent / name
        if name == f"measurements_{slug}.csv":
            dst = out_path
        else:
            prefix = name[: -len(f"_{slug}.csv")]
            dst = out_path.parent / f"{out_path.stem}_{prefix}.csv"
        os.replace(src, dst)
        renamed.append(str(dst))
    return renamed
