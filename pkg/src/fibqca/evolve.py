"""In-place state evolution under the staggered gate circuit.

One full step applies the three-site gate to every even site, then to
every odd site. Gates on one sublattice commute, so each sublayer is a
single sweep over precomputed amplitude pairs. The sweep itself runs in
the compiled kernel when available and in numpy otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .basis import FibonacciBasis, SpinConfig, _rotl

try:
    from . import _kernel as kernel
except ImportError:
    from . import _kernel_py as kernel

COMPILED_KERNEL = kernel.COMPILED


@dataclass(frozen=True)
class StepParams:
    """Gate angle bookkeeping: theta = pi/2 - epsilon holds exactly.

    epsilon is primary. The gate mixing coefficients are derived as
    cos(theta) = sin(epsilon) and sin(theta) = cos(epsilon), so the
    deterministic limit epsilon = 0 is reached without rounding.
    """

    epsilon: float
    theta: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "theta", math.pi / 2 - self.epsilon)

    @classmethod
    def from_theta(cls, theta: float) -> "StepParams":
        return cls(epsilon=math.pi / 2 - theta)

    @property
    def cos_theta(self) -> float:
        return math.sin(self.epsilon)

    @property
    def sin_theta(self) -> float:
        return math.cos(self.epsilon)


@dataclass
class StateVector:
    """Complex amplitudes over one FibonacciBasis."""

    basis: FibonacciBasis
    amps: np.ndarray

    @classmethod
    def zero(cls, basis: FibonacciBasis) -> "StateVector":
        return cls(basis, np.zeros(basis.dim, dtype=np.complex128))

    @classmethod
    def from_config(cls, basis: FibonacciBasis, config: SpinConfig | int) -> "StateVector":
        state = cls.zero(basis)
        state.amps[basis.index_of(config)] = 1.0
        return state

    def copy(self) -> "StateVector":
        return StateVector(self.basis, self.amps.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def overlap(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amps, other.amps))


class PairTables:
    """Per-site amplitude pairs activated by the gate, for one basis.

    For site x the gate mixes configurations whose neighbors of x are both
    empty; i0 lists the basis indices with site x empty, i1 the partners
    with site x occupied. The flattened layout groups sites of one
    sublattice behind an offsets array, which is what the kernels consume.
    """

    def __init__(self, basis: FibonacciBasis):
        n = basis.n_sites
        configs = basis.configs
        self.n_sites = n
        self.site_pairs = []
        for x in range(n):
            neighbors = _rotl(np.int64(1), x - 1, n) | _rotl(np.int64(1), x + 1, n)
            here = np.int64(1 << x)
            sel = ((configs & neighbors) == 0) & ((configs & here) == 0)
            i0 = np.nonzero(sel)[0].astype(np.int64)
            i1 = basis.indices_of(configs[i0] | here).astype(np.int64)
            self.site_pairs.append((i0, i1))
        self.even = self._flatten(range(0, n, 2))
        self.odd = self._flatten(range(1, n, 2))

    def _flatten(self, sites):
        i0s, i1s, offsets = [], [], [0]
        for x in sites:
            i0, i1 = self.site_pairs[x]
            i0s.append(i0)
            i1s.append(i1)
            offsets.append(offsets[-1] + len(i0))
        return (
            np.ascontiguousarray(np.concatenate(i0s)),
            np.ascontiguousarray(np.concatenate(i1s)),
            np.array(offsets, dtype=np.int64),
        )


def pair_tables(basis: FibonacciBasis) -> PairTables:
    """Build (and memoize on the basis) the pair tables."""
    tables = getattr(basis, "_pair_tables", None)
    if tables is None:
        tables = PairTables(basis)
        basis._pair_tables = tables
    return tables


def apply_gate(state: StateVector, params: StepParams, x: int) -> StateVector:
    """Apply the single-site gate at site x, in place."""
    i0, i1 = pair_tables(state.basis).site_pairs[x % state.basis.n_sites]
    offsets = np.array([0, len(i0)], dtype=np.int64)
    kernel.apply_pairs(state.amps, i0, i1, offsets, params.cos_theta, params.sin_theta)
    return state


def step(state: StateVector, params: StepParams) -> StateVector:
    """One full automaton step, in place: even sublayer then odd."""
    tables = pair_tables(state.basis)
    c, s = params.cos_theta, params.sin_theta
    kernel.apply_pairs(state.amps, *tables.even, c, s)
    kernel.apply_pairs(state.amps, *tables.odd, c, s)
    return state


def step_backward(state: StateVector, params: StepParams) -> StateVector:
    """Inverse step, in place: adjoint odd sublayer then adjoint even."""
    tables = pair_tables(state.basis)
    c, s = params.cos_theta, params.sin_theta
    kernel.apply_pairs(state.amps, *tables.odd, c, -s)
    kernel.apply_pairs(state.amps, *tables.even, c, -s)
    return state


def evolve(state: StateVector, params: StepParams, t: int) -> Iterator[tuple[int, StateVector]]:
    """Stream (step_index, state) for steps 0..t; the state is shared, not copied."""
    yield 0, state
    for n in range(1, t + 1):
        step(state, params)
        yield n, state


def evolve_backward(state: StateVector, params: StepParams, t: int) -> Iterator[tuple[int, StateVector]]:
    """Stream the inverse evolution, same contract as evolve."""
    yield 0, state
    for n in range(1, t + 1):
        step_backward(state, params)
        yield n, state
