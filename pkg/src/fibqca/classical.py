"""Deterministic limit of the automaton and states built from its orbits.

At the special gate angle the staggered update permutes configurations:
site x toggles exactly when both neighbors are empty, evaluated on the
configuration entering the sublayer (even sites first, then odd). Each
toggle contributes a factor -1j to the quantum amplitude, so orbits of the
permutation carry exactly solvable eigenstates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import FibonacciBasis, SpinConfig, _popcount, _rotl


@dataclass
class ClassicalStep:
    """Permutation table for one full step plus per-config toggle counts."""

    permutation: np.ndarray
    flip_count: np.ndarray


@dataclass
class Cycle:
    """One orbit of the permutation, members in visit order."""

    members: np.ndarray

    @property
    def length(self) -> int:
        return len(self.members)


def _sublayer_masks(masks, n: int, even: bool):
    """Toggle every sublattice site whose neighbors are both empty.

    Neighbor occupations live on the opposite sublattice, so they are
    unaffected by the toggles and can be read from the input masks.
    """
    parity_mask = sum(1 << x for x in range(0 if even else 1, n, 2))
    left = _rotl(masks, 1, n)
    right = _rotl(masks, -1, n)
    free = ~(left | right) & parity_mask
    return masks ^ free, _popcount(free)


def classical_step_masks(masks, n: int):
    """Mask image and toggle count of one full step, vectorized."""
    after_even, flips_even = _sublayer_masks(masks, n, even=True)
    after_odd, flips_odd = _sublayer_masks(after_even, n, even=False)
    return after_odd, flips_even + flips_odd


def classical_step(basis: FibonacciBasis) -> ClassicalStep:
    """Tabulate the permutation over the whole basis."""
    out_masks, flips = classical_step_masks(basis.configs, basis.n_sites)
    return ClassicalStep(basis.indices_of(out_masks), flips.astype(np.int64))


def find_cycles(basis: FibonacciBasis, step: ClassicalStep | None = None) -> list[Cycle]:
    """Decompose the permutation into cycles.

    Cycles are listed by their smallest member, each starting from that
    member, so the decomposition is deterministic.
    """
    if step is None:
        step = classical_step(basis)
    perm = step.permutation
    seen = np.zeros(basis.dim, dtype=bool)
    cycles = []
    for start in range(basis.dim):
        if seen[start]:
            continue
        members = [start]
        seen[start] = True
        i = int(perm[start])
        while i != start:
            members.append(i)
            seen[i] = True
            i = int(perm[i])
        cycles.append(Cycle(np.array(members, dtype=np.int64)))
    return cycles


def cycle_eigenstate(basis: FibonacciBasis, cycle: Cycle, p: int) -> np.ndarray:
    """Fourier mode of an orbit, with the toggle phases folded in.

    Member l of the cycle receives e^{2 pi i p l / length} times the
    accumulated (-1j)^toggles phase of reaching it, making the vector an
    exact eigenstate of the quantum step taken length times.
    """
    step = classical_step(basis)
    ell = cycle.length
    amps = np.zeros(basis.dim, dtype=np.complex128)
    phase = 1.0 + 0.0j
    for l, i in enumerate(cycle.members):
        amps[i] = np.exp(2j * np.pi * p * l / ell) * phase
        phase *= (-1j) ** int(step.flip_count[i])
    amps /= np.sqrt(ell)
    return amps


def vacuum_masks(n: int) -> tuple[int, int, int]:
    """The empty ring and the two saturated coverings (even and odd sites)."""
    even_mask = sum(1 << x for x in range(0, n, 2))
    odd_mask = sum(1 << x for x in range(1, n, 2))
    return 0, even_mask, odd_mask


def make_named_state(kind: str, params=None, *, n_sites: int) -> SpinConfig:
    """Construct standard defect configurations over the empty background.

    kind is one of A, B_vac, C_vac, double_wall, glider_BC, glider_CB,
    composite. double_wall takes a site; the gliders take a position whose
    occupations sit at sites 2x and 2x+3 (BC) or its mirror (CB); composite
    takes a list of (kind, position) pairs merged onto one ring.
    """
    a, b, c = vacuum_masks(n_sites)
    if kind == "A":
        return SpinConfig(a, n_sites)
    if kind == "B_vac":
        return SpinConfig(b, n_sites)
    if kind == "C_vac":
        return SpinConfig(c, n_sites)
    if kind == "composite":
        mask = 0
        for sub_kind, pos in params:
            part = make_named_state(sub_kind, pos, n_sites=n_sites).bits
            if mask & part:
                site = int(mask & part).bit_length() - 1
                raise ValueError(f"overlapping patterns at site {site}")
            mask |= part
        return SpinConfig(mask, n_sites)  # adjacency is validated here
    if kind not in ("double_wall", "glider_BC", "glider_CB"):
        raise ValueError(f"unknown state kind: {kind}")
    x = int(params)
    if kind == "double_wall":
        return SpinConfig(1 << (x % n_sites), n_sites)
    if kind == "glider_BC":
        return SpinConfig(glider_mask(x, 0, 0, n_sites), n_sites)
    if kind == "glider_CB":
        sites = [(2 * x) % n_sites, (2 * x + 3) % n_sites]
        mirrored = sum(1 << ((n_sites - s - 2) % n_sites) for s in sites)
        return SpinConfig(mirrored, n_sites)
    raise ValueError(f"unknown state kind: {kind}")


def glider_mask(x: int, left: int, right: int, n: int) -> int:
    """Occupation mask of a widened glider at position x.

    The core pattern occupies sites 2x and 2x+3; left/right extend it by
    additional occupations at even sites below and odd sites above.
    """
    mask = 0
    for l in range(left + 1):
        mask |= 1 << ((2 * x - 2 * l) % n)
    for r in range(right + 1):
        mask |= 1 << ((2 * x + 2 * r + 3) % n)
    return mask
