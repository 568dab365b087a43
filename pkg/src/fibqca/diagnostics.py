"""Measurement functionals for constrained-chain states.

Reduced density matrices, single-site tangle and its spatial average,
two-qubit concurrence, Schmidt spectra with spacing statistics, von
Neumann entropy, inverse participation ratio, logarithmic negativity
input (the plain negativity), revival fidelity, and Loschmidt echo
rate functions.  Everything here is pure and safe to call from
multiple workers on a shared read-only state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .basis import FibonacciBasis, SpinConfig, build_basis
from .evolve import StateVector, StepParams, pair_tables, step
from .quasiparticle import GliderIndex, build_lrk

SPECTRUM_CUTOFF = 1e-12
ENTROPY_DROP = 1e-14


@dataclass(frozen=True)
class DensityMatrix:
    """Reduced state on an ordered list of sites.

    ``dims = (d_a, d_b)`` records a bipartition of the retained sites
    into a leading block of dimension d_a and a trailing block of
    dimension d_b; single-subsystem states use d_b = 1.  The first
    listed site maps to the most significant bit of the row index.
    """

    entries: np.ndarray
    dims: tuple[int, int]
    sites: tuple[int, ...] = field(default=())

    def __post_init__(self):
        d = self.entries.shape[0]
        if self.entries.shape != (d, d):
            raise ValueError("density matrix must be square")
        if self.dims[0] * self.dims[1] != d:
            raise ValueError(f"dims {self.dims} inconsistent with shape {d}")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def purity(self) -> float:
        return float(np.sum(np.abs(self.entries) ** 2))

    def validate(self, herm_tol=1e-12, trace_tol=1e-10, eig_tol=1e-10):
        """Raise if the matrix fails Hermiticity, unit trace, or positivity."""
        e = self.entries
        herm = float(np.max(np.abs(e - e.conj().T)))
        if herm > herm_tol:
            raise ValueError(f"not Hermitian: max deviation {herm:.3e}")
        tr = complex(np.trace(e))
        if abs(tr - 1.0) > trace_tol:
            raise ValueError(f"trace {tr} is not 1")
        lo = float(np.linalg.eigvalsh((e + e.conj().T) / 2.0).min())
        if lo < -eig_tol:
            raise ValueError(f"negative eigenvalue {lo:.3e}")


@dataclass(frozen=True)
class SchmidtSpectrum:
    """Squared Schmidt coefficients of a bipartition, descending."""

    values: np.ndarray
    part_a: tuple[int, ...]

    def __post_init__(self):
        if np.any(np.diff(self.values) > 0):
            raise ValueError("spectrum must be sorted descending")

    def retained(self, cutoff=SPECTRUM_CUTOFF) -> np.ndarray:
        return self.values[self.values >= cutoff]


def _project_bits(masks, sites):
    # first listed site lands in the most significant bit
    out = np.zeros(np.shape(masks), dtype=np.int64)
    k = len(sites)
    for j, x in enumerate(sites):
        out |= ((np.asarray(masks, dtype=np.int64) >> x) & 1) << (k - 1 - j)
    return out


def reduced_density(state: StateVector, sites, split: int | None = None) -> DensityMatrix:
    """Trace out everything except ``sites``.

    Amplitudes are grouped by the configuration of the complement and
    accumulated as an outer product; local patterns that never occur in
    the constrained basis simply stay as zero rows and columns of the
    embedding.  ``split`` marks the first ``split`` listed sites as
    subsystem a for bipartite use (negativity); by default the whole
    block is one subsystem.
    """
    sites = [int(x) for x in sites]
    basis = state.basis
    n = basis.n_sites
    if len(set(sites)) != len(sites):
        raise ValueError("sites must be distinct")
    if any(x < 0 or x >= n for x in sites):
        raise ValueError("site out of range")
    k = len(sites)
    if k > 12:
        raise ValueError("reduced_density holds at most 12 sites")
    if split is not None and not 0 <= split <= k:
        raise ValueError("split must cut the listed sites")

    chosen = set(sites)
    comp = [x for x in range(n) if x not in chosen]
    a = _project_bits(basis.configs, sites)
    if comp:
        b = _project_bits(basis.configs, comp)
        b_vals, b_inv = np.unique(b, return_inverse=True)
    else:
        b_vals = np.zeros(1, dtype=np.int64)
        b_inv = np.zeros(basis.dim, dtype=np.intp)
    m = np.zeros((1 << k, b_vals.size), dtype=np.complex128)
    m[a, b_inv] = state.amps
    rho = m @ m.conj().T
    dims = (1 << k, 1) if split is None else (1 << split, 1 << (k - split))
    return DensityMatrix(entries=rho, dims=dims, sites=tuple(sites))


def tangle(rho: DensityMatrix) -> float:
    """4 det(rho) of a single-site state; 0 for pure, 1 for maximally mixed.

    Equals 2 - 2 Tr(rho^2) for any unit-trace 2x2 Hermitian matrix.
    """
    e = rho.entries
    if e.shape != (2, 2):
        raise ValueError("tangle is defined for 2x2 density matrices")
    return float(4.0 * (e[0, 0].real * e[1, 1].real - abs(e[0, 1]) ** 2))


def _site_coherences(state: StateVector):
    """Per-site (p_empty, p_occupied, <0|rho_x|1>) in one pass.

    The only coherence pairs that survive the adjacency constraint are
    configurations whose partner under a single-site flip is also valid,
    and those are exactly the flip tables used by the circuit itself.
    """
    basis = state.basis
    amps = state.amps
    n = basis.n_sites
    tables = pair_tables(basis)
    occ = np.empty(n)
    coh = np.empty(n, dtype=np.complex128)
    weights = np.abs(amps) ** 2
    for x in range(n):
        occ[x] = float(weights[((basis.configs >> x) & 1) == 1].sum())
        i0, i1 = tables.site_pairs[x]
        coh[x] = np.sum(amps[i0] * np.conj(amps[i1]))
    return 1.0 - occ, occ, coh


def tangle_profile(state: StateVector) -> np.ndarray:
    """Single-site tangle at every site, without building 2x2 matrices."""
    p0, p1, coh = _site_coherences(state)
    return 4.0 * (p0 * p1 - np.abs(coh) ** 2)


def global_Q(state: StateVector) -> float:
    """Spatial average of the single-site tangles."""
    return float(np.mean(tangle_profile(state)))


def spin_expectation(state: StateVector, x: int) -> np.ndarray:
    """Bloch vector (<X>, <Y>, <Z>) of site x; the empty site gives (0,0,1)."""
    rho = reduced_density(state, [x])
    e = rho.entries
    c = e[0, 1]
    return np.array([2.0 * c.real, -2.0 * c.imag, e[0, 0].real - e[1, 1].real])


def spin_z_profile(state: StateVector) -> np.ndarray:
    p0, p1, _ = _site_coherences(state)
    return p0 - p1


# Y (x) Y is real in the computational basis
_YY = np.array(
    [
        [0.0, 0.0, 0.0, -1.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, 0.0],
    ]
)


def concurrence(rho: DensityMatrix) -> float:
    """Wootters two-qubit concurrence, max{0, l1 - l2 - l3 - l4}.

    The l_i are the descending square roots of the eigenvalues of
    rho (YY) rho* (YY), which shares its spectrum with the symmetrized
    form built from matrix square roots.
    """
    e = rho.entries
    if e.shape != (4, 4):
        raise ValueError("concurrence is defined for 4x4 density matrices")
    w = np.linalg.eigvals(e @ _YY @ e.conj() @ _YY)
    if np.any(w.real < -1e-8):
        raise ValueError("input is not a physical two-qubit state")
    lam = np.sort(np.sqrt(np.clip(w.real, 0.0, None)))[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def _is_cyclic_run(sites, n) -> bool:
    chosen = set(sites)
    boundaries = sum(1 for x in chosen if (x + 1) % n not in chosen)
    return boundaries == 1


def schmidt_spectrum(state: StateVector, part_a=None) -> SchmidtSpectrum:
    """Squared singular values of the bipartition coefficient matrix.

    ``part_a`` must be a contiguous block of sites on the ring and
    defaults to the first half of the chain.  The matrix is indexed by
    the local configurations actually present on each side, so its
    shape grows like the open-segment count rather than 2^(N/2).
    """
    basis = state.basis
    n = basis.n_sites
    if part_a is None:
        part_a = range(n // 2)
    part_a = [int(x) for x in part_a]
    if len(set(part_a)) != len(part_a) or not 0 < len(part_a) < n:
        raise ValueError("part_a must be a proper nonempty subset")
    if any(x < 0 or x >= n for x in part_a):
        raise ValueError("site out of range")
    if not _is_cyclic_run(part_a, n):
        raise ValueError("part_a must be contiguous on the ring")

    chosen = set(part_a)
    comp = [x for x in range(n) if x not in chosen]
    a_vals, a_inv = np.unique(_project_bits(basis.configs, part_a), return_inverse=True)
    b_vals, b_inv = np.unique(_project_bits(basis.configs, comp), return_inverse=True)
    m = np.zeros((a_vals.size, b_vals.size), dtype=np.complex128)
    m[a_inv, b_inv] = state.amps
    p = np.linalg.svd(m, compute_uv=False) ** 2
    return SchmidtSpectrum(values=np.sort(p)[::-1], part_a=tuple(part_a))


def entropy(spec: SchmidtSpectrum) -> float:
    """Von Neumann entropy in bits; weights below 1e-14 are dropped."""
    p = spec.values[spec.values >= ENTROPY_DROP]
    return float(-np.sum(p * np.log2(p)))


def r_statistics(spec: SchmidtSpectrum, cutoff=SPECTRUM_CUTOFF) -> np.ndarray:
    """Consecutive spacing ratios min/max of the sorted retained spectrum."""
    p = np.sort(spec.retained(cutoff))
    if p.size < 3:
        raise ValueError("need at least 3 retained levels for spacing ratios")
    d = np.diff(p)
    lo = np.minimum(d[:-1], d[1:])
    hi = np.maximum(d[:-1], d[1:])
    return np.where(hi > 0, lo / np.where(hi > 0, hi, 1.0), 1.0)


def reference_pdf(kind: str, r):
    """Spacing-ratio reference densities on [0, 1].

    ``poisson`` is 2/(1+r)^2 with mean 2 ln 2 - 1; ``goe`` is the
    folded Wigner-like surmise (54/8) r(1+r)/(1+r+r^2)^(5/2) with mean
    close to 0.536.
    """
    r = np.asarray(r, dtype=float)
    if kind == "poisson":
        out = 2.0 / (1.0 + r) ** 2
    elif kind == "goe":
        out = (54.0 / 8.0) * r * (1.0 + r) / (1.0 + r + r * r) ** 2.5
    else:
        raise ValueError(f"unknown reference kind {kind!r}")
    return out if out.ndim else float(out)


def ipr(state: StateVector, basis: FibonacciBasis | None = None) -> float:
    """Configuration-basis inverse participation ratio, sum of |amp|^4."""
    if basis is not None and basis is not state.basis:
        raise ValueError("state was built on a different basis")
    return float(np.sum(np.abs(state.amps) ** 4))


def negativity(rho: DensityMatrix) -> float:
    """(trace norm of the partial transpose - 1) / 2 over the (a, b) split."""
    da, db = rho.dims
    e = rho.entries.reshape(da, db, da, db)
    pt = np.transpose(e, (2, 1, 0, 3)).reshape(da * db, da * db)
    lam = np.linalg.eigvalsh(pt)
    return float((np.sum(np.abs(lam)) - 1.0) / 2.0)


def fidelity(state: StateVector, ref_config: SpinConfig | int) -> float:
    """Squared overlap with a single configuration."""
    mask = ref_config.bits if isinstance(ref_config, SpinConfig) else int(ref_config)
    return float(abs(state.amps[state.basis.index_of(mask)]) ** 2)


def loschmidt_numeric(g: GliderIndex, eps1: float, eps2: float, t: int) -> float:
    """Echo |<psi_2(t)|psi_1(t)>|^2 between two couplings from one mode.

    ``t`` counts three-automaton-step units, matching the analytic
    echo's time variable z = t (eps2 - eps1).
    """
    if t < 0 or t != int(t):
        raise ValueError("t must be a nonnegative integer")
    basis = build_basis(g.n_sites)
    start = build_lrk(g, basis)
    s1, s2 = start.copy(), start.copy()
    p1, p2 = StepParams(epsilon=eps1), StepParams(epsilon=eps2)
    for _ in range(3 * int(t)):
        step(s1, p1)
        step(s2, p2)
    return float(abs(s2.overlap(s1)) ** 2)


def rate_function(echo_value: float, n_sites: int) -> float:
    """Echo decay rate per site, -ln(echo)/N; a dead echo returns +inf."""
    if echo_value < 0.0 or echo_value > 1.0 + 1e-12:
        raise ValueError("echo must lie in [0, 1]")
    if echo_value == 0.0:
        return math.inf
    return -math.log(echo_value) / n_sites
