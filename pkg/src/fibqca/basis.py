"""Constrained spin-chain basis on a periodic ring.

Configurations are bitmasks over n_sites sites with bit x = occupation of
site x (site 0 is printed leftmost in string form). Two adjacent 1s are
forbidden, including across the periodic boundary, so the basis dimension
follows the Fibonacci recursion: dim(N) = F(N-1) + F(N+1).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MIN_SITES = 4
MAX_SITES = 30


def _full_mask(n: int) -> int:
    return (1 << n) - 1


def _rotl(mask, shift: int, n: int):
    """Cyclic rotation in site space: bit x of result = bit (x - shift) mod n.

    Works elementwise on integer arrays as well as plain ints.
    """
    shift %= n
    full = _full_mask(n)
    return ((mask << shift) | (mask >> (n - shift))) & full


def is_valid_mask(mask, n: int):
    """True when no two adjacent sites (cyclically) are both occupied."""
    return (mask & _rotl(mask, 1, n)) == 0


@dataclass(frozen=True)
class SpinConfig:
    """A single valid configuration on a ring of n_sites sites."""

    bits: int
    n_sites: int

    def __post_init__(self):
        if not 0 <= self.bits <= _full_mask(self.n_sites):
            raise ValueError(f"bits out of range for {self.n_sites} sites")
        bad = self.bits & _rotl(self.bits, 1, self.n_sites)
        if bad:
            site = int(bad).bit_length() - 1
            raise ValueError(f"adjacent occupations at site {site}")

    def __str__(self) -> str:
        return format_bits(self.bits, self.n_sites)


def format_bits(mask: int, n: int) -> str:
    """Render a mask as a site string, site 0 leftmost."""
    return "".join("1" if (mask >> x) & 1 else "0" for x in range(n))


def parse_bits(s: str) -> int:
    """Inverse of format_bits."""
    return sum(1 << x for x, ch in enumerate(s) if ch == "1")


def fibonacci(n: int) -> int:
    """F(1) = F(2) = 1 convention."""
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


class FibonacciBasis:
    """Ordered basis of all valid configurations for one ring size.

    configs is an int64 array of masks sorted ascending; index_of inverts it.
    """

    def __init__(self, n_sites: int, configs: np.ndarray):
        self.n_sites = n_sites
        self.configs = configs
        self.dim = len(configs)

    def index_of(self, config) -> int:
        """Basis index of a mask or SpinConfig; raises KeyError if absent."""
        mask = config.bits if isinstance(config, SpinConfig) else int(config)
        i = int(np.searchsorted(self.configs, mask))
        if i == self.dim or self.configs[i] != mask:
            raise KeyError(f"not a valid configuration: {format_bits(mask, self.n_sites)}")
        return i

    def indices_of(self, masks: np.ndarray) -> np.ndarray:
        """Vectorized index_of for an array of masks assumed valid."""
        idx = np.searchsorted(self.configs, masks)
        if not np.array_equal(self.configs[idx], masks):
            raise KeyError("array contains masks outside the basis")
        return idx

    def spin_config(self, i: int) -> SpinConfig:
        return SpinConfig(int(self.configs[i]), self.n_sites)

    def bit_string(self, i: int) -> str:
        return format_bits(int(self.configs[i]), self.n_sites)

    def __repr__(self) -> str:
        return f"FibonacciBasis(n_sites={self.n_sites}, dim={self.dim})"


def _open_chain_masks(n: int) -> np.ndarray:
    """All masks of an open n-site segment with no adjacent occupations, sorted."""
    cur = np.array([0], dtype=np.int64)
    for x in range(n):
        if x == 0:
            with_one = cur | 1
        else:
            free = (cur >> (x - 1)) & 1 == 0
            with_one = cur[free] | (1 << x)
        cur = np.concatenate([cur, with_one])
    return np.sort(cur)


@lru_cache(maxsize=None)
def build_basis(n_sites: int) -> FibonacciBasis:
    """Enumerate the constrained basis, sorted ascending by mask.

    n_sites must be even and within [4, 30]; the staggered dynamics needs an
    even ring and 2^30 is the practical enumeration ceiling.
    """
    if n_sites % 2 or not MIN_SITES <= n_sites <= MAX_SITES:
        raise ValueError(f"n_sites must be even and in [{MIN_SITES}, {MAX_SITES}], got {n_sites}")
    # Combine open-chain halves instead of filtering all 2^N masks so that
    # n_sites = 30 stays cheap. Only the two junctions need rechecking.
    half = n_sites // 2
    lo = _open_chain_masks(half)
    hi = _open_chain_masks(half)
    lo_first = lo & 1
    lo_last = (lo >> (half - 1)) & 1
    hi_first = hi & 1
    hi_last = (hi >> (half - 1)) & 1
    ok = ((lo_last[:, None] & hi_first[None, :]) | (lo_first[:, None] & hi_last[None, :])) == 0
    configs = (lo[:, None] | (hi[None, :] << half))[ok]
    return FibonacciBasis(n_sites, np.sort(configs))


def translate2(config: SpinConfig) -> SpinConfig:
    """Shift every occupation two sites to the right (cyclically)."""
    return SpinConfig(int(_rotl(config.bits, 2, config.n_sites)), config.n_sites)


def invert(config: SpinConfig) -> SpinConfig:
    """Spatial reflection x -> n - x - 2, which fixes the even/odd sublattices."""
    n = config.n_sites
    out = 0
    for x in range(n):
        if (config.bits >> x) & 1:
            out |= 1 << ((n - x - 2) % n)
    return SpinConfig(out, n)


def xor_string(config: SpinConfig) -> int:
    """Mask whose bit x is the XOR of the two neighbors of site x."""
    return int(_xor_string_masks(np.int64(config.bits), config.n_sites))


def _xor_string_masks(masks, n: int):
    return _rotl(masks, 1, n) ^ _rotl(masks, -1, n)


def wall_count(config: SpinConfig) -> int:
    """Number of maximal cyclic runs of 1s in the xor string.

    Counts the domain walls separating vacuum regions: 0 for the three
    vacua, 2 for a single-flip defect, 3 for a glider.
    """
    return int(_wall_count_masks(np.int64(config.bits), config.n_sites))


def _wall_count_masks(masks, n: int):
    w = _xor_string_masks(masks, n)
    starts = w & ~_rotl(w, 1, n)
    counts = _popcount(starts)
    # a fully saturated xor string is a single cyclic run
    return np.where((counts == 0) & (w != 0), 1, counts)


def _popcount(masks):
    if isinstance(masks, (int, np.integer)):
        return int(masks).bit_count()
    out = np.zeros(masks.shape, dtype=np.int64)
    m = masks.copy()
    while m.any():
        out += m & 1
        m >>= 1
    return out
