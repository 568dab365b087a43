"""Numpy fallback for the stepping kernel.

Same contract as the compiled module fibqca._kernel: rotate every active
amplitude pair of one sublayer in place. A pair couples a configuration
with empty neighbors at the gated site to its partner with that site
occupied, through [[c, -1j*s], [-1j*s, c]].
"""

from __future__ import annotations

import numpy as np

COMPILED = False


def apply_pairs(amps: np.ndarray, i0: np.ndarray, i1: np.ndarray,
                offsets: np.ndarray, c: float, s: float) -> None:
    """Apply the pair rotation site by site; offsets delimit each site's pairs."""
    ims = complex(0.0, -s)
    for a in range(len(offsets) - 1):
        p0 = i0[offsets[a]:offsets[a + 1]]
        p1 = i1[offsets[a]:offsets[a + 1]]
        a0 = amps[p0]
        a1 = amps[p1]
        amps[p0] = c * a0 + ims * a1
        amps[p1] = ims * a0 + c * a1
