# cython: boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled stepping kernel; see fibqca._kernel_py for the contract."""

COMPILED = True


def apply_pairs(double complex[::1] amps,
                const long long[::1] i0, const long long[::1] i1,
                const long long[::1] offsets, double c, double s):
    cdef Py_ssize_t a, p, n_groups = offsets.shape[0] - 1
    cdef double complex a0, a1
    cdef double complex ims = -s * 1j
    with nogil:
        for a in range(n_groups):
            for p in range(offsets[a], offsets[a + 1]):
                a0 = amps[i0[p]]
                a1 = amps[i1[p]]
                amps[i0[p]] = c * a0 + ims * a1
                amps[i1[p]] = ims * a0 + c * a1
