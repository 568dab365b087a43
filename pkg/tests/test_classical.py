"""Deterministic-limit permutation, cycles, eigenstates, named states.

The permutation oracle recomputes each sublayer with an explicit per-site
Python loop; the quantum cross-checks run the gate circuit at epsilon=0
and compare amplitudes exactly.
"""

import numpy as np
import pytest

from fibqca.basis import SpinConfig, build_basis, wall_count
from fibqca.classical import (
    classical_step,
    classical_step_masks,
    cycle_eigenstate,
    find_cycles,
    glider_mask,
    make_named_state,
    vacuum_masks,
)
from fibqca.evolve import StateVector, StepParams, step


def oracle_step(bits, n):
    """Even sublayer then odd, controls read from the sublayer input."""
    flips = 0
    for parity in (0, 1):
        src = bits
        for x in range(parity, n, 2):
            left = (src >> ((x - 1) % n)) & 1
            right = (src >> ((x + 1) % n)) & 1
            if left == 0 and right == 0:
                bits ^= 1 << x
                flips += 1
    return bits, flips


@pytest.fixture(scope="module")
def basis10():
    return build_basis(10)


class TestClassicalStep:
    @pytest.mark.parametrize("n", [4, 6, 8, 10, 12])
    def test_matches_oracle(self, n):
        b = build_basis(n)
        st = classical_step(b)
        for i, m in enumerate(b.configs.tolist()):
            want_mask, want_flips = oracle_step(m, n)
            assert int(b.configs[st.permutation[i]]) == want_mask
            assert int(st.flip_count[i]) == want_flips

    @pytest.mark.parametrize("n", [6, 10, 14])
    def test_is_permutation(self, n):
        b = build_basis(n)
        st = classical_step(b)
        assert sorted(st.permutation.tolist()) == list(range(b.dim))
        assert (st.flip_count >= 0).all()

    def test_vacuum_orbit(self):
        n = 12
        b = build_basis(n)
        st = classical_step(b)
        a, bmask, cmask = vacuum_masks(n)
        ia, ib, ic = b.index_of(a), b.index_of(bmask), b.index_of(cmask)
        assert st.permutation[ia] == ib and st.flip_count[ia] == n // 2
        assert st.permutation[ib] == ic and st.flip_count[ib] == n
        assert st.permutation[ic] == ia and st.flip_count[ic] == n // 2

    @pytest.mark.parametrize("n", [6, 8, 10, 12, 14, 16])
    def test_wall_count_conserved(self, n):
        from fibqca.basis import _wall_count_masks

        b = build_basis(n)
        out, _ = classical_step_masks(b.configs, n)
        assert np.array_equal(_wall_count_masks(out, n), _wall_count_masks(b.configs, n))

    @pytest.mark.parametrize("n", [6, 8, 10, 12])
    def test_quantum_step_reduces_to_permutation(self, n):
        # At epsilon=0 the circuit sends |s> to (-i)^flips |perm(s)>.
        b = build_basis(n)
        st = classical_step(b)
        params = StepParams(0.0)
        for i in range(b.dim):
            psi = StateVector.zero(b)
            psi.amps[i] = 1.0
            step(psi, params)
            want = np.zeros(b.dim, dtype=np.complex128)
            want[st.permutation[i]] = (-1j) ** int(st.flip_count[i])
            assert np.max(np.abs(psi.amps - want)) < 1e-12


class TestCycles:
    def test_partition(self, basis10):
        cycles = find_cycles(basis10)
        seen = np.concatenate([c.members for c in cycles])
        assert sorted(seen.tolist()) == list(range(basis10.dim))

    def test_members_follow_permutation(self, basis10):
        st = classical_step(basis10)
        for c in find_cycles(basis10, st):
            for l in range(c.length):
                assert st.permutation[c.members[l]] == c.members[(l + 1) % c.length]
            assert len(set(c.members.tolist())) == c.length

    def test_vacuum_cycle_length_three(self, basis10):
        cycles = find_cycles(basis10)
        by_member = {}
        for c in cycles:
            for m in c.members.tolist():
                by_member[m] = c
        ia = basis10.index_of(0)
        vac = by_member[ia]
        assert vac.length == 3
        masks = {int(basis10.configs[m]) for m in vac.members.tolist()}
        assert masks == set(vacuum_masks(10))

    def test_length_multisets_frozen(self):
        # Frozen from the verified permutation; sums recover the dims.
        from collections import Counter

        lens10 = Counter(c.length for c in find_cycles(build_basis(10)))
        assert dict(lens10) == {3: 1, 7: 5, 11: 5, 15: 2}
        lens12 = Counter(c.length for c in find_cycles(build_basis(12)))
        assert dict(lens12) == {2: 2, 3: 1, 5: 3, 6: 4, 10: 12, 14: 6, 18: 4}
        assert sum(l * c for l, c in lens12.items()) == 322

    @pytest.mark.parametrize("n", [12, 14])
    def test_glider_orbit_length(self, n):
        b = build_basis(n)
        st = classical_step(b)
        i0 = b.index_of(make_named_state("glider_BC", 0, n_sites=n))
        i, length = int(st.permutation[i0]), 1
        while i != i0:
            i = int(st.permutation[i])
            length += 1
        assert length == 3 * (n // 2)

    def test_deterministic_ordering(self, basis10):
        cycles = find_cycles(basis10)
        starts = [int(c.members[0]) for c in cycles]
        assert starts == sorted(starts)
        for c in cycles:
            assert c.members[0] == c.members.min()


class TestCycleEigenstate:
    @pytest.mark.parametrize("p", [0, 1, 2])
    def test_vacuum_eigenstate(self, basis10, p):
        cycles = [c for c in find_cycles(basis10) if c.length == 3]
        vac = cycles[0]
        psi = StateVector(basis10, cycle_eigenstate(basis10, vac, p))
        assert abs(psi.norm() - 1.0) < 1e-12
        before = psi.amps.copy()
        params = StepParams(0.0)
        for _ in range(3):
            step(psi, params)
        ratio = psi.amps[np.abs(before) > 1e-12] / before[np.abs(before) > 1e-12]
        assert np.max(np.abs(ratio - ratio[0])) < 1e-12
        assert abs(abs(ratio[0]) - 1.0) < 1e-12

    @pytest.mark.parametrize("n", [8, 10])
    def test_every_cycle_gives_eigenvector(self, n):
        rng = np.random.default_rng(11)
        b = build_basis(n)
        params = StepParams(0.0)
        cycles = find_cycles(b)
        pick = rng.choice(len(cycles), size=min(6, len(cycles)), replace=False)
        for ci in pick:
            c = cycles[ci]
            p = int(rng.integers(0, c.length))
            amps = cycle_eigenstate(b, c, p)
            psi = StateVector(b, amps.copy())
            for _ in range(c.length):
                step(psi, params)
            nz = np.abs(amps) > 1e-12
            ratio = psi.amps[nz] / amps[nz]
            assert np.max(np.abs(ratio - ratio[0])) < 1e-10
            assert abs(abs(ratio[0]) - 1.0) < 1e-10

    def test_no_fixed_points_and_shortest_cycle(self):
        # The permutation is fixed point free at every size checked (the
        # empty ring always toggles its even sites), so the shortest
        # orbits have length 2; their Fourier modes must still be exact
        # eigenvectors.
        b = build_basis(12)
        cycles = find_cycles(b)
        assert min(c.length for c in cycles) == 2
        two = next(c for c in cycles if c.length == 2)
        params = StepParams(0.0)
        for p in (0, 1):
            amps = cycle_eigenstate(b, two, p)
            psi = StateVector(b, amps.copy())
            for _ in range(2):
                step(psi, params)
            nz = np.abs(amps) > 1e-12
            ratio = psi.amps[nz] / amps[nz]
            assert np.max(np.abs(ratio - ratio[0])) < 1e-12

    def test_vacuum_period_phase_exact(self):
        # Three steps on the empty ring come back with phase exactly +1:
        # the accumulated flip count is 2N, and (-i)^(2N) = 1 for even N.
        n = 10
        b = build_basis(n)
        psi = StateVector.from_config(b, 0)
        params = StepParams(0.0)
        for _ in range(3):
            step(psi, params)
        i0 = b.index_of(0)
        assert psi.amps[i0] == pytest.approx(1.0 + 0.0j, abs=1e-14)
        assert abs(psi.norm() - 1.0) < 1e-14


class TestNamedStates:
    def test_vacua(self):
        n = 20
        assert make_named_state("A", n_sites=n).bits == 0
        bmask = make_named_state("B_vac", n_sites=n).bits
        cmask = make_named_state("C_vac", n_sites=n).bits
        assert bmask == sum(1 << x for x in range(0, n, 2))
        assert cmask == sum(1 << x for x in range(1, n, 2))

    def test_double_wall(self):
        assert make_named_state("double_wall", 4, n_sites=20).bits == 1 << 4

    def test_glider_bits(self):
        assert make_named_state("glider_BC", 0, n_sites=20).bits == (1 | (1 << 3))
        got = make_named_state("glider_BC", 2, n_sites=20).bits
        assert got == (1 << 4) | (1 << 7)

    def test_glider_cb_is_inversion_of_bc(self):
        from fibqca.basis import invert

        n = 16
        for x in range(n // 2):
            bc = make_named_state("glider_BC", x, n_sites=n)
            cb = make_named_state("glider_CB", x, n_sites=n)
            assert invert(bc).bits == cb.bits

    def test_composite_merge_and_overlap(self):
        n = 18
        cfg = make_named_state(
            "composite", [("glider_BC", 0), ("glider_CB", 2)], n_sites=n
        )
        assert cfg.bits == (1 | (1 << 3) | (1 << 9) | (1 << 12))
        with pytest.raises(ValueError):
            make_named_state(
                "composite", [("double_wall", 4), ("double_wall", 4)], n_sites=n
            )

    def test_composite_adjacency_violation(self):
        with pytest.raises(ValueError):
            make_named_state(
                "composite", [("double_wall", 4), ("double_wall", 5)], n_sites=18
            )

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            make_named_state("D_vac", n_sites=10)

    def test_glider_mask_widening(self):
        # L extends by even sites leftward, R by odd sites rightward.
        n = 20
        assert glider_mask(3, 0, 0, n) == (1 << 6) | (1 << 9)
        assert glider_mask(3, 1, 0, n) == (1 << 4) | (1 << 6) | (1 << 9)
        assert glider_mask(3, 0, 2, n) == (1 << 6) | (1 << 9) | (1 << 11) | (1 << 13)


class TestPropagationSpeeds:
    def test_double_wall_fronts(self):
        # Left and right fronts of the disturbed region move two sites per
        # three steps in opposite directions.
        n = 20
        b = build_basis(n)
        st = classical_step(b)
        i = b.index_of(make_named_state("double_wall", 10, n_sites=n))
        edges = []
        for t in range(1, 10):
            i = int(st.permutation[i])
            if t % 3 == 0:
                sites = [x for x in range(n) if (int(b.configs[i]) >> x) & 1]
                edges.append((min(sites), max(sites)))
        assert edges == [(9, 11), (7, 13), (5, 15)]

    def test_glider_advances_two_sites_per_period(self):
        n = 16
        b = build_basis(n)
        st = classical_step(b)
        i = b.index_of(make_named_state("glider_BC", 0, n_sites=n))
        start = int(b.configs[i])
        for _ in range(3):
            i = int(st.permutation[i])
        shifted = int(b.configs[i])
        from fibqca.basis import translate2

        assert shifted == translate2(SpinConfig(start, n)).bits
