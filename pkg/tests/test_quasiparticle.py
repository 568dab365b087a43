"""Glider family states, first-order hopping matrix, dispersion, echo.

The hopping matrix oracle is the finite-difference generator of the
circuit itself, i (U3^dag U_eps - 1) / eps at eps = 1e-6, projected on
the family; everything downstream is checked against it or against
closed-form values frozen here.
"""

import math

import numpy as np
import pytest

from fibqca.basis import SpinConfig, build_basis, translate2
from fibqca.evolve import StateVector, StepParams, step, step_backward
from fibqca.quasiparticle import (
    GliderIndex,
    ModeIndex,
    build_lrk,
    build_q1q2k,
    dispersion,
    first_order_energy,
    glider_sector_quasienergies,
    hbc_matrix,
    loschmidt_analytic,
    loschmidt_gaussian,
    lr_pairs,
    mode_grid,
    mode_overlap,
    momentum_values,
)


def fd_generator(n, k, fd_eps=1e-6):
    """Project i (U3_adj U_eps - 1) / eps onto the glider family."""
    basis = build_basis(n)
    pairs = lr_pairs(n)
    kets = [build_lrk(GliderIndex(l, r, k, n), basis) for l, r in pairs]
    out = np.zeros((len(pairs), len(pairs)), dtype=np.complex128)
    for col, ket in enumerate(kets):
        img = ket.copy()
        for _ in range(3):
            step(img, StepParams(fd_eps))
        for _ in range(3):
            step_backward(img, StepParams(0.0))
        gen = (img.amps - ket.amps) * (1j / fd_eps)
        for row, bra in enumerate(kets):
            out[row, col] = np.vdot(bra.amps, gen)
    return out


class TestGliderIndex:
    def test_momentum_grid(self):
        n = 18
        ks = momentum_values(n)
        assert len(ks) == n // 2
        assert np.allclose(ks, 4 * np.pi * np.arange(9) / 18)

    def test_rejects_bad_extension(self):
        with pytest.raises(ValueError):
            GliderIndex(3, 3, 0.0, 16)  # L+R > N/2-4
        with pytest.raises(ValueError):
            GliderIndex(-1, 0, 0.0, 16)
        GliderIndex(2, 2, 0.0, 16)  # boundary is allowed

    def test_rejects_off_grid_momentum(self):
        with pytest.raises(ValueError):
            GliderIndex(0, 0, 0.1, 12)
        k = float(momentum_values(12)[2])
        assert GliderIndex.from_mode(0, 0, 2, 12).k == pytest.approx(k)

    def test_triangle_size(self):
        assert len(lr_pairs(18)) == 21
        assert len(lr_pairs(14)) == 10
        m = 18 // 2 - 3
        assert len(lr_pairs(18)) == m * (m + 1) // 2


class TestBuildLrk:
    @pytest.mark.parametrize("n", [12, 16, 20])
    def test_normalized(self, n):
        basis = build_basis(n)
        rng = np.random.default_rng(n)
        ks = momentum_values(n)
        for _ in range(6):
            top = n // 2 - 4
            l = int(rng.integers(0, top + 1))
            r = int(rng.integers(0, top - l + 1))
            k = float(ks[rng.integers(0, len(ks))])
            psi = build_lrk(GliderIndex(l, r, k, n), basis)
            assert abs(psi.norm() - 1.0) < 1e-12

    def test_k0_uniform_superposition(self):
        n = 12
        basis = build_basis(n)
        psi = build_lrk(GliderIndex(0, 0, 0.0, n), basis)
        nz = np.nonzero(np.abs(psi.amps) > 1e-14)[0]
        assert len(nz) == n // 2
        assert np.allclose(psi.amps[nz], math.sqrt(2.0 / n))

    @pytest.mark.parametrize("kidx", [0, 1, 3, 5])
    def test_three_step_eigenphase(self, kidx):
        n = 12
        basis = build_basis(n)
        k = float(momentum_values(n)[kidx])
        psi = build_lrk(GliderIndex(1, 1, k, n), basis)
        ref = psi.amps.copy()
        for _ in range(3):
            step(psi, StepParams(0.0))
        assert np.max(np.abs(psi.amps - np.exp(-1j * k) * ref)) < 1e-10

    def test_translation_eigenphase(self):
        n = 14
        basis = build_basis(n)
        k = float(momentum_values(n)[2])
        psi = build_lrk(GliderIndex(2, 0, k, n), basis)
        rolled = np.zeros_like(psi.amps)
        for i in np.nonzero(np.abs(psi.amps) > 1e-14)[0]:
            j = basis.index_of(translate2(basis.spin_config(int(i))))
            rolled[j] = psi.amps[i]
        assert np.max(np.abs(rolled - np.exp(-1j * k) * psi.amps)) < 1e-12

    def test_family_states_orthonormal(self):
        n = 14
        basis = build_basis(n)
        k = float(momentum_values(n)[1])
        kets = [build_lrk(GliderIndex(l, r, k, n), basis) for l, r in lr_pairs(n)]
        g = np.array([[np.vdot(a.amps, b.amps) for b in kets] for a in kets])
        assert np.max(np.abs(g - np.eye(len(kets)))) < 1e-12


class TestHbcMatrix:
    def test_shape_and_hermiticity(self):
        h = hbc_matrix(18, 0.7 * math.pi)
        assert h.entries.shape == (21, 21)
        assert np.max(np.abs(h.entries - h.entries.conj().T)) < 1e-12
        assert np.max(np.abs(h.eigenvalues().imag)) == 0.0

    def test_entry_values(self):
        k = float(momentum_values(14)[2])
        h = hbc_matrix(14, k)
        i00, i10, i01 = h.index(0, 0), h.index(1, 0), h.index(0, 1)
        assert h.entries[i10, i00] == pytest.approx(-2.0)
        assert h.entries[i01, i00] == pytest.approx(-2.0)
        i11, i02 = h.index(1, 1), h.index(0, 2)
        assert h.entries[i02, i11] == pytest.approx(2j * np.exp(1j * k))
        assert h.entries[i11, i02] == pytest.approx(-2j * np.exp(-1j * k))

    @pytest.mark.parametrize("kidx", [0, 2])
    def test_matches_finite_difference_generator(self, kidx):
        # The oracle that pins the overall sign convention.
        n = 14
        k = float(momentum_values(n)[kidx])
        fd = fd_generator(n, k)
        h = hbc_matrix(n, k).entries
        assert np.max(np.abs(fd - h)) < 1e-4

    def test_traceless_and_frozen_extremes(self):
        # Diagonal is identically zero; at k=0 the spectrum is symmetric
        # about zero with the frozen edge below. The spectrum is NOT even
        # in k (the family moves one way), so no k -> -k check here.
        h0 = hbc_matrix(18, 0.0)
        assert abs(np.trace(h0.entries)) < 1e-14
        e = np.sort(np.linalg.eigvalsh(h0.entries))
        assert np.max(np.abs(e + e[::-1])) < 1e-12
        assert e[-1] == pytest.approx(8.363081100704, abs=1e-9)
        assert np.max(np.abs(np.diag(h0.entries))) == 0.0


class TestDispersion:
    def test_unperturbed_limit(self):
        m = ModeIndex(0.3, 1.1, 2.0)
        assert dispersion(m, 0.0) == pytest.approx(2.0)

    def test_zone_center_magnitude(self):
        # |first-order shift| = 4 eps (1 + 1 + 0) at the origin mode; the
        # sign follows the finite-difference convention of hbc_matrix.
        m = ModeIndex(0.0, 0.0, 0.0)
        assert abs(dispersion(m, 0.01)) == pytest.approx(0.08)
        assert dispersion(m, 0.01) == pytest.approx(0.01 * first_order_energy(m))
        assert first_order_energy(m) == pytest.approx(-8.0)

    def test_first_order_energy_formula(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            q1, q2, k = rng.uniform(0, 2 * math.pi, size=3)
            m = ModeIndex(q1, q2, k)
            want = -4.0 * (math.cos(q1) + math.cos(q2) + math.sin(k + q1 - q2))
            assert first_order_energy(m) == pytest.approx(want, abs=1e-12)

    def test_mode_grid_covers_triangle(self):
        n = 18
        grid = mode_grid(n, 0.5)
        assert len(grid) == 21
        span = n // 2 - 3
        for m in grid:
            n1 = m.q1 * span / (2 * math.pi)
            n2 = m.q2 * span / (2 * math.pi)
            assert round(n1) + round(n2) <= n // 2 - 4

    @pytest.mark.parametrize("kidx", [0, 12])
    def test_rank_matching_against_matrix_spectrum(self, kidx):
        # Plane-wave energies approximate the triangle spectrum rank by
        # rank once the domain is reasonably large; the deviation shrinks
        # with size (7.4% at N=40, <5% at N=60, 2.4% at N=100).
        n = 60
        k = float(momentum_values(n)[kidx])
        approx = np.sort([first_order_energy(m) for m in mode_grid(n, k)])
        exact = np.sort(np.linalg.eigvalsh(hbc_matrix(n, k).entries))
        width = exact.max() - exact.min()
        assert np.max(np.abs(approx - exact)) / width < 0.055


class TestSectorQuasienergies:
    def test_linear_response_matches_matrix(self):
        n = 18
        basis = build_basis(n)
        k = float(momentum_values(n)[2])
        ev = np.sort(np.linalg.eigvalsh(hbc_matrix(n, k).entries))
        width = ev.max() - ev.min()
        for eps in (5e-4, 1e-3):
            q = glider_sector_quasienergies(n, k, eps, basis)
            assert np.max(np.abs(q - ev)) / width < 5e-3

    def test_slope_stability_in_epsilon(self):
        n = 14
        basis = build_basis(n)
        k = float(momentum_values(n)[1])
        qa = glider_sector_quasienergies(n, k, 4e-4, basis)
        qb = glider_sector_quasienergies(n, k, 8e-4, basis)
        assert np.max(np.abs(qa - qb)) < 0.05 * (qa.max() - qa.min())


class TestModes:
    def test_q0_mode_equal_weight(self):
        n = 14
        basis = build_basis(n)
        psi = build_q1q2k(ModeIndex(0.0, 0.0, 0.0), basis)
        proj = [
            np.vdot(build_lrk(GliderIndex(l, r, 0.0, n), basis).amps, psi.amps)
            for l, r in lr_pairs(n)
        ]
        proj = np.array(proj)
        assert np.max(np.abs(proj - proj[0])) < 1e-12

    def test_mode_overlap_matches_states(self):
        n = 14
        basis = build_basis(n)
        k = float(momentum_values(n)[1])
        grid = mode_grid(n, k)
        for m1, m2 in [(grid[0], grid[1]), (grid[2], grid[5]), (grid[3], grid[3])]:
            s1 = build_q1q2k(m1, basis)
            s2 = build_q1q2k(m2, basis)
            want = np.vdot(s1.amps, s2.amps)
            assert mode_overlap(m1, m2, n) == pytest.approx(want, abs=1e-10)

    def test_gram_structure(self):
        # Adjacent grid modes stay ~1/pi overlapped at any size (frozen
        # values below); at fixed momentum separation the overlap decays
        # like 1/N instead. Both facts recorded rather than forced.
        def max_offdiag(n):
            grid = mode_grid(n, 0.0)
            return max(
                abs(mode_overlap(grid[i], grid[j], n))
                for i in range(len(grid))
                for j in range(i)
            )

        assert max_offdiag(18) == pytest.approx(0.285714, abs=1e-4)
        assert max_offdiag(40) == pytest.approx(0.302344, abs=1e-4)

        def fixed_separation(n):
            span = n // 2 - 3
            a = round(span / 3)
            m0 = ModeIndex(0.0, 0.0, 0.0)
            m1 = ModeIndex(2 * math.pi * a / span, 0.0, 0.0)
            return abs(mode_overlap(m0, m1, n))

        assert fixed_separation(40) < 0.5 * fixed_separation(18)

    def test_mode_residual_linear_in_epsilon(self):
        # One circuit period on a mode reproduces the dispersion phase up
        # to a leakage term linear in epsilon (coefficient order N/2).
        n = 16
        basis = build_basis(n)
        m = mode_grid(n, 0.0)[3]

        def residual(eps):
            psi = build_q1q2k(m, basis)
            ref = psi.amps.copy()
            for _ in range(3):
                step(psi, StepParams(eps))
            phase = np.exp(-1j * (m.k + eps * first_order_energy(m)))
            return np.linalg.norm(psi.amps - phase * ref)

        r1, r2 = residual(1e-3), residual(5e-4)
        assert r1 < 10 * 1e-3
        assert r1 / r2 == pytest.approx(2.0, abs=0.1)


class TestLoschmidt:
    def test_unit_at_zero(self):
        assert loschmidt_analytic(0.0) == pytest.approx(1.0, abs=1e-12)

    def test_small_z_quadratic(self):
        for z in (0.005, 0.01, 0.02):
            assert abs(loschmidt_analytic(z) - (1 - 24 * z * z)) < 1e-3

    def test_near_gaussian_at_unit_exponent(self):
        z = 1.0 / math.sqrt(24.0)
        assert abs(loschmidt_analytic(z) - math.exp(-1.0)) < 0.05

    def test_even_in_z(self):
        for z in (0.03, 0.17, 0.4):
            assert loschmidt_analytic(z, 0.9) == loschmidt_analytic(-z, 0.9)

    def test_k_shift_by_pi_exact(self):
        for z in (0.05, 0.2):
            assert loschmidt_analytic(z, 0.4) == pytest.approx(
                loschmidt_analytic(z, 0.4 + math.pi), abs=1e-12
            )

    def test_weak_k_dependence_recorded(self):
        # The echo is not exactly k independent: the spread across k at
        # z=0.1 is a genuine few-1e-4 effect, far above quadrature error.
        vals = [loschmidt_analytic(0.1, k) for k in np.linspace(0, math.pi, 9)]
        spread = max(vals) - min(vals)
        assert 1e-5 < spread < 5e-4

    def test_quadrature_converged(self):
        for z in (0.0, 0.1, 0.3, 0.5):
            a = loschmidt_analytic(z, 0.3, order=512)
            b = loschmidt_analytic(z, 0.3, order=256)
            assert abs(a - b) < 1e-8

    def test_array_input(self):
        z = np.array([0.0, 0.1, 0.2])
        out = loschmidt_analytic(z)
        assert out.shape == (3,)
        assert out[0] == pytest.approx(1.0, abs=1e-12)
        assert np.all(np.diff(out) < 0)

    def test_gaussian_reference(self):
        assert loschmidt_gaussian(0.0) == 1.0
        assert loschmidt_gaussian(0.1) == pytest.approx(math.exp(-0.24))
        z = np.linspace(0, 0.1, 5)
        assert np.allclose(loschmidt_gaussian(z), np.exp(-24 * z**2))

    def test_bounded_unit_interval(self):
        for z in np.linspace(0, 2.0, 21):
            v = loschmidt_analytic(float(z), 0.2)
            assert -1e-12 <= v <= 1.0 + 1e-12
