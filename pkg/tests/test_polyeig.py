"""Dual-route and factorisation-oracle tests for the perturbed spectra."""

from __future__ import annotations

import numpy as np
import pytest

from spectral_lab.ensembles import EnsembleKind, EnsembleSpec, sample_wigner
from spectral_lab.perturbation import constant_model
from spectral_lab.polyeig import (
    PolynomialDegeneracyError,
    QuadraticScenario,
    acoustic_scenario,
    assemble_quadratic,
    hx_spectrum,
    multiset_max_distance,
    quadratic_spectrum,
    secular_check,
    spike_spectrum,
    upper_half_count,
)


def wigner(N, seed, stream=()):
    return sample_wigner(EnsembleSpec(kind=EnsembleKind.WIGNER_REAL, N=N, seed=seed, stream=stream))


def unit_vector(N, j=0):
    u = np.zeros(N)
    u[j] = 1.0
    return u


class TestSpikeSpectrum:
    def test_zero_model_reduces_to_plain_spectrum(self):
        X = np.diag([1.0, -2.0, 0.5])
        model = constant_model([[0.0 + 0j]], 3)
        # constant zero C is fine here: only the product P C Q enters
        got = np.sort_complex(spike_spectrum(X, model))
        assert np.allclose(got, np.sort_complex(np.linalg.eigvals(X).astype(complex)))

    def test_hand_instance(self):
        X = np.zeros((3, 3))
        model = constant_model([[8j]], 3)
        ev = np.sort_complex(spike_spectrum(X, model))
        assert np.allclose(ev, [0.0, 0.0, 8j])

    def test_rejects_z_dependent_model(self):
        from spectral_lab.polyeig import hx_model

        with pytest.raises(ValueError):
            spike_spectrum(np.eye(4), hx_model([-1.0], 4))


class TestHxSpectrum:
    def test_empty_weights_leave_hermitian_spectrum_real(self):
        X = wigner(40, seed=1)
        ev = hx_spectrum([], X, verify_pencil=True)
        assert np.max(np.abs(ev.imag)) < 1e-10

    def test_pencil_route_agrees(self):
        X = wigner(60, seed=2)
        ev = hx_spectrum([-1.0, -2.0], X, verify_pencil=True)
        assert ev.shape == (60,)

    def test_small_fixed_instance_dual_route(self):
        X = np.array([
            [0.3, 1.0, 0.2, -0.4, 0.0],
            [1.0, -0.5, 0.6, 0.1, 0.3],
            [0.2, 0.6, 0.9, -0.2, 0.5],
            [-0.4, 0.1, -0.2, 0.0, 1.1],
            [0.0, 0.3, 0.5, 1.1, -0.7],
        ])
        c = [-1.5, -0.5]
        h = np.ones(5)
        h[:2] = c
        direct = hx_spectrum(c, X, verify_pencil=True)
        brute = np.linalg.eigvals(np.diag(h) @ X).astype(complex)
        assert multiset_max_distance(direct, brute) < 1e-10

    def test_conjugation_symmetry_for_real_input(self):
        X = wigner(50, seed=3)
        ev = hx_spectrum([-1.0, -2.0, -2.0], X)
        assert multiset_max_distance(ev, np.conj(ev)) < 1e-8

    def test_at_most_n_upper_half_eigenvalues(self):
        for t in range(5):
            X = wigner(120, seed=4, stream=(t,))
            ev = hx_spectrum([-1.0, -2.0, -2.0], X)
            assert upper_half_count(ev) <= 3

    def test_nonnegative_weight_rejected(self):
        with pytest.raises(ValueError):
            hx_spectrum([0.5], np.eye(3))


class TestQuadraticSpectrum:
    def test_linear_specialization(self):
        X = np.diag([2.0, -1.0, 0.3])
        scn = QuadraticScenario(p_coeffs=(0.0, 1.0), q_coeffs=(0.0,), u=unit_vector(3))
        ev = quadratic_spectrum(scn, X)
        assert np.allclose(np.sort_complex(ev), [-1.0, 0.3, 2.0], atol=1e-12)

    def test_diagonal_scalar_factorization_oracle(self):
        # X = diag(a, b), u = e1, p = z^2, q = 1: factors into
        # (a - z^2 + 1)(b - z^2) = 0
        a, b = 2.0, 0.7
        X = np.diag([a, b])
        scn = QuadraticScenario(p_coeffs=(0.0, 0.0, 1.0), q_coeffs=(1.0,), u=unit_vector(2))
        ev = np.sort_complex(quadratic_spectrum(scn, X))
        expected = np.sort_complex(np.array([
            np.sqrt(a + 1), -np.sqrt(a + 1), np.sqrt(b), -np.sqrt(b),
        ], dtype=complex))
        assert np.max(np.abs(ev - expected)) < 1e-10

    def test_diagonal_union_of_scalar_roots(self):
        rng = np.random.default_rng(5)
        for _ in range(5):
            N = int(rng.integers(2, 8))
            diag = rng.standard_normal(N)
            X = np.diag(diag)
            scn = QuadraticScenario(
                p_coeffs=(0.3, -0.2, 1.1), q_coeffs=(0.4, 0.9), u=unit_vector(N)
            )
            ev = quadratic_spectrum(scn, X)
            # oracle: first coordinate carries p and q, the rest only p
            roots = list(np.polynomial.Polynomial(
                (diag[0] - 0.3 + 0.4, 0.2 + 0.9, -1.1)).roots())
            for dj in diag[1:]:
                roots += list(np.polynomial.Polynomial((dj - 0.3, 0.2, -1.1)).roots())
            assert multiset_max_distance(ev, np.asarray(roots, dtype=complex)) < 1e-8

    def test_singular_leading_coefficient_reports_defect(self):
        # p quadratic with zero leading term on I minus compensating q
        N = 3
        scn = QuadraticScenario(
            p_coeffs=(0.0, 0.0, 1.0), q_coeffs=(0.0, 0.0, 1.0), u=unit_vector(N)
        )
        # leading coefficient: -I + u u^T, rank defect 1
        with pytest.raises(PolynomialDegeneracyError) as exc:
            quadratic_spectrum(scn, np.zeros((N, N)))
        assert exc.value.rank_defect == 1

    def test_acoustic_assembly_shapes(self):
        N = 8
        scn = acoustic_scenario(N)
        coeffs = assemble_quadratic(scn, np.zeros((N, N)))
        assert len(coeffs) == 3
        lead = coeffs[-1]
        expected = -4 * np.pi**2 * np.eye(N)
        expected[-1, -1] += 2 * np.pi**2
        assert np.allclose(lead, expected)
        ev = quadratic_spectrum(scn, wigner(N, seed=9))
        assert len(ev) == 2 * N  # leading coefficient regular: all finite


class TestSecularCheck:
    def test_q_zero_gives_one(self):
        N = 4
        scn = QuadraticScenario(p_coeffs=(0.0, 1.0), q_coeffs=(0.0,), u=unit_vector(N))
        X = np.diag([1.0, 2.0, 3.0, 4.0])
        assert secular_check(scn, X, 9.0 + 1j) == pytest.approx(1.0)

    def test_vanishes_at_quadratic_eigenvalues(self):
        rng = np.random.default_rng(6)
        N = 30
        X = wigner(N, seed=7)
        scn = QuadraticScenario(p_coeffs=(0.1, 0.0, 0.8), q_coeffs=(0.5, 0.2), u=unit_vector(N))
        ev = quadratic_spectrum(scn, X)
        spec_x = np.linalg.eigvalsh(X)
        checked = 0
        for lam in ev:
            plam = complex(scn.p()(lam))
            if np.min(np.abs(spec_x - plam)) < 1e-4:
                continue
            val = secular_check(scn, X, lam)
            assert abs(val) < 1e-6
            checked += 1
        assert checked > 0

    def test_decay_at_infinity(self):
        N = 5
        scn = QuadraticScenario(p_coeffs=(0.0, 1.0), q_coeffs=(0.3,), u=unit_vector(N))
        X = np.diag(np.arange(1.0, 6.0))
        val = secular_check(scn, X, 1e6j)
        assert val == pytest.approx(1.0, abs=1e-5)


class TestAcousticMonteCarlo:
    def test_edge_cluster_and_instability_report(self):
        # desk-size check: eigenvalues accumulate near the reference point
        # 0.3223 next to the image of the bulk edge; some trials show a
        # detached non-real pair (documented instability)
        N = 200
        hits = 0
        for t in range(5):
            scn = acoustic_scenario(N)
            X = wigner(N, seed=11, stream=(t,))
            ev = quadratic_spectrum(scn, X)
            hits += int(np.min(np.abs(ev - 0.3223)) < 0.05)
        assert hits >= 4
