"""Signal, pencil and noise-decay tests for the mode-recovery pipeline."""

from __future__ import annotations

import numpy as np
import pytest

from spectral_lab.hankel import (
    ModeRecoveryError,
    SignalModel,
    hankel_pencil,
    match_modes,
    mode_vandermonde,
    noise_resolvent_decay,
    pencil_modes,
    synth_signal,
)


class TestSynthSignal:
    def test_impulse_mode(self):
        model = SignalModel(modes=((1.0, 0.0),), n=4, noise_sigma=0.0)
        s = synth_signal(model)
        assert np.allclose(s, [1, 0, 0, 0, 0, 0, 0, 0])

    def test_geometric_sequence(self):
        model = SignalModel(modes=((1.0, 0.5),), n=3)
        assert np.allclose(synth_signal(model), [1, 1 / 2, 1 / 4, 1 / 8, 1 / 16, 1 / 32])

    def test_noise_is_unbiased(self):
        clean = synth_signal(SignalModel(modes=((1.0, 0.5),), n=3))
        draws = np.array([
            synth_signal(SignalModel(modes=((1.0, 0.5),), n=3, noise_sigma=1.0,
                                     seed=1, stream=(t,)))
            for t in range(1000)
        ])
        err = draws.mean(axis=0) - clean
        assert np.max(np.abs(err)) < 5.0 / np.sqrt(1000)

    def test_pole_outside_disk_rejected(self):
        with pytest.raises(ValueError):
            SignalModel(modes=((1.0, 1.0),), n=3)


class TestHankelPencil:
    def test_zero_signal(self):
        U0, U1 = hankel_pencil(np.zeros(8))
        assert not U0.any() and not U1.any()

    def test_index_arithmetic(self):
        s = np.array([1, 1 / 2, 1 / 4, 1 / 8])
        U0, U1 = hankel_pencil(s)
        assert np.allclose(U0, [[1, 1 / 2], [1 / 2, 1 / 4]])
        assert np.allclose(U1, [[1 / 2, 1 / 4], [1 / 4, 1 / 8]])

    def test_antidiagonal_constancy(self):
        s = np.arange(12.0)
        U0, U1 = hankel_pencil(s)
        n = 6
        for d in range(2 * n - 1):
            vals = [U0[i, d - i] for i in range(max(0, d - n + 1), min(n, d + 1))]
            assert len(set(vals)) == 1

    def test_odd_length_rejected(self):
        with pytest.raises(ValueError):
            hankel_pencil(np.zeros(7))

    def test_rank_equals_mode_count(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            kk = int(rng.integers(1, 4))
            modes = tuple(
                (complex(rng.normal(), rng.normal()),
                 0.8 * np.exp(2j * np.pi * rng.random()) * rng.uniform(0.3, 1.0))
                for _ in range(kk)
            )
            model = SignalModel(modes=modes, n=6)
            U0, _ = hankel_pencil(synth_signal(model))
            sv = np.linalg.svd(U0, compute_uv=False)
            rank = int(np.sum(sv > 1e-10 * max(sv[0], 1e-300)))
            assert rank == kk

    def test_vandermonde_identity(self):
        # z U0 - U1 = sum_k a_k (z - z_k) u_k u_k^T entrywise
        rng = np.random.default_rng(2)
        modes = ((0.7 + 0.2j, 0.6), (-0.5, 0.4j), (1.1, -0.3 + 0.5j))
        n = 5
        model = SignalModel(modes=modes, n=n)
        U0, U1 = hankel_pencil(synth_signal(model))
        for _ in range(5):
            z = complex(rng.normal(), rng.normal())
            lhs = z * U0 - U1
            rhs = np.zeros((n, n), dtype=complex)
            for a, zk in modes:
                u = mode_vandermonde([zk], n)[:, 0]
                rhs += a * (z - zk) * np.outer(u, u)
            assert np.max(np.abs(lhs - rhs)) < 1e-12


class TestPencilModes:
    def test_single_mode_exact(self):
        model = SignalModel(modes=((1.0, 0.5),), n=4)
        U0, U1 = hankel_pencil(synth_signal(model))
        (z,) = pencil_modes(U0, U1, 1)
        assert abs(z - 0.5) < 1e-10

    def test_two_modes_recovered(self):
        modes = ((1.0, 0.9), (1.0, 0.5 * np.exp(1j * np.pi / 4)))
        model = SignalModel(modes=modes, n=8)
        U0, U1 = hankel_pencil(synth_signal(model))
        got = pencil_modes(U0, U1, 2)
        pairs = match_modes(got, [m[1] for m in modes])
        assert all(err < 1e-8 for _, _, err in pairs)

    def test_all_noise_returns_most_stable(self):
        model = SignalModel(modes=(), n=16, noise_sigma=1.0, seed=3)
        U0, U1 = hankel_pencil(synth_signal(model))
        (z,) = pencil_modes(U0, U1, 1)
        assert np.isfinite(z)

    def test_too_many_modes_requested(self):
        model = SignalModel(modes=((1.0, 0.5),), n=4)
        U0, U1 = hankel_pencil(synth_signal(model))
        with pytest.raises(ValueError):
            pencil_modes(U0, U1, 5)

    def test_rank_deficient_shortfall_reports_count(self):
        # rank-1 noiseless pencil can produce at most one eigenvalue
        model = SignalModel(modes=((1.0, 0.5),), n=6)
        U0, U1 = hankel_pencil(synth_signal(model))
        with pytest.raises(ModeRecoveryError) as exc:
            pencil_modes(U0, U1, 3)
        assert exc.value.found == 1

    def test_recovery_error_shrinks_with_n(self):
        modes = ((1.0, 0.9), (1.0, 0.5 * np.exp(1j * np.pi / 4)))
        true = [m[1] for m in modes]
        medians = []
        for n in (8, 16, 32):
            errs = []
            for t in range(50):
                model = SignalModel(modes=modes, n=n, noise_sigma=1e-2, seed=4, stream=(n, t))
                U0, U1 = hankel_pencil(synth_signal(model))
                got = pencil_modes(U0, U1, 2)
                errs.append(max(err for _, _, err in match_modes(got, true)))
            medians.append(np.median(errs))
        assert medians[2] <= medians[1] <= medians[0]


class TestNoiseResolventDecay:
    def test_deterministic_and_consistent(self):
        res = noise_resolvent_decay([32, 64, 128, 256], 2.0, trials=30, sigma=1.0, seed=5)
        res2 = noise_resolvent_decay([32, 64, 128, 256], 2.0, trials=30, sigma=1.0, seed=5)
        assert res.estimate.slope == res2.estimate.slope  # bit-for-bit
        assert res.discarded == 0
        assert -0.75 <= res.estimate.slope <= -0.25

    def test_zero_trials_rejected(self):
        with pytest.raises(ValueError):
            noise_resolvent_decay([32, 64], 2.0, trials=0, sigma=1.0, seed=0)

    def test_probe_near_unit_circle_rejected(self):
        with pytest.raises(ValueError):
            noise_resolvent_decay([32, 64], 1.0005, trials=5, sigma=1.0, seed=0)
