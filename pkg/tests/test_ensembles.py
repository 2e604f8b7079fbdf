"""Moment, support and determinism checks for the matrix samplers."""

from __future__ import annotations

import numpy as np
import pytest

from spectral_lab.ensembles import (
    EnsembleKind,
    EnsembleSpec,
    rng_stream,
    sample,
    sample_mp,
    sample_wigner,
)


def wigner_spec(N, seed=0, kind=EnsembleKind.WIGNER_REAL, stream=()):
    return EnsembleSpec(kind=kind, N=N, seed=seed, stream=stream)


def mp_spec(N, M=None, seed=0, stream=()):
    return EnsembleSpec(kind=EnsembleKind.MARCHENKO_PASTUR, N=N, M=M, seed=seed, stream=stream)


class TestWigner:
    def test_degenerate_size_documents_diagonal_convention(self):
        draws = [sample_wigner(wigner_spec(1, seed=s))[0, 0] for s in range(4000)]
        assert np.var(draws) == pytest.approx(2.0, rel=0.15)

    def test_trace_normalization(self):
        vals = []
        for t in range(20):
            W = sample_wigner(wigner_spec(500, seed=1, stream=(t,)))
            vals.append(np.trace(W @ W).real / 500)
        assert 0.9 <= np.mean(vals) <= 1.1

    def test_largest_eigenvalue_near_bulk_edge(self):
        hits = 0
        for t in range(20):
            W = sample_wigner(wigner_spec(2000, seed=2, stream=(t,)))
            lam = np.linalg.eigvalsh(W)[-1]
            hits += 1.9 <= lam <= 2.2
        assert hits >= 19

    def test_exactly_hermitian(self):
        for kind in (EnsembleKind.WIGNER_REAL, EnsembleKind.WIGNER_COMPLEX):
            W = sample_wigner(wigner_spec(64, seed=3, kind=kind))
            assert np.array_equal(W, W.conj().T)

    def test_complex_entry_moments(self):
        N = 1000
        W = sample_wigner(wigner_spec(N, seed=4, kind=EnsembleKind.WIGNER_COMPLEX))
        off = W[np.triu_indices(N, 1)]
        # 5 standard errors on mean ~ 5/sqrt(N * count); variance target 1/N
        assert abs(off.mean()) < 5 * np.sqrt(1.0 / N / off.size)
        assert np.mean(np.abs(off) ** 2) * N == pytest.approx(1.0, rel=0.05)
        assert np.all(W.diagonal().imag == 0.0)

    def test_real_entry_moments(self):
        N = 1000
        W = sample_wigner(wigner_spec(N, seed=5))
        off = W[np.triu_indices(N, 1)]
        assert np.mean(off**2) * N == pytest.approx(1.0, rel=0.05)
        assert np.mean(W.diagonal() ** 2) * N == pytest.approx(2.0, rel=0.5)


class TestMarchenkoPastur:
    def test_degenerate_size(self):
        draws = []
        for s in range(4000):
            Y, X = sample_mp(mp_spec(1, seed=s))
            assert X[0, 0] == pytest.approx(abs(Y[0, 0]) ** 2)
            draws.append(Y[0, 0])
        assert np.var(draws) == pytest.approx(1.0, rel=0.15)

    def test_trace_normalization(self):
        vals = []
        for t in range(20):
            _, X = sample_mp(mp_spec(500, seed=6, stream=(t,)))
            vals.append(np.trace(X) / 500)
        assert 0.9 <= np.mean(vals) <= 1.1

    def test_support_within_bulk_margin(self):
        for t in range(3):
            _, X = sample_mp(mp_spec(1000, seed=7, stream=(t,)))
            lam = np.linalg.eigvalsh(X)
            assert lam.min() >= -0.1
            assert lam.max() <= 4.2

    def test_rectangular_shapes(self):
        Y, X = sample_mp(mp_spec(50, M=100, seed=8))
        assert Y.shape == (100, 50)
        assert X.shape == (50, 50)

    def test_psd_and_exactly_symmetric(self):
        _, X = sample_mp(mp_spec(80, seed=9))
        assert np.array_equal(X, X.T)
        assert np.linalg.eigvalsh(X).min() >= -1e-12


class TestDeterminism:
    def test_identical_spec_identical_matrix(self):
        a = sample_wigner(wigner_spec(100, seed=42, stream=(3, 7)))
        b = sample_wigner(wigner_spec(100, seed=42, stream=(3, 7)))
        assert np.array_equal(a, b)
        c = sample_wigner(wigner_spec(100, seed=42, stream=(3, 8)))
        assert not np.array_equal(a, c)

    def test_mp_identical(self):
        a = sample_mp(mp_spec(60, seed=1, stream=(5,)))[1]
        b = sample_mp(mp_spec(60, seed=1, stream=(5,)))[1]
        assert np.array_equal(a, b)

    def test_streams_independent_of_creation_order(self):
        first = rng_stream(0, 2).normal(size=4)
        _ = rng_stream(0, 1).normal(size=4)
        again = rng_stream(0, 2).normal(size=4)
        assert np.array_equal(first, again)

    def test_sample_dispatch(self):
        assert np.array_equal(sample(wigner_spec(10, seed=5)), sample_wigner(wigner_spec(10, seed=5)))
        assert np.array_equal(sample(mp_spec(10, seed=5)), sample_mp(mp_spec(10, seed=5))[1])


class TestValidation:
    def test_bad_sizes(self):
        with pytest.raises(ValueError):
            EnsembleSpec(kind=EnsembleKind.WIGNER_REAL, N=0)
        with pytest.raises(ValueError):
            EnsembleSpec(kind=EnsembleKind.MARCHENKO_PASTUR, N=5, M=0)

    def test_m_rejected_for_wigner(self):
        with pytest.raises(ValueError):
            EnsembleSpec(kind=EnsembleKind.WIGNER_REAL, N=5, M=5)

    def test_kind_mismatch(self):
        with pytest.raises(ValueError):
            sample_wigner(mp_spec(5))
        with pytest.raises(ValueError):
            sample_mp(wigner_spec(5))
