"""Seeded Gaussian samplers for the two random-matrix ensembles.

Streams are derived from a Philox counter-based generator keyed by
(seed, *stream), so sweeps can fan trials out in any order and still
reproduce bit-identical matrices.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import blas

logger = logging.getLogger(__name__)


class EnsembleKind(Enum):
    WIGNER_REAL = "wigner-real"
    WIGNER_COMPLEX = "wigner-complex"
    MARCHENKO_PASTUR = "marchenko-pastur"


@dataclass(frozen=True)
class EnsembleSpec:
    kind: EnsembleKind
    N: int
    M: int | None = None  # MP factor rows; defaults to N
    seed: int = 0
    stream: tuple[int, ...] = ()

    def __post_init__(self):
        if self.N < 1:
            raise ValueError(f"N must be positive, got {self.N}")
        if self.kind is EnsembleKind.MARCHENKO_PASTUR:
            if self.rows < 1:
                raise ValueError(f"M must be positive, got {self.M}")
            if self.N > 1 and not self.N ** 0.25 <= self.rows <= self.N**4:
                # factor dimensions should stay polynomially comparable
                logger.warning("extreme aspect ratio M=%d vs N=%d", self.rows, self.N)
        elif self.M is not None:
            raise ValueError("M only applies to the Marchenko-Pastur kind")

    @property
    def rows(self) -> int:
        return self.N if self.M is None else self.M


def rng_stream(seed: int, *stream: int) -> np.random.Generator:
    """Philox generator for the derived stream (seed, *stream)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=stream)))


def sample_wigner(spec: EnsembleSpec) -> np.ndarray:
    """One draw of an N x N Gaussian Wigner matrix, exactly Hermitian.

    Off-diagonal entries have total variance 1/N (complex kind: independent
    real and imaginary parts of variance 1/(2N) each).  The diagonal is real
    Gaussian with variance 2/N in the real kind (GOE convention) and 1/N in
    the complex kind.
    """
    if spec.kind not in (EnsembleKind.WIGNER_REAL, EnsembleKind.WIGNER_COMPLEX):
        raise ValueError(f"not a Wigner spec: {spec.kind}")
    N = spec.N
    rng = rng_stream(spec.seed, *spec.stream)
    scale = 1.0 / math.sqrt(N)
    if spec.kind is EnsembleKind.WIGNER_REAL:
        A = rng.normal(0.0, scale, (N, N))
        W = np.triu(A, 1)
        W = W + W.T
        W[np.diag_indices(N)] = rng.normal(0.0, math.sqrt(2.0 / N), N)
        return W
    A = rng.normal(0.0, scale / math.sqrt(2.0), (2, N, N))
    U = np.triu(A[0] + 1j * A[1], 1)
    W = U + U.conj().T
    W[np.diag_indices(N)] = rng.normal(0.0, scale, N)
    return W


def sample_mp(spec: EnsembleSpec) -> tuple[np.ndarray, np.ndarray]:
    """One draw (Y, X) with Y the M x N real Gaussian factor and X = Y^T Y.

    Entries of Y have variance 1/sqrt(NM); X is Hermitian positive
    semi-definite by construction (one triangle computed, then mirrored).
    """
    if spec.kind is not EnsembleKind.MARCHENKO_PASTUR:
        raise ValueError(f"not a Marchenko-Pastur spec: {spec.kind}")
    N, M = spec.N, spec.rows
    rng = rng_stream(spec.seed, *spec.stream)
    Y = rng.normal(0.0, (N * M) ** -0.25, (M, N))
    upper = blas.dsyrk(1.0, Y, trans=1)  # upper triangle of Y^T Y
    X = np.triu(upper, 1)
    X = X + X.T
    X[np.diag_indices(N)] = upper.diagonal()
    return Y, X


def sample(spec: EnsembleSpec) -> np.ndarray:
    """The square random matrix of the spec (the product matrix for MP)."""
    if spec.kind is EnsembleKind.MARCHENKO_PASTUR:
        return sample_mp(spec)[1]
    return sample_wigner(spec)
