"""Spectra of the perturbed objects under study: additive spikes X + A,
diagonal-weighted products H X (directly and through the equivalent linear
pencil), and scalar-polynomial rank-one deformations X - p(z) I + q(z) u u*."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize

from .matops import spectrum
from .perturbation import MatrixPoly, PerturbationModel, corner_embedding
from .stieltjes import WIGNER, LimitLaw

INF_EIGENVALUE_CUTOFF = 1e8
UPPER_HALF_PLANE_TOL = 1e-6
RCOND_DEGENERATE = 1e-13


class PolynomialDegeneracyError(np.linalg.LinAlgError):
    """Leading coefficient of the assembled matrix polynomial is singular."""

    def __init__(self, rank_defect: int):
        super().__init__(f"leading coefficient singular with rank defect {rank_defect}")
        self.rank_defect = rank_defect


@dataclass(frozen=True)
class QuadraticScenario:
    """Rank-one scalar-polynomial deformation of a random matrix.

    p_coeffs and q_coeffs are ascending scalar coefficients; u is the unit
    deformation direction with a bounded number of nonzero entries.
    """

    p_coeffs: tuple[complex, ...]
    q_coeffs: tuple[complex, ...]
    u: np.ndarray
    law: LimitLaw = WIGNER
    zeta: complex | None = None

    def __post_init__(self):
        u = np.asarray(self.u, dtype=complex).reshape(-1)
        if abs(np.linalg.norm(u) - 1.0) > 1e-12:
            raise ValueError("deformation direction must have unit norm")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "p_coeffs", tuple(complex(c) for c in self.p_coeffs))
        object.__setattr__(self, "q_coeffs", tuple(complex(c) for c in self.q_coeffs))

    @property
    def nonzeros(self) -> int:
        return int(np.count_nonzero(self.u))

    def p(self) -> np.polynomial.Polynomial:
        return np.polynomial.Polynomial(self.p_coeffs)

    def q(self) -> np.polynomial.Polynomial:
        return np.polynomial.Polynomial(self.q_coeffs)


def acoustic_scenario(N: int, zeta: complex = 1.0) -> QuadraticScenario:
    """Wave-equation discretisation scenario: p = 4 pi^2 z^2 - 2,
    q = 2 pi^2 z^2 + (2 pi i / zeta) z - 1, direction = last basis vector."""
    u = np.zeros(N)
    u[-1] = 1.0
    return QuadraticScenario(
        p_coeffs=(-2.0, 0.0, 4 * math.pi**2),
        q_coeffs=(-1.0, 2j * math.pi / zeta, 2 * math.pi**2),
        u=u,
        law=WIGNER,
        zeta=zeta,
    )


def hx_model(c, N: int) -> PerturbationModel:
    """Linear-pencil factors equivalent to the product H X: the pencil
    X - z I + z P diag(1 - 1/c_j) Q shares its spectrum with H X."""
    n = len(c)
    CH = np.diag([1.0 - 1.0 / float(v) for v in c]).astype(complex)
    P, Q = corner_embedding(n, N)
    return PerturbationModel(P=P, Cpoly=MatrixPoly([np.zeros((n, n)), CH]), Q=Q)


def spike_spectrum(X: np.ndarray, model: PerturbationModel) -> np.ndarray:
    """Spectrum of X + P C Q for a constant C."""
    if model.Cpoly.degree != 0:
        raise ValueError("spike spectra need a constant perturbation")
    A = model.P @ model.Cpoly.coeffs[0] @ model.Q
    return spectrum(np.asarray(X) + A)


def multiset_max_distance(a, b) -> float:
    """Largest pairing distance under the optimal matching of two spectra.

    Lexicographic sorting is unreliable here: conjugate pairs share real
    parts up to rounding and can swap partners between two computation
    routes, so the comparison must solve the assignment problem.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError("multisets differ in size")
    if a.size == 0:
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = scipy.optimize.linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def hx_spectrum(c, X: np.ndarray, verify_pencil: bool = False) -> np.ndarray:
    """Spectrum of H X with H = diag(c_1..c_n, 1, .., 1).

    With verify_pencil the eigenvalues are recomputed through the linear
    pencil X - z(I - P C Q) and the two multisets are asserted equal to
    1e-8, which exercises the factorisation the theory rests on.
    """
    c = [float(v) for v in c]
    if any(v >= 0 for v in c):
        raise ValueError("all weights must be negative")
    X = np.asarray(X)
    N = X.shape[0]
    if len(c) > N:
        raise ValueError("more weights than matrix dimensions")
    h = np.ones(N)
    h[: len(c)] = c
    ev = spectrum(h[:, None] * X)
    if verify_pencil:
        model = hx_model(c, N) if c else None
        B = np.eye(N, dtype=complex)
        if model is not None:
            B -= model.P @ model.Cpoly.coeffs[1] @ model.Q
        pencil = scipy.linalg.eigvals(X.astype(complex), B)
        if multiset_max_distance(ev, pencil) > 1e-8:
            raise AssertionError("product and pencil spectra disagree beyond 1e-8")
    return ev


def assemble_quadratic(scn: QuadraticScenario, X: np.ndarray) -> list[np.ndarray]:
    """Coefficients of X - p(z) I + q(z) u u* as a list by power of z."""
    X = np.asarray(X, dtype=complex)
    N = X.shape[0]
    p, q = scn.p_coeffs, scn.q_coeffs
    d = max(len(p), len(q)) - 1
    U = np.outer(scn.u, scn.u.conj())
    coeffs = []
    for i in range(d + 1):
        Ai = np.zeros((N, N), dtype=complex)
        if i == 0:
            Ai += X
        if i < len(p):
            Ai -= p[i] * np.eye(N)
        if i < len(q):
            Ai += q[i] * U
        coeffs.append(Ai)
    return coeffs


def quadratic_spectrum(scn: QuadraticScenario, X: np.ndarray) -> np.ndarray:
    """All finite eigenvalues of the assembled matrix polynomial.

    Uses the first companion linearisation; with the leading coefficient
    invertible the companion pencil reduces to a standard eigenproblem of
    size d*N.  A singular leading coefficient raises
    PolynomialDegeneracyError carrying the rank defect.  Eigenvalues of
    magnitude above 1e8 are treated as infinite and dropped.
    """
    coeffs = assemble_quadratic(scn, X)
    d = len(coeffs) - 1
    if d < 1:
        raise ValueError("assembled polynomial must have degree at least 1")
    N = coeffs[0].shape[0]
    lead = coeffs[-1]
    sv = np.linalg.svd(lead, compute_uv=False)
    if sv[0] == 0.0 or sv[-1] / sv[0] < RCOND_DEGENERATE:
        defect = int(np.sum(sv < sv[0] * RCOND_DEGENERATE)) if sv[0] > 0 else N
        raise PolynomialDegeneracyError(defect)
    if d == 1:
        reduced = np.linalg.solve(lead, -coeffs[0])
        ev = spectrum(reduced)
    else:
        lower = np.linalg.solve(lead, -np.hstack(coeffs[:-1]))
        comp = np.zeros((d * N, d * N), dtype=complex)
        comp[: (d - 1) * N, N:] = np.eye((d - 1) * N)
        comp[(d - 1) * N :, :] = lower
        ev = spectrum(comp)
    return ev[np.abs(ev) < INF_EIGENVALUE_CUTOFF]


def secular_check(scn: QuadraticScenario, X: np.ndarray, z: complex) -> complex:
    """Rank-one secular value 1 + q(z) u*(X - p(z) I)^(-1) u.

    Vanishes exactly at the eigenvalues of the deformed polynomial away
    from points where p(z) meets the spectrum of X.
    """
    X = np.asarray(X, dtype=complex)
    N = X.shape[0]
    shifted = X - complex(scn.p()(z)) * np.eye(N)
    sv = np.linalg.svd(shifted, compute_uv=False)
    if sv[0] == 0.0 or sv[-1] / sv[0] < RCOND_DEGENERATE:
        raise np.linalg.LinAlgError("p(z) lies in the spectrum of X")
    w = np.linalg.solve(shifted, scn.u)
    return 1.0 + complex(scn.q()(z)) * complex(scn.u.conj() @ w)


def upper_half_count(ev, tol: float = UPPER_HALF_PLANE_TOL) -> int:
    """Eigenvalues genuinely above the real axis (Im > tol)."""
    ev = np.asarray(ev)
    return int(np.sum(ev.imag > tol))
