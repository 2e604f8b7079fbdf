"""Low-rank deformation core: A(z) = P C(z) Q, the coupling matrix K(z),
its finite-N counterpart L(z), the deformed limit resolvent, and the
window test that excludes neighbourhoods of predicted outliers."""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .matops import SingularUpdateError, norm, sparsity_counts, woodbury_inverse
from .stieltjes import BulkDomainError, LimitLaw, WindowParams, in_spectral_window

if TYPE_CHECKING:  # pragma: no cover
    from .outliers import JordanSpec

logger = logging.getLogger(__name__)

RCOND_SINGULAR = 1e-13


class SingularPolynomialError(np.linalg.LinAlgError):
    """C(z) is singular at the requested point."""


@dataclass(frozen=True)
class MatrixPoly:
    """Matrix polynomial sum_i z^i coeffs[i] with square coefficients."""

    coeffs: tuple[np.ndarray, ...]

    def __init__(self, coeffs):
        coeffs = tuple(np.asarray(c, dtype=complex) for c in coeffs)
        if not coeffs:
            raise ValueError("a matrix polynomial needs at least one coefficient")
        n = coeffs[0].shape[0]
        for c in coeffs:
            if c.shape != (n, n):
                raise ValueError("coefficients must be square and of equal size")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def n(self) -> int:
        return self.coeffs[0].shape[0]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z: complex) -> np.ndarray:
        acc = self.coeffs[-1].copy()
        for c in reversed(self.coeffs[:-1]):
            acc = acc * z + c
        return acc


def constant_poly(C) -> MatrixPoly:
    return MatrixPoly([np.atleast_2d(np.asarray(C, dtype=complex))])


@dataclass(frozen=True)
class PerturbationModel:
    """Factors of the structured perturbation A(z) = P C(z) Q.

    P is N x n, C(z) an n x n matrix polynomial and Q is n x N.  The
    spectral norms and sparsity counts of the factors are recorded on
    construction; they are the quantities that must stay bounded for the
    deformation theory to apply.
    """

    P: np.ndarray
    Cpoly: MatrixPoly
    Q: np.ndarray

    def __post_init__(self):
        P = np.asarray(self.P, dtype=complex)
        Q = np.asarray(self.Q, dtype=complex)
        n = self.Cpoly.n
        if P.ndim != 2 or Q.ndim != 2 or P.shape[1] != n or Q.shape[0] != n:
            raise ValueError(
                f"factor shapes {P.shape}, {Q.shape} incompatible with n = {n}"
            )
        if P.shape[0] != Q.shape[1]:
            raise ValueError("P and Q must embed into the same ambient dimension")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "Q", Q)
        if n > max(1.0, math.log(self.N)):
            logger.warning(
                "rank n = %d exceeds log N = %.2f; constant-rank asymptotics "
                "are stretched", n, math.log(self.N),
            )

    @property
    def N(self) -> int:
        return self.P.shape[0]

    @property
    def n(self) -> int:
        return self.Cpoly.n

    def factor_stats(self) -> dict:
        rQ, _ = sparsity_counts(self.Q)
        _, cP = sparsity_counts(self.P)
        return {
            "P_2": norm(self.P, "2"),
            "Q_2": norm(self.Q, "2"),
            "c_P": cP,
            "r_Q": rQ,
        }

    def coupling(self) -> np.ndarray:
        """The n x n product Q P entering the coupling matrix."""
        return self.Q @ self.P


def corner_embedding(n: int, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Standard embedding factors: P = [I_n; 0], Q = P^T."""
    if n > N:
        raise ValueError(f"rank n = {n} exceeds ambient dimension N = {N}")
    P = np.zeros((N, n), dtype=complex)
    P[:n, :n] = np.eye(n)
    return P, P.conj().T.copy()


def constant_model(C, N: int) -> PerturbationModel:
    """Corner-embedded constant perturbation A = P C Q."""
    Cp = constant_poly(C)
    P, Q = corner_embedding(Cp.n, N)
    return PerturbationModel(P=P, Cpoly=Cp, Q=Q)


def zero_model(N: int) -> PerturbationModel:
    """A = 0 through zero factors around an invertible scalar C."""
    return PerturbationModel(
        P=np.zeros((N, 1), dtype=complex),
        Cpoly=constant_poly([[1.0]]),
        Q=np.zeros((1, N), dtype=complex),
    )


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned closed rectangle [x0, x1] x [y0, y1] in the plane."""

    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        if self.x0 > self.x1 or self.y0 > self.y1:
            raise ValueError("rectangle bounds are inverted")

    def contains(self, z: complex) -> bool:
        z = complex(z)
        return self.x0 <= z.real <= self.x1 and self.y0 <= z.imag <= self.y1

    def grid(self, resolution: float) -> np.ndarray:
        xs = np.arange(self.x0, self.x1 + resolution / 2, resolution)
        ys = np.arange(self.y0, self.y1 + resolution / 2, resolution)
        return np.array([complex(x, y) for y in ys for x in xs])


@dataclass(frozen=True)
class DeformedWindowParams:
    """Threshold exponent and base region for the deformed window test.

    A WindowParams base selects the size-dependent window (threshold
    exponent beta * omega in the specialised test); a Rectangle base is
    the compact-set variant (threshold exponent beta).
    """

    beta: float
    base: WindowParams | Rectangle
    jordan: "JordanSpec | None" = None

    def __post_init__(self):
        if not 0.0 < self.beta < 0.5:
            raise ValueError(f"beta must lie in (0, 1/2), got {self.beta}")


def eval_perturbation(model: PerturbationModel, z: complex) -> np.ndarray:
    """The ambient N x N perturbation P C(z) Q."""
    return model.P @ model.Cpoly(z) @ model.Q


def _inv_or_raise(A: np.ndarray, what: str) -> np.ndarray:
    s = np.linalg.svd(A, compute_uv=False)
    rc = float(s[-1] / s[0]) if s[0] > 0 else 0.0
    if rc < RCOND_SINGULAR:
        raise SingularPolynomialError(f"{what} is singular (rcond {rc:.3e})")
    return np.linalg.inv(A)


def k_of_z(model: PerturbationModel, law: LimitLaw, z: complex,
           boundary: bool = False) -> np.ndarray:
    """Coupling matrix C(z)^(-1) + m(z) Q P; its singular points are the
    predicted outlier locations."""
    Cinv = _inv_or_raise(model.Cpoly(z), "C(z)")
    return Cinv + law.m(z, boundary=boundary) * model.coupling()


def l_of_z(model: PerturbationModel, Xres: np.ndarray, z: complex) -> np.ndarray:
    """Finite-N coupling matrix C(z)^(-1) + Q X(z)^(-1) P.

    With X(z) invertible, det L(z) = 0 exactly at the eigenvalues of
    X(z) + A(z), so its zero set carries the perturbed spectrum.
    """
    Cinv = _inv_or_raise(model.Cpoly(z), "C(z)")
    return Cinv + model.Q @ np.asarray(Xres) @ model.P


def k_condition(model: PerturbationModel, law: LimitLaw, z: complex) -> tuple[float, float]:
    """(smallest singular value, reciprocal condition) of K(z)."""
    s = np.linalg.svd(k_of_z(model, law, z), compute_uv=False)
    rc = float(s[-1] / s[0]) if s[0] > 0 else 0.0
    return float(s[-1]), rc


def limit_resolvent(model: PerturbationModel, law: LimitLaw, z: complex,
                    boundary: bool = False) -> np.ndarray:
    """Deformed limit of the resolvent: m I - m^2 P K(z)^(-1) Q.

    Raises SingularUpdateError when K(z) is singular, i.e. exactly when z
    is a predicted outlier location.
    """
    m = law.m(z, boundary=boundary)
    K = k_of_z(model, law, z, boundary=boundary)
    s = np.linalg.svd(K, compute_uv=False)
    rc = float(s[-1] / s[0]) if s[0] > 0 else 0.0
    if rc < RCOND_SINGULAR:
        raise SingularUpdateError(rc)
    N = model.N
    out = -m * m * (model.P @ np.linalg.solve(K, model.Q))
    out[np.diag_indices(N)] += m
    return out


def in_deformed_window(model: PerturbationModel, law: LimitLaw, z: complex,
                       params: DeformedWindowParams, N: int) -> bool:
    """Membership in the deformed window: base region minus the blow-up set.

    General form: K(z) invertible and ||K(z)^(-1)||_2 < N^beta.  When
    params.jordan supplies the spectral structure of D = C Q P, the
    specialised test min over eigenvalues xi of |1 + xi m(z)|^(p_xi)
    >= N^(-beta*omega) (window base) or N^(-beta) (rectangle base) is
    used instead.
    """
    z = complex(z)
    base = params.base
    if isinstance(base, Rectangle):
        if not base.contains(z):
            return False
        threshold_exp = params.beta
    else:
        eff = dataclasses.replace(base, N=N)
        if not in_spectral_window(law, z, eff):
            return False
        threshold_exp = params.beta * base.omega

    try:
        if params.jordan is not None:
            m = law.m(z)
            worst = min(
                abs(1.0 + entry.xi * m) ** entry.p
                for entry in params.jordan.entries
            )
            return worst >= N ** (-threshold_exp)
        K = k_of_z(model, law, z)
    except (BulkDomainError, SingularPolynomialError):
        return False
    s = np.linalg.svd(K, compute_uv=False)
    if s[-1] == 0.0 or s[-1] / s[0] < RCOND_SINGULAR:
        return False
    return 1.0 / s[-1] < N**params.beta


def resolvent_error(Xz_plus_A: np.ndarray, model: PerturbationModel,
                    law: LimitLaw, z: complex) -> float:
    """Max-norm distance between the actual inverse and the deformed limit.

    The inverse of the input is computed along the low-rank update route:
    the unperturbed part X(z) = input - P C(z) Q is inverted densely and
    the update formula produces (X(z) + A(z))^(-1).
    """
    S = np.asarray(Xz_plus_A)
    if not np.all(np.isfinite(S)):
        raise ValueError("input matrix has non-finite entries")
    Cz = model.Cpoly(z)
    X = S - model.P @ Cz @ model.Q
    Xinv = np.linalg.inv(X)
    inv = woodbury_inverse(Xinv, model.P, _inv_or_raise(Cz, "C(z)"), model.Q)
    return norm(inv - limit_resolvent(model, law, z), "max")
