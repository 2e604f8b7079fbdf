"""Closed-form spectral limit laws and their evaluation windows.

Two bulk laws are supported: the semicircle law on [-2, 2] and the
Marchenko-Pastur law with aspect ratio phi on [gamma_minus, gamma_plus].
Each law carries its Stieltjes transform m(z), the per-size accuracy
scale psi(z, N), and the rectangle-with-floor membership test for the
spectral window where the local limit law is trusted.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum


class LawKind(Enum):
    WIGNER = "wigner"
    MARCHENKO_PASTUR = "marchenko-pastur"


class BulkDomainError(ValueError):
    """Raised when m(z) is requested on the bulk cut without boundary mode."""


@dataclass(frozen=True)
class LimitLaw:
    """A bulk law: which transform applies and where its support lies.

    phi is the aspect ratio M/N of the underlying rectangular factor and
    is ignored for the Wigner kind.
    """

    kind: LawKind = LawKind.WIGNER
    phi: float = 1.0

    def __post_init__(self):
        if self.kind is LawKind.MARCHENKO_PASTUR and self.phi <= 0:
            raise ValueError(f"aspect ratio must be positive, got {self.phi}")

    @property
    def support(self) -> tuple[float, float]:
        if self.kind is LawKind.WIGNER:
            return (-2.0, 2.0)
        return (self.gamma_minus, self.gamma_plus)

    @property
    def gamma_minus(self) -> float:
        s = math.sqrt(self.phi)
        return s + 1.0 / s - 2.0

    @property
    def gamma_plus(self) -> float:
        s = math.sqrt(self.phi)
        return s + 1.0 / s + 2.0

    def m(self, z: complex, boundary: bool = False) -> complex:
        """Stieltjes transform of this law at z."""
        if self.kind is LawKind.WIGNER:
            return m_wigner(z, boundary=boundary)
        return m_mp(z, self, boundary=boundary)


WIGNER = LimitLaw(LawKind.WIGNER)


def mp_law(phi: float) -> LimitLaw:
    return LimitLaw(LawKind.MARCHENKO_PASTUR, phi)


@dataclass(frozen=True)
class WindowParams:
    """Window shape parameters: aperture omega and exponent beta."""

    omega: float
    N: int
    beta: float = 0.45

    def __post_init__(self):
        if not 0.0 < self.omega < 1.0:
            raise ValueError(f"omega must lie in (0, 1), got {self.omega}")
        if not 0.0 < self.beta < 0.5:
            raise ValueError(f"beta must lie in (0, 1/2), got {self.beta}")
        if self.N < 1:
            raise ValueError(f"N must be positive, got {self.N}")


def _edge_product_sqrt(z: complex, lo: float, hi: float) -> complex:
    # sqrt(z-lo)*sqrt(z-hi) with principal roots: the branch of
    # sqrt((z-lo)(z-hi)) that behaves like z at infinity and is analytic
    # off [lo, hi]; this is what makes m Herglotz in the upper half-plane.
    return cmath.sqrt(z - lo) * cmath.sqrt(z - hi)


def _on_real_axis(z: complex) -> bool:
    return z.imag == 0.0


def m_wigner(z: complex, boundary: bool = False) -> complex:
    """Stieltjes transform of the semicircle law, Herglotz branch.

    Satisfies m^2 + z*m + 1 = 0 with Im m > 0 for Im z > 0 and
    m(conj z) = conj(m(z)).  Real z inside the open bulk (-2, 2) is an
    error unless ``boundary`` is set, in which case the limit from the
    upper half-plane is returned (so m(0) = i).
    """
    z = complex(z)
    if _on_real_axis(z) and -2.0 < z.real < 2.0:
        if not boundary:
            raise BulkDomainError(
                f"z={z.real} lies inside the bulk (-2, 2); enable boundary mode "
                "for the limit from above"
            )
        x = z.real
        return complex(-x, math.sqrt(4.0 - x * x)) / 2.0
    return (-z + _edge_product_sqrt(z, -2.0, 2.0)) / 2.0


def m_mp(z: complex, law: LimitLaw, boundary: bool = False) -> complex:
    """Stieltjes transform of the Marchenko-Pastur law with ratio law.phi.

    Herglotz branch, decaying like -1/z at infinity.  z = 0 is always a
    domain error; real z strictly inside the bulk requires boundary mode.
    """
    if law.kind is not LawKind.MARCHENKO_PASTUR:
        raise ValueError("m_mp requires a Marchenko-Pastur law")
    z = complex(z)
    if z == 0:
        raise BulkDomainError("m_mp is singular at z = 0")
    gm, gp = law.gamma_minus, law.gamma_plus
    a = math.sqrt(law.phi) - 1.0 / math.sqrt(law.phi)
    inv_sphi = 1.0 / math.sqrt(law.phi)
    if _on_real_axis(z) and gm < z.real < gp:
        if not boundary:
            raise BulkDomainError(
                f"z={z.real} lies inside the bulk ({gm:.6g}, {gp:.6g}); enable "
                "boundary mode for the limit from above"
            )
        x = z.real
        root = 1j * math.sqrt((x - gm) * (gp - x))
        return (a - x + root) / (2.0 * inv_sphi * x)
    return (a - z + _edge_product_sqrt(z, gm, gp)) / (2.0 * inv_sphi * z)


def m_reciprocal_variant(z: complex, law: LimitLaw, boundary: bool = False) -> complex:
    """Limit transform of the reciprocal-variable pencil: z * m_mp(1/z)."""
    z = complex(z)
    if z == 0:
        raise BulkDomainError("reciprocal variant undefined at z = 0")
    return z * m_mp(1.0 / z, law, boundary=boundary)


def rate_psi(law: LimitLaw, z: complex, N: int) -> float:
    """Accuracy scale sqrt(Im m(z)/(N y)) + 1/(N y) for y = Im z > 0."""
    y = complex(z).imag
    if y <= 0.0:
        raise ValueError(f"rate requires Im z > 0, got Im z = {y}")
    im_m = law.m(z).imag
    return math.sqrt(max(im_m, 0.0) / (N * y)) + 1.0 / (N * y)


def in_spectral_window(law: LimitLaw, z: complex, params: WindowParams) -> bool:
    """Exact membership test for the law's spectral window.

    Wigner: |x| <= 1/omega and N^(omega-1) <= y <= 1/omega.
    Marchenko-Pastur: edge distance kappa <= 1/omega, K^(omega-1) <= y
    <= 1/omega and |z| >= omega, with K = min(N, M).
    """
    z = complex(z)
    x, y = z.real, z.imag
    hi = 1.0 / params.omega
    if law.kind is LawKind.WIGNER:
        lo = params.N ** (params.omega - 1.0)
        return abs(x) <= hi and lo <= y <= hi
    gm, gp = law.gamma_minus, law.gamma_plus
    kappa = min(abs(gm - x), abs(gp - x))
    M = max(1, round(law.phi * params.N))
    K = min(params.N, M)
    lo = K ** (params.omega - 1.0)
    return kappa <= hi and lo <= y <= hi and abs(z) >= params.omega
