"""Prediction of limit points for perturbed spectra.

Each scenario family reduces to a scalar equation in the limit transform
m: spikes solve 1 + xi*m(z) = 0, diagonal-product scenarios solve
c/((c-1)z) + m(z) = 0, and scalar-polynomial scenarios solve
m(p(z)) + 1/q(z) = 0.  Every returned point is validated against its
defining equation; the convergence-rate exponent -1/(2p) comes from the
largest nilpotent block attached to the relevant eigenvalue.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .perturbation import Rectangle
from .stieltjes import BulkDomainError, LawKind, LimitLaw, m_mp, m_wigner

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-10
DEGENERATE_TOL = 1e-12


class PredictionSource(Enum):
    MATRIX_SPIKE = "matrix-spike"
    HX_PRODUCT = "hx-product"
    PORT_HAMILTONIAN = "port-hamiltonian"
    QUADRATIC_SCALAR = "quadratic-scalar"


@dataclass(frozen=True)
class JordanEntry:
    xi: complex
    blocks: tuple[int, ...]

    def __post_init__(self):
        if not self.blocks or any(b < 1 for b in self.blocks):
            raise ValueError("block sizes must be a nonempty list of positive integers")

    @property
    def k(self) -> int:
        return sum(self.blocks)

    @property
    def p(self) -> int:
        return max(self.blocks)


@dataclass(frozen=True)
class JordanSpec:
    """Eigenvalues of D = C Q P with their nilpotent block sizes."""

    entries: tuple[JordanEntry, ...]

    def __init__(self, entries):
        entries = tuple(
            e if isinstance(e, JordanEntry) else JordanEntry(complex(e[0]), tuple(e[1]))
            for e in entries
        )
        object.__setattr__(self, "entries", entries)

    @property
    def total(self) -> int:
        return sum(e.k for e in self.entries)


@dataclass(frozen=True)
class OutlierPrediction:
    z0: complex
    multiplicity: int
    rate_exponent: float
    source: PredictionSource
    degenerate: bool = False

    def __post_init__(self):
        if self.multiplicity < 1:
            raise ValueError("multiplicity must be at least 1")
        if not -0.5 <= self.rate_exponent < 0.0:
            raise ValueError(f"rate exponent {self.rate_exponent} outside [-1/2, 0)")


@dataclass(frozen=True)
class SpikeSolution:
    z0: complex
    degenerate: bool = False


def wigner_spike_outlier(xi: complex) -> SpikeSolution | None:
    """Solve 1 + xi*m(z) = 0 off the semicircle bulk.

    The solution z0 = xi + 1/xi exists iff |xi| > 1 (|m| < 1 off the
    bulk); |xi| = 1 lands exactly on the bulk boundary and is returned
    tagged degenerate; |xi| < 1 has no off-bulk solution.
    """
    xi = complex(xi)
    if xi == 0:
        raise ValueError("xi must be nonzero")
    r = abs(xi)
    z0 = xi + 1.0 / xi
    if abs(r - 1.0) <= DEGENERATE_TOL:
        return SpikeSolution(z0, degenerate=True)
    if r < 1.0:
        return None
    return SpikeSolution(z0)


def mp_spike_outlier(xi: complex, law: LimitLaw) -> SpikeSolution | None:
    """Solve 1 + xi*m(z) = 0 for the Marchenko-Pastur transform.

    Inverts the self-consistency quadratic (linear in z once m = -1/xi is
    substituted) and keeps the candidate only if the closed-form branch
    actually takes the value -1/xi there.
    """
    if law.kind is not LawKind.MARCHENKO_PASTUR:
        raise ValueError("mp_spike_outlier needs a Marchenko-Pastur law")
    xi = complex(xi)
    if xi == 0:
        raise ValueError("xi must be nonzero")
    inv_sphi = 1.0 / math.sqrt(law.phi)
    a = math.sqrt(law.phi) - inv_sphi
    denom = xi - inv_sphi
    if abs(denom) <= DEGENERATE_TOL:
        return None
    z0 = xi * (a + xi) / denom
    if z0 == 0:
        return None
    gm, gp = law.gamma_minus, law.gamma_plus
    if z0.imag == 0 and gm <= z0.real <= gp:
        on_edge = min(abs(z0.real - gm), abs(z0.real - gp)) <= 1e-9
        if not on_edge:
            return None
        return SpikeSolution(z0, degenerate=True)
    try:
        residual = abs(1.0 + xi * m_mp(z0, law))
    except BulkDomainError:
        return None
    if residual > RESIDUAL_TOL:
        return None
    return SpikeSolution(z0)


def _solve_spike(xi: complex, law: LimitLaw) -> SpikeSolution | None:
    if law.kind is LawKind.WIGNER:
        return wigner_spike_outlier(xi)
    return mp_spike_outlier(xi, law)


def matrix_spike_predictions(jordan: JordanSpec, law: LimitLaw) -> list[OutlierPrediction]:
    """One prediction per eigenvalue of D with a valid off-bulk solution.

    Eigenvalues without a solution (or sitting exactly on the bulk
    boundary) are skipped and logged.
    """
    out = []
    for entry in jordan.entries:
        sol = _solve_spike(entry.xi, law)
        if sol is None or sol.degenerate:
            why = "no off-bulk solution" if sol is None else f"degenerate at {sol.z0}"
            logger.info("spike xi=%s skipped: %s", entry.xi, why)
            continue
        out.append(OutlierPrediction(
            z0=sol.z0,
            multiplicity=entry.k,
            rate_exponent=-1.0 / (2.0 * entry.p),
            source=PredictionSource.MATRIX_SPIKE,
        ))
    return out


def _mp_hx_point_transcribed(c: float, phi: float) -> float:
    # the intricate closed form as printed; kept as a cross-check against
    # the algebraically derived expression in hx_outliers
    sphi = math.sqrt(phi)
    a = sphi - 1.0 / sphi
    gm = sphi + 1.0 / sphi - 2.0
    gp = sphi + 1.0 / sphi + 2.0
    t = 2.0 * c / sphi + (c - 1.0) * a
    num = -((c - 1.0) ** 2) * gm * gp + t * t
    den = 2.0 * t * (c - 1.0) - (c - 1.0) ** 2 * (gp + gm)
    return num / den


def hx_outliers(c: list[float], law: LimitLaw) -> list[OutlierPrediction]:
    """Limit points for the diagonal-product scenario with weights c_j < 0.

    Wigner: the pair +-(-c_j)/sqrt(1-c_j) * i, both returned (the spectrum
    is symmetric about the real axis).  Marchenko-Pastur: the single real
    negative point c_j*(c_j/sqrt(phi) + a*(c_j-1))/(c_j-1), which for a
    square factor (phi = 1) reduces to c_j^2/(c_j-1).  Multiplicity is the
    repetition count of c_j; all blocks are simple, so the rate is -1/2.
    """
    c = [float(v) for v in c]
    if any(v >= 0 for v in c):
        raise ValueError("all weights must be negative")
    order = []
    counts: dict[float, int] = {}
    for v in c:
        if v not in counts:
            order.append(v)
        counts[v] = counts.get(v, 0) + 1
    out = []
    for v in order:
        k = counts[v]
        if law.kind is LawKind.WIGNER:
            z_up = complex(0.0, -v / math.sqrt(1.0 - v))
            for z0 in (z_up, z_up.conjugate()):
                resid = abs(v / ((v - 1.0) * z0) + m_wigner(z0))
                if resid > RESIDUAL_TOL:
                    raise AssertionError(f"prediction residual {resid:.2e} at {z0}")
                out.append(OutlierPrediction(z0, k, -0.5, PredictionSource.HX_PRODUCT))
        else:
            inv_sphi = 1.0 / math.sqrt(law.phi)
            a = math.sqrt(law.phi) - inv_sphi
            z0 = complex(v * (inv_sphi * v + a * (v - 1.0)) / (v - 1.0))
            if abs(z0) < 1e-12:
                # happens exactly at c = 1 - 1/phi (phi < 1): the candidate
                # merges with the point mass at the origin, no limit point
                logger.warning("weight c=%s degenerates to the origin for "
                               "phi=%s; skipped", v, law.phi)
                continue
            transcribed = _mp_hx_point_transcribed(v, law.phi)
            if abs(z0.real - transcribed) > 1e-9 * max(1.0, abs(transcribed)):
                logger.warning(
                    "closed-form discrepancy for c=%s: derived %s vs transcribed %s",
                    v, z0.real, transcribed,
                )
            resid = abs(v / ((v - 1.0) * z0) + m_mp(z0, law))
            if resid > RESIDUAL_TOL:
                raise AssertionError(f"prediction residual {resid:.2e} at {z0}")
            out.append(OutlierPrediction(z0, k, -0.5, PredictionSource.HX_PRODUCT))
    return out


def port_hamiltonian_outliers(t: list[float]) -> list[OutlierPrediction]:
    """Limit points -t^2/(1 + i t) for a skew-Hermitian block minus a square
    Marchenko-Pastur matrix; all blocks are simple, so the rate is -1/2."""
    t = [float(v) for v in t]
    if any(v == 0 for v in t):
        raise ValueError("all parameters must be nonzero")
    order = []
    counts: dict[float, int] = {}
    for v in t:
        if v not in counts:
            order.append(v)
        counts[v] = counts.get(v, 0) + 1
    return [
        OutlierPrediction(
            z0=-v * v / (1.0 + 1j * v),
            multiplicity=counts[v],
            rate_exponent=-0.5,
            source=PredictionSource.PORT_HAMILTONIAN,
        )
        for v in order
    ]


class RegionTouchesBulkError(ValueError):
    """Search region meets the preimage of the bulk, where m(p(z)) is not
    analytic; enable boundary mode or shrink the region."""


def _bulk_distance(w: complex, lo: float, hi: float) -> float:
    dx = max(lo - w.real, w.real - hi, 0.0)
    return math.hypot(dx, w.imag)


def _m_prime(law: LimitLaw, w: complex, m: complex) -> complex:
    if law.kind is LawKind.WIGNER:
        return -m / (2.0 * m + w)
    inv_sphi = 1.0 / math.sqrt(law.phi)
    a = math.sqrt(law.phi) - inv_sphi
    return -(inv_sphi * m * m + m) / (2.0 * inv_sphi * w * m + w - a)


def quadratic_outliers(p_coeffs, q_coeffs, law: LimitLaw, region: Rectangle,
                       boundary: bool = False, resolution: float = 0.02,
                       margin: float = 0.02) -> list[OutlierPrediction]:
    """All roots of f(z) = m(p(z)) + 1/q(z) inside the region.

    p_coeffs and q_coeffs are scalar polynomial coefficients in ascending
    order.  The region must stay clear of the preimage of the bulk unless
    boundary mode is enabled; in boundary mode points whose image falls on
    the bulk use the limit from the upper half-plane, and roots whose
    image lands on the bulk edge are tagged degenerate.  Root multiplicity
    is read off the winding number of f around a small circle.
    """
    p = np.polynomial.Polynomial(np.asarray(p_coeffs, dtype=complex))
    q = np.polynomial.Polynomial(np.asarray(q_coeffs, dtype=complex))
    if not p.coef.any() or not q.coef.any():
        raise ValueError("p and q must be nonzero polynomials")
    dp = p.deriv()
    dq = q.deriv()
    lo, hi = law.support

    grid = region.grid(resolution)
    if not boundary:
        near = [z for z in grid if _bulk_distance(p(z), lo, hi) <= margin]
        if near:
            raise RegionTouchesBulkError(
                f"{len(near)} grid points map within {margin} of the bulk "
                f"[{lo:.6g}, {hi:.6g}]; enable boundary mode or move the region"
            )

    def f(z: complex) -> complex:
        qz = q(z)
        if qz == 0:
            return complex(np.inf)
        return law.m(p(z), boundary=boundary) + 1.0 / qz

    def fprime(z: complex) -> complex:
        w = p(z)
        m = law.m(w, boundary=boundary)
        qz = q(z)
        return _m_prime(law, w, m) * dp(z) - dq(z) / (qz * qz)

    pad = 0.5
    roots: list[complex] = []
    for seed in grid:
        z = complex(seed)
        try:
            for _ in range(100):
                fz = f(z)
                if abs(fz) < 1e-12:
                    break
                step = fz / fprime(z)
                z = z - step
                if not (region.x0 - pad <= z.real <= region.x1 + pad
                        and region.y0 - pad <= z.imag <= region.y1 + pad):
                    raise StopIteration
            else:
                continue
        except (StopIteration, BulkDomainError, ZeroDivisionError, OverflowError):
            continue
        if not region.contains(z) or abs(f(z)) > RESIDUAL_TOL:
            continue
        w = p(z)
        if w.imag == 0 and lo < w.real < hi and _bulk_distance(w, lo, hi) > 1e-9:
            continue  # image strictly inside the bulk: not an outlier
        # dedupe radius sits above the position blur of multiple roots
        # (|f| < 1e-12 pins a double root only to ~1e-6 of its center)
        if not any(abs(z - r) < 1e-4 for r in roots):
            roots.append(z)

    out = []
    for z0 in sorted(roots, key=lambda v: (v.real, v.imag)):
        # position blur of a degenerate root keeps p(z0) only within ~1e-6
        # of the edge, so the edge test is correspondingly loose
        degenerate = _bulk_distance(p(z0), lo, hi) <= 1e-6
        if degenerate:
            edge = lo if abs(p(z0) - lo) < abs(p(z0) - hi) else hi
            snapped = min((p - edge).roots(), key=lambda r: abs(r - z0))
            if abs(snapped - z0) < 1e-3 and abs(f(complex(snapped))) <= RESIDUAL_TOL:
                z0 = complex(snapped)
        mult = 1
        if not degenerate:
            rad = 1e-3
            samples = 400
            total = 0.0 + 0.0j
            prev = None
            for j in range(samples + 1):
                zc = z0 + rad * cmath.exp(2j * math.pi * j / samples)
                val = fprime(zc) / f(zc)
                if prev is not None:
                    total += 0.5 * (val + prev) * (zc - zprev)
                prev, zprev = val, zc
            mult = max(1, round((total / (2j * math.pi)).real))
        out.append(OutlierPrediction(
            z0=z0,
            multiplicity=mult,
            rate_exponent=-0.5,
            source=PredictionSource.QUADRATIC_SCALAR,
            degenerate=degenerate,
        ))
    return out


def count_near(spectrum, z0: complex, radius: float) -> int:
    """Number of spectrum points within the closed disc of the radius."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    pts = np.asarray(list(spectrum), dtype=complex)
    if pts.size == 0:
        return 0
    return int(np.sum(np.abs(pts - complex(z0)) <= radius))


def eigenvalue_clusters(D: np.ndarray, tol: float = 1e-8) -> tuple[list[tuple[complex, int]], bool]:
    """Cluster the eigenvalues of D by proximity.

    Returns (clusters, flagged) where each cluster is (mean eigenvalue,
    count) and flagged is True when two clusters sit suspiciously close
    (within 100*tol), i.e. when reading multiplicities off floating-point
    eigenvalues is unreliable and an explicit JordanSpec is needed.
    """
    ev = sorted(np.linalg.eigvals(np.asarray(D, dtype=complex)), key=lambda v: (v.real, v.imag))
    clusters: list[list[complex]] = []
    for v in ev:
        if clusters and abs(v - clusters[-1][-1]) <= tol:
            clusters[-1].append(v)
        else:
            clusters.append([v])
    means = [(sum(c) / len(c), len(c)) for c in clusters]
    flagged = any(
        abs(means[i][0] - means[j][0]) <= 100 * tol
        for i in range(len(means)) for j in range(i + 1, len(means))
    )
    return means, flagged
