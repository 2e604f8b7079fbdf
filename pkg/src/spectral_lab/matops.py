"""Dense complex matrix utilities: operator norms, low-rank update algebra,
a determinant perturbation bound, and the full non-Hermitian eigensolver."""

from __future__ import annotations

import math

import numpy as np

INF = math.inf

# operator norms with closed forms; (p, q) means l^p -> l^q
_SUPPORTED_MIXED = {(1, 1), (INF, INF), (2, 2), (1, INF), (2, INF), (1, 2)}

RCOND_SINGULAR = 1e-13


class SingularUpdateError(np.linalg.LinAlgError):
    """Low-rank update core is numerically singular (z hit an eigenvalue)."""

    def __init__(self, rcond: float):
        super().__init__(f"update core is singular (reciprocal condition {rcond:.3e})")
        self.rcond = rcond


def norm(A: np.ndarray, kind) -> float:
    """Matrix norm by kind: "max", "1", "inf", "2"/"spectral", or a (p, q) pair.

    Supported mixed pairs are (1, inf), (2, inf) and (1, 2), computed via
    their closed forms: l^1 -> l^q is the max column l^q norm, l^p -> l^inf
    is the max row dual-norm.
    """
    A = np.asarray(A)
    if isinstance(kind, str):
        kind = {"max": "max", "1": (1, 1), "inf": (INF, INF),
                "2": (2, 2), "spectral": (2, 2)}[kind]
    if kind == "max":
        return float(np.max(np.abs(A))) if A.size else 0.0
    p, q = kind
    if (p, q) not in _SUPPORTED_MIXED:
        raise ValueError(f"unsupported operator norm pair ({p}, {q})")
    absA = np.abs(A)
    if (p, q) == (1, 1):
        return float(absA.sum(axis=0).max(initial=0.0))
    if (p, q) == (INF, INF):
        return float(absA.sum(axis=1).max(initial=0.0))
    if (p, q) == (2, 2):
        return float(np.linalg.norm(A, 2)) if A.size else 0.0
    if (p, q) == (1, INF):
        return float(absA.max(initial=0.0))
    if (p, q) == (2, INF):
        # rows measured in the l^2 dual of l^2
        return float(np.sqrt((absA**2).sum(axis=1)).max(initial=0.0))
    # (1, 2): columns measured in l^2
    return float(np.sqrt((absA**2).sum(axis=0)).max(initial=0.0))


def sparsity_counts(A: np.ndarray) -> tuple[int, int]:
    """(max nonzeros per row, max nonzeros per column), exact zero test."""
    A = np.asarray(A)
    nz = A != 0
    r = int(nz.sum(axis=1).max(initial=0))
    c = int(nz.sum(axis=0).max(initial=0))
    return r, c


def kappa_bounds(P: np.ndarray, Q: np.ndarray) -> tuple[float, float, float]:
    """Upper bounds for the three compression functionals of the pair (P, Q).

    Returns (k1, kinf, kPQ) where k1 bounds sup ||QE||_1/||E||_max,
    kinf bounds sup ||EP||_inf/||E||_max and kPQ bounds
    sup ||QEP||_2/||E||_max over nonzero E.
    """
    P = np.asarray(P)
    Q = np.asarray(Q)
    if P.shape[1] != Q.shape[0] or P.shape[0] != Q.shape[1]:
        raise ValueError(f"incompatible factor shapes {P.shape} and {Q.shape}")
    n = P.shape[1]
    rQ, _ = sparsity_counts(Q)
    _, cP = sparsity_counts(P)
    qmax = norm(Q, "max")
    pmax = norm(P, "max")
    k1 = n * rQ * qmax
    kinf = n * cP * pmax
    kPQ = n * rQ * cP * qmax * pmax
    return k1, kinf, kPQ


def _rcond(A: np.ndarray) -> float:
    s = np.linalg.svd(A, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0.0
    return float(s[-1] / s[0])


def woodbury_inverse(Xinv: np.ndarray, P: np.ndarray, Cinv: np.ndarray,
                     Q: np.ndarray) -> np.ndarray:
    """Inverse of (X + P C Q) from Xinv via the low-rank update identity.

    Raises SingularUpdateError when the n x n core Cinv + Q Xinv P is
    numerically singular, which signals that the evaluation point is an
    eigenvalue of the updated problem.
    """
    Xinv = np.asarray(Xinv)
    P = np.asarray(P)
    Q = np.asarray(Q)
    Cinv = np.asarray(Cinv)
    L = Cinv + Q @ Xinv @ P
    rc = _rcond(L)
    if rc < RCOND_SINGULAR:
        raise SingularUpdateError(rc)
    XiP = Xinv @ P
    QXi = Q @ Xinv
    return Xinv - XiP @ np.linalg.solve(L, QXi)


def det_diff_bound(A: np.ndarray, B: np.ndarray) -> float:
    """Bound for |det A - det B|: k! * k * d * (d + max|A|)^(k-1), d = max|A-B|.

    Guarded to k <= 8 because of the factorial factor.
    """
    A = np.asarray(A)
    B = np.asarray(B)
    k = A.shape[0]
    if A.shape != B.shape or A.shape != (k, k):
        raise ValueError("expected two square matrices of equal size")
    if k > 8:
        raise ValueError(f"bound grows like k! and is capped at k = 8, got {k}")
    d = norm(A - B, "max")
    return math.factorial(k) * k * d * (d + norm(A, "max")) ** (k - 1)


def spectrum(A: np.ndarray) -> np.ndarray:
    """All eigenvalues of a dense square matrix, as a complex array.

    Exactly Hermitian inputs are routed to the symmetric solver; everything
    else goes through the general QR-iteration backend.
    """
    A = np.asarray(A)
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    if np.array_equal(A, A.conj().T):
        return np.linalg.eigvalsh(A).astype(complex)
    return np.linalg.eigvals(A).astype(complex)


def order_by_distance(points, z0: complex) -> np.ndarray:
    """Sort complex points by |p - z0|, ties broken by arg(p - z0) in [0, 2pi)."""
    pts = np.asarray(list(points), dtype=complex)
    if pts.size == 0:
        return pts
    d = pts - complex(z0)
    ang = np.mod(np.angle(d), 2.0 * np.pi)
    ang[d == 0] = 0.0
    idx = np.lexsort((ang, np.abs(d)))
    return pts[idx]
