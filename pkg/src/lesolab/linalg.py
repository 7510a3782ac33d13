"""Small dense linear-systems toolkit.

Matrices are plain 2-D ``numpy`` float arrays and polynomials are 1-D arrays
of coefficients in ascending degree order (``p[0]`` is the constant term).
Everything here is sized for plants of order <= 8, so the algorithms favour
exactness on small integer-valued inputs over asymptotic speed.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .errors import (
    AssumptionError,
    DimensionError,
    IllConditionedWarning,
    SingularTransformError,
    UnobservableError,
)

log = logging.getLogger(__name__)

MAX_DIM = 16
DEFAULT_TOL = 1e-9
# cond() of the coefficient-matching system above which placement warns
ILL_CONDITIONED = 1e10
SINGULAR_COND = 1e14


def as_matrix(value, rows: int | None = None, cols: int | None = None, name: str = "matrix") -> np.ndarray:
    """Coerce ``value`` to a finite 2-D float array, optionally checking shape."""
    m = np.array(value, dtype=float, ndmin=2)
    if m.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {m.shape}")
    if rows is not None and m.shape[0] != rows:
        raise DimensionError(f"{name} must have {rows} rows, got {m.shape[0]}")
    if cols is not None and m.shape[1] != cols:
        raise DimensionError(f"{name} must have {cols} columns, got {m.shape[1]}")
    if max(m.shape) > MAX_DIM:
        raise DimensionError(f"{name} exceeds the {MAX_DIM}x{MAX_DIM} size cap")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def as_column(value, rows: int | None = None, name: str = "vector") -> np.ndarray:
    return as_matrix(np.reshape(np.asarray(value, dtype=float), (-1, 1)), rows, 1, name)


# -- polynomials -------------------------------------------------------------

def binomial_poly(order: int, root: float) -> np.ndarray:
    """Ascending coefficients of ``(s + root) ** order``."""
    return np.array([comb(order, k) * root ** (order - k) for k in range(order + 1)], dtype=float)


def companion(poly) -> np.ndarray:
    """Companion matrix whose last row is the negated lower coefficients of a monic ``poly``.

    The upper rows form the shift chain, so ``char_poly(companion(p)) == p``.
    """
    p = np.asarray(poly, dtype=float)
    n = p.size - 1
    if n < 1:
        raise DimensionError("companion needs a polynomial of degree >= 1")
    if p[-1] != 1.0:
        p = p / p[-1]
    c = np.zeros((n, n))
    c[:-1, 1:] = np.eye(n - 1)
    c[-1, :] = -p[:-1]
    return c


def poly_eval(poly, s):
    """Evaluate an ascending-order polynomial at (possibly complex) ``s``."""
    return np.polynomial.polynomial.polyval(s, np.asarray(poly))


def char_poly(m) -> np.ndarray:
    """Characteristic polynomial det(sI - M) by the Faddeev-LeVerrier recursion.

    Returns monic ascending coefficients. Exact on integer matrices while the
    intermediate traces stay below 2**53.
    """
    a = np.array(m, dtype=float, ndmin=2)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"char_poly needs a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n > MAX_DIM:
        raise DimensionError(f"char_poly limited to {MAX_DIM}x{MAX_DIM}")
    coeffs = np.zeros(n + 1)
    coeffs[n] = 1.0
    mk = np.zeros_like(a)
    eye = np.eye(n)
    for k in range(1, n + 1):
        mk = a @ mk + coeffs[n - k + 1] * eye
        coeffs[n - k] = -np.trace(a @ mk) / k
    return coeffs


# -- rank and structure ------------------------------------------------------

def matrix_rank(m, tol: float = DEFAULT_TOL) -> int:
    """Rank by Gaussian elimination with partial pivoting.

    A pivot counts when its magnitude exceeds ``tol`` times the largest entry
    of the input. Deterministic and free of eigen/SVD solvers.
    """
    a = np.array(m, dtype=float, ndmin=2)
    rows, cols = a.shape
    scale = np.max(np.abs(a)) if a.size else 0.0
    if scale == 0.0:
        return 0
    threshold = tol * scale
    rank = 0
    for col in range(cols):
        if rank == rows:
            break
        pivot = rank + int(np.argmax(np.abs(a[rank:, col])))
        if abs(a[pivot, col]) <= threshold:
            continue
        a[[rank, pivot]] = a[[pivot, rank]]
        a[rank + 1:] -= np.outer(a[rank + 1:, col] / a[rank, col], a[rank])
        rank += 1
    return rank


@dataclass(frozen=True)
class StateSpace:
    """Nominal plant ``x' = A0 x + B0 u + E0 f``, ``y = C0 x`` (single input/output)."""

    A0: np.ndarray
    B0: np.ndarray
    C0: np.ndarray
    E0: np.ndarray

    def __post_init__(self):
        a = as_matrix(self.A0, name="A0")
        n = a.shape[0]
        if a.shape != (n, n) or n < 1:
            raise DimensionError(f"A0 must be square, got {a.shape}")
        object.__setattr__(self, "A0", a)
        object.__setattr__(self, "B0", as_column(self.B0, n, "B0"))
        object.__setattr__(self, "C0", as_matrix(np.reshape(self.C0, (1, -1)), 1, n, "C0"))
        object.__setattr__(self, "E0", as_column(self.E0, n, "E0"))

    @property
    def n(self) -> int:
        return self.A0.shape[0]


@dataclass(frozen=True)
class AssumptionReport:
    observable: bool
    no_invariant_zeros: bool
    relative_markers: list[float] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.observable and self.no_invariant_zeros


@dataclass(frozen=True)
class CanonicalSystem:
    """Plant in observable companion coordinates ``x_c = S x``.

    ``Ebar`` is normalised to the last unit vector; the factor removed from
    the disturbance channel is kept in ``e_gain`` (1.0 when E0 already maps there).
    """

    Abar: np.ndarray
    bbar: float
    last_row: np.ndarray
    S: np.ndarray
    Bbar: np.ndarray
    Cbar: np.ndarray
    Ebar: np.ndarray
    e_gain: float = 1.0

    @property
    def char_coeffs(self) -> np.ndarray:
        """Monic ascending characteristic coefficients ``[a0, ..., a_{n-1}, 1]``."""
        return np.append(-self.last_row, 1.0)


def observability_matrix(sys: StateSpace) -> np.ndarray:
    """Stack the rows ``C0 A0^k`` for ``k = 0 .. n-1``."""
    rows = [sys.C0[0]]
    for _ in range(sys.n - 1):
        rows.append(rows[-1] @ sys.A0)
    return np.vstack(rows)


def check_assumptions(sys: StateSpace, tol: float = DEFAULT_TOL) -> AssumptionReport:
    """Check observability and the relative-degree chain ``C0 A0^k E0``.

    The chain must vanish for ``k < n-1`` and be nonzero at ``k = n-1``.
    Both flags are reported independently.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    s = observability_matrix(sys)
    observable = matrix_rank(s, tol) == sys.n
    markers = [float(v) for v in (s @ sys.E0).ravel()]
    chain_ok = all(abs(v) <= tol for v in markers[:-1]) and abs(markers[-1]) > tol
    return AssumptionReport(observable, chain_ok, markers)


def canonical_transform(sys: StateSpace, tol: float = DEFAULT_TOL) -> CanonicalSystem:
    """Transform to companion coordinates with ``S`` the observability matrix."""
    report = check_assumptions(sys, tol)
    if not report.ok:
        raise AssumptionError(
            f"assumptions violated: observable={report.observable}, "
            f"no_invariant_zeros={report.no_invariant_zeros}, markers={report.relative_markers}"
        )
    s = observability_matrix(sys)
    if np.linalg.cond(s) > SINGULAR_COND:
        raise SingularTransformError("observability matrix is numerically singular")
    try:
        s_inv = np.linalg.inv(s)
    except np.linalg.LinAlgError as exc:
        raise SingularTransformError(str(exc)) from exc

    abar = s @ sys.A0 @ s_inv
    bbar = s @ sys.B0
    cbar = sys.C0 @ s_inv
    ebar = s @ sys.E0
    e_gain = float(ebar[-1, 0])
    return CanonicalSystem(
        Abar=abar,
        bbar=float(bbar[-1, 0]),
        last_row=abar[-1].copy(),
        S=s,
        Bbar=bbar,
        Cbar=cbar,
        Ebar=ebar / e_gain,
        e_gain=e_gain,
    )


# -- observer gains ----------------------------------------------------------

def place_observer_gains(A, C, omega_o: float) -> np.ndarray:
    """Gain ``L`` putting every eigenvalue of ``A - L C`` at ``-omega_o``.

    ``det(sI - A + L C)`` is affine in ``L``, so each column of the
    coefficient map is the change in char_poly caused by a unit gain on one
    state. Matching against ``(s + omega_o)^m`` gives an m x m linear system
    (triangular for shift-chain structures).
    """
    a = as_matrix(A, name="A")
    m = a.shape[0]
    c = as_matrix(np.reshape(C, (1, -1)), 1, m, "C")
    if omega_o <= 0:
        raise ValueError("omega_o must be positive")
    obs = observability_matrix(StateSpace(a, np.zeros((m, 1)), c, np.zeros((m, 1))))
    if matrix_rank(obs) < m:
        raise UnobservableError("(A, C) is not observable")

    base = char_poly(a)
    coeff_map = np.empty((m, m))
    for j in range(m):
        unit = np.zeros((m, 1))
        unit[j, 0] = 1.0
        coeff_map[:, j] = (char_poly(a - unit @ c) - base)[:m]
    cond = np.linalg.cond(coeff_map)
    if cond > ILL_CONDITIONED:
        warnings.warn(f"observer placement system has cond={cond:.3g}", IllConditionedWarning, stacklevel=2)
    target = binomial_poly(m, omega_o)
    return np.linalg.solve(coeff_map, target[:m] - base[:m])


def binomial_mf_gains(n: int, omega_o: float) -> np.ndarray:
    """Closed-form model-free ESO gains ``L_k = C(n+1, k) omega_o^k``, k = 1..n+1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if omega_o <= 0:
        raise ValueError("omega_o must be positive")
    return np.array([comb(n + 1, k) * omega_o ** k for k in range(1, n + 2)], dtype=float)


def table1_mb_gains(a: float, omega_o: float) -> np.ndarray:
    """Published model-based gain formulas for the two-mass observer, verbatim.

    No placement guarantee: the last entry does not reproduce ``(s+omega_o)^5``
    for ``a != 0`` (see ``place_observer_gains`` for the authoritative gains).
    """
    if omega_o <= 0:
        raise ValueError("omega_o must be positive")
    w = omega_o
    return np.array([
        5 * w,
        a + 10 * w**2,
        5 * a * w + 10 * w**3,
        a**2 + 10 * a * w**2 + 5 * w**4,
        5 * a**2 * w + 10 * a * w**3 + w**5,
    ])
