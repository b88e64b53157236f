"""Dense self-adjoint matrix arithmetic, spectral calculus and samplers.

Real symmetric matrices are the default; complex Hermitian ones go through
the same interface.  All randomness flows through an explicit numpy
Generator, so every operation is a pure function of its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .funcmodel import FunctionSpec, IntervalSpec

HERMITIAN_ATOL = 1e-12
DEFAULT_PSD_TOL = 1e-9

__all__ = [
    "NonHermitianError",
    "DimensionMismatchError",
    "SamplerExhaustedError",
    "SpectralDecomposition",
    "PsdVerdict",
    "check_hermitian",
    "eig_decompose",
    "apply_function",
    "psd_check",
    "loewner_leq",
    "random_ordered_pair",
    "random_matrix_in",
    "random_contraction",
    "random_projection",
    "spectral_norm",
]


class NonHermitianError(ValueError):
    """Input matrix is not self-adjoint within tolerance."""


class DimensionMismatchError(ValueError):
    """Operands have incompatible shapes."""


class SamplerExhaustedError(RuntimeError):
    """A constructive sampler gave up after too many rejections."""


def check_hermitian(a, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    """Validate self-adjointness and return the matrix as an ndarray."""
    m = np.asarray(a)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise NonHermitianError(f"expected a square matrix, got shape {m.shape}")
    residual = np.max(np.abs(m - m.conj().T))
    if residual > atol:
        raise NonHermitianError(
            f"matrix is not self-adjoint: symmetry residual {residual:.3e} > {atol:.0e}"
        )
    return m


@dataclass(frozen=True)
class SpectralDecomposition:
    """Ascending eigenvalues and orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


@dataclass(frozen=True)
class PsdVerdict:
    """Positivity verdict with the extremal Rayleigh witness."""

    is_psd: bool
    min_eigenvalue: float
    witness: np.ndarray
    tolerance_used: float


def eig_decompose(a) -> SpectralDecomposition:
    m = check_hermitian(a)
    w, v = np.linalg.eigh(m)
    return SpectralDecomposition(w, v)


def apply_function(f: FunctionSpec, a) -> np.ndarray:
    """Functional calculus f(a) = V diag(f(lambda_i)) V*.

    Eigenvalues within the snap tolerance of a domain endpoint are pulled
    inside; anything farther out raises a DomainError naming the eigenvalue.
    """
    dec = eig_decompose(a)
    vals = f(dec.eigenvalues)
    v = dec.eigenvectors
    out = (v * vals) @ v.conj().T
    return (out + out.conj().T) / 2.0


def spectral_norm(m) -> float:
    m = np.asarray(m)
    if m.shape[0] != m.shape[1] or np.max(np.abs(m - m.conj().T)) > 1e-10:
        return float(np.linalg.svd(m, compute_uv=False)[0])
    return float(np.max(np.abs(np.linalg.eigvalsh(m))))


def psd_check(m, tol: float = DEFAULT_PSD_TOL) -> PsdVerdict:
    """Positive semidefiniteness at a relative tolerance.

    ``is_psd`` holds when the minimal eigenvalue is at least
    ``-tol * max(1, ||m||_2)``; the witness is the corresponding unit
    eigenvector.
    """
    if tol < 0.0:
        raise ValueError("tolerance must be nonnegative")
    mat = check_hermitian(m)
    w, v = np.linalg.eigh(mat)
    scale = max(1.0, float(np.max(np.abs(w))))
    cutoff = tol * scale
    return PsdVerdict(
        is_psd=bool(w[0] >= -cutoff),
        min_eigenvalue=float(w[0]),
        witness=v[:, 0],
        tolerance_used=cutoff,
    )


def loewner_leq(a, b, tol: float = DEFAULT_PSD_TOL) -> PsdVerdict:
    """Verdict on a <= b in the positive-semidefinite order."""
    ma, mb = check_hermitian(a), check_hermitian(b)
    if ma.shape != mb.shape:
        raise DimensionMismatchError(f"dimension mismatch: {ma.shape} vs {mb.shape}")
    return psd_check(mb - ma, tol)


# ---------------------------------------------------------------------------
# samplers
# ---------------------------------------------------------------------------

def _finite_window(interval: IntervalSpec, rng) -> tuple[float, float]:
    """A finite subwindow strictly inside the interval."""
    lo, hi = interval.lower, interval.upper
    if not math.isfinite(lo):
        lo = (hi if math.isfinite(hi) else 1.0) - 1.0 - rng.exponential(2.0)
    if not math.isfinite(hi):
        hi = lo + 0.5 + rng.exponential(2.0)
    width = hi - lo
    margin = 1e-3 * width
    span = width - 2 * margin
    frac = rng.uniform(0.25, 1.0)
    off = rng.uniform(0.0, span * (1.0 - frac))
    w_lo = lo + margin + off
    return w_lo, w_lo + span * frac


def random_ordered_pair(dim: int, interval: IntervalSpec, rng):
    """Pair (a, b) with a <= b by construction and spectra inside the interval.

    b - a is a random sum of rank-one PSD bumps (possibly empty, so equality
    occurs), and both matrices are pushed into the interval by a common
    increasing affine map, which preserves the order.
    """
    if dim < 1:
        raise ValueError("dimension must be >= 1")
    if interval.width <= 0:
        raise ValueError("interval must be nondegenerate")
    g = rng.standard_normal((dim, dim))
    a0 = (g + g.T) / 2.0
    k = int(rng.integers(0, dim + 1))
    gap = np.zeros((dim, dim))
    for _ in range(k):
        w = rng.standard_normal(dim)
        gap += rng.exponential(1.0) * np.outer(w, w)
    b0 = a0 + gap

    w_lo, w_hi = _finite_window(interval, rng)
    lam_min = float(np.linalg.eigvalsh(a0)[0])
    lam_max = float(np.linalg.eigvalsh(b0)[-1])
    spread = lam_max - lam_min
    if spread < 1e-12:
        mid = 0.5 * (w_lo + w_hi)
        a = mid * np.eye(dim)
        return a, a.copy()
    alpha = (w_hi - w_lo) / spread
    beta = w_lo - alpha * lam_min
    a = alpha * a0 + beta * np.eye(dim)
    b = alpha * b0 + beta * np.eye(dim)
    # floor the gap's rounding so the recomputed b - a is PSD even at tol 0;
    # the shift stays far below the 1e-3 width margin reserved above
    scale = max(1.0, spectral_norm(b))
    for _ in range(50):
        gap_eigs, _ = np.linalg.eigh(b - a)   # same routine psd_check uses
        if gap_eigs[0] >= 0.0:
            break
        b = b + (2.0 * abs(float(gap_eigs[0])) + 1e-15 * scale) * np.eye(dim)
    return a, b


def random_matrix_in(dim: int, interval: IntervalSpec, rng) -> np.ndarray:
    """Single symmetric matrix with spectrum strictly inside the interval."""
    a, b = random_ordered_pair(dim, interval, rng)
    return a if rng.uniform() < 0.5 else b


def random_projection(dim: int, rng, rank: int | None = None) -> np.ndarray:
    if rank is None:
        rank = int(rng.integers(0, dim + 1))
    if rank == 0:
        return np.zeros((dim, dim))
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    basis = q[:, :rank]
    return basis @ basis.T


def random_contraction(dim: int, rng) -> np.ndarray:
    """Random matrix with operator norm <= 1.

    Branches cover the identity, orthogonal projections of every rank,
    norm-one orthogonal/unitary maps, and generic (occasionally complex)
    contractions rescaled by max(1, sigma_max).
    """
    if dim < 1:
        raise ValueError("dimension must be >= 1")
    branch = rng.uniform()
    if branch < 0.10:
        return np.eye(dim)
    if branch < 0.30:
        return random_projection(dim, rng)
    if branch < 0.42:
        q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
        return q
    if branch < 0.75:
        m = rng.standard_normal((dim, dim)) * rng.uniform(0.25, 1.25) / math.sqrt(dim)
    else:
        m = (
            rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        ) * rng.uniform(0.25, 1.25) / math.sqrt(2 * dim)
    smax = float(np.linalg.svd(m, compute_uv=False)[0])
    return m / max(1.0, smax)
