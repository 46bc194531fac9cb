"""Biorthogonal spectral frames for dense complex matrices.

A non-Hermitian matrix H0 with a non-degenerate spectrum has distinct right
eigenvectors |n> (columns of V) and dual row vectors <<n| (rows of W) with

    H0 V = V diag(h),      W = V^{-1},      W V = 1.

Choosing W as the exact matrix inverse of V absorbs the Hilbert-space metric
into the dual vectors: <<m|n> = delta_mn holds by construction, and the
"double bracket" matrix element of any operator A is

    [[A]]_mn = <<m| A |n> = (W A V)_mn.

For Hermitian H0 the frame reduces to the orthonormal one (W = V^dagger) and
[[A]] is the ordinary matrix element.

All returned objects are immutable; operations are pure functions and safe
to share across threads.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateSpectrum,
    DimensionMismatch,
    NonFiniteEntry,
    NonSquare,
    NumericalFailure,
)

DEFAULT_FRAME_TOL = 1e-10
DEFAULT_GAP_TOL = 1e-8
GAP_TOL_ENV = "GEOMPERT_GAP_TOL"

# relative threshold for locating the first "nonzero" component when fixing
# eigenvector phases
_PHASE_TOL = 1e-12


def as_complex_matrix(a) -> np.ndarray:
    """Validate and return `a` as a square, finite complex128 array."""
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise NonSquare(f"expected a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteEntry("matrix contains NaN or infinite entries")
    return arr


def resolve_gap_tol(gap_tol: float | None = None) -> float:
    """Degeneracy threshold: explicit argument, else GEOMPERT_GAP_TOL, else default."""
    if gap_tol is not None:
        return float(gap_tol)
    env = os.environ.get(GAP_TOL_ENV)
    if env is not None:
        return float(env)
    return DEFAULT_GAP_TOL


def min_pairwise_gap(values: np.ndarray) -> float:
    """Smallest |h_i - h_j| over i != j (inf for fewer than two values)."""
    values = np.asarray(values)
    if values.size < 2:
        return np.inf
    dist = np.abs(values[:, None] - values[None, :])
    np.fill_diagonal(dist, np.inf)
    return float(dist.min())


@dataclass(frozen=True, eq=False)
class SpectralFrame:
    """Eigendata of an unperturbed matrix in canonical order.

    Attributes
    ----------
    dim : int
        Matrix dimension N.
    eigenvalues : (N,) complex ndarray
        Sorted by (real, imaginary) ascending.
    right : (N, N) complex ndarray
        Columns are unit-norm right eigenvectors, phase-fixed so the first
        component above the noise floor is real positive.
    left : (N, N) complex ndarray
        Rows are the dual vectors; exactly the matrix inverse of `right`.
    min_gap : float
        Smallest pairwise eigenvalue distance.
    """

    dim: int
    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray
    min_gap: float

    def right_vector(self, n: int) -> np.ndarray:
        return self.right[:, n]

    def left_vector(self, n: int) -> np.ndarray:
        return self.left[n, :]


def _normalize_columns(vecs: np.ndarray) -> np.ndarray:
    """Unit 2-norm columns with the first significant component real positive."""
    out = np.array(vecs, dtype=np.complex128)
    for j in range(out.shape[1]):
        col = out[:, j]
        col /= np.linalg.norm(col)
        mags = np.abs(col)
        idx = int(np.argmax(mags > _PHASE_TOL * mags.max()))
        col *= mags[idx] / col[idx]
        out[:, j] = col
    return out


def eigenframe(
    h0,
    frame_tol: float = DEFAULT_FRAME_TOL,
    gap_tol: float | None = None,
) -> SpectralFrame:
    """Diagonalize `h0` and build its biorthogonal frame.

    Parameters
    ----------
    h0 : array_like
        Square complex matrix with finite entries.
    frame_tol : float
        Residual tolerance for the eigensolve and the biorthonormality check.
    gap_tol : float, optional
        Relative degeneracy threshold; default from GEOMPERT_GAP_TOL or 1e-8.

    Raises
    ------
    DegenerateSpectrum
        If the smallest eigenvalue gap is below gap_tol * max(1, spectral
        radius); the perturbative scheme is invalid there.
    NumericalFailure
        If the eigensolver residual or ||W V - 1|| exceeds `frame_tol`.
    """
    h0 = as_complex_matrix(h0)
    n = h0.shape[0]
    values, vectors = np.linalg.eig(h0)
    order = np.lexsort((values.imag, values.real))
    values = values[order]
    vectors = _normalize_columns(vectors[:, order])

    radius = float(np.max(np.abs(values))) if n else 0.0
    gap = min_pairwise_gap(values)
    if gap < resolve_gap_tol(gap_tol) * max(1.0, radius):
        raise DegenerateSpectrum(
            f"minimum eigenvalue gap {gap:.3e} below threshold "
            f"(relative tolerance {resolve_gap_tol(gap_tol):.1e})"
        )

    left = np.linalg.inv(vectors)

    h0_norm = float(np.linalg.norm(h0, 2))
    residual = float(np.linalg.norm(h0 @ vectors - vectors * values, 2))
    if residual > frame_tol * max(h0_norm, np.finfo(float).tiny):
        raise NumericalFailure(
            f"eigensolver residual {residual:.3e} exceeds tolerance"
        )
    bio = float(np.linalg.norm(left @ vectors - np.eye(n), np.inf))
    if bio > frame_tol:
        raise NumericalFailure(
            f"biorthonormality defect {bio:.3e} exceeds tolerance"
        )

    for arr in (values, vectors, left):
        arr.setflags(write=False)
    return SpectralFrame(
        dim=n, eigenvalues=values, right=vectors, left=left, min_gap=gap
    )


def double_bracket(frame: SpectralFrame, a) -> np.ndarray:
    """Matrix of double-bracket elements [[A]]_mn = <<m| A |n> = (W A V)_mn."""
    a = as_complex_matrix(a)
    if a.shape[0] != frame.dim:
        raise DimensionMismatch(
            f"operator dimension {a.shape[0]} != frame dimension {frame.dim}"
        )
    return frame.left @ a @ frame.right
