"""Independent verification against exact diagonalization.

Nothing here reuses the perturbative machinery: eigenvalue curves come from
dense diagonalization of H(q) at sample points, continued in q by nearest-
neighbor matching anchored at the canonical q = 0 frame.  Truncated series
are then certified empirically:

* `series_residual_order` fits the log-log slope of |h_n(q) - truncation|;
  a correct order-K series scales at least like q^(K+1).
* `fd_eigenvalue_derivatives` estimates h_n^(k) = (1/k!) d^k h_n / dq^k by
  central differences with one Richardson extrapolation step.
* `state_ray_residual` measures the angle between the truncated eigenvector
  and the exact one, as rays, so gauge and normalization drop out.

Pairing is guarded: if the runner-up match is within a factor 2 of the best
match the continuation is ambiguous and the sweep is rejected instead of
silently mislabeling branches.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .corrections import PerturbationSeries
from .errors import (
    DegenerateSpectrum,
    InsufficientOrder,
    PairingAmbiguous,
    ResidualUnderflow,
)
from .generators import PolynomialHamiltonian
from .spectral import eigenframe, min_pairwise_gap, resolve_gap_tol

# residuals below this are roundoff, not signal
RESIDUAL_FLOOR = 1e-14
# ray residuals keep a little more headroom over eigenvector noise
RAY_FLOOR = 1e-13
_MIN_FIT_POINTS = 5
_MARGIN_FACTOR = 2.0


@dataclass(frozen=True, eq=False)
class SpectrumCurve:
    """Exact eigenvalue curves h_n(q), continuously paired across samples.

    Row n of `values` follows the state that sits at canonical frame index n
    at q = 0.  `pair_margin` is the smallest ratio of runner-up to best match
    distance seen while pairing (> 2 by construction, inf if no steps).
    """

    qs: np.ndarray
    values: np.ndarray
    pair_margin: float


def _eig_sorted_check(h_q: np.ndarray, q: float, gap_tol: float, want_vectors: bool):
    if want_vectors:
        values, vectors = np.linalg.eig(h_q)
    else:
        values = np.linalg.eigvals(h_q)
        vectors = None
    radius = float(np.max(np.abs(values)))
    if min_pairwise_gap(values) < gap_tol * max(1.0, radius):
        raise DegenerateSpectrum(
            f"spectrum numerically degenerate at q = {q:.6g}"
        )
    return values, vectors


def _pair_step(prev: np.ndarray, new: np.ndarray, q: float):
    """Match each previous eigenvalue to its nearest successor.

    Returns the permutation of `new` and the step margin.  Raises
    PairingAmbiguous when the runner-up candidate is within a factor 2 of the
    best one, or when two states claim the same successor.
    """
    n = prev.size
    if n == 1:
        return np.array([0]), np.inf
    dist = np.abs(prev[:, None] - new[None, :])
    picks = np.argmin(dist, axis=1)
    part = np.sort(dist, axis=1)
    best, runner = part[:, 0], part[:, 1]
    with np.errstate(divide="ignore"):
        ratios = np.where(best > 0, runner / np.maximum(best, 1e-300), np.inf)
    margin = float(np.min(ratios))
    if np.any(runner < _MARGIN_FACTOR * best):
        raise PairingAmbiguous(
            f"eigenvalue continuation ambiguous at q = {q:.6g} "
            f"(margin {margin:.3g} < {_MARGIN_FACTOR})"
        )
    if len(set(picks.tolist())) != n:
        raise PairingAmbiguous(
            f"two states matched the same eigenvalue at q = {q:.6g}"
        )
    return picks, margin


def _continued_sweep(
    hamiltonian: PolynomialHamiltonian,
    qs: np.ndarray,
    gap_tol: float,
    want_vectors: bool,
):
    """Eigen-curves over qs, continued outward from the q = 0 frame."""
    frame = eigenframe(hamiltonian.term(0), gap_tol=gap_tol)
    n = frame.dim
    values = np.zeros((n, qs.size), dtype=np.complex128)
    vectors = np.zeros((n, qs.size, n), dtype=np.complex128) if want_vectors else None
    margin = np.inf

    order_pos = [i for i in range(qs.size) if qs[i] >= 0.0]
    order_neg = [i for i in range(qs.size) if qs[i] < 0.0][::-1]
    for chain in (order_pos, order_neg):
        prev = frame.eigenvalues
        for i in chain:
            q = float(qs[i])
            vals, vecs = _eig_sorted_check(
                hamiltonian.at(q), q, gap_tol, want_vectors
            )
            picks, step_margin = _pair_step(prev, vals, q)
            margin = min(margin, step_margin)
            values[:, i] = vals[picks]
            if want_vectors:
                vectors[:, i, :] = vecs[:, picks].T
            prev = values[:, i]
    return frame, values, vectors, margin


def exact_spectrum_sweep(
    hamiltonian: PolynomialHamiltonian,
    qs,
    gap_tol: float | None = None,
) -> SpectrumCurve:
    """Diagonalize H(q) at each sample and pair eigenvalues into curves.

    `qs` must be strictly increasing; pairing is anchored at q = 0 by the
    canonical frame of H_0 and folded outward in both directions, so samples
    should start near zero.  Identical inputs give bitwise-identical curves.
    """
    qs = np.asarray(qs, dtype=float)
    if qs.ndim != 1 or qs.size == 0:
        raise ValueError("qs must be a non-empty 1-D sequence")
    if np.any(np.diff(qs) <= 0):
        raise ValueError("qs must be strictly increasing")
    tol = resolve_gap_tol(gap_tol)
    _, values, _, margin = _continued_sweep(hamiltonian, qs, tol, False)
    qs = qs.copy()
    for arr in (qs, values):
        arr.setflags(write=False)
    return SpectrumCurve(qs=qs, values=values, pair_margin=margin)


def log_log_slope(xs: np.ndarray, ys: np.ndarray) -> float:
    """Least-squares slope of log(ys) against log(xs)."""
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def series_residual_order(
    curve: SpectrumCurve,
    series: PerturbationSeries,
    n: int,
    order: int,
    window: tuple[float, float],
) -> float:
    """Empirical convergence order of a truncated eigenvalue series.

    Fits the log-log slope of |h_n(q) - sum_{k<=order} q^k h^(k)| over the
    window.  A correct series gives a slope of at least order + 1 (more when
    the next coefficient vanishes); the check threshold order + 0.8 leaves
    room for both.  Points below the roundoff floor are excluded from the
    fit; if fewer than five usable points remain the window cannot support a
    slope estimate and ResidualUnderflow is raised.
    """
    if series.order < order:
        raise InsufficientOrder(
            f"series holds order {series.order}, requested {order}"
        )
    q_lo, q_hi = float(window[0]), float(window[1])
    if not (0.0 < q_lo < q_hi):
        raise ValueError("window must satisfy 0 < q_lo < q_hi")
    sel = (curve.qs >= q_lo) & (curve.qs <= q_hi)
    qs = curve.qs[sel]
    if qs.size == 0:
        raise ValueError("window contains no curve samples")
    decades = np.log10(q_hi / q_lo)
    if decades > 0 and qs.size / decades < 8.0 - 1e-9:
        raise ValueError("need at least 8 samples per decade in the window")

    coeffs = series.eigenvalue_corrections[: order + 1]
    truncated = np.polyval(coeffs[::-1], qs)
    residual = np.abs(curve.values[n, sel] - truncated)
    usable = residual >= RESIDUAL_FLOOR
    if int(usable.sum()) < _MIN_FIT_POINTS:
        raise ResidualUnderflow(
            f"only {int(usable.sum())} residuals above {RESIDUAL_FLOOR:g}; "
            "window too small to measure a slope"
        )
    return log_log_slope(qs[usable], residual[usable])


_STENCILS = {
    1: ((-1, 1), (-0.5, 0.5)),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
    4: ((-2, -1, 0, 1, 2), (1.0, -4.0, 6.0, -4.0, 1.0)),
}


def fd_eigenvalue_derivatives(
    hamiltonian: PolynomialHamiltonian,
    n: int,
    k: int,
    step: float = 1e-3,
    gap_tol: float | None = None,
) -> complex:
    """Finite-difference estimate of the series coefficient h_n^(k).

    Central stencil of second-order accuracy at spacings `step` and step/2,
    combined by one Richardson extrapolation, divided by k!.  The whole
    stencil must stay inside the non-degenerate region.
    """
    if not 1 <= k <= 4:
        raise ValueError("derivative order k must be in 1..4")
    if step <= 0:
        raise ValueError("step must be positive")
    offsets, weights = _STENCILS[k]
    tol = resolve_gap_tol(gap_tol)

    points = sorted({o * step for o in offsets} | {o * step / 2 for o in offsets})
    qs = np.array(points)
    _, values, _, _ = _continued_sweep(hamiltonian, qs, tol, False)
    lookup = {q: values[n, i] for i, q in enumerate(points)}

    def stencil(h: float) -> complex:
        return sum(w * lookup[o * h] for o, w in zip(offsets, weights)) / h ** k

    coarse = stencil(step)
    fine = stencil(step / 2)
    return complex((4.0 * fine - coarse) / 3.0 / factorial(k))


def state_ray_residual(
    hamiltonian: PolynomialHamiltonian,
    series: PerturbationSeries,
    n: int,
    order: int,
    qs,
    gap_tol: float | None = None,
) -> np.ndarray:
    """Sine of the angle between truncated and exact eigenvectors, per q.

    Both vectors are compared as rays (overall complex factors ignored), so
    the result is insensitive to gauge and normalization choices.  Computed
    from the projection residual, which stays accurate down to roundoff.
    """
    if series.order < order:
        raise InsufficientOrder(
            f"series holds order {series.order}, requested {order}"
        )
    qs = np.asarray(qs, dtype=float)
    if np.any(np.diff(qs) <= 0):
        raise ValueError("qs must be strictly increasing")
    tol = resolve_gap_tol(gap_tol)
    _, _, vectors, _ = _continued_sweep(hamiltonian, qs, tol, True)

    out = np.zeros(qs.size)
    for i, q in enumerate(qs):
        truncated = np.zeros_like(series.state_corrections[0])
        for kk in range(order + 1):
            truncated = truncated + (q ** kk) * series.state_corrections[kk]
        exact = vectors[n, i, :]
        overlap = np.vdot(exact, truncated) / np.vdot(exact, exact)
        residual = truncated - overlap * exact
        out[i] = float(
            np.linalg.norm(residual) / max(np.linalg.norm(truncated), 1e-300)
        )
    return out
