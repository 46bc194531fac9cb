"""Eigenvalue and eigenstate perturbation series from solved generators.

State corrections follow the transport recursion

    |n^(k)> = -(i/k) sum_{j=1..k} K_0^(j-1) |n^(k-j)>,   k >= 1,

whose closed-form solution is a dual Bell word polynomial in the K_0
coefficients,

    |n^(k)> = BB_k(0! (-i K_0^(0)), 1! (-i K_0^(1)), ..., (k-1)! (-i K_0^(k-1))) |n^(0)> / k!.

Both routes are implemented and must agree to roundoff.

Eigenvalue corrections come from the eigenflow generator K_1.  Matching
powers of q in K_1 |n> = (dh_n/dq) |n> gives

    sum_{j=1..k} (K_1^(j-1) - j h_n^(j)) |n^(k-j)> = 0,

and contracting with the dual vector <<n^(0)| isolates h_n^(k):

    h_n^(k) = ( [[K_1^(k-1)]]_nn
                + sum_{j=1..k-1} ( <<n^(0)| K_1^(j-1) |n^(k-j)>
                                   - j h_n^(j) <<n^(0)|n^(k-j)> ) ) / k.

The production path reuses the stored state corrections; a second path
rebuilds the same sum from the Bell word polynomials and serves as a cross
check.  Eigenvalues are gauge invariant: diagonal gauge choices for K_0
drop out of h_n^(k) identically, while the state corrections do change.

For a strictly linear family H_0 + q H_1 the first three corrections reduce
to closed forms in either [[K_1^(j)]] or [[H_1]] alone; `rs_linear_corrections`
and `crosscheck_linear` cover those, reproducing standard Rayleigh-
Schroedinger values in the Hermitian limit.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .bellpoly import dual_bell_words, evaluate_words
from .errors import DegreeMismatch, InsufficientOrder
from .generators import GeneratorSeries, PolynomialHamiltonian, solve_generators
from .spectral import SpectralFrame, as_complex_matrix, double_bracket, eigenframe


@dataclass(frozen=True, eq=False)
class PerturbationSeries:
    """Per-state series data: h_n^(k) and |n^(k)> for k = 0..order."""

    state: int
    order: int
    eigenvalue_corrections: np.ndarray
    state_corrections: tuple[np.ndarray, ...]
    gauge: str

    def eigenvalue_at(self, q: float) -> complex:
        """Truncated eigenvalue sum_{k<=order} q^k h^(k)."""
        powers = q ** np.arange(self.order + 1)
        return complex(np.sum(powers * self.eigenvalue_corrections))

    def state_at(self, q: float) -> np.ndarray:
        """Truncated eigenvector sum_{k<=order} q^k |n^(k)> (unnormalized)."""
        out = np.zeros_like(self.state_corrections[0])
        for k, vec in enumerate(self.state_corrections):
            out = out + (q ** k) * vec
        return out


def _require_order(gens: GeneratorSeries, order: int) -> None:
    if order < 0:
        raise ValueError("order must be non-negative")
    if gens.order < order - 1:
        raise InsufficientOrder(
            f"generators solved to order {gens.order}, "
            f"need {order - 1} for corrections of order {order}"
        )


def state_corrections_recursive(
    gens: GeneratorSeries, n: int, order: int
) -> list[np.ndarray]:
    """State corrections |n^(0)>..|n^(order)> by direct recursion."""
    _require_order(gens, order)
    vecs = [np.array(gens.frame.right[:, n])]
    for k in range(1, order + 1):
        acc = np.zeros_like(vecs[0])
        for j in range(1, k + 1):
            acc += gens.k0[j - 1] @ vecs[k - j]
        vecs.append((-1j / k) * acc)
    return vecs


def _bell_assignment(gens: GeneratorSeries, grade: int) -> dict[int, np.ndarray]:
    return {
        r: factorial(r - 1) * (-1j) * gens.k0[r - 1] for r in range(1, grade + 1)
    }


def state_corrections_bell(
    gens: GeneratorSeries, n: int, order: int
) -> list[np.ndarray]:
    """State corrections via the dual Bell closed form (equals the recursion)."""
    _require_order(gens, order)
    v0 = np.array(gens.frame.right[:, n])
    out = [v0]
    for k in range(1, order + 1):
        words = dual_bell_words(k)
        vec = evaluate_words(words, _bell_assignment(gens, k), v0)
        out.append(vec / factorial(k))
    return out


def eigenvalue_corrections(gens: GeneratorSeries, n: int, order: int) -> np.ndarray:
    """Eigenvalue corrections h_n^(0)..h_n^(order).

    Index k of the returned array holds h_n^(k); entry 0 is the frame
    eigenvalue.  Production path: dual-vector contraction against the stored
    state corrections.
    """
    _require_order(gens, order)
    wn = gens.frame.left[n, :]
    states = state_corrections_recursive(gens, n, max(order - 1, 0))
    h = np.zeros(order + 1, dtype=np.complex128)
    h[0] = gens.frame.eigenvalues[n]
    for k in range(1, order + 1):
        s = wn @ (gens.k1[k - 1] @ states[0])
        for j in range(1, k):
            s += wn @ (gens.k1[j - 1] @ states[k - j])
            s -= j * h[j] * (wn @ states[k - j])
        h[k] = s / k
    return h


def eigenvalue_corrections_bell(
    gens: GeneratorSeries, n: int, order: int
) -> np.ndarray:
    """Eigenvalue corrections rebuilt from dual Bell word polynomials.

    Same recursion as `eigenvalue_corrections` but with every state
    correction re-derived as BB_m / m! acting on |n^(0)>; cross-check path.
    """
    _require_order(gens, order)
    wn = gens.frame.left[n, :]
    v0 = np.array(gens.frame.right[:, n])
    bell_vecs = [v0]
    for m in range(1, order):
        words = dual_bell_words(m)
        bell_vecs.append(evaluate_words(words, _bell_assignment(gens, m), v0))
    h = np.zeros(order + 1, dtype=np.complex128)
    h[0] = gens.frame.eigenvalues[n]
    for k in range(1, order + 1):
        s = wn @ (gens.k1[k - 1] @ v0)
        for j in range(1, k):
            m = k - j
            s += (wn @ (gens.k1[j - 1] @ bell_vecs[m])) / factorial(m)
            s -= j * h[j] * (wn @ bell_vecs[m]) / factorial(m)
        h[k] = s / k
    return h


def build_series(gens: GeneratorSeries, n: int, order: int) -> PerturbationSeries:
    """Assemble the full per-state series (production routes)."""
    vecs = state_corrections_recursive(gens, n, order)
    h = eigenvalue_corrections(gens, n, order)
    return PerturbationSeries(
        state=n,
        order=order,
        eigenvalue_corrections=h,
        state_corrections=tuple(vecs),
        gauge=gens.gauge,
    )


def rs_linear_corrections(
    frame: SpectralFrame, h1, n: int
) -> tuple[complex, complex, complex]:
    """First three eigenvalue corrections of H_0 + q H_1 in closed form.

    Sums over intermediate states with double-bracket matrix elements:

        h^(1) = [[H_1]]_nn
        h^(2) = sum_{m != n} [[H_1]]_nm [[H_1]]_mn / (h_n - h_m)
        h^(3) = sum_{m,l != n} [[H_1]]_nm [[H_1]]_ml [[H_1]]_ln
                    / ((h_n - h_m)(h_n - h_l))
                - h^(1) sum_{m != n} [[H_1]]_nm [[H_1]]_mn / (h_n - h_m)^2

    With a Hermitian frame these are the textbook Rayleigh-Schroedinger
    formulas.
    """
    a = double_bracket(frame, as_complex_matrix(h1))
    h = frame.eigenvalues
    mask = np.arange(frame.dim) != n
    dn = h[n] - h[mask]
    row = a[n, mask]
    col = a[mask, n]
    h1c = a[n, n]
    h2c = np.sum(row * col / dn)
    sub = a[np.ix_(mask, mask)]
    h3c = (row / dn) @ sub @ (col / dn) - h1c * np.sum(row * col / dn ** 2)
    return complex(h1c), complex(h2c), complex(h3c)


def _k1_route_linear(gens: GeneratorSeries, n: int) -> tuple[complex, complex, complex]:
    """First three corrections of a linear family from [[K_1^(j)]] alone.

    h^(3) needs the off-diagonal second-order elements divided by the
    first-order correction differences; those elements vanish linearly with
    the same differences, so coincident first-order corrections contribute
    nothing (guarded explicitly).
    """
    frame = gens.frame
    b0 = double_bracket(frame, gens.k1[0])
    b1 = double_bracket(frame, gens.k1[1])
    b2 = double_bracket(frame, gens.k1[2])
    first = np.diag(b0)
    h1c = first[n]
    h2c = b1[n, n] / 2.0
    mask = np.arange(frame.dim) != n
    dh1 = first[mask] - first[n]
    num = b1[n, mask] * b1[mask, n]
    scale = float(np.abs(first).max()) + 1.0
    safe = np.abs(dh1) > 1e-13 * scale
    h3c = b2[n, n] / 3.0 - np.sum(num[safe] / dh1[safe]) / 3.0
    return complex(h1c), complex(h2c), complex(h3c)


@dataclass(frozen=True, eq=False)
class LinearCrosscheck:
    """Three-route comparison of h^(1..3) for a linear family.

    Rows of each route array are states, columns are orders 1..3.
    `max_relative_deviation` is the worst pairwise disagreement, measured
    relative to the per-state coefficient scale (floored at 1).
    """

    recursion: np.ndarray
    k1_route: np.ndarray
    h1_route: np.ndarray
    per_state_deviation: np.ndarray
    max_relative_deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_relative_deviation <= self.tolerance


def crosscheck_linear(
    hamiltonian: PolynomialHamiltonian,
    *,
    tolerance: float = 1e-10,
    gap_tol: float | None = None,
) -> LinearCrosscheck:
    """Compare the three linear-family routes to h^(1..3) for every state."""
    if hamiltonian.degree != 1:
        raise DegreeMismatch(
            f"expected a linear family (degree 1), got degree {hamiltonian.degree}"
        )
    frame = eigenframe(hamiltonian.term(0), gap_tol=gap_tol)
    gens = solve_generators(hamiltonian, frame, 2)
    dim = frame.dim
    route_a = np.zeros((dim, 3), dtype=np.complex128)
    route_b = np.zeros((dim, 3), dtype=np.complex128)
    route_c = np.zeros((dim, 3), dtype=np.complex128)
    for n in range(dim):
        route_a[n] = eigenvalue_corrections(gens, n, 3)[1:]
        route_b[n] = _k1_route_linear(gens, n)
        route_c[n] = rs_linear_corrections(frame, hamiltonian.term(1), n)
    dev = np.maximum(
        np.abs(route_a - route_b),
        np.maximum(np.abs(route_a - route_c), np.abs(route_b - route_c)),
    )
    scale = np.maximum(
        1.0,
        np.max(np.abs(np.stack([route_a, route_b, route_c])), axis=0),
    )
    per_state = np.max(dev / scale, axis=1)
    return LinearCrosscheck(
        recursion=route_a,
        k1_route=route_b,
        h1_route=route_c,
        per_state_deviation=per_state,
        max_relative_deviation=float(per_state.max()),
        tolerance=tolerance,
    )
