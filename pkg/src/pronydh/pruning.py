"""Candidate selection after decimation: de-aliasing and spurious-solution pruning.

Solving the decimated system yields powered nodes, each with p possible
stride-th roots, plus spurious solutions off the unit torus.  Selection
either scores every candidate against the raw-measurement recurrence
residual (exhaustive), keeps only the solution closest to the torus before
de-aliasing (pre-filter), or additionally discards candidates far from a
supplied initial approximation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import SolveFailure
from .hankelize import prony_coefficient_expansion
from .model import MeasurementSequence, MultiplicityVector
from .polysolve import SolutionSet

__all__ = [
    "CandidateSet",
    "aliased_roots",
    "recurrence_residual",
    "select_exhaustive",
    "select_prefilter",
    "filter_by_init",
]

TORUS_CUTOFF = 0.5  # solutions with any coordinate farther from |u|=1 are spurious


@dataclass(frozen=True)
class CandidateSet:
    """Torus candidates with provenance (source solution, root branch indices)."""

    candidates: tuple[np.ndarray, ...]
    provenance: tuple[tuple[int, tuple[int, ...]], ...]

    def __len__(self) -> int:
        return len(self.candidates)


def aliased_roots(u, p: int) -> list[np.ndarray]:
    """All coordinate-wise p-th roots of a (normalized) solution vector.

    Coordinates are projected to the unit circle before root extraction;
    the output always contains p^s vectors.
    """
    u = np.asarray(u, dtype=complex).reshape(-1)
    if p < 1:
        raise ValueError("stride must be positive")
    if np.any(u == 0):
        raise ValueError("cannot normalize a zero coordinate to the torus")
    angles = np.angle(u / np.abs(u))
    per_coord = [
        [np.exp(1j * (a + 2.0 * np.pi * t) / p) for t in range(p)] for a in angles
    ]
    return [np.array(combo, dtype=complex) for combo in itertools.product(*per_coord)]


def recurrence_residual(
    z, meas: MeasurementSequence, D: MultiplicityVector, k_max: int | None = None
) -> float:
    """Accumulated recurrence defect of a node vector on raw measurements.

    Sums |sum_i m_{k+i} c_i(z)| for k = 0, ..., k_max, where c are the node
    polynomial coefficients of z.  Defaults to k_max = d - 1; it may be
    raised up to N - d - 1 to use every measurement.
    """
    if meas.stride != 1:
        raise ValueError("residual needs raw (stride 1) measurements")
    z = np.asarray(z, dtype=complex).reshape(-1)
    d = D.total_degree
    if k_max is None:
        k_max = d - 1
    if k_max < 0 or k_max + d > len(meas) - 1:
        raise ValueError("insufficient measurements for requested residual window")
    coeffs = prony_coefficient_expansion(D).evaluate(z)
    v = meas.values
    total = 0.0
    for k in range(k_max + 1):
        total += abs(np.dot(v[k:k + d + 1], coeffs))
    return float(total)


def _torus_adjacent(u: np.ndarray) -> bool:
    return bool(np.all(np.abs(np.abs(u) - 1.0) <= TORUS_CUTOFF))


def select_exhaustive(
    S: SolutionSet,
    p: int,
    meas: MeasurementSequence,
    D: MultiplicityVector,
    k_max: int | None = None,
) -> np.ndarray:
    """Smallest-residual candidate over every de-aliased torus-adjacent solution.

    Ties are broken by lexicographic order of the candidate coordinates.
    """
    if len(S) == 0:
        raise SolveFailure("no torus-adjacent solutions")
    candidates = []
    for u in S.solutions:
        if not _torus_adjacent(u):
            continue
        candidates.extend(aliased_roots(u, p))
    if not candidates:
        raise SolveFailure("no torus-adjacent solutions")
    candidates.sort(key=lambda z: tuple((c.real, c.imag) for c in z))
    best, best_res = None, np.inf
    for z in candidates:
        res = recurrence_residual(z, meas, D, k_max)
        if res < best_res:
            best, best_res = z, res
    return best


def select_prefilter(S: SolutionSet, p: int) -> tuple[np.ndarray, CandidateSet]:
    """Keep only the solution closest to the torus, then de-alias it.

    Returns the normalized near-torus solution and its p^s root candidates.
    """
    if len(S) == 0:
        raise SolveFailure("no torus-adjacent solutions")
    scored = [
        (float(np.max(np.abs(1.0 - np.abs(u)))), tuple((c.real, c.imag) for c in u), i)
        for i, u in enumerate(S.solutions)
    ]
    scored.sort()
    idx = scored[0][2]
    u_star = S.solutions[idx] / np.abs(S.solutions[idx])
    roots = aliased_roots(u_star, p)
    s = len(u_star)
    branches = list(itertools.product(range(p), repeat=s))
    return u_star, CandidateSet(
        candidates=tuple(roots),
        provenance=tuple((idx, b) for b in branches),
    )


def filter_by_init(G: CandidateSet, z_init, eta: float) -> CandidateSet:
    """Keep candidates within max-norm distance eta of the initial guess."""
    if eta < 0:
        raise ValueError("eta must be nonnegative")
    z_init = np.asarray(z_init, dtype=complex).reshape(-1)
    keep = [
        i
        for i, z in enumerate(G.candidates)
        if float(np.max(np.abs(z - z_init))) <= eta
    ]
    if not keep:
        raise SolveFailure("initial approximation inconsistent with candidates (eta too small?)")
    return CandidateSet(
        candidates=tuple(G.candidates[i] for i in keep),
        provenance=tuple(G.provenance[i] for i in keep),
    )
