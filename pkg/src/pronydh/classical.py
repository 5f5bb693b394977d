"""Classical Prony recovery and the single-node algebraic method.

The standard pipeline: extract the node-polynomial coefficients from the
nullspace of the Hankel data matrix, take its roots, group the roots into
clusters matching the multiplicity structure, and recover the amplitude
coefficients from a confluent Vandermonde least-squares solve.  The
single-node method eliminates the linear amplitudes through decimation and
reads the powered node off a small elimination polynomial instead, which
keeps multiple roots well conditioned.
"""

from __future__ import annotations

import numpy as np

from . import _grouping
from .errors import SolveFailure
from .hankelize import single_node_polynomial
from .model import (
    MeasurementSequence,
    MultiplicityVector,
    PronyParameters,
    decimate,
)

__all__ = [
    "hankel_matrix",
    "hankel_nullspace",
    "polynomial_roots",
    "assign_multiplicities",
    "confluent_vandermonde_solve",
    "prony_solve",
    "single_node_solve",
]


def hankel_matrix(meas: MeasurementSequence, d: int) -> np.ndarray:
    """d x (d+1) Hankel matrix with entry (k, l) = m_{k+l}."""
    if d < 1:
        raise ValueError("d must be at least 1")
    if len(meas) < 2 * d:
        raise ValueError("need at least 2d measurements for the Hankel matrix")
    v = meas.values
    return np.array([v[k:k + d + 1] for k in range(d)], dtype=complex)


def hankel_nullspace(H: np.ndarray) -> np.ndarray:
    """Monic nullspace vector of the Hankel data matrix.

    Returns the right singular vector of the smallest singular value,
    normalized so its last entry is 1.
    """
    H = np.asarray(H, dtype=complex)
    if not np.any(H):
        raise ValueError("Hankel matrix is zero")
    _, _, vh = np.linalg.svd(H)
    c = vh[-1].conj()
    if abs(c[-1]) < 1e-10 * np.linalg.norm(c):
        raise SolveFailure("leading coefficient vanishes; degree structure inconsistent")
    return c / c[-1]


def polynomial_roots(coeffs) -> np.ndarray:
    """Roots of a monic polynomial (ascending coefficients, balanced companion)."""
    coeffs = np.asarray(coeffs, dtype=complex).reshape(-1)
    if abs(coeffs[-1] - 1.0) > 1e-9:
        raise ValueError("polynomial must be monic")
    if len(coeffs) == 1:
        return np.array([], dtype=complex)
    return np.roots(coeffs[::-1])


def assign_multiplicities(roots, D: MultiplicityVector) -> np.ndarray:
    """Collapse d polynomial roots into s representative nodes.

    Roots are grouped into clusters whose sizes match the multiplicity parts
    (minimizing total within-group pairwise distance); each cluster's
    centroid is projected to the unit circle.  The returned nodes are ordered
    so that node j carries multiplicity D.parts[j], with equal-size groups
    taken in ascending order of argument.
    """
    roots = np.asarray(roots, dtype=complex).reshape(-1)
    if len(roots) != D.total_degree:
        raise ValueError("root count does not match multiplicity vector")
    groups = _grouping.group_min_pairwise(roots, D.parts)
    reps = []
    for g in groups:
        centroid = g.mean()
        if centroid == 0:
            raise SolveFailure("degenerate root cluster (zero centroid)")
        reps.append((len(g), np.angle(centroid), centroid / abs(centroid)))
    reps.sort(key=lambda r: (r[1], r[0]))
    nodes = np.empty(D.num_nodes, dtype=complex)
    used = [False] * len(reps)
    for j, dj in enumerate(D.parts):
        for i, (size, _, rep) in enumerate(reps):
            if not used[i] and size == dj:
                nodes[j] = rep
                used[i] = True
                break
    return nodes


def confluent_vandermonde_solve(
    nodes, D: MultiplicityVector, meas: MeasurementSequence
) -> tuple[np.ndarray, ...]:
    """Leas-squares amplitude recovery over the basis columns z_j^k k^l.

    Returns one coefficient array per node, matching the multiplicity parts.
    """
    nodes = np.asarray(nodes, dtype=complex).reshape(-1)
    N = len(meas)
    if N < D.num_parameters:
        raise ValueError("not enough measurements for coefficient recovery")
    k = np.arange(N, dtype=float)
    columns = []
    for z, dj in zip(nodes, D.parts):
        zk = np.power(z, k)
        for ell in range(dj):
            columns.append(zk * k ** ell)
    A = np.column_stack(columns)
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[-1] == 0 or sv[0] / sv[-1] > 1e14:
        raise SolveFailure("degenerate node configuration")
    coeffs, *_ = np.linalg.lstsq(A, meas.values, rcond=None)
    out, pos = [], 0
    for dj in D.parts:
        out.append(coeffs[pos:pos + dj])
        pos += dj
    return tuple(out)


def prony_solve(meas: MeasurementSequence, D: MultiplicityVector) -> PronyParameters:
    """Classical recovery: Hankel nullspace, roots, grouping, amplitudes."""
    d = D.total_degree
    if len(meas) < 2 * d:
        raise ValueError("need at least 2d measurements")
    H = hankel_matrix(meas, d)
    c = hankel_nullspace(H)
    roots = polynomial_roots(c)
    nodes = assign_multiplicities(roots, D)
    coeffs = confluent_vandermonde_solve(nodes, D, meas)
    return PronyParameters(nodes, coeffs, D)


def single_node_solve(meas: MeasurementSequence, d: int, z_init=None, eta=None):
    """Algebraic single-node recovery via decimated elimination.

    Decimates with the largest stride that keeps d+1 strided samples in
    range, forms the elimination polynomial from them, takes its root
    closest to the unit circle, and extracts the stride-th roots of that
    value.  With `z_init` the candidate nearest the initial guess (within
    `eta`, when given) is returned; without it the full candidate list comes
    back for external pruning.
    """
    N = len(meas)
    if N < d + 2:
        raise ValueError("not enough measurements for single-node recovery")
    p = N // (d + 1)
    if p * (d + 1) > N - 1:
        p -= 1  # keep the largest used index inside the data
    if p < 1:
        raise ValueError("not enough measurements for single-node recovery")
    dec = decimate(meas, p, d + 2)
    q = single_node_polynomial(dec, d)
    roots = np.roots(q)
    dist = np.abs(np.abs(roots) - 1.0)
    if dist.min() > 0.5:
        raise SolveFailure("no circle-adjacent root; model mismatch")
    near = np.flatnonzero(dist <= dist.min() * (1.0 + 1e-12) + 1e-300)
    if len(near) > 1:
        # Tie-break (arbitrary): prefer the root where the normalized
        # polynomial is steepest, i.e. the better-conditioned simple root.
        dq = np.polyder(q) / q[0]
        near = sorted(near, key=lambda i: -abs(np.polyval(dq, roots[i])))
    rho = roots[near[0]]
    rho = rho / abs(rho)
    angle = np.angle(rho)
    candidates = np.array(
        [np.exp(1j * (angle + 2.0 * np.pi * t) / p) for t in range(p)], dtype=complex
    )
    if z_init is None:
        return candidates
    if eta is not None:
        candidates = candidates[np.abs(candidates - z_init) <= eta]
        if len(candidates) == 0:
            raise SolveFailure("initial approximation inconsistent with candidates (eta too small?)")
    return complex(candidates[np.argmin(np.abs(candidates - z_init))])
