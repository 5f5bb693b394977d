"""Sensitivity diagnostics: forward-map condition numbers and system sensitivity.

The component-wise condition number of a parameter is the absolute row sum
of the pseudo-inverse of the forward-map Jacobian; the decimated variant
uses the square Jacobian of the strided map.  For the Hankel-structured
polynomial system, the linearized sensitivity of each solution coordinate to
coefficient perturbations combines the inverse system Jacobian with the
monomial magnitudes at the solution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SolveFailure
from .hankelize import HankelSystem, prony_coefficient_expansion
from .model import PronyParameters, separation

__all__ = [
    "ConditionReport",
    "forward_jacobian",
    "condition_numbers_full",
    "condition_numbers_decimated",
    "system_sensitivity",
]

RANK_DEFICIENCY_CUTOFF = 1e14


@dataclass(frozen=True)
class ConditionReport:
    """Per-parameter condition values in the packed parameter layout."""

    labels: tuple[str, ...]
    cn_full: np.ndarray | None = None
    cn_decimated: np.ndarray | None = None
    sensitivity: np.ndarray | None = field(default=None)  # per node
    N: int | None = None
    p: int | None = None
    min_separation: float = 0.0
    diameter: float = 0.0

    def to_dict(self) -> dict:
        def arr(a):
            return None if a is None else [float(x) for x in a]

        return {
            "labels": list(self.labels),
            "cn_full": arr(self.cn_full),
            "cn_decimated": arr(self.cn_decimated),
            "sensitivity": arr(self.sensitivity),
            "N": self.N,
            "p": self.p,
            "min_separation": self.min_separation,
            "diameter": self.diameter,
        }


def forward_jacobian(params: PronyParameters, count: int, stride: int = 1) -> np.ndarray:
    """Jacobian of the (strided) forward map, one row per measurement.

    Row k differentiates m_{stride*k} with respect to the packed parameters:
    d m / d a_{l,j} = z_j^{sk} (sk)^l  and
    d m / d z_j     = z_j^{sk-1} * sum_l a_{l,j} (sk)^{l+1}.
    Stride 1 with count N gives the full N x R Jacobian.
    """
    if count < 1 or stride < 1:
        raise ValueError("count and stride must be positive")
    D = params.multiplicities
    R = D.num_parameters
    k = stride * np.arange(count, dtype=float)
    J = np.empty((count, R), dtype=complex)
    col = 0
    for z, coeffs, dj in zip(params.nodes, params.coefficients, D.parts):
        zk = np.power(z, k)
        for ell in range(dj):
            J[:, col] = zk * k ** ell
            col += 1
        amp = np.zeros(count, dtype=complex)
        for ell, a in enumerate(coeffs):
            amp += a * k ** (ell + 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            zk_minus = np.power(z, k - 1)
        J[:, col] = np.where(k == 0, 0.0, zk_minus * amp)
        col += 1
    return J


def condition_numbers_full(params: PronyParameters, N: int) -> ConditionReport:
    """Row sums of the pseudo-inverse of the full N x R Jacobian."""
    D = params.multiplicities
    if N < D.num_parameters:
        raise ValueError("N must be at least the parameter count")
    J = forward_jacobian(params, N)
    sv = np.linalg.svd(J, compute_uv=False)
    if sv[-1] == 0 or sv[0] / sv[-1] > RANK_DEFICIENCY_CUTOFF:
        raise SolveFailure("Jacobian rank-deficient at data point")
    rcond = max(J.shape) * np.finfo(float).eps
    pinv = np.linalg.pinv(J, rcond=rcond)
    sep = separation(params)
    return ConditionReport(
        labels=tuple(params.parameter_labels()),
        cn_full=np.abs(pinv).sum(axis=1),
        N=N,
        min_separation=sep.minimum,
        diameter=sep.diameter,
    )


def condition_numbers_decimated(params: PronyParameters, p: int) -> ConditionReport:
    """Row sums of the inverse of the square R x R strided Jacobian."""
    if p < 1:
        raise ValueError("stride must be positive")
    D = params.multiplicities
    R = D.num_parameters
    J = forward_jacobian(params, R, stride=p)
    sv = np.linalg.svd(J, compute_uv=False)
    if sv[-1] == 0 or sv[0] / sv[-1] > RANK_DEFICIENCY_CUTOFF:
        raise SolveFailure("decimation destroyed identifiability (aliasing)")
    inv = np.linalg.inv(J)
    sep = separation(params)
    return ConditionReport(
        labels=tuple(params.parameter_labels()),
        cn_decimated=np.abs(inv).sum(axis=1),
        p=p,
        min_separation=sep.minimum,
        diameter=sep.diameter,
    )


def system_sensitivity(
    system: HankelSystem, solution, noise_bound: float
) -> np.ndarray:
    """Linearized sensitivity of each solution coordinate to coefficient noise.

    For coordinate i:  sum_k |K_{i,k}| * (sum over the monomials of equation
    k of |u^j|) * max |delta alpha_k|, with K the inverse system Jacobian at
    the solution.  A measurement perturbation bounded by `noise_bound`
    perturbs each system coefficient by at most that bound times the largest
    integer expansion weight, which is the scaling used here.
    """
    u = np.asarray(solution, dtype=complex).reshape(-1)
    s = system.multiplicities.num_nodes
    if u.shape[0] != s:
        raise ValueError("solution length does not match node count")
    J = np.empty((s, s), dtype=complex)
    for k, eq in enumerate(system.equations):
        for j in range(s):
            J[k, j] = eq.differentiate(j).evaluate(u)
    sv = np.linalg.svd(J, compute_uv=False)
    if sv[-1] == 0 or sv[0] / sv[-1] > RANK_DEFICIENCY_CUTOFF:
        raise SolveFailure("system Jacobian singular at solution")
    K = np.linalg.inv(J)
    weight = prony_coefficient_expansion(system.multiplicities).max_abs_weight()
    delta_alpha = noise_bound * weight
    kappa = np.empty(s, dtype=float)
    for i in range(s):
        total = 0.0
        for k, eq in enumerate(system.equations):
            mono_sum = sum(
                abs(np.prod([u[v] ** e for v, e in enumerate(expo) if e]))
                for expo in eq.terms
            )
            total += abs(K[i, k]) * mono_sum * delta_alpha
        kappa[i] = total
    return kappa
