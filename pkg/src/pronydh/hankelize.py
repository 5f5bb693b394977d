"""Symmetric-function machinery and Hankel-structured system construction.

The coefficients of the node polynomial  prod_j (x - z_j)^{d_j}  annihilate
the moment sequence through a linear recurrence.  Viewing those coefficients
as polynomials in the node variables u_1, ..., u_s turns s shifted copies of
the recurrence into a square polynomial system whose torus solution carries
the (powered) nodes.  This module expands the coefficient polynomials with
exact integer weights, assembles the square system from decimated
measurements, builds the single-node elimination polynomial, and provides
the closed-form Jacobian of the system at its designed solution together
with its Vandermonde-times-diagonal factorization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import SolveFailure
from .model import MeasurementSequence, MultiplicityVector, PronyParameters
from .polysolve import MultiPoly, SquareSystem

__all__ = [
    "elementary_symmetric",
    "prony_polynomial",
    "CoefficientExpansion",
    "prony_coefficient_expansion",
    "HankelSystem",
    "build_hankel_system",
    "single_node_polynomial",
    "JacobianFactorization",
    "closed_form_jacobian",
]

MAX_TOTAL_DEGREE = 40  # binomial weights stay well inside exact 64-bit range


def elementary_symmetric(values) -> np.ndarray:
    """Elementary symmetric polynomials e_0, ..., e_m of the inputs.

    Computed by incremental convolution of the factors (x + v_i); e_0 = 1.
    """
    values = np.asarray(values, dtype=complex).reshape(-1)
    sigma = np.zeros(len(values) + 1, dtype=complex)
    sigma[0] = 1.0
    for i, v in enumerate(values):
        sigma[1:i + 2] = sigma[1:i + 2] + v * sigma[0:i + 1]
    return sigma


def prony_polynomial(nodes, D: MultiplicityVector) -> np.ndarray:
    """Ascending coefficients c_0, ..., c_d of prod_j (x - z_j)^{d_j} (monic).

    c_l = (-1)^{d-l} e_{d-l}(node multiset).
    """
    nodes = np.asarray(nodes, dtype=complex).reshape(-1)
    if nodes.shape[0] != D.num_nodes:
        raise ValueError("node count does not match multiplicity vector")
    multiset = np.repeat(nodes, D.parts)
    d = D.total_degree
    sigma = elementary_symmetric(multiset)
    signs = (-1.0) ** np.arange(d, -1, -1)
    return signs * sigma[::-1]


@dataclass(frozen=True)
class CoefficientExpansion:
    """Node-polynomial coefficients as integer-weighted monomials in u_1..u_s.

    `terms[l]` maps an exponent vector (e_1, ..., e_s) to the integer weight
    of that monomial in the degree-l coefficient of prod_j (x - u_j)^{d_j}.
    The top coefficient is identically 1 and the constant coefficient is
    (-1)^d * prod u_j^{d_j}.
    """

    multiplicities: MultiplicityVector
    terms: tuple[dict, ...]

    def evaluate(self, point) -> np.ndarray:
        """Values of all d+1 coefficient polynomials at a numeric point."""
        point = np.asarray(point, dtype=complex).reshape(-1)
        if point.shape[0] != self.multiplicities.num_nodes:
            raise ValueError("point length does not match node count")
        out = np.zeros(len(self.terms), dtype=complex)
        for ell, term in enumerate(self.terms):
            total = 0j
            for expo, weight in term.items():
                mono = 1.0 + 0j
                for u, e in zip(point, expo):
                    if e:
                        mono *= u ** e
                total += weight * mono
            out[ell] = total
        return out

    def max_abs_weight(self) -> int:
        """Largest integer weight across all monomials (perturbation scaling)."""
        return max(abs(w) for term in self.terms for w in term.values())


def prony_coefficient_expansion(D: MultiplicityVector) -> CoefficientExpansion:
    """Symbolic expansion of the node-polynomial coefficients for D (cached)."""
    return _expansion_cached(D.parts)


@lru_cache(maxsize=None)
def _expansion_cached(parts: tuple[int, ...]) -> CoefficientExpansion:
    D = MultiplicityVector(parts)
    d = D.total_degree
    if d > MAX_TOTAL_DEGREE:
        raise ValueError(f"total degree {d} exceeds supported maximum {MAX_TOTAL_DEGREE}")
    s = D.num_nodes
    zero = (0,) * s
    # Coefficient lists in x, one sparse {exponent-vector: int} map per degree.
    acc = [{zero: 1}]
    for j, dj in enumerate(parts):
        # (x - u_j)^{dj}: coefficient of x^{dj-i} is C(dj, i) * (-u_j)^i.
        factor = []
        for i in range(dj, -1, -1):
            expo = [0] * s
            expo[j] = i
            factor.append({tuple(expo): (-1) ** i * math.comb(dj, i)})
        acc = _convolve(acc, factor, s)
    return CoefficientExpansion(D, tuple(acc))


def _convolve(a: list[dict], b: list[dict], s: int) -> list[dict]:
    out = [dict() for _ in range(len(a) + len(b) - 1)]
    for i, ta in enumerate(a):
        for j, tb in enumerate(b):
            dest = out[i + j]
            for ea, wa in ta.items():
                for eb, wb in tb.items():
                    key = tuple(x + y for x, y in zip(ea, eb))
                    dest[key] = dest.get(key, 0) + wa * wb
    return [{e: w for e, w in term.items() if w != 0} for term in out]


@dataclass(frozen=True)
class HankelSystem:
    """Square polynomial system built from consecutive decimated measurements.

    Equation k reads  f_k(u) = sum_{i=0..d} n_{k+i} * coeff_l(u),  for
    k = 0, ..., s-1, where n are the stored measurement values.
    """

    equations: tuple[MultiPoly, ...]
    stride: int
    multiplicities: MultiplicityVector
    measurements: MeasurementSequence

    @property
    def square_system(self) -> SquareSystem:
        return SquareSystem(self.equations)


def build_hankel_system(dec: MeasurementSequence, D: MultiplicityVector) -> HankelSystem:
    """Assemble the s x s system from at least d + s decimated values."""
    d, s = D.total_degree, D.num_nodes
    if len(dec) < d + s:
        raise ValueError("need at least R = d+s decimated measurements")
    expansion = prony_coefficient_expansion(D)
    equations = []
    for k in range(s):
        terms: dict = {}
        for i, term in enumerate(expansion.terms):
            n_ki = complex(dec.values[k + i])
            for expo, weight in term.items():
                terms[expo] = terms.get(expo, 0) + n_ki * weight
        equations.append(MultiPoly(s, terms))
    return HankelSystem(tuple(equations), dec.stride, D, dec)


def single_node_polynomial(dec: MeasurementSequence, d: int) -> np.ndarray:
    """Descending coefficients of the single-node elimination polynomial.

    q(u) = sum_{l=0..d} (-1)^l C(d,l) n_{l+1} u^{d-l}, built from the
    measurement values at logical indices 1 through d+1 (the sequence's
    `origin` shifts which stored entry is n_1).
    """
    if d < 1:
        raise ValueError("degree must be at least 1")
    if d > MAX_TOTAL_DEGREE:
        raise ValueError(f"degree {d} exceeds supported maximum {MAX_TOTAL_DEGREE}")
    first = 1 - dec.origin
    last = d + 1 - dec.origin
    if first < 0 or last > len(dec) - 1:
        raise ValueError("insufficient measurements for single-node polynomial")
    n = dec.values[first:last + 1]
    signs = np.array([(-1) ** ell * math.comb(d, ell) for ell in range(d + 1)], dtype=float)
    return signs * n


@dataclass(frozen=True)
class JacobianFactorization:
    """Closed-form system Jacobian at the designed solution, factored V @ B.

    V is the s x s Vandermonde matrix on the (powered) nodes; B is diagonal
    with entries  -d_j! * w_j^{d_j - 1} * b_{d_j-1,j} * prod_{i != j} (w_j - w_i)^{d_i}.
    `product` holds the Jacobian computed directly from its per-entry closed
    form, so comparing it against V @ B exercises two independent floating
    evaluations of the same matrix.
    """

    vandermonde: np.ndarray
    diagonal: np.ndarray
    product: np.ndarray


def closed_form_jacobian(scaled: PronyParameters) -> JacobianFactorization:
    """Analytic Jacobian of the Hankel-structured system at its solution.

    `scaled` is the rescaled parameter point whose nodes w_j solve the
    system built from the matching decimated measurements.  Entry (k, j) is

        -d_j! * w_j^{k + d_j - 1} * b_{d_j-1,j} * prod_{i != j} (w_j - w_i)^{d_i}.
    """
    D = scaled.multiplicities
    s = D.num_nodes
    w = scaled.nodes
    for i in range(s):
        for j in range(i + 1, s):
            if w[i] == w[j]:
                raise SolveFailure("coincident nodes: Jacobian factorization is singular")
    lead = np.array([c[-1] for c in scaled.coefficients], dtype=complex)
    if np.any(lead == 0):
        raise ValueError("leading coefficients must be nonzero")

    V = np.vander(w, N=s, increasing=True).T  # V[k, j] = w_j^k
    diag = np.empty(s, dtype=complex)
    for j, dj in enumerate(D.parts):
        cross = np.prod([(w[j] - w[i]) ** D.parts[i] for i in range(s) if i != j]) if s > 1 else 1.0
        diag[j] = -math.factorial(dj) * w[j] ** (dj - 1) * lead[j] * cross

    product = np.empty((s, s), dtype=complex)
    for k in range(s):
        for j, dj in enumerate(D.parts):
            cross = np.prod([(w[j] - w[i]) ** D.parts[i] for i in range(s) if i != j]) if s > 1 else 1.0
            product[k, j] = -math.factorial(dj) * w[j] ** (k + dj - 1) * lead[j] * cross
    return JacobianFactorization(vandermonde=V, diagonal=np.diag(diag), product=product)
