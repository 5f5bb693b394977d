"""Confluent Prony data model: parameters, measurements, noise and decimation.

A signal is a finite sequence of complex moments

    m_k = sum_j  z_j^k  *  sum_l  a_{l,j} k^l,      k = 0, ..., N-1,

where the nodes z_j lie on the unit circle and each node carries a
polynomial amplitude of degree d_j - 1.  This module holds the parameter
containers, the forward map producing the moments, seeded noise injection,
decimation (subsampling with stride p) and the equivalent rescaling of the
parameters, plus angular node-separation diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import SolveFailure

__all__ = [
    "MultiplicityVector",
    "PronyParameters",
    "MeasurementSequence",
    "NoiseSpec",
    "SeparationReport",
    "forward_map",
    "add_noise",
    "decimate",
    "scale_map",
    "separation",
    "choose_decimation",
]

UNIT_MODULUS_TOL = 1e-12
NODE_COLLISION_TOL = 1e-12


@dataclass(frozen=True)
class MultiplicityVector:
    """Per-node amplitude orders (d_1, ..., d_s)."""

    parts: tuple[int, ...]

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        object.__setattr__(self, "parts", parts)
        if len(parts) == 0:
            raise ValueError("multiplicity vector must have at least one part")
        if any(p < 1 for p in parts):
            raise ValueError("all multiplicities must be positive integers")

    @property
    def num_nodes(self) -> int:
        """Number of nodes s."""
        return len(self.parts)

    @property
    def total_degree(self) -> int:
        """Total degree d = sum of the parts."""
        return sum(self.parts)

    @property
    def num_parameters(self) -> int:
        """Parameter count R = d + s (all amplitudes plus all nodes)."""
        return self.total_degree + self.num_nodes


@dataclass(frozen=True)
class PronyParameters:
    """A point in data space: unit-modulus nodes with polynomial amplitudes.

    The packed layout interleaves amplitudes and nodes per node block:
    (a_{0,1}, ..., a_{d_1-1,1}, z_1, ..., a_{0,s}, ..., a_{d_s-1,s}, z_s).
    """

    nodes: np.ndarray
    coefficients: tuple[np.ndarray, ...]
    multiplicities: MultiplicityVector

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=complex).reshape(-1)
        coeffs = tuple(np.asarray(c, dtype=complex).reshape(-1) for c in self.coefficients)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "coefficients", coeffs)
        D = self.multiplicities
        if nodes.shape[0] != D.num_nodes:
            raise ValueError("node count does not match multiplicity vector")
        if len(coeffs) != D.num_nodes:
            raise ValueError("coefficient blocks do not match multiplicity vector")
        for j, (c, dj) in enumerate(zip(coeffs, D.parts)):
            if c.shape[0] != dj:
                raise ValueError(f"node {j}: expected {dj} coefficients, got {c.shape[0]}")
            if c[-1] == 0:
                raise ValueError(f"node {j}: leading coefficient must be nonzero")
        radii = np.abs(np.abs(nodes) - 1.0)
        if np.any(radii > UNIT_MODULUS_TOL):
            raise ValueError("nodes must lie on the unit circle (|z| = 1 within 1e-12)")
        for i in range(len(nodes)):
            for j in range(i + 1, len(nodes)):
                if abs(nodes[i] - nodes[j]) <= NODE_COLLISION_TOL:
                    raise ValueError("nodes must be pairwise distinct")

    def pack(self) -> np.ndarray:
        """Flatten to the interleaved (amplitudes..., node) per-block layout."""
        out = []
        for c, z in zip(self.coefficients, self.nodes):
            out.extend(c)
            out.append(z)
        return np.asarray(out, dtype=complex)

    @classmethod
    def from_packed(cls, vec, D: MultiplicityVector) -> "PronyParameters":
        """Inverse of :meth:`pack` for a given multiplicity vector."""
        vec = np.asarray(vec, dtype=complex).reshape(-1)
        if vec.shape[0] != D.num_parameters:
            raise ValueError("packed vector length does not match multiplicity vector")
        nodes, coeffs, pos = [], [], 0
        for dj in D.parts:
            coeffs.append(vec[pos:pos + dj])
            nodes.append(vec[pos + dj])
            pos += dj + 1
        return cls(np.asarray(nodes), tuple(coeffs), D)

    def parameter_labels(self) -> list[str]:
        """Human-readable labels in packed order, e.g. a[0,1], z[1]."""
        labels = []
        for j, dj in enumerate(self.multiplicities.parts, start=1):
            labels.extend(f"a[{ell},{j}]" for ell in range(dj))
            labels.append(f"z[{j}]")
        return labels


@dataclass(frozen=True)
class MeasurementSequence:
    """Complex moments, either raw (stride 1) or decimated with stride p."""

    values: np.ndarray
    stride: int = 1
    origin: int = 0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex).reshape(-1)
        object.__setattr__(self, "values", values)
        if self.stride < 1:
            raise ValueError("stride must be a positive integer")

    def __len__(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class NoiseSpec:
    """Perturbation model: kind, magnitude and RNG seed.

    Kinds: "bounded-uniform-complex" draws uniformly from the open complex
    disc of radius `level` (so every sample is strictly below the bound);
    "gaussian-complex" draws real and imaginary parts i.i.d. normal with
    standard deviation level/sqrt(2); "none" leaves the data untouched.
    """

    kind: str = "bounded-uniform-complex"
    level: float = 0.0
    seed: int = 0

    _KINDS = ("bounded-uniform-complex", "gaussian-complex", "none")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}; expected one of {self._KINDS}")
        if self.level < 0:
            raise ValueError("noise level must be nonnegative")


@dataclass(frozen=True)
class SeparationReport:
    """Angular node-separation summary (all distances wrapped into [0, pi])."""

    per_node: np.ndarray = field(repr=False)
    minimum: float = 0.0
    diameter: float = 0.0


def forward_map(params: PronyParameters, N: int) -> MeasurementSequence:
    """Evaluate the moments m_0, ..., m_{N-1} of a parameter point.

    m_k = sum_j z_j^k * (a_{0,j} + a_{1,j} k + ... + a_{d_j-1,j} k^{d_j-1}),
    with the k = 0 amplitude evaluating to a_{0,j}.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    k = np.arange(N, dtype=float)
    values = np.zeros(N, dtype=complex)
    for z, coeffs in zip(params.nodes, params.coefficients):
        values += np.power(z, k) * npoly.polyval(k, coeffs)
    return MeasurementSequence(values, stride=1)


def add_noise(meas: MeasurementSequence, spec: NoiseSpec) -> MeasurementSequence:
    """Return a perturbed copy of `meas` per the noise spec (seeded, reproducible)."""
    if len(meas) == 0:
        raise ValueError("measurement sequence is empty")
    if spec.kind == "none":
        return MeasurementSequence(meas.values.copy(), meas.stride, meas.origin)
    rng = np.random.default_rng(spec.seed)
    n = len(meas)
    if spec.kind == "gaussian-complex":
        draws = rng.standard_normal((n, 2))
        noise = (draws[:, 0] + 1j * draws[:, 1]) * (spec.level / np.sqrt(2.0))
    else:
        noise = _uniform_disc(rng, n, spec.level)
    return MeasurementSequence(meas.values + noise, meas.stride, meas.origin)


def _uniform_disc(rng: np.random.Generator, n: int, radius: float) -> np.ndarray:
    """n points uniform on the open disc |w| < radius (rejection from the square)."""
    if radius == 0.0:
        return np.zeros(n, dtype=complex)
    out = np.empty(n, dtype=complex)
    filled = 0
    while filled < n:
        draws = rng.uniform(-radius, radius, size=(2 * (n - filled) + 8, 2))
        w = draws[:, 0] + 1j * draws[:, 1]
        w = w[np.abs(w) < radius]
        take = min(len(w), n - filled)
        out[filled:filled + take] = w[:take]
        filled += take
    return out


def decimate(meas: MeasurementSequence, p: int, count: int) -> MeasurementSequence:
    """Subsample a raw sequence: n_k = m_{p*k} for k = 0, ..., count-1."""
    if meas.stride != 1:
        raise ValueError("decimate expects a raw (stride 1) sequence")
    if p < 1 or count < 1:
        raise ValueError("stride and count must be positive")
    if p * (count - 1) > len(meas) - 1:
        raise ValueError("insufficient measurements for requested decimation")
    return MeasurementSequence(meas.values[::p][:count].copy(), stride=p, origin=meas.origin)


def scale_map(params: PronyParameters, p: int) -> PronyParameters:
    """Parameter rescaling equivalent to decimation by stride p.

    Nodes are raised to the p-th power and the degree-l amplitude picks up a
    factor p^l, so that the decimated moments of `params` coincide with the
    raw moments of the rescaled point.
    """
    if p < 1:
        raise ValueError("stride must be a positive integer")
    w = params.nodes ** p
    for i in range(len(w)):
        for j in range(i + 1, len(w)):
            if abs(w[i] - w[j]) <= NODE_COLLISION_TOL:
                raise SolveFailure("decimation aliased two nodes together")
    scaled = tuple(
        c * np.power(float(p), np.arange(len(c)))
        for c in params.coefficients
    )
    return PronyParameters(w, scaled, params.multiplicities)


def separation(params: PronyParameters) -> SeparationReport:
    """Wrapped angular distances between node arguments.

    For a single node the conventional value pi (the maximal circular
    distance) is reported for both the minimum and the diameter.
    """
    s = params.multiplicities.num_nodes
    if s == 1:
        return SeparationReport(per_node=np.array([np.pi]), minimum=np.pi, diameter=np.pi)
    angles = np.angle(params.nodes)
    diff = np.abs(angles[:, None] - angles[None, :]) % (2.0 * np.pi)
    dist = np.minimum(diff, 2.0 * np.pi - diff)
    np.fill_diagonal(dist, np.inf)
    per_node = dist.min(axis=1)
    finite = dist[np.isfinite(dist)]
    return SeparationReport(
        per_node=per_node,
        minimum=float(per_node.min()),
        diameter=float(finite.max()),
    )


def choose_decimation(N: int, R: int) -> int:
    """Largest stride p such that R strided samples fit into N measurements."""
    if N < R:
        raise ValueError("not enough measurements")
    return N // R
