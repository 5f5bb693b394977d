"""Square multivariate polynomial systems solved by homotopy continuation.

Small dense systems (a handful of variables, total degrees below ten) are
solved by tracking every path of a total-degree homotopy

    H(u, t) = gamma * t * g(u) + (1 - t) * f(u),        t: 1 -> 0,

from the roots-of-unity start system g_k = u_k^{deg f_k} - 1 with a random
unimodular gamma, using tangent prediction, Newton correction and adaptive
step control.  Finite endpoints are Newton-refined, deduplicated and sorted
so a fixed seed yields a bit-identical solution list.
"""

from __future__ import annotations

import cmath
import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import SolveFailure

__all__ = [
    "MultiPoly",
    "SquareSystem",
    "TrackOptions",
    "PathResult",
    "SolutionSet",
    "total_degree_start",
    "track_path",
    "solve_system",
    "newton_refine",
]


class MultiPoly:
    """Sparse multivariate polynomial: exponent vector -> complex coefficient.

    Zero coefficients are dropped on construction.  Instances are treated as
    immutable; evaluation uses a precompiled exponent matrix.
    """

    __slots__ = ("nvars", "terms", "_expo", "_coef")

    def __init__(self, nvars: int, terms: dict):
        self.nvars = int(nvars)
        clean = {}
        for expo, c in terms.items():
            expo = tuple(int(e) for e in expo)
            if len(expo) != self.nvars:
                raise ValueError("exponent vector length does not match variable count")
            if any(e < 0 for e in expo):
                raise ValueError("exponents must be nonnegative")
            c = complex(c)
            if c != 0:
                clean[expo] = clean.get(expo, 0) + c
        clean = {e: c for e, c in clean.items() if c != 0}
        self.terms = clean
        keys = sorted(clean)
        self._expo = np.array(keys, dtype=np.int64).reshape(len(keys), self.nvars)
        self._coef = np.array([clean[k] for k in keys], dtype=complex)

    def evaluate(self, point) -> complex:
        """Value at a complex point (integer-power monomials)."""
        point = np.asarray(point, dtype=complex).reshape(-1)
        if point.shape[0] != self.nvars:
            raise ValueError("point length does not match variable count")
        if not self.terms:
            return 0j
        monomials = np.prod(point[None, :] ** self._expo, axis=1)
        return complex(self._coef @ monomials)

    def differentiate(self, var: int) -> "MultiPoly":
        """Formal partial derivative in variable `var`."""
        if not 0 <= var < self.nvars:
            raise ValueError("variable index out of range")
        out = {}
        for expo, c in self.terms.items():
            e = expo[var]
            if e == 0:
                continue
            new = list(expo)
            new[var] = e - 1
            out[tuple(new)] = c * e
        return MultiPoly(self.nvars, out)

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def coefficient_norm(self) -> float:
        """Largest coefficient magnitude (0 for the zero polynomial)."""
        return float(np.max(np.abs(self._coef))) if self.terms else 0.0

    def scale(self, factor: complex) -> "MultiPoly":
        return MultiPoly(self.nvars, {e: c * factor for e, c in self.terms.items()})

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        if self.nvars != other.nvars:
            raise ValueError("variable counts differ")
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return MultiPoly(self.nvars, out)

    def __eq__(self, other) -> bool:
        return isinstance(other, MultiPoly) and self.nvars == other.nvars and self.terms == other.terms

    def __repr__(self) -> str:
        return f"MultiPoly(nvars={self.nvars}, terms={len(self.terms)})"


@dataclass(frozen=True)
class SquareSystem:
    """n polynomial equations in n variables."""

    equations: tuple[MultiPoly, ...]

    def __post_init__(self):
        eqs = tuple(self.equations)
        object.__setattr__(self, "equations", eqs)
        if not eqs:
            raise ValueError("system has no equations")
        n = eqs[0].nvars
        if any(eq.nvars != n for eq in eqs):
            raise ValueError("equations disagree on variable count")
        if len(eqs) != n:
            raise ValueError("equation count must equal variable count")

    @property
    def nvars(self) -> int:
        return self.equations[0].nvars

    def coefficient_norm(self) -> float:
        return max(eq.coefficient_norm() for eq in self.equations)


@dataclass(frozen=True)
class TrackOptions:
    """Step control and tolerances for path tracking."""

    initial_step: float = 0.05
    min_step: float = 1e-7
    max_step: float = 0.1
    corrector_tol: float = 1e-10
    max_corrector_iters: int = 4
    max_steps: int = 10_000
    divergence_threshold: float = 1e8
    endpoint_tol: float = 1e-12
    dedup_tol: float = 1e-8
    gamma: complex | None = None
    seed: int = 0

    def __post_init__(self):
        if not (0 < self.min_step <= self.initial_step <= self.max_step):
            raise ValueError("require 0 < min_step <= initial_step <= max_step")
        for name in ("corrector_tol", "divergence_threshold", "endpoint_tol", "dedup_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def resolve_gamma(self) -> complex:
        """Explicit gamma if set, else a seeded uniform draw from the unit circle."""
        if self.gamma is not None:
            g = complex(self.gamma)
            if abs(abs(g) - 1.0) > 1e-9:
                raise ValueError("gamma must have modulus 1")
            return g
        angle = np.random.default_rng(self.seed).uniform(0.0, 2.0 * np.pi)
        return cmath.exp(1j * angle)


@dataclass(frozen=True)
class PathResult:
    """Outcome of tracking one start point to t = 0."""

    status: str  # "converged" | "diverged-to-infinity" | "tracking-failed"
    endpoint: np.ndarray | None
    residual: float
    steps: int


@dataclass(frozen=True)
class SolutionSet:
    """Deduplicated finite endpoints with per-solution diagnostics."""

    solutions: tuple[np.ndarray, ...]
    residuals: tuple[float, ...]
    conditions: tuple[float, ...]
    n_paths: int
    n_converged: int
    n_diverged: int
    n_failed: int

    def __len__(self) -> int:
        return len(self.solutions)


class _CompiledSystem:
    """Batched system-plus-Jacobian evaluator over one stacked term table.

    All equations and their partials share a single exponent matrix, so one
    evaluation costs a handful of vectorized operations regardless of the
    term count.
    """

    def __init__(self, system: SquareSystem):
        self.n = n = system.nvars
        polys = list(system.equations)
        for eq in system.equations:
            polys.extend(eq.differentiate(j) for j in range(n))
        expo_blocks, coef_blocks, starts = [], [], []
        pos = 0
        for p in polys:
            starts.append(pos)
            if p.terms:
                expo_blocks.append(p._expo)
                coef_blocks.append(p._coef)
                pos += len(p._coef)
            else:
                expo_blocks.append(np.zeros((1, n), dtype=np.int64))
                coef_blocks.append(np.zeros(1, dtype=complex))
                pos += 1
        self._expo = np.vstack(expo_blocks)
        self._coef = np.concatenate(coef_blocks)
        self._starts = np.array(starts, dtype=np.intp)

    def eval_all(self, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(equation values, Jacobian matrix) at a point, in one pass."""
        mono = np.prod(u[None, :] ** self._expo, axis=1)
        sums = np.add.reduceat(self._coef * mono, self._starts)
        n = self.n
        return sums[:n], sums[n:].reshape(n, n)

    def value(self, u: np.ndarray) -> np.ndarray:
        return self.eval_all(u)[0]

    def jacobian(self, u: np.ndarray) -> np.ndarray:
        return self.eval_all(u)[1]


def total_degree_start(system: SquareSystem, gamma: complex = 1.0):
    """Roots-of-unity start system matching the target's total degrees.

    Returns (start system with g_k = u_k^{deg_k} - 1, all start points).
    The number of start points is the product of the equation degrees.
    """
    degrees = [eq.total_degree() for eq in system.equations]
    if any(d < 1 for d in degrees):
        raise SolveFailure("system is not square-solvable")
    n = system.nvars
    eqs = []
    for k, d in enumerate(degrees):
        expo = [0] * n
        expo[k] = d
        eqs.append(MultiPoly(n, {tuple(expo): 1.0, (0,) * n: -1.0}))
    roots = [
        [cmath.exp(2j * np.pi * t / d) for t in range(d)]
        for d in degrees
    ]
    points = [np.array(combo, dtype=complex) for combo in itertools.product(*roots)]
    return SquareSystem(tuple(eqs)), points


def track_path(
    target: SquareSystem,
    start: SquareSystem,
    start_point,
    opts: TrackOptions = TrackOptions(),
) -> PathResult:
    """Track one homotopy path from a start-system root down to the target."""
    return _track(
        _CompiledSystem(target),
        _CompiledSystem(start),
        np.asarray(start_point, dtype=complex).reshape(-1),
        opts,
        opts.resolve_gamma(),
        target.coefficient_norm(),
    )


def _track(
    f: _CompiledSystem,
    g: _CompiledSystem,
    u: np.ndarray,
    opts: TrackOptions,
    gamma: complex,
    coeff_norm: float,
) -> PathResult:
    t = 1.0
    h = opts.initial_step
    steps = 0
    successes = 0
    residual_scale = 1.0 + coeff_norm

    def classify_failure(u):
        if np.max(np.abs(u)) > 1e4:
            return PathResult("diverged-to-infinity", None, float("inf"), steps)
        return PathResult("tracking-failed", None, float("inf"), steps)

    while t > 0.0:
        if steps >= opts.max_steps:
            return classify_failure(u)
        steps += 1
        h_eff = min(h, t)
        t_next = t - h_eff
        # Tangent predictor: du/dt = -H_u^{-1} H_t, H_t = gamma*g - f.
        fv, fj = f.eval_all(u)
        gv, gj = g.eval_all(u)
        try:
            du = np.linalg.solve(gamma * t * gj + (1.0 - t) * fj, -(gamma * gv - fv))
        except np.linalg.LinAlgError:
            du = np.zeros_like(u)
        u_pred = u - h_eff * du

        corrected, u_new = _newton_correct(
            f,
            g,
            gamma,
            t_next,
            u_pred,
            opts.corrector_tol,
            opts.max_corrector_iters,
            opts.divergence_threshold,
        )
        if corrected:
            u, t = u_new, t_next
            if np.max(np.abs(u)) > opts.divergence_threshold:
                return PathResult("diverged-to-infinity", None, float("inf"), steps)
            successes += 1
            if successes >= 4:
                h = min(h * 1.5, opts.max_step)
                successes = 0
        else:
            successes = 0
            h *= 0.5
            if h < opts.min_step:
                return classify_failure(u)

    # Endpoint refinement on the target system itself.
    tol_abs = opts.endpoint_tol * residual_scale
    u_ref, res = _newton_polish(f, u, tol_abs, max_iters=30)
    if res <= tol_abs and np.max(np.abs(u_ref)) <= opts.divergence_threshold:
        return PathResult("converged", u_ref, res, steps)
    return classify_failure(u_ref)


def _newton_correct(f, g, gamma, t, u, tol, max_iters, big):
    for _ in range(max_iters):
        fv, fj = f.eval_all(u)
        gv, gj = g.eval_all(u)
        try:
            delta = np.linalg.solve(
                gamma * t * gj + (1.0 - t) * fj, -(gamma * t * gv + (1.0 - t) * fv)
            )
        except np.linalg.LinAlgError:
            return False, u
        u = u + delta
        norm_u = np.max(np.abs(u))
        if not np.isfinite(norm_u) or norm_u > big:
            return False, u
        if np.max(np.abs(delta)) <= tol * (1.0 + norm_u):
            return True, u
    return False, u


def _newton_polish(f: _CompiledSystem, u: np.ndarray, tol: float, max_iters: int):
    """Plain Newton on f; returns the best iterate seen and its residual."""
    best_u = u
    best_res = float(np.max(np.abs(f.value(u)))) if np.all(np.isfinite(u)) else float("inf")
    for _ in range(max_iters):
        if best_res <= tol:
            break
        fv, fj = f.eval_all(u)
        try:
            delta = np.linalg.solve(fj, -fv)
        except np.linalg.LinAlgError:
            break
        u = u + delta
        if not np.all(np.isfinite(u)):
            break
        res = float(np.max(np.abs(f.value(u))))
        if res < best_res:
            best_u, best_res = u, res
        elif res > 10 * best_res:
            break
    return best_u, best_res


def solve_system(system: SquareSystem, opts: TrackOptions = TrackOptions()) -> SolutionSet:
    """Track every total-degree path and collect the finite endpoints.

    Converged endpoints are deduplicated (closest pair distance above the
    dedup tolerance, keeping the lowest residual) and sorted by the real
    and imaginary parts of their coordinates, so the output order is a
    deterministic function of the system, options and seed.
    """
    gamma = opts.resolve_gamma()
    start, points = total_degree_start(system)
    f = _CompiledSystem(system)
    g = _CompiledSystem(start)
    coeff_norm = system.coefficient_norm()

    results = [_track(f, g, p, opts, gamma, coeff_norm) for p in points]
    n_converged = sum(r.status == "converged" for r in results)
    n_diverged = sum(r.status == "diverged-to-infinity" for r in results)
    n_failed = sum(r.status == "tracking-failed" for r in results)
    if n_converged == 0:
        raise SolveFailure("no solutions found")

    finite = sorted(
        (r for r in results if r.status == "converged"),
        key=lambda r: r.residual,
    )
    kept: list[PathResult] = []
    for r in finite:
        if all(np.linalg.norm(r.endpoint - k.endpoint) > opts.dedup_tol for k in kept):
            kept.append(r)
    kept.sort(key=lambda r: tuple((z.real, z.imag) for z in r.endpoint))

    conditions = []
    for r in kept:
        J = f.jacobian(r.endpoint)
        try:
            conditions.append(float(np.linalg.cond(J)))
        except np.linalg.LinAlgError:
            conditions.append(float("inf"))

    return SolutionSet(
        solutions=tuple(r.endpoint for r in kept),
        residuals=tuple(r.residual for r in kept),
        conditions=tuple(conditions),
        n_paths=len(points),
        n_converged=n_converged,
        n_diverged=n_diverged,
        n_failed=n_failed,
    )


def newton_refine(system: SquareSystem, point, tol: float, max_iters: int = 25):
    """Newton-iterate `point` on the system until the residual drops below tol.

    Returns (refined point, residual).  Raises SolveFailure when the Jacobian
    at the current iterate is numerically singular (condition above 1e14).
    """
    f = _CompiledSystem(system)
    u = np.asarray(point, dtype=complex).reshape(-1)
    fv, fj = f.eval_all(u)
    if _condition_estimate(fj) > 1e14:
        raise SolveFailure("refinement at singular point")
    best_u, best_res = u, float(np.max(np.abs(fv)))
    for _ in range(max_iters):
        if best_res <= tol:
            break
        fv, fj = f.eval_all(u)
        if _condition_estimate(fj) > 1e14:
            raise SolveFailure("refinement at singular point")
        u = u + np.linalg.solve(fj, -fv)
        res = float(np.max(np.abs(f.value(u))))
        if res < best_res:
            best_u, best_res = u, res
    return best_u, best_res


def _condition_estimate(J: np.ndarray) -> float:
    try:
        sv = np.linalg.svd(J, compute_uv=False)
    except np.linalg.LinAlgError:
        return float("inf")
    if sv[-1] == 0:
        return float("inf")
    return float(sv[0] / sv[-1])
