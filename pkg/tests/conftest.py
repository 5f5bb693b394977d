import numpy as np
import pytest

from pronydh.model import MultiplicityVector, PronyParameters


def random_parameters(
    rng: np.random.Generator,
    parts: tuple[int, ...],
    min_separation: float = 0.3,
) -> PronyParameters:
    """Random unit-circle parameter point with a guaranteed node separation."""
    D = MultiplicityVector(parts)
    s = D.num_nodes
    while True:
        angles = np.sort(rng.uniform(0.0, 2.0 * np.pi, size=s))
        gaps = np.diff(np.concatenate([angles, [angles[0] + 2.0 * np.pi]]))
        if s == 1 or gaps.min() >= min_separation:
            break
    nodes = np.exp(1j * angles)
    coeffs = tuple(
        rng.uniform(0.5, 1.5, size=dj) * np.exp(1j * rng.uniform(0, 2 * np.pi, size=dj))
        for dj in D.parts
    )
    return PronyParameters(nodes, coeffs, D)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
