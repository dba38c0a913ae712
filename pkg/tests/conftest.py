import numpy as np
import pytest

from rankopt.dataset import IndicatorMatrix, embedded_fixture_2014

# Integer weight vectors behind the worked ranking examples, in dimension
# order Housing..Work-Life Balance.
GERMANY_WEIGHTS = [0, 2, 1, 0, 3, 2, 0, 0, 0, 5, 2]
POLAND_WEIGHTS = [0, 0, 0, 0, 2, 0, 0, 0, 0, 4, 0]
SPAIN_WEIGHTS = [0, 0, 0, 0, 0, 0, 0, 5, 0, 0, 4]


@pytest.fixture(scope="session")
def fixture_2014() -> IndicatorMatrix:
    return embedded_fixture_2014()


def random_instance(seed: int, max_entities: int = 8, max_dims: int = 5,
                    max_cap: int = 3) -> tuple[IndicatorMatrix, int, int]:
    """Seeded random dataset plus a target entity and integer weight cap."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, max_entities + 1))
    q = int(rng.integers(2, max_dims + 1))
    cap = int(rng.integers(1, max_cap + 1))
    data = IndicatorMatrix(
        tuple(f"d{j + 1}" for j in range(q)),
        tuple(f"e{i + 1}" for i in range(n)),
        rng.random((q, n)),
    )
    target = int(rng.integers(n))
    return data, target, cap


def two_entity_instance(deltas: list[float]) -> IndicatorMatrix:
    """Two entities whose indicator gap (target minus rival) is ``deltas``."""
    deltas = np.asarray(deltas, dtype=float)
    base = np.full_like(deltas, 0.5)
    values = np.stack([base + deltas / 2, base - deltas / 2], axis=1)
    dims = tuple(f"d{j + 1}" for j in range(len(deltas)))
    return IndicatorMatrix(dims, ("target", "rival"), values)
