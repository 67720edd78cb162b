import pytest

from signrange import SequenceSpec, SequenceWindow


def interleave(*generators, pairs):
    """Window alternating term generators: g1(1), g2(1), ..., g1(2), ..."""
    values = []
    for k in range(1, pairs + 1):
        for gen in generators:
            values.append(gen(k))
    return SequenceWindow(values)


@pytest.fixture(scope="session")
def alt_log_1k():
    return SequenceSpec.alternating_log().window(1000)


@pytest.fixture(scope="session")
def two_ratio_windows():
    """Exact-direction harmonic windows: (2+i)/n and (1+3i)/n."""
    win_a = SequenceSpec.linear_ratio(2.0).window(1 << 17)
    win_b = SequenceSpec.linear_ratio(1.0 / 3.0, amplitude=3.0).window(1 << 17)
    return win_a, win_b


def random_unit_ball(rng, n):
    return SequenceWindow(rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n))
