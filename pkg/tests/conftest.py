import pytest

from pairedsurv import build_sample, generate_pairs, scenario_spec

# Worked five-pair dataset: observed times / event flags in (i1, i2) order,
# all first positions treated.
FIVE_Y = [8.3, 1.8, 4.8, 9.8, 4.5, 11.4, 5.8, 9.4, 5.9, 1.3]
FIVE_E = [1, 1, 1, 1, 1, 0, 0, 1, 1, 1]


def five_pair_records():
    recs = []
    for i in range(5):
        recs.append((f"p{i + 1}", 1, True, FIVE_Y[2 * i], bool(FIVE_E[2 * i])))
        recs.append((f"p{i + 1}", 2, False, FIVE_Y[2 * i + 1], bool(FIVE_E[2 * i + 1])))
    return recs


@pytest.fixture
def five_pairs():
    return build_sample(five_pair_records())


def random_units(rng, n=None, event_prob=0.7, round_digits=None):
    """Censored sample with optional tied times."""
    if n is None:
        n = int(rng.integers(2, 120))
    t = rng.exponential(5.0, n)
    if round_digits is None:
        round_digits = int(rng.integers(0, 3))
    t = t.round(round_digits)
    e = rng.random(n) < event_prob
    return t, e


def simulated_sample(n_pairs=100, scenario="ph", seed=0, censoring_form="covariate_dependent"):
    return generate_pairs(n_pairs, scenario_spec(scenario, censoring_form=censoring_form), seed)
