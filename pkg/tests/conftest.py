import pytest

from fpclab import generate_population, ill_conditioned_spec, pop_a_spec
from fpclab.population import PopulationSpec


@pytest.fixture(scope="session")
def pop1234():
    # cycling lo..hi with N equal to the support size yields exactly [1,2,3,4]
    return generate_population(
        PopulationSpec(kind="discrete_uniform", size_N=4, params={"lo": 1, "hi": 4}, seed=0)
    )


@pytest.fixture(scope="session")
def pop_a_10k():
    return generate_population(pop_a_spec(size_N=10_000))


@pytest.fixture(scope="session")
def ill_2k():
    return generate_population(ill_conditioned_spec(size_N=2_000))


@pytest.fixture(scope="session")
def constant_pop():
    return generate_population(
        PopulationSpec(kind="discrete_uniform", size_N=64, params={"lo": 5, "hi": 5}, seed=0)
    )
