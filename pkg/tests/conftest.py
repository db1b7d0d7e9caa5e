from fractions import Fraction

import pytest

from app.schema import DirichletParams


# hotel-style five-level behavior used throughout the bound tables
TABLE_ALPHA = "4/35,25/35,3/35,2/35,1/35"


@pytest.fixture
def table_params() -> DirichletParams:
    return DirichletParams.from_fractions([Fraction(k, 35) for k in (4, 25, 3, 2, 1)])


@pytest.fixture
def close_params() -> DirichletParams:
    """Two levels separated by 0.005: the majority is hard to recover."""
    return DirichletParams(alpha=(0.5025, 0.4975))
