import numpy as np
import pytest

from jbtriple_kit.algebra.factors import commutative_factor, direct_sum, matrix_factor, parse_factor

ACCEPTANCE_FACTORS = [
    "matrix:2x2",
    "matrix:2x3",
    "matrix:3x3",
    "commutative:2",
    "commutative:4",
    "sum:[matrix:2x2,commutative:1]",
]


@pytest.fixture(params=ACCEPTANCE_FACTORS)
def factor(request):
    return parse_factor(request.param)


@pytest.fixture
def m22():
    return matrix_factor(2, 2)


@pytest.fixture
def m23():
    return matrix_factor(2, 3)


@pytest.fixture
def c2():
    return commutative_factor(2)


@pytest.fixture
def mixed():
    return direct_sum([matrix_factor(2, 2), commutative_factor(1)])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def kit_env(tmp_path, monkeypatch):
    """Output directory and run store under tmp_path, shipped settings otherwise."""
    out = tmp_path / "out"
    monkeypatch.setenv("JBTRIPLE_OUTPUT_DIR", str(out))
    monkeypatch.setenv("JBTRIPLE_STORE_URI", f"sqlite:///{tmp_path / 'runs.db'}")
    monkeypatch.delenv("JBTRIPLE_CONFIG", raising=False)
    yield out
    from jbtriple_kit.database import db
    db.dispose_engine()
