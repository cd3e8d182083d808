import pytest

from entclone.covariant import build_t_operators


@pytest.fixture(scope="session")
def t_ops():
    """Shared commutant operators so each test module skips the twirl cost."""
    return build_t_operators()
