import pytest

from ideaforge.testing import build_sample_bank, sample_topic, synthetic_ideas


@pytest.fixture(scope="session")
def bank(tmp_path_factory):
    """Full 22-entry synthetic catalog, built once per session."""
    root = tmp_path_factory.mktemp("bank")
    return build_sample_bank(root)


@pytest.fixture()
def topic():
    return sample_topic()


@pytest.fixture()
def idea_pool(topic):
    return synthetic_ideas(topic, 8)
