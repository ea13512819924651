import pytest

from config.settings import Config, parse_port_range


def test_environment_is_read_per_instance(monkeypatch):
    monkeypatch.setenv("QSF_PORT_RANGE", "9100-9109")
    monkeypatch.setenv("QSF_DRAIN_TIMEOUT", "1.5")
    first = Config()
    assert first.PORT_RANGE == (9100, 9109)
    assert first.DRAIN_TIMEOUT == 1.5

    monkeypatch.setenv("QSF_PORT_RANGE", "9200-9200")
    first.FETCH_TIMEOUT = 0.5
    second = Config()
    assert second.PORT_RANGE == (9200, 9200)
    assert second.FETCH_TIMEOUT != 0.5
    assert first.PORT_RANGE == (9100, 9109)


def test_empty_variable_falls_back_to_default(monkeypatch):
    monkeypatch.setenv("QSF_PORT", "")
    assert Config().PORT == 9000


@pytest.mark.parametrize("text", ["8000", "a-b", "9000-8000", "0-10", "1-70000"])
def test_invalid_port_range(text):
    with pytest.raises(ValueError):
        parse_port_range(text)
