import threading

import pytest

from qhatm._parallel import THREADS_ENV, pmap, thread_count


def test_override_wins(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "3")
    assert thread_count(5) == 5
    assert thread_count(0) == 1


def test_environment(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "6")
    assert thread_count() == 6


def test_bad_environment(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "many")
    with pytest.raises(ValueError, match=THREADS_ENV):
        thread_count()


def test_default_is_positive(monkeypatch):
    monkeypatch.delenv(THREADS_ENV, raising=False)
    assert thread_count() >= 1


def test_pmap_preserves_order():
    seen = set()

    def work(i):
        seen.add(threading.get_ident())
        return i * i

    assert pmap(work, range(50), threads=8) == [i * i for i in range(50)]
    assert pmap(work, [], threads=4) == []
