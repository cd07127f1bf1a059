import threading

import pytest

from core import ValidationError
from workers import THREADS_ENV, run_parallel, thread_limit


def test_thread_limit_sources(monkeypatch):
    monkeypatch.delenv(THREADS_ENV, raising=False)
    assert thread_limit(3) == 3
    assert thread_limit() >= 1
    monkeypatch.setenv(THREADS_ENV, "2")
    assert thread_limit() == 2
    monkeypatch.setenv(THREADS_ENV, "many")
    with pytest.raises(ValidationError):
        thread_limit()
    with pytest.raises(ValidationError):
        thread_limit(0)


def test_results_keep_submission_order():
    assert run_parallel(lambda x: x * x, range(20), threads=4) == [x * x for x in range(20)]
    assert run_parallel(lambda x: x, [], threads=4) == []


def test_single_worker_runs_inline():
    seen = run_parallel(lambda _: threading.current_thread().name, range(3), threads=1)
    assert set(seen) == {threading.current_thread().name}
