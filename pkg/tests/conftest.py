from __future__ import annotations

import pytest

from childdetect.classify import _backend
from childdetect.session_data import TouchEvent
from childdetect.synthgen import GenConfig, generate_dataset, load_gen_config


def ev(t, phase, x=0.0, y=0.0, p=0.5, s=0.2, app_id=None):
    return TouchEvent(t, phase, float(x), float(y), p, s, app_id)


@pytest.fixture(autouse=True)
def _restore_backend():
    before = _backend.current()
    yield
    _backend.use(before)


@pytest.fixture(scope="session")
def small_config() -> GenConfig:
    doc = load_gen_config().to_dict()
    doc.update(sessions_per_class=6, gestures_per_session=24, duration_s=30.0, seed=11)
    return GenConfig.from_dict(doc)


@pytest.fixture(scope="session")
def small_sessions(small_config):
    sessions, _ = generate_dataset(small_config)
    return sessions
