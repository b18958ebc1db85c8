# tests/conftest.py
import zlib

import numpy as np
import pytest
from fastapi.testclient import TestClient

from backend.main import app


@pytest.fixture
def client():
    with TestClient(app) as c:
        yield c


@pytest.fixture
def rng(request):
    """Generator seeded from the test name, so a failure reproduces on rerun."""
    return np.random.default_rng(zlib.crc32(request.node.name.encode()))
