import csv
import io

import pytest

from app import create_app
from app.models import ProblemParams


@pytest.fixture()
def app():
    return create_app("testing")


@pytest.fixture()
def client(app):
    return app.test_client()


@pytest.fixture()
def runner(app):
    return app.test_cli_runner()


@pytest.fixture()
def params():
    """x0 = y0 = 1, g = 10, q = 12, b = 30, z_d = 40, unit weights."""
    return ProblemParams()


def read_csv(text: str) -> list[dict]:
    body = [line for line in text.splitlines() if line and not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


@pytest.fixture()
def parse_csv():
    return read_csv
