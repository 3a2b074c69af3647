"""Shared fixtures: quote sets and calibrated smiles reused across tests."""

from __future__ import annotations

import pytest

from fxsmile import load_fixture


@pytest.fixture(scope="session")
def audnzd():
    return load_fixture("audnzd-7d")


@pytest.fixture(scope="session")
def usdaed_9m():
    return load_fixture("usdaed-9m")


@pytest.fixture(scope="session")
def eurczk():
    return load_fixture("eurczk-32d")


@pytest.fixture(scope="session")
def eurtry_1y():
    return load_fixture("eurtry-1y")


@pytest.fixture(scope="session")
def manufactured():
    return load_fixture("manufactured-1y")


@pytest.fixture(scope="session")
def eurusd_1m_dense():
    return load_fixture("eurusd-1m-dense")


@pytest.fixture(scope="session")
def eurusd_1y_dense():
    return load_fixture("eurusd-1y-dense")
