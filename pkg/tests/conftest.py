"""Shared fixtures: parsed sample files and small helper builders."""

from __future__ import annotations

import pathlib

import pytest

from hypergames.logic import parse_hyperltl
from hypergames.model import parse_ks

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def read_fixture(name: str) -> str:
    return (FIXTURES / name).read_text()


@pytest.fixture(scope="session")
def fig1():
    return parse_ks(read_fixture("fig1.ks"))


@pytest.fixture(scope="session")
def ex2():
    return parse_hyperltl(read_fixture("ex2.hltl"))


@pytest.fixture(scope="session")
def ex4():
    return parse_hyperltl(read_fixture("ex4.hltl"))


@pytest.fixture(scope="session")
def ex6():
    return parse_hyperltl(read_fixture("ex6.hltl"))
