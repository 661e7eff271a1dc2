"""Shared fixtures: the four reference documents and store builders."""

from __future__ import annotations

from pathlib import Path

import pytest

from geomedia import MediaStore, parse_document

FIXTURES = Path(__file__).parent / "fixtures"

# Cross-checked constants used throughout the suite: the integer timeline
# and the ISO datetimes of the reference listings denote the same instants.
T0 = 1533128461000  # 2018-08-01T13:01:01Z
T1 = 1533128462000
T2 = 1533128463000


def fixture_bytes(name: str) -> bytes:
    return (FIXTURES / name).read_bytes()


@pytest.fixture(scope="session")
def moving_point_doc():
    return parse_document(fixture_bytes("moving_point.json"))


@pytest.fixture(scope="session")
def moving_double_doc():
    return parse_document(fixture_bytes("moving_double.json"))


@pytest.fixture(scope="session")
def stphoto_doc():
    return parse_document(fixture_bytes("stphoto.json"))


@pytest.fixture(scope="session")
def moving_video_doc():
    return parse_document(fixture_bytes("moving_video.json"))


@pytest.fixture
def store(tmp_path):
    return MediaStore(tmp_path / "store")
