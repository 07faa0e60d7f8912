from __future__ import annotations

import json

import pytest

from situ_talker.service import SessionStore
from situ_talker.world import WorldStore, bundled_assets_root


@pytest.fixture(scope="session")
def assets_root():
    return bundled_assets_root()


@pytest.fixture(scope="session")
def world_store(assets_root) -> WorldStore:
    return WorldStore(assets_root)


@pytest.fixture(scope="session")
def library(world_store):
    return world_store.world("library")


@pytest.fixture(scope="session")
def restaurant(world_store):
    return world_store.world("restaurant")


@pytest.fixture()
def session_store(world_store) -> SessionStore:
    return SessionStore(world_store)


@pytest.fixture(scope="session")
def corpus(assets_root) -> list[dict]:
    path = assets_root / "corpus" / "corrupted_utterances.json"
    return json.loads(path.read_text(encoding="utf-8"))
