from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from declink import gateway as gw

REPO_ROOT = Path(__file__).parent.parent
GOLDEN_DIR = REPO_ROOT / "goldens" / "golden_session"
ABLATION_DIR = REPO_ROOT / "goldens" / "ablation_corpus"


@pytest.fixture
def heuristic_gateway() -> gw.Gateway:
    return gw.Gateway(gw.ProviderConfig(mode=gw.MODE_HEURISTIC))


@pytest.fixture
def scripted_gateway(tmp_path) -> gw.Gateway:
    fixtures = tmp_path / "fixtures"
    fixtures.mkdir()
    return gw.Gateway(gw.ProviderConfig(mode=gw.MODE_SCRIPTED, fixtures_dir=fixtures))


@pytest.fixture
def golden_gateway() -> gw.Gateway:
    return gw.Gateway(
        gw.ProviderConfig(mode=gw.MODE_SCRIPTED, fixtures_dir=GOLDEN_DIR / "fixtures", temperature=0.0)
    )
