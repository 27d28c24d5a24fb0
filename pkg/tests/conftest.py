import json
from pathlib import Path

import pytest

from chartmorph.corpus import FIXTURES

ROOT = Path(__file__).resolve().parent.parent
FIXTURE_DIR = ROOT / "fixtures"


def expected(name):
    return json.loads((FIXTURE_DIR / (name + ".expected.json")).read_text())


@pytest.fixture(scope="session")
def fixture_dir():
    return FIXTURE_DIR


@pytest.fixture(scope="session")
def corpus_results():
    """Full pipeline over every fixture document, run once per session."""
    from chartmorph.pipeline import PipelineConfig, run_pipeline
    return {name: run_pipeline(str(FIXTURE_DIR / (name + ".json")), PipelineConfig()) for name in FIXTURES}
