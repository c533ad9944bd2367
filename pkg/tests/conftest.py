from pathlib import Path

import pytest

from papeo.ingest import parse_layout, parse_transcript
from papeo.model import PapeoDoc, VideoMeta

REPO_ROOT = Path(__file__).resolve().parent.parent
SAMPLE_DIR = REPO_ROOT / "data" / "sample"


@pytest.fixture(scope="session")
def sample_dir() -> Path:
    return SAMPLE_DIR


@pytest.fixture(scope="session")
def sample_paper():
    return parse_layout((SAMPLE_DIR / "layout.json").read_bytes())


@pytest.fixture(scope="session")
def sample_lines():
    return parse_transcript((SAMPLE_DIR / "talk.vtt").read_bytes(), "vtt")


@pytest.fixture()
def sample_doc(sample_paper, sample_lines) -> PapeoDoc:
    return PapeoDoc(
        paper=sample_paper,
        video=VideoMeta(uri="file://talk.mp4", duration_s=62.0),
        transcript=tuple(sample_lines),
    )
