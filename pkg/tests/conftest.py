import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from stylemirror.ingest import normalize  # noqa: E402

SPEECH_LINES = [
    "We will make America proud again, believe me.",
    "We are going to make America great again!",
    "They want to make America weak, folks.",
    "I love this country so much.",
    "We will bring our jobs back home.",
    "Nobody knows the system better than me, believe me.",
    "We are going to win so much, believe me.",
    "The fake news media will not tell you this.",
    "We will build a great wall, believe me.",
    "Our country is in big trouble, folks.",
    "We will make America strong again.",
    "We love our great country, folks.",
]


@pytest.fixture
def speech_corpus():
    return [normalize(line) for line in SPEECH_LINES]


@pytest.fixture
def speech_lines():
    return list(SPEECH_LINES)
