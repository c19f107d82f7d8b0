from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from roboto.catalog import BUILTIN_FILES, builtin_corpus_text
from roboto.parser import parse_document

CORPUS_NAMES = list(BUILTIN_FILES) + ["towerOfHanoiCorrected.roboto"]


@pytest.fixture(scope="session")
def corpus_texts() -> dict[str, str]:
    return {name: builtin_corpus_text(name) for name in CORPUS_NAMES}


@pytest.fixture(scope="session")
def corpus_docs(corpus_texts):
    return {name: parse_document(text, name) for name, text in corpus_texts.items()}


@pytest.fixture(scope="session")
def hanoi_doc(corpus_docs):
    return corpus_docs["towerOfHanoi.roboto"]


@pytest.fixture(scope="session")
def hanoi_corrected_doc(corpus_docs):
    return corpus_docs["towerOfHanoiCorrected.roboto"]


@pytest.fixture(scope="session")
def tdd_doc(corpus_docs):
    return corpus_docs["testDrivenDevelopment.roboto"]


@pytest.fixture(scope="session")
def debug_doc(corpus_docs):
    return corpus_docs["debug.roboto"]


@pytest.fixture(scope="session")
def rename_doc(corpus_docs):
    return corpus_docs["renameVariable.roboto"]
