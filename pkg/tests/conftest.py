import copy
import os
import sys

import hypothesis
import pytest

from safencrypt.config_registry import (
    ERRORS_FILE,
    INTEROP_FILE,
    KDF_FILE,
    SYMMETRIC_FILE,
    default_registry,
    load_registry,
    shipped_documents,
)

hypothesis.settings.register_profile("ci", max_examples=200, deadline=None)
hypothesis.settings.register_profile("dev", max_examples=25, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "dev"))


@pytest.fixture(scope="session")
def registry():
    return default_registry()


@pytest.fixture
def docs():
    return copy.deepcopy(shipped_documents())


def build(docs, **kwargs):
    return load_registry(docs[SYMMETRIC_FILE], docs[KDF_FILE], docs[INTEROP_FILE], docs[ERRORS_FILE], **kwargs)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
