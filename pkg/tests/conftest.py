from __future__ import annotations

import json
from pathlib import Path

import pytest

from draftguide import regexengine
from draftguide import rules as rules_mod

REPO_ROOT = Path(__file__).resolve().parent.parent
APPENDIX_DIR = REPO_ROOT / "examples" / "appendix_b"
CORPUS_DIR = APPENDIX_DIR / "corpus"

RULE_DOCUMENTS = sorted(APPENDIX_DIR.glob("*.json"))


def load_document(path: Path) -> dict:
    return json.loads(path.read_text(encoding="utf-8"))


def load_ruleset(path: Path) -> rules_mod.CompiledRuleSet:
    return rules_mod.compile_ruleset(load_document(path))


def load_corpus(path: Path) -> list[dict]:
    return [
        json.loads(line)
        for line in path.read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]


@pytest.fixture(scope="session", autouse=True)
def warm_regex_engine():
    # Jitted DFA walker compiles on first use; do it once up front so
    # timing-sensitive tests see steady-state latency.
    regexengine.warm_up()


# -- acceptance criterion reporting ------------------------------------------

_ACCEPTANCE_RESULTS: list[tuple[str, str]] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    criterion = getattr(item.function, "_criterion", None) if hasattr(item, "function") else None
    if criterion and report.when == "call":
        _ACCEPTANCE_RESULTS.append((criterion, "PASS" if report.passed else "FAIL"))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for criterion, verdict in _ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"[{verdict}] {criterion}")


@pytest.fixture()
def ask_ruleset() -> rules_mod.CompiledRuleSet:
    return load_ruleset(APPENDIX_DIR / "ask.json")
