#!/usr/bin/env python3
"""Smoke test for the stallings_py extension module.

Builds the cdylib with cargo if needed, imports it, and drives one example
of every exposed operation. Runs standalone (``python3 python/smoke_test.py``)
or under pytest.
"""

import json
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def _built_cdylib() -> Path:
    """Locate the compiled extension, building it if it is missing."""
    candidates = [
        REPO / "target" / profile / "libstallings_py.so"
        for profile in ("release", "debug")
    ]
    existing = [p for p in candidates if p.exists()]
    if not existing:
        subprocess.run(
            ["cargo", "build", "-p", "stallings-py", "--release"],
            cwd=REPO,
            check=True,
        )
        existing = [p for p in candidates if p.exists()]
    return max(existing, key=lambda p: p.stat().st_mtime)


_IMPORT_DIR = tempfile.mkdtemp(prefix="stallings_py_")
shutil.copy(_built_cdylib(), Path(_IMPORT_DIR) / "stallings_py.so")
sys.path.insert(0, _IMPORT_DIR)

import stallings_py  # noqa: E402


def test_word_operations():
    f2 = stallings_py.FreeGroup(2)
    assert f2.rank == 2
    assert f2.reduce("abBA") == ""
    assert f2.inverse("ab") == "BA"
    assert f2.concat("ab", "Ba") == "aa"
    assert f2.cyclic_reduce("abA") == ("a", "b")
    words = f2.reduced_words(2)
    assert words[0] == "" and len(words) == 1 + 4 + 12
    try:
        f2.reduce("xyz")
    except ValueError:
        pass
    else:
        raise AssertionError("malformed words must raise ValueError")


def test_subgroup_operations():
    f2 = stallings_py.FreeGroup(2)
    h = f2.subgroup(["a", "baB"])
    assert h.rank == 2
    assert h.index is None
    assert h.contains("baB") and not h.contains("b")

    even = f2.subgroup(["aa", "ab", "aB"])
    assert even.index == 2
    assert even.rank == 1 + even.index * (f2.rank - 1)

    meet = h.intersect(even)
    for word in ["aa", "baBA", "ab"]:
        assert meet.contains(word) == (h.contains(word) and even.contains(word))

    conj = h.conjugate("b")  # bHb⁻¹ = ⟨b·a·b⁻¹, b·(bab⁻¹)·b⁻¹⟩
    assert conj.contains("baB") and conj.contains("bbaBB")
    assert conj == f2.subgroup(["baB", "bbaBB"])
    assert not (conj == h)

    core = json.loads(even.core_json())
    assert "edges" in core and "basepoint" in core
    assert even.core_dot().startswith("digraph")


def test_isoperimetry_and_normality():
    f2 = stallings_py.FreeGroup(2)
    h = f2.subgroup(["a", "baB"])

    bound = json.loads(h.phi_json(max_size=12, radius=6))
    assert bound["upper"] == {"num": "1", "den": "2"}
    assert bound["witness_size"] == 2
    assert not bound["truncated"]

    infinite = json.loads(h.certify_json(degree=1, predicate="infinite", radius=1))
    assert infinite["verdict"] == "certified"
    nonamenable = json.loads(h.certify_json(degree=1, predicate="nonamenable", radius=3))
    assert nonamenable["verdict"] == "unknown"

    tight = json.loads(h.threshold_json(degree=1))
    assert tight["met"] is False and tight["consistent"] is True

    even = f2.subgroup(["aa", "ab", "aB"])
    report = json.loads(even.threshold_json(degree=1))
    assert report["met"] is True
    assert report["phi_upper"] == {"num": "0", "den": "1"}
    assert report["certificate"]["verdict"] == "certified"

    f3 = stallings_py.FreeGroup(3)
    factor = f3.subgroup(["a", "b"])
    verdict = json.loads(factor.malnormal_json(4))
    assert verdict == {"certified_radius": 4}


def test_cli_round_trip():
    code, out = stallings_py.run_cli(
        ["subgroup", "rank", "--gens", "a,baB"]
    )
    assert code == 0 and json.loads(out)["rank"] == 2
    code, _ = stallings_py.run_cli(["word", "reduce", "a!"])
    assert code == 2


def main() -> None:
    tests = [
        test_word_operations,
        test_subgroup_operations,
        test_isoperimetry_and_normality,
        test_cli_round_trip,
    ]
    for test in tests:
        test()
        print(f"{test.__name__}: ok")
    print(f"smoke test passed ({stallings_py.__version__})")


if __name__ == "__main__":
    main()
