import io

import pytest

from protoforge import expr as E
from protoforge.checker import verify
from protoforge.corpus import cases, check_ground_truth, format_table, run_case, run_corpus
from protoforge.sketch import apply_completion

ALL = cases()


def test_corpus_is_bundled():
    names = [c.name for c in ALL]
    assert len(names) == 10
    assert {"2pc_pre", "2pc_prepost", "commit_post", "lock_serv_pre", "lock_serv_prepost",
            "counting_extra"} <= set(names)
    assert all(c.spec_path.is_file() and c.config_path.is_file() for c in ALL)


def test_filters():
    assert [c.name for c in cases("2pc")] == ["2pc_pre", "2pc_prepost"]
    assert [c.name for c in cases("2pc_pre")] == ["2pc_pre"]
    assert [c.name for c in cases("lock")] == ["lock_serv_pre", "lock_serv_prepost"]
    assert cases("nothing") == []
    assert cases("2pc_prepost")[0].family == "2pc"


@pytest.mark.parametrize("case", ALL, ids=lambda c: c.name)
def test_ground_truth_passes_everywhere(case):
    ok, detail = check_ground_truth(case)
    assert ok, detail


@pytest.mark.parametrize("case", [c for c in ALL if any(h.kind == "pre" for h in c.load()[0].holes)
                                  and c.load()[0].temporal], ids=lambda c: c.name)
def test_vacuous_guards_are_rejected(case):
    sk, lc = case.load()
    x = {h.name: (E.FALSE if h.kind == "pre" else lc.ground_truth[h.name]) for h in sk.holes}
    rep = verify(apply_completion(sk, x), lc.instance)
    assert not rep.passed
    assert rep.counterexample.kind in ("deadlock", "stuttering", "liveness")


@pytest.mark.parametrize("case", ALL, ids=lambda c: c.name)
def test_every_case_solves_and_reverifies(case):
    r = run_case(case)
    assert r.ok, (r.kind, r.error, r.truth_detail)
    assert r.reverified and r.completion


def test_runner_collects_errors():
    r = run_case(cases("commit_post")[0], state_cap=1)
    assert not r.ok and r.error.startswith("StateSpaceLimitExceeded")


def test_run_corpus_writes_a_table():
    buf = io.StringIO()
    results, ok = run_corpus("commit", out=buf)
    assert ok and len(results) == 1
    text = buf.getvalue()
    assert "== commit_post: solved" in text
    assert text.strip().splitlines()[-1].startswith("commit_post")
    assert format_table(results).splitlines()[0].startswith("case")
