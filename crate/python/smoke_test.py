"""Smoke test for the matchvote extension module.

Build first:  pip install --no-build-isolation -e crates/python
Then run:     python python/smoke_test.py   (or pytest python/smoke_test.py)
"""

from pathlib import Path

import matchvote

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def read(name):
    return (FIXTURES / name).read_text()


def test_example_one_control():
    prob = matchvote.parse_problem(read("ex1.election"))
    assert prob.kind == "ccrv"
    assert prob.rule == "2approval"
    assert prob.preferred == "p"
    assert prob.limit == 3
    assert prob.voter_count == 5
    d = prob.solve()
    assert d.success and bool(d)
    assert d.certificate.startswith("control")
    assert 1 <= len(d.plan) <= 3
    assert all(step[0] == "replace" for step in d.plan)
    assert prob.check(d)


def test_example_two_bribery_matches_oracle():
    prob = matchvote.Problem.parse(read("ex2.election"))
    d = prob.solve()
    assert d.success and d.objective == 3
    assert prob.check(d)
    try:
        prob.oracle()
    except matchvote.CapExceeded:
        pass
    else:
        raise AssertionError("default oracle cap should refuse 9 voters")
    o = prob.oracle(max_voters=9)
    assert o.success == d.success and o.objective == d.objective


def test_generated_problems_agree():
    for rule, cands in [("2approval", 4), ("2veto", 5), ("3veto", 5)]:
        for seed in range(10):
            prob = matchvote.gen_election(
                seed=seed, voters=5, candidates=cands, rule=rule, problem="bribery", limit=3
            )
            again = matchvote.parse_problem(prob.to_text())
            assert again.to_text() == prob.to_text()
            s, o = prob.solve(), prob.oracle()
            assert s.success == o.success, (rule, seed)
            assert not s.success or prob.check(s)


def test_matching():
    text = "graph\nvertex a b 1\nvertex b b 1\nvertex c b 2\nedge a c weight 3\nedge b c weight 4 count 2\nend\n"
    weight, edges = matchvote.solve_matching(text, "max")
    assert weight == 7 and len(edges) == 2
    assert matchvote.solve_matching("graph\nvertex a b 1\nvertex b b 0\nedge a b weight 1\nend\n") is None


def test_rx3c_reduction():
    text = matchvote.gen_rx3c(2, 4)
    cover = matchvote.solve_rx3c(text)
    assert cover is not None and len(cover) == 2
    assert matchvote.reduce_rx3c(text).solve().success


def test_audit():
    report = matchvote.audit_counterexample()
    assert report == {"cover_weight": 86, "threshold": 86, "nmts": False, "refuted": True}


def test_errors():
    try:
        matchvote.parse_problem("election x\ncandidates a p\nend\n")
    except ValueError as e:
        assert "line" in str(e)
    else:
        raise AssertionError("parse error expected")


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    for t in tests:
        t()
        print("ok", t.__name__)
    print(f"{len(tests)} passed")
