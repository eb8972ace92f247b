import pytest

from protoforge import expr as E
from protoforge.errors import (DSLTypeError, HoleMisuse, MissingHole, ParseError, UnresolvedName,
                               ValidationError)
from protoforge.sketch import apply_completion, parse_sketch, serialize_protocol
from protoforge.syntax import parse_expression
from protoforge.values import DomainType, SetType

from conftest import COMMIT, COMMIT_SKETCH
from pf_testkit import BENCH


def test_commit_protocol_parses(commit):
    assert [a.name for a in commit.actions] == ["GoCommit", "VoteYes"]
    assert commit.holes == ()
    assert commit.is_complete()
    assert commit.action("VoteYes").args == (("n", "Node"),)
    assert all(a.fair for a in commit.actions)
    assert [p.name for p in commit.properties] == ["Safe", "Commits"]


def test_commit_sketch_has_one_post_hole(commit_sketch):
    (h,) = commit_sketch.holes
    assert h.name == "h" and h.kind == "post" and h.action == "VoteYes" and h.var == "vote_yes"
    assert h.output_type == SetType(DomainType("Node"))
    assert h.arg_names == ("vote_yes", "n")


def test_pre_hole_kind_is_inferred():
    sk = parse_sketch(COMMIT.replace("require vote_yes = Node", "require ?g(vote_yes)"))
    (h,) = sk.holes
    assert h.kind == "pre" and h.action == "GoCommit" and str(h.output_type) == "Bool"


def test_apply_completion_gives_back_the_protocol(commit, commit_sketch):
    sc = commit_sketch.scope(commit_sketch.action("VoteYes"))
    body = parse_expression("vote_yes \\cup {n}", sc)
    p = apply_completion(commit_sketch, {"h": body})
    assert p.holes == ()
    assert serialize_protocol(p) == serialize_protocol(commit)


def test_apply_completion_identity_without_holes(commit):
    assert apply_completion(commit, {}) is commit


def test_apply_completion_rejects_bad_bodies(commit_sketch):
    sc = commit_sketch.scope(commit_sketch.action("VoteYes"))
    with pytest.raises(ValidationError):
        apply_completion(commit_sketch, {"h": parse_expression("go_commit", sc)})
    with pytest.raises(DSLTypeError):
        apply_completion(commit_sketch, {"h": parse_expression("vote_yes = {}", sc)})
    with pytest.raises(MissingHole):
        apply_completion(commit_sketch, {})


def test_empty_action_list_is_rejected():
    with pytest.raises(ValidationError):
        parse_sketch("const Node : Domain\nvar x : Bool\ninit x = FALSE\n")


@pytest.mark.parametrize("src, exc", [
    # hole in init
    (COMMIT.replace("init vote_yes = {} /\\ go_commit = {}", "init ?g(vote_yes)"), HoleMisuse),
    # same hole twice
    (COMMIT.replace("require vote_yes = Node", "require ?g(vote_yes)\n  require ?g(go_commit)"), HoleMisuse),
    # pre-hole under negation
    (COMMIT.replace("require vote_yes = Node", "require ~?g(vote_yes)"), HoleMisuse),
    # post-hole inside a larger expression
    (COMMIT_SKETCH.replace("?h(vote_yes, n)", "?h(vote_yes, n) \\cup {}"), HoleMisuse),
    # hole in a property
    (COMMIT.replace("invariant Safe : go_commit = {} \\/ vote_yes = Node", "invariant Safe : ?g(go_commit)"),
     HoleMisuse),
    # hole argument that is not a variable, parameter or action argument
    (COMMIT_SKETCH.replace("?h(vote_yes, n)", "?h(vote_yes \\cup {n})"), ParseError),
])
def test_hole_misuse(src, exc):
    with pytest.raises(exc):
        parse_sketch(src)


@pytest.mark.parametrize("src, exc", [
    (COMMIT.replace("require vote_yes = Node", "require votes = Node"), UnresolvedName),
    (COMMIT.replace("require vote_yes = Node", "require vote_yes"), DSLTypeError),
    (COMMIT.replace("update go_commit := Node", "update go_commit := TRUE"), DSLTypeError),
    (COMMIT.replace("fair action VoteYes(n : Node)", "fair action VoteYes(n : Nodes)"), ValidationError),
    (COMMIT.replace("require vote_yes = Node", "require vote_yes = = Node"), ParseError),
    (COMMIT + "\nvar vote_yes : Bool\n", ValidationError),
    (COMMIT.replace("update go_commit := Node", "update go_commit := Node\n  update go_commit := {}"),
     ValidationError),
])
def test_parse_errors(src, exc):
    with pytest.raises(exc):
        parse_sketch(src)


def test_errors_carry_line_and_column():
    src = COMMIT.replace("require vote_yes = Node", "require votes = Node")
    with pytest.raises(UnresolvedName) as info:
        parse_sketch(src)
    assert info.value.line == 8 and info.value.col is not None


def test_comments_and_synonyms():
    src = COMMIT.replace("\\cup", "\\union") + "-- trailing comment\n"
    assert serialize_protocol(parse_sketch(src)) == serialize_protocol(parse_sketch(COMMIT))


def test_serialize_round_trip_and_idempotence(commit):
    text = serialize_protocol(commit)
    again = parse_sketch(text)
    assert serialize_protocol(again) == text
    assert again.actions == commit.actions and again.init == commit.init


def test_nested_quantifier_round_trips():
    src = COMMIT.replace(
        "invariant Safe : go_commit = {} \\/ vote_yes = Node",
        "invariant Safe : \\A a \\in Node : \\E b \\in Node : (a \\in go_commit => b \\in vote_yes)")
    p = parse_sketch(src)
    text = serialize_protocol(p)
    assert serialize_protocol(parse_sketch(text)) == text
    assert parse_sketch(text).properties == p.properties


@pytest.mark.parametrize("spec", sorted(BENCH.glob("*.pspec")), ids=lambda p: p.stem)
def test_corpus_sketches_round_trip(spec):
    sk = parse_sketch(spec.read_text())
    text = serialize_protocol(sk)
    back = parse_sketch(text)
    assert serialize_protocol(back) == text
    assert [h.name for h in back.holes] == [h.name for h in sk.holes]
    assert back.actions == sk.actions


def test_function_variables_and_with_update():
    src = """
const Node : Domain
const Value : Domain
var votes : Func(Value, Set(Node))
init \\A v \\in Value : votes[v] = {}
action Cast(n : Node, v : Value) {
  update votes := votes with [v := votes[v] \\cup {n}]
}
"""
    p = parse_sketch(src)
    (a,) = p.actions
    assert a.post[0][1].op == E.UPDATE
    assert serialize_protocol(parse_sketch(serialize_protocol(p))) == serialize_protocol(p)
