import pytest

from protoforge.sketch import parse_sketch
from protoforge.values import InstanceBinding

COMMIT = """
const Node : Domain
var vote_yes : Set(Node)
var go_commit : Set(Node)
init vote_yes = {} /\\ go_commit = {}

fair action GoCommit {
  require vote_yes = Node
  update go_commit := Node
}

fair action VoteYes(n : Node) {
  update vote_yes := vote_yes \\cup {n}
}

invariant Safe : go_commit = {} \\/ vote_yes = Node
liveness Commits : TRUE ~> go_commit = Node
"""

COMMIT_SKETCH = COMMIT.replace("update vote_yes := vote_yes \\cup {n}", "update vote_yes := ?h(vote_yes, n)")


def nodes(k):
    return InstanceBinding.make({"Node": [f"n{i + 1}" for i in range(k)]})


@pytest.fixture
def commit():
    return parse_sketch(COMMIT)


@pytest.fixture
def commit_sketch():
    return parse_sketch(COMMIT_SKETCH)
