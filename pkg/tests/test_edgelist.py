import pytest

from kappa3.edgelist import format_edgelist, parse_edgelist, read_edgelist, write_edgelist
from kappa3.errors import BadGraph
from kappa3.graph import complete_graph
from kappa3.random_models import sample_gnp


def test_roundtrip(tmp_path):
    g = sample_gnp(30, 0.2, 1)
    write_edgelist(g, tmp_path / "g.txt")
    assert read_edgelist(tmp_path / "g.txt") == g


def test_format_is_canonical():
    assert format_edgelist(complete_graph(3)) == "3 3\n0 1\n0 2\n1 2\n"


def test_comments_and_blank_lines():
    g = parse_edgelist("# header next\n3 2\n\n2 1\n# edge\n0 1\n")
    assert g.edges == ((0, 1), (1, 2))


@pytest.mark.parametrize("text", ["", "3 2\n0 1\n", "3 1\n0 x\n", "3 1\n0 1 2\n", "2 1\n0 0\n"])
def test_bad_input(text):
    with pytest.raises(BadGraph):
        parse_edgelist(text)
