import pytest

from core import Certificate, Election
from domains import Embedding, enumerate_spoc, identity, named_domain
from election_file import dumps, loads, read_election, write_election
from errors import ElectionFormatError


@pytest.fixture
def certified():
    cert = Certificate(
        sp_axis=(0, 1, 2),
        gs_tree=((0, 1), 2),
        sc_order=(0, 1),
        embedding=Embedding.from_array([[0.0], [1.0], [3.0]]),
    )
    return Election.from_rankings([(0, 1, 2), (1, 0, 2)], [1, 2.5], certificate=cert)


def test_dumps_format(certified):
    assert dumps(certified) == (
        "# m: 3\n"
        "# n: 3.5\n"
        "# sp-axis: 1 2 3\n"
        "# gs-tree: ((1 2) 3)\n"
        "# sc-order: 1 2\n"
        "# embedding: 1\n"
        "# point 1: 0.0\n"
        "# point 2: 1.0\n"
        "# point 3: 3.0\n"
        "1: 1 > 2 > 3\n"
        "2.5: 2 > 1 > 3\n"
    )


def test_round_trip(certified):
    text = dumps(certified)
    parsed = loads(text)
    assert parsed == certified
    assert dumps(parsed) == text


def test_plain_election_round_trip(two_camps):
    text = dumps(two_camps)
    assert text.startswith("# m: 8\n# n: 8\n")
    assert loads(text) == two_camps


def test_loads_tolerates_blank_lines_and_float_counts():
    e = loads("# m: 2\n\n2.0: 2 > 1\n")
    assert e.rankings == ((1, 0),)
    assert e.weights == (2,)
    assert e.certificate is None


@pytest.mark.parametrize("text,line", [
    ("# m: 3\n1: 1 > 2 > 2\n", 2),
    ("# m: 3\n1: 1 > 2\n", 2),
    ("# m: 3\n1: 1 > 2 > 3\n0: 3 > 2 > 1\n", 3),
    ("# m: 3\n1: a > b > c\n", 2),
    ("# m: 2\nfoo\n", 2),
    ("# m: 2\n# m: 2\n1: 1 > 2\n", 2),
    ("# m: 2\n# n: 3\n1: 1 > 2\n", 2),
    ("1: 1 > 2\n", 1),
    ("# m: two\n1: 1 > 2\n", 1),
    ("# m: 2\n", 1),
    ("# m: 2\n# sp-axis: 1 1\n1: 1 > 2\n", 2),
    ("# m: 3\n# gs-tree: ((1 2) 3\n1: 1 > 2 > 3\n", 2),
    ("# m: 3\n# gs-tree: ((1 2) 4)\n1: 1 > 2 > 3\n", 2),
    ("# m: 2\n# sc-order: 1 1\n1: 1 > 2\n1: 2 > 1\n", 2),
    ("# m: 2\n# embedding: 1\n# point 1: 0.0\n1: 1 > 2\n", 2),
    ("# m: 2\n# embedding: 1\n# point 1: 0.0\n# point 2: 1.0 2.0\n1: 1 > 2\n", 4),
    ("# m: 3\n# sp-tree: 1-2 2-4\n1: 1 > 2 > 3\n", 2),
    ("# m: 3\n# sp-tree: 1-2 2\n1: 1 > 2 > 3\n", 2),
    ("# m: 3\n# sp-tree: 1-2 2-1\n1: 1 > 2 > 3\n", 2),
    ("# m: 3\n# spoc-cycle: 1 2\n1: 1 > 2 > 3\n", 2),
])
def test_errors_carry_line_numbers(text, line):
    with pytest.raises(ElectionFormatError) as err:
        loads(text)
    assert err.value.line_no == line
    assert str(err.value).startswith(f"line {line}: ")


def test_files(certified, tmp_path):
    path = write_election(certified, tmp_path / "sub" / "e.txt")
    assert path.exists()
    assert read_election(path) == certified


def test_tree_and_cycle_certificates_round_trip():
    spdf = named_domain("SP/DF", 5).as_election()
    text = dumps(spdf)
    assert "# sp-tree: 1-3 2-3 3-4 3-5\n" in text
    parsed = loads(text)
    assert parsed == spdf
    assert parsed.certificate.is_condorcet

    spoc = enumerate_spoc(identity(4)).as_election()
    text = dumps(spoc)
    assert "# spoc-cycle: 1 2 3 4\n" in text
    assert loads(text).certificate.cycle == (0, 1, 2, 3)
    assert loads(text) == spoc


def test_embedding_certificates_compare_by_points(certified):
    parsed = loads(dumps(certified))
    assert parsed.certificate.embedding == Embedding.from_array([[0.0], [1.0], [3.0]], general_position=True)
