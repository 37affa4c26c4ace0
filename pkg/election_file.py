"""Plain-text election files.

    # m: 4
    # n: 5
    # sp-axis: 1 2 3 4
    # gs-tree: ((1 2) (3 4))
    # sp-tree: 1-2 2-3 3-4
    # spoc-cycle: 1 2 3 4
    # sc-order: 1 2
    # embedding: 1
    # point 1: 0.5
    3: 1 > 2 > 3 > 4
    2: 4 > 3 > 2 > 1

Candidates and vote indices are 1-based in files and 0-based in memory. Header
lines come in the order above; only ``m`` and ``n`` are required.
"""
from __future__ import annotations

import logging
import math
import re
from pathlib import Path
from typing import Dict, List, Tuple, Union

from core import Certificate, Election, Ranking, Weight, validate_ranking
from domains import Embedding, GSTree, validate_gs_tree, validate_tree_graph
from errors import ElectionFormatError, InputError

logger = logging.getLogger(__name__)

_HEADER = re.compile(r"^#\s*([a-z0-9 -]+?)\s*:\s*(.*)$")
_VOTE = re.compile(r"^\s*([0-9.eE+-]+)\s*:\s*(.+)$")


def _fmt_weight(w: Weight) -> str:
    if float(w).is_integer():
        return str(int(w))
    return repr(float(w))


def _fmt_tree(tree: GSTree) -> str:
    if isinstance(tree, int):
        return str(tree + 1)
    return "(" + " ".join(_fmt_tree(child) for child in tree) + ")"


def _fmt_float(x: float) -> str:
    return repr(float(x))


def _fmt_edges(adj) -> str:
    return " ".join(f"{a + 1}-{b + 1}" for a, nbrs in enumerate(adj) for b in nbrs if a < b)


def dumps(e: Election) -> str:
    """Canonical serialization; ``loads(dumps(e))`` reproduces the votes and certificate."""
    lines = [f"# m: {e.m}", f"# n: {_fmt_weight(e.n)}"]
    cert = e.certificate
    if cert is not None:
        if cert.sp_axis is not None:
            lines.append("# sp-axis: " + " ".join(str(c + 1) for c in cert.sp_axis))
        if cert.gs_tree is not None:
            lines.append("# gs-tree: " + _fmt_tree(cert.gs_tree))
        if cert.sp_tree is not None:
            lines.append("# sp-tree: " + _fmt_edges(cert.sp_tree))
        if cert.cycle is not None:
            lines.append("# spoc-cycle: " + " ".join(str(c + 1) for c in cert.cycle))
        if cert.sc_order is not None:
            lines.append("# sc-order: " + " ".join(str(i + 1) for i in cert.sc_order))
        if cert.embedding is not None:
            lines.append(f"# embedding: {cert.embedding.d}")
            for c, point in enumerate(cert.embedding.points):
                lines.append(f"# point {c + 1}: " + " ".join(_fmt_float(x) for x in point))
    for r, w in e.votes:
        lines.append(f"{_fmt_weight(w)}: " + " > ".join(str(c + 1) for c in r))
    return "\n".join(lines) + "\n"


def _parse_ints(text: str, line_no: int, what: str) -> List[int]:
    try:
        return [int(tok) - 1 for tok in text.split()]
    except ValueError:
        raise ElectionFormatError(f"{what} must be whitespace-separated integers", line_no) from None


def _parse_tree(text: str, line_no: int) -> GSTree:
    tokens = re.findall(r"\(|\)|[^\s()]+", text)
    pos = 0

    def node():
        nonlocal pos
        if pos >= len(tokens):
            raise ElectionFormatError("unexpected end of gs-tree", line_no)
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            children = []
            while pos < len(tokens) and tokens[pos] != ")":
                children.append(node())
            if pos >= len(tokens):
                raise ElectionFormatError("unbalanced parentheses in gs-tree", line_no)
            pos += 1
            return tuple(children)
        if tok == ")":
            raise ElectionFormatError("unexpected ')' in gs-tree", line_no)
        try:
            return int(tok) - 1
        except ValueError:
            raise ElectionFormatError(f"bad gs-tree leaf {tok!r}", line_no) from None

    tree = node()
    if pos != len(tokens):
        raise ElectionFormatError("trailing tokens after gs-tree", line_no)
    return tree


def _parse_edges(text: str, line_no: int, m: int):
    adj: List[List[int]] = [[] for _ in range(m)]
    for tok in text.split():
        ends = tok.split("-")
        if len(ends) != 2 or not all(x.isdigit() for x in ends):
            raise ElectionFormatError(f"bad sp-tree edge {tok!r}, expected 'a-b'", line_no)
        a, b = int(ends[0]) - 1, int(ends[1]) - 1
        if not (0 <= a < m and 0 <= b < m):
            raise ElectionFormatError(f"sp-tree edge {tok!r} names a candidate outside 1..{m}", line_no)
        adj[a].append(b)
        adj[b].append(a)
    try:
        return validate_tree_graph(adj)
    except InputError as exc:
        raise ElectionFormatError(str(exc), line_no) from None


def _parse_weight(text: str, line_no: int) -> Weight:
    try:
        return int(text)
    except ValueError:
        pass
    try:
        w = float(text)
    except ValueError:
        raise ElectionFormatError(f"bad multiplicity {text!r}", line_no) from None
    return int(w) if w.is_integer() else w


def loads(text: str) -> Election:
    header: Dict[str, Tuple[str, int]] = {}
    points: Dict[int, Tuple[List[float], int]] = {}
    rankings: List[Ranking] = []
    weights: List[Weight] = []
    vote_lines: List[int] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            match = _HEADER.match(line)
            if not match:
                raise ElectionFormatError(f"malformed header {line!r}", line_no)
            key, value = match.group(1), match.group(2)
            if key.startswith("point "):
                try:
                    idx = int(key.split()[1]) - 1
                    points[idx] = ([float(x) for x in value.split()], line_no)
                except ValueError:
                    raise ElectionFormatError(f"malformed point line {line!r}", line_no) from None
                continue
            if key in header:
                raise ElectionFormatError(f"duplicate header {key!r}", line_no)
            header[key] = (value, line_no)
            continue
        match = _VOTE.match(line)
        if not match:
            raise ElectionFormatError(f"expected 'multiplicity: a > b > ...', got {line!r}", line_no)
        weights.append(_parse_weight(match.group(1), line_no))
        order = _parse_ints(match.group(2).replace(">", " "), line_no, "ranking")
        rankings.append(tuple(order))
        vote_lines.append(line_no)

    if "m" not in header:
        raise ElectionFormatError("missing '# m:' header", 1)
    m_text, m_line = header["m"]
    try:
        m = int(m_text)
    except ValueError:
        raise ElectionFormatError(f"bad candidate count {m_text!r}", m_line) from None
    if not rankings:
        raise ElectionFormatError("file contains no votes", m_line)
    for i, (r, ln) in enumerate(zip(rankings, vote_lines)):
        try:
            rankings[i] = validate_ranking(r, m)
        except InputError as exc:
            raise ElectionFormatError(str(exc), ln) from None
        if not weights[i] > 0:
            raise ElectionFormatError(f"multiplicity must be positive, got {weights[i]}", ln)

    cert_fields = {}
    if "sp-axis" in header:
        value, ln = header["sp-axis"]
        try:
            cert_fields["sp_axis"] = validate_ranking(_parse_ints(value, ln, "sp-axis"), m)
        except InputError as exc:
            raise ElectionFormatError(str(exc), ln) from None
    if "gs-tree" in header:
        value, ln = header["gs-tree"]
        tree = _parse_tree(value, ln)
        try:
            validate_gs_tree(tree, m)
        except InputError as exc:
            raise ElectionFormatError(str(exc), ln) from None
        cert_fields["gs_tree"] = tree
    if "sp-tree" in header:
        value, ln = header["sp-tree"]
        cert_fields["sp_tree"] = _parse_edges(value, ln, m)
    if "spoc-cycle" in header:
        value, ln = header["spoc-cycle"]
        try:
            cert_fields["cycle"] = validate_ranking(_parse_ints(value, ln, "spoc-cycle"), m)
        except InputError as exc:
            raise ElectionFormatError(str(exc), ln) from None
    if "sc-order" in header:
        value, ln = header["sc-order"]
        cert_fields["sc_order"] = tuple(_parse_ints(value, ln, "sc-order"))
    if "embedding" in header:
        value, ln = header["embedding"]
        if not value.strip().isdigit():
            raise ElectionFormatError(f"bad embedding dimension {value!r}", ln)
        d = int(value)
        if sorted(points) != list(range(m)):
            raise ElectionFormatError(f"embedding needs one '# point i:' line per candidate 1..{m}", ln)
        for coords, pln in points.values():
            if len(coords) != d:
                raise ElectionFormatError(f"point has {len(coords)} coordinates, expected {d}", pln)
        cert_fields["embedding"] = Embedding.from_array([points[c][0] for c in range(m)])
    certificate = Certificate(**cert_fields) if cert_fields else None

    try:
        election = Election.from_rankings(rankings, weights, m=m, certificate=certificate, validate=False)
    except InputError as exc:
        raise ElectionFormatError(str(exc), header.get("sc-order", ("", None))[1]) from None
    if "n" in header:
        n_text, n_line = header["n"]
        if not math.isclose(_parse_weight(n_text, n_line), election.n, rel_tol=1e-9):
            raise ElectionFormatError(f"header n={n_text} but multiplicities sum to {election.n}", n_line)
    logger.debug("Parsed election file", extra={"m": m, "votes": len(rankings)})
    return election


def read_election(path: Union[str, Path]) -> Election:
    return loads(Path(path).read_text())


def write_election(e: Election, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(e))
    return path
