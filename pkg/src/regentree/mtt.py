"""Text formats: the MTT marked-tree format and excursion CSV.

MTT grammar, one tree per line, ASCII:

    node := '(' node (',' node)* ')' ':' length
          | ':' length

The whole line is the root node; lengths are nonnegative decimals with up
to 17 significant digits, so serialization round-trips binary64 exactly.
"""

from __future__ import annotations

from .coding import Excursion
from .trees import MarkedTree


class MTTParseError(ValueError):
    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class _Cursor:
    def __init__(self, text: str, line_no: int) -> None:
        self.text = text
        self.pos = 0
        self.line_no = line_no

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def error(self, message: str) -> MTTParseError:
        # at end of line the error points at the last character, not past it
        column = self.pos + 1 if self.pos < len(self.text) else max(1, len(self.text))
        return MTTParseError(message, self.line_no, column)

    def expect(self, ch: str) -> None:
        if self.peek() != ch:
            got = self.peek() or "end of line"
            raise self.error(f"expected {ch!r}, got {got!r}")
        self.pos += 1

    def number(self) -> float:
        start = self.pos
        allowed = "0123456789.eE+-"
        while self.pos < len(self.text) and self.text[self.pos] in allowed:
            # a sign is only part of the number right after an exponent mark
            c = self.text[self.pos]
            if c in "+-" and self.pos > start and self.text[self.pos - 1] not in "eE":
                break
            if c in "+-" and self.pos == start:
                pass
            self.pos += 1
        token = self.text[start : self.pos]
        if not token:
            raise self.error("expected a length")
        try:
            value = float(token)
        except ValueError:
            raise self.error(f"bad length {token!r}") from None
        if value < 0:
            raise self.error("length must be >= 0")
        return value


def _parse_node(cur: _Cursor) -> MarkedTree:
    children: tuple[MarkedTree, ...] = ()
    if cur.peek() == "(":
        cur.pos += 1
        kids = [_parse_node(cur)]
        while cur.peek() == ",":
            cur.pos += 1
            kids.append(_parse_node(cur))
        cur.expect(")")
        children = tuple(kids)
    cur.expect(":")
    return MarkedTree(cur.number(), children)


def parse_tree(line: str, line_no: int = 1) -> MarkedTree:
    cur = _Cursor(line.strip(), line_no)
    tree = _parse_node(cur)
    if cur.pos != len(cur.text):
        raise cur.error("trailing characters after the tree")
    return tree


def serialize_tree(tree: MarkedTree) -> str:
    length = repr(float(tree.length))
    if not tree.children:
        return f":{length}"
    inner = ",".join(serialize_tree(c) for c in tree.children)
    return f"({inner}):{length}"


def parse_tree_file(path: str) -> list[MarkedTree]:
    trees = []
    with open(path, "r", encoding="ascii") as f:
        for i, line in enumerate(f, start=1):
            if line.strip():
                trees.append(parse_tree(line, i))
    return trees


def write_tree_file(path: str, trees: list[MarkedTree]) -> None:
    with open(path, "w", encoding="ascii") as f:
        for t in trees:
            f.write(serialize_tree(t) + "\n")


# ---------------------------------------------------------------------------
# Excursion CSV: lines "s,g", strictly increasing s, optional header
# ---------------------------------------------------------------------------


def parse_excursion_file(path: str) -> Excursion:
    points: list[tuple[float, float]] = []
    with open(path, "r", encoding="ascii") as f:
        for i, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise MTTParseError("expected 's,g'", i, 1)
            try:
                points.append((float(parts[0]), float(parts[1])))
            except ValueError:
                if i == 1:  # optional header
                    continue
                raise MTTParseError(f"bad row {line!r}", i, 1) from None
    return Excursion(tuple(points))


def write_excursion_file(path: str, g: Excursion, header: bool = True) -> None:
    with open(path, "w", encoding="ascii") as f:
        if header:
            f.write("s,g\n")
        for s, gv in g.breakpoints:
            f.write(f"{s!r},{gv!r}\n")
