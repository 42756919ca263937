"""Parsing and serialization of dependency analyses in the CoNLL-U plain-text format.

This is the interchange boundary between external parsers and the graph
builder: 10 tab-separated columns per token, blank-line separated sentences,
"#"-prefixed comment lines. Multiword-token ranges ("i-j") and empty nodes
("i.j") are rejected rather than skipped, because downstream graph code
requires a bijection between rows and tree nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

COLUMN_COUNT = 10


class ConlluError(Exception):
    """Base class for CoNLL-U format errors."""


class ColumnCountError(ConlluError):
    """A token line does not have exactly 10 tab-separated fields."""


class UnsupportedLineError(ConlluError):
    """Multiword-range ("i-j") or empty-node ("i.j") line encountered."""


class InvariantViolation(ConlluError):
    """A sentence block fails structural validation."""


class BadHeadError(InvariantViolation):
    """Head reference out of range, self-loop, or cyclic."""


class MultiRootError(InvariantViolation):
    """More than one token has head 0."""


class NoRootError(InvariantViolation):
    """No token has head 0."""


@dataclass(frozen=True)
class TokenRow:
    """One token line. Only id/form/head/deprel are interpreted; the rest is
    carried verbatim ("_" included)."""

    id: int
    form: str
    lemma: str = "_"
    upos: str = "_"
    xpos: str = "_"
    feats: str = "_"
    head: int = 0
    deprel: str = "root"
    deps: str = "_"
    misc: str = "_"

    def to_line(self) -> str:
        return "\t".join(
            (
                str(self.id),
                self.form,
                self.lemma,
                self.upos,
                self.xpos,
                self.feats,
                str(self.head),
                self.deprel,
                self.deps,
                self.misc,
            )
        )


@dataclass(frozen=True)
class SentenceBlock:
    """An ordered token list plus the comment lines that preceded it."""

    tokens: tuple[TokenRow, ...]
    comments: tuple[str, ...] = ()

    @property
    def root_id(self) -> int:
        for row in self.tokens:
            if row.head == 0:
                return row.id
        raise NoRootError("block has no root token")


def validate_block(block: SentenceBlock) -> None:
    """Check the tree invariants of a block; raise a ConlluError subclass on failure.

    Verified: ids are exactly 1..n, exactly one head-0 token, heads resolve
    in range without self-loops, and the head relation is acyclic.
    """
    n = len(block.tokens)
    if n == 0:
        raise InvariantViolation("block has no tokens")
    for expect, row in enumerate(block.tokens, start=1):
        if row.id != expect:
            raise InvariantViolation(
                f"token ids must be 1..{n} with no gaps; found id {row.id} at position {expect}"
            )
        if not row.deprel:
            raise InvariantViolation(f"token {row.id} has an empty deprel")
        if row.head < 0 or row.head > n:
            raise BadHeadError(f"token {row.id} has head {row.head} outside 0..{n}")
        if row.head == row.id:
            raise BadHeadError(f"token {row.id} is its own head")
    roots = [row.id for row in block.tokens if row.head == 0]
    if not roots:
        raise NoRootError("block has no token with head 0")
    if len(roots) > 1:
        raise MultiRootError(f"block has multiple roots: {roots}")
    # Every token must reach the root by following heads; a cycle never does.
    heads = {row.id: row.head for row in block.tokens}
    for row in block.tokens:
        seen = set()
        cur = row.id
        while cur != 0:
            if cur in seen:
                raise BadHeadError(f"head cycle involving token {row.id}")
            seen.add(cur)
            cur = heads[cur]


def _parse_token_line(line: str, lineno: int) -> TokenRow:
    fields = line.split("\t")
    if len(fields) != COLUMN_COUNT:
        raise ColumnCountError(
            f"line {lineno}: expected {COLUMN_COUNT} tab-separated fields, got {len(fields)}"
        )
    tok_id = fields[0]
    if "-" in tok_id:
        raise UnsupportedLineError(f"line {lineno}: multiword token range '{tok_id}' not supported")
    if "." in tok_id:
        raise UnsupportedLineError(f"line {lineno}: empty node '{tok_id}' not supported")
    try:
        idx = int(tok_id)
    except ValueError:
        raise InvariantViolation(f"line {lineno}: token id '{tok_id}' is not an integer") from None
    if idx < 1:
        raise InvariantViolation(f"line {lineno}: token id must be >= 1, got {idx}")
    try:
        head = int(fields[6])
    except ValueError:
        raise BadHeadError(f"line {lineno}: head '{fields[6]}' is not an integer") from None
    return TokenRow(
        id=idx,
        form=fields[1],
        lemma=fields[2],
        upos=fields[3],
        xpos=fields[4],
        feats=fields[5],
        head=head,
        deprel=fields[7],
        deps=fields[8],
        misc=fields[9],
    )


def parse_conllu(text: str) -> list[SentenceBlock]:
    """Parse CoNLL-U text into validated sentence blocks.

    Accepts LF or CRLF line endings. Comment lines are preserved in order.
    Every block is validated (see validate_block); the empty string parses
    to an empty list.
    """
    blocks: list[SentenceBlock] = []
    tokens: list[TokenRow] = []
    comments: list[str] = []

    def flush() -> None:
        nonlocal tokens, comments
        if tokens or comments:
            block = SentenceBlock(tokens=tuple(tokens), comments=tuple(comments))
            validate_block(block)
            blocks.append(block)
            tokens = []
            comments = []

    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            flush()
        elif line.startswith("#"):
            comments.append(line)
        else:
            tokens.append(_parse_token_line(line, lineno))
    flush()
    return blocks


def serialize_conllu(blocks: list[SentenceBlock]) -> str:
    """Serialize blocks back to CoNLL-U text (LF, one blank line per block).

    Round-trips with parse_conllu field-for-field. Raises InvariantViolation
    (or a subclass) when a block fails validation.
    """
    pieces: list[str] = []
    for block in blocks:
        validate_block(block)
        lines = list(block.comments) + [row.to_line() for row in block.tokens]
        pieces.append("\n".join(lines) + "\n\n")
    return "".join(pieces)


def load_conllu_file(path) -> list[SentenceBlock]:
    with open(path, encoding="utf-8") as fh:
        return parse_conllu(fh.read())


def renumber_block(block: SentenceBlock, keep_ids: set[int]) -> SentenceBlock:
    """Restrict a block to keep_ids, renumbering 1..k in original order.

    Heads pointing at dropped tokens are re-rooted (head 0, deprel "root");
    the result is always a valid block.
    """
    kept = [row for row in block.tokens if row.id in keep_ids]
    remap = {row.id: new_id for new_id, row in enumerate(kept, start=1)}
    rows = []
    for row in kept:
        if row.head in remap:
            rows.append(replace(row, id=remap[row.id], head=remap[row.head]))
        else:
            rows.append(replace(row, id=remap[row.id], head=0, deprel="root"))
    return SentenceBlock(tokens=tuple(rows), comments=block.comments)
