import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from synabsa.conllu import (
    BadHeadError,
    ColumnCountError,
    InvariantViolation,
    MultiRootError,
    NoRootError,
    SentenceBlock,
    TokenRow,
    UnsupportedLineError,
    parse_conllu,
    renumber_block,
    serialize_conllu,
)

TWO_TOKEN = "1\tThe\t_\t_\t_\t_\t2\tdet\t_\t_\n2\tfood\t_\t_\t_\t_\t0\troot\t_\t_\n"

# Named malformed inputs and the exact error each must raise.
MALFORMED = {
    "nine_columns": ("1\tThe\t_\t_\t_\t_\t2\tdet\t_\n", ColumnCountError),
    "eleven_columns": ("1\tThe\t_\t_\t_\t_\t2\tdet\t_\t_\textra\n", ColumnCountError),
    "head_out_of_range": ("1\tHi\t_\t_\t_\t_\t9\tdep\t_\t_\n", BadHeadError),
    "head_self_loop": ("1\tHi\t_\t_\t_\t_\t1\tdep\t_\t_\n", BadHeadError),
    "head_negative": ("1\tHi\t_\t_\t_\t_\t-1\tdep\t_\t_\n", BadHeadError),
    "head_not_integer": ("1\tHi\t_\t_\t_\t_\tx\tdep\t_\t_\n", BadHeadError),
    "head_cycle": (
        "1\ta\t_\t_\t_\t_\t2\tdep\t_\t_\n"
        "2\tb\t_\t_\t_\t_\t1\tdep\t_\t_\n"
        "3\tc\t_\t_\t_\t_\t0\troot\t_\t_\n",
        BadHeadError,
    ),
    "no_root": (
        "1\ta\t_\t_\t_\t_\t2\tdep\t_\t_\n2\tb\t_\t_\t_\t_\t1\tdep\t_\t_\n",
        NoRootError,
    ),
    "multi_root": (
        "1\ta\t_\t_\t_\t_\t0\troot\t_\t_\n2\tb\t_\t_\t_\t_\t0\troot\t_\t_\n",
        MultiRootError,
    ),
    "multiword_range": ("1-2\tdel\t_\t_\t_\t_\t_\t_\t_\t_\n", UnsupportedLineError),
    "empty_node": ("1.1\tgap\t_\t_\t_\t_\t_\t_\t_\t_\n", UnsupportedLineError),
    "id_gap": (
        "1\ta\t_\t_\t_\t_\t0\troot\t_\t_\n3\tb\t_\t_\t_\t_\t1\tdep\t_\t_\n",
        InvariantViolation,
    ),
    "id_zero": ("0\ta\t_\t_\t_\t_\t0\troot\t_\t_\n", InvariantViolation),
    "empty_deprel": ("1\ta\t_\t_\t_\t_\t0\t\t_\t_\n", InvariantViolation),
}


def test_empty_string_gives_empty_list():
    assert parse_conllu("") == []


def test_two_token_block():
    blocks = parse_conllu(TWO_TOKEN)
    assert len(blocks) == 1
    block = blocks[0]
    assert [t.form for t in block.tokens] == ["The", "food"]
    assert block.root_id == 2
    assert block.tokens[0].head == 2
    assert block.tokens[0].deprel == "det"


def test_fixture_has_three_sentences_with_expected_counts(fixtures_dir):
    blocks = parse_conllu((fixtures_dir / "three_sentences.conllu").read_text())
    assert [len(b.tokens) for b in blocks] == [5, 4, 5]
    assert sum(len(b.tokens) for b in blocks) == 14


def test_comments_preserved_in_order(fixtures_dir):
    blocks = parse_conllu((fixtures_dir / "three_sentences.conllu").read_text())
    assert blocks[0].comments == ("# sent_id = s1", "# text = The food was amazing !")


def test_crlf_accepted():
    assert parse_conllu(TWO_TOKEN.replace("\n", "\r\n")) == parse_conllu(TWO_TOKEN)


def test_parse_is_pure():
    text = TWO_TOKEN + "\n" + TWO_TOKEN
    assert parse_conllu(text) == parse_conllu(text)


@pytest.mark.parametrize("name", sorted(MALFORMED))
def test_malformed_inputs_raise_documented_category(name):
    text, expected = MALFORMED[name]
    with pytest.raises(expected):
        parse_conllu(text)


def test_serialize_empty_list():
    assert serialize_conllu([]) == ""


def test_serialize_single_token_sentence():
    block = SentenceBlock(tokens=(TokenRow(id=1, form="Hi"),))
    assert serialize_conllu([block]) == "1\tHi\t_\t_\t_\t_\t0\troot\t_\t_\n\n"


def test_fixture_round_trip_byte_identical(fixtures_dir):
    text = (fixtures_dir / "three_sentences.conllu").read_text()
    blocks = parse_conllu(text)
    assert serialize_conllu(blocks).rstrip("\n") == text.rstrip("\n")


def test_serialize_rejects_invalid_block():
    bad = SentenceBlock(tokens=(TokenRow(id=1, form="a", head=1, deprel="dep"),))
    with pytest.raises(InvariantViolation):
        serialize_conllu([bad])


@st.composite
def sentence_blocks(draw):
    n = draw(st.integers(min_value=1, max_value=12))
    safe_text = st.text(
        alphabet=st.characters(blacklist_categories=("Cs", "Cc"), blacklist_characters="\t "),
        min_size=1,
        max_size=6,
    )
    order = draw(st.permutations(list(range(1, n + 1))))
    heads = {order[0]: 0}
    for pos, tok in enumerate(order[1:], start=1):
        heads[tok] = order[draw(st.integers(min_value=0, max_value=pos - 1))]
    rows = tuple(
        TokenRow(
            id=i,
            form=draw(safe_text),
            lemma=draw(safe_text),
            upos=draw(safe_text),
            xpos="_",
            feats="_",
            head=heads[i],
            deprel="root" if heads[i] == 0 else draw(safe_text),
            deps="_",
            misc=draw(safe_text),
        )
        for i in range(1, n + 1)
    )
    comments = tuple(f"# {c}" for c in draw(st.lists(safe_text, max_size=2)))
    return SentenceBlock(tokens=rows, comments=comments)


@settings(max_examples=150, deadline=None)
@given(st.lists(sentence_blocks(), max_size=4))
def test_round_trip_identity(blocks):
    assert parse_conllu(serialize_conllu(blocks)) == blocks


def test_renumber_block_reroots_orphans():
    blocks = parse_conllu(
        "1\ta\t_\t_\t_\t_\t2\tdet\t_\t_\n"
        "2\tb\t_\t_\t_\t_\t0\troot\t_\t_\n"
        "3\tc\t_\t_\t_\t_\t2\tobj\t_\t_\n"
    )
    out = renumber_block(blocks[0], {1, 3})
    assert [(t.id, t.form, t.head, t.deprel) for t in out.tokens] == [
        (1, "a", 0, "root"),
        (2, "c", 0, "root"),
    ]
