"""AIGER serialization: round-trips, canonical bytes, malformed inputs."""

import pytest

import oracles as O
from aigrefac import aiger
from aigrefac.aiger import ParseError, UnsupportedFeatureError
from aigrefac.circuits import adder, mux_tree, parity, random_aig, voter


def _compacted(aig):
    aig.compact()
    return aig


CIRCUITS = [
    ("adder4", lambda: adder(4)),
    ("voter7", lambda: voter(7)),
    ("parity9", lambda: parity(9)),
    ("mux4", lambda: mux_tree(2)),
    ("rand", lambda: random_aig(10, 240, seed=13)),
]


@pytest.mark.parametrize("name,mk", CIRCUITS, ids=[c[0] for c in CIRCUITS])
@pytest.mark.parametrize("ascii_format", [True, False], ids=["aag", "aig"])
def test_roundtrip_preserves_bytes_and_function(name, mk, ascii_format):
    aig = _compacted(mk())
    blob = aiger.write_bytes(aig, ascii_format=ascii_format)
    back = aiger.parse_bytes(blob)
    assert aiger.write_bytes(back, ascii_format=ascii_format) == blob
    assert len(back.pis) == len(aig.pis)
    assert back.pos == aig.pos   # compacted input is already in writer order
    if len(aig.pis) <= 10:
        assert O.exhaustive_po_tables(back) == O.exhaustive_po_tables(aig)


@pytest.mark.parametrize("name,mk", CIRCUITS, ids=[c[0] for c in CIRCUITS])
def test_writer_matches_independent_encoder(name, mk):
    aig = _compacted(mk())
    assert aiger.write_bytes(aig, ascii_format=True) == O.encode_ascii_py(aig)
    assert aiger.write_bytes(aig, ascii_format=False) == O.encode_binary_py(aig)


def test_parse_known_ascii_structure():
    text = b"aag 3 2 0 1 1\n2\n4\n6\n6 4 2\n"
    aig = aiger.parse_bytes(text)
    assert len(aig.pis) == 2
    assert aig.num_ands == 1
    assert aig.pos == [6]
    # single AND of the two inputs
    assert O.exhaustive_po_tables(aig) == [0b1000]


def test_parse_complemented_output_and_constants():
    # PO = NOT(a AND const_true) = NOT a; second PO is constant false
    text = b"aag 2 1 0 2 1\n2\n5\n0\n4 2 1\n"
    aig = aiger.parse_bytes(text)
    assert O.exhaustive_po_tables(aig) == [0b01, 0b00]


def test_binary_format_deltas_cover_multibyte():
    aig = _compacted(random_aig(12, 400, seed=99))
    blob = aiger.write_bytes(aig, ascii_format=False)
    # long-range fanins force at least one two-byte varint
    body = blob.split(b"\n", 1 + len(aig.pos))[-1]
    assert any(b & 0x80 for b in body[:max(1, len(body) - len(aig.trailer))])
    back = aiger.parse_bytes(blob)
    assert aiger.write_bytes(back, ascii_format=False) == blob


def test_write_file_infers_format(tmp_path):
    aig = _compacted(adder(3))
    pa = tmp_path / "x.aag"
    pb = tmp_path / "x.aig"
    aiger.write_file(aig, str(pa))
    aiger.write_file(aig, str(pb))
    assert pa.read_bytes().startswith(b"aag ")
    assert pb.read_bytes().startswith(b"aig ")
    for p in (pa, pb):
        again = aiger.parse_file(str(p))
        assert O.exhaustive_po_tables(again) == O.exhaustive_po_tables(aig)


def test_trailer_preserved_verbatim():
    text = b"aag 3 2 0 1 1\n2\n4\n6\n6 4 2\ni0 alpha\no0 f\nc\nnote\n"
    aig = aiger.parse_bytes(text)
    assert aig.trailer == b"i0 alpha\no0 f\nc\nnote\n"
    assert aiger.write_bytes(aig, ascii_format=True) == text


def test_bad_header_reports_offset_zero():
    with pytest.raises(ParseError) as e:
        aiger.parse_bytes(b"agg 1 1 0 0 0\n2\n")
    assert "byte offset 0" in str(e.value)
    assert e.value.offset == 0


def test_latches_rejected_as_unsupported():
    with pytest.raises(UnsupportedFeatureError):
        aiger.parse_bytes(b"aag 2 1 1 0 0\n2\n4 2\n")


def test_header_arithmetic_checked():
    with pytest.raises(ParseError):
        aiger.parse_bytes(b"aag 1 1 0 0 1\n2\n4 2 2\n")  # M < I + A


def test_truncated_binary_varint():
    aig = _compacted(adder(2))
    blob = aiger.write_bytes(aig, ascii_format=False)
    with pytest.raises(ParseError):
        aiger.parse_bytes(blob[:-1])


def test_ascii_and_lhs_must_be_even_and_fresh():
    with pytest.raises(ParseError):
        aiger.parse_bytes(b"aag 3 2 0 1 1\n2\n4\n6\n7 4 2\n")   # odd lhs
    with pytest.raises(ParseError):
        aiger.parse_bytes(b"aag 3 2 0 1 2\n2\n4\n6\n6 4 2\n6 2 4\n")  # redefined


def test_output_must_reference_defined_literal():
    with pytest.raises(ParseError):
        aiger.parse_bytes(b"aag 2 1 0 1 0\n2\n9\n")


def test_non_numeric_field_rejected():
    with pytest.raises(ParseError):
        aiger.parse_bytes(b"aag x 1 0 0 0\n2\n")
