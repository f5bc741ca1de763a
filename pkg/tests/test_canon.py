"""Canonical JSON: frozen byte examples plus encode/decode properties."""

from __future__ import annotations

import hashlib

import pytest
from hypothesis import given, strategies as st

from tcgw.canon import canonical_json, canonical_loads, digest_json, sha256
from tcgw.errors import UnsupportedValue


def test_keys_sorted():
    assert canonical_json({"b": 1, "a": 2}) == b'{"a":2,"b":1}'


def test_hand_canonicalized_nested_object():
    value = {"sensor": {"ok": True, "id": "t-1"}, "count": 3, "note": 'a"b\n'}
    expected = b'{"count":3,"note":"a\\"b\\n","sensor":{"id":"t-1","ok":true}}'
    assert canonical_json(value) == expected


def test_no_whitespace_and_null_forms():
    assert canonical_json({"x": None, "y": [1, True, "z"]}) == b'{"x":null,"y":[1,true,"z"]}'


def test_non_ascii_stays_literal():
    assert canonical_json({"crop": "pomé"}) == '{"crop":"pomé"}'.encode("utf-8")


def test_decimals_travel_as_strings():
    assert canonical_json({"v": "4.20"}) == b'{"v":"4.20"}'


@pytest.mark.parametrize("bad", [1.5, float("nan"), float("inf"), {"x": 0.1}, [object()]])
def test_rejects_unsupported_values(bad):
    with pytest.raises(UnsupportedValue):
        canonical_json(bad)


def test_rejects_non_string_keys():
    with pytest.raises(UnsupportedValue):
        canonical_json({1: "x"})


def test_loads_rejects_fraction_and_nonfinite_literals():
    with pytest.raises(UnsupportedValue):
        canonical_loads(b'{"x":1.5}')
    with pytest.raises(UnsupportedValue):
        canonical_loads(b'{"x":NaN}')


def test_digest_is_sha256_of_bytes():
    value = {"a": 1}
    assert digest_json(value) == hashlib.sha256(canonical_json(value)).digest()
    assert sha256(b"") == hashlib.sha256(b"").digest()


json_values = st.recursive(
    st.none()
    | st.booleans()
    | st.integers(min_value=-(10 ** 12), max_value=10 ** 12)
    | st.text(max_size=20),
    lambda children: st.lists(children, max_size=4)
    | st.dictionaries(st.text(max_size=8), children, max_size=4),
    max_leaves=20,
)


@given(json_values)
def test_roundtrip_idempotence(value):
    encoded = canonical_json(value)
    assert canonical_json(canonical_loads(encoded)) == encoded


@given(st.dictionaries(st.text(min_size=1, max_size=8),
                       st.integers(min_value=0, max_value=99), min_size=2, max_size=6))
def test_insertion_order_is_irrelevant(mapping):
    reversed_build = dict(reversed(list(mapping.items())))
    assert canonical_json(mapping) == canonical_json(reversed_build)
