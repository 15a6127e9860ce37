import pytest
from hypothesis import given
from hypothesis import strategies as st

from lfhash.encoding import (
    DEL,
    DONE,
    MAX_ADDRESS,
    MAX_PAYLOAD,
    NULL,
    adr,
    decode,
    default_mix,
    encode,
    identity_mix,
    is_user_value,
    key,
    make_value,
    mark_old,
    oldp,
    payload,
    val,
)

addresses = st.integers(1, MAX_ADDRESS)
payloads = st.integers(0, MAX_PAYLOAD)
values = st.builds(make_value, addresses, payloads)
entries = st.one_of(st.just(NULL), st.just(DEL), values)


def test_reserved_words():
    assert NULL == 0
    assert DEL == 1
    assert DONE == 1 << 63
    assert oldp(DONE) and val(DONE) == NULL
    assert adr(NULL) == 0 and adr(DEL) == 0 and adr(DONE) == 0


def test_make_value_rejects_bad_fields():
    with pytest.raises(ValueError):
        make_value(0, 1)
    with pytest.raises(ValueError):
        make_value(MAX_ADDRESS + 1, 1)
    with pytest.raises(ValueError):
        make_value(1, MAX_PAYLOAD + 1)


@given(addresses, payloads)
def test_fields_round_trip(a, p):
    v = make_value(a, p)
    assert adr(v) == a
    assert payload(v) == p
    assert is_user_value(v)
    assert v not in (NULL, DEL, DONE)


@given(entries)
def test_old_tag_is_idempotent_and_preserves_body(e):
    assert not oldp(e)
    tagged = mark_old(e)
    assert oldp(tagged)
    assert mark_old(tagged) == tagged
    assert val(tagged) == val(e)
    assert adr(tagged) == adr(e)


def test_tagging_del_gives_done():
    assert mark_old(DEL) == DONE


@given(st.one_of(entries, values.map(mark_old), st.just(DONE)))
def test_decode_encode_inverse(e):
    assert encode(decode(e)) == e


@given(st.integers(1, 10_000), st.integers(1, 64))
def test_first_l_probes_are_a_permutation(a, l):
    for mix in (default_mix, identity_mix):
        probes = [key(a, l, n, mix) for n in range(l)]
        assert sorted(probes) == list(range(l))


def test_identity_mixer_is_identity():
    assert [identity_mix(a) for a in (1, 2, 99)] == [1, 2, 99]
