from hypothesis import given
from hypothesis import strategies as st

from lfhash.encoding import NULL, make_value
from lfhash.spec_oracle import ReferenceMap, apply_op, spec_assign, spec_delete, spec_find, spec_insert


def test_pure_forms():
    v, w = make_value(3, 1), make_value(3, 2)
    X0 = {}
    X1, ok = spec_insert(X0, v)
    assert ok and X1 == {3: v} and X0 == {}
    X2, ok = spec_insert(X1, w)
    assert not ok and X2 == X1
    assert spec_find(X1, 3) == v and spec_find(X1, 4) == NULL
    assert spec_assign(X1, w) == {3: w}
    X3, ok = spec_delete(X1, 3)
    assert ok and X3 == {}
    _, ok = spec_delete(X3, 3)
    assert not ok


# An independent sequential model: a dict of address -> payload.
def _shadow(model: dict, op: str, a: int, pay: int):
    if op == "find":
        return make_value(a, model[a]) if a in model else NULL
    if op == "delete":
        return model.pop(a, None) is not None
    if op == "insert":
        if a in model:
            return False
        model[a] = pay
        return True
    model[a] = pay
    return None


ops = st.lists(
    st.tuples(
        st.sampled_from(["find", "delete", "insert", "assign"]),
        st.integers(1, 6),
        st.integers(0, 5),
    ),
    max_size=60,
)


@given(ops)
def test_reference_map_matches_independent_model(script):
    ref, shadow = ReferenceMap(), {}
    for op, a, pay in script:
        arg = a if op in ("find", "delete") else make_value(a, pay)
        assert getattr(ref, op)(arg) == _shadow(shadow, op, a, pay)
    assert ref.contents() == {a: make_value(a, p) for a, p in shadow.items()}


def test_unknown_op():
    import pytest

    with pytest.raises(ValueError):
        apply_op({}, "upsert", 1)
