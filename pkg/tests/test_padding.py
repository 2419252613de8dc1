import pytest

from agentsim.election import exploration_schedule, pad_id, schedule_rounds


def test_pad_length_formula():
    for ident in range(1, 65):
        bits = format(ident, "b")
        p = pad_id(bits)
        b = len(bits)
        assert p.b == b
        assert len(p) == b + 2 * b * b
        assert p.bits.startswith(bits)
        assert p.bits[b:] == "10" * (b * b)


def test_pad_rejects_bad_encodings():
    with pytest.raises(ValueError):
        pad_id("")
    with pytest.raises(ValueError):
        pad_id("0101")


def test_schedule_maps_bits_to_blocks():
    p = pad_id("101")
    sched = exploration_schedule(p, delta=3)
    assert sched[:3] == ["sweep", "stay", "sweep"]
    assert all(sched[3 + 2 * k] == "sweep" and sched[4 + 2 * k] == "stay"
               for k in range(9))
    assert len(sched) == len(p.bits)
    assert schedule_rounds(p, 3) == 2 * 3 * len(p.bits)
    with pytest.raises(ValueError):
        exploration_schedule(p, 0)


def _gap(shorter, longer):
    """Index of the first block where the two padded schedules differ,

    treating positions past the shorter schedule's end as 'stay'."""
    a, b = shorter.bits, longer.bits
    ext = a + "0" * (len(b) - len(a))
    for i, (x, y) in enumerate(zip(ext, b)):
        if x != y:
            return i
    return None


def test_distinct_lengths_diverge_early():
    # any two ids with different bit lengths disagree within the shorter
    # id's padded span, so neither can shadow the other for a full schedule
    for b in range(2, 65):
        for d in range(1, b):
            short = pad_id("1" * d)
            long_ = pad_id("1" + "0" * (b - 1))
            i = _gap(short, long_)
            assert i is not None
            assert i < len(short.bits)


def test_equal_ids_never_diverge():
    p = pad_id("1011")
    assert _gap(p, pad_id("1011")) is None


@pytest.mark.parametrize("delta", [1, 2, 4])
def test_distinct_ids_diverge_within_bound(delta):
    ids = list(range(1, 64))
    pads = {i: pad_id(format(i, "b")) for i in ids}
    for i in ids:
        for j in ids:
            if i >= j:
                continue
            a, b = pads[i], pads[j]
            short, long_ = (a, b) if len(a) <= len(b) else (b, a)
            k = _gap(short, long_)
            assert k is not None, (i, j)
            # divergence block starts strictly inside the longer schedule
            assert 2 * delta * k < 2 * delta * len(long_.bits)
