"""Range coder: exact roundtrip and overhead bounds."""

import math
import random

import pytest

from forestlearn.rangecoder import MAX_TOTAL, RangeDecoder, RangeEncoder


def roundtrip(steps):
    enc = RangeEncoder()
    ideal = 0.0
    for sym, cum, total in steps:
        enc.encode(cum[sym], cum[sym + 1], total)
        ideal += math.log2(total / (cum[sym + 1] - cum[sym]))
    data = enc.finish()
    dec = RangeDecoder(data)
    for sym, cum, total in steps:
        target = dec.decode_target(total)
        got = 0
        while cum[got + 1] <= target:
            got += 1
        assert got == sym
        dec.advance(cum[got], cum[got + 1], total)
    return data, ideal


def test_empty_stream():
    enc = RangeEncoder()
    assert enc.finish() == b""


def test_random_streams_roundtrip_with_small_overhead():
    rng = random.Random(1)
    worst = 0.0
    for _ in range(500):
        steps = []
        for _ in range(rng.randint(0, 500)):
            k = rng.randint(1, 8)
            freqs = [rng.randint(1, 5000) for _ in range(k)]
            cum = [0]
            for f in freqs:
                cum.append(cum[-1] + f)
            steps.append((rng.randrange(k), cum, cum[-1]))
        data, ideal = roundtrip(steps)
        worst = max(worst, len(data) * 8 - ideal)
    assert worst <= 64.0


def test_certainty_symbols_cost_nothing():
    steps = [(0, [0, 1], 1)] * 2000
    data, ideal = roundtrip(steps)
    assert ideal == 0.0
    assert len(data) <= 1


def test_long_binary_stream_tracks_entropy():
    rng = random.Random(2)
    steps = []
    c = [1, 1]
    for _ in range(20_000):
        sym = rng.randrange(2)
        steps.append((sym, [0, c[0], c[0] + c[1]], c[0] + c[1]))
        c[sym] += 1
    data, ideal = roundtrip(steps)
    assert len(data) * 8 <= ideal + 96


def test_extreme_skew():
    total = MAX_TOTAL
    steps = [(0, [0, total - 1, total], total)] * 3000
    steps.append((1, [0, total - 1, total], total))
    data, ideal = roundtrip(steps)
    assert len(data) * 8 <= ideal + 64


def test_total_cap_enforced():
    enc = RangeEncoder()
    with pytest.raises(ValueError):
        enc.encode(0, MAX_TOTAL + 1, MAX_TOTAL + 1)
