import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import grouped_tal_vardy
from polargen.channel import BmsChannel, degrading_merge, make_channel
from polargen.construction import (
    ORACLE_LIMIT,
    OracleSizeError,
    construct,
    construct_bec_z,
    construct_modified_tal_vardy,
    exact_oracle,
    select_info_set,
    tran,
    transform_pair,
)
from polargen.ratematch import CodeSpec, underlying_vector

DATA = Path(__file__).parent / "data"
HUGE_MU = 10**9


def draw_channel(rng):
    kind = rng.choice(["bec", "bsc", "punctured", "shortened"])
    if kind == "bec":
        return make_channel("bec", float(rng.uniform(0, 1)))
    if kind == "bsc":
        return make_channel("bsc", float(rng.uniform(0, 0.5)))
    return make_channel(kind)


@pytest.mark.parametrize("args,expected", [((1, 1, 8), (1, 2)), ((2, 3, 8), (5, 7)),
                                           ((3, 4, 8), (4, 8))])
def test_tran_examples(args, expected):
    assert tran(*args) == expected


def test_tran_covers_every_index_once_per_level():
    N = 64
    for i in range(1, 7):
        seen = sorted(k for j in range(1, N // 2 + 1) for k in tran(i, j, N))
        assert seen == list(range(1, N + 1))
        for j in range(1, N // 2 + 1):
            k1, k2 = tran(i, j, N)
            assert k2 - k1 == 2 ** (i - 1)


@pytest.mark.parametrize("args", [(0, 1, 8), (4, 1, 8), (1, 0, 8), (1, 5, 8)])
def test_tran_range_checked(args):
    with pytest.raises(ValueError):
        tran(*args)


def test_transform_shortened_pair():
    w0, w1 = transform_pair(make_channel("shortened"), make_channel("shortened"))
    assert w0.stats.bhattacharyya == 0 and w1.stats.bhattacharyya == 0


def test_transform_punctured_pair():
    w0, w1 = transform_pair(make_channel("punctured"), make_channel("punctured"))
    assert w0.stats.capacity == 0 and w1.stats.capacity == 0


def test_transform_bec_half():
    w0, w1 = transform_pair(make_channel("bec", 0.5), make_channel("bec", 0.5))
    assert w0.stats.bhattacharyya == pytest.approx(0.75, abs=1e-15)
    assert w1.stats.bhattacharyya == pytest.approx(0.25, abs=1e-15)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_transform_conservation_and_symmetry(seed):
    rng = np.random.default_rng(seed)
    a, b = draw_channel(rng), draw_channel(rng)
    w0, w1 = transform_pair(a, b)
    for w in (w0, w1):
        # pairing invariant is re-checked by the constructor; drift is tiny
        assert abs(w.pairs.sum() + w.erasure - 1) <= 1e-9
        assert np.all(w.pairs[:, 0] >= w.pairs[:, 1])
    assert w0.stats.capacity + w1.stats.capacity == pytest.approx(
        a.stats.capacity + b.stats.capacity, abs=1e-9)
    w0, w1 = transform_pair(a, a)
    assert w0.stats.capacity <= w1.stats.capacity + 1e-12


def test_bec_z_examples():
    assert construct_bec_z([0.5, 0.5]).values.tolist() == [0.75, 0.25]
    assert construct_bec_z([0.5, 1.0]).values.tolist() == [1.0, 0.5]
    q = construct_bec_z([0.5] * 4)
    assert q.values == pytest.approx([0.9375, 0.5625, 0.4375, 0.0625], abs=1e-15)
    assert q.metric == "bhattacharyya"


def test_bec_z_matches_oracle_n4():
    ex = exact_oracle([make_channel("bec", 0.5)] * 4)
    assert ex.extra["bhattacharyya"] == pytest.approx([0.9375, 0.5625, 0.4375, 0.0625], abs=1e-12)


def test_bec_z_rejects_bad_input():
    with pytest.raises(ValueError):
        construct_bec_z([0.5] * 3)
    with pytest.raises(ValueError):
        construct_bec_z([0.5, 1.5])


def test_position_mapping_is_bit_reversal():
    # distinct channels make every bit channel distinguishable
    chans = [make_channel("bsc", p) for p in (0.01, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35)]
    ex = exact_oracle(chans)
    tv = construct_modified_tal_vardy(chans, HUGE_MU)
    assert np.max(np.abs(ex.values - tv.values)) <= 1e-9


def test_tal_vardy_bsc_n8_matches_oracle():
    w = make_channel("bsc", 0.1)
    tv = construct_modified_tal_vardy([w] * 8, HUGE_MU)
    ex = exact_oracle([w] * 8)
    assert np.max(np.abs(tv.values - ex.values)) <= 1e-9


def test_tal_vardy_punctured_pair():
    q = construct_modified_tal_vardy([make_channel("bec", 0.3), make_channel("punctured")], 256)
    assert q.values == pytest.approx([0.5, 0.15], abs=1e-15)


@pytest.mark.parametrize("N", [2, 8, 64])
def test_tal_vardy_call_count(N):
    q = construct_modified_tal_vardy([make_channel("bsc", 0.1)] * N, 16)
    assert q.approx_calls == N * int(np.log2(N))
    r = construct_modified_tal_vardy([make_channel("bsc", 0.1)] * N, 16, reuse=True)
    assert r.approx_calls == q.approx_calls
    assert r.extra["mergesRun"] < q.approx_calls or N == 2
    assert np.array_equal(r.values, q.values)


def test_golden_bsc_n4():
    g = json.loads((DATA / "bsc01_n4.json").read_text())
    w = BmsChannel.from_dict(g["channel"])
    ex = exact_oracle([w] * 4)
    tv = construct_modified_tal_vardy([w] * 4, HUGE_MU)
    assert ex.values == pytest.approx(g["errorProb"], abs=1e-12)
    assert tv.values == pytest.approx(g["errorProb"], abs=1e-12)
    assert ex.extra["bhattacharyya"] == pytest.approx(g["bhattacharyya"], abs=1e-12)


def test_oracle_two_bec():
    for eps in (0.0, 0.2, 0.7, 1.0):
        ex = exact_oracle([make_channel("bec", eps)] * 2)
        assert ex.extra["bhattacharyya"] == pytest.approx([2 * eps - eps**2, eps**2], abs=1e-15)


def test_oracle_with_shortened_partner():
    w = make_channel("bsc", 0.15)
    ex = exact_oracle([w, make_channel("shortened")])
    caps = ex.extra["capacity"]
    # the second input is known, so both bit channels together carry I(W) + 1
    assert caps[0] + caps[1] == pytest.approx(w.stats.capacity + 1, abs=1e-12)
    assert caps[1] == pytest.approx(1.0, abs=1e-12)
    assert caps[0] == pytest.approx(w.stats.capacity, abs=1e-12)


def test_oracle_size_guard():
    big = degrading_merge(make_channel("bsc", 0.1), 2)
    with pytest.raises(OracleSizeError):
        exact_oracle([big] * 16)
    assert ORACLE_LIMIT == 1 << 24


@pytest.mark.parametrize("N", [2, 4, 8])
def test_capacity_conservation(N):
    rng = np.random.default_rng(N)
    chans = [draw_channel(rng) for _ in range(N)]
    ex = exact_oracle(chans)
    assert ex.extra["capacity"].sum() == pytest.approx(sum(w.stats.capacity for w in chans), abs=1e-6)


def test_finite_mu_is_degraded():
    rng = np.random.default_rng(5)
    for _ in range(10):
        chans = [make_channel("bsc", float(rng.uniform(0.01, 0.4))) for _ in range(8)]
        ex = exact_oracle(chans)
        for mu in (2, 4, 8):
            tv = construct_modified_tal_vardy(chans, mu)
            assert np.all(tv.values >= ex.values - 1e-12)


def test_degradation_preservation():
    rng = np.random.default_rng(9)
    for _ in range(20):
        chans = [draw_channel(rng) for _ in range(8)]
        base = exact_oracle(chans).values
        k = int(rng.integers(8))
        worse = list(chans)
        w = chans[k]
        if w.kind == "bec":
            worse[k] = make_channel("bec", min(1.0, w.param + 0.2))
        elif w.kind == "bsc":
            worse[k] = make_channel("bsc", min(0.5, w.param + 0.1))
        elif w.kind == "shortened":
            worse[k] = make_channel("bec", 0.3)
        else:
            continue
        assert np.all(exact_oracle(worse).values >= base - 1e-12)


@pytest.mark.parametrize("N", [4, 8])
def test_puncture_shorten_ordering_exact(N):
    w = make_channel("bsc", 0.1)
    base = exact_oracle([w] * N).extra["bhattacharyya"]
    for P in range(1, N // 2 + 1):
        for mode, sign in (("puncture", 1), ("shorten", -1)):
            spec = CodeSpec.build(N, N - P, 1, mode)
            z = exact_oracle(underlying_vector(w, spec)).extra["bhattacharyya"]
            assert np.all(sign * (z - base) >= -1e-12)


def test_homogeneous_reduction_matches_grouped_reference():
    for w, mu in ((make_channel("bsc", 0.11), 16), (make_channel("bec", 0.4), 8)):
        for N in (8, 32, 128):
            ref, calls = grouped_tal_vardy(w, N, mu)
            assert calls == 2 * (N - 1)
            q = construct_modified_tal_vardy([w] * N, mu)
            assert np.max(np.abs(q.values - ref)) <= 1e-12
            # same ordering wherever the reference separates two indices
            strictly = ref[:, None] < ref[None, :] - 3e-12
            lhs = np.broadcast_to(q.values[:, None], (N, N))[strictly]
            rhs = np.broadcast_to(q.values[None, :], (N, N))[strictly]
            assert np.all(lhs < rhs)


def test_construct_dispatch():
    q = construct([make_channel("bec", 0.3), make_channel("punctured")] * 2)
    assert q.metric == "bhattacharyya"
    q = construct([make_channel("bsc", 0.1)] * 4, mu=16)
    assert q.metric == "errorProb"


def test_select_info_set_examples():
    from polargen.construction import BitChannelQuality
    q = BitChannelQuality(np.array([0.9375, 0.5625, 0.4375, 0.0625]), "bhattacharyya")
    assert select_info_set(q, 2) == [3, 4]
    assert select_info_set(q, 0) == []
    assert select_info_set(q, 4) == [1, 2, 3, 4]
    assert select_info_set(q, 2, exclude=[4]) == [2, 3]
    with pytest.raises(ValueError):
        select_info_set(q, 5)
    with pytest.raises(ValueError):
        select_info_set(q, -1)


def test_select_ties_to_lower_index():
    from polargen.construction import BitChannelQuality
    q = BitChannelQuality(np.array([0.5, 0.2, 0.2, 0.2]), "errorProb")
    assert select_info_set(q, 2) == [2, 3]


def test_quality_json():
    q = construct_bec_z([0.5] * 4)
    d = q.to_dict([3, 4])
    assert set(d) == {"N", "metric", "mu", "values", "infoSet"}
    json.dumps(d)
