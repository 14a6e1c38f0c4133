import json
import math

import numpy as np
import pytest

from polargen.codec import encode
from polargen.folded import (
    build_schedule,
    leading_frozen_count,
    report_json,
    simulate,
    trace_csv,
)

CONFIGS = [(N, L) for N in (16, 64, 256, 1024) for L in (4, 8, 32) if L <= N]


def _frames(rng, n, N, C=0):
    u = rng.integers(0, 2, (n, N), dtype=np.uint8)
    u[:, :C] = 0
    return u


def test_leading_frozen_count():
    assert leading_frozen_count([1, 5, 6], 8) == 0
    assert leading_frozen_count([4, 7], 8) == 3
    assert leading_frozen_count([], 8) == 8
    with pytest.raises(ValueError):
        leading_frozen_count([0, 3], 8)


@pytest.mark.parametrize("N,L", CONFIGS)
def test_unpruned_equivalence_and_timing(N, L):
    rng = np.random.default_rng(N * 100 + L)
    s = build_schedule(N, L)
    u = _frames(rng, 1000, N)
    x, rep, _ = simulate(s, u)
    assert np.array_equal(x, encode(u))
    assert rep.latency_cycles == N // L == s.latency_cycles
    assert s.register_count == N - L
    assert s.xor_gate_count == (L // 2) * int(math.log2(N))
    assert s.table_counts() == {"xorGateCount": s.xor_gate_count, "registerCount": s.register_count}


@pytest.mark.parametrize("N,L", CONFIGS)
def test_pruned_equivalence_and_timing(N, L):
    rng = np.random.default_rng(N * 100 + L + 1)
    for C in sorted({1, L - 1, L, 3 * L + 1, N // 3, N // 2 + L // 2} - {0}):
        if C >= N:
            continue
        s = build_schedule(N, L, pruned=True, C=C)
        u = _frames(rng, 1000 if C == N // 3 else 100, N, C)
        x, rep, _ = simulate(s, u)
        assert np.array_equal(x, encode(u)), C
        expect = math.ceil((N - C) / L)
        assert rep.latency_cycles == expect == s.latency_cycles
        assert rep.throughput_bits_per_cycle == N / expect


@pytest.mark.parametrize("N,L,C", [(16, 4, 4), (256, 32, 95), (1024, 32, 342), (64, 8, 20)])
def test_steady_state_throughput(N, L, C):
    rng = np.random.default_rng(0)
    for pruned in (False, True):
        s = build_schedule(N, L, pruned=pruned, C=C)
        _, rep, _ = simulate(s, _frames(rng, 100, N, C))
        target = N / math.ceil((N - C) / L) if pruned else L
        assert rep.measured_throughput == pytest.approx(target, rel=1e-2)


def test_small_case_cycle_counts():
    assert build_schedule(16, 4).latency_cycles == 4
    assert build_schedule(16, 4, pruned=True, C=4).latency_cycles == 3
    assert build_schedule(256, 32).latency_cycles == 8
    assert build_schedule(256, 32, pruned=True, C=95).latency_cycles == 6
    assert build_schedule(1024, 32, pruned=True, C=342).latency_cycles == 22


def test_back_to_back_frames_overlap():
    # (16,4) pruned: frame 2 enters while frame 1 is still being emitted
    s = build_schedule(16, 4, pruned=True, C=4)
    rng = np.random.default_rng(1)
    _, _, run = simulate(s, _frames(rng, 3, 16, 4))
    emits = {}
    for cycle, f, blk, n in run["emit"]:
        emits.setdefault(f, []).append((cycle, blk, n))
    assert emits[0] == [(3, 0, 1), (4, 1, 1), (5, 2, 2)]
    assert emits[1][0][0] == 6
    assert sum(n for _, _, n in emits[0]) == 4


def test_pruned_register_overhead_small_case():
    s = build_schedule(16, 4, pruned=True, C=4)
    # four extra raw registers, shared down to N - L + 2
    assert s.overhead["extraRegistersUnshared"] == 4
    assert s.register_count == 16 - 4 + 2 == s.table_counts()["registerCount"]


@pytest.mark.parametrize("N,L,C", [(16, 4, 4), (256, 32, 95), (1024, 32, 342)])
def test_pruned_unshared_registers_match_block_padding(N, L, C):
    s = build_schedule(N, L, pruned=True, C=C)
    assert s.overhead["extraRegistersUnshared"] == (C // L) * L


def test_zero_frames():
    for pruned, C in ((False, 0), (True, 5)):
        s = build_schedule(16, 4, pruned=pruned, C=C)
        x, rep, _ = simulate(s, np.zeros((3, 16), dtype=np.uint8))
        assert not x.any()


def test_pruned_rejects_nonzero_prefix():
    s = build_schedule(16, 4, pruned=True, C=4)
    u = np.zeros((1, 16), dtype=np.uint8)
    u[0, 2] = 1
    with pytest.raises(ValueError):
        simulate(s, u)


@pytest.mark.parametrize("kw", [dict(N=16, L=32), dict(N=16, L=1), dict(N=12, L=4),
                                dict(N=16, L=4, pruned=True, C=16)])
def test_schedule_argument_checks(kw):
    with pytest.raises(ValueError):
        build_schedule(**kw)


def test_stage_structure():
    s = build_schedule(16, 4)
    kinds = [st["kind"] for st in s.stages]
    assert kinds == ["xp", "xp", "commutator", "commutator"]
    assert [st["delay"] for st in s.stages if st["kind"] == "commutator"] == [1, 2]
    assert sum(2 * st["delay"] * (s.L // 2) for st in s.stages if st["kind"] == "commutator") == 12


def test_trace_and_report_outputs():
    s = build_schedule(16, 4, pruned=True, C=4)
    _, rep, run = simulate(s, np.ones((2, 16), dtype=np.uint8) * np.r_[[0] * 4, [1] * 12],
                           trace=True)
    text = trace_csv(run["trace"])
    assert text.splitlines()[0] == "cycle,frame,stage,registers"
    assert len(text.splitlines()) > 4
    d = json.loads(report_json(s, rep))
    assert d["latencyCycles"] == 3 and d["formula"]["registerCount"] == 14
