"""
Cycle-stepped behavioural model of the L-parallel folded polar encoder and its
pruned variant.

Datapath
--------
Source bits enter ``L`` per cycle in natural order (cycle ``t`` carries
``u[tL : tL + L]``), so a frame takes ``T = N / L`` cycles.  The encoder
computes ``c = u F^{(x)n}`` butterfly by butterfly and the coded word is
``x[bitrev(k)] = c[k]``.

* ``log2 L`` in-block stages: a lane permutation bringing the butterfly
  partners onto adjacent lanes, then ``L/2`` XOR-or-PASS (XP) units
  (``top <- top ^ bottom``, ``bottom <- bottom``).  Purely combinational.
* ``log2 T`` commutator stages, delay ``d = 1, 2, ..., T/2``.  Each lane
  pair has a delay-switch-delay commutator (``d`` registers on the bottom
  input, ``d`` on the top output) that swaps cycle bit ``log2 d`` with the
  pair bit, followed by ``L/2`` XP units.

That is ``(L/2) log2 N`` XP units and ``N - L`` registers; the first output
block leaves in the same cycle as the last input block arrives, so the
first-in to first-out latency is ``N / L`` cycles.

Pruning
-------
When the first ``C`` source bits are frozen, the first ``z = C // L`` input
blocks are all zero.  The pruned encoder never feeds them: each frame starts
at its block ``z`` with the registers holding that frame's (all-zero) state,
so frames enter every ``T - z = ceil((N - C) / L)`` cycles.  Each frame is
modelled as its own register context stepping through the shared datapath.
The last ``z + 1`` output blocks of a frame are emitted together in the
frame's final output cycle through a combinational bypass.

Physical cost is measured, not assumed: a symbolic run labels every value
with its source-bit support, and wherever two frames need the same register
or XP unit for data that is not known to be zero, an extra register or
gate is charged.  Extra registers holding identical labels are shared.  The
bypass is charged one XOR per live XOR it evaluates.  The closed-form counts
are available from :meth:`FoldedSchedule.table_counts` for comparison.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .bits import bit_reversal_permutation, log2_exact


def leading_frozen_count(info_set, N):
    """Number of consecutive frozen positions at the start of ``u`` (1-based info set)."""
    if not len(info_set):
        return int(N)
    lo = min(int(i) for i in info_set)
    if not 1 <= lo <= N or max(int(i) for i in info_set) > N:
        raise ValueError("info set indices must lie in 1..N")
    return lo - 1


@dataclass
class CycleReport:
    latency_cycles: int
    cycles_per_frame: int
    throughput_bits_per_cycle: float
    xor_gate_count: int
    register_count: int
    measured_throughput: float | None = None
    frames: int = 0

    def to_dict(self):
        return {
            "latencyCycles": self.latency_cycles,
            "cyclesPerFrame": self.cycles_per_frame,
            "throughputBitsPerCycle": self.throughput_bits_per_cycle,
            "measuredThroughput": self.measured_throughput,
            "xorGateCount": self.xor_gate_count,
            "registerCount": self.register_count,
            "frames": self.frames,
        }


@dataclass
class FoldedSchedule:
    N: int
    L: int
    pruned: bool
    C: int
    stages: list
    latency_cycles: int
    register_count: int
    xor_gate_count: int
    output_order: np.ndarray = field(repr=False)
    overhead: dict = field(default_factory=dict)

    @property
    def blocks(self):
        return self.N // self.L

    @property
    def skipped_blocks(self):
        return self.C // self.L if self.pruned else 0

    @property
    def cycles_per_frame(self):
        return self.blocks - self.skipped_blocks

    def table_counts(self):
        """Closed-form XOR and register counts quoted for this variant."""
        n = log2_exact(self.N)
        if self.pruned:
            return {"xorGateCount": (self.L // 2) * (n + self.C), "registerCount": self.N - self.L + 2}
        return {"xorGateCount": (self.L // 2) * n, "registerCount": self.N - self.L}

    @property
    def coalesced_blocks(self):
        """Output blocks emitted together in a frame's last output cycle."""
        return self.skipped_blocks + 1

    def to_dict(self):
        return {
            "N": self.N,
            "L": self.L,
            "pruned": self.pruned,
            "C": self.C,
            "stages": self.stages,
            "latencyCycles": self.latency_cycles,
            "cyclesPerFrame": self.cycles_per_frame,
            "registerCount": self.register_count,
            "xorGateCount": self.xor_gate_count,
            "overhead": self.overhead,
            "formula": self.table_counts(),
        }


def _datapath_stages(N, L):
    a = log2_exact(L)
    b = log2_exact(N) - a
    stages = []
    lane = np.arange(L)
    for i in range(a):
        # swap lane bits 0 and i
        b0 = lane & 1
        bi = (lane >> i) & 1
        perm = (lane & ~((1 << i) | 1)) | (b0 << i) | bi
        stages.append({"kind": "xp", "name": f"XP{i + 1}", "perm": perm.tolist()})
    for j in range(b):
        stages.append({
            "kind": "commutator",
            "name": f"S{2 << j}",
            "delay": 1 << j,
            "offset": (1 << j) - 1,  # cycle at which frame 0 reaches this stage
        })
    return stages


class _Context:
    """Register state of one frame (or, unpruned, of the whole stream)."""

    def __init__(self, stages, L, t0, dtype, zero):
        self.stages = stages
        self.L = L
        self.t = t0
        self.dtype = dtype
        self.zero = zero
        self.lines = []
        for st in stages:
            if st["kind"] == "commutator":
                d = st["delay"]
                bot = np.empty((L // 2, d), dtype=dtype)
                top = np.empty((L // 2, d), dtype=dtype)
                bot[...] = zero
                top[...] = zero
                self.lines.append((bot, top))
            else:
                self.lines.append(None)

    def step(self, x, probe=None):
        """Advance one cycle with input block ``x``; return the output block.

        ``probe(stage_index, kind, unit, a, b)`` is told about every register
        write (``kind='reg'``) and XP evaluation (``kind='xp'``).
        """
        t = self.t
        x = np.asarray(x, dtype=self.dtype)
        for s, st in enumerate(self.stages):
            if st["kind"] == "xp":
                x = x[st["perm"]]
            else:
                d = st["delay"]
                j = d.bit_length() - 1
                bot_line, top_line = self.lines[s]
                slot = t % d
                top, bot = x[0::2], x[1::2]
                bot_delayed = bot_line[:, slot].copy()
                bot_line[:, slot] = bot
                if ((t - st["offset"]) >> j) & 1:
                    top_path, bot_out = bot_delayed, top
                else:
                    top_path, bot_out = top, bot_delayed
                top_out = top_line[:, slot].copy()
                top_line[:, slot] = top_path
                if probe is not None:
                    probe(s, "reg", ("bot", slot), bot, None)
                    probe(s, "reg", ("top", slot), top_path, None)
                x = np.empty(self.L, dtype=self.dtype)
                x[0::2] = top_out
                x[1::2] = bot_out
            top, bot = x[0::2], x[1::2]
            if probe is not None:
                probe(s, "xp", None, top, bot)
            x = x.copy()
            x[0::2] = top ^ bot
        self.t += 1
        return x

    def snapshot(self):
        out = []
        for st, lines in zip(self.stages, self.lines):
            if lines is not None:
                bot, top = lines
                out.append((st["name"], np.concatenate([bot.ravel(), top.ravel()])))
        return out


def _output_order(N, L, stages):
    """Map stream position (block * L + lane) to 0-based coded index."""
    T = N // L
    ctx = _Context(stages, L, 0, object, 0)
    labels = np.array([1 << k for k in range(N)], dtype=object)
    blocks = []
    for t in range(2 * T - 1):
        blk = labels[t * L:(t + 1) * L] if t < T else np.zeros(L, dtype=object)
        out = ctx.step(blk)
        if t >= T - 1:
            blocks.append(out)
    stream = np.concatenate(blocks)
    # c_k is the XOR of u_j over all j whose bit pattern contains k
    idx = np.arange(N)
    col = {}
    for k in range(N):
        sup = np.flatnonzero((idx & k) == k)
        col[sum(1 << int(j) for j in sup)] = k
    n = log2_exact(N)
    rev = bit_reversal_permutation(n)
    order = np.empty(N, dtype=np.int64)
    for pos, lab in enumerate(stream):
        order[pos] = rev[col[int(lab)]]
    return order


def build_schedule(N, L, pruned=False, C=0):
    """Assemble the folded encoder for length ``N`` and parallelism ``L``."""
    n = log2_exact(N)
    log2_exact(L)
    if not 2 <= L <= N:
        raise ValueError(f"need 2 <= L <= N, got L={L}, N={N}")
    C = int(C) if pruned else 0
    if pruned and not 0 <= C < N:
        raise ValueError(f"need 0 <= C < N, got C={C}")
    stages = _datapath_stages(N, L)
    base_regs = N - L
    base_xor = (L // 2) * n
    T = N // L
    z = C // L
    sched = FoldedSchedule(
        N=N, L=L, pruned=bool(pruned), C=C, stages=stages,
        latency_cycles=T - z, register_count=base_regs, xor_gate_count=base_xor,
        output_order=_output_order(N, L, stages),
    )
    if pruned and z > 0:
        over = _measure_overhead(sched)
        sched.overhead = over
        sched.register_count = base_regs + over["extraRegisters"]
        sched.xor_gate_count = base_xor + over["extraXpUnits"] + over["bypassXors"]
    else:
        sched.overhead = {"extraRegisters": 0, "extraRegistersUnshared": 0,
                          "extraXpUnits": 0, "bypassXors": 0}
    return sched


class _Engine:
    """Runs frames through a schedule in real cycles."""

    def __init__(self, sched, dtype=np.uint8, zero=0, live=None):
        self.s = sched
        self.dtype = dtype
        self.zero = zero
        self.live = live
        self.reg_use = {}   # (stage, line, pair, real entry) -> [live labels]
        self.xp_use = {}    # real cycle -> {(stage, pair): n_live}
        self.bypass_xors = 0

    def _probe_for(self, real_cycle, ctx_offset, in_flush):
        live = self.live

        def probe(s, kind, unit, a, b):
            if live is None:
                return
            if kind == "reg":
                if in_flush:
                    return
                line, _ = unit
                for m, v in enumerate(a):
                    if live(v):
                        key = (s, line, m, real_cycle)
                        self.reg_use.setdefault(key, []).append(int(v))
            else:
                for m, (p, q) in enumerate(zip(a, b)):
                    if live(p) and live(q):
                        if in_flush:
                            self.bypass_xors += 1
                        else:
                            key = (s, m)
                            cyc = self.xp_use.setdefault(real_cycle, {})
                            cyc[key] = cyc.get(key, 0) + 1
        return probe

    def run(self, frames, trace=None):
        s = self.s
        N, L = s.N, s.L
        T = N // L
        z = s.skipped_blocks
        Tp = T - z
        F = len(frames)
        outputs = np.zeros((F, N), dtype=frames.dtype if F else self.dtype)
        emit = []  # (real cycle, frame, first block, n blocks)
        first_in = 1
        if not s.pruned or z == 0:
            ctx = _Context(s.stages, L, 0, self.dtype, self.zero)
            total = F * T + T - 1
            for v in range(total):
                real = v + 1
                f_in, b_in = divmod(v, T)
                if f_in < F:
                    blk = frames[f_in, b_in * L:(b_in + 1) * L]
                else:
                    blk = np.full(L, self.zero, dtype=self.dtype)
                out = ctx.step(blk, self._probe_for(real, 0, False))
                if v >= T - 1:
                    f_out, b_out = divmod(v - (T - 1), T)
                    if f_out < F:
                        outputs[f_out, b_out * L:(b_out + 1) * L] = out
                        emit.append((real, f_out, b_out, 1))
                if trace is not None:
                    _trace_rows(trace, real, [(f_in if f_in < F else -1, ctx)])
        else:
            active = []
            real = 0
            last = (F - 1) * Tp + Tp + Tp - 1 if F else 0
            for real in range(1, last + 1):
                f_new, r = divmod(real - 1, Tp)
                if r == 0 and f_new < F:
                    active.append((f_new, _Context(s.stages, L, z, self.dtype, self.zero)))
                still = []
                for f, ctx in active:
                    v = ctx.t
                    if v < T:
                        blk = frames[f, v * L:(v + 1) * L]
                    else:
                        blk = np.full(L, self.zero, dtype=self.dtype)
                    out = ctx.step(blk, self._probe_for(real, f, False))
                    if v >= T - 1:
                        b_out = v - (T - 1)
                        outputs[f, b_out * L:(b_out + 1) * L] = out
                        n_out = 1
                        if b_out == Tp - 1:
                            # coalesce: remaining blocks through the bypass
                            probe = self._probe_for(real, f, True)
                            for b_rest in range(b_out + 1, T):
                                o = ctx.step(np.full(L, self.zero, dtype=self.dtype), probe)
                                outputs[f, b_rest * L:(b_rest + 1) * L] = o
                                n_out += 1
                        emit.append((real, f, b_out, n_out))
                        if b_out == Tp - 1:
                            continue
                    still.append((f, ctx))
                if trace is not None:
                    _trace_rows(trace, real, active)
                active = still
        # stream order -> coded order
        x = np.zeros_like(outputs)
        x[:, s.output_order] = outputs
        return x, emit, first_in


def _trace_rows(trace, cycle, contexts):
    for f, ctx in contexts:
        for name, regs in ctx.snapshot():
            trace.append((cycle, f, name, "".join(str(int(v)) for v in regs)))


def _measure_overhead(sched, frames=4):
    """Symbolic steady-state run charging shared-resource conflicts."""
    N, C = sched.N, sched.C
    labels = np.empty((frames, N), dtype=object)
    for f in range(frames):
        for k in range(N):
            labels[f, k] = (1 << k) if k >= C else 0
    eng = _Engine(sched, dtype=object, zero=0, live=lambda v: (int(v) >> C) != 0)
    eng.run(labels)

    # register conflicts: live values that entered the same line slot in the
    # same cycle as another frame's; values with equal labels share a register
    raw, shared = {}, {}
    delays = {i: st["delay"] for i, st in enumerate(sched.stages) if st["kind"] == "commutator"}
    for (s, line, m, entry), labs in eng.reg_use.items():
        for r in range(entry, entry + delays[s]):
            raw[r] = raw.get(r, 0) + len(labs) - 1
            shared.setdefault(r, set()).update(labs[1:])
    extra_raw = max(raw.values(), default=0)
    extra_regs = max((len(v) for v in shared.values()), default=0)
    extra_xp = max((sum(max(0, c - 1) for c in cyc.values()) for cyc in eng.xp_use.values()),
                   default=0)
    bypass = eng.bypass_xors // frames
    return {"extraRegisters": int(extra_regs), "extraRegistersUnshared": int(extra_raw),
            "extraXpUnits": int(extra_xp), "bypassXors": int(bypass)}


def simulate(schedule: FoldedSchedule, frames, trace=False):
    """Push ``frames`` (shape (F, N) of bits) back to back through the encoder.

    Returns ``(x, report, run)`` where ``x`` holds the coded words in natural
    coded order, ``report`` a :class:`CycleReport` measured from the run and
    ``run`` a dict with the emission log and, if requested, the trace rows.
    """
    frames = np.atleast_2d(np.asarray(frames, dtype=np.uint8))
    N = schedule.N
    if frames.shape[-1] != N:
        raise ValueError(f"frames must have length {N}")
    if schedule.pruned and schedule.C and np.any(frames[:, :schedule.C]):
        raise ValueError(f"pruned encoder requires the first C={schedule.C} bits to be zero")
    rows = [] if trace else None
    eng = _Engine(schedule)
    x, emit, first_in = eng.run(frames, trace=rows)
    F = len(frames)
    report = CycleReport(
        latency_cycles=0,
        cycles_per_frame=schedule.cycles_per_frame,
        throughput_bits_per_cycle=N / schedule.cycles_per_frame,
        xor_gate_count=schedule.xor_gate_count,
        register_count=schedule.register_count,
        frames=F,
    )
    if emit:
        first_out = min(c for c, f, _, _ in emit if f == 0)
        report.latency_cycles = first_out - first_in + 1
        start = min(c for c, _, _, _ in emit)
        end = max(c for c, _, _, _ in emit)
        report.measured_throughput = F * N / (end - start + 1)
    return x, report, {"emit": emit, "trace": rows}


def trace_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["cycle", "frame", "stage", "registers"])
    w.writerows(rows)
    return buf.getvalue()


def report_json(schedule, report):
    d = report.to_dict()
    d.update({"N": schedule.N, "L": schedule.L, "pruned": schedule.pruned, "C": schedule.C,
              "overhead": schedule.overhead, "formula": schedule.table_counts()})
    return json.dumps(d, indent=2)
