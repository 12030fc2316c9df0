"""Worst-case finishing times by interval propagation.

Cycle demand is adversarial within each distribution's coverage (a
histogram bin covers its whole cycle range), so the set of possible
finish times of a task forms a union of intervals. Within one step of a
scheduling function the finish time is affine in the start time, so
suprema occur at interval endpoints, evaluated as one-sided limits where
a step boundary is approached from below, or at cycle-range extremes.
The per-task worst finish can come from a run where an earlier task used
fewer cycles than its worst case: ending just before a step boundary can
leave the successor on the slower side of its function.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .core import CapExceededError, FrameSystem, StrategySet

__all__ = ["WorstCaseReport", "worst_finish_oracle"]

MAX_INTERVALS = 100_000


@dataclass(frozen=True)
class WorstCaseReport:
    """Per-task worst finish times and the cycle choices reaching them.

    ``witness[i]`` lists the cycle demands of tasks 0..i whose run finishes
    at (or arbitrarily close to) ``tau[i]``. The entries may be interior
    bin values: worst cases are not generally all-worst-case runs.
    """

    tau: tuple[float, ...]
    witness: tuple[tuple[float, ...], ...]


@dataclass(frozen=True)
class _Contribution:
    finish_lo: float
    finish_hi: float
    run_fidx: int
    cost: float
    dom_lo: float
    dom_hi: float
    freq: float
    cyc_lo: float
    cyc_hi: float


def _pieces(points) -> list[tuple[float, float, float]]:
    out = []
    for k, (t, f) in enumerate(points):
        t_next = points[k + 1][0] if k + 1 < len(points) else math.inf
        out.append((t, t_next, f))
    return out


def _merge(contribs: list[_Contribution]) -> list[tuple[float, float, int]]:
    by_freq: dict[int, list[tuple[float, float]]] = {}
    for c in contribs:
        by_freq.setdefault(c.run_fidx, []).append((c.finish_lo, c.finish_hi))
    merged: list[tuple[float, float, int]] = []
    for fidx in sorted(by_freq):
        ivs = sorted(by_freq[fidx])
        cur_lo, cur_hi = ivs[0]
        for lo, hi in ivs[1:]:
            if lo <= cur_hi:
                cur_hi = max(cur_hi, hi)
            else:
                merged.append((cur_lo, cur_hi, fidx))
                cur_lo, cur_hi = lo, hi
        merged.append((cur_lo, cur_hi, fidx))
    return merged


def worst_finish_oracle(
    sys: FrameSystem,
    strategy: StrategySet,
    overheads: bool = False,
    max_intervals: int = MAX_INTERVALS,
) -> WorstCaseReport:
    """Exact per-task worst finish times under expedient execution."""
    if len(strategy) != sys.n_tasks:
        raise ValueError("strategy length does not match task count")
    cpu = sys.cpu
    pieces_by_task = []
    for fn in strategy.funcs:
        pieces_by_task.append(
            [(a, b, cpu.index_of(f)) for a, b, f in _pieces(fn.points)]
        )
    # Decision times for the next task: finish of the previous one, tagged
    # with the frequency it ran at (switch cost depends on it).
    reach: list[tuple[float, float, int | None]] = [(0.0, 0.0, None)]
    taus: list[float] = []
    contribs_by_task: list[list[_Contribution]] = []
    for i, task in enumerate(sys.tasks):
        ranges = task.dist.ranges()
        contribs: list[_Contribution] = []
        for rlo, rhi, prev_idx in reach:
            for a, b, fidx in pieces_by_task[i]:
                dom_lo = max(rlo, a)
                dom_hi = min(rhi, b)
                if dom_lo > dom_hi or dom_lo >= b:
                    continue
                if overheads and prev_idx is not None:
                    if fidx != prev_idx:
                        cost = cpu.switch_penalty[prev_idx][fidx]
                    else:
                        cost = cpu.same_speed_switch[fidx]
                else:
                    cost = 0.0
                f = cpu.freqs[fidx]
                for clo, chi in ranges:
                    contribs.append(
                        _Contribution(
                            finish_lo=dom_lo + cost + clo / f,
                            finish_hi=dom_hi + cost + chi / f,
                            run_fidx=fidx,
                            cost=cost,
                            dom_lo=dom_lo,
                            dom_hi=dom_hi,
                            freq=f,
                            cyc_lo=clo,
                            cyc_hi=chi,
                        )
                    )
        if len(contribs) > max_intervals:
            raise CapExceededError("reachable interval count exceeds cap")
        taus.append(max(c.finish_hi for c in contribs))
        contribs_by_task.append(contribs)
        reach = _merge(contribs)
    witness = tuple(
        _reconstruct(contribs_by_task, i, taus[i]) for i in range(sys.n_tasks)
    )
    return WorstCaseReport(tuple(taus), witness)


def _reconstruct(
    contribs_by_task: list[list[_Contribution]], i: int, target: float
) -> tuple[float, ...]:
    """Walk a worst finish back to the cycle choices that produce it."""
    chain = [0.0] * (i + 1)
    for j in range(i, -1, -1):
        c = _containing(contribs_by_task[j], target)
        theta = target - c.cost - c.cyc_hi / c.freq
        theta = min(max(theta, c.dom_lo), c.dom_hi)
        cyc = (target - theta - c.cost) * c.freq
        chain[j] = min(max(cyc, c.cyc_lo), c.cyc_hi)
        target = theta
    return tuple(chain)


def _containing(contribs: list[_Contribution], target: float) -> _Contribution:
    scale = max(abs(target), 1.0)
    best = None
    best_slack = -math.inf
    for c in contribs:
        slack = min(target - c.finish_lo, c.finish_hi - target)
        if slack > best_slack:
            best_slack = slack
            best = c
    if best is None or best_slack < -1e-9 * scale:
        raise RuntimeError("witness reconstruction lost the target interval")
    return best
