"""Multi-layer DoS attack sequences: budgets, generation, verification.

A channel is any of: node measurement, node actuation, or the undirected
communication link of an edge. Each carries its own frequency/duration
budget and a minimum inter-attempt interval, from which a persistency
bound follows: after any failed transmission attempt, some attempt within
the bound succeeds.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import AttemptSpacingError, BudgetInfeasibleError
from .topology import Topology

# Channel ids: ("meas", i), ("act", i), ("comm", i, j) with i < j.
ChannelId = tuple

_MIN_ATTACK_LEN = 1e-6


@dataclass(frozen=True)
class DosParams:
    """Frequency/duration budget of one channel.

    eta, kappa are the count/time offsets; tau_f, tau_d the inverse
    frequency and duration rates; delta_star the channel's minimum interval
    between consecutive transmission attempts.
    """

    eta: float
    kappa: float
    tau_f: float
    tau_d: float
    delta_star: float

    def __post_init__(self):
        if self.eta < 0 or self.kappa < 0:
            raise ValueError("eta and kappa must be non-negative")
        if self.tau_f <= 0 or self.tau_d <= 0 or self.delta_star <= 0:
            raise ValueError("tau_f, tau_d and delta_star must be positive")

    @property
    def duty_ratio(self) -> float:
        """1/tau_d + delta_star/tau_f; must be < 1 for a persistency bound."""
        return 1.0 / self.tau_d + self.delta_star / self.tau_f

    def with_delta_star(self, delta_star: float) -> "DosParams":
        return DosParams(self.eta, self.kappa, self.tau_f, self.tau_d, delta_star)

    def scaled(self, intensity: float) -> "DosParams":
        """Scale attack intensity: offsets shrink, inverse rates stretch."""
        if intensity <= 0:
            raise ValueError("intensity must be positive")
        return DosParams(
            self.eta * intensity,
            self.kappa * intensity,
            self.tau_f / intensity,
            self.tau_d / intensity,
            self.delta_star,
        )


def podf_bound(p: DosParams) -> float:
    """Worst-case delay until a successful attempt on the channel."""
    phi = p.duty_ratio
    if phi >= 1.0:
        raise BudgetInfeasibleError(
            f"duty ratio {phi:.4f} >= 1 admits no persistency bound"
        )
    return (p.kappa + (p.eta + 1.0) * p.delta_star) / (1.0 - phi)


@dataclass(frozen=True)
class DosSequence:
    """Sorted, disjoint half-open attack windows within [0, horizon)."""

    intervals: tuple[tuple[float, float], ...]
    horizon: float

    def __post_init__(self):
        prev_end = 0.0
        for s, e in self.intervals:
            if not (0.0 <= s < e <= self.horizon):
                raise ValueError(f"interval [{s}, {e}) outside [0, {self.horizon})")
            if s < prev_end:
                raise ValueError("intervals must be sorted and disjoint")
            prev_end = e

    def is_attacked(self, t: float) -> bool:
        idx = bisect_right([s for s, _ in self.intervals], t) - 1
        return idx >= 0 and t < self.intervals[idx][1]

    def attacked_time(self, t1: float, t2: float) -> float:
        """Lebesgue measure of the under-attack subset of [t1, t2)."""
        total = 0.0
        for s, e in self.intervals:
            total += max(0.0, min(e, t2) - max(s, t1))
        return total

    def clipped(self, t1: float, t2: float) -> list[tuple[float, float]]:
        out = []
        for s, e in self.intervals:
            a, b = max(s, t1), min(e, t2)
            if a < b:
                out.append((a, b))
        return out


@dataclass
class VerifyReport:
    ok: bool
    frequency_slack: float
    duration_slack: float
    violations: list[str] = field(default_factory=list)


def verify_sequence(
    s: DosSequence, p: DosParams, t1: float = 0.0, t2: float | None = None
) -> VerifyReport:
    """Check both budget inequalities over every boundary-anchored sub-window.

    Checking windows anchored at transition points suffices: both bound
    gaps are piecewise linear in (t1, t2) with extrema only at interval
    boundaries (unit-tested against dense grids).
    """
    if t2 is None:
        t2 = s.horizon
    if not (t1 < t2 <= s.horizon):
        raise ValueError(f"window [{t1}, {t2}) invalid for horizon {s.horizon}")

    clipped = s.clipped(t1, t2)
    starts = np.array([a for a, _ in clipped], dtype=np.float64)
    ends = np.array([b for _, b in clipped], dtype=np.float64)
    # only genuine off->on transitions count towards the frequency budget
    trans = np.array(
        [a for a, _ in s.intervals if t1 <= a < t2], dtype=np.float64
    )

    tol = 1e-9
    f_slack = float(_kernels.frequency_min_slack(trans, p.eta, p.tau_f))
    d_slack = float(_kernels.duration_min_slack(starts, ends, p.kappa, p.tau_d))
    violations = []
    if f_slack < -tol:
        violations.append(
            f"frequency bound violated: transition count exceeds "
            f"eta + dt/tau_f by {-f_slack:.6g}"
        )
    if d_slack < -tol:
        violations.append(
            f"duration bound violated: attacked time exceeds "
            f"kappa + dt/tau_d by {-d_slack:.6g}"
        )
    return VerifyReport(not violations, f_slack, d_slack, violations)


def _max_new_start(trans: list[float], t_candidate: float, eta: float, tau_f: float) -> float:
    """Earliest start >= t_candidate keeping the frequency budget intact."""
    t = t_candidate
    n = len(trans)
    for idx, s_p in enumerate(trans):
        # pair (p, new): count n - idx + 1 within gap t - s_p
        need = s_p + tau_f * (n - idx + 1 - eta)
        if need > t:
            t = need
    return t


def _max_new_len(
    trans_starts: list[float],
    cum_tail: list[float],
    t_s: float,
    kappa: float,
    tau_d: float,
    horizon: float,
) -> float:
    """Longest window starting at t_s that keeps every duration pair intact."""
    if tau_d <= 1.0:
        return horizon - t_s
    denom = 1.0 - 1.0 / tau_d
    lmax = kappa / denom  # pair (new, new)
    for s_p, acc in zip(trans_starts, cum_tail):
        allowed = (kappa + (t_s - s_p) / tau_d - acc) / denom
        if allowed < lmax:
            lmax = allowed
    return min(lmax, horizon - t_s)


def generate_sequence(p: DosParams, horizon: float, seed: int) -> DosSequence:
    """Pseudo-random attack sequence satisfying the budget by construction.

    Candidate windows are sampled from exponential inter-arrivals, then each
    is shifted/clipped so that every boundary-anchored inequality stays
    satisfied (greedy budget enforcement). Deterministic in (p, horizon, seed).
    """
    phi = p.duty_ratio
    if phi >= 1.0:
        raise BudgetInfeasibleError(
            f"duty ratio {phi:.4f} >= 1: cannot generate a bounded sequence"
        )
    if p.eta < 1.0 or p.kappa <= 0.0:
        # any attack start instantly violates one of the limit inequalities
        return DosSequence((), horizon)

    rng = np.random.default_rng(seed)
    starts: list[float] = []
    ends: list[float] = []
    cum_tail: list[float] = []  # attacked time from start_p to the latest end
    mean_len = p.kappa if p.tau_d <= 1.0 else min(p.kappa, p.tau_d / 4.0)
    t_end = 0.0
    while True:
        t_s = t_end + rng.exponential(p.tau_f)
        if t_s >= horizon:
            break
        t_s = _max_new_start(starts, t_s, p.eta, p.tau_f)
        if t_s >= horizon:
            break
        lmax = _max_new_len(starts, cum_tail, t_s, p.kappa, p.tau_d, horizon)
        length = min(lmax, rng.exponential(mean_len))
        if length < _MIN_ATTACK_LEN:
            t_end = t_s
            continue
        starts.append(t_s)
        ends.append(t_s + length)
        cum_tail = [c + length for c in cum_tail]
        cum_tail.append(length)
        t_end = t_s + length
    return DosSequence(tuple(zip(starts, ends)), horizon)


def worst_case_sequence(p: DosParams, horizon: float) -> DosSequence:
    """Adversarial sequence alternating maximal windows at both budget limits."""
    if p.duty_ratio >= 1.0:
        raise BudgetInfeasibleError("duty ratio >= 1")
    if p.eta < 1.0 or p.kappa <= 0.0:
        return DosSequence((), horizon)
    starts: list[float] = []
    ends: list[float] = []
    cum_tail: list[float] = []
    t_s = 0.0
    while t_s < horizon:
        t_s = _max_new_start(starts, t_s, p.eta, p.tau_f)
        if t_s >= horizon:
            break
        length = _max_new_len(starts, cum_tail, t_s, p.kappa, p.tau_d, horizon)
        if length < _MIN_ATTACK_LEN:
            # duration budget exhausted at this anchor; wait for it to refill
            t_s += max(p.tau_d * _MIN_ATTACK_LEN, 1e-3)
            continue
        starts.append(t_s)
        ends.append(t_s + length)
        cum_tail = [c + length for c in cum_tail]
        cum_tail.append(length)
        t_s = ends[-1]
    return DosSequence(tuple(zip(starts, ends)), horizon)


@dataclass
class WitnessReport:
    max_delay: float
    bound: float
    ok: bool
    n_failed: int
    n_unresolved: int  # failed attempts with no later success in the train


def podf_witness(
    s: DosSequence, p: DosParams, attempt_times: Sequence[float]
) -> WitnessReport:
    """Scan an attempt train and report the worst observed gap to success."""
    attempts = np.asarray(attempt_times, dtype=np.float64)
    if attempts.size > 1:
        gaps = np.diff(attempts)
        if gaps.min() < p.delta_star - 1e-9:
            raise AttemptSpacingError(
                f"attempts spaced {gaps.min():.6g} < delta_star {p.delta_star:.6g}"
            )
    healthy = np.array([not s.is_attacked(float(t)) for t in attempts], dtype=bool)
    delays = _kernels.witness_delays(attempts, healthy)
    unresolved = int(np.sum(delays < 0.0))
    resolved = delays[delays >= 0.0]
    max_delay = float(resolved.max()) if resolved.size else 0.0
    bound = podf_bound(p)
    return WitnessReport(
        max_delay=max_delay,
        bound=bound,
        ok=max_delay <= bound + 1e-9,
        n_failed=int(delays.size),
        n_unresolved=unresolved,
    )


@dataclass
class ChannelSet:
    """One attack sequence plus budget per channel referenced by a topology."""

    sequences: dict[ChannelId, DosSequence]
    params: dict[ChannelId, DosParams]

    def check_complete(self, topo: Topology, per_direction: bool = False) -> None:
        for i in range(topo.node_count):
            for kind in ("meas", "act"):
                if (kind, i) not in self.sequences:
                    raise ValueError(f"missing {kind} channel for node {i}")
        for i, j in topo.edges:
            keys = [("comm", i, j), ("comm", j, i)] if per_direction else [("comm", i, j)]
            for key in keys:
                if key not in self.sequences:
                    raise ValueError(f"missing comm channel {key}")

    def to_dict(self) -> dict:
        out = {}
        for key, seq in sorted(self.sequences.items()):
            p = self.params[key]
            out["/".join(str(k) for k in key)] = {
                "params": {
                    "eta": p.eta,
                    "kappa": p.kappa,
                    "tau_f": p.tau_f,
                    "tau_d": p.tau_d,
                    "delta_star": p.delta_star,
                },
                "horizon": seq.horizon,
                "intervals": [[s, e] for s, e in seq.intervals],
            }
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ChannelSet":
        sequences: dict[ChannelId, DosSequence] = {}
        params: dict[ChannelId, DosParams] = {}
        for name, entry in data.items():
            parts = name.split("/")
            key: ChannelId = (parts[0], *(int(x) for x in parts[1:]))
            pd = entry["params"]
            params[key] = DosParams(
                pd["eta"], pd["kappa"], pd["tau_f"], pd["tau_d"], pd["delta_star"]
            )
            sequences[key] = DosSequence(
                tuple((float(s), float(e)) for s, e in entry["intervals"]),
                float(entry["horizon"]),
            )
        return cls(sequences, params)


def channel_seed(master_seed: int, key: ChannelId) -> int:
    """Stable per-channel seed derived from the master seed."""
    tags = {"meas": 1, "act": 2, "comm": 3}
    entropy = [master_seed, tags[key[0]], *key[1:]]
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


def generate_channel_set(
    topo: Topology,
    meas_params: Sequence[DosParams],
    act_params: Sequence[DosParams],
    comm_params: dict[tuple[int, int], DosParams],
    horizon: float,
    master_seed: int,
) -> ChannelSet:
    """Generate one sequence per channel with deterministically derived seeds."""
    sequences: dict[ChannelId, DosSequence] = {}
    params: dict[ChannelId, DosParams] = {}
    for i in range(topo.node_count):
        for kind, p in (("meas", meas_params[i]), ("act", act_params[i])):
            key = (kind, i)
            params[key] = p
            sequences[key] = generate_sequence(p, horizon, channel_seed(master_seed, key))
    for (i, j), p in sorted(comm_params.items()):
        key = ("comm", i, j)
        params[key] = p
        sequences[key] = generate_sequence(p, horizon, channel_seed(master_seed, key))
    return ChannelSet(sequences, params)
