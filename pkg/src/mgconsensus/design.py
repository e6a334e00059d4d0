"""Offline parameter design and certification.

Pure functions mapping persistency bounds to certified (eps, rate) choices,
the finite-time convergence bound, and the consensus-set membership test.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .errors import CriterionViolatedError


def global_threshold(phi_meas_max: float, phi_act_max: float, d_max: int) -> float:
    """Uniform sensitivity must exceed 2 * d_max * (phi_meas + 2 phi_act)."""
    return 2.0 * d_max * (phi_meas_max + 2.0 * phi_act_max)


def global_design(
    phi_meas_max: float,
    phi_act_max: float,
    d_max: int,
    eps_margin: float = 2.0,
    rate_margin: float = 1.01,
    eps_floor: float = 0.0,
) -> tuple[float, float]:
    """Uniform (eps, rate) satisfying the network-wide criteria strictly.

    With zero persistency bounds the threshold vanishes and any positive
    sensitivity with rate > 1/2 certifies; eps_floor supplies it.
    """
    if eps_margin <= 1.0 or rate_margin <= 1.0:
        raise ValueError("design margins must exceed 1")
    thr = global_threshold(phi_meas_max, phi_act_max, d_max)
    eps = max(eps_margin * thr, eps_floor)
    if eps <= thr:
        raise CriterionViolatedError(
            "eps_floor required: zero thresholds need a positive sensitivity"
        )
    rate = rate_margin * eps / (2.0 * (eps - thr))
    return eps, rate


def local_threshold(
    phi_meas_i: float, phi_meas_j: float, phi_act_i: float, d_i: int, d_j: int
) -> float:
    """Per-edge sensitivity threshold from that edge's own channel bounds."""
    return d_i * (phi_meas_i + 2.0 * phi_act_i) + d_j * (phi_meas_j + 2.0 * phi_act_i)


def local_design(
    phi_meas_i: float,
    phi_meas_j: float,
    phi_act_i: float,
    d_i: int,
    d_j: int,
    eps_margin: float = 2.0,
    rate_margin: float = 1.01,
    eps_floor: float = 0.0,
) -> tuple[float, float]:
    """Per-edge (eps, rate) satisfying the local criteria strictly."""
    if eps_margin <= 1.0 or rate_margin <= 1.0:
        raise ValueError("design margins must exceed 1")
    thr = local_threshold(phi_meas_i, phi_meas_j, phi_act_i, d_i, d_j)
    eps = max(eps_margin * thr, eps_floor)
    if eps <= thr:
        raise CriterionViolatedError(
            "eps_floor required: zero thresholds need a positive sensitivity"
        )
    rate = rate_margin * eps / (2.0 * (eps - thr))
    return eps, rate


def convergence_bound(
    eps: float,
    rate: float,
    d_max: int,
    d_min: int,
    phi_comm_max: float,
    phi_meas_max: float,
    phi_act_max: float,
    v0: float,
) -> float:
    """Upper bound on the finite consensus time, scaled by the initial V."""
    composite = phi_meas_max + 2.0 * phi_act_max
    decrement = eps * (1.0 - 1.0 / (2.0 * rate)) - 2.0 * d_max * composite
    denom = eps * d_min * decrement
    if denom <= 0.0:
        raise CriterionViolatedError(
            f"stability decrement {decrement:.6g} <= 0; design criteria not met"
        )
    num = 2.0 * eps * (d_max + d_min) + 8.0 * rate * d_max * d_min * (
        phi_comm_max + 2.0 * phi_act_max
    )
    return num / denom * v0


def consensus_set_check(
    states: Sequence[float], eps: float, n: int | None = None
) -> tuple[bool, float]:
    """Whether all pairwise gaps are below delta = eps * (n - 1)."""
    if n is None:
        n = len(states)
    if n < 2:
        raise ValueError("consensus set needs at least two nodes")
    spread = max(states) - min(states)
    return spread < eps * (n - 1), spread


def lyapunov(states: Sequence[float]) -> float:
    """Half squared deviation from the mean; zero iff all states equal."""
    n = len(states)
    mean = sum(states) / n
    return 0.5 * sum((x - mean) ** 2 for x in states)


@dataclass
class DesignCertificate:
    """Outcome of the offline design for one scenario."""

    mode: str                                  # "global" or "local"
    eps: dict                                  # uniform {"all": e} or per-edge
    rate: dict
    phi_meas: dict
    phi_act: dict
    phi_comm: dict
    phi_meas_max: float
    phi_act_max: float
    phi_comm_max: float
    delta: float
    t_star_bound: float | None
    v0: float
    satisfied: bool
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        def _k(d):
            return {("-".join(map(str, k)) if isinstance(k, tuple) else k): v
                    for k, v in sorted(d.items())}

        return {
            "mode": self.mode,
            "eps": _k(self.eps),
            "rate": _k(self.rate),
            "phi_measurement": _k(self.phi_meas),
            "phi_actuation": _k(self.phi_act),
            "phi_communication": _k(self.phi_comm),
            "phi_measurement_max": self.phi_meas_max,
            "phi_actuation_max": self.phi_act_max,
            "phi_communication_max": self.phi_comm_max,
            "phi_composite_meas_act": self.phi_meas_max + 2.0 * self.phi_act_max,
            "phi_composite_comm_act": self.phi_comm_max + 2.0 * self.phi_act_max,
            "delta": self.delta,
            "t_star_bound": self.t_star_bound,
            "v0": self.v0,
            "satisfied": self.satisfied,
            "notes": self.notes,
        }
