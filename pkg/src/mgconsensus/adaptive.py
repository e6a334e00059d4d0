"""Online self-adaptation of edge sensitivity and clock rate.

After every successful communication attempt the edge measures how stale
its data actually was (own measurement age, neighbour data age, actuation
delay of the previous command) and re-tunes (eps, rate) to the observed
delays instead of the offline worst case.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import MissingTimestampError


@dataclass
class LedgerEntry:
    """Timestamps of one trigger k of a directed edge."""

    k: int
    trigger_time: float          # communication attempt time
    own_stamp: float             # stamp of the local data used
    nbr_stamp: float             # stamp of the neighbour data used
    actuated_time: float | None = None   # successful actuation time, once known
    t_act_estimate: float = 0.0  # running estimate of the actuation delay
    superseded: bool = False     # a newer command replaced this one unactuated

    @property
    def own_delay(self) -> float:
        return self.trigger_time - self.own_stamp

    @property
    def nbr_delay(self) -> float:
        return self.trigger_time - self.nbr_stamp

    @property
    def actuation_delay(self) -> float:
        if self.actuated_time is None:
            raise MissingTimestampError(f"trigger {self.k} not yet actuated")
        return self.actuated_time - self.trigger_time


@dataclass
class TimestampLedger:
    """Per-edge history of triggers and their delays."""

    entries: list[LedgerEntry] = field(default_factory=list)

    def open_entry(self, trigger_time: float, own_stamp: float, nbr_stamp: float) -> LedgerEntry:
        entry = LedgerEntry(len(self.entries), trigger_time, own_stamp, nbr_stamp)
        self.entries.append(entry)
        return entry

    @property
    def last(self) -> LedgerEntry:
        if not self.entries:
            raise MissingTimestampError("ledger is empty")
        return self.entries[-1]


@dataclass(frozen=True)
class AdaptiveParams:
    """Result of one adaptation step."""

    gamma: float
    eps: float
    rate: float


def delay_aggregate(
    own_delay: float, nbr_delay: float, act_delay: float, d_i: int, d_j: int
) -> float:
    """Degree-weighted sum of the observed delays driving adaptation."""
    if min(own_delay, nbr_delay, act_delay) < 0.0:
        raise MissingTimestampError("delays must be non-negative")
    return d_i * (own_delay + act_delay) + d_j * (nbr_delay + act_delay)


def adapt_params(
    gamma: float, alpha: float, beta: float, eps_floor: float
) -> tuple[float, float]:
    """Pick (eps, rate) strictly inside the adaptation inequalities.

    alpha > 1 margins eps above gamma, beta > 1 margins the rate; gamma = 0
    degenerates continuously to rate = beta / 2 (> 1/2 as required).
    """
    if alpha <= 1.0 or beta <= 1.0:
        raise ValueError("margins alpha and beta must exceed 1")
    if eps_floor <= 0.0:
        raise ValueError("eps_floor must be positive")
    eps = max(eps_floor, alpha * gamma)
    rate = beta * eps / (2.0 * (eps - gamma))
    return eps, rate


def scaled_input(u_ternary: float, theta: float, rate: float, phi_act: float) -> float:
    """Shrink the edge input by the worst-case actuation-delay share.

    With inter-trigger span theta/rate, the applied input u * span/(span+phi)
    contributes the same displacement as the ideal ternary pulse would under
    the worst admissible actuation delay.
    """
    if phi_act < 0.0:
        raise ValueError("phi_act must be non-negative")
    if u_ternary == 0.0:
        return 0.0
    span = theta / rate
    return u_ternary * span / (span + phi_act)


def actuation_estimate(trigger_time: float, failed_attempt_time: float, delta_star_act: float) -> float:
    """Updated actuation-delay estimate after a failed attempt.

    The next attempt fires delta_star after the failure, so by the final
    failed attempt the estimate equals the true delay.
    """
    return failed_attempt_time + delta_star_act - trigger_time
