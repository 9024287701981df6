"""The alpha-weighted loss over (edit distance, path probability) and the search score."""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["LossParams", "LossDomainError", "loss", "f_score"]


class LossDomainError(ValueError):
    """Arguments outside the loss function's domain."""


@dataclass(frozen=True)
class LossParams:
    """User-chosen balance factor: 1 weighs only edit distance, 0 only probability."""

    alpha: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise LossDomainError(f"alpha must lie in [0, 1], got {self.alpha}")


def _alpha_of(params: LossParams | float) -> float:
    if isinstance(params, LossParams):
        return params.alpha
    return LossParams(float(params)).alpha


def loss(d: float, log_p: float, params: LossParams | float) -> float:
    """Combined loss of edit distance ``d`` and a probability given as log10.

    Both factors use base-10 logarithms; the probability is taken in log
    form so callers can accumulate products without underflow.  A log
    probability of -inf is a sentinel for "unreachable" and maps to +inf.
    """
    alpha = _alpha_of(params)
    if d < 0:
        raise LossDomainError(f"edit distance must be non-negative, got {d}")
    if log_p > 0:
        raise LossDomainError(f"log10 probability must be <= 0, got {log_p}")
    if math.isinf(log_p):
        return math.inf
    d_term = math.log10(d + 1.0)
    p_term = 1.0 - log_p
    if alpha == 1.0:
        return d_term
    if alpha == 0.0:
        return p_term
    return d_term**alpha * p_term ** (1.0 - alpha)


def f_score(
    g_d: float,
    h_d: float,
    log_g_p: float,
    log_h_p: float,
    params: LossParams | float,
) -> float:
    """Search score: the loss of the accumulated plus estimated remaining quantities.

    ``h_d`` may be fractional (LP relaxation); an infeasible probability
    estimate (``log_h_p = -inf``) yields +inf so such nodes order last.
    The probability estimate may carry a round-off guard of up to 1e-6 above
    zero; the combined log is clamped back to zero in that band.
    """
    if h_d < 0:
        raise LossDomainError(f"h_d must be non-negative, got {h_d}")
    combined = log_g_p + log_h_p
    if 0.0 < combined <= 1e-6:
        combined = 0.0
    return loss(g_d + h_d, combined, params)
