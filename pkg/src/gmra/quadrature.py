"""Adaptive Gauss-Legendre integration by explicit-stack bisection.

An interval is accepted once the two half-interval sums agree with the
parent sum to an absolute tolerance; otherwise the left half is pushed on the
stack and the right half replaces the parent.  Integrands may be
vector-valued (returning an array per abscissa); the acceptance test then uses
the largest component difference, so a whole family of related integrals
shares one subdivision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EvaluationError, NonConvergenceError, ParameterError
from .special import QuadratureRule, gauss_legendre


@dataclass(frozen=True)
class AdaptiveConfig:
    tol: float = 1e-14
    rule_order: int = 10
    max_depth: int = 100
    max_intervals: int = 1_000_000

    def __post_init__(self):
        if not self.tol > 0:
            raise ParameterError("tol must be positive")
        if self.rule_order < 2:
            raise ParameterError("rule_order must be at least 2")
        if self.max_depth < 1:
            raise ParameterError("max_depth must be at least 1")
        if self.max_intervals < 1:
            raise ParameterError("max_intervals must be at least 1")

    @property
    def rule(self) -> QuadratureRule:
        return gauss_legendre(self.rule_order)


@dataclass
class IntegrationInfo:
    evaluations: int = 0
    subdivisions: int = 0
    max_depth: int = 0


def _sum(f, a, b, rule: QuadratureRule):
    half = 0.5 * (b - a)
    x = half * rule.nodes + 0.5 * (b + a)
    fx = np.asarray(f(x), dtype=float)
    if not np.all(np.isfinite(fx)):
        bad = np.nonzero(~np.isfinite(fx.reshape(len(x), -1)).all(axis=1))[0][0]
        raise EvaluationError(float(x[bad]), fx[bad])
    # first axis of fx runs over the nodes
    return half * np.tensordot(rule.weights, fx, axes=(0, 0))


def quadrature_sum(f, a, b, rule: QuadratureRule):
    """Gauss rule mapped to [a, b]; f receives the whole node array at once."""
    if not a < b:
        raise ParameterError(f"need a < b, got [{a}, {b}]")
    s = _sum(f, a, b, rule)
    return float(s) if np.ndim(s) == 0 else s


def adaptive_integrate(f, a, b, cfg: AdaptiveConfig | None = None, *, full_output=False):
    """Integrate f over [a, b] to absolute tolerance cfg.tol.

    f is called with an array of abscissae and must return values of shape
    (n,) or (n, ...) for vector-valued integrands.
    """
    cfg = cfg or AdaptiveConfig()
    if not a < b:
        raise ParameterError(f"need a < b, got [{a}, {b}]")
    rule = cfg.rule
    info = IntegrationInfo()

    # stack entries: (left, right, sum over [left, right], depth)
    stack = [(a, b, _sum(f, a, b, rule), 0)]
    info.evaluations = 1
    total = 0.0
    while stack:
        left, right, s, depth = stack[-1]
        c = 0.5 * (left + right)
        s1 = _sum(f, left, c, rule)
        s2 = _sum(f, c, right, rule)
        info.evaluations += 2
        if np.max(np.abs(s1 + s2 - s)) > cfg.tol:
            if depth + 1 > cfg.max_depth or len(stack) + 1 > cfg.max_intervals:
                raise NonConvergenceError(
                    f"adaptive integration did not converge on [{left!r}, {right!r}] "
                    f"(depth {depth}, stack {len(stack)})",
                    interval=(left, right),
                )
            stack[-1] = (c, right, s2, depth + 1)
            stack.append((left, c, s1, depth + 1))
            info.subdivisions += 1
            info.max_depth = max(info.max_depth, depth + 1)
        else:
            total = total + s1 + s2
            stack.pop()
            if info.evaluations > 3 * cfg.max_intervals:
                raise NonConvergenceError("interval budget exhausted", interval=(left, right))
    if np.ndim(total) == 0:
        total = float(total)
    return (total, info) if full_output else total
