"""Explicit tail models for octave-indexed sequences.

A finite grid can only exhibit finitely many octaves of any quantity
(modulus values, transfer-operator norms, detail norms).  Every
criterion in this package that asks about an infinite series therefore
takes an explicit :class:`TailModel` describing how the sequence is
assumed to continue, and the convergence decision is made from that
model, never implicitly.

Supported shapes for u_n (n the octave or term index):

  geometric :  u_n ~ C * r**n
  power     :  u_n ~ C * n**(-s)
  power_log :  u_n ~ C * n**(-s) * (log n)**(-t)

The decision rules are the standard integral / condensation tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["TailModel", "fit_tail_model"]

_KINDS = ("geometric", "power", "power_log")


@dataclass(frozen=True)
class TailModel:
    """Declared asymptotic shape of a positive sequence."""

    kind: str
    amplitude: float
    exponent: float
    log_exponent: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown tail kind {self.kind!r}")
        if self.amplitude < 0:
            raise ValueError("amplitude must be nonnegative")

    def value(self, n):
        """Model value at index n (vectorized)."""
        n = np.asarray(n, dtype=np.float64)
        if self.kind == "geometric":
            return self.amplitude * self.exponent**n
        ln = np.log(np.maximum(n, math.e))
        out = self.amplitude * n ** (-self.exponent)
        if self.kind == "power_log":
            out = out * ln ** (-self.log_exponent)
        return out

    def series_converges(self, weight_exponent: float = 0.0) -> bool:
        """Does sum_n u_n * n**(-weight_exponent) converge under the model?"""
        if self.amplitude == 0.0:
            return True
        if self.kind == "geometric":
            return self.exponent < 1.0
        s = self.exponent + weight_exponent
        if s > 1.0:
            return True
        if s < 1.0:
            return False
        t = self.log_exponent if self.kind == "power_log" else 0.0
        return t > 1.0

    def condensed_converges(self) -> bool:
        """Does sum_l 2**l * u_{2**l} converge under the model?

        For every supported shape this agrees with series_converges(),
        which is exactly the Cauchy condensation equivalence.
        """
        if self.amplitude == 0.0:
            return True
        if self.kind == "geometric":
            return self.exponent < 1.0
        # 2**l * (2**l)**(-s) * (l log 2)**(-t)
        s, t = self.exponent, (self.log_exponent if self.kind == "power_log" else 0.0)
        if s != 1.0:
            return s > 1.0
        return t > 1.0

    def tail_sum(self, start: int, weight_exponent: float = 0.0, rel_tol: float = 1e-12) -> float:
        """Numeric value of sum_{n >= start} u_n * n**(-weight_exponent).

        Returns math.inf when the model diverges.  Convergent sums are
        accumulated in blocks with an integral-comparison stopping rule.
        """
        if not self.series_converges(weight_exponent):
            return math.inf
        if self.amplitude == 0.0:
            return 0.0
        if self.kind == "geometric" and weight_exponent == 0.0:
            r = self.exponent
            return self.amplitude * r**start / (1.0 - r)
        total = 0.0
        n0 = max(start, 1)
        block = 1024
        while True:
            ns = np.arange(n0, n0 + block, dtype=np.float64)
            vals = self.value(ns) * ns ** (-weight_exponent)
            total += float(vals.sum())
            # comparison tail bound: terms are eventually decreasing
            bound = float(vals[-1]) * (n0 + block)
            if self.kind == "geometric":
                bound = float(vals[-1]) / (1.0 - self.exponent)
            if bound <= rel_tol * max(total, 1e-300):
                return total
            n0 += block
            block = min(2 * block, 1 << 22)
            if n0 > 1 << 40:  # defensive; unreachable for sane models
                return total


def fit_tail_model(ns, values, kind: str = "auto") -> TailModel:
    """Least-squares fit of a TailModel on (ns, values), log domain.

    ``kind="auto"`` tries all three shapes and keeps the smallest
    residual.  Values must be strictly positive.
    """
    ns = np.asarray(ns, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if ns.size < 2:
        raise ValueError("need at least two points to fit a tail model")
    if np.any(values <= 0):
        raise ValueError("tail fitting requires strictly positive values")
    logv = np.log(values)

    def _fit(kind):
        if kind == "geometric":
            cols = [np.ones_like(ns), ns]
        elif kind == "power":
            cols = [np.ones_like(ns), -np.log(ns)]
        else:
            cols = [np.ones_like(ns), -np.log(ns), -np.log(np.log(np.maximum(ns, math.e)))]
        a = np.stack(cols, axis=1)
        coef, *_ = np.linalg.lstsq(a, logv, rcond=None)
        resid = float(np.abs(a @ coef - logv).max())
        if kind == "geometric":
            return TailModel("geometric", math.exp(coef[0]), math.exp(coef[1])), resid
        if kind == "power":
            return TailModel("power", math.exp(coef[0]), coef[1]), resid
        return TailModel("power_log", math.exp(coef[0]), coef[1], coef[2]), resid

    if kind != "auto":
        return _fit(kind)[0]
    fits = [_fit(k) for k in _KINDS]
    return min(fits, key=lambda fr: fr[1])[0]
