"""L^p modulus of continuity on the dyadic grid.

omega_p(delta, f) = sup_{0 <= h <= delta} ||f(. + h) - f||_p, with the
sup taken over grid shifts h = t/2^J only (translations are grid exact,
see torus).  The computed values are therefore certified lower bounds
of the continuum modulus that converge as J grows; this keeps
interpolation error out of every inequality audit built on top.

The factor-2 dyadic approximation bound

    ||f - E(f|F_n)||_p <= 2 * omega_p(2^-n, f)

holds verbatim for the grid modulus (the block-average proof only ever
compares f against its translates by 0 <= t < 2^(J-n) ticks), so
:func:`dyadic_approx_audit` is a universal audit: a failure is a bug.

Summability criteria over infinite octave ranges take an explicit
:class:`~mgale.tails.TailModel`; nothing about infinite tails is ever
decided implicitly from a finite profile.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .martingale import AuditReport, _block_average, _bound_report
from .tails import TailModel, fit_tail_model
from .torus import FourierFunction, GridFunction, _lp_norm_array

__all__ = [
    "ModulusProfile",
    "criterion_sqrt_n",
    "dyadic_approx_audit",
    "dyadic_approx_audit_all",
    "fit_profile_tail",
    "fourier_modulus_l2",
    "modulus_profile",
    "shift_norm_curve",
]


@dataclass(frozen=True)
class ModulusProfile:
    """omega_p(2^-n, f) for n = 0..J, computed at grid resolution J."""

    p: float
    values: np.ndarray
    source_resolution: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        if v.shape != (self.source_resolution + 1,):
            raise ValueError("profile must hold one value per n = 0..J")

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("n,delta,omega_p\n")
        for n, v in enumerate(self.values):
            buf.write(f"{n},{2.0 ** (-n)!r},{float(v)!r}\n")
        return buf.getvalue()


def _circular_corr(g: np.ndarray, h: np.ndarray) -> np.ndarray:
    """c[t] = sum_k g[(k + t) mod N] h[k] for real g, h, via one FFT."""
    return np.fft.irfft(np.fft.rfft(g) * np.conj(np.fft.rfft(h)), g.shape[-1])


def shift_norm_curve(
    samples: np.ndarray, p_values, max_shift: int | None = None, chunk: int = 256
) -> dict:
    """||tau_t f - f||_p for every shift t = 0..max_shift, per p.

    p = 2 always, and p = 4 for real data, go through O(N log N)
    circular correlations (the fourth power expands into correlations
    of f, f^2, f^3).  Remaining p values share one chunked pass over
    the (shift, sample) difference matrix.
    """
    s = np.asarray(samples)
    n = s.shape[-1]
    if max_shift is None:
        max_shift = n
    p_values = list(p_values)
    curves = {p: np.zeros(max_shift + 1) for p in p_values}
    ts_all = np.arange(max_shift + 1) % n
    remaining = []
    for p in p_values:
        if p == 2:
            spec = np.fft.fft(s)
            acorr = np.fft.ifft(np.abs(spec) ** 2).real / n
            sq = 2.0 * acorr[0] - 2.0 * acorr
            curves[2] = np.sqrt(np.maximum(sq[ts_all], 0.0))
        elif p == 4 and not np.iscomplexobj(s):
            s2, s3 = s * s, s * s * s
            m4 = float((s2 * s2).sum())
            c31 = _circular_corr(s3, s)
            c13 = _circular_corr(s, s3)
            c22 = _circular_corr(s2, s2)
            fourth = (2.0 * m4 - 4.0 * (c31 + c13) + 6.0 * c22) / n
            curves[4] = np.maximum(fourth[ts_all], 0.0) ** 0.25
        else:
            remaining.append(p)
    if not remaining:
        return curves
    ext = np.concatenate([s, s])
    base = np.arange(n)
    for lo in range(0, max_shift + 1, chunk):
        ts = np.arange(lo, min(lo + chunk, max_shift + 1))
        gathered = ext[(ts % n)[:, None] + base[None, :]]
        a = np.abs(gathered - s[None, :])
        for p in remaining:
            if p == math.inf:
                vals = a.max(axis=1)
            elif p == 1:
                vals = a.mean(axis=1)
            elif p == 1.5:
                vals = (a * np.sqrt(a)).mean(axis=1) ** (1 / 1.5)
            elif p == 4:
                sq = np.square(a)
                vals = (sq * sq).mean(axis=1) ** 0.25
            else:
                vals = np.power(a, p).mean(axis=1) ** (1.0 / p)
            curves[p][ts] = vals
    return curves


def modulus_profile(f: GridFunction, p) -> ModulusProfile:
    """Grid modulus omega_p(2^-n, f) for every octave n = 0..J.

    values[n] = max over shifts 0 <= t <= 2^(J-n) of ||tau_t f - f||_p;
    the full shift scan is done once and shared across octaves via a
    running maximum, so the profile is exact for the grid and
    non-increasing in n by construction.
    """
    if p != math.inf and p < 1:
        raise ValueError("p must satisfy p >= 1 or p == inf")
    J = f.resolution_log2
    curve = shift_norm_curve(f.samples, [p])[p]
    cummax = np.maximum.accumulate(curve)
    values = np.array([cummax[2 ** (J - n)] for n in range(J + 1)])
    return ModulusProfile(p, values, J)


def dyadic_approx_audit(f: GridFunction, p, n: int) -> AuditReport:
    """Audit ||f - E(f|F_n)||_p <= 2 * omega_p(2^-n, f)."""
    J = f.resolution_log2
    if not 0 <= n <= J:
        raise ValueError(f"level {n} outside [0, {J}]")
    lhs = _lp_norm_array(f.samples - _block_average(f.samples, n, J), p)
    curve = shift_norm_curve(f.samples, [p], max_shift=2 ** (J - n))[p]
    rhs = 2.0 * curve.max()
    return _bound_report(lhs, rhs, 2.0, f"dyadic-approx[p={p},n={n}]")


def dyadic_approx_audit_all(f: GridFunction, p, levels=None) -> list[AuditReport]:
    """Factor-2 audits for every requested level from one shift scan."""
    J = f.resolution_log2
    if levels is None:
        levels = range(J + 1)
    curve = shift_norm_curve(f.samples, [p])[p]
    cummax = np.maximum.accumulate(curve)
    reports = []
    for n in levels:
        lhs = _lp_norm_array(f.samples - _block_average(f.samples, n, J), p)
        rhs = 2.0 * cummax[2 ** (J - n)]
        reports.append(_bound_report(lhs, rhs, 2.0, f"dyadic-approx[p={p},n={n}]"))
    return reports


def fit_profile_tail(profile: ModulusProfile, octaves: int = 4, kind: str = "auto") -> TailModel:
    """Least-squares tail model from the last ``octaves`` octaves."""
    J = profile.source_resolution
    ns = np.arange(J - octaves + 1, J + 1)
    vals = profile.values[ns]
    if np.any(vals <= 0):
        return TailModel("geometric", 0.0, 0.5)
    return fit_tail_model(ns, vals, kind)


def criterion_sqrt_n(
    profile: ModulusProfile, p: float, tail: TailModel | None = None
) -> float:
    """Evaluate sum_{n >= 1} omega_p(2^-n, f) / n^(1/p).

    The finite part comes from the profile; the infinite part from the
    declared tail model (+inf when the model diverges).  Without a
    model the partial sum is returned only if it has visibly
    stabilized, else a ValueError demands an explicit model.
    """
    J = profile.source_resolution
    ns = np.arange(1, J + 1)
    terms = profile.values[1:] / ns ** (1.0 / p)
    partial = float(terms.sum())
    if tail is None:
        if partial > 0 and float(terms[-3:].sum()) > 1e-3 * partial:
            raise ValueError(
                "partial sums have not stabilized; pass an explicit tail model"
            )
        return partial
    if not tail.series_converges(weight_exponent=1.0 / p):
        return math.inf
    return partial + tail.tail_sum(J + 1, weight_exponent=1.0 / p)


def fourier_modulus_l2(
    f: FourierFunction, deltas, h_points: int = 4096
) -> np.ndarray:
    """Exact-in-modes L2 modulus of a finite Fourier sum.

    ||tau_h f - f||_2^2 = sum_m 4 |c_m|^2 sin^2(pi m h) by Parseval, so
    the modulus only needs a sup over h, taken here on an h_points grid
    of each [0, delta].  No spatial rendering is involved, which keeps
    high-frequency (lacunary) modes honest where a 2^J grid would alias
    them away.
    """
    if f.max_frequency >= 2**52:
        raise ValueError(
            "frequencies beyond float range; compute the modulus on a "
            "truncated generator and model the removed tail explicitly"
        )
    ms = np.array(f.frequencies, dtype=np.float64)
    w = np.array([4.0 * abs(f.coeffs[int(m)]) ** 2 for m in ms])
    deltas = np.asarray(list(deltas), dtype=np.float64)
    out = np.empty(deltas.shape)
    for i, d in enumerate(deltas):
        hs = np.linspace(0.0, d, h_points + 1)
        sq = np.zeros_like(hs)
        for lo in range(0, ms.size, 512):
            hi = lo + 512
            sq += (w[lo:hi] * np.square(np.sin(np.pi * np.outer(hs, ms[lo:hi])))).sum(axis=1)
        out[i] = math.sqrt(sq.max())
    return out
