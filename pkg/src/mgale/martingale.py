"""Dyadic martingale engine: filtration, details, and inequality audits.

The probability space is the 2^J-point grid with uniform measure.  The
filtration F_n, 0 <= n <= J, is generated by the dyadic intervals
[k/2^n, (k+1)/2^n); conditional expectation is block averaging, so
E(.|F_J) is the identity and E(.|F_0) is the mean.  The detail operator
at level n is

    D_n = E(.|F_{n+1}) - E(.|F_n),

and every zero-mean grid function telescopes exactly into its J details.

All inequalities audited here (orthogonality, telescoping Parseval, the
von Bahr-Esseen-Rio bound with constant max(1, sqrt(p-1)), Doob's
maximal bound with constant p/(p-1), the two-sided detail criteria with
K_p = p/(p-1) * max(1, sqrt(p-1)), the Paley-Zygmund lower bound) hold
verbatim on this finite filtered space, so an audit failure is a bug,
never a discretization artifact.  Audits therefore reject rather than
repair bad inputs (non-centered data, broken difference property).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .tails import TailModel
from .torus import GridFunction, _lp_norm_array, lp_norm

__all__ = [
    "AuditReport",
    "DetailSequence",
    "CENTERING_TOL",
    "bounded_deltas",
    "burkholder_ratio",
    "cond_exp",
    "condensation_equivalent",
    "decompose",
    "detail",
    "doob_maximal_audit",
    "doob_audit_batch",
    "k_p",
    "paley_zygmund_audit",
    "random_grid_functions",
    "rio_audit",
    "rio_audit_batch",
    "telescope_check",
    "bounded_moment_audits",
    "detail_criteria",
    "DetailCriteriaResult",
]

#: absolute tolerance below which a grid function counts as centered
CENTERING_TOL = 1e-12


# --------------------------------------------------------------------------
# report container
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class AuditReport:
    """Outcome of a single inequality audit.

    ``passed`` means lhs <= rhs up to the audit's stated numerical
    tolerance (for equality-type audits, |lhs - rhs| within tolerance).
    """

    lhs: float
    rhs: float
    constant: float
    margin: float
    passed: bool
    context: str
    seed: int | None = None

    def to_json(self) -> str:
        return json.dumps(
            {
                "lhs": self.lhs,
                "rhs": self.rhs,
                "constant": self.constant,
                "margin": self.margin,
                "passed": bool(self.passed),
                "context": self.context,
                "seed": self.seed,
            }
        )

    @staticmethod
    def from_json(text: str) -> "AuditReport":
        d = json.loads(text)
        return AuditReport(
            d["lhs"], d["rhs"], d["constant"], d["margin"], d["passed"], d["context"], d.get("seed")
        )


def _bound_report(lhs, rhs, constant, context, seed=None, tol=1e-12) -> AuditReport:
    lhs, rhs = float(lhs), float(rhs)
    scale = max(abs(lhs), abs(rhs), 1.0)
    return AuditReport(lhs, rhs, float(constant), rhs - lhs, lhs <= rhs + tol * scale, context, seed)


def _equality_report(lhs, rhs, context, seed=None, rel_tol=1e-10) -> AuditReport:
    lhs, rhs = float(lhs), float(rhs)
    scale = max(abs(lhs), abs(rhs), 1e-300)
    return AuditReport(lhs, rhs, 1.0, rhs - lhs, abs(lhs - rhs) <= rel_tol * max(scale, 1e-30), context, seed)


def k_p(p: float) -> float:
    """The maximal-inequality constant K_p = p/(p-1) * max(1, sqrt(p-1))."""
    if p <= 1:
        raise ValueError("K_p needs p > 1")
    return p / (p - 1.0) * max(1.0, math.sqrt(p - 1.0))


def _p_prime(p: float) -> float:
    return min(2.0, p)


# --------------------------------------------------------------------------
# conditional expectation and details (array core + GridFunction wrappers)
# --------------------------------------------------------------------------

def _block_average(arr: np.ndarray, n: int, J: int) -> np.ndarray:
    """E(.|F_n) on the last axis of an (..., 2^J) array."""
    if not 0 <= n <= J:
        raise ValueError(f"filtration level {n} outside [0, {J}]")
    if n == J:
        return arr
    shape = arr.shape[:-1]
    blocks = arr.reshape(*shape, 2**n, 2 ** (J - n))
    means = blocks.mean(axis=-1, keepdims=True)
    return np.broadcast_to(means, blocks.shape).reshape(*shape, 2**J)


def cond_exp(f: GridFunction, n: int) -> GridFunction:
    """Conditional expectation onto the level-n dyadic algebra.

    Piecewise-constant block average over each I_{n,k}; idempotent and
    mean preserving; the identity at n = J, the mean at n = 0.
    """
    J = f.resolution_log2
    return GridFunction(J, _block_average(f.samples, n, J), f.value_kind, aliased=f.aliased)


def detail(f: GridFunction, n: int) -> GridFunction:
    """Detail operator D_n f = E(f|F_{n+1}) - E(f|F_n); needs n <= J-1."""
    J = f.resolution_log2
    if not 0 <= n <= J - 1:
        raise ValueError(f"detail level {n} outside [0, {J - 1}]")
    out = _block_average(f.samples, n + 1, J) - _block_average(f.samples, n, J)
    return GridFunction(J, out, f.value_kind, aliased=f.aliased)


def _details_stack(arr: np.ndarray, J: int) -> list[np.ndarray]:
    """All details [D_0 f, ..., D_{J-1} f] of the last axis, one pass."""
    levels = [_block_average(arr, n, J) for n in range(J + 1)]
    return [levels[n + 1] - levels[n] for n in range(J)]


@dataclass(frozen=True)
class DetailSequence:
    """The full martingale decomposition of a centered grid function."""

    base: GridFunction
    details: tuple

    def reconstruct(self) -> np.ndarray:
        total = np.zeros_like(self.base.samples) + self.base.samples.mean()
        for d in self.details:
            total = total + d.samples
        return total


def decompose(f: GridFunction) -> DetailSequence:
    """Decompose a centered f into its details D_0 f .. D_{J-1} f.

    Rejects non-centered input (|mean| > 1e-12) instead of silently
    recentering: the auditors downstream must not mask centering bugs.
    """
    if abs(f.mean()) > CENTERING_TOL:
        raise ValueError(
            f"decompose requires a centered function, |mean| = {abs(f.mean()):.3e}"
        )
    J = f.resolution_log2
    stack = _details_stack(f.samples, J)
    details = tuple(GridFunction(J, d, f.value_kind) for d in stack)
    return DetailSequence(f, details)


def telescope_check(f: GridFunction, N1: int, N2: int, rel_tol: float = 1e-10) -> AuditReport:
    """Audit sum_{n=N1}^{N2} ||D_n f||_2^2 == ||E^{N2+1} f - E^{N1} f||_2^2."""
    J = f.resolution_log2
    if not 0 <= N1 <= N2 <= J - 1:
        raise ValueError(f"need 0 <= N1 <= N2 <= {J - 1}")
    lhs = 0.0
    for n in range(N1, N2 + 1):
        lhs += lp_norm(detail(f, n), 2) ** 2
    diff = _block_average(f.samples, N2 + 1, J) - _block_average(f.samples, N1, J)
    rhs = _lp_norm_array(diff, 2) ** 2
    return _equality_report(lhs, rhs, f"telescoping-parseval[{N1},{N2}]", rel_tol=rel_tol)


# --------------------------------------------------------------------------
# Rio / von Bahr-Esseen and Doob audits
# --------------------------------------------------------------------------

def rio_audit(f: GridFunction, p: float) -> AuditReport:
    """Audit ||f||_p <= max(1, sqrt(p-1)) * (sum_n ||D_n f||_p^p')^(1/p').

    Requires a centered f and p > 1; p' = min(2, p).
    """
    if p <= 1:
        raise ValueError("rio_audit needs p > 1")
    seq = decompose(f)
    pp = _p_prime(p)
    const = max(1.0, math.sqrt(p - 1.0))
    lhs = lp_norm(f, p)
    detail_norms = np.array([lp_norm(d, p) for d in seq.details])
    rhs = const * float(np.sum(detail_norms**pp)) ** (1.0 / pp)
    return _bound_report(lhs, rhs, const, f"rio[p={p}]")


def doob_maximal_audit(
    increments: list[GridFunction],
    p: float,
    levels: list[int] | None = None,
    difference_tol: float = 1e-10,
) -> AuditReport:
    """Audit Doob: ||max_m |S_m|||_p <= p/(p-1) * ||S_last||_p.

    ``increments[m]`` must be a martingale difference for its assigned
    filtration level: cond_exp(increments[m], levels[m]) == 0, with
    strictly increasing levels.  Violations raise.
    """
    if p <= 1:
        raise ValueError("doob_maximal_audit needs p > 1")
    if not increments:
        raise ValueError("need at least one increment")
    J = increments[0].resolution_log2
    if levels is None:
        levels = list(range(len(increments)))
    if sorted(levels) != list(levels) or len(set(levels)) != len(levels):
        raise ValueError("levels must be strictly increasing")
    for inc, lv in zip(increments, levels):
        resid = np.abs(_block_average(inc.samples, min(lv, J), J)).max()
        scale = max(np.abs(inc.samples).max(), 1.0)
        if resid > difference_tol * scale:
            raise ValueError(
                f"increment at level {lv} violates the martingale difference property"
            )
    partial = np.cumsum(np.stack([inc.samples for inc in increments]), axis=0)
    lhs = _lp_norm_array(np.abs(partial).max(axis=0), p)
    const = p / (p - 1.0)
    rhs = const * _lp_norm_array(partial[-1], p)
    return _bound_report(lhs, rhs, const, f"doob[p={p}]")


# --------------------------------------------------------------------------
# two-sided detail criteria (general series)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DetailCriteriaResult:
    """The two criteria sums (over higher and lower order details) plus
    the maximal-inequality audit ||S*_N||_p <= K_p (sum1 + sum2)."""

    higher_sum: float
    lower_sum: float
    audit: AuditReport


def detail_criteria(
    Z: list[GridFunction], levels, p: float, seed: int | None = None
) -> DetailCriteriaResult:
    """Evaluate the two detail-criteria sums for a finite family Z.

    ``levels`` maps each series index n to its filtration level (the
    analysis filtration is A_n = F_{levels[n]}, nondecreasing); indices
    beyond the family are clamped to the grid resolution J, where all
    further details vanish identically, so both sums are finite exactly.
    """
    if p <= 1:
        raise ValueError("detail_criteria needs p > 1")
    if not Z:
        raise ValueError("empty family")
    J = Z[0].resolution_log2
    N = len(Z)
    levels = [int(levels[n]) if not callable(levels) else int(levels(n)) for n in range(N)]
    if any(b < a for a, b in zip(levels, levels[1:])):
        raise ValueError("levels must be nondecreasing")
    for z in Z:
        if abs(z.mean()) > CENTERING_TOL:
            raise ValueError("every Z_n must be centered")

    def lv(j: int) -> int:
        return min(levels[j], J) if j < N else J

    pp = _p_prime(p)
    samples = np.stack([z.samples for z in Z])
    cond = {m: _block_average(samples, m, J) for m in sorted({lv(j) for j in range(N + 1)} | {J})}

    def detail_norm(slot: int, n: int) -> float:
        lo, hi = lv(slot), lv(slot + 1)
        if lo == hi:
            return 0.0
        return float(_lp_norm_array(cond[hi][n] - cond[lo][n], p))

    s1 = 0.0
    for k in range(0, N + 1):
        inner = sum(detail_norm(n + k, n) ** pp for n in range(N) if n + k <= N)
        s1 += inner ** (1.0 / pp) if inner > 0 else 0.0
    s2 = 0.0
    for k in range(1, N + 1):
        inner = sum(detail_norm(n, n + k) ** pp for n in range(N - k))
        s2 += inner ** (1.0 / pp) if inner > 0 else 0.0

    partial = np.cumsum(samples, axis=0)
    smax = np.abs(partial).max(axis=0)
    lhs = float(_lp_norm_array(smax, p))
    rhs = k_p(p) * (s1 + s2)
    audit = _bound_report(lhs, rhs, k_p(p), f"detail-criteria-maximal[p={p}]", seed=seed)
    return DetailCriteriaResult(s1, s2, audit)


def bounded_deltas(Z: list[GridFunction], levels=None) -> tuple[float, float]:
    """Sup-norm criteria constants for uniformly bounded families.

    Delta_1 = sum_l ( sum_k ||Z_k - E^{l+k} Z_k||_inf^2 )^(1/2)
    Delta_2 = sum_l ( sum_{k>=l} ||E^{k+1-l} Z_k||_inf^2 )^(1/2)

    with E^j conditioning on F_{levels[j]} (identity once past J, which
    truncates both sums exactly).
    """
    if not Z:
        raise ValueError("empty family")
    J = Z[0].resolution_log2
    N = len(Z)
    if levels is None:
        levels = list(range(N))

    def lv(j: int) -> int:
        return min(levels[j] if j < N else J, J)

    samples = np.stack([z.samples for z in Z])
    cache: dict[int, np.ndarray] = {}

    def cond(m: int) -> np.ndarray:
        if m not in cache:
            cache[m] = _block_average(samples, m, J)
        return cache[m]

    d1 = 0.0
    for ell in range(0, N + J + 1):
        inner = 0.0
        for k in range(N):
            m = lv(ell + k)
            if m >= J:
                continue
            inner += float(np.abs(samples[k] - cond(m)[k]).max()) ** 2
        if inner == 0.0 and lv(ell) >= J:
            break
        d1 += math.sqrt(inner)
    d2 = 0.0
    for ell in range(0, N):
        inner = 0.0
        for k in range(ell, N):
            m = lv(k + 1 - ell)
            inner += float(np.abs(cond(m)[k]).max()) ** 2
        d2 += math.sqrt(inner)
    return d1, d2


def bounded_moment_audits(
    Z: list[GridFunction], delta1: float, delta2: float, p_list: list[float]
) -> list[AuditReport]:
    """Audit the moment chain ||S*||_p <= 2 K_p (Delta_1 + Delta_2).

    Only the p-th moment bounds are asserted; the exponential moment
    they imply is an infinite-dimensional statement and is reported by
    callers as a Monte Carlo figure, never asserted.
    """
    if not Z:
        raise ValueError("empty family")
    partial = np.cumsum(np.stack([z.samples for z in Z]), axis=0)
    smax = np.abs(partial).max(axis=0)
    delta = delta1 + delta2
    reports = []
    for p in p_list:
        if p < 2:
            raise ValueError("bounded_moment_audits needs p >= 2")
        lhs = float(_lp_norm_array(smax, p))
        rhs = 2.0 * k_p(p) * delta
        reports.append(_bound_report(lhs, rhs, 2.0 * k_p(p), f"bounded-moments[p={p}]"))
    return reports


# --------------------------------------------------------------------------
# condensation and Paley-Zygmund
# --------------------------------------------------------------------------

def burkholder_ratio(f: GridFunction, p: float) -> float:
    """Square-function ratio ||(sum_n |D_n f|^2)^(1/2)||_p / ||f||_p.

    Recorded only: the constant bounding it is not pinned down here, so
    callers may check finiteness and stability under grid refinement
    but must not assert a fixed bound.
    """
    if p <= 1:
        raise ValueError("burkholder_ratio needs p > 1")
    seq = decompose(f)
    square = np.sqrt(sum(np.abs(d.samples) ** 2 for d in seq.details))
    denom = lp_norm(f, p)
    if denom == 0:
        raise ValueError("ratio undefined for the zero function")
    return float(_lp_norm_array(square, p)) / denom


def condensation_equivalent(
    u: np.ndarray, K: float, tail: TailModel
) -> tuple[bool, bool]:
    """Flags (sum u_n converges, sum 2^l u_{2^l} converges) from the model.

    The finite prefix ``u`` is checked against the hypothesis
    u_{n+m} <= K u_n; under that hypothesis the two flags must agree,
    which is asserted here.
    """
    u = np.asarray(u, dtype=np.float64)
    if u.size == 0 or np.any(u <= 0):
        raise ValueError("u must be a nonempty positive sequence")
    if tail is None:
        raise ValueError("a declared tail model is required")
    running_min = np.minimum.accumulate(u)
    hypothesis_ok = bool(np.all(u <= K * running_min + 1e-15))
    plain = tail.series_converges()
    condensed = tail.condensed_converges()
    if hypothesis_ok and plain != condensed:
        raise AssertionError(
            "condensation flags disagree under a valid hypothesis; tail model is inconsistent"
        )
    return plain, condensed


def paley_zygmund_audit(
    values, probabilities, lam: float, q: float, prob_tol: float = 1e-12
) -> AuditReport:
    """Exact check of P(Z >= lam * E Z) >= ((1-lam) E Z / ||Z||_q)^(q/(q-1)).

    Z is the finite nonnegative distribution given by (values, probs).
    The report keeps the uniform orientation lhs <= rhs: lhs is the
    anti-concentration bound, rhs the exact probability it must stay
    under.
    """
    v = np.asarray(values, dtype=np.float64)
    pr = np.asarray(probabilities, dtype=np.float64)
    if np.any(v < 0):
        raise ValueError("Z must be nonnegative")
    if abs(pr.sum() - 1.0) > prob_tol or np.any(pr < 0):
        raise ValueError("probabilities must be nonnegative and sum to 1")
    if not 0 < lam < 1:
        raise ValueError("lambda must lie in (0, 1)")
    if q <= 1:
        raise ValueError("q must be > 1")
    ez = float(v @ pr)
    prob = float(pr[v >= lam * ez - 1e-15].sum())
    znorm = float((pr @ v**q) ** (1.0 / q))
    bound = 0.0 if znorm == 0 else ((1.0 - lam) * ez / znorm) ** (q / (q - 1.0))
    return _bound_report(bound, prob, q / (q - 1.0), f"paley-zygmund[lam={lam},q={q}]")


# --------------------------------------------------------------------------
# randomized audit batches (vectorized; used by the CLI suites and the
# acceptance gate)
# --------------------------------------------------------------------------

def random_grid_functions(
    count: int, J: int, rng: np.random.Generator, family: str = "mixed", degree: int = 64
) -> np.ndarray:
    """(count, 2^J) array of centered real test functions.

    family = "noise" | "trig" | "mixed".  Trig members are random real
    trigonometric polynomials of degree <= ``degree``; noise members are
    iid normals.  All rows are exactly centered.
    """
    n = 2**J
    if family == "noise":
        arr = rng.standard_normal((count, n))
    else:
        deg = min(degree, n // 2 - 1)
        ms = np.arange(1, deg + 1)
        spec = np.zeros((count, n // 2 + 1), dtype=np.complex128)
        spec[:, 1 : deg + 1] = (
            rng.standard_normal((count, deg)) + 1j * rng.standard_normal((count, deg))
        ) / np.sqrt(ms)
        arr = np.fft.irfft(spec, n, axis=1) * (n / 2.0)
        if family == "mixed":
            half = count // 2
            arr[:half] = rng.standard_normal((half, n))
    arr -= arr.mean(axis=1, keepdims=True)
    return arr


def rio_audit_batch(
    cases: int, p_values, J: int, seed: int, family: str = "mixed"
) -> list[AuditReport]:
    """Randomized Rio audits; one report per case, all expected to pass."""
    rng = np.random.default_rng(seed)
    p_values = list(p_values)
    arr = random_grid_functions(cases, J, rng, family)
    stack = _details_stack(arr, J)
    reports = []
    for i in range(cases):
        p = p_values[i % len(p_values)]
        pp = _p_prime(p)
        const = max(1.0, math.sqrt(p - 1.0))
        lhs = _lp_norm_array(arr[i], p)
        dsum = sum(float(_lp_norm_array(s[i], p)) ** pp for s in stack)
        rhs = const * dsum ** (1.0 / pp)
        reports.append(_bound_report(lhs, rhs, const, f"rio[p={p},case={i}]", seed=seed))
    return reports


def doob_audit_batch(
    cases: int, p_values, J: int, seed: int, family: str = "mixed"
) -> list[AuditReport]:
    """Randomized Doob audits on the detail martingale of random f."""
    rng = np.random.default_rng(seed)
    p_values = list(p_values)
    arr = random_grid_functions(cases, J, rng, family)
    stack = _details_stack(arr, J)
    partial = np.cumsum(np.stack(stack), axis=0)  # (J, cases, n)
    smax = np.abs(partial).max(axis=0)
    final = partial[-1]
    reports = []
    for i in range(cases):
        p = p_values[i % len(p_values)]
        const = p / (p - 1.0)
        lhs = _lp_norm_array(smax[i], p)
        rhs = const * _lp_norm_array(final[i], p)
        reports.append(_bound_report(lhs, rhs, const, f"doob[p={p},case={i}]", seed=seed))
    return reports
