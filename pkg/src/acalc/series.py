"""Numerical series over an algebra: summation, convergence tests, Cauchy products."""
from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np
from numpy.typing import NDArray

from .algebra import AlgebraSpec, Element, enorm
from .errors import AlgebraMismatch, NonFiniteTerm

DIVERGENCE_GUARD = 1e12
DEFAULT_MAX_TERMS = 10_000
VERDICT_MARGIN = 0.02
# log-slope change between early and late probe halves that marks super-geometric behaviour
TREND_THRESHOLD = 0.2


def default_max_terms() -> int:
    """Global truncation cap; ``ACALC_MAX_TERMS`` overrides the built-in 10000."""
    raw = os.environ.get("ACALC_MAX_TERMS")
    if raw:
        return max(1, int(raw))
    return DEFAULT_MAX_TERMS


class Status(enum.Enum):
    CONVERGED = "Converged"
    DIVERGED = "Diverged"
    INCONCLUSIVE = "Inconclusive"

    @property
    def code(self) -> str:
        return self.value[0]


class Verdict(enum.Enum):
    CONVERGES = "Converges"
    DIVERGES = "Diverges"
    DIVERGES_PROBE_LIMITED = "Diverges (probe-limited)"
    DIVERGES_IN_NORM = "DivergesInNorm"
    INCONCLUSIVE = "Inconclusive"

    @property
    def diverges(self) -> bool:
        return self in (Verdict.DIVERGES, Verdict.DIVERGES_PROBE_LIMITED, Verdict.DIVERGES_IN_NORM)


class TermStream:
    """A deterministic sequence ``n -> a_n`` (0-based) of algebra elements.

    Terms are memoized, so an expensive ``term`` is evaluated once per index.
    """

    def __init__(self, algebra: AlgebraSpec, term: Callable[[int], Element], max_terms: int | None = None):
        self.algebra = algebra
        self._term = term
        self.max_terms = default_max_terms() if max_terms is None else max_terms
        self._cache: list[NDArray[np.float64]] = []

    def coords(self, n: int) -> NDArray[np.float64]:
        while len(self._cache) <= n:
            k = len(self._cache)
            t = self._term(k)
            if isinstance(t, Element):
                if not t.algebra.same_as(self.algebra):
                    raise AlgebraMismatch(f"term {k} lives in {t.algebra!r}")
                c = t.coords
            else:
                c = np.asarray(t, dtype=np.float64)
            if not np.all(np.isfinite(c)):
                raise NonFiniteTerm(f"term {k} is not finite: {c}")
            self._cache.append(c)
        return self._cache[n]

    def term(self, n: int) -> Element:
        return Element(self.algebra, self.coords(n))

    __call__ = term

    def norms(self, upto: int) -> NDArray[np.float64]:
        """``[||a_0||, ..., ||a_upto||]``."""
        return np.array([enorm(self.coords(n)) for n in range(upto + 1)])

    def left_scaled(self, c: Element) -> TermStream:
        return TermStream(self.algebra, lambda n: c * self.term(n), self.max_terms)

    def __add__(self, other: TermStream) -> TermStream:
        if not self.algebra.same_as(other.algebra):
            raise AlgebraMismatch("streams live in different algebras")
        return TermStream(self.algebra, lambda n: self.term(n) + other.term(n), min(self.max_terms, other.max_terms))

    @classmethod
    def from_coords(cls, algebra: AlgebraSpec, fn: Callable[[int], object], max_terms: int | None = None) -> TermStream:
        return cls(algebra, lambda n: Element(algebra, fn(n)), max_terms)


@dataclass(frozen=True)
class SumResult:
    """Outcome of :func:`sum_series`.

    ``settled_at`` is the number of leading terms after which the partial sum
    never changed again (bitwise) before the run stopped.
    """

    value: Element
    status: Status
    terms_used: int
    tail_estimate: float
    settled_at: int = 0

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED


def sum_series(
    s: TermStream,
    tol: float = 1e-12,
    window: int = 10,
    divergence_guard: float = DIVERGENCE_GUARD,
) -> SumResult:
    """Sum a series with a Cauchy-criterion stopping rule.

    Stops as ``Converged`` once the newest term and every trailing block
    ``a_j + ... + a_n`` over the last ``window`` terms have norm below ``tol``.
    Reports ``Diverged`` when a term or partial sum exceeds ``divergence_guard``
    and ``Inconclusive`` when ``s.max_terms`` terms were used without a decision.
    """
    out = sum_batch(
        lambda n, active: s.coords(n)[None, :], 1, s.algebra.dim, tol, window, divergence_guard, s.max_terms
    )
    return SumResult(
        Element(s.algebra, out.values[0]),
        out.status[0],
        int(out.terms_used[0]),
        float(out.tail[0]),
        int(out.settled[0]),
    )


@dataclass
class BatchSum:
    values: NDArray[np.float64]
    status: NDArray[np.object_]
    terms_used: NDArray[np.int64]
    tail: NDArray[np.float64]
    settled: NDArray[np.int64]


def sum_batch(
    next_terms: Callable[[int, NDArray[np.int64]], NDArray[np.float64]],
    count: int,
    dim: int,
    tol: float = 1e-12,
    window: int = 10,
    divergence_guard: float = DIVERGENCE_GUARD,
    max_terms: int | None = None,
) -> BatchSum:
    """Run the :func:`sum_series` stopping rule on ``count`` series at once.

    ``next_terms(n, active)`` must return the ``n``-th term of every series
    listed in ``active`` as an array of shape ``(len(active), dim)``; it is
    called with increasing ``n`` and only for series still undecided.
    """
    if tol <= 0 or window < 1:
        raise ValueError("tol must be positive and window >= 1")
    max_terms = default_max_terms() if max_terms is None else max_terms
    total = np.zeros((count, dim))
    history = np.zeros((window, count, dim))  # partial sums before each of the last `window` terms
    status = np.full(count, Status.INCONCLUSIVE, dtype=object)
    used = np.full(count, max_terms, dtype=np.int64)
    tail = np.full(count, math.nan)
    settled = np.zeros(count, dtype=np.int64)
    active = np.arange(count)

    for n in range(max_terms):
        if active.size == 0:
            break
        a = np.asarray(next_terms(n, active), dtype=np.float64)
        if not np.all(np.isfinite(a)):
            raise NonFiniteTerm(f"term {n} is not finite")
        prev = total[active]
        history[n % window, active] = prev
        new = prev + a
        settled[active[np.any(new != prev, axis=1)]] = n + 1
        total[active] = new

        a_norm = np.linalg.norm(a, axis=1)
        s_norm = np.linalg.norm(new, axis=1)
        done = (a_norm > divergence_guard) | (s_norm > divergence_guard)
        if done.any():
            idx = active[done]
            status[idx] = Status.DIVERGED
            used[idx] = n + 1
            tail[idx] = math.inf
        if n + 1 >= window:
            cand = ~done & (a_norm < tol)
            if cand.any():
                idx = active[cand]
                blocks = np.linalg.norm(total[idx][None, :, :] - history[:, idx, :], axis=2).max(axis=0)
                ok = blocks < tol
                if ok.any():
                    hit = idx[ok]
                    status[hit] = Status.CONVERGED
                    used[hit] = n + 1
                    tail[hit] = np.maximum(blocks[ok], a_norm[cand][ok])
                    sub = np.zeros(count, dtype=bool)
                    sub[hit] = True
                    done = done | sub[active]
        active = active[~done]
    return BatchSum(total, status, used, tail, settled)


# -- limsup estimation -----------------------------------------------------


def _upper_hull(xs: NDArray[np.float64], ys: NDArray[np.float64]) -> tuple[list[float], list[float]]:
    hx: list[float] = []
    hy: list[float] = []
    for x, y in zip(xs, ys):
        while len(hx) >= 2 and (hy[-1] - hy[-2]) * (x - hx[-2]) <= (y - hy[-2]) * (hx[-1] - hx[-2]):
            hx.pop()
            hy.pop()
        hx.append(float(x))
        hy.append(float(y))
    return hx, hy


def _hull_slope(xs: NDArray[np.float64], ys: NDArray[np.float64]) -> float:
    """Slope of the upper hull of ``(xs, ys)`` at the middle of the x-range."""
    hx, hy = _upper_hull(xs, ys)
    mid = 0.5 * (hx[0] + hx[-1])
    for i in range(len(hx) - 1):
        if hx[i] <= mid <= hx[i + 1]:
            return (hy[i + 1] - hy[i]) / (hx[i + 1] - hx[i])
    return (hy[-1] - hy[0]) / (hx[-1] - hx[0])


def root_limsup(norms: NDArray[np.float64], probe: int) -> float:
    """Estimate ``limsup ||a_n||^(1/n)`` from ``norms[n] = ||a_n||``, ``n <= probe``.

    Works on the trailing half of the probe. The exponential rate is read off
    the upper hull of ``(n, log ||a_n||)``, which discards troughs of oscillating
    sequences and polynomial prefactors such as ``1/n``. If the rate keeps
    falling (rising) between the two quarters of the window the sequence is
    treated as super-geometric and ``0`` (``inf``) is returned.
    """
    norms = np.asarray(norms[: probe + 1], dtype=np.float64)
    n = np.arange(norms.shape[0])
    keep = (n >= max(1, probe // 2)) & (norms > 0) & np.isfinite(norms)
    xs = n[keep].astype(np.float64)
    if xs.size == 0:
        return 0.0
    ys = np.log(norms[keep])
    if xs.size < 4:
        return float(np.exp((ys / xs).max()))
    half = xs.size // 2
    early = _hull_slope(xs[: half + 1], ys[: half + 1])
    late = _hull_slope(xs[half:], ys[half:])
    if early - late > TREND_THRESHOLD:
        return 0.0
    if late - early > TREND_THRESHOLD:
        return math.inf
    return float(np.exp(_hull_slope(xs, ys)))


def ratio_limsup(ratios: NDArray[np.float64]) -> float:
    """Trailing max of consecutive ratios, with the same super-geometric trend check."""
    ratios = np.asarray(ratios, dtype=np.float64)
    if ratios.size == 0:
        return math.nan
    half = ratios.size // 2
    early = float(ratios[: half + 1].max())
    late = float(ratios[half:].max())
    if early > 0 and late > 0:
        trend = math.log(late / early)
        if trend < -TREND_THRESHOLD:
            return 0.0
        if trend > TREND_THRESHOLD:
            return math.inf
    elif late == 0:
        return 0.0
    return float(ratios.max())


def _classify_rate(alpha: float, margin: float) -> Verdict:
    if alpha < 1.0 - margin:
        return Verdict.CONVERGES
    if alpha > 1.0 + margin:
        return Verdict.DIVERGES
    return Verdict.INCONCLUSIVE


@dataclass(frozen=True)
class TestResult:
    """Estimate plus verdict; unpacks as ``(estimate, verdict)``."""

    __test__ = False  # not a pytest class

    estimate: float
    verdict: Verdict
    probe: int
    note: str = ""

    def __iter__(self) -> Iterator:
        return iter((self.estimate, self.verdict))


def root_test(s: TermStream, probe: int = 200, margin: float = VERDICT_MARGIN) -> TestResult:
    if probe < 32:
        raise ValueError("probe must be >= 32")
    alpha = root_limsup(s.norms(probe), probe)
    return TestResult(alpha, _classify_rate(alpha, margin), probe)


def ratio_test(s: TermStream, probe: int = 200, margin: float = VERDICT_MARGIN) -> TestResult:
    """Ratio test on ``||a_(n+1)|| / ||a_n||`` over the trailing half of the probe.

    Divergence is only reported when every probed ratio is >= 1, and it is
    labelled probe-limited since a finite probe cannot certify "for all n".
    """
    if probe < 32:
        raise ValueError("probe must be >= 32")
    norms = s.norms(probe)
    start = max(0, probe // 2)
    base = norms[start:probe]
    if np.any(base == 0):
        return TestResult(math.nan, Verdict.INCONCLUSIVE, probe, "zero term in probe range")
    ratios = norms[start + 1 : probe + 1] / base
    alpha = ratio_limsup(ratios)
    verdict = _classify_rate(alpha, margin)
    if verdict is Verdict.DIVERGES:
        verdict = Verdict.DIVERGES_PROBE_LIMITED if np.all(ratios >= 1.0) else Verdict.INCONCLUSIVE
    return TestResult(alpha, verdict, probe)


@dataclass(frozen=True)
class ComparisonResult:
    verdict: Verdict
    first_violation: int | None = None
    note: str = ""


def comparison_test(
    s: TermStream,
    bound: Callable[[int], float],
    bound_converges: bool,
    probe: int = 200,
    start: int = 0,
) -> ComparisonResult:
    """Compare ``||a_n||`` with a real majorant (or minorant) over ``start..probe``.

    With ``bound_converges`` the bound must dominate every probed term and the
    verdict is absolute convergence; otherwise the bound must sit below the
    term norms and the verdict is divergence of the norm series.
    """
    for n in range(start, probe + 1):
        a = enorm(s.coords(n))
        b = float(bound(n))
        slack = 1e-12 * max(1.0, abs(b))
        if bound_converges and a > b + slack:
            return ComparisonResult(Verdict.INCONCLUSIVE, n, f"||a_{n}|| = {a:.6g} exceeds bound {b:.6g}")
        if not bound_converges and b > a + slack:
            return ComparisonResult(Verdict.INCONCLUSIVE, n, f"bound {b:.6g} exceeds ||a_{n}|| = {a:.6g}")
    return ComparisonResult(Verdict.CONVERGES if bound_converges else Verdict.DIVERGES_IN_NORM)


def cauchy_product(a: TermStream, b: TermStream) -> TermStream:
    """Stream of ``c_n = sum_{k<=n} a_k * b_(n-k)``."""
    if not a.algebra.same_as(b.algebra):
        raise AlgebraMismatch("cauchy_product needs streams over the same algebra")
    alg = a.algebra

    def term(n: int) -> Element:
        acc = np.zeros(alg.dim)
        for k in range(n + 1):
            acc += alg.left_matrix(a.coords(k)) @ b.coords(n - k)
        return Element(alg, acc)

    return TermStream(alg, term, min(a.max_terms, b.max_terms))
