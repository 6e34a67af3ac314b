"""Elementary and special functions defined by their power series.

Every function here is evaluated from its series with a truncation length
chosen by :func:`acalc.power_series.uniform_tail_bound` at ``L = ||z||``.
No closed forms are used, so identity checks exercise the series machinery.
There is no argument reduction; accuracy degrades for large ``||z||``.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence, TextIO

import numpy as np
from numpy.typing import NDArray

from .algebra import AlgebraSpec, Element, GeneratedAlgebra, regular_rep
from .errors import BadIndex, DimensionTooLarge, NotCommutative
from .power_series import PowerSeries, truncated_eval, uniform_tail_bound

DEFAULT_TOL = 1e-16
MAX_DET_DIM = 8


def _inv_fact(n: int) -> float:
    return 1 / math.factorial(n)


def residue_coeff(N: int, p: int, alternating: bool) -> Callable[[int], float]:
    """Coefficients of ``sum_k (+-1)^k z^(Nk+p) / (Nk+p)!``."""

    def a(n: int) -> float:
        if n < p or (n - p) % N:
            return 0.0
        k = (n - p) // N
        sign = -1.0 if alternating and k % 2 else 1.0
        return sign * _inv_fact(n)

    return a


_FAMILIES: dict[str, Callable[[int], float]] = {
    "exp": _inv_fact,
    "cosh": residue_coeff(2, 0, False),
    "sinh": residue_coeff(2, 1, False),
    "cos": residue_coeff(2, 0, True),
    "sin": residue_coeff(2, 1, True),
}


@lru_cache(maxsize=None)
def _series(algebra: AlgebraSpec, key: tuple) -> PowerSeries:
    kind = key[0]
    if kind in _FAMILIES:
        return PowerSeries.from_real(algebra, _FAMILIES[kind], name=kind)
    _, N, p, alternating = key
    return PowerSeries.from_real(algebra, residue_coeff(N, p, alternating), name=f"{kind}_{N},{p}")


def entire_eval(series: PowerSeries, z: Element, tol: float = DEFAULT_TOL) -> Element:
    """Truncate an entire series where its majorant tail at ``L = ||z - z0||`` drops below ``tol``."""
    n = uniform_tail_bound(series, (z - series.center).norm(), tol)
    return truncated_eval(series, z, n)


def function_series(name: str, algebra: AlgebraSpec) -> PowerSeries:
    """The series of ``exp``, ``cosh``, ``sinh``, ``cos`` or ``sin`` on ``algebra``."""
    if name not in _FAMILIES:
        raise KeyError(name)
    return _series(algebra, (name,))


def exp(z: Element, tol: float = DEFAULT_TOL) -> Element:
    return entire_eval(_series(z.algebra, ("exp",)), z, tol)


def cosh(z: Element, tol: float = DEFAULT_TOL) -> Element:
    return entire_eval(_series(z.algebra, ("cosh",)), z, tol)


def sinh(z: Element, tol: float = DEFAULT_TOL) -> Element:
    return entire_eval(_series(z.algebra, ("sinh",)), z, tol)


def cos(z: Element, tol: float = DEFAULT_TOL) -> Element:
    return entire_eval(_series(z.algebra, ("cos",)), z, tol)


def sin(z: Element, tol: float = DEFAULT_TOL) -> Element:
    return entire_eval(_series(z.algebra, ("sin",)), z, tol)


def _check_index(N: int, p: int) -> None:
    if N < 1 or not 0 <= p <= N - 1:
        raise BadIndex(f"need N >= 1 and 0 <= p <= N-1, got N={N}, p={p}")


def n_trig(N: int, p: int, z: Element, tol: float = DEFAULT_TOL) -> Element:
    """``cos_N`` for ``p = 0``, otherwise ``sin_{N,p}``: the residue-``p`` part of the
    exponential series with alternating signs."""
    _check_index(N, p)
    return entire_eval(_series(z.algebra, ("trig", N, p, True)), z, tol)


def n_hyperbolic(N: int, p: int, z: Element, tol: float = DEFAULT_TOL) -> Element:
    """``cosh_N`` for ``p = 0``, otherwise ``sinh_{N,p}``."""
    _check_index(N, p)
    return entire_eval(_series(z.algebra, ("hyp", N, p, False)), z, tol)


# -- special functions of a generated algebra ------------------------------


def _generator_powers(g: GeneratedAlgebra, upto: int) -> NDArray[np.float64]:
    """Rows are the coordinates of ``gen^0 .. gen^upto``."""
    M = regular_rep(g.generator())
    out = np.empty((upto + 1, g.dim))
    v = g.base.unity.copy()
    for n in range(upto + 1):
        out[n] = v
        v = M @ v
    return out


def _real_entire_sum(coeff: Callable[[int], float], bound: Callable[[int], float], t: float, tol: float = 1e-18) -> float:
    """Sum ``coeff(n) t^n``; ``bound(n) >= |coeff(n)|`` decides where to stop."""
    terms = []
    quiet = 0
    n = 0
    while True:
        c = coeff(n)
        terms.append(c * t**n if c else 0.0)
        quiet = quiet + 1 if bound(n) * abs(t) ** n < tol else 0
        if n > abs(t) and quiet >= 4:
            break
        n += 1
    return math.fsum(terms)


@dataclass
class SpecialFunctionTable:
    """Components ``f_1..f_N`` of ``t -> exp(gen * t)`` for a generated algebra.

    ``coefficient(i, n)`` is the real Taylor coefficient of ``f_(i+1)``;
    ``values[k, i]`` is ``f_(i+1)(t_grid[k])`` read from the algebra exponential.
    """

    algebra: GeneratedAlgebra
    t_grid: NDArray[np.float64]
    values: NDArray[np.float64]
    _powers: NDArray[np.float64] = field(repr=False)
    _extensions: dict = field(default_factory=dict, repr=False)

    def _power_row(self, n: int) -> NDArray[np.float64]:
        if n >= self._powers.shape[0]:
            self._powers = _generator_powers(self.algebra, max(2 * n, 64))
        return self._powers[n]

    def coefficient(self, i: int, n: int) -> float:
        return float(self._power_row(n)[i]) * _inv_fact(n)

    def component(self, i: int) -> Callable[[int], float]:
        return lambda n: self.coefficient(i, n)

    def evaluate_component(self, i: int, t: float) -> float:
        """``f_(i+1)(t)`` summed from its own coefficient stream."""
        return _real_entire_sum(
            self.component(i), lambda n: float(np.abs(self._power_row(n)).max()) * _inv_fact(n), float(t)
        )

    def extension(self, i: int, algebra: AlgebraSpec | None = None) -> PowerSeries:
        """``f_(i+1)`` extended to an algebra (default: the generated algebra itself)."""
        alg = self.algebra.base if algebra is None else algebra
        key = (i, id(alg))
        if key not in self._extensions:
            self._extensions[key] = (alg, PowerSeries.from_real(alg, self.component(i), name=f"f_{i + 1}"))
        return self._extensions[key][1]

    def reconstruction_residual(self) -> float:
        """Max over the grid of ``||sum_i gen^(i-1) f_i(t) - exp(gen t)||`` with ``f_i`` from the streams."""
        worst = 0.0
        for k, t in enumerate(self.t_grid):
            f = np.array([self.evaluate_component(i, t) for i in range(self.algebra.dim)])
            # the basis is gen^0..gen^(N-1), so the coordinates are the f_i themselves
            worst = max(worst, float(np.max(np.abs(f - self.values[k]))))
        return worst

    def write_csv(self, fh: TextIO) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"f_{i + 1}" for i in range(self.algebra.dim)])
        for t, row in zip(self.t_grid, self.values):
            w.writerow([repr(float(t))] + [repr(float(v)) for v in row])

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def special_functions(g: GeneratedAlgebra, t_grid: Sequence[float]) -> SpecialFunctionTable:
    t = np.asarray(t_grid, dtype=np.float64)
    gen = g.generator()
    values = np.array([exp(float(tk) * gen).coords for tk in t]) if t.size else np.empty((0, g.dim))
    return SpecialFunctionTable(g, t, values, _generator_powers(g, 64))


# -- Pythagorean function --------------------------------------------------


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def leibniz_det(matrix: Sequence[Sequence[Element]]) -> Element:
    """Determinant of a square matrix over a commutative algebra, without division."""
    n = len(matrix)
    alg = matrix[0][0].algebra
    if not alg.commutative:
        raise NotCommutative("determinant over a noncommutative algebra is not defined here")
    if n > MAX_DET_DIM:
        raise DimensionTooLarge(f"Leibniz expansion capped at {MAX_DET_DIM}, got {n}")
    mats = [[alg.left_matrix(matrix[r][c].coords) for c in range(n)] for r in range(n)]
    total = np.zeros(alg.dim)
    for perm in itertools.permutations(range(n)):
        v = alg.unity
        for col in range(n):
            v = mats[perm[col]][col] @ v
        total += _perm_sign(perm) * v
    return Element(alg, total)


@dataclass(frozen=True)
class PythagoreanEvaluation:
    algebra: GeneratedAlgebra
    argument: Element
    matrix_over_A: list[list[Element]]
    value: Element


@lru_cache(maxsize=None)
def _table_for(g: GeneratedAlgebra) -> SpecialFunctionTable:
    return special_functions(g, [])


def pythagorean(g: GeneratedAlgebra, z: Element, tol: float = DEFAULT_TOL) -> PythagoreanEvaluation:
    """Evaluate ``det[e^(jz) | j e^(jz) | ... | j^(N-1) e^(jz)]`` over the algebra.

    Entry ``(k, p)`` is the ``k``-th coordinate function of ``j^p e^(jt)``,
    i.e. ``sum_i C[i, p, k] f_i``, with each special function ``f_i`` extended
    to ``z`` by its real power series.
    """
    alg = g.base
    if not alg.commutative:
        raise NotCommutative("the Pythagorean function needs a commutative algebra")
    N = alg.dim
    if N > MAX_DET_DIM:
        raise DimensionTooLarge(f"N = {N} exceeds {MAX_DET_DIM}")
    table = _table_for(g)
    f = [entire_eval(table.extension(i), z, tol) for i in range(N)]
    C = alg.constants
    matrix = [
        [Element(alg, sum(C[i, p, k] * f[i].coords for i in range(N))) for p in range(N)] for k in range(N)
    ]
    return PythagoreanEvaluation(g, z, matrix, leibniz_det(matrix))


def real_pythagorean(g: GeneratedAlgebra, t: float) -> float:
    """``det M(exp(j t))`` as a real number."""
    return float(np.linalg.det(regular_rep(exp(t * g.generator()))))


def column_derivative_residual(g: GeneratedAlgebra, t_values: Sequence[float], h: float = 1e-5) -> float:
    """Max mismatch between ``d/dt`` of column ``p`` of ``M(exp(jt))`` and column ``p+1``
    (``c`` times column 1 for the last column)."""
    worst = 0.0
    gen = g.generator()
    for t in t_values:
        Mp = regular_rep(exp((t + h) * gen))
        Mm = regular_rep(exp((t - h) * gen))
        M0 = regular_rep(exp(t * gen))
        d = (Mp - Mm) / (2 * h)
        target = np.roll(M0, -1, axis=1)
        target[:, -1] = g.power_value * M0[:, 0]
        worst = max(worst, float(np.abs(d - target).max()))
    return worst


# -- identity checks -------------------------------------------------------


@dataclass
class IdentityReport:
    """Max scaled residual ``||lhs - rhs|| / (1 + scale)`` per identity.

    ``scale`` is the largest norm among the products being combined, which
    keeps cancellation-heavy identities comparable across argument sizes.
    """

    algebra: str
    trials: int
    tol: float
    domain: tuple[float, float]
    residuals: dict[str, float]

    @property
    def passed(self) -> bool:
        return all(r < self.tol for r in self.residuals.values())

    def to_dict(self) -> dict:
        return {
            "algebra": self.algebra,
            "trials": self.trials,
            "tol": self.tol,
            "domain": list(self.domain),
            "residuals": self.residuals,
            "passed": self.passed,
        }


def _scaled(lhs: Element, rhs: Element, *parts: Element) -> float:
    scale = max([lhs.norm(), rhs.norm()] + [p.norm() for p in parts])
    return (lhs - rhs).norm() / (1.0 + scale)


def identity_residuals(z: Element, w: Element, tol: float = DEFAULT_TOL) -> dict[str, float]:
    one = z.algebra.one()
    ez, ew, ezw = exp(z, tol), exp(w, tol), exp(z + w, tol)
    chz, shz = cosh(z, tol), sinh(z, tol)
    chw, shw = cosh(w, tol), sinh(w, tol)
    cz, sz = cos(z, tol), sin(z, tol)
    cw, sw = cos(w, tol), sin(w, tol)
    emz = exp(-z, tol)
    return {
        "exp_add": _scaled(ezw, ez * ew),
        "exp_inverse": _scaled(ez * emz, one),
        "cosh2_minus_sinh2": _scaled(chz * chz - shz * shz, one, chz * chz, shz * shz),
        "exp_cosh_sinh": _scaled(ez, chz + shz, chz, shz),
        "cosh_add": _scaled(cosh(z + w, tol), chz * chw + shz * shw, chz * chw, shz * shw),
        "cos2_plus_sin2": _scaled(cz * cz + sz * sz, one, cz * cz, sz * sz),
        "sin_add": _scaled(sin(z + w, tol), sz * cw + sw * cz, sz * cw, sw * cz),
    }


def identity_suite(
    algebra: AlgebraSpec,
    trials: int = 100,
    tol: float = 1e-9,
    seed: int = 0,
    low: float = -2.0,
    high: float = 2.0,
) -> IdentityReport:
    """Check the exponential, hyperbolic and trigonometric addition/Pythagorean
    identities at ``trials`` random pairs with coordinates uniform in ``[low, high]``."""
    if not algebra.commutative:
        raise NotCommutative("identity_suite needs a commutative algebra")
    rng = np.random.default_rng(seed)
    worst: dict[str, float] = {}
    for _ in range(trials):
        z = algebra.random_element(rng, low, high)
        w = algebra.random_element(rng, low, high)
        for name, r in identity_residuals(z, w).items():
            worst[name] = max(worst.get(name, 0.0), r)
    return IdentityReport(algebra.name, trials, tol, (low, high), worst)


@dataclass(frozen=True)
class IVPReport:
    max_residual: float  # max ||g'' + g|| over the grid
    initial_value_error: float  # ||g(0) - f0||
    initial_slope_error: float  # ||g'(0) - f1||


def second_order_ivp_check(f0: Element, f1: Element, z_grid: Sequence[Element]) -> IVPReport:
    """Check that ``g = f0 cos + f1 sin`` solves ``g'' = -g`` with ``g(0) = f0``, ``g'(0) = f1``.

    Derivatives are central differences along the unity direction.
    """
    alg = f0.algebra
    if not alg.commutative:
        raise NotCommutative("second_order_ivp_check needs a commutative algebra")
    one = alg.one()

    def g(z: Element) -> Element:
        return f0 * cos(z) + f1 * sin(z)

    worst = 0.0
    for z in z_grid:
        h = np.finfo(float).eps ** 0.25 * max(1.0, z.norm())
        d2 = (g(z + h * one) - 2.0 * g(z) + g(z - h * one)) / (h * h)
        worst = max(worst, (d2 + g(z)).norm())
    zero = alg.zero()
    h = np.finfo(float).eps ** (1.0 / 3.0)
    slope = (g(zero + h * one) - g(zero - h * one)) / (2 * h)
    return IVPReport(worst, (g(zero) - f0).norm(), (slope - f1).norm())


def pythagorean_report(g: GeneratedAlgebra, trials: int = 50, seed: int = 0, low: float = -1.0, high: float = 1.0) -> dict:
    """``max ||P_A(z) - 1||`` over random ``z``; the JSON shape used by the command line."""
    rng = np.random.default_rng(seed)
    one = g.base.one()
    worst = 0.0
    for _ in range(trials):
        z = g.base.random_element(rng, low, high)
        worst = max(worst, (pythagorean(g, z).value - one).norm())
    return {"algebra": g.base.name, "N": g.dim, "c": g.power_value, "max_residual": worst, "trials": trials}
