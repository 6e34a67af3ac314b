"""Power series ``sum c_n * (z - z0)^n`` over an algebra.

Radii from the root test and the two ratio tests, pointwise evaluation,
center shifts, term-wise derivatives, entire extensions of real series and
2-D convergence-region scans.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from typing import Callable, TextIO

import numpy as np
from numpy.typing import NDArray

from .algebra import AlgebraSpec, Element, Kind, classify, enorm, inverse
from .errors import AlgebraMismatch, CenterMismatch, DegenerateSlice, NotEntireAndBeyondRadius
from .series import (
    DIVERGENCE_GUARD,
    Status,
    SumResult,
    TermStream,
    default_max_terms,
    ratio_limsup,
    root_limsup,
    sum_batch,
    sum_series,
)

_REAL_TOL = 1e-14


class _Coefficients:
    """Memoized coefficient stream with left-multiplication matrices."""

    def __init__(self, algebra: AlgebraSpec, fn: Callable[[int], Element]):
        self.algebra = algebra
        self.fn = fn
        self._coords: list[NDArray[np.float64]] = []
        self._mats: list[NDArray[np.float64]] = []

    def coords(self, n: int) -> NDArray[np.float64]:
        while len(self._coords) <= n:
            c = self.fn(len(self._coords))
            if isinstance(c, Element):
                if not c.algebra.same_as(self.algebra):
                    raise AlgebraMismatch("coefficient lives in another algebra")
                arr = c.coords
            else:
                arr = np.asarray(c, dtype=np.float64).reshape(-1)
            self._coords.append(arr)
        return self._coords[n]

    def matrix(self, n: int) -> NDArray[np.float64]:
        while len(self._mats) <= n:
            self._mats.append(self.algebra.left_matrix(self.coords(len(self._mats))))
        return self._mats[n]


class PowerSeries:
    """A power series with a coefficient rule ``n -> c_n``.

    ``real_coeffs`` / ``unit_coeffs`` are hints from the constructor; the radius
    estimates re-check them on the probed prefix. Build real-coefficient series
    with :meth:`from_real`.

    When every coefficient is a real multiple of one fixed element ``d``
    (``c_n = a(n) d``, see :meth:`along`), terms are formed as ``a(n) * (d z^n)``
    with ``d z^n`` carried by right multiplication. This keeps the running
    vector inside the ideal generated by ``d``, so a zero-divisor ``d`` does not
    lose its surviving component to cancellation against the annihilated one.
    """

    def __init__(
        self,
        algebra: AlgebraSpec,
        coeff: Callable[[int], Element],
        center: Element | None = None,
        real_coeffs: bool = False,
        unit_coeffs: bool = False,
        name: str = "",
        _cache: _Coefficients | None = None,
        _along: tuple[Element, Callable[[int], float]] | None = None,
    ):
        self.algebra = algebra
        self.center = algebra.zero() if center is None else center
        if not self.center.algebra.same_as(algebra):
            raise AlgebraMismatch("center is not in the series' algebra")
        self.coeff_fn = coeff
        self.real_coeffs = real_coeffs
        self.unit_coeffs = unit_coeffs
        self.name = name
        self._c = _cache if _cache is not None else _Coefficients(algebra, coeff)
        self._along = _along

    @classmethod
    def from_real(
        cls, algebra: AlgebraSpec, a: Callable[[int], float], center: Element | None = None, name: str = ""
    ) -> PowerSeries:
        """Series with ``c_n = a(n) * 1``."""
        return cls.along(algebra, algebra.one(), a, center, name)

    @classmethod
    def along(
        cls,
        algebra: AlgebraSpec,
        d: Element,
        a: Callable[[int], float],
        center: Element | None = None,
        name: str = "",
    ) -> PowerSeries:
        """Series with ``c_n = a(n) * d`` for a fixed element ``d``."""
        if not d.algebra.same_as(algebra):
            raise AlgebraMismatch("direction is not in the series' algebra")
        dc = d.coords
        real = bool(np.array_equal(dc, algebra.unity))
        unit = classify(d) is Kind.UNIT
        return cls(
            algebra,
            lambda n: Element(algebra, float(a(n)) * dc),
            center,
            real_coeffs=real,
            unit_coeffs=unit,
            name=name,
            _along=(d, a),
        )

    def coeff(self, n: int) -> Element:
        return Element(self.algebra, self._c.coords(n))

    def coeff_coords(self, n: int) -> NDArray[np.float64]:
        return self._c.coords(n)

    def coeff_matrix(self, n: int) -> NDArray[np.float64]:
        return self._c.matrix(n)

    def real_part_of(self, n: int) -> float | None:
        """``a`` if ``c_n = a * 1`` (within rounding), else ``None``."""
        c = self._c.coords(n)
        u = self.algebra.unity
        a = float(c @ u / (u @ u))
        if enorm(c - a * u) <= _REAL_TOL * enorm(c):
            return a
        return None

    def with_center(self, center: Element) -> PowerSeries:
        return PowerSeries(
            self.algebra,
            self.coeff_fn,
            center,
            self.real_coeffs,
            self.unit_coeffs,
            self.name,
            _cache=self._c,
            _along=self._along,
        )

    def __repr__(self) -> str:
        return f"PowerSeries({self.name or 'anonymous'}, algebra={self.algebra.name}, center={self.center!r})"


def _right_matrix(alg: AlgebraSpec, z: NDArray[np.float64]) -> NDArray[np.float64]:
    """``R`` with ``R @ x = x * z``."""
    return np.einsum("j,ijk->ki", z, alg.constants)


def _ideal_projector(d: Element) -> NDArray[np.float64] | None:
    """Orthogonal projector onto the right ideal ``d * A``, or None when ``d`` is a unit.

    ``d * w^n`` stays in that ideal; projecting after each step keeps rounding
    noise from leaking into the complement, where it could grow without bound
    (e.g. along ``1 - j`` for the band series).
    """
    M = d.algebra.left_matrix(d.coords)
    u, sv, _ = np.linalg.svd(M)
    rank = int(np.sum(sv > sv[0] * 1e-12)) if sv.size and sv[0] > 0 else 0
    if rank == M.shape[0]:
        return None
    q = u[:, :rank]
    return q @ q.T


def _stepper(p: PowerSeries, w: NDArray[np.float64]):
    """``(start, step, scale)``: the running vector is ``d w^n`` (or ``w^n``), the term is ``scale(n) @ vec``."""
    alg = p.algebra
    if p._along is not None:
        d, a = p._along
        step = _right_matrix(alg, w)
        proj = _ideal_projector(d)
        if proj is not None:
            step = proj @ step
        return d.coords.copy(), step, lambda n, v: float(a(n)) * v
    return alg.unity.copy(), alg.left_matrix(w), lambda n, v: p.coeff_matrix(n) @ v


def _check_same(p: PowerSeries, z: Element) -> None:
    if not p.algebra.same_as(z.algebra):
        raise AlgebraMismatch(f"{z!r} is not in {p.algebra!r}")


def _radius(m: float, alpha: float) -> float:
    if alpha == 0.0:
        return math.inf
    if math.isinf(alpha) or math.isnan(alpha):
        return 0.0 if math.isinf(alpha) else math.nan
    return 1.0 / (m * alpha)


@dataclass(frozen=True)
class RadiusReport:
    """Guaranteed convergence radii.

    ``R_root`` holds on the whole ball, ``R_ratio_real`` only for real
    coefficients, ``R_ratio_unit`` only for unit coefficients and unit
    arguments ``z - z0``. ``None`` marks a test whose hypotheses failed on the
    probe. ``unit_coeffs`` is probe-limited: only the trailing half of the
    probe is classified, since finitely many leading terms (such as a zero
    ``c_0``) do not affect convergence.
    """

    alpha_root: float
    alpha_ratio: float | None
    alpha_ratio_unit: float | None
    R_root: float
    R_ratio_unit: float | None
    R_ratio_real: float | None
    m_used: float
    probe: int
    real_coeffs: bool
    unit_coeffs: bool
    m_alternative: float
    R_root_alternative: float

    def to_dict(self) -> dict:
        return {k: _json_float(v) for k, v in self.__dict__.items()}


def _json_float(v):
    if isinstance(v, float):
        if math.isinf(v):
            return "inf"
        if math.isnan(v):
            return "nan"
    return v


def _is_unit(c: NDArray[np.float64], alg: AlgebraSpec) -> bool:
    size = enorm(c)
    return size > 0 and classify(Element(alg, c / size)) is Kind.UNIT


def estimate_radii(p: PowerSeries, probe: int = 200, use_theoretical: bool = False) -> RadiusReport:
    if probe < 32:
        raise ValueError("probe must be >= 32")
    alg = p.algebra
    m = alg.m_theoretical if use_theoretical else alg.m_empirical
    m_alt = alg.m_empirical if use_theoretical else alg.m_theoretical
    norms = np.array([enorm(p.coeff_coords(n)) for n in range(probe + 1)])
    alpha_root = root_limsup(norms, probe)

    reals = [p.real_part_of(n) for n in range(probe + 1)]
    real_coeffs = all(r is not None for r in reals)
    start = probe // 2
    # coefficients vanishing from some index on (e.g. 1/n! underflowing) make a polynomial tail
    nonzero = np.nonzero(norms)[0]
    last = int(nonzero.max()) if nonzero.size else -1
    polynomial_tail = last < probe
    stop = min(last, probe)

    alpha_ratio = None
    R_ratio_real = None
    if real_coeffs:
        a = np.abs(np.array(reals[start : stop + 1], dtype=np.float64))
        if np.all(a > 0):
            alpha_ratio = 0.0 if polynomial_tail else ratio_limsup(a[1:] / a[:-1])
            R_ratio_real = _radius(m, alpha_ratio)

    unit_coeffs = all(_is_unit(p.coeff_coords(n), alg) for n in range(start, stop + 1))
    alpha_unit = None
    R_ratio_unit = None
    if unit_coeffs:
        if polynomial_tail:
            alpha_unit = 0.0
        else:
            q = [(p.coeff(n + 1) * inverse(p.coeff(n))).norm() for n in range(start, probe)]
            alpha_unit = ratio_limsup(np.array(q))
        R_ratio_unit = _radius(m * m, alpha_unit)

    return RadiusReport(
        alpha_root=alpha_root,
        alpha_ratio=alpha_ratio,
        alpha_ratio_unit=alpha_unit,
        R_root=_radius(m, alpha_root),
        R_ratio_unit=R_ratio_unit,
        R_ratio_real=R_ratio_real,
        m_used=m,
        probe=probe,
        real_coeffs=real_coeffs,
        unit_coeffs=unit_coeffs,
        m_alternative=m_alt,
        R_root_alternative=_radius(m_alt, alpha_root),
    )


def term_stream(p: PowerSeries, z: Element, max_terms: int | None = None) -> TermStream:
    """Terms ``c_n * (z - z0)^n`` with powers built by repeated multiplication."""
    _check_same(p, z)
    start, step, scale = _stepper(p, (z - p.center).coords)
    powers = [start]

    def term(n: int) -> NDArray[np.float64]:
        while len(powers) <= n:
            powers.append(step @ powers[-1])
        return scale(n, powers[n])

    return TermStream(p.algebra, term, max_terms)


def evaluate(
    p: PowerSeries, z: Element, tol: float = 1e-12, window: int = 10, max_terms: int | None = None
) -> SumResult:
    """Sum the series at ``z``; see :func:`acalc.series.sum_series` for the verdicts."""
    return sum_series(term_stream(p, z, max_terms), tol=tol, window=window)


def shift_center(p: PowerSeries, new_center: Element) -> PowerSeries:
    """Same coefficients about ``new_center``; the convergence set moves by ``new_center - center``."""
    _check_same(p, new_center)
    return p.with_center(new_center)


def derivative_series(p: PowerSeries, order: int = 1) -> PowerSeries:
    """k-th term-wise derivative: ``c'_n = (n+1)(n+2)...(n+k) c_(n+k)``."""
    if order < 1:
        raise ValueError("order must be >= 1")

    def coeff(n: int) -> Element:
        factor = math.prod(range(n + 1, n + order + 1))
        return float(factor) * p.coeff(n + order)

    name = f"d^{order}({p.name})" if p.name else ""
    if p._along is not None:
        d, a = p._along
        scalar = lambda n: math.prod(range(n + 1, n + order + 1)) * float(a(n + order))  # noqa: E731
        return PowerSeries.along(p.algebra, d, scalar, p.center, name)
    return PowerSeries(p.algebra, coeff, p.center, p.real_coeffs, p.unit_coeffs, name)


@dataclass(frozen=True)
class GeometricResult:
    result: SumResult
    mismatch: float | None  # ||sum - (1 - z)^-1|| when 1 - z is a unit


def geometric_series(algebra: AlgebraSpec, center: Element | None = None) -> PowerSeries:
    return PowerSeries.from_real(algebra, lambda n: 1.0, center, name="geometric")


def geometric(algebra: AlgebraSpec, z: Element, tol: float = 1e-12) -> GeometricResult:
    """Evaluate ``sum z^n`` and compare with ``(1 - z)^-1`` when that inverse exists."""
    res = evaluate(geometric_series(algebra), z, tol=tol)
    one_minus = algebra.one() - z
    mismatch = None
    if classify(one_minus) is Kind.UNIT:
        mismatch = (res.value - inverse(one_minus)).norm()
    return GeometricResult(res, mismatch)


def entire_extension(a: Callable[[int], float], algebra: AlgebraSpec, probe: int = 64, name: str = "") -> PowerSeries:
    """Extend a real entire series ``sum a_n x^n`` to the algebra with ``c_n = a_n * 1``.

    Warns when the coefficients do not look entire (root estimate not ~0).
    """
    norms = np.array([abs(float(a(n))) for n in range(probe + 1)])
    alpha = root_limsup(norms, probe)
    if alpha > 0:
        warnings.warn(f"coefficients do not look entire (root estimate {alpha:.3g})", stacklevel=2)
    return PowerSeries.from_real(algebra, a, name=name)


def product_series(a: PowerSeries, b: PowerSeries) -> PowerSeries:
    """Cauchy product of two series about the same center."""
    if not a.algebra.same_as(b.algebra):
        raise AlgebraMismatch("series live in different algebras")
    if not np.array_equal(a.center.coords, b.center.coords):
        raise CenterMismatch("series have different centers")
    alg = a.algebra

    def coeff(n: int) -> Element:
        acc = np.zeros(alg.dim)
        for k in range(n + 1):
            acc += a.coeff_matrix(k) @ b.coeff_coords(n - k)
        return Element(alg, acc)

    return PowerSeries(alg, coeff, a.center, a.real_coeffs and b.real_coeffs, name=f"({a.name})*({b.name})")


def uniform_tail_bound(
    p: PowerSeries, L: float, tol: float = 1e-12, m: float | None = None, probe: int = 64, max_terms: int | None = None
) -> int:
    """Smallest ``n`` with ``sum_{k>n} m^k ||c_k|| L^k < tol``.

    The majorant dominates ``||c_k * (z - z0)^k||`` for every ``||z - z0|| <= L``,
    so truncating after ``n`` terms is uniformly accurate to ``tol`` there.

    Raises:
        NotEntireAndBeyondRadius: the series is not entire and ``L`` is not inside the root radius.
    """
    m = p.algebra.m_empirical if m is None else m
    max_terms = default_max_terms() if max_terms is None else max_terms
    norms = np.array([enorm(p.coeff_coords(n)) for n in range(probe + 1)])
    alpha = root_limsup(norms, probe)
    if alpha != 0.0 and not L < _radius(m, alpha):
        raise NotEntireAndBeyondRadius(f"L = {L} is not inside the root radius {_radius(m, alpha):.6g}")
    if L == 0:
        return 0
    log_ml = math.log(m * L)
    logs: list[float] = []
    quiet = 0
    k = 0
    # stop once 32 consecutive majorant terms sit 1e-6 below tol past the peak
    while True:
        c = enorm(p.coeff_coords(k))
        lt = -math.inf if c == 0 else math.log(c) + k * log_ml
        logs.append(lt)
        quiet = quiet + 1 if lt < math.log(tol) - 14 else 0
        if quiet >= 32 and k > 2 * m * L:
            break
        k += 1
        if k >= max_terms:
            raise NotEntireAndBeyondRadius(f"majorant tail still above tol after {max_terms} terms")
    terms = np.exp(np.array(logs))
    suffix = np.cumsum(terms[::-1])[::-1]  # suffix[k] = sum_{j>=k} terms[j]
    for n in range(len(terms)):
        if n + 1 >= len(terms) or suffix[n + 1] < tol:
            return n
    return len(terms) - 1


def truncated_eval(p: PowerSeries, z: Element, n: int) -> Element:
    """Partial sum ``sum_{k<=n} c_k * (z - z0)^k``."""
    _check_same(p, z)
    w, step, scale = _stepper(p, (z - p.center).coords)
    acc = scale(0, w)
    for k in range(1, n + 1):
        w = step @ w
        acc = acc + scale(k, w)
    return Element(p.algebra, acc)


# -- region scans ----------------------------------------------------------


@dataclass(frozen=True)
class Slice:
    origin: Element
    axis_u: Element
    axis_v: Element

    def point(self, u: float, v: float) -> Element:
        return self.origin + u * self.axis_u + v * self.axis_v


@dataclass(frozen=True)
class Grid:
    u_min: float
    u_max: float
    v_min: float
    v_max: float
    nu: int
    nv: int

    @property
    def u_values(self) -> NDArray[np.float64]:
        return np.linspace(self.u_min, self.u_max, self.nu)

    @property
    def v_values(self) -> NDArray[np.float64]:
        return np.linspace(self.v_min, self.v_max, self.nv)


@dataclass(frozen=True)
class RegionScan:
    """Per-cell verdicts ``verdicts[iu, iv]`` at ``origin + u*axis_u + v*axis_v``.

    ``values`` holds the sums of converged cells and NaN elsewhere.
    """

    slice: Slice
    grid: Grid
    verdicts: NDArray[np.object_]
    values: NDArray[np.float64]
    terms_used: NDArray[np.int64]

    def count(self, status: Status) -> int:
        return int(sum(1 for s in self.verdicts.ravel() if s is status))

    def codes(self) -> NDArray[np.str_]:
        return np.vectorize(lambda s: s.code)(self.verdicts)

    def write_csv(self, fh: TextIO) -> None:
        """Header ``u,v,verdict,comp_0..comp_{N-1}``; one row per cell, ``u`` outer."""
        dim = self.values.shape[-1]
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["u", "v", "verdict"] + [f"comp_{i}" for i in range(dim)])
        for iu, u in enumerate(self.grid.u_values):
            for iv, v in enumerate(self.grid.v_values):
                status = self.verdicts[iu, iv]
                comps = [repr(float(c)) for c in self.values[iu, iv]] if status is Status.CONVERGED else [""] * dim
                w.writerow([repr(float(u)), repr(float(v)), status.code] + comps)

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def region_scan(
    p: PowerSeries,
    slice: Slice,
    grid: Grid,
    tol: float = 1e-12,
    window: int = 10,
    max_terms: int | None = None,
    divergence_guard: float = DIVERGENCE_GUARD,
) -> RegionScan:
    """Classify convergence on a 2-D grid through the algebra.

    Every cell runs the same stopping rule as :func:`evaluate`; the cells are
    summed together as one vectorized batch.

    Raises:
        DegenerateSlice: ``axis_u`` and ``axis_v`` are linearly dependent.
    """
    for e in (slice.origin, slice.axis_u, slice.axis_v):
        _check_same(p, e)
    axes = np.vstack([slice.axis_u.coords, slice.axis_v.coords])
    if np.linalg.matrix_rank(axes, tol=1e-12) < 2:
        raise DegenerateSlice("slice axes are linearly dependent")
    if grid.nu < 1 or grid.nv < 1:
        raise DegenerateSlice("grid needs at least one cell in each direction")

    alg = p.algebra
    uu, vv = np.meshgrid(grid.u_values, grid.v_values, indexing="ij")
    pts = (
        slice.origin.coords[None, :]
        + uu.reshape(-1, 1) * slice.axis_u.coords[None, :]
        + vv.reshape(-1, 1) * slice.axis_v.coords[None, :]
    )
    w = pts - p.center.coords[None, :]
    if p._along is not None:
        d, a = p._along
        mats = np.einsum("cj,ijk->cki", w, alg.constants)  # right multiplication by z - z0
        proj = _ideal_projector(d)
        if proj is not None:
            mats = np.einsum("ab,cbi->cai", proj, mats)
        powers = np.tile(d.coords, (w.shape[0], 1))
        scale = lambda n, v: float(a(n)) * v  # noqa: E731
    else:
        mats = np.tensordot(w, alg._left, axes=1)  # left multiplication by z - z0
        powers = np.tile(alg.unity, (w.shape[0], 1))
        scale = lambda n, v: v @ p.coeff_matrix(n).T  # noqa: E731

    def next_terms(n: int, active: NDArray[np.int64]) -> NDArray[np.float64]:
        if n > 0:
            powers[active] = np.einsum("cij,cj->ci", mats[active], powers[active])
        return scale(n, powers[active])

    out = sum_batch(next_terms, w.shape[0], alg.dim, tol, window, divergence_guard, max_terms)
    shape = (grid.nu, grid.nv)
    values = out.values.copy()
    conv = np.array([s is Status.CONVERGED for s in out.status])
    values[~conv] = np.nan
    return RegionScan(
        slice=slice,
        grid=grid,
        verdicts=out.status.reshape(shape),
        values=values.reshape(shape + (alg.dim,)),
        terms_used=out.terms_used.reshape(shape),
    )
