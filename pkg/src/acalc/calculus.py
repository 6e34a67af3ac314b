"""Numerical A-differentiability and curve integrals.

A function ``f: A -> A`` is A-differentiable at ``p`` when its real Jacobian
lies in the regular representation ``span{M(v_1), ..., M(v_N)}``. The test
here projects a finite-difference Jacobian onto that span and reports how much
is left over. Everything is thresholded numerics, never a proof.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from numpy.typing import NDArray

from .algebra import AlgebraSpec, Element, enorm, mul
from .errors import AlgebraMismatch, EvaluationFailure, NonFiniteIntegrand, RelationNotNull

EPS = np.finfo(float).eps
CR_THRESHOLD = 1e-4
RELATION_TOL = 1e-12
QUAD_TOL = 1e-10
MAX_PANELS = 2**14

_GL_NODES, _GL_WEIGHTS = leggauss(5)


@dataclass(frozen=True)
class AFunction:
    """A caller-supplied map ``A -> A``; it must be deterministic."""

    algebra: AlgebraSpec
    fn: Callable[[Element], Element]

    def __call__(self, z: Element) -> Element:
        try:
            out = self.fn(z)
        except (ArithmeticError, ValueError) as exc:
            raise EvaluationFailure(f"evaluation failed at {z!r}: {exc}") from exc
        if not isinstance(out, Element):
            out = Element(self.algebra, np.asarray(out, dtype=np.float64))
        if not out.algebra.same_as(self.algebra):
            raise AlgebraMismatch("function returned an element of another algebra")
        if not np.all(np.isfinite(out.coords)):
            raise EvaluationFailure(f"non-finite value at {z!r}")
        return out


def _as_function(f, algebra: AlgebraSpec) -> AFunction:
    return f if isinstance(f, AFunction) else AFunction(algebra, f)


def default_step(p: Element, order: int = 1) -> float:
    """``eps^(1/3)`` for first differences, ``eps^(1/4)`` for second, scaled by ``max(1, ||p||)``."""
    root = 3 if order == 1 else 4
    return EPS ** (1.0 / root) * max(1.0, p.norm())


def numeric_jacobian(f, p: Element, h: float | None = None) -> NDArray[np.float64]:
    """Central-difference Jacobian; column ``j`` is ``(f(p + h v_j) - f(p - h v_j)) / 2h``."""
    alg = p.algebra
    f = _as_function(f, alg)
    h = default_step(p) if h is None else h
    J = np.empty((alg.dim, alg.dim))
    for j in range(alg.dim):
        e = np.zeros(alg.dim)
        e[j] = h
        J[:, j] = ((f(Element(alg, p.coords + e)) - f(Element(alg, p.coords - e))).coords) / (2 * h)
    return J


@dataclass(frozen=True)
class CRReport:
    jacobian: NDArray[np.float64]
    projected: NDArray[np.float64]
    residual: float
    relative_residual: float
    a_derivative: Element

    @property
    def differentiable(self) -> bool:
        """Pass at finite-difference accuracy; not a proof."""
        return self.relative_residual < CR_THRESHOLD


def _rep_basis(alg: AlgebraSpec) -> NDArray[np.float64]:
    """Orthonormal basis (columns) of the regular representation, flattened, under the Frobenius product."""
    mats = np.stack([alg.left_matrix(np.eye(alg.dim)[i]).reshape(-1) for i in range(alg.dim)], axis=1)
    q, _ = np.linalg.qr(mats)
    return q


def cr_residual(f, p: Element, h: float | None = None) -> CRReport:
    """Distance of the Jacobian at ``p`` from the regular representation.

    The A-derivative is read off as ``projected @ 1``, i.e. the projected
    differential applied to the unity.
    """
    alg = p.algebra
    J = numeric_jacobian(f, p, h)
    q = _rep_basis(alg)
    projected = (q @ (q.T @ J.reshape(-1))).reshape(J.shape)
    residual = float(np.linalg.norm(J - projected))
    scale = float(np.linalg.norm(J))
    relative = residual / scale if scale > 0 else 0.0
    return CRReport(J, projected, residual, relative, Element(alg, projected @ alg.unity))


Relation = Sequence[tuple[Sequence[int], float]]


def _relation_element(alg: AlgebraSpec, relation: Relation) -> Element:
    acc = alg.zero()
    for idx, b in relation:
        term = alg.one()
        for i in idx:
            term = mul(term, alg.basis(i))
        acc = acc + float(b) * term
    return acc


def component_pde_check(f, p: Element, relation: Relation, h: float | None = None) -> float:
    """Max component of ``sum B * d^k f / dx_i1 ... dx_ik`` at ``p`` (0-based indices, ``k <= 2``).

    Raises:
        RelationNotNull: ``sum B v_i1 * ... * v_ik`` is not zero in the algebra.
    """
    alg = p.algebra
    f = _as_function(f, alg)
    combo = _relation_element(alg, relation)
    if combo.norm() >= RELATION_TOL:
        raise RelationNotNull(f"relation evaluates to {combo!r} in the algebra, not 0")

    def shifted(*moves: tuple[int, float]) -> NDArray[np.float64]:
        x = p.coords.copy()
        for i, d in moves:
            x[i] += d
        return f(Element(alg, x)).coords

    acc = np.zeros(alg.dim)
    for idx, b in relation:
        idx = tuple(idx)
        if len(idx) == 0:
            d = f(p).coords
        elif len(idx) == 1:
            h1 = default_step(p) if h is None else h
            (i,) = idx
            d = (shifted((i, h1)) - shifted((i, -h1))) / (2 * h1)
        elif len(idx) == 2:
            h2 = default_step(p, 2) if h is None else h
            i, j = idx
            if i == j:
                d = (shifted((i, h2)) - 2 * f(p).coords + shifted((i, -h2))) / h2**2
            else:
                d = (
                    shifted((i, h2), (j, h2))
                    - shifted((i, h2), (j, -h2))
                    - shifted((i, -h2), (j, h2))
                    + shifted((i, -h2), (j, -h2))
                ) / (4 * h2**2)
        else:
            raise ValueError("only derivatives of order <= 2 are supported")
        acc += float(b) * d
    return float(np.max(np.abs(acc)))


# -- curves ----------------------------------------------------------------


@dataclass(frozen=True)
class Curve:
    """A parametrized curve ``t in [t0, t1] -> A``.

    ``segments`` is the initial panel count; panel boundaries always include
    the points ``t0 + k (t1 - t0) / segments``, so corners of a polygon should
    sit there. Without ``derivative`` a central difference is used.
    """

    algebra: AlgebraSpec
    param: Callable[[float], Element]
    t0: float
    t1: float
    derivative: Callable[[float], Element] | None = None
    segments: int = 2

    def __post_init__(self):
        if not self.t0 < self.t1:
            raise ValueError("need t0 < t1")
        if self.segments < 1:
            raise ValueError("segments must be positive")

    def point(self, t: float) -> Element:
        return self.param(t)

    def tangent(self, t: float) -> Element:
        if self.derivative is not None:
            return self.derivative(t)
        h = EPS ** (1.0 / 3.0) * max(1.0, abs(t))
        a, b = max(self.t0, t - h), min(self.t1, t + h)
        return (self.param(b) - self.param(a)) / (b - a)

    def reversed(self) -> Curve:
        s = self.t0 + self.t1
        d = self.derivative
        return Curve(
            self.algebra,
            lambda t: self.param(s - t),
            self.t0,
            self.t1,
            None if d is None else (lambda t: -1.0 * d(s - t)),
            self.segments,
        )

    def then(self, other: Curve) -> Curve:
        """Concatenation on ``[0, 2]``: this curve on ``[0, 1]``, ``other`` on ``[1, 2]``."""
        if not other.algebra.same_as(self.algebra):
            raise AlgebraMismatch("curves live in different algebras")
        a, b = self, other
        la, lb = a.t1 - a.t0, b.t1 - b.t0

        def param(t: float) -> Element:
            return a.param(a.t0 + t * la) if t <= 1 else b.param(b.t0 + (t - 1) * lb)

        def deriv(t: float) -> Element:
            return la * a.tangent(a.t0 + t * la) if t <= 1 else lb * b.tangent(b.t0 + (t - 1) * lb)

        return Curve(self.algebra, param, 0.0, 2.0, deriv, 2 * max(a.segments, b.segments))


def segment(z0: Element, z1: Element) -> Curve:
    d = z1 - z0
    return Curve(z0.algebra, lambda t: z0 + t * d, 0.0, 1.0, lambda t: d, 2)


def circle(center: Element, radius: float, axes: tuple[int, int] = (0, 1)) -> Curve:
    """Counter-clockwise circle in the coordinate plane spanned by basis vectors ``axes``."""
    alg = center.algebra
    u, v = alg.basis(axes[0]), alg.basis(axes[1])
    return Curve(
        alg,
        lambda t: center + (radius * math.cos(t)) * u + (radius * math.sin(t)) * v,
        0.0,
        2 * math.pi,
        lambda t: (-radius * math.sin(t)) * u + (radius * math.cos(t)) * v,
        8,
    )


def polygon(vertices: Sequence[Element], closed: bool = True) -> Curve:
    """Piecewise-linear path through ``vertices``, one parameter unit per edge."""
    pts = list(vertices)
    if closed:
        pts.append(pts[0])
    if len(pts) < 2:
        raise ValueError("a polygon needs at least two vertices")
    k = len(pts) - 1
    alg = pts[0].algebra

    def edge(t: float) -> int:
        return min(int(math.floor(t)), k - 1)

    def param(t: float) -> Element:
        i = edge(t)
        return pts[i] + (t - i) * (pts[i + 1] - pts[i])

    def deriv(t: float) -> Element:
        i = edge(t)
        return pts[i + 1] - pts[i]

    return Curve(alg, param, 0.0, float(k), deriv, k)


@dataclass(frozen=True)
class CurveIntegral:
    value: Element
    panels: int
    change: float  # difference between the last two panel counts
    max_f: float  # M: largest sampled ||f||
    length: float  # L: arclength
    ml_bound: float  # m_empirical * M * L
    converged: bool = field(default=True)


def _panel_nodes(c: Curve, panels: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    edges = np.linspace(c.t0, c.t1, panels + 1)
    half = np.diff(edges) / 2
    mid = (edges[:-1] + edges[1:]) / 2
    t = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).reshape(-1)
    w = (half[:, None] * _GL_WEIGHTS[None, :]).reshape(-1)
    return t, w


def _quadrature(f: AFunction, c: Curve, panels: int) -> tuple[NDArray[np.float64], float, float]:
    t, w = _panel_nodes(c, panels)
    alg = c.algebra
    acc = np.zeros((t.size, alg.dim))
    fmax = 0.0
    speed = np.empty(t.size)
    for k, tk in enumerate(t):
        fz = f(c.param(float(tk)))
        dz = c.tangent(float(tk))
        acc[k] = alg.left_matrix(fz.coords) @ dz.coords
        fmax = max(fmax, fz.norm())
        speed[k] = dz.norm()
    if not np.all(np.isfinite(acc)):
        raise NonFiniteIntegrand("integrand is not finite on the curve")
    return w @ acc, fmax, float(w @ speed)


def integrate_curve(f, c: Curve, tol: float = QUAD_TOL, max_panels: int = MAX_PANELS) -> CurveIntegral:
    """``int_C f(z) * dz`` by composite 5-point Gauss-Legendre with panel doubling.

    Doubling stops when two successive results differ by less than
    ``tol * max(1, ||result||)`` or at ``max_panels``.
    """
    f = _as_function(f, c.algebra)
    panels = c.segments
    prev, fmax, length = _quadrature(f, c, panels)
    change = math.inf
    while panels < max_panels:
        panels *= 2
        cur, fmax, length = _quadrature(f, c, panels)
        change = enorm(cur - prev)
        prev = cur
        if change < tol * max(1.0, enorm(cur)):
            break
    m = c.algebra.m_empirical
    return CurveIntegral(
        value=Element(c.algebra, prev),
        panels=panels,
        change=change,
        max_f=fmax,
        length=length,
        ml_bound=m * fmax * length,
        converged=change < tol * max(1.0, enorm(prev)),
    )


def curve_integral(f, c: Curve, tol: float = QUAD_TOL) -> Element:
    return integrate_curve(f, c, tol).value
