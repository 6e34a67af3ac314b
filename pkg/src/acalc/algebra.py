"""Finite-dimensional real unital associative algebras given by structure constants.

An algebra of dimension ``N`` is fixed by a tensor ``C`` of shape ``(N, N, N)``
with ``v_i * v_j = sum_k C[i, j, k] v_k`` and by the coordinates of its unity.
Elements are coordinate vectors in that basis and the norm is the Euclidean
length of the coordinates.

Example:
    >>> H = preset("hyperbolic")
    >>> z = H.element([1.0, 1.0]) * H.element([1.0, -1.0])
    >>> z.coords.tolist()
    [0.0, 0.0]
"""
from __future__ import annotations

import enum
import json
import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from math import sqrt
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import (
    AlgebraMismatch,
    AssociativityViolation,
    DimensionMismatch,
    NotGenerated,
    NotInvertible,
    UnityViolation,
    UnknownPreset,
)

ASSOC_TOL = 1e-12
UNITY_TOL = 1e-12
TOL_SING = 1e-10
TOL_ZERO = 1e-12
NORM_SAFETY = 1e-9


def enorm(v: NDArray[np.float64]) -> float:
    """Euclidean norm that does not underflow for tiny coordinates."""
    return math.hypot(*v)


def _frozen(a: ArrayLike) -> NDArray[np.float64]:
    arr = np.array(a, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class AlgebraSpec:
    """A validated algebra. Build with :func:`build_algebra` or :func:`preset`.

    Attributes:
        constants: structure constants ``C[i, j, k]``.
        unity: coordinates of the multiplicative identity.
        labels: display names of the basis vectors.
        commutative: ``C[i, j, k] == C[j, i, k]`` for all indices.
        m_theoretical: guaranteed submultiplicative constant ``max|C| (N^2 - N + 1) sqrt(N)``.
        m_empirical: sharp constant found by optimization, inflated by a 1e-9 safety factor.
    """

    constants: NDArray[np.float64]
    unity: NDArray[np.float64]
    labels: tuple[str, ...]
    commutative: bool
    m_theoretical: float
    m_empirical: float
    name: str = "custom"
    # _left[i] is the matrix of left multiplication by v_i, i.e. _left[i][k, j] = C[i, j, k]
    _left: NDArray[np.float64] = field(repr=False, default=None)  # type: ignore[assignment]

    @property
    def dim(self) -> int:
        return self.constants.shape[0]

    def element(self, coords: ArrayLike) -> Element:
        return Element(self, coords)

    def one(self) -> Element:
        return Element(self, self.unity)

    def zero(self) -> Element:
        return Element(self, np.zeros(self.dim))

    def basis(self, i: int) -> Element:
        e = np.zeros(self.dim)
        e[i] = 1.0
        return Element(self, e)

    def scalar(self, c: float) -> Element:
        """The real number ``c`` embedded as ``c * 1``."""
        return Element(self, c * self.unity)

    def random_element(self, rng: np.random.Generator, low: float = -1.0, high: float = 1.0) -> Element:
        return Element(self, rng.uniform(low, high, size=self.dim))

    def left_matrix(self, coords: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.tensordot(coords, self._left, axes=1)

    def same_as(self, other: AlgebraSpec) -> bool:
        if self is other:
            return True
        return (
            self.dim == other.dim
            and np.array_equal(self.constants, other.constants)
            and np.array_equal(self.unity, other.unity)
        )

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "unity": self.unity.tolist(),
            "constants": self.constants.tolist(),
            "labels": list(self.labels),
        }

    def __repr__(self) -> str:
        return f"AlgebraSpec(name={self.name!r}, dim={self.dim}, commutative={self.commutative})"


class Element:
    """A member of an algebra, stored as an immutable coordinate vector.

    ``x * y`` is the algebra product, ``c * x`` and ``x / c`` scale by reals.
    """

    __slots__ = ("algebra", "coords")

    def __init__(self, algebra: AlgebraSpec, coords: ArrayLike):
        arr = np.array(coords, dtype=np.float64).reshape(-1)
        if arr.shape[0] != algebra.dim:
            raise DimensionMismatch(
                f"element has {arr.shape[0]} coordinates but algebra has dimension {algebra.dim}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "algebra", algebra)
        object.__setattr__(self, "coords", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Element is immutable")

    def _check(self, other: Element) -> None:
        if not self.algebra.same_as(other.algebra):
            raise AlgebraMismatch(f"{self.algebra!r} vs {other.algebra!r}")

    def __add__(self, other):
        if isinstance(other, Element):
            self._check(other)
            return Element(self.algebra, self.coords + other.coords)
        if isinstance(other, (int, float)):
            return Element(self.algebra, self.coords + other * self.algebra.unity)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Element):
            self._check(other)
            return Element(self.algebra, self.coords - other.coords)
        if isinstance(other, (int, float)):
            return Element(self.algebra, self.coords - other * self.algebra.unity)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, (int, float)):
            return Element(self.algebra, other * self.algebra.unity - self.coords)
        return NotImplemented

    def __neg__(self) -> Element:
        return Element(self.algebra, -self.coords)

    def __mul__(self, other):
        if isinstance(other, Element):
            return mul(self, other)
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Element(self.algebra, self.coords * float(other))
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Element(self.algebra, self.coords * float(other))
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Element(self.algebra, self.coords / float(other))
        return NotImplemented

    def __pow__(self, n: int) -> Element:
        return power(self, n)

    def norm(self) -> float:
        return enorm(self.coords)

    def allclose(self, other: Element, atol: float = 1e-12, rtol: float = 0.0) -> bool:
        self._check(other)
        return bool(np.allclose(self.coords, other.coords, atol=atol, rtol=rtol))

    def __repr__(self) -> str:
        labels = self.algebra.labels
        terms = " + ".join(f"{c:.6g}*{lab}" for c, lab in zip(self.coords, labels))
        return f"Element({terms})"


class Kind(enum.Enum):
    UNIT = "Unit"
    ZERO_DIVISOR = "ZeroDivisor"
    ZERO = "Zero"


def _check_assoc(C: NDArray[np.float64]) -> tuple[float, tuple[int, int, int]]:
    # (v_i v_j) v_k and v_i (v_j v_k), coordinate m
    left = np.einsum("ijl,lkm->ijkm", C, C)
    right = np.einsum("jkl,ilm->ijkm", C, C)
    resid = np.abs(left - right).max(axis=3)
    idx = np.unravel_index(int(np.argmax(resid)), resid.shape)
    return float(resid[idx]), tuple(int(i) for i in idx)  # type: ignore[return-value]


def theoretical_constant(constants: NDArray[np.float64]) -> float:
    n = constants.shape[0]
    return float(np.abs(constants).max()) * (n * n - n + 1) * sqrt(n)


def _right_matrix(C: NDArray[np.float64], y: NDArray[np.float64]) -> NDArray[np.float64]:
    # R(y)[k, i] = sum_j y_j C[i, j, k], the matrix of x -> x * y
    return np.einsum("j,ijk->ki", y, C)


def _empirical_constant(
    C: NDArray[np.float64], samples: int, seed: int, starts: int = 16, sweeps: int = 60
) -> float:
    n = C.shape[0]
    rng = np.random.default_rng(seed)
    left = C.transpose(0, 2, 1)

    x = rng.standard_normal((samples, n))
    y = rng.standard_normal((samples, n))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    y /= np.linalg.norm(y, axis=1, keepdims=True)
    prod = np.einsum("si,sj,ijk->sk", x, y, C)
    ratios = np.linalg.norm(prod, axis=1)
    best = float(ratios.max())

    # alternating ascent: for fixed x the best y is the top right singular vector of M(x)
    order = np.argsort(ratios)[::-1][: starts // 2]
    seeds = np.vstack([x[order], rng.standard_normal((starts - len(order), n))])
    for x0 in seeds:
        xv = x0 / np.linalg.norm(x0)
        for _ in range(sweeps):
            _, _, vt = np.linalg.svd(np.tensordot(xv, left, axes=1))
            yv = vt[0]
            _, s, vt = np.linalg.svd(_right_matrix(C, yv))
            xv = vt[0]
        best = max(best, float(s[0]))
    # the theoretical constant is a proven bound, so the safety margin never needs to exceed it
    return min(best * (1.0 + NORM_SAFETY), theoretical_constant(C))


def build_algebra(
    constants: ArrayLike,
    unity: ArrayLike,
    labels: Sequence[str] | None = None,
    name: str = "custom",
    samples: int = 2000,
    seed: int = 0,
) -> AlgebraSpec:
    """Validate structure constants and return an :class:`AlgebraSpec`.

    Raises:
        DimensionMismatch: tensor is not ``N x N x N`` or unity has the wrong length.
        AssociativityViolation: some basis triple fails associativity by more than 1e-12.
        UnityViolation: the given unity is not a two-sided identity.
    """
    C = np.array(constants, dtype=np.float64)
    if C.ndim != 3 or C.shape[0] < 1 or not (C.shape[0] == C.shape[1] == C.shape[2]):
        raise DimensionMismatch(f"structure constants must be N x N x N, got shape {C.shape}")
    n = C.shape[0]
    u = np.array(unity, dtype=np.float64).reshape(-1)
    if u.shape[0] != n:
        raise DimensionMismatch(f"unity has {u.shape[0]} coordinates, expected {n}")
    if not np.all(np.isfinite(C)) or not np.all(np.isfinite(u)):
        raise DimensionMismatch("structure constants and unity must be finite")
    if labels is None:
        labels = tuple(f"e{i + 1}" for i in range(n))
    elif len(labels) != n:
        raise DimensionMismatch(f"{len(labels)} labels for dimension {n}")

    resid, triple = _check_assoc(C)
    if resid > ASSOC_TOL:
        raise AssociativityViolation(resid, triple)

    eye = np.eye(n)
    left_unit = np.einsum("i,ijk->jk", u, C)  # row j: coords of 1 * v_j
    right_unit = np.einsum("j,ijk->ik", u, C)
    err = max(np.abs(left_unit - eye).max(), np.abs(right_unit - eye).max())
    if err > UNITY_TOL:
        raise UnityViolation(f"unity fails the identity axiom by {err:.3e}")

    return AlgebraSpec(
        constants=_frozen(C),
        unity=_frozen(u),
        labels=tuple(labels),
        commutative=bool(np.array_equal(C, C.transpose(1, 0, 2))),
        m_theoretical=theoretical_constant(C),
        m_empirical=_empirical_constant(C, samples, seed),
        name=name,
        _left=_frozen(C.transpose(0, 2, 1)),
    )


def norm_constants(spec: AlgebraSpec, samples: int = 2000, seed: int = 0) -> tuple[float, float]:
    """Return ``(m_theoretical, m_empirical)``; recomputes the empirical constant with ``samples``."""
    return theoretical_constant(spec.constants), _empirical_constant(spec.constants, samples, seed)


# -- presets ---------------------------------------------------------------


def generated_constants(n: int, c: float) -> NDArray[np.float64]:
    """Constants for the algebra with basis ``1, j, ..., j^(n-1)`` and ``j^n = c``."""
    C = np.zeros((n, n, n))
    for a in range(n):
        for b in range(n):
            s = a + b
            if s < n:
                C[a, b, s] = 1.0
            else:
                C[a, b, s - n] = c
    return C


def _power_labels(n: int, gen: str) -> tuple[str, ...]:
    return ("1",) + tuple(gen if p == 1 else f"{gen}^{p}" for p in range(1, n))


@lru_cache(maxsize=None)
def _generated(n: int, c: float, gen: str, name: str) -> AlgebraSpec:
    unity = np.zeros(n)
    unity[0] = 1.0
    return build_algebra(generated_constants(n, c), unity, _power_labels(n, gen), name=name)


@lru_cache(maxsize=None)
def _direct_product(n: int) -> AlgebraSpec:
    C = np.zeros((n, n, n))
    for i in range(n):
        C[i, i, i] = 1.0
    return build_algebra(C, np.ones(n), tuple(f"p{i + 1}" for i in range(n)), name=f"direct_product:{n}")


_PRESET_RE = re.compile(r"^\s*([A-Za-z_]+?)\s*(?:[:(]\s*(\d+)\s*\)?)?\s*$")


def preset(name: str, n: int | None = None) -> AlgebraSpec:
    """Return a named algebra.

    Names: ``real``, ``complex``, ``hyperbolic``, ``dual``, ``direct_product``,
    ``H_N`` (``j^n = 1``), ``C_N`` (``j^n = -1``), ``Gamma_N`` (``e^n = 0``).
    The parametrised ones take ``n`` either as an argument or inline, as in
    ``"H_N:3"`` or ``"H_N(3)"``.
    """
    m = _PRESET_RE.match(name)
    if m is None:
        raise UnknownPreset(f"unknown preset {name!r}")
    key = m.group(1).lower()
    if m.group(2) is not None:
        n = int(m.group(2))

    fixed = {
        "real": (1, 1.0, "1"),
        "complex": (2, -1.0, "i"),
        "hyperbolic": (2, 1.0, "j"),
        "dual": (2, 0.0, "eps"),
    }
    if key in fixed:
        dim, c, gen = fixed[key]
        if key == "real":
            return build_algebra([[[1.0]]], [1.0], ("1",), name="real")
        return _generated(dim, c, gen, key)

    family = {"h_n": (1.0, "j", "H_N"), "c_n": (-1.0, "j", "C_N"), "gamma_n": (0.0, "eps", "Gamma_N")}
    if key in family or key == "direct_product":
        if n is None or n < 2:
            raise UnknownPreset(f"preset {key!r} needs n >= 2, got {n}")
        if key == "direct_product":
            return _direct_product(n)
        c, gen, label = family[key]
        return _generated(n, c, gen, f"{label}:{n}")
    raise UnknownPreset(f"unknown preset {name!r}")


PRESET_NAMES = ("real", "complex", "hyperbolic", "dual", "direct_product:n", "H_N:n", "C_N:n", "Gamma_N:n")


# -- element operations ----------------------------------------------------


def mul(x: Element, y: Element) -> Element:
    """Algebra product: ``coords_k = sum_ij x_i y_j C[i, j, k]``."""
    x._check(y)
    return Element(x.algebra, x.algebra.left_matrix(x.coords) @ y.coords)


def power(x: Element, n: int) -> Element:
    """``x^n`` by repeated left multiplication (``x^0`` is the unity)."""
    if n < 0:
        return power(inverse(x), -n)
    M = regular_rep(x)
    v = x.algebra.unity
    for _ in range(n):
        v = M @ v
    return Element(x.algebra, v)


def regular_rep(x: Element) -> NDArray[np.float64]:
    """Matrix of left multiplication by ``x``; column ``p`` is ``coords(x * v_p)``."""
    return x.algebra.left_matrix(x.coords)


def classify(x: Element, tol_sing: float = TOL_SING, tol_zero: float = TOL_ZERO) -> Kind:
    if x.norm() < tol_zero:
        return Kind.ZERO
    s = np.linalg.svd(regular_rep(x), compute_uv=False)
    if s[-1] > tol_sing * s[0]:
        return Kind.UNIT
    return Kind.ZERO_DIVISOR


def inverse(x: Element) -> Element:
    kind = classify(x)
    if kind is not Kind.UNIT:
        raise NotInvertible(f"{x!r} is {kind.value}, not a unit")
    return Element(x.algebra, np.linalg.solve(regular_rep(x), x.algebra.unity))


def _product_basis_check(x: Element, target: AlgebraSpec, what: str) -> None:
    if not x.algebra.same_as(target):
        raise AlgebraMismatch(f"expected an element of {what}, got {x.algebra!r}")


def hyperbolic_isomorphism(direction: str, x: Element) -> Element:
    """The isomorphism between ``R x R`` and the hyperbolic numbers.

    ``direction="to_hyperbolic"`` maps ``(a, b)`` to ``a(1+j)/2 + b(1-j)/2``;
    ``direction="to_product"`` maps ``x + jy`` to ``(x + y, x - y)``.
    """
    H = preset("hyperbolic")
    P = preset("direct_product", 2)
    if direction == "to_hyperbolic":
        _product_basis_check(x, P, "direct_product:2")
        a, b = x.coords
        return H.element([(a + b) / 2.0, (a - b) / 2.0])
    if direction == "to_product":
        _product_basis_check(x, H, "hyperbolic")
        u, v = x.coords
        return P.element([u + v, u - v])
    raise ValueError(f"direction must be 'to_hyperbolic' or 'to_product', got {direction!r}")


# -- generated algebras ----------------------------------------------------


@dataclass(frozen=True)
class GeneratedAlgebra:
    """An algebra whose basis is ``1, g, g^2, ..., g^(N-1)`` with ``g^N = c * 1``."""

    base: AlgebraSpec
    generator_index: int
    power_value: float

    @property
    def dim(self) -> int:
        return self.base.dim

    def generator(self) -> Element:
        return self.base.basis(self.generator_index)


def as_generated(spec: AlgebraSpec, generator_index: int = 1, tol: float = 1e-12) -> GeneratedAlgebra:
    """Check that ``spec`` is generated by basis vector ``generator_index``."""
    n = spec.dim
    if n == 1:
        return GeneratedAlgebra(spec, 0, float(spec.unity[0]))
    g = spec.basis(generator_index)
    p = spec.one()
    for k in range(n):
        if not np.allclose(p.coords, np.eye(n)[k], atol=tol):
            raise NotGenerated(f"basis vector {k} is not generator^{k}")
        p = p * g
    c = p.coords[0]
    if not np.allclose(p.coords, c * spec.unity, atol=tol):
        raise NotGenerated("generator^N is not a real multiple of the unity")
    return GeneratedAlgebra(spec, generator_index, float(c))


def generated_algebra(n: int, c: float) -> GeneratedAlgebra:
    if n < 1:
        raise DimensionMismatch("n must be >= 1")
    unity = np.zeros(n)
    unity[0] = 1.0
    spec = build_algebra(generated_constants(n, c), unity, _power_labels(n, "j"), name=f"gen:{n}:{c:g}")
    return as_generated(spec)


# -- file format -----------------------------------------------------------


def algebra_from_dict(data: dict, name: str = "custom") -> AlgebraSpec:
    try:
        dim = int(data["dim"])
        constants = data["constants"]
        unity = data["unity"]
    except KeyError as exc:
        raise DimensionMismatch(f"algebra file is missing field {exc.args[0]!r}") from None
    C = np.array(constants, dtype=np.float64)
    if C.shape != (dim, dim, dim):
        raise DimensionMismatch(f"constants have shape {C.shape}, expected {(dim, dim, dim)}")
    return build_algebra(C, unity, data.get("labels"), name=name)


def load_algebra(path: str | Path) -> AlgebraSpec:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        data = json.load(fh)
    return algebra_from_dict(data, name=path.stem)


def save_algebra(spec: AlgebraSpec, path: str | Path) -> None:
    Path(path).write_text(json.dumps(spec.to_dict(), indent=2), encoding="utf-8")


def elements(spec: AlgebraSpec, rows: Iterable[ArrayLike]) -> list[Element]:
    return [Element(spec, r) for r in rows]


@lru_cache(maxsize=None)
def matrix_algebra(n: int) -> AlgebraSpec:
    """Real ``n x n`` matrices with the matrix-unit basis ``E_11, E_12, ..., E_nn`` (row-major).

    The coordinate norm is then the Frobenius norm. Noncommutative for ``n >= 2``.
    """
    d = n * n
    C = np.zeros((d, d, d))
    for a in range(n):
        for b in range(n):
            for c in range(n):
                # E_ab E_bc = E_ac
                C[a * n + b, b * n + c, a * n + c] = 1.0
    labels = tuple(f"E{a + 1}{b + 1}" for a in range(n) for b in range(n))
    return build_algebra(C, np.eye(n).reshape(-1), labels, name=f"matrix:{n}")
