import math

import numpy as np
import pytest

from acalc import (
    BadIndex,
    DimensionTooLarge,
    NotCommutative,
    as_generated,
    cos,
    cosh,
    exp,
    identity_suite,
    matrix_algebra,
    n_hyperbolic,
    n_trig,
    preset,
    pythagorean,
    regular_rep,
    second_order_ivp_check,
    sin,
    sinh,
    special_functions,
)
from acalc.algebra import generated_algebra
from acalc.transcendental import (
    column_derivative_residual,
    leibniz_det,
    pythagorean_report,
    real_pythagorean,
)

from conftest import COMMUTATIVE_PRESETS

PYTH_PRESETS = [f"H_N:{n}" for n in range(2, 6)] + [f"C_N:{n}" for n in range(2, 6)] + [
    "Gamma_N:2",
    "Gamma_N:3",
    "Gamma_N:4",
    "dual",
]


def fd_one(f, z, h=1e-5):
    one = z.algebra.one()
    return (f(z + h * one) - f(z - h * one)) / (2 * h)


# -- elementary functions --------------------------------------------------


def test_exp_hyperbolic_closed_form(H, rng):
    for _ in range(20):
        x, y = rng.uniform(-2, 2, 2)
        want = math.exp(x) * np.array([math.cosh(y), math.sinh(y)])
        assert np.allclose(exp(H.element([x, y])).coords, want, rtol=1e-13, atol=1e-14)


def test_exp_dual_closed_form(D, rng):
    for _ in range(20):
        x, y = rng.uniform(-2, 2, 2)
        assert np.allclose(exp(D.element([x, y])).coords, [math.exp(x), y * math.exp(x)], rtol=1e-13, atol=1e-14)


def test_exp_zero(H):
    assert exp(H.zero()).allclose(H.one(), atol=0)


def test_cos_hyperbolic_closed_form(H, rng):
    for _ in range(20):
        x, y = rng.uniform(-2, 2, 2)
        want = [math.cos(x) * math.cos(y), -math.sin(x) * math.sin(y)]
        assert np.allclose(cos(H.element([x, y])).coords, want, atol=1e-13)


def test_hyperbolic_functions_at_zero(H):
    assert cosh(H.zero()).allclose(H.one(), atol=0)
    assert sinh(H.zero()).norm() == 0


def test_cos_on_complex_real_axis(C):
    for x in np.linspace(-math.pi, math.pi, 25):
        assert abs(cos(C.element([x, 0])).coords[0] - math.cos(x)) < 1e-12


def test_parity_is_exact(rng):
    A = preset("C_N:3")
    for _ in range(10):
        z = A.random_element(rng, -2, 2)
        assert np.array_equal(cosh(-z).coords, cosh(z).coords)
        assert np.array_equal(sin(-z).coords, -sin(z).coords)


def test_n_functions_reduce_to_classics(C, rng):
    for _ in range(5):
        z = C.random_element(rng, -2, 2)
        assert n_trig(2, 0, z).allclose(cos(z), atol=1e-14)
        assert n_hyperbolic(2, 1, z).allclose(sinh(z), atol=1e-14)
        assert n_trig(2, 1, z).allclose(sin(z), atol=1e-14)


def test_h3_exponential_decomposition():
    A = preset("H_N:3")
    j = A.basis(1)
    R = preset("real")
    for t in np.linspace(-2, 2, 9):
        parts = [n_hyperbolic(3, p, R.element([t])).coords[0] for p in range(3)]
        assert np.allclose(exp(t * j).coords, parts, atol=1e-13)


@pytest.mark.parametrize("N", [3, 4, 5])
def test_cn_exponential_decomposition(N):
    A = preset(f"C_N:{N}")
    j = A.basis(1)
    R = preset("real")
    for t in np.linspace(-2, 2, 9):
        parts = [n_trig(N, p, R.element([t])).coords[0] for p in range(N)]
        assert np.allclose(exp(t * j).coords, parts, atol=1e-13)


def test_bad_index(C):
    with pytest.raises(BadIndex):
        n_trig(3, 3, C.one())
    with pytest.raises(BadIndex):
        n_hyperbolic(0, 0, C.one())


def test_n_trig_derivative_relations(rng):
    A = preset("C_N:3")
    N = 4
    for _ in range(5):
        z = A.random_element(rng, -1, 1)
        for p in range(2, N):
            d = fd_one(lambda w: n_trig(N, p, w), z)
            assert (d - n_trig(N, p - 1, z)).norm() < 1e-6
        d = fd_one(lambda w: n_trig(N, 0, w), z)
        assert (d + n_trig(N, N - 1, z)).norm() < 1e-6


@pytest.mark.parametrize("name", ["complex", "hyperbolic", "C_N:3"])
def test_derivative_relations_classic(name, rng):
    A = preset(name)
    for _ in range(10):
        z = A.random_element(rng, -1.5, 1.5)
        assert (fd_one(cosh, z) - sinh(z)).norm() < 1e-6
        assert (fd_one(sin, z) - cos(z)).norm() < 1e-6


# -- properties ------------------------------------------------------------


@pytest.mark.parametrize("name", COMMUTATIVE_PRESETS)
def test_exp_homomorphism(name):
    A = preset(name)
    rng = np.random.default_rng(17)
    for _ in range(200):
        z, w = A.random_element(rng, -2, 2), A.random_element(rng, -2, 2)
        lhs = exp(z + w)
        assert (lhs - exp(z) * exp(w)).norm() <= 1e-9 * (1 + lhs.norm())


@pytest.mark.parametrize("name", COMMUTATIVE_PRESETS)
def test_euler_split(name):
    A = preset(name)
    rng = np.random.default_rng(4)
    for _ in range(50):
        z = A.random_element(rng, -2, 2)
        e = exp(z)
        assert (e - (cosh(z) + sinh(z))).norm() < 1e-12 * (1 + e.norm())


# -- special functions -----------------------------------------------------


def test_gamma3_special_functions():
    g = as_generated(preset("Gamma_N:3"))
    t = np.linspace(-2, 2, 41)
    table = special_functions(g, t)
    want = np.stack([np.ones_like(t), t, t * t / 2], axis=1)
    assert np.max(np.abs(table.values - want)) < 1e-12
    assert table.reconstruction_residual() < 1e-10


def test_complex_special_functions(C):
    g = as_generated(C)
    t = np.linspace(-2, 2, 41)
    table = special_functions(g, t)
    assert np.max(np.abs(table.values[:, 0] - np.cos(t))) < 1e-10
    assert np.max(np.abs(table.values[:, 1] - np.sin(t))) < 1e-10
    for i in range(2):
        for tk in (-1.3, 0.4, 2.0):
            ref = math.cos(tk) if i == 0 else math.sin(tk)
            assert abs(table.evaluate_component(i, tk) - ref) < 1e-14


def test_h3_special_function_coefficients():
    g = as_generated(preset("H_N:3"))
    table = special_functions(g, np.linspace(-2, 2, 21))
    for i in range(3):
        for n in range(30):
            want = 1 / math.factorial(n) if n % 3 == i else 0.0
            assert table.coefficient(i, n) == want
    assert table.reconstruction_residual() < 1e-10


@pytest.mark.parametrize("c", [2.0, -0.5, 3.0])
def test_reconstruction_on_general_generated_algebras(c):
    g = generated_algebra(4, c)
    table = special_functions(g, np.linspace(-2, 2, 17))
    assert table.reconstruction_residual() < 1e-10


def test_special_table_csv():
    g = as_generated(preset("Gamma_N:3"))
    text = special_functions(g, [0.0, 1.0]).to_csv().splitlines()
    assert text[0] == "t,f_1,f_2,f_3"
    assert text[2] == "1.0,1.0,1.0,0.5"


# -- pythagorean -----------------------------------------------------------


def test_pythagorean_complex(C, rng):
    g = as_generated(C)
    for _ in range(10):
        z = C.random_element(rng)
        val = pythagorean(g, z).value
        assert (val - (cos(z) * cos(z) + sin(z) * sin(z))).norm() < 1e-9
        assert (val - C.one()).norm() < 1e-9


def test_pythagorean_dual_exact(D, rng):
    g = as_generated(D)
    for _ in range(10):
        z = D.random_element(rng, -3, 3)
        ev = pythagorean(g, z)
        assert np.array_equal(ev.value.coords, [1.0, 0.0])
        # det [[1, 0], [z, 1]]
        assert ev.matrix_over_A[0][1].norm() == 0
        assert ev.matrix_over_A[1][1].allclose(D.one(), atol=0)


@pytest.mark.parametrize("name", PYTH_PRESETS)
def test_n_pythagorean(name):
    A = preset(name)
    g = as_generated(A)
    rng = np.random.default_rng(6)
    for _ in range(50):
        z = A.random_element(rng, -1, 1)
        assert (pythagorean(g, z).value - A.one()).norm() < 1e-8


def test_h3_cubic_identity_from_components(rng):
    A = preset("H_N:3")
    for _ in range(20):
        z = A.random_element(rng, -1, 1)
        c, s1, s2 = (n_hyperbolic(3, p, z) for p in range(3))
        val = c * c * c + s1 * s1 * s1 + s2 * s2 * s2 - 3.0 * (c * s1 * s2)
        assert (val - A.one()).norm() < 1e-9


@pytest.mark.parametrize("name", ["H_N:3", "C_N:4", "Gamma_N:3", "complex"])
def test_pythagorean_agrees_with_real_determinant(name):
    A = preset(name)
    g = as_generated(A)
    for t in np.linspace(-2, 2, 9):
        val = pythagorean(g, t * A.one()).value
        assert abs(val.coords[0] - real_pythagorean(g, t)) < 1e-9
        assert np.max(np.abs(val.coords[1:])) < 1e-9


@pytest.mark.parametrize("name", ["H_N:3", "C_N:4", "Gamma_N:3", "hyperbolic"])
def test_column_derivative_structure(name):
    g = as_generated(preset(name))
    assert column_derivative_residual(g, np.linspace(-1.5, 1.5, 7)) < 1e-6


def test_leibniz_det_matches_numpy(rng):
    R = preset("real")
    for n in range(1, 6):
        m = rng.standard_normal((n, n))
        det = leibniz_det([[R.element([m[r, c]]) for c in range(n)] for r in range(n)])
        assert abs(det.coords[0] - np.linalg.det(m)) < 1e-10


def test_leibniz_det_limits():
    M = matrix_algebra(2)
    with pytest.raises(NotCommutative):
        leibniz_det([[M.one()]])
    R = preset("real")
    with pytest.raises(DimensionTooLarge):
        leibniz_det([[R.one()] * 9 for _ in range(9)])


def test_pythagorean_dimension_cap():
    g = as_generated(preset("H_N:9"))
    with pytest.raises(DimensionTooLarge):
        pythagorean(g, g.base.one())


def test_pythagorean_report_shape():
    rep = pythagorean_report(as_generated(preset("C_N:3")), trials=5)
    assert set(rep) == {"algebra", "N", "c", "max_residual", "trials"}
    assert rep["N"] == 3 and rep["c"] == -1.0


# -- identity suite --------------------------------------------------------


@pytest.mark.parametrize("name", ["hyperbolic", "C_N:3"])
def test_identity_suite_passes(name):
    rep = identity_suite(preset(name), trials=100)
    assert rep.passed, rep.residuals
    assert rep.domain == (-2.0, 2.0)


def test_identities_exact_at_zero(H):
    from acalc.transcendental import identity_residuals

    res = identity_residuals(H.zero(), H.zero())
    assert all(v == 0.0 for v in res.values())


def test_identity_suite_rejects_noncommutative():
    with pytest.raises(NotCommutative):
        identity_suite(matrix_algebra(2), trials=1)


# -- second order IVP ------------------------------------------------------


def test_ivp_cosine(H):
    grid = [H.element(v) for v in ([0.1, 0.2], [0.5, -0.3], [1.0, 1.0])]
    rep = second_order_ivp_check(H.one(), H.zero(), grid)
    assert rep.max_residual < 1e-5
    assert rep.initial_value_error < 1e-15


def test_ivp_random(H, rng):
    a, b = H.random_element(rng), H.random_element(rng)
    grid = [H.random_element(rng) for _ in range(10)]
    rep = second_order_ivp_check(a, b, grid)
    assert rep.max_residual < 1e-5
    assert rep.initial_value_error < 1e-14
    assert rep.initial_slope_error < 1e-8


def test_ivp_zero(H):
    rep = second_order_ivp_check(H.zero(), H.zero(), [H.one()])
    assert rep.max_residual == 0 and rep.initial_value_error == 0


def test_ivp_rejects_noncommutative():
    M = matrix_algebra(2)
    with pytest.raises(NotCommutative):
        second_order_ivp_check(M.one(), M.zero(), [M.one()])


def test_regular_rep_of_exp_has_unit_determinant():
    g = as_generated(preset("C_N:3"))
    for t in (-1.0, 0.5, 2.0):
        assert abs(np.linalg.det(regular_rep(exp(t * g.generator()))) - 1) < 1e-12
