"""Acceptance gate: one test per criterion, each reporting a single PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the lines are collected into
the terminal summary (and printed directly under ``-s``).
"""
import math

import numpy as np
import pytest

from acalc import PRESET_NAMES, as_generated, preset, regular_rep
from acalc.calculus import circle, cr_residual, curve_integral, polygon
from acalc.coeffs import parse_real
from acalc.power_series import (
    Grid,
    PowerSeries,
    Slice,
    derivative_series,
    estimate_radii,
    evaluate,
    geometric,
    geometric_series,
    region_scan,
)
from acalc.series import TermStream, cauchy_product, sum_series
from acalc.algebra import power
from acalc.transcendental import (
    cos,
    cosh,
    exp,
    function_series,
    n_hyperbolic,
    pythagorean,
    sin,
    sinh,
    special_functions,
)

from conftest import ACCEPTANCE_LINES, COMMUTATIVE_PRESETS

ALL_PRESETS = COMMUTATIVE_PRESETS + ["H_N:4", "C_N:5", "Gamma_N:4", "direct_product:2"]


def report(n, title, checks):
    """``checks`` maps a short label to ``(ok, detail)``."""
    failed = [k for k, (ok, _) in checks.items() if not ok]
    detail = "; ".join(f"{k}={d}" for k, (_, d) in checks.items())
    line = f"{'FAIL' if failed else 'PASS'} criterion {n}: {title} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert not failed, line


def fmt(x):
    return f"{x:.3g}"


def test_regular_representation():
    C, H = preset("complex"), preset("hyperbolic")
    exact = np.array_equal(regular_rep(C.element([3, -7])), [[3, 7], [-7, 3]]) and np.array_equal(
        regular_rep(H.element([3, -7])), [[3, -7], [-7, 3]]
    )
    worst = 0.0
    for name in ALL_PRESETS:
        A = preset(name)
        rng = np.random.default_rng(1)
        for _ in range(1000):
            x, y = A.random_element(rng), A.random_element(rng)
            worst = max(worst, float(np.linalg.norm(regular_rep(x * y) - regular_rep(x) @ regular_rep(y))))
    report(1, "regular representation", {"exact_2x2": (exact, exact), "homomorphism": (worst < 1e-10, fmt(worst))})


def test_norm_constants():
    C, H = preset("complex"), preset("hyperbolic")
    dh = abs(H.m_empirical - math.sqrt(2))
    dc = abs(C.m_empirical - 1.0)
    report(
        2,
        "norm constants",
        {
            "H_emp": (dh < 1e-6, fmt(dh)),
            "C_emp": (dc < 1e-6, fmt(dc)),
            "H_theory": (H.m_theoretical == 3 * math.sqrt(2), H.m_theoretical),
        },
    )


def test_radius_table():
    H = preset("hyperbolic")
    rep = estimate_radii(PowerSeries.from_real(H, parse_real("3^n / n")), probe=200)
    target = 1 / (3 * math.sqrt(2))

    def rel(x, t):
        return abs(x - t) / t

    checks = {
        "R_root": (rel(rep.R_root, target) < 0.02, fmt(rep.R_root)),
        "R_ratio_real": (rel(rep.R_ratio_real, target) < 0.02, fmt(rep.R_ratio_real)),
        "R_ratio_unit": (rel(rep.R_ratio_unit, 1 / 6) < 0.02, fmt(rep.R_ratio_unit)),
    }
    report(3, "radius table for 3^n/n", checks)


def test_band():
    H = preset("hyperbolic")
    d = H.element([1, 1])
    p = PowerSeries.along(H, d, lambda n: 1.0)
    scan = region_scan(p, Slice(H.zero(), H.basis(0), H.basis(1)), Grid(-2, 2, -2, 2, 81, 81))
    x, y = np.meshgrid(scan.grid.u_values, scan.grid.v_values, indexing="ij")
    codes = scan.codes()
    inside = np.abs(x + y) <= 0.95 + 1e-12
    outside = (np.abs(x + y) >= 1.05 - 1e-12) & (np.abs(x - y) >= 0.05 - 1e-12)
    bad_in = int(np.sum(codes[inside] != "C"))
    bad_out = int(np.sum(codes[outside] != "D"))
    res = evaluate(p, H.element([5, -5]))
    exact = res.converged and np.array_equal(res.value.coords, [1.0, 1.0])
    report(
        4,
        "band region of sum (1+j) z^n",
        {
            "inside_not_C": (bad_in == 0, bad_in),
            "outside_not_D": (bad_out == 0, bad_out),
            "eval_5(1-j)": (exact and res.settled_at <= 2, f"{res.value.coords.tolist()}@{res.settled_at}"),
        },
    )


def test_diamond():
    H = preset("hyperbolic")
    checks = {}
    for label, z in (("0.9j", [0, 0.9]), ("0.45+0.45j", [0.45, 0.45])):
        g = geometric(H, H.element(z))
        ok = g.result.converged and g.mismatch is not None and g.mismatch < 1e-8
        checks[label] = (ok, f"{g.result.status.value}/{fmt(g.mismatch)}")
    g = geometric(H, H.element([0, 1.1]))
    checks["1.1j"] = (g.result.status.value == "Diverged", g.result.status.value)
    report(5, "diamond region of the geometric series", checks)


def test_direct_product_square():
    P = preset("direct_product:2")
    scan = region_scan(geometric_series(P), Slice(P.zero(), P.basis(0), P.basis(1)), Grid(-2, 2, -2, 2, 41, 41))
    x, y = np.meshgrid(scan.grid.u_values, scan.grid.v_values, indexing="ij")
    r = np.maximum(np.abs(x), np.abs(y))
    cell = 0.1
    codes = scan.codes()
    clear = np.abs(r - 1) > cell + 1e-12
    wrong = int(np.sum(codes[clear & (r < 1)] != "C") + np.sum(codes[clear & (r > 1)] != "D"))
    val = evaluate(geometric_series(P), P.element([0.5, -0.5])).value
    err = float(np.max(np.abs(val.coords - [2.0, 2.0 / 3.0])))
    report(6, "square region on RxR", {"misclassified": (wrong == 0, wrong), "eval": (err < 1e-10, fmt(err))})


def test_exponential_identity():
    worst = 0.0
    for name in ("complex", "hyperbolic", "dual", "H_N:3", "C_N:3", "Gamma_N:4"):
        A = preset(name)
        rng = np.random.default_rng(7)
        for _ in range(200):
            z, w = A.random_element(rng, -2, 2), A.random_element(rng, -2, 2)
            lhs = exp(z + w)
            worst = max(worst, (lhs - exp(z) * exp(w)).norm() / lhs.norm())
    report(7, "exp(z+w) = exp(z)exp(w)", {"max_rel": (worst < 1e-9, fmt(worst))})


def test_pythagorean_identities():
    hyp = trig = 0.0
    for name in COMMUTATIVE_PRESETS:
        A = preset(name)
        one = A.one()
        rng = np.random.default_rng(8)
        for _ in range(100):
            z = A.random_element(rng, -2, 2)
            hyp = max(hyp, (cosh(z) * cosh(z) - sinh(z) * sinh(z) - one).norm())
            trig = max(trig, (cos(z) * cos(z) + sin(z) * sin(z) - one).norm())
    report(
        8,
        "cosh^2 - sinh^2 = 1 and cos^2 + sin^2 = 1",
        {"hyperbolic": (hyp < 1e-9, fmt(hyp)), "trig": (trig < 1e-9, fmt(trig))},
    )


def test_n_pythagorean():
    names = [f"H_N:{n}" for n in range(2, 6)] + [f"C_N:{n}" for n in range(2, 6)]
    names += ["Gamma_N:2", "Gamma_N:3", "Gamma_N:4", "dual"]
    worst = 0.0
    for name in names:
        A = preset(name)
        g = as_generated(A)
        rng = np.random.default_rng(9)
        for _ in range(50):
            z = A.random_element(rng)
            worst = max(worst, (pythagorean(g, z).value - A.one()).norm())
    A = preset("H_N:3")
    rng = np.random.default_rng(10)
    cubic = 0.0
    for _ in range(50):
        z = A.random_element(rng)
        c, s1, s2 = (n_hyperbolic(3, p, z) for p in range(3))
        cubic = max(cubic, (c * c * c + s1 * s1 * s1 + s2 * s2 * s2 - 3.0 * (c * s1 * s2) - A.one()).norm())
    report(9, "N-Pythagorean theorem", {"P_A": (worst < 1e-8, fmt(worst)), "H3_cubic": (cubic < 1e-8, fmt(cubic))})


def test_special_functions():
    t = np.linspace(-2, 2, 81)
    g3 = as_generated(preset("Gamma_N:3"))
    tab3 = special_functions(g3, t)
    e3 = float(np.max(np.abs(tab3.values - np.stack([np.ones_like(t), t, t * t / 2], axis=1))))
    gc = as_generated(preset("complex"))
    tabc = special_functions(gc, t)
    ec = float(np.max(np.abs(tabc.values - np.stack([np.cos(t), np.sin(t)], axis=1))))
    recon = max(
        special_functions(as_generated(preset(n)), t).reconstruction_residual()
        for n in ("Gamma_N:3", "complex", "hyperbolic", "H_N:3", "C_N:4", "dual")
    )
    report(
        10,
        "special-function tables",
        {"Gamma3": (e3 < 1e-12, fmt(e3)), "complex": (ec < 1e-10, fmt(ec)), "reconstruction": (recon < 1e-10, fmt(recon))},
    )


def test_termwise_derivative():
    C, H = preset("complex"), preset("hyperbolic")
    e = function_series("exp", C)
    de = derivative_series(e)
    coeff_err = max((de.coeff(n) - e.coeff(n)).norm() for n in range(80))

    def fd_gap(p, pts):
        dp = derivative_series(p)
        worst = 0.0
        for z in pts:
            one = z.algebra.one()
            h = 1e-6
            fd = (evaluate(p, z + h * one).value - evaluate(p, z - h * one).value) / (2 * h)
            ref = evaluate(dp, z).value
            worst = max(worst, (fd - ref).norm() / (1 + ref.norm()))
        return worst

    rng = np.random.default_rng(11)
    geo_pts = [C.element(rng.uniform(-0.5, 0.5, 2)) for _ in range(20)]
    band_pts = []
    while len(band_pts) < 20:
        z = H.element(rng.uniform(-2, 2, 2))
        if abs(z.coords.sum()) < 0.7:
            band_pts.append(z)
    g = fd_gap(geometric_series(C), geo_pts)
    b = fd_gap(PowerSeries.along(H, H.element([1, 1]), lambda n: 1.0), band_pts)
    report(
        11,
        "term-wise derivative",
        {"exp_coeffs": (coeff_err <= 1e-15, fmt(coeff_err)), "geometric_fd": (g < 1e-6, fmt(g)), "band_fd": (b < 1e-6, fmt(b))},
    )


def test_loop_integrals():
    C, H = preset("complex"), preset("hyperbolic")
    circ = curve_integral(exp, circle(C.zero(), 1.0)).norm()
    square = polygon([H.element(v) for v in ([-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5])])
    sq = curve_integral(exp, square).norm()

    def conj(z):
        return C.element([z.coords[0], -z.coords[1]])

    cj = curve_integral(conj, circle(C.zero(), 1.0)).norm()
    report(
        12,
        "loop integrals",
        {"exp_circle_C": (circ < 1e-8, fmt(circ)), "exp_square_H": (sq < 1e-8, fmt(sq)), "conj_circle": (cj > 1, fmt(cj))},
    )


def test_cauchy_product():
    H = preset("hyperbolic")
    rng = np.random.default_rng(13)
    worst = 0.0
    for _ in range(20):
        z = H.random_element(rng, -1.5, 1.5)
        terms = TermStream(H, lambda n, z=z: (1 / math.factorial(n)) * power(z, n))
        res = sum_series(cauchy_product(terms, terms))
        target = exp(2.0 * z)
        worst = max(worst, (res.value - target).norm() / target.norm())
    report(13, "Cauchy product of exp with itself", {"max_rel": (worst < 1e-9, fmt(worst))})


def test_cr_residual():
    worst = 0.0
    for name in ("complex", "hyperbolic"):
        A = preset(name)
        rng = np.random.default_rng(14)
        for f in (exp, cos, sinh):
            for _ in range(100):
                worst = max(worst, cr_residual(f, A.random_element(rng, -2, 2)).relative_residual)
    C = preset("complex")
    rng = np.random.default_rng(15)
    conj_dev = max(
        abs(cr_residual(lambda z: C.element([z.coords[0], -z.coords[1]]), C.random_element(rng, -2, 2)).relative_residual - 1)
        for _ in range(20)
    )
    report(14, "CR residual", {"entire": (worst < 1e-6, fmt(worst)), "conj": (conj_dev < 1e-6, fmt(conj_dev))})


def test_all_presets_covered():
    # sanity: the preset list above spans every preset family
    families = {n.split(":")[0] for n in ALL_PRESETS}
    assert families >= {n.split("(")[0].split(":")[0] for n in PRESET_NAMES}
