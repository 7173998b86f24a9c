import math
from fractions import Fraction

import numpy as np
import pytest

import curveflow as cf


def test_compile_polyharmonic():
    flow = cf.compile_flow("builtin:polyharmonic(1)")
    assert (flow.p, flow.M, flow.lead_sign) == (2, 4, -1)
    assert flow.structure_ok
    terms = dict((exps, c) for c, exps in flow.terms)
    assert terms[(2, 2, 1)] == Fraction(-11)
    assert len(terms) == 7
    assert flow.to_dict()["name"] == flow.name


def test_parse_error_is_typed():
    with pytest.raises(cf.ParseError):
        cf.compile_flow("F = k + * k")
    assert issubclass(cf.ParseError, cf.CurveflowError)


def test_stability_values():
    flow = cf.compile_flow("builtin:polyharmonic(1)")
    assert cf.p_n_eps(flow, 1.0, 0.0, 2) == -12.0
    assert cf.p_n_eps_exact(flow, "1", "1/10", 2) == -16 * Fraction(9, 10) ** 4 + 4 * Fraction(11, 10) ** 4
    assert cf.linear_eigenvalue(flow, 1) == 0
    example = cf.compile_flow("F = -(k * ds(k,2))")
    assert abs(cf.max_delta(example, 1.0) - 0.0344) < 1e-3
    assert cf.sup_p(example, 1.0, 1 / 64)["c"] <= -0.5
    assert cf.family_criteria("II", 2, ["1", "1"])


def test_state_and_rhs():
    flow = cf.compile_flow("builtin:example32")
    rng = np.random.default_rng(0)
    coeffs = np.zeros(7, dtype=complex)
    coeffs[0] = 1.0
    coeffs[1:] = (rng.normal(size=6) + 1j * rng.normal(size=6)) * 0.02
    state = cf.SpectralState(coeffs)
    assert state.N == 6
    fast = np.array(cf.rhs_pseudospectral(state, flow))
    ref = np.array(cf.rhs_direct(state, flow))
    assert np.max(np.abs(fast - ref)) <= 1e-10 * np.max(np.abs(ref))
    nxt = cf.step(state, flow, 1e-4)
    assert nxt.N == 6


def test_geometry():
    circle = cf.SpectralState(np.array([1.0, 0, 0, 0, 0], dtype=complex))
    assert math.isclose(cf.enclosed_area(circle), math.pi, rel_tol=1e-12)
    curve = cf.reconstruct(circle)
    assert curve["closure_gap"] < 1e-12
    s = cf.make_initial(1.5, {2: 0.1}, True, 16)
    assert math.isclose(cf.enclosed_area(cf.normalize_area(s)), math.pi, rel_tol=1e-12)
    assert cf.seminorm(cf.make_initial(1.0, {2: 0.01}, False, 8), 5.0) == pytest.approx(0.16)


def test_certify_and_experiment():
    flow = cf.compile_flow("builtin:polyharmonic(1)")
    cert = cf.certify(flow, cf.make_initial(1.0, {2: 0.001}, False, 16))
    assert cert["dominance_ok"]
    with pytest.raises(cf.CertificationError):
        cf.certify(flow, cf.make_initial(1.0, {2: 0.2}, False, 16))
    report = cf.run_experiment({"N": 16, "T": 0.2, "modes": {"2": 0.001}})
    assert report["certified"] and report["passed"]
    rate = next(m for m in report["mode_rates"] if m["n"] == 2)["rate"]
    assert abs(rate / -12 - 1) < 0.15


def test_fit_rate():
    t = np.linspace(0, 1, 50)
    rate, r2 = cf.fit_rate(t, 2 * np.exp(-3 * t))
    assert rate == pytest.approx(-3)
    assert r2 == pytest.approx(1)
