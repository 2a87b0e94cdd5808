"""Operator evaluation and the limit estimator."""

import numpy as np
import pytest

from halfsum.config import DEFAULT
from halfsum.corpus import corpus_map
from halfsum.engine import (MethodDescriptor, Status, Variant, apply_dual,
                            apply_forward, chain_apply, discrete_cesaro,
                            embed_sequence, estimate_limit, k_estimator,
                            method_Mr, method_holder, nested_apply,
                            transport_function, uniform_continuity_bound)
from halfsum.errors import FlavorMismatch, InvalidArgument
from halfsum.kernels import Flavor, exponential, power_law, to_additive

SIN_ADD = corpus_map()[("sin", Flavor.ADDITIVE)]
SIN_MUL = corpus_map()[("sin", Flavor.MULTIPLICATIVE)]
ONE_ADD = corpus_map()[("one", Flavor.ADDITIVE)]
ONE_MUL = corpus_map()[("one", Flavor.MULTIPLICATIVE)]
SETTLE_MUL = corpus_map()[("settle", Flavor.MULTIPLICATIVE)]


# ---------------------------------------------------------------------------
# pointwise operator values against closed forms

def test_additive_forward_sin_closed_form():
    # int_0^x sin(t) e^{-(x-t)} dt = (sin x - cos x + e^{-x}) / 2
    k = exponential(1.0)
    for x in (0.5, 3.0, 20.0, 200.0):
        want = (np.sin(x) - np.cos(x) + np.exp(-x)) / 2
        assert abs(apply_forward(k, SIN_ADD, x) - want) < 1e-8


def test_additive_dual_exponential_decay():
    # int_x^inf e^{-t} e^{-(t-x)} dt = e^{-x} / 2
    k = exponential(1.0)
    f = corpus_map()[("settle", Flavor.ADDITIVE)]  # 0.3 + e^{-t}
    for x in (1.0, 5.0, 30.0):
        want = 0.3 + np.exp(-x) / 2
        assert abs(apply_dual(k, f, x) - want) < 1e-8


def test_multiplicative_forward_constant():
    # M_1 applied to 1: int_1^x (t/x) dt/t = 1 - 1/x
    k = power_law(1.0)
    for x in (2.0, 64.0, 1e5):
        assert abs(apply_forward(k, ONE_MUL, x) - (1 - 1 / x)) < 1e-10


def test_multiplicative_dual_constant():
    # M*_1 applied to 1: int_x^inf x t^{-2} dt = 1 exactly
    k = power_law(1.0)
    for x in (2.0, 100.0, 1e4):
        assert abs(apply_dual(k, ONE_MUL, x) - 1.0) < 1e-6


def test_domain_guards():
    with pytest.raises(InvalidArgument):
        apply_forward(power_law(1.0), ONE_MUL, 0.5)
    with pytest.raises(InvalidArgument):
        apply_forward(exponential(1.0), SIN_ADD, -1.0)
    with pytest.raises(FlavorMismatch):
        apply_forward(exponential(1.0), ONE_MUL, 2.0)


# ---------------------------------------------------------------------------
# sequence embedding and the discrete bridge

def test_embed_sequence_step_values():
    f = embed_sequence([3.0, -1.0, 2.0], "abc")
    vals = f(np.array([1.0, 1.9, 2.5, 3.0, 4.2, 100.0]))
    assert np.allclose(vals, [3.0, 3.0, -1.0, 2.0, 0.0, 0.0])
    assert f.support_flavor is Flavor.MULTIPLICATIVE
    assert f.bound == 3.0


def test_embed_sequence_callable():
    f = embed_sequence(lambda n: (-1.0) ** n, "alt")
    assert f(np.array([2.5]))[0] == 1.0
    assert f(np.array([3.5]))[0] == -1.0


def test_embed_rejects_bad_input():
    with pytest.raises(InvalidArgument):
        embed_sequence([])
    with pytest.raises(InvalidArgument):
        embed_sequence([1.0, float("inf")])


def test_discrete_cesaro():
    assert abs(discrete_cesaro(lambda n: (-1.0) ** n, 10)) < 1e-15
    assert abs(discrete_cesaro([1.0, 2.0, 3.0, 4.0], 4) - 2.5) < 1e-15


def test_embedded_mean_tracks_discrete_mean():
    f = embed_sequence(lambda n: (-1.0) ** n, "alt")
    x = 4096.0
    continuous = apply_forward(power_law(1.0), f, x)
    discrete = discrete_cesaro(lambda n: (-1.0) ** n, 4096)
    assert abs(continuous - discrete) < 1e-3


# ---------------------------------------------------------------------------
# limit estimation statuses

def test_estimate_converged_constant():
    res = estimate_limit(method_Mr(1.0), ONE_MUL, DEFAULT)
    assert res.status is Status.CONVERGED
    assert abs(res.estimate - 1.0) < 2e-4
    assert res.trace and res.evaluations > 0
    assert res.tolerance_used > 0


def test_estimate_converged_oscillatory():
    res = estimate_limit(method_Mr(1.0), SIN_MUL, DEFAULT)
    assert res.status is Status.CONVERGED
    assert abs(res.estimate) < 2e-4


def test_estimate_oscillating_character():
    char = corpus_map()[("char_1", Flavor.MULTIPLICATIVE)]
    res = estimate_limit(method_Mr(1.0), char, DEFAULT)
    assert res.status is Status.OSCILLATING
    assert res.oscillation_amplitude > 0.3
    assert res.estimate is None


def test_estimate_settling_function():
    res = estimate_limit(method_Mr(1.0), SETTLE_MUL, DEFAULT)
    assert res.status is Status.CONVERGED
    assert abs(res.estimate - 0.3) < 2e-4


def test_estimate_dual_variant():
    res = estimate_limit(method_Mr(1.0, Variant.DUAL), ONE_MUL, DEFAULT)
    assert res.status is Status.CONVERGED
    assert abs(res.estimate - 1.0) < 2e-4


def test_iterates_power_vs_nested():
    m = method_holder(2)
    a = estimate_limit(m, SETTLE_MUL, DEFAULT, iterate_strategy="power")
    b = estimate_limit(m, SETTLE_MUL, DEFAULT, iterate_strategy="nested")
    assert a.status is Status.CONVERGED and b.status is Status.CONVERGED
    assert abs(a.estimate - b.estimate) < 2 * DEFAULT.tol_limit(SETTLE_MUL.bound)


def test_k_estimator_labels():
    k_add = k_estimator(Flavor.ADDITIVE)
    k_mul = k_estimator(Flavor.MULTIPLICATIVE)
    assert k_add.kernel.flavor is Flavor.ADDITIVE
    assert k_mul.kernel.flavor is Flavor.MULTIPLICATIVE


def test_method_descriptor_validation():
    with pytest.raises(InvalidArgument):
        MethodDescriptor(exponential(1.0), Variant.FORWARD, 0)
    with pytest.raises(InvalidArgument):
        method_Mr(-1.0)
    with pytest.raises(InvalidArgument):
        method_holder(0)


# ---------------------------------------------------------------------------
# composition and transport

def test_chain_apply_matches_nested():
    k1, k2 = exponential(1.0), exponential(2.0)
    xs = np.array([2.0, 8.0, 40.0])
    from halfsum.kernels import convolve
    combined = convolve(k1, k2)
    nested = nested_apply(k2, k1, SIN_ADD, xs)
    direct = chain_apply([combined], SIN_ADD, xs)
    assert np.max(np.abs(nested - direct)) < 1e-6


def test_transport_function_round_trip():
    g = transport_function(ONE_MUL)
    assert g.support_flavor is Flavor.ADDITIVE
    assert abs(g(np.array([3.0]))[0] - 1.0) < 1e-15
    with pytest.raises(FlavorMismatch):
        transport_function(ONE_ADD)


def test_transported_method_agrees():
    # M_psi(f) should match S_{transported psi}(f o exp)
    res_mul = estimate_limit(method_Mr(1.0), SETTLE_MUL, DEFAULT)
    add_kernel = to_additive(power_law(1.0))
    res_add = estimate_limit(
        MethodDescriptor(add_kernel, Variant.FORWARD, 1, "transported"),
        transport_function(SETTLE_MUL), DEFAULT)
    assert res_mul.status is Status.CONVERGED
    assert res_add.status is Status.CONVERGED
    assert abs(res_mul.estimate - res_add.estimate) < 2 * DEFAULT.tol_limit(1.3)


# ---------------------------------------------------------------------------
# modulus of continuity

def test_continuity_bound_exponential():
    # for Exp(1): int |phi(t) - phi(t+d)| dt + int_0^d |phi| = 2 (1 - e^{-d})
    for delta in (1e-1, 1e-2, 1e-3):
        got = uniform_continuity_bound(exponential(1.0), delta)
        assert abs(got - 2 * (1 - np.exp(-delta))) < 1e-9


def test_continuity_bound_controls_operator():
    k = exponential(1.0)
    delta = 1e-2
    bound = uniform_continuity_bound(k, delta)
    for x in (5.0, 17.0):
        gap = abs(apply_forward(k, SIN_ADD, x + delta) - apply_forward(k, SIN_ADD, x))
        assert gap <= bound + 1e-6
