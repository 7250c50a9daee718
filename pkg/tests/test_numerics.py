import math

import numpy as np
import pytest
from scipy.integrate import quad as scipy_quad

from extremefpt.errors import BracketError
from extremefpt.numerics import find_root, grow_bracket, integrate, integrate_decaying


def test_u_sqrt_one_minus_u_integral():
    # the emission derivation's key integral: exactly 4/15
    res = integrate(lambda u: u * np.sqrt(1.0 - u), 0.0, 1.0, abs_tol=1e-13)
    assert res.converged
    assert abs(res.value - 4.0 / 15.0) <= 1e-12


def test_smooth_integral_matches_quadpack():
    f = lambda t: np.exp(-t) * np.sin(3.0 * t)
    mine = integrate(f, 0.0, 5.0, abs_tol=1e-12)
    ref, _ = scipy_quad(lambda t: math.exp(-t) * math.sin(3.0 * t), 0.0, 5.0,
                        epsabs=1e-13, epsrel=1e-13)
    assert abs(mine.value - ref) < 1e-11


def test_essential_singularity_at_zero():
    # exp(-1/t) underflows to zero near t = 0 and integrates cleanly
    f = lambda t: np.where(t > 0.0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
    mine = integrate(f, 0.0, 1.0, abs_tol=1e-13)
    ref, _ = scipy_quad(lambda t: math.exp(-1.0 / t) if t > 0 else 0.0, 0.0, 1.0,
                        epsabs=1e-14, points=[0.05, 0.3])
    assert abs(mine.value - ref) < 1e-11


def test_breakpoints_help_sharp_peak():
    peak = 1e-4
    f = lambda t: np.exp(-((t - peak) / peak) ** 2)
    res = integrate(f, 0.0, 1.0, abs_tol=1e-14, points=[peak, 10 * peak])
    ref = math.sqrt(math.pi) * peak / 2 * (math.erf((1 - peak) / peak) + math.erf(1.0))
    assert abs(res.value - ref) < 1e-12


def test_integrate_decaying_exponential():
    res, decayed = integrate_decaying(lambda t: np.exp(-t), 0.0, 1.0,
                                      cutoff=1e-12, abs_tol=1e-12)
    assert decayed
    assert abs(res.value - 1.0) < 1e-10


def test_find_root_simple():
    root = find_root(lambda x: x ** 3 - 2.0, 0.0, 2.0, rel_tol=1e-14)
    assert abs(root - 2.0 ** (1.0 / 3.0)) < 1e-12


def test_find_root_needs_sign_change():
    with pytest.raises(BracketError):
        find_root(lambda x: x * x + 1.0, -1.0, 1.0)


def test_find_root_f_tol_termination():
    calls = []

    def f(x):
        calls.append(x)
        return math.tanh(x - 0.3)

    root = find_root(f, 0.0, 1.0, f_tol=1e-13)
    assert abs(math.tanh(root - 0.3)) <= 1e-13


def test_grow_bracket():
    lo, hi = grow_bracket(lambda x: x - 100.0, 1.0, 2.0)
    assert lo < 100.0 <= hi
    with pytest.raises(BracketError):
        grow_bracket(lambda x: -1.0, 1.0, 2.0, max_grow=10)
