"""Argument-principle counting, quadtree location, and pole maps."""

import math

import numpy as np
import pytest

from airyp2.airy import SeedWeights, airy_pair
from airyp2.taufun import sigma_residue
from airyp2.zerofind import (
    PoleMap,
    Window,
    count_zeros,
    locate_zeros,
    pole_map,
    q_numerator_evaluator,
    tau_evaluator,
)


def poly_evaluator(roots):
    roots = [complex(r) for r in roots]

    def f(z):
        v = 1 + 0j
        dv = 0j
        for r in roots:
            dv = dv * (z - r) + v
            v *= z - r
        return v, dv

    return f


def real_airy_zero(which, fn_index=0):
    """Bisection oracle for real zeros of Ai (index 0) or Ai' (index 1)."""
    f = lambda x: airy_pair(x)[fn_index].real
    # bracket by scanning
    xs = np.linspace(-14.0, 0.0, 4000)
    vals = [f(x) for x in xs]
    brackets = [(xs[i], xs[i + 1]) for i in range(len(xs) - 1)
                if vals[i] * vals[i + 1] < 0]
    brackets.sort(key=lambda ab: -ab[0])  # closest to zero first
    lo, hi = brackets[which]
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if f(lo) * f(mid) <= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def test_count_identity():
    assert count_zeros(lambda z: (z, 1 + 0j), Window(-1 - 1j, 1 + 1j)) == 1


def test_count_double_zero_fixture():
    c = 0.3 + 0.2j
    f = lambda z: ((z - c) ** 2, 2 * (z - c))
    assert count_zeros(f, Window(-1 - 1j, 1 + 1j)) == 2


def test_count_tau1_first_zero_window():
    w0 = SeedWeights.from_lambda(0)
    f = tau_evaluator(1, w0)
    win = Window(2.0 - 1.0j, 4.0 + 1.0j)
    assert count_zeros(f, win) == 1
    r = locate_zeros(f, win, tol=1e-11)
    expect = -(2 ** (1 / 3)) * real_airy_zero(0)
    assert abs(expect - 2 ** (1 / 3) * 2.33810741045976) < 1e-9
    assert len(r.zeros) == 1 and abs(r.zeros[0] - expect) < 1e-9


def test_empty_window():
    r = locate_zeros(lambda z: (z + 40.0, 1 + 0j), Window(-1 - 1j, 1 + 1j))
    assert r.zeros == [] and r.counted == 0 and r.complete


def test_boundary_zero_jitter_does_not_crash():
    # zero exactly on the unjittered boundary
    n = count_zeros(lambda z: (z, 1 + 0j), Window(0 - 1j, 1 + 1j))
    assert n in (0, 1)


def test_planted_fixtures_count_and_locate():
    rng = np.random.default_rng(61)
    win = Window(-2 - 2j, 2 + 2j)
    for _ in range(20):
        k = int(rng.integers(1, 7))
        while True:
            roots = [complex(a, b) for a, b in
                     rng.uniform(-1.6, 1.6, (k, 2))]
            ok = all(abs(a - b) > 0.15 for i, a in enumerate(roots)
                     for b in roots[i + 1:])
            if ok:
                break
        f = poly_evaluator(roots)
        assert count_zeros(f, win) == k
        r = locate_zeros(f, win, tol=1e-12)
        assert r.complete
        got = sorted(r.zeros, key=lambda z: (z.real, z.imag))
        expect = sorted(roots, key=lambda z: (z.real, z.imag))
        for a, b in zip(got, expect):
            assert abs(a - b) < 1e-9


def test_newton_polish_stability():
    w0 = SeedWeights.from_lambda(1 + 1j)
    f = tau_evaluator(2, w0)
    win = Window(-5 - 5j, 5 + 5j)
    r = locate_zeros(f, win, tol=1e-11)
    assert r.complete and r.zeros
    from airyp2.zerofind import _newton
    for z in r.zeros:
        z2 = _newton(f, z, 1e-11)
        assert z2 is not None and abs(z2 - z) < 1e-11 * max(1, abs(z))


def test_pole_map_n1_lambda0_real_line():
    # q_1(.; 0) = -dlog Ai(-2^{-1/3} z): poles at rescaled Ai zeros,
    # zeros at rescaled Ai' zeros
    w0 = SeedWeights.from_lambda(0)
    pm = pole_map(1, w0, Window(-8 - 2j, 8 + 2j), tol=1e-10)
    assert pm.poles_plus == []  # tau_0 has no zeros
    s = 2 ** (1 / 3)
    ai_zeros = sorted(-s * real_airy_zero(k, 0) for k in range(3))
    aip_zeros = sorted(-s * real_airy_zero(k, 1) for k in range(3))
    got_poles = sorted(z.real for z in pm.poles_minus if abs(z) < 8)
    got_zq = sorted(z.real for z in pm.zeros_q if abs(z) < 8)
    assert all(abs(z.imag) < 1e-8 for z in pm.poles_minus)
    for expect in ai_zeros:
        assert min(abs(expect - g) for g in got_poles) < 1e-8
    for expect in aip_zeros:
        assert min(abs(expect - g) for g in got_zq) < 1e-8


def test_pole_map_disjointness_and_residues():
    w = SeedWeights.from_lambda(1 + 1j)
    pm = pole_map(3, w, Window(-5 - 5j, 5 + 5j), tol=1e-9)
    assert not pm.unresolved
    assert pm.disjointness_gap() > 1e-6
    # sigma residue +1 at zeros of tau_3 (simple zeros)
    everything = pm.poles_plus + pm.poles_minus
    for z0 in pm.poles_minus[:3]:
        gap = min(abs(z0 - other) for other in everything if other is not z0)
        res = sigma_residue(3, z0, w, radius=0.5 * gap)
        assert abs(res - 1) <= 1e-6
