"""Airy kernel tests: frozen oracle values, classical identities, regime seams."""

import cmath
import math

import mpmath
import numpy as np
import pytest

from airyp2.airy import (
    AiryOverflowError,
    ComplexJet,
    SeedWeights,
    _lattice_eval,
    _asym_pair_scaled,
    _series64,
    airy_pair,
    airy_pair_scaled,
    seed_jet,
)

# Independent oracle values (Maclaurin constants evaluated to 20+ digits
# with mpmath before the build).
AI0 = 0.35502805388781723926006318600418317640
BI0 = 0.61492662744600073515092236909361355360
AIP0 = -0.25881940379280679840518356018920396348

ROT = cmath.exp(2j * math.pi / 3)


def disk_points(n, radius, seed):
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.uniform(0, 1, n))
    th = rng.uniform(-math.pi, math.pi, n)
    return r * np.exp(1j * th)


def test_values_at_zero():
    ai, aip, bi, bip = airy_pair(0)
    assert abs(ai - AI0) < 1e-14
    assert abs(bi - BI0) < 1e-14
    assert abs(aip - AIP0) < 1e-14
    assert abs(bip - math.sqrt(3) * (-AIP0)) < 1e-14


HALF_ROT = cmath.exp(1j * math.pi / 3)


def test_rotation_identity_100_points():
    # Ai(w) + i Bi(w) = 2 e^{i pi/3} Ai(w e^{-2 pi i/3});  the identity is
    # checked relative to the size of the inputs, which is the achievable
    # scale wherever the right side is exponentially recessive.
    for w in disk_points(100, 12.0, seed=11):
        w = complex(w)
        ai, _, bi, _ = airy_pair(w)
        ai_rot, _, _, _ = airy_pair(w / ROT)
        lhs = ai + 1j * bi
        rhs = 2 * HALF_ROT * ai_rot
        scale = max(abs(ai), abs(bi), abs(rhs))
        assert abs(lhs - rhs) <= 1e-10 * scale


def test_rotation_identity_strict_mp_path():
    # strict 1e-10 relative form on the in-repo 40-digit series path
    from airyp2.airy import _series_mp
    with mpmath.workdps(40):
        for w in disk_points(100, 12.0, seed=11):
            w = complex(w)
            ai, _, bi, _ = _series_mp(w)
            ai_rot, _, _, _ = _series_mp(w / ROT)
            lhs = ai + 1j * bi
            rhs = 2 * mpmath.exp(1j * mpmath.pi / 3) * ai_rot
            assert abs(lhs - rhs) <= 1e-10 * abs(rhs)


def test_wronskian_100_points():
    # Ai Bi' - Ai' Bi = 1/pi.  In binary64 the attainable absolute accuracy
    # is eps * |Ai Bi'|, so the tolerance is taken relative to that scale;
    # the strict 1e-10-of-1/pi form runs on the 40-digit series path.
    from airyp2.airy import _series_mp
    pts = disk_points(100, 8.0, seed=12)
    for w in pts:
        ai, aip, bi, bip = airy_pair(complex(w))
        wr = ai * bip - aip * bi
        scale = max(1.0 / math.pi, abs(ai * bip) + abs(aip * bi))
        assert abs(wr - 1.0 / math.pi) <= 1e-10 * scale
    with mpmath.workdps(40):
        for w in pts[:100]:
            ai, aip, bi, bip = _series_mp(complex(w))
            wr = ai * bip - aip * bi
            assert abs(wr - 1.0 / mpmath.pi) <= 1e-10 / math.pi


def test_against_mpmath_oracle():
    pts = disk_points(150, 12.0, seed=13)
    with mpmath.workdps(30):
        for w in pts:
            w = complex(w)
            got = airy_pair(w)
            ref = (mpmath.airyai(w), mpmath.airyai(w, 1),
                   mpmath.airybi(w), mpmath.airybi(w, 1))
            for g, f in zip(got, ref):
                f = complex(f)
                assert abs(g - f) <= 1e-11 * max(abs(f), 1e-300)


@pytest.mark.parametrize("radii,fns", [
    ((3.05, 3.2, 3.35), (_series64, _lattice_eval)),
    ((7.7, 8.0, 8.3), (_lattice_eval, lambda w: [s.to_complex() for s in _asym_pair_scaled(w)])),
])
def test_regime_overlap(radii, fns):
    # the two regimes must agree to 1e-9 on the overlap annulus
    fa, fb = fns
    for r in radii:
        for k in range(24):
            w = r * cmath.exp(1j * (-math.pi + 2 * math.pi * (k + 0.3) / 24))
            va = fa(w)
            vb = fb(w)
            for x, y in zip(va, vb):
                assert abs(x - y) <= 1e-9 * max(abs(x), abs(y), 1e-300)


def test_seed_jet_recurrence_selfconsistency():
    weights = SeedWeights.from_lambda(1 + 2j)
    for z in disk_points(25, 6.0, seed=14):
        jet = seed_jet(complex(z), weights, order=12)
        assert jet.order == 12
        assert jet.recurrence_residual() <= 1e-12


def test_seed_jet_rederived_from_leading_pair():
    weights = SeedWeights.from_lambda(0.5 - 1j)
    for z in disk_points(10, 5.0, seed=15):
        z = complex(z)
        jet = seed_jet(z, weights, order=10)
        vals = [jet.values[0], jet.values[1]]
        for k in range(9):
            vals.append(-0.5 * (z * vals[k] + (k * vals[k - 1] if k else 0.0)))
        scale = max(abs(v) for v in jet.values)
        for a, b in zip(vals, jet.values):
            assert abs(a - b) <= 1e-12 * scale


def test_seed_jet_at_origin_lambda_zero():
    jet = seed_jet(0.0, SeedWeights.from_lambda(0), order=2)
    assert abs(jet.values[0] - AI0) < 1e-13
    assert abs(jet.values[2]) < 1e-16  # phi''(0) = -(1/2)(0*phi) = 0


def test_seed_lambda_i_is_rotated_ai():
    # phi(z; i) = Ai(w) + i Bi(w) = 2 e^{i pi/3} Ai(w e^{-2 pi i/3})
    weights = SeedWeights.from_lambda(1j)
    s = 2 ** (-1.0 / 3.0)
    for z in disk_points(40, 9.0, seed=16):
        z = complex(z)
        jet = seed_jet(z, weights, order=1)
        phi = jet.values[0] * 10.0**jet.exp10
        w = -s * z
        ai, _, bi, _ = airy_pair(w)
        ai_rot, _, _, _ = airy_pair(w / ROT)
        rhs = 2 * HALF_ROT * ai_rot
        scale = max(abs(ai), abs(bi), abs(rhs))
        assert abs(phi - rhs) <= 1e-10 * scale


def test_seed_weights_normalization():
    w = SeedWeights.from_lambda(3 - 2j)
    assert (w.c1, w.c2) == (1, 3 - 2j)
    for spelling in (None, "inf", "INF", math.inf):
        w = SeedWeights.from_lambda(spelling)
        assert (w.c1, w.c2) == (0, 1)
        assert w.lam is None


def test_overflow_saturates_to_scaled():
    with pytest.raises(AiryOverflowError) as exc:
        airy_pair(200.0)
    for s in exc.value.scaled:
        m = s.mantissa
        assert math.isfinite(m.real) and math.isfinite(m.imag)
    vals = airy_pair_scaled(200.0)
    assert vals[2].exp10 > 300  # Bi is far beyond binary64


def test_complex_jet_order_invariant():
    jet = ComplexJet(0j, (1 + 0j, 2 + 0j, 3 + 0j))
    assert jet.order == 2
