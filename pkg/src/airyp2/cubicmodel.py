"""Cubic-ensemble moments, Hankel determinants D_n(t; N, lambda), recurrence
coefficients, and monic orthogonal polynomials on the contour chain
Gamma(lambda) = alpha0 L0 + alpha1 L1 + alpha2 L2 against e^{-N V(s;t)},
V(s;t) = -s^3/3 + s t.

Moments are evaluated only through their closed Airy form
m_k = (2^{k/3}/N^{(k+1)/3}) d^k/dz^k [alpha0 pi Bi(-2^{-1/3}z)
      + (alpha1-alpha2) pi i Ai(-2^{-1/3}z)],   z = -(sqrt(2) N)^{2/3} t,
which reduces to the tau seed with weights (c1, c2) = (1, lambda) (or (0, 1)
at lambda = infinity).  Ray quadrature exists only as a slow test oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .airy import SeedWeights, seed_jet
from .scaledc import ScaledComplex
from .taufun import _det_scaled, _shift_tuples

__all__ = [
    "ContourWeights",
    "DegenerationError",
    "MomentTable",
    "DEval",
    "moments",
    "hankel_D",
    "recurrence_coeffs",
    "orthopoly",
    "z_from_t",
    "t_from_z",
]


class DegenerationError(ArithmeticError):
    """A Hankel determinant vanishes; deg P drops at this parameter."""

    def __init__(self, witness: int, t: complex):
        self.witness = witness
        self.t = t
        super().__init__(f"D_{witness}(t) vanishes at t={t}; polynomial degenerates")


@dataclass(frozen=True)
class ContourWeights:
    """Chain coefficients (alpha0, alpha1, alpha2) determined by lambda."""

    lam: complex | None
    alpha0: complex
    alpha1: complex
    alpha2: complex

    @staticmethod
    def from_lambda(lam) -> "ContourWeights":
        sw = SeedWeights.from_lambda(lam)
        if sw.lam is None:
            return ContourWeights(None, 1 / math.pi, -0.5 / math.pi, -0.5 / math.pi)
        lam = sw.lam
        return ContourWeights(
            lam,
            lam / math.pi,
            -lam / (2 * math.pi) + 1 / (2j * math.pi),
            -lam / (2 * math.pi) - 1 / (2j * math.pi),
        )

    @property
    def seed_weights(self) -> SeedWeights:
        """(c1, c2) = ((alpha1-alpha2) pi i, alpha0 pi), normalized."""
        return SeedWeights.from_lambda("inf" if self.lam is None else self.lam)


def z_from_t(t: complex, bigN: float) -> complex:
    """Parameter map z = -(sqrt(2) N)^{2/3} t used by all bridge identities."""
    return -((math.sqrt(2.0) * bigN) ** (2.0 / 3.0)) * complex(t)


def t_from_z(z: complex, bigN: float) -> complex:
    return -complex(z) / (math.sqrt(2.0) * bigN) ** (2.0 / 3.0)


@dataclass(frozen=True)
class MomentTable:
    """m[k] = integral over Gamma of s^k e^{-N V(s;t)} ds, k < count."""

    t: complex
    bigN: float
    weights: ContourWeights
    m: tuple  # ScaledComplex entries


def moments(t: complex, bigN: float, weights: ContourWeights, count: int) -> MomentTable:
    """Closed-form moment table of length `count` (count <= 2 n_max + 2)."""
    if bigN <= 0:
        raise ValueError("bigN must be positive")
    if count < 1:
        raise ValueError("count must be >= 1")
    z = z_from_t(t, bigN)
    jet = seed_jet(z, weights.seed_weights, max(count - 1, 1))
    ms = []
    for k in range(count):
        fac = 2.0 ** (k / 3.0) * bigN ** (-(k + 1) / 3.0)
        ms.append(ScaledComplex.of(jet.values[k] * fac, jet.exp10))
    return MomentTable(complex(t), float(bigN), weights, tuple(ms))


def _det_scaled_rows(rows):
    """Determinant of a matrix of ScaledComplex entries.

    Returns (value, hadamard_margin_log10, warn); the margin compares |det|
    with the product of row norms, a conditioning proxy.
    """
    n = len(rows)
    if n == 0:
        return ScaledComplex(1 + 0j, 0), 0.0, False
    plain = []
    shift = 0
    hadamard = 0.0
    for row in rows:
        e = max(v.exp10 for v in row)
        vals = [v.mantissa * 10.0 ** (v.exp10 - e) for v in row]
        plain.append(vals)
        shift += e
        hadamard += 0.5 * math.log10(sum(abs(v) ** 2 for v in vals) + 1e-300)
    det, warn = _det_scaled(plain)
    value = det * ScaledComplex(1 + 0j, shift)
    margin = value.log10_abs() - (shift + hadamard)
    return value, margin, warn


@dataclass(frozen=True)
class DEval:
    """D_n(t) with t-derivatives; margin is a log10 conditioning proxy."""

    n: int
    t: complex
    value: ScaledComplex
    dvals: tuple
    margin: float
    precision_warning: bool = False

    def jet(self, k: int) -> ScaledComplex:
        return self.value if k == 0 else self.dvals[k - 1]


def hankel_D(n: int, t: complex, bigN: float, weights: ContourWeights, *,
             derivatives: int = 1) -> DEval:
    """D_n = det[m_{i+j}]_{i,j=0..n} and exact t-derivatives.

    d/dt m_k = -N m_{k+1}, so the Hankel shift rule applies with a factor
    (-N) per raised row; only the last-row term survives at first order.
    """
    t = complex(t)
    if n <= -1:
        one = ScaledComplex(1 + 0j, 0)
        zero = ScaledComplex(0j, 0)
        return DEval(n, t, one, (zero,) * derivatives, math.inf)
    size = n + 1
    table = moments(t, bigN, weights, 2 * n + 1 + max(derivatives, 0))
    ms = table.m
    value, margin, warn = _det_scaled_rows(
        [[ms[i + j] for j in range(size)] for i in range(size)])
    dvals = []
    for order in range(1, derivatives + 1):
        acc = ScaledComplex(0j, 0)
        for rows_orders, coef in _shift_tuples(size, order).items():
            d, _, w = _det_scaled_rows(
                [[ms[b + j] for j in range(size)] for b in rows_orders])
            warn = warn or w
            acc = acc + coef * d
        dvals.append(((-bigN) ** order) * acc)
    return DEval(n, t, value, tuple(dvals), margin, warn)


def _check_nondegenerate(dev: DEval) -> None:
    if dev.n <= -1:
        return
    bad = dev.value.is_zero or dev.margin < -12
    if not bad and dev.dvals:
        # near a simple zero |D| collapses relative to |D'|
        bad = dev.value.log10_abs() < dev.dvals[0].log10_abs() - 13
    if bad:
        raise DegenerationError(dev.n, dev.t)


def _dlog(dev: DEval) -> complex:
    if dev.n <= -1:
        return 0j
    _check_nondegenerate(dev)
    return dev.dvals[0].ratio(dev.value)


def recurrence_coeffs(n: int, t: complex, bigN: float, weights: ContourWeights):
    """(beta_n, gamma_n^2, p_{n,n-1}) from Hankel determinants.

    beta_n  = (1/N) (dlog D_{n-1} - dlog D_n)
    gamma^2 = D_n D_{n-2} / D_{n-1}^2
    p_sub   = (1/N) dlog D_{n-1}   (p_{0,-1} := 0)

    Raises DegenerationError with the witness index if a required
    determinant vanishes.
    """
    t = complex(t)
    d_n = hankel_D(n, t, bigN, weights)
    d_nm1 = hankel_D(n - 1, t, bigN, weights)
    beta = (_dlog(d_nm1) - _dlog(d_n)) / bigN
    if n == 0:
        return beta, 0j, 0j
    d_nm2 = hankel_D(n - 2, t, bigN, weights, derivatives=0)
    gamma2 = ((d_n.value * d_nm2.value) / (d_nm1.value * d_nm1.value)).to_complex()
    p_sub = _dlog(d_nm1) / bigN
    return beta, gamma2, p_sub


def orthopoly(n: int, t: complex, bigN: float, weights: ContourWeights):
    """Monic P_n coefficients [c_0, ..., c_{n-1}, 1] (ascending powers).

    Solved from the Hankel linear system sum_j c_j m_{k+j} = -m_{k+n},
    k = 0..n-1.  Raises DegenerationError when D_{n-1} vanishes.
    """
    import numpy as np

    t = complex(t)
    if n == 0:
        return [1 + 0j]
    _check_nondegenerate(hankel_D(n - 1, t, bigN, weights))
    table = moments(t, bigN, weights, 2 * n)
    ms = table.m
    mat = np.empty((n, n), dtype=complex)
    rhs = np.empty(n, dtype=complex)
    for k in range(n):
        e = max(ms[k + j].exp10 for j in range(n + 1))
        for j in range(n):
            v = ms[k + j]
            mat[k, j] = v.mantissa * 10.0 ** (v.exp10 - e)
        v = ms[k + n]
        rhs[k] = -(v.mantissa * 10.0 ** (v.exp10 - e))
    coeffs = np.linalg.solve(mat, rhs)
    return [complex(c) for c in coeffs] + [1 + 0j]
