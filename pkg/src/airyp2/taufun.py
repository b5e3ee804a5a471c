"""Tau functions tau_n(z; lambda) as Hankel determinants of Airy-seed jets,
their exact derivative jets, the induced Painleve-II quantities q_n, p_n,
sigma_n, Backlund maps, and residual checkers.

tau_n is the n x n determinant det[phi^(j+k)(z)].  Its z-derivatives are
computed exactly by the Hankel row-shift rule: differentiating row j yields
row j+1, so all terms cancel against duplicated rows except the one raising
the last row's derivative order.  Iterating the rule expands tau^(m) into a
small combination of determinants indexed by strictly increasing row-order
tuples; this module enumerates those tuples once per (n, m).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath

from .airy import SeedWeights, _series_mp, seed_jet
from .scaledc import ScaledComplex

__all__ = [
    "PoleError",
    "TauEval",
    "PainleveTriple",
    "tau",
    "sigma",
    "painleve_triple",
    "backlund_forward",
    "backlund_inverse",
    "residuals",
    "N_MAX",
]

N_MAX = 20
_SCALE = 2.0 ** (-1.0 / 3.0)


class PoleError(ArithmeticError):
    """A tau function vanishes at the evaluation point."""

    def __init__(self, n: int, z: complex, which: str = "tau"):
        self.n = n
        self.z = z
        self.which = which
        super().__init__(f"{which}_{n} vanishes at z={z}")


class CapacityError(ValueError):
    """Requested index exceeds n_max."""


@dataclass(frozen=True)
class TauEval:
    """tau_n(z) and its first four derivatives, in scaled form."""

    n: int
    z: complex
    value: ScaledComplex
    dvals: tuple          # (tau', tau'', tau''', tau'''')
    precision_warning: bool = False

    def jet(self, k: int) -> ScaledComplex:
        return self.value if k == 0 else self.dvals[k - 1]


@dataclass(frozen=True)
class PainleveTriple:
    """(q_n, p_n, sigma_n) with first derivatives, from exact tau jets."""

    n: int
    z: complex
    q: complex
    p: complex
    sigma: complex
    dq: complex
    dsigma: complex
    d2sigma: complex


@lru_cache(maxsize=None)
def _shift_tuples(n: int, m: int):
    """Coefficients of tau^(m) as {row-order tuple: multiplicity}.

    Tuples are strictly increasing (b_0,...,b_{n-1}); the base determinant is
    (0,...,n-1).  One derivative step raises a single b_j by one, dropping
    any tuple with duplicated rows (identically zero determinant).
    """
    terms = {tuple(range(n)): 1}
    for _ in range(m):
        nxt: dict = {}
        for rows, coef in terms.items():
            for j in range(n):
                raised = rows[j] + 1
                if j + 1 < n and raised == rows[j + 1]:
                    continue
                key = rows[:j] + (raised,) + rows[j + 1:]
                nxt[key] = nxt.get(key, 0) + coef
        terms = nxt
    return terms


def _det_scaled(rows):
    """Scaled-LU determinant of a small complex matrix given as row lists.

    Each row is pre-scaled by a power of ten; partial pivoting; returns
    (ScaledComplex, precision_warning).  The warning fires when a pivot
    falls below 1e-13 of the (normalized) row scale.
    """
    n = len(rows)
    if n == 0:
        return ScaledComplex(1 + 0j, 0), False
    a = [list(r) for r in rows]
    exp10 = 0
    for i in range(n):
        s = max(abs(v) for v in a[i])
        if s == 0:
            return ScaledComplex(0j, 0), False
        e = math.floor(math.log10(s))
        exp10 += e
        f = 10.0 ** (-e)
        a[i] = [v * f for v in a[i]]
    det = 1 + 0j
    warn = False
    for k in range(n):
        piv = max(range(k, n), key=lambda r: abs(a[r][k]))
        if a[piv][k] == 0:
            return ScaledComplex(0j, exp10), True
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            det = -det
        if abs(a[k][k]) < 1e-13:
            warn = True
        det *= a[k][k]
        inv = 1.0 / a[k][k]
        for r in range(k + 1, n):
            f = a[r][k] * inv
            if f == 0:
                continue
            for c in range(k, n):
                a[r][c] -= f * a[k][c]
    return ScaledComplex.of(det, exp10), warn


def _hankel_det_from_jet(values, rows_orders):
    """det[values[b_j + k]]_{j,k} for the given row-order tuple."""
    n = len(rows_orders)
    rows = [[values[b + k] for k in range(n)] for b in rows_orders]
    return _det_scaled(rows)


def tau(n: int, z: complex, weights: SeedWeights, *, derivatives: int = 4,
        mp_mode: bool = False) -> TauEval:
    """tau_n(z; lambda) with exact derivative jets up to order `derivatives`.

    mp_mode evaluates the determinants in >= 30-digit arithmetic; intended
    for n > 10 where binary64 Hankel determinants lose most digits.
    """
    if not 0 <= n <= N_MAX:
        raise CapacityError(f"tau index {n} outside [0, {N_MAX}]")
    z = complex(z)
    if n == 0:
        zero = ScaledComplex(0j, 0)
        return TauEval(0, z, ScaledComplex(1 + 0j, 0), (zero,) * 4)
    if mp_mode:
        return _tau_mp(n, z, weights, derivatives)
    order = 2 * n - 2 + max(derivatives, 1)
    jet = seed_jet(z, weights, max(order, 1))
    vals = jet.values
    value, warn = _hankel_det_from_jet(vals, tuple(range(n)))
    dvals = []
    for m in range(1, derivatives + 1):
        acc = ScaledComplex(0j, 0)
        for rows_orders, coef in _shift_tuples(n, m).items():
            d, w = _hankel_det_from_jet(vals, rows_orders)
            warn = warn or w
            acc = acc + coef * d
        dvals.append(acc)
    # restore the common jet scale: each matrix entry carried 10**jet.exp10
    if jet.exp10:
        fac = ScaledComplex(1 + 0j, n * jet.exp10)
        value = value * fac
        dvals = [d * fac for d in dvals]
    return TauEval(n, z, value, tuple(dvals), warn)


def _tau_mp(n: int, z: complex, weights: SeedWeights, derivatives: int) -> TauEval:
    dps = 50 + 2 * n
    order = 2 * n - 2 + max(derivatives, 1)
    with mpmath.workdps(dps):
        ai, aip, bi, bip = _series_mp(-_SCALE * z, dps=dps)
        c1, c2 = mpmath.mpc(weights.c1), mpmath.mpc(weights.c2)
        vals = [c1 * ai + c2 * bi, -(2 ** mpmath.mpf("-1/3")) * (c1 * aip + c2 * bip)]
        zm = mpmath.mpc(z)
        for k in range(order - 1):
            vals.append(-(zm * vals[k] + k * vals[k - 1]) / 2)

        def det_for(rows_orders):
            mat = mpmath.matrix(n, n)
            for j, b in enumerate(rows_orders):
                for k in range(n):
                    mat[j, k] = vals[b + k]
            return mpmath.det(mat)

        def to_scaled(v):
            if v == 0:
                return ScaledComplex(0j, 0)
            e = int(mpmath.floor(mpmath.log(abs(v), 10)))
            return ScaledComplex(complex(v / mpmath.mpf(10) ** e), e)

        value = to_scaled(det_for(tuple(range(n))))
        dvals = []
        for m in range(1, derivatives + 1):
            acc = mpmath.mpc(0)
            for rows_orders, coef in _shift_tuples(n, m).items():
                acc += coef * det_for(rows_orders)
            dvals.append(to_scaled(acc))
    return TauEval(n, z, value, tuple(dvals))


def _log_jet(te: TauEval, pole_index: int | None = None):
    """(sigma, sigma', sigma'', sigma''') from tau jets; raises PoleError."""
    if te.value.is_zero or te.value.log10_abs() < max(
            d.log10_abs() for d in te.dvals) - 14:
        raise PoleError(pole_index if pole_index is not None else te.n, te.z)
    u1 = te.dvals[0].ratio(te.value)
    u2 = te.dvals[1].ratio(te.value)
    u3 = te.dvals[2].ratio(te.value)
    u4 = te.dvals[3].ratio(te.value)
    s0 = u1
    s1 = u2 - u1 * u1
    s2 = u3 - 3 * u1 * u2 + 2 * u1**3
    s3 = u4 - 4 * u1 * u3 - 3 * u2 * u2 + 12 * u1 * u1 * u2 - 6 * u1**4
    return s0, s1, s2, s3


def sigma(n: int, z: complex, weights: SeedWeights, *, mp_mode: bool = False):
    """sigma_n = (log tau_n)' and its first three derivatives at z.

    Raises PoleError at zeros of tau_n (simple poles of sigma_n).
    """
    if n == 0:
        return (0j, 0j, 0j, 0j)
    return _log_jet(tau(n, z, weights, mp_mode=mp_mode))


def painleve_triple(n: int, z: complex, weights: SeedWeights, *,
                    mp_mode: bool = False) -> PainleveTriple:
    """q_n = sigma_{n-1} - sigma_n, p_n = -2 sigma_n', with derivatives.

    Raises PoleError identifying which tau vanished (poles of q_n come from
    zeros of either tau_{n-1} or tau_n).  For n <= 0 use the symmetry
    q_n = -q_{-n+1}.
    """
    if n < 1:
        raise ValueError("painleve_triple requires n >= 1; use q_n = -q_{-n+1}")
    z = complex(z)
    sa = sigma(n - 1, z, weights, mp_mode=mp_mode)
    sb = sigma(n, z, weights, mp_mode=mp_mode)
    return PainleveTriple(
        n=n, z=z,
        q=sa[0] - sb[0],
        p=-2 * sb[1],
        sigma=sb[0],
        dq=sa[1] - sb[1],
        dsigma=sb[1],
        d2sigma=sb[2],
    )


def backlund_forward(q: complex, dq: complex, z: complex, n: int) -> complex:
    """q_{n+1} from (q_n, q_n'):  -q - 2n/(2q^2 + 2q' + z)."""
    den = 2 * q * q + 2 * dq + z
    if n != 0 and abs(den) < 1e-13 * max(1.0, abs(q) ** 2, abs(z)):
        raise PoleError(n + 1, z, which="backlund-target q")
    return -q - (2 * n / den if n else 0)


def backlund_inverse(q: complex, dq: complex, z: complex, n: int) -> complex:
    """q_{n-1} from (q_n, q_n'):  -q + 2(n-1)/(2q' - 2q^2 - z)."""
    den = 2 * dq - 2 * q * q - z
    if n != 1 and abs(den) < 1e-13 * max(1.0, abs(q) ** 2, abs(z)):
        raise PoleError(n - 1, z, which="backlund-target q")
    return -q + (2 * (n - 1) / den if n != 1 else 0)


def sigma_residue(n: int, z0: complex, weights: SeedWeights, radius: float,
                  samples: int = 256) -> complex:
    """(1/2 pi i) contour integral of sigma_n around z0 (trapezoid rule).

    Equals the multiplicity of the tau_n zero enclosed; 1 for simple zeros.
    """
    acc = 0j
    for k in range(samples):
        th = 2 * math.pi * k / samples
        e = complex(math.cos(th), math.sin(th))
        acc += sigma(n, z0 + radius * e, weights)[0] * e
    return acc * radius / samples


def residuals(n: int, z: complex, weights: SeedWeights, *,
              mp_mode: bool = False) -> dict:
    """Residuals of P2, P34, S2 and the Hamiltonian system at (n, z).

    All derivatives come from exact tau jets; at a true solution every entry
    is zero up to rounding.  alpha = n - 1/2 throughout.
    """
    z = complex(z)
    sa = sigma(n - 1, z, weights, mp_mode=mp_mode)
    sb = sigma(n, z, weights, mp_mode=mp_mode)
    q = sa[0] - sb[0]
    dq = sa[1] - sb[1]
    d2q = sa[2] - sb[2]
    p = -2 * sb[1]
    dp = -2 * sb[2]
    d2p = -2 * sb[3]
    out = {
        "p2": d2q - 2 * q**3 - z * q - (n - 0.5),
        "s2": sb[2] ** 2 + 4 * sb[1] ** 3 + 2 * sb[1] * (z * sb[1] - sb[0]) - (n / 2.0) ** 2,
        "ham1": dq - p + q * q + z / 2,
        "ham2": dp - 2 * p * q - n,
    }
    out["p34"] = (d2p - (dp * dp - n * n) / (2 * p) - 2 * p * p + z * p
                  if p != 0 else complex("nan"))
    return out
