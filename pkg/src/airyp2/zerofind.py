"""Zeros of entire functions in rectangles: argument-principle counting with
adaptive phase continuation, quadtree isolation, Newton refinement, and
pole/zero maps of the Painleve functions q_n.

Evaluators are callables f(z) -> (value, derivative).  Counting uses only
the phase of the value, so evaluators may rescale by any positive factor;
Newton uses the ratio value/derivative.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .airy import SeedWeights
from .taufun import tau

__all__ = [
    "Window",
    "BoundaryZeroError",
    "ZeroSearch",
    "PoleMap",
    "count_zeros",
    "locate_zeros",
    "pole_map",
    "tau_evaluator",
    "q_numerator_evaluator",
]

_MAX_DEPTH = 12
_NEWTON_ITERS = 50


@dataclass(frozen=True)
class Window:
    """Axis-aligned rectangle given by opposite corners lo, hi."""

    lo: complex
    hi: complex

    def __post_init__(self):
        if not (self.hi.real > self.lo.real and self.hi.imag > self.lo.imag):
            raise ValueError("window corners must satisfy hi.re>lo.re, hi.im>lo.im")

    @property
    def center(self) -> complex:
        return 0.5 * (self.lo + self.hi)

    @property
    def diagonal(self) -> float:
        return abs(self.hi - self.lo)

    def corners(self):
        a, b = self.lo, self.hi
        return (a, complex(b.real, a.imag), b, complex(a.real, b.imag))

    def contains(self, z: complex, pad: float = 0.0) -> bool:
        return (self.lo.real - pad <= z.real <= self.hi.real + pad
                and self.lo.imag - pad <= z.imag <= self.hi.imag + pad)

    def split(self, at: complex | None = None):
        c = self.center if at is None else at
        a, b = self.lo, self.hi
        return (Window(a, c),
                Window(complex(c.real, a.imag), complex(b.real, c.imag)),
                Window(c, b),
                Window(complex(a.real, c.imag), complex(c.real, b.imag)))

    def jittered(self, attempt: int) -> "Window":
        """Deterministic jitter by ~1e-3 of the diagonal, seeded from coords."""
        seed = hash((round(self.lo.real, 12), round(self.lo.imag, 12),
                     round(self.hi.real, 12), round(self.hi.imag, 12), attempt))
        rng = np.random.default_rng(abs(seed))
        d = 1e-3 * self.diagonal
        shift = complex(*(rng.uniform(0.4, 1.0, 2) * rng.choice([-1.0, 1.0], 2) * d))
        grow = complex(*(rng.uniform(0.2, 0.7, 2) * d))
        return Window(self.lo + shift - grow, self.hi + shift + grow)


class BoundaryZeroError(RuntimeError):
    """A zero sits on the window boundary and jittering failed to avoid it."""


class _Cached:
    """Evaluation cache; adaptive bisection revisits identical points."""

    def __init__(self, f):
        self.f = f
        self.data: dict = {}

    def __call__(self, z: complex):
        key = (z.real, z.imag)
        got = self.data.get(key)
        if got is None:
            got = self.f(z)
            self.data[key] = got
        return got


def _boundary_winding(f, w: Window, samples_per_side: int = 16):
    """Total phase change of f around the boundary, in turns (float)."""
    pts = []
    cs = w.corners()
    for a, b in zip(cs, cs[1:] + cs[:1]):
        for k in range(samples_per_side):
            pts.append(a + (b - a) * (k / samples_per_side))
    vals = [f(p) for p in pts]
    mags = sorted(abs(v) for v, _ in vals)
    med = mags[len(mags) // 2]
    if med == 0 or mags[0] < 1e-10 * med:
        raise BoundaryZeroError(f"|f| collapses on boundary of {w}")
    total = 0.0
    m = len(pts)
    for i in range(m):
        total += _segment_phase(f, pts[i], pts[(i + 1) % m],
                                vals[i], vals[(i + 1) % m], depth=0)
    return total / (2 * math.pi)


def _segment_phase(f, a, b, fa, fb, depth):
    # a principal-branch increment < pi/2 can alias a full extra turn, so
    # the log-derivative rate |f'/f| * |dz| must also certify the step
    va, da = fa
    vb, db = fb
    if va == 0 or vb == 0:
        raise BoundaryZeroError(f"exact zero on boundary near {a}")
    dphi = cmath.phase(vb / va)
    rate = max(abs(da / va), abs(db / vb)) * abs(b - a)
    if abs(dphi) < math.pi / 2 and rate < 1.2:
        return dphi
    if depth > 42:
        raise BoundaryZeroError("phase continuation failed to settle; zero on boundary?")
    mid = 0.5 * (a + b)
    fm = f(mid)
    return (_segment_phase(f, a, mid, fa, fm, depth + 1)
            + _segment_phase(f, mid, b, fm, fb, depth + 1))


def count_zeros(f, w: Window) -> int:
    """Number of zeros of f inside w by the argument principle.

    Jitters the window (deterministically) up to five times when a zero is
    detected on the boundary; raises BoundaryZeroError afterwards.
    """
    f = f if isinstance(f, _Cached) else _Cached(f)
    win = w
    for attempt in range(5):
        try:
            turns = _boundary_winding(f, win)
        except BoundaryZeroError:
            win = w.jittered(attempt)
            continue
        n = round(turns)
        if abs(turns - n) > 0.2:
            win = w.jittered(attempt)
            continue
        return int(n)
    raise BoundaryZeroError(f"persistent boundary zero for window {w}")


def _newton(f, z0: complex, tol: float):
    z = z0
    for _ in range(_NEWTON_ITERS):
        v, dv = f(z)
        if dv == 0:
            return None
        step = v / dv
        z -= step
        if abs(step) <= tol * max(1.0, abs(z)):
            return z
    return None


@dataclass
class ZeroSearch:
    """Result of locate_zeros: polished zeros plus any unresolved leaves."""

    window: Window
    zeros: list = field(default_factory=list)
    unresolved: list = field(default_factory=list)
    counted: int = 0

    @property
    def complete(self) -> bool:
        return not self.unresolved and len(self.zeros) == self.counted


def locate_zeros(f, w: Window, tol: float = 1e-10) -> ZeroSearch:
    """Quadtree subdivision to single-zero leaves, then Newton polish.

    Every leaf where isolation or Newton fails lands in result.unresolved
    (never silently dropped); on success len(zeros) == counted.
    """
    f = f if isinstance(f, _Cached) else _Cached(f)
    res = ZeroSearch(window=w)
    res.counted = count_zeros(f, w)

    def accept(z):
        for prev in res.zeros:
            if abs(prev - z) <= 10 * tol * max(1.0, abs(z)):
                return
        res.zeros.append(z)

    def subdivide(win: Window, expect: int, depth: int) -> bool:
        # a zero can sit exactly on a split line; demand the child counts
        # add up to the parent count, retrying with offset split points
        span = 0.5 * (win.hi - win.lo)
        # split points sit off-axis so lattices of zeros (real axis, rays)
        # do not land exactly on child edges
        for frac in (0.0371 - 0.0523j, 0.2331 + 0.1719j, -0.1713 + 0.2417j, 0.31 - 0.11j):
            at = win.center + complex(frac.real * span.real, frac.imag * span.imag)
            try:
                children = win.split(at)
                counts = [count_zeros(f, ch) for ch in children]
            except BoundaryZeroError:
                continue
            if sum(counts) == expect:
                for ch, c in zip(children, counts):
                    rec(ch, c, depth + 1)
                return True
        return False

    def rec(win: Window, expect: int, depth: int):
        if expect == 0:
            return
        if expect == 1 or depth >= _MAX_DEPTH:
            pad = 1e-9 * win.diagonal
            starts = [win.center] + ([] if expect == 1 else list(win.corners()))
            for z0 in starts:
                z = _newton(f, z0, tol)
                if z is not None and win.contains(z, pad=max(pad, tol)):
                    accept(z)
                    if expect == 1:
                        return
            if expect == 1 and depth < _MAX_DEPTH and subdivide(win, expect, depth):
                return  # Newton escaped the leaf; isolation retried deeper
            if not rescue(win, expect):
                res.unresolved.append((win, expect))
            return
        if not subdivide(win, expect, depth) and not rescue(win, expect):
            res.unresolved.append((win, expect))

    def rescue(win: Window, expect: int) -> bool:
        # last resort for zeros hugging a child edge: Newton from a spread
        # of starts, demanding exactly `expect` distinct zeros in the window
        pad = max(1e-7 * win.diagonal, tol)
        c, (a, b2, b, t2) = win.center, win.corners()
        starts = [c, a, b2, b, t2,
                  0.5 * (a + b2), 0.5 * (b2 + b), 0.5 * (b + t2), 0.5 * (t2 + a),
                  0.5 * (a + c), 0.5 * (b + c)]
        found = []
        for z0 in starts:
            z = _newton(f, z0, tol)
            if z is None or not win.contains(z, pad=pad):
                continue
            if all(abs(z - p) > 10 * tol * max(1.0, abs(z)) for p in found):
                found.append(z)
        if len(found) == expect:
            for z in found:
                accept(z)
            return True
        return False

    rec(w, res.counted, 0)
    res.zeros.sort(key=lambda z: (z.real, z.imag))
    return res


# ---------------------------------------------------------------------------
# Painleve pole/zero maps
# ---------------------------------------------------------------------------

def tau_evaluator(n: int, weights: SeedWeights):
    """(tau_n, tau_n') evaluator, rescaled per call by a positive factor."""
    def f(z: complex):
        te = tau(n, z, weights, derivatives=1)
        e = max(te.value.exp10, te.dvals[0].exp10)
        return (te.value.mantissa * 10.0 ** (te.value.exp10 - e),
                te.dvals[0].mantissa * 10.0 ** (te.dvals[0].exp10 - e))
    return f


def q_numerator_evaluator(n: int, weights: SeedWeights):
    """Numerator of q_n = (tau_{n-1}' tau_n - tau_n' tau_{n-1}) / (tau_{n-1} tau_n).

    Zeros of the returned function are the zeros of q_n; its derivative is
    tau_{n-1}'' tau_n - tau_n'' tau_{n-1} (the cross terms cancel).
    """
    def f(z: complex):
        ta = tau(n - 1, z, weights, derivatives=2)
        tb = tau(n, z, weights, derivatives=2)
        val = ta.dvals[0] * tb.value - tb.dvals[0] * ta.value
        dval = ta.dvals[1] * tb.value - tb.dvals[1] * ta.value
        e = max(val.exp10, dval.exp10)
        return (val.mantissa * 10.0 ** (val.exp10 - e),
                dval.mantissa * 10.0 ** (dval.exp10 - e))
    return f


@dataclass
class PoleMap:
    """Poles and zeros of q_n in a window.

    poles_plus are zeros of tau_{n-1} (q-residue +1 via q = sigma_{n-1} -
    sigma_n), poles_minus zeros of tau_n (residue -1).
    """

    n: int
    lam: complex | None
    window: Window
    poles_plus: list
    poles_minus: list
    zeros_q: list
    unresolved: list

    def disjointness_gap(self) -> float:
        """Min distance between plus- and minus-poles (inf when either empty)."""
        if not self.poles_plus or not self.poles_minus:
            return math.inf
        return min(abs(a - b) for a in self.poles_plus for b in self.poles_minus)


def pole_map(n: int, weights: SeedWeights, w: Window, tol: float = 1e-9) -> PoleMap:
    """Three locate_zeros passes: tau_{n-1}, tau_n, and the q_n numerator."""
    if n < 1:
        raise ValueError("pole_map needs n >= 1")
    unresolved = []
    if n - 1 == 0:
        plus = []
    else:
        r = locate_zeros(tau_evaluator(n - 1, weights), w, tol)
        plus, _ = r.zeros, unresolved.extend(r.unresolved)
    r = locate_zeros(tau_evaluator(n, weights), w, tol)
    minus = r.zeros
    unresolved.extend(r.unresolved)
    r = locate_zeros(q_numerator_evaluator(n, weights), w, tol)
    zq = r.zeros
    unresolved.extend(r.unresolved)
    return PoleMap(n, weights.lam, w, plus, minus, zq, unresolved)
