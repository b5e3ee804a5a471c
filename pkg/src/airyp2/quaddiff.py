"""Trajectories and orthogonal trajectories of -Q(z) dz^2, critical graphs,
adjacency data, the harmonic function U(z) = Re(2 int sqrt(Q)), preferred
S-curve chains, and equilibrium-measure checks.

A trajectory satisfies -Q(z(s)) (z'(s))^2 > 0; tracing integrates the unit
direction field v = conj(sqrt(-Q))/|sqrt(-Q)| (sign continued along the arc)
with RK4, then projects each step back onto the level line of Re int sqrt(Q)
(Im for orthogonal trajectories), which pins the phase of Q (dz)^2.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PolyQuartic",
    "AuxiliaryField",
    "TrajectoryArc",
    "CriticalGraph",
    "SCurveChain",
    "NearDoubleZeroError",
    "trace",
    "launch_from_zero",
    "launch_directions",
    "critical_graph",
    "u_function",
    "s_curve",
    "equilibrium_check",
]

CAPTURE_RADIUS = 1e-4
LAUNCH_OFFSET = 1e-5
R_OUT = 20.0
MAX_ARCLENGTH = 200.0


class NearDoubleZeroError(ArithmeticError):
    """Launch requested at a zero that is (numerically) not simple."""


# ---------------------------------------------------------------------------
# Fields
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolyQuartic:
    """Q(z) = (1/4) prod (z - z_i); the standard degree-4 field."""

    zeros: tuple

    def value(self, z: complex) -> complex:
        v = 0.25 + 0j
        for r in self.zeros:
            v *= z - r
        return v

    def deriv(self, z: complex) -> complex:
        v, dv = 0.25 + 0j, 0j
        for r in self.zeros:
            dv = dv * (z - r) + v
            v *= z - r
        return dv

    @property
    def poles(self):
        return ()

    def traj_asymptotes(self):
        # -(1/4) z^4 dz^2 > 0 at infinity: angles -5pi/6 + k pi/3
        return [(-5 + 2 * k) * math.pi / 6 for k in range(6)]

    def orth_asymptotes(self):
        return [-math.pi + k * math.pi / 3 for k in range(6)]


@dataclass(frozen=True)
class AuxiliaryField:
    """Q(s) = (1 + 1/s)^3: third-order zero at -1, third-order pole at 0."""

    def value(self, s: complex) -> complex:
        return (1.0 + 1.0 / s) ** 3

    def deriv(self, s: complex) -> complex:
        return -3.0 * (1.0 + 1.0 / s) ** 2 / (s * s)

    @property
    def zeros(self):
        return (-1.0 + 0j,)

    @property
    def poles(self):
        return (0j,)

    def traj_asymptotes(self):
        # Q -> 1 at infinity, so trajectories become vertical lines
        return [math.pi / 2, -math.pi / 2]

    def orth_asymptotes(self):
        return [0.0, math.pi]


# ---------------------------------------------------------------------------
# Tracing
# ---------------------------------------------------------------------------

@dataclass
class TrajectoryArc:
    kind: str                 # "trajectory" | "orthogonal"
    points: list              # polyline of complex
    start: tuple              # ("zero", i) | ("point",)
    end: tuple                # ("zero", i) | ("pole", i) | ("infinity", bin) | ("truncated",)
    arclength: float

    @property
    def is_short(self) -> bool:
        return self.start[0] == "zero" and self.end[0] == "zero"

    def reversed(self) -> "TrajectoryArc":
        return TrajectoryArc(self.kind, list(reversed(self.points)),
                             self.end, self.start, self.arclength)

    def phase_defect(self, q_value) -> float:
        """Max deviation of arg(Q (dz)^2) from its nominal value on segments."""
        want = math.pi if self.kind == "trajectory" else 0.0
        worst = 0.0
        for a, b in zip(self.points[:-1], self.points[1:]):
            if a == b:
                continue
            mid = 0.5 * (a + b)
            ph = cmath.phase(q_value(mid) * (b - a) ** 2)
            worst = max(worst, abs((ph - want + math.pi) % (2 * math.pi) - math.pi))
        return worst


def _unit_dir(field, z, ref, kind):
    q = field.value(z)
    u = cmath.sqrt(-q if kind == "trajectory" else q)
    if u == 0:
        return None
    v = u.conjugate() / abs(u)
    if ref is not None and (v.real * ref.real + v.imag * ref.imag) < 0:
        v = -v
    return v


def _sqrt_matched(field, z, ref):
    w = cmath.sqrt(field.value(z))
    if ref is not None and (w.real * ref.real + w.imag * ref.imag) < 0:
        w = -w
    return w


def _step_drift(field, a, b, kind):
    """Re (trajectory) or Im (orthogonal) of int_a^b sqrt(Q) dz on the chord."""
    x1 = math.sqrt(3.0 / 5.0)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    ref = cmath.sqrt(field.value(mid))
    acc = 0j
    for x, wt in ((-x1, 5 / 9), (0.0, 8 / 9), (x1, 5 / 9)):
        acc += wt * _sqrt_matched(field, mid + x * half, ref)
    val = acc * half
    return (val.real if kind == "trajectory" else val.imag), ref


def trace(field, start: complex, direction: complex, kind: str = "trajectory", *,
          capture: float = CAPTURE_RADIUS, r_out: float = R_OUT,
          max_arclength: float = MAX_ARCLENGTH, h_max: float = 0.05,
          start_tag: tuple = ("point",)) -> TrajectoryArc:
    """Trace one (orthogonal) trajectory from `start` along `direction`.

    Terminates on zero capture (a short arc when launched from a zero), pole
    capture, |z| > r_out moving outward (binned by the nearest asymptote
    angle), or the arclength cap (flagged "truncated", never silently kept).
    """
    zeros = list(field.zeros)
    poles = list(field.poles)
    asym = field.traj_asymptotes() if kind == "trajectory" else field.orth_asymptotes()
    z = complex(start)
    v = direction / abs(direction)
    pts = [z]
    start_pos = z
    if start_tag[0] == "zero":
        # include the exact zero so the polyline has no gap at its root
        start_pos = complex(zeros[start_tag[1]])
        pts.insert(0, start_pos)
    arclen = 0.0
    end = ("truncated",)
    clearance = 12 * max(LAUNCH_OFFSET, 1e-9)

    def nearest(points, zz):
        best, idx = math.inf, -1
        for i, p in enumerate(points):
            d = abs(zz - p)
            if d < best:
                best, idx = d, i
        return best, idx

    theta_max = 0.02  # max turning per step, bounds chord sagitta
    h = min(h_max, 1e-3)
    while arclen < max_arclength:
        dz_crit = min([abs(z - p) for p in zeros] + [abs(z - p) for p in poles]
                      or [math.inf], default=math.inf)
        cap = min(h_max, max(0.22 * dz_crit, 1e-7))
        h = min(max(h, 1e-7), cap)
        k1 = _unit_dir(field, z, v, kind)
        if k1 is None:
            break
        for _ in range(10):
            k2 = _unit_dir(field, z + 0.5 * h * k1, k1, kind)
            k3 = _unit_dir(field, z + 0.5 * h * k2, k2, kind) if k2 else None
            k4 = _unit_dir(field, z + h * k3, k3, kind) if k3 else None
            if k4 is None:
                break
            turn = abs(cmath.phase(k4 / k1))
            if turn <= theta_max or h <= 1e-7:
                break
            h = max(1e-7, h * 0.6 * theta_max / turn)
        if k4 is None:
            break
        z_new = z + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        # grow the step gently when the arc is nearly straight
        h_next = min(cap, h * (1.6 if turn < 0.4 * theta_max else 1.05))
        # Newton-project the step endpoint back onto the level line of
        # Re int sqrt(Q) (Im for orthogonal); this pins the phase invariant
        for _ in range(3):
            drift, ref = _step_drift(field, z, z_new, kind)
            g = _sqrt_matched(field, z_new, ref)
            if g == 0 or abs(drift) < 1e-13 * (1.0 + abs(g) * h):
                break
            corr = -drift * g.conjugate() / abs(g) ** 2
            if kind == "orthogonal":
                corr *= 1j
            z_new = z_new + corr
        v_new = _unit_dir(field, z_new, k4, kind)
        if v_new is None:
            break
        arclen += abs(z_new - z)
        z, v = z_new, v_new
        h = h_next
        pts.append(z)
        d0, i0 = nearest(zeros, z)
        # self-capture guard keyed to position (a double zero shares it)
        if d0 < capture and not (arclen < clearance
                                 and abs(zeros[i0] - start_pos) < 3 * capture):
            pts.append(zeros[i0])
            end = ("zero", i0)
            break
        if poles:
            dp, ip = nearest(poles, z)
            if dp < capture:
                end = ("pole", ip)
                break
        if abs(z) > r_out and (z.conjugate() * v).real > 0:
            th = cmath.phase(z)
            j = min(range(len(asym)),
                    key=lambda k: abs((th - asym[k] + math.pi) % (2 * math.pi) - math.pi))
            end = ("infinity", _bin_index(asym[j], kind))
            break
    return TrajectoryArc(kind, pts, start_tag, end, arclen)


def _bin_index(angle: float, kind: str) -> int:
    """Canonical direction bins: trajectory bin k holds angle -5pi/6 + k pi/3,
    orthogonal bin m holds the ray angle pi m/3 (the adjacency rays)."""
    if kind == "trajectory":
        return round((angle + 5 * math.pi / 6) / (math.pi / 3)) % 6
    return round(angle / (math.pi / 3)) % 6


def launch_from_zero(field, zero: complex, kind: str = "trajectory"):
    """Three launch directions at a simple zero:
    theta_j = (pi - arg Q'(zero))/3 + 2 pi j/3 (drop the pi for orthogonal).

    Raises NearDoubleZeroError when |Q'(zero)| is numerically zero.
    """
    dq = field.deriv(zero)
    scale = max(abs(field.value(zero + 0.1)), 1e-30)
    if abs(dq) < 1e-10 * scale:
        raise NearDoubleZeroError(f"zero at {zero} is not numerically simple")
    base = (math.pi if kind == "trajectory" else 0.0) - cmath.phase(dq)
    return [cmath.exp(1j * ((base + 2 * math.pi * j) / 3.0)) for j in range(3)]


def launch_directions(field, zero: complex, multiplicity: int,
                      kind: str = "trajectory"):
    """Launch directions at a zero of any multiplicity m (m + 2 of them)."""
    m = multiplicity
    eps = 1e-3
    c = field.value(zero + eps) / eps**m
    base = (math.pi if kind == "trajectory" else 0.0) - cmath.phase(c)
    return [cmath.exp(1j * ((base + 2 * math.pi * j) / (m + 2))) for j in range(m + 2)]


# ---------------------------------------------------------------------------
# Critical graphs and adjacency data
# ---------------------------------------------------------------------------

@dataclass
class CriticalGraph:
    """Zeros, traced arcs, short-trajectory pairs, adjacency data, shading.

    adjacency[i] is the set of ray indices m (rays r e^{i pi m/3}) whose end
    domain has z_i on its boundary; shading[m] is the sign of U on that end
    domain.  Orthogonal launches are kept for S-curve assembly.
    """

    field: PolyQuartic
    zeros: tuple
    arcs: list
    orth_arcs: list
    short_pairs: list         # sorted (i, j) pairs
    adjacency: list           # per zero: frozenset of ray bins
    shading: dict             # ray bin -> +1/-1 (sign of U)
    u_at: object              # callable U(z)

    def unbounded_bins(self):
        return sorted(a.end[1] for a in self.arcs if a.end[0] == "infinity")

    def short_graph_shape(self) -> str:
        """'star' (one zero meets all three shorts), 'path', or 'other'."""
        deg = [0, 0, 0, 0]
        for i, j in self.short_pairs:
            deg[i] += 1
            deg[j] += 1
        if sorted(deg) == [1, 1, 1, 3]:
            return "star"
        if sorted(deg) == [1, 1, 2, 2]:
            return "path"
        return "other"

    def validate(self) -> list:
        """Admissibility diagnostics; empty list means a valid Boutroux graph."""
        problems = []
        if len(self.short_pairs) != 3:
            problems.append(f"expected 3 short trajectories, got {len(self.short_pairs)}")
        if self.short_graph_shape() == "other":
            problems.append("short trajectories form neither a star nor a chain")
        if any(a.end[0] == "truncated" for a in self.arcs):
            problems.append("truncated trajectory present")
        bins = self.unbounded_bins()
        if bins != list(range(6)):
            problems.append(f"unbounded arcs do not fill the six directions: {bins}")
        # every other end domain is shaded, starting with the sector
        # between 5pi/6 and 7pi/6 (ray bin 3)
        for m in range(6):
            want = -1 if m % 2 == 1 else 1
            if self.shading.get(m, 0) != want:
                problems.append(f"shading at ray bin {m} is {self.shading.get(m)}, want {want}")
        return problems

    def canonical_adjacency(self):
        """Relabeling-invariant signature: sorted (short-degree, sorted bins)."""
        deg = [0, 0, 0, 0]
        for i, j in self.short_pairs:
            deg[i] += 1
            deg[j] += 1
        return tuple(sorted((deg[i], tuple(sorted(self.adjacency[i])))
                            for i in range(len(self.zeros))))


def _ray_bin(angle: float) -> int:
    return round(angle / (math.pi / 3)) % 6


def critical_graph(q: PolyQuartic, *, h_max: float = 0.05) -> CriticalGraph:
    """Launch all twelve trajectories, dedupe shorts, compute adjacency data.

    Requires four distinct zeros (separation > 1e-8).  Adjacency uses the
    orthogonal trajectory launched into each incident sector: inside an end
    domain it runs to infinity along that domain's ray.
    """
    zeros = tuple(q.zeros)
    if len(zeros) != 4:
        raise ValueError("critical_graph expects a quartic with 4 zeros")
    for i, a in enumerate(zeros):
        for b in zeros[i + 1:]:
            if abs(a - b) < 1e-8:
                raise NearDoubleZeroError(f"zeros {a} and {b} nearly coincide")

    arcs = []
    for i, z0 in enumerate(zeros):
        for d in launch_from_zero(q, z0):
            arcs.append(trace(q, z0 + LAUNCH_OFFSET * d, d,
                              start_tag=("zero", i), h_max=h_max))
    # dedupe mutual short detections (i->j and j->i)
    short_pairs = set()
    for a in arcs:
        if a.is_short:
            i, j = a.start[1], a.end[1]
            short_pairs.add((min(i, j), max(i, j)))
    short_pairs = sorted(short_pairs)

    u = u_function(q, short_trajectories(arcs))

    orth_arcs = []
    adjacency = []
    for i, z0 in enumerate(zeros):
        bins = set()
        for d in launch_from_zero(q, z0, kind="orthogonal"):
            arc = trace(q, z0 + LAUNCH_OFFSET * d, d, kind="orthogonal",
                        start_tag=("zero", i), h_max=h_max)
            orth_arcs.append(arc)
            if arc.end[0] == "infinity":
                bins.add(arc.end[1])
        adjacency.append(frozenset(bins))

    shading = {}
    for m in range(6):
        probe = 0.8 * R_OUT * cmath.exp(1j * math.pi * m / 3)
        shading[m] = 1 if u(probe) > 0 else -1
    return CriticalGraph(q, zeros, arcs, orth_arcs, short_pairs,
                         adjacency, shading, u)


def short_trajectories(arcs):
    """One representative polyline per unordered short pair."""
    seen = {}
    for a in arcs:
        if a.is_short:
            key = (min(a.start[1], a.end[1]), max(a.start[1], a.end[1]))
            if key not in seen or a.start[1] < a.end[1]:
                seen[key] = a
    return [seen[k] for k in sorted(seen)]


# ---------------------------------------------------------------------------
# The harmonic function U and path-routed integrals
# ---------------------------------------------------------------------------

def _crosses_polyline(a, b, poly) -> bool:
    """Exact proper-intersection test of segment (a,b) with a full polyline."""
    pts = np.asarray(poly, dtype=complex)
    if len(pts) < 2:
        return False
    c = pts[:-1]
    d = pts[1:]
    ab = b - a

    def cross(o, u, v):
        return (u.real - o.real) * (v.imag - o.imag) - (u.imag - o.imag) * (v.real - o.real)

    o1 = (ab.real * (c.imag - a.imag) - ab.imag * (c.real - a.real))
    o2 = (ab.real * (d.imag - a.imag) - ab.imag * (d.real - a.real))
    cd = d - c
    o3 = (cd.real * (a.imag - c.imag) - cd.imag * (a.real - c.real))
    o4 = (cd.real * (b.imag - c.imag) - cd.imag * (b.real - c.real))
    hit = (np.sign(o1) * np.sign(o2) < 0) & (np.sign(o3) * np.sign(o4) < 0)
    return bool(np.any(hit))


class RoutingError(RuntimeError):
    """A cut-avoiding path could not be constructed."""


def _nearest_on_polyline(poly, z: complex) -> complex:
    pts = np.asarray(poly, dtype=complex)
    a, b = pts[:-1], pts[1:]
    ab = b - a
    tt = np.clip(((z - a) * np.conj(ab)).real / np.maximum(np.abs(ab) ** 2, 1e-300), 0.0, 1.0)
    proj = a + tt * ab
    k = int(np.argmin(np.abs(proj - z)))
    return complex(proj[k])


def _route(a: complex, b: complex, obstacles) -> list:
    """Polygonal path a -> b avoiding the obstacle polylines.

    Obstacles are bounded arcs, so detours exist around their endpoints or
    by backing a leg endpoint away from the obstacle it hugs.  Raises
    RoutingError when no clean path is found.
    """
    def leg_hit(p, qq):
        for poly in obstacles:
            if _crosses_polyline(p, qq, poly):
                return poly
        return None

    path = [a, b]
    for _ in range(20):
        out = [path[0]]
        changed = False
        for p, qq in zip(path[:-1], path[1:]):
            hit = leg_hit(p, qq)
            if hit is None:
                out.append(qq)
                continue
            changed = True
            lo, hi = hit[0], hit[-1]
            mid = hit[len(hit) // 2]
            span = max(abs(lo - mid), abs(hi - mid), 1e-6)
            cands = []
            for endp in (lo, hi):
                u = (endp - mid) / max(abs(endp - mid), 1e-12)
                for fac in (0.35, 0.9, 1.8):
                    cands.append(endp + fac * span * u)
            # back the near endpoint of the leg away from the obstacle; the
            # graded ladder climbs out of narrow wedges between cuts
            for zz in (qq, p):
                near = _nearest_on_polyline(hit, zz)
                if abs(zz - near) > 1e-12:
                    u = (zz - near) / abs(zz - near)
                    for fac in (0.05, 0.12, 0.3, 0.8, 2.0):
                        cands.append(zz + fac * span * u)
            best = None
            for w in cands:
                if leg_hit(p, w) is None and leg_hit(w, qq) is None:
                    d = abs(p - w) + abs(w - qq)
                    if best is None or d < best[0]:
                        best = (d, w)
            if best is None:
                # provisional waypoint; the next sweep keeps untangling
                best = (0.0, mid + 1j * 0.7 * span * (qq - p) / max(abs(qq - p), 1e-12))
            out.extend([best[1], qq])
        path = out
        if not changed:
            break
    for p, qq in zip(path[:-1], path[1:]):
        if leg_hit(p, qq) is not None:
            raise RoutingError(f"no cut-avoiding path from {a} to {b}")
    return path


_GL8 = np.polynomial.legendre.leggauss(8)


def _integrate_sqrtq(field, path, w_start=None):
    """int sqrt(Q) dz along a polygonal path with branch continuation.

    Returns (integral, w_end).  Legs are subdivided geometrically toward
    nearby zeros/poles (piece length <= 0.3 x distance), so endpoint
    square-root singularities cost no accuracy; 8-point Gauss per piece.
    """
    x8, w8 = _GL8
    crit = list(field.zeros) + list(field.poles)
    total = 0j
    w_ref = w_start
    for a, b in zip(path[:-1], path[1:]):
        leg = abs(b - a)
        if leg == 0:
            continue
        unit = (b - a) / leg
        floor = max(leg * 1e-7, 1e-12)
        s = 0.0
        guard = 0
        while s < leg and guard < 20000:
            guard += 1
            cur = a + s * unit
            d = min((abs(cur - c) for c in crit), default=math.inf)
            step = min(leg - s, max(0.3 * d, floor), 0.35)
            p, qn = cur, a + (s + step) * unit
            mid = 0.5 * (p + qn)
            wm = _sqrt_matched(field, mid, w_ref)
            half = 0.5 * (qn - p)
            acc = 0j
            for x, wt in zip(x8, w8):
                acc += wt * _sqrt_matched(field, mid + x * half, wm)
            total += acc * half
            w_ref = _sqrt_matched(field, qn, wm)
            s += step
    return total, w_ref


class UField:
    """U(z) = Re(2 int_e^z sqrt(Q) ds) with the branch ~ +z^2/2 at infinity.

    e is a zero on the cut set, so U vanishes on the cuts.  Also exposes the
    canonical branch value w(z) continued from the far anchor along
    cut-avoiding polygonal paths.
    """

    def __init__(self, field, cuts, base_scale: float | None = None,
                 anchor: complex | None = None):
        self.field = field
        self.cuts = [c.points if hasattr(c, "points") else list(c) for c in (cuts or [])]
        scale = base_scale or (3.0 + max((abs(z) for z in field.zeros), default=1.0))
        self.b0 = 2.5 * scale * cmath.exp(0.4321j)
        w0 = cmath.sqrt(field.value(self.b0))
        lead = self.b0 ** (len(field.zeros) // 2) if not field.poles else 1.0 + 0j
        if (w0 / lead).real < 0:
            w0 = -w0
        self.w0 = w0
        # the anchor must lie on the cut system (U = 0 there); one-cut fields
        # carry an off-support double zero, so callers pass it explicitly
        if anchor is None:
            anchor = min(field.zeros, key=abs) if field.zeros else self.b0
        e = complex(anchor)
        path0 = _route(e, self.b0, self.cuts)
        c0, w_end = _integrate_sqrtq(field, path0, None)
        flip = -1.0 if (w_end.real * w0.real + w_end.imag * w0.imag) < 0 else 1.0
        self.c0 = flip * c0

    def _from_anchor(self, z: complex):
        path = _route(self.b0, complex(z), self.cuts)
        return _integrate_sqrtq(self.field, path, self.w0)

    def __call__(self, z: complex) -> float:
        val, _ = self._from_anchor(z)
        return 2.0 * (self.c0 + val).real

    def branch_value(self, z: complex) -> complex:
        """sqrt(Q)(z) on the canonical branch, continued from the anchor."""
        _, w_end = self._from_anchor(z)
        return w_end


def u_function(field, cuts, *, base_scale: float | None = None,
               anchor: complex | None = None) -> UField:
    """Build the harmonic function U for the given field and cut system."""
    return UField(field, cuts, base_scale, anchor)


# ---------------------------------------------------------------------------
# Preferred S-curve chains
# ---------------------------------------------------------------------------

@dataclass
class SCurveChain:
    """Weighted arcs forming the preferred contour; case per the geometry."""

    case: str
    pieces: list              # (coefficient, TrajectoryArc)
    graph: object = None

    def max_u_on_tails(self, u) -> float:
        """Largest U over sampled points of the non-support arcs (should be <= 0)."""
        worst = -math.inf
        for _, arc in self.pieces:
            if arc.kind != "orthogonal":
                continue
            pts = arc.points
            for k in range(2, len(pts) - 2, max(1, len(pts) // 12)):
                worst = max(worst, u(pts[k]))
        return worst


def _orth_arc_to_bin(graph: CriticalGraph, zero_index: int, target_bin: int):
    for arc in graph.orth_arcs:
        if (arc.start == ("zero", zero_index) and arc.end[0] == "infinity"
                and arc.end[1] == target_bin):
            return arc
    return None


def s_curve(graph_or_q, weights, case: str, labels: dict) -> SCurveChain:
    """Assemble the preferred chain for a given case.

    `labels` maps role names to zero indices; roles depend on the case:
    trefoil: z0 (tail ray pi), z1 (tail -pi/3), z2 (tail pi/3), z3 (center);
    twocut:  a1, b1, a2, b2;  onecut handled by phase.s_curve_onecut.
    """
    graph = graph_or_q if isinstance(graph_or_q, CriticalGraph) else critical_graph(graph_or_q)
    a0, a1, a2 = weights.alpha0, weights.alpha1, weights.alpha2
    shorts = {(min(i, j), max(i, j)): arc
              for (i, j), arc in zip([(a.start[1], a.end[1]) for a in graph.arcs if a.is_short],
                                     [a for a in graph.arcs if a.is_short])}

    def short_arc(i, j):
        key = (min(i, j), max(i, j))
        for a in graph.arcs:
            if a.is_short and (a.start[1], a.end[1]) in (key, key[::-1]):
                return a
        raise KeyError(f"no short trajectory between zeros {i} and {j}")

    pieces = []
    if case == "trefoil":
        z0, z1, z2, z3 = labels["z0"], labels["z1"], labels["z2"], labels["z3"]
        pairs = [(a0, z0, 3), (a1, z1, 5), (a2, z2, 1)]
        for coeff, zi, tail_bin in pairs:
            tail = _orth_arc_to_bin(graph, zi, tail_bin)
            if tail is None:
                raise KeyError(f"no orthogonal tail from zero {zi} to ray bin {tail_bin}")
            pieces.append((coeff, tail.reversed()))
            pieces.append((coeff, short_arc(zi, z3)))
    elif case == "twocut":
        a1i, b1i, a2i, b2i = labels["a1"], labels["b1"], labels["a2"], labels["b2"]
        for coeff, (u_, v_), (bin_in, bin_out) in (
                (a0, (a1i, b1i), (3, 5)), (-a2, (a2i, b2i), (5, 1))):
            tin = _orth_arc_to_bin(graph, u_, bin_in)
            tout = _orth_arc_to_bin(graph, v_, bin_out)
            if tin is None or tout is None:
                raise KeyError("missing orthogonal tail for two-cut chain")
            pieces.append((coeff, tin.reversed()))
            pieces.append((coeff, short_arc(u_, v_)))
            pieces.append((coeff, tout))
    else:
        raise ValueError(f"unknown case {case}")
    return SCurveChain(case, pieces, graph)


# ---------------------------------------------------------------------------
# Equilibrium measure checks
# ---------------------------------------------------------------------------

def _resample_arc(points, n):
    """Arclength-uniform resampling of a polyline."""
    pts = np.asarray(points, dtype=complex)
    seg = np.abs(np.diff(pts))
    s = np.concatenate([[0.0], np.cumsum(seg)])
    total = s[-1]
    ss = np.linspace(0.0, total, n)
    re = np.interp(ss, s, pts.real)
    im = np.interp(ss, s, pts.imag)
    return re + 1j * im, total


def equilibrium_check(q: PolyQuartic, support_arcs, u: UField | None = None, *,
                      nodes: int = 96) -> dict:
    """Verify the equilibrium-measure properties on the support J.

    The density is d mu = -(1/pi i) Q_+^{1/2} dz with the canonical branch
    taken from the + (left) side of each oriented arc.  Reported: total mass
    (should be 1), worst |Im density| (realness), most negative density
    (positivity), worst |U| on J (flatness), and the S-property mismatch of
    one-sided normal derivatives of U.
    """
    if u is None:
        u = u_function(q, support_arcs)
    x_gl, w_gl = np.polynomial.legendre.leggauss(nodes // 2)
    xi = 0.5 * (x_gl + 1.0)          # [0, 1]
    wxi = 0.5 * w_gl
    mass = 0.0
    worst_im = 0.0
    min_density = math.inf
    worst_u = 0.0
    worst_sprop = 0.0
    for arc in support_arcs:
        orig = np.asarray(arc.points, dtype=complex)
        seg = np.abs(np.diff(orig))
        orig_s = np.concatenate([[0.0], np.cumsum(seg)])
        total = float(orig_s[-1])
        pts, _ = _resample_arc(arc.points, 1200)
        sgrid = np.linspace(0.0, total, len(pts))

        def z_of(s):
            # interpolate between traced vertices, then Newton-project back
            # onto the level line (vertices sit on it; chords sag off it)
            z = complex(np.interp(s, sgrid, pts.real), np.interp(s, sgrid, pts.imag))
            k = int(np.searchsorted(orig_s, s))
            k = max(0, min(len(orig) - 1, k))
            v = complex(orig[k])
            for _ in range(3):
                drift, ref = _step_drift(q, v, z, "trajectory")
                g = _sqrt_matched(q, z, ref)
                if g == 0 or abs(drift) < 1e-14:
                    break
                z = z - drift * g.conjugate() / abs(g) ** 2
            return z

        mid = z_of(total / 2)
        tmid = _unit_dir(q, mid, pts[len(pts) // 2 + 1] - pts[len(pts) // 2 - 1],
                         "trajectory")
        # canonical branch from the left side of the oriented arc; the probe
        # stands off farther than any chord sagitta, then matches onto J
        w_probe = u.branch_value(mid + 5e-4 * 1j * tmid)
        w_mid = _sqrt_matched(q, mid, w_probe)

        def density(s, w_ref):
            zz = z_of(s)
            # true dz/ds of the snapped curve (s is chord-length parameter,
            # so the local speed slightly exceeds 1)
            eps = min(1e-4 * total, 0.49 * min(s + 1e-30, total - s + 1e-30) + 1e-9)
            if eps < 1e-12 * total:
                eps = 1e-6 * total
            zp = z_of(min(total, s + eps))
            zm = z_of(max(0.0, s - eps))
            dzds = (zp - zm) / (min(total, s + eps) - max(0.0, s - eps))
            w = _sqrt_matched(q, zz, w_ref)
            val = -(1.0 / (math.pi * 1j)) * w * dzds
            unit = -(1.0 / (math.pi * 1j)) * w * dzds / abs(dzds)
            return val, unit, w

        # march the branch from the midpoint outward within each half, with
        # the quadratic substitution s = (L/2) xi^2 from each endpoint
        for half in (0, 1):
            svals = (total / 2.0) * xi**2
            if half == 1:
                svals = total - svals
            order = np.argsort(np.abs(svals - total / 2))  # mid -> endpoint
            w_ref = w_mid
            dens = np.empty(len(svals), dtype=complex)
            unit_dens = np.empty(len(svals), dtype=complex)
            for idx in order:
                dens[idx], unit_dens[idx], w_ref = density(float(svals[idx]), w_ref)
            jac = (total / 2.0) * 2.0 * xi          # ds/dxi
            contrib = np.sum(wxi * dens * jac)
            mass += contrib.real
            worst_im = max(worst_im, float(np.max(np.abs(unit_dens.imag))))
            min_density = min(min_density, float(np.min(unit_dens.real)))
        for frac in (0.25, 0.5, 0.75):
            # probe at traced vertices: they sit on the level line exactly
            k = max(1, min(len(orig) - 2, int(frac * (len(orig) - 1))))
            zz = complex(orig[k])
            tang = _unit_dir(q, zz, orig[k + 1] - orig[k - 1], "trajectory")
            nrm = 1j * tang
            u0 = u(zz)
            worst_u = max(worst_u, abs(u0))
            # one-sided outward derivatives, second order in h = 1e-5; the
            # off-support values come from local integrals seeded with the
            # side-resolved branch, so path noise cancels in the stencil
            w_left = _sqrt_matched(q, zz, u.branch_value(zz + 5e-4 * nrm))

            def u_probe(p, side):
                w_side = w_left if side > 0 else -w_left
                x1 = math.sqrt(3.0 / 5.0)
                mid = 0.5 * (zz + p)
                half = 0.5 * (p - zz)
                wm = _sqrt_matched(q, mid, w_side)
                acc = 0j
                for x, wt in ((-x1, 5 / 9), (0.0, 8 / 9), (x1, 5 / 9)):
                    acc += wt * _sqrt_matched(q, mid + x * half, wm)
                return u0 + 2.0 * (acc * half).real

            h = 1e-5
            dplus = (4 * u_probe(zz + 0.5 * h * nrm, +1)
                     - u_probe(zz + h * nrm, +1) - 3 * u0) / h
            dminus = (4 * u_probe(zz - 0.5 * h * nrm, -1)
                      - u_probe(zz - h * nrm, -1) - 3 * u0) / h
            worst_sprop = max(worst_sprop, abs(dplus - dminus))
    return {
        "mass": mass,
        "max_im_density": worst_im,
        "min_density": min_density,
        "max_u_on_support": worst_u,
        "s_property_mismatch": worst_sprop,
    }
