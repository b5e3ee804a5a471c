"""The phase diagram: cubic branches x_tau(t) of x^3 - t x - 1 = 0, one-cut
endpoints (a, b, c), the region atlas (one-cut / two-cut / trefoil regions
and their boundary curves), point classification, and Boutroux-condition
Newton solves for K(t).

Geometry conventions (eta = e^{2 pi i/3}):
  * three "tongue" regions O_{1,tau} of two-cut type pinch onto the rays
    arg t = pi (tau=0), pi/3 (tau=-i), -pi/3 (tau=i); their corner points
    are {eta t_cr, conj(eta) t_cr}, {t_cr, eta t_cr}, {t_cr, conj(eta) t_cr}
    with t_cr = 3 * 2^{-2/3};
  * the bounded trefoil region O_{1,-} around t = 0 is enclosed by the three
    tongue fronts;
  * the unbounded one-cut regions O_{0,tau} fill the sectors between tongues
    (O_{0,-i} contains the positive real axis).

Branch anchors at t = 0: x_0 = 1, x_{-i} = eta, x_i = conj(eta), with
sqrt-anchors sqrt(x_0) = 1, sqrt(x_{-i}) = e^{i pi/3}, sqrt(x_i) = e^{-i pi/3};
rotation identities x_{-i}(t) = eta x_0(eta t), x_i(t) = conj(eta) x_0(conj(eta) t).
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .quaddiff import (
    AuxiliaryField,
    PolyQuartic,
    _crosses_polyline,
    trace,
)

__all__ = [
    "ETA",
    "T_CRITICAL",
    "QuarticQ",
    "RegionAtlas",
    "PhaseLabel",
    "cubic_roots",
    "branch_x",
    "abc",
    "build_atlas",
    "classify",
    "boutroux_solve",
    "continuation_path",
]

ETA = cmath.exp(2j * math.pi / 3)
T_CRITICAL = 3.0 * 2.0 ** (-2.0 / 3.0)
CORNERS = (T_CRITICAL + 0j, T_CRITICAL * ETA, T_CRITICAL * ETA.conjugate())
# tongue tau-tag -> (pinch-ray angle, corner pair)
TONGUE_RAY = {"0": math.pi, "-i": math.pi / 3, "i": -math.pi / 3}


class DomainError(ValueError):
    """Requested branch/operation outside its region of validity."""


class BoundaryReached(ArithmeticError):
    """Zero collision during continuation: the region boundary was hit."""

    def __init__(self, t, k, gap):
        self.t = t
        self.k = k
        self.gap = gap
        super().__init__(f"zero pair collided (gap {gap:.2e}) near t={t}")


# ---------------------------------------------------------------------------
# Cubic branches
# ---------------------------------------------------------------------------

def cubic_roots(t: complex):
    """The three roots of x^3 - t x - 1 = 0 (Cardano + one Newton polish)."""
    t = complex(t)
    # depressed cubic x^3 + p x + q with p = -t, q = -1
    p, q = -t, -1.0 + 0j
    disc = (q / 2) ** 2 + (p / 3) ** 3
    s = cmath.sqrt(disc)
    for cand in (-q / 2 + s, -q / 2 - s):
        if abs(cand) > 1e-3:
            uc = cand ** (1.0 / 3.0)
            break
    else:
        uc = (-q / 2 + s) ** (1.0 / 3.0)
    roots = []
    for k in range(3):
        u = uc * cmath.exp(2j * math.pi * k / 3)
        x = u - p / (3 * u)
        f = x**3 - t * x - 1
        df = 3 * x * x - t
        if df != 0:
            # polish only when it helps; at double roots Newton diverges
            x_new = x - f / df
            if abs(x_new**3 - t * x_new - 1) < abs(f):
                x = x_new
        roots.append(x)
    return roots


def _track_root(t_path, x_start: complex):
    """Continue one root of the cubic along a polyline of t values.

    Steps are subdivided until the tracked root moves less than half the
    distance to the nearest other root; raises DomainError on collision.
    """
    x = complex(x_start)
    for a, b in zip(t_path[:-1], t_path[1:]):
        seg_done = 0.0
        t_cur = a
        while seg_done < 1.0:
            frac = min(1.0 - seg_done, _safe_fraction(t_cur, x, abs(b - a)))
            while True:
                t_next = a + (b - a) * (seg_done + frac)
                roots = cubic_roots(t_next)
                roots.sort(key=lambda r: abs(r - x))
                if abs(roots[0] - roots[1]) < 1e-10:
                    raise DomainError(f"cubic roots collide near t={t_next}")
                if abs(roots[0] - x) <= 0.5 * abs(roots[1] - x):
                    break
                frac *= 0.5  # ambiguous tracking: halve and retry
                if frac < 1e-12:
                    raise DomainError(f"root tracking stalled near t={t_next}")
            x = roots[0]
            t_cur = t_next
            seg_done += frac
    return x


def _safe_fraction(t, x, seg_len):
    if seg_len == 0:
        return 1.0
    others = [r for r in cubic_roots(t) if abs(r - x) > 1e-12]
    gap = min((abs(r - x) for r in others), default=1.0)
    # dx/dt = x/(3x^2 - t); keep the step below ~1/4 of the root gap
    df = abs(3 * x * x - t)
    speed = abs(x) / max(df, 1e-12)
    return max(min(0.25 * gap / max(speed * seg_len, 1e-12), 1.0), 1e-6)


def _sqrt_track(x_path_vals, s_start: complex):
    """Continue sqrt(x) along a list of x values by sign matching."""
    s = complex(s_start)
    for x in x_path_vals:
        r = cmath.sqrt(x)
        if (r.real * s.real + r.imag * s.imag) < 0:
            r = -r
        s = r
    return s


def branch_x(tau: str, t: complex, atlas: "RegionAtlas | None" = None,
             with_sqrt: bool = False):
    """The analytic branch x_tau(t), tau in {"0", "-i", "i"}.

    Continuation from the t = 0 anchor along a path that avoids the tongue
    O_{1,tau} (the branch locus); other tongues are crossed freely since the
    branch is holomorphic there.  With with_sqrt=True, also returns the
    anchored sqrt(x_tau)(t).
    """
    t = complex(t)
    if tau == "-i":
        if with_sqrt:
            x, s = branch_x("0", ETA * t, atlas, with_sqrt=True)
            return ETA * x, cmath.exp(1j * math.pi / 3) * s
        return ETA * branch_x("0", ETA * t, atlas)
    if tau == "i":
        if with_sqrt:
            x, s = branch_x("0", ETA.conjugate() * t, atlas, with_sqrt=True)
            return ETA.conjugate() * x, cmath.exp(-1j * math.pi / 3) * s
        return ETA.conjugate() * branch_x("0", ETA.conjugate() * t, atlas)
    if tau != "0":
        raise ValueError("tau must be one of '0', '-i', 'i'")

    path = _refine(_path_avoiding_tongue0(t, atlas))
    x = 1.0 + 0j
    xs = []
    for a, b in zip(path[:-1], path[1:]):
        x = _track_root([a, b], x)
        xs.append(x)
    residual = x**3 - t * x - 1
    if abs(residual) > 1e-12 * max(1.0, abs(x) ** 3):
        raise ArithmeticError(f"branch continuation residual {abs(residual):.2e} at t={t}")
    if not with_sqrt:
        return x
    return x, _sqrt_track(xs, 1.0 + 0j)


def _refine(path, h: float = 0.05):
    out = [path[0]]
    for a, b in zip(path[:-1], path[1:]):
        n = max(1, int(abs(b - a) / h) + 1)
        out.extend(a + (b - a) * k / n for k in range(1, n + 1))
    return out


def _path_avoiding_tongue0(t: complex, atlas: "RegionAtlas | None"):
    """Waypoints 0 -> t for the x_0 continuation.

    The branch locus is the tongue on the negative real axis together with
    its corner branch points eta t_cr, conj(eta) t_cr; a straight segment is
    used when it clears both, otherwise the path sweeps along a circular
    detour (crossing the other tongues is harmless for x_0).
    """
    if t == 0:
        return [0j, 0j]
    corners = (T_CRITICAL * ETA, T_CRITICAL * ETA.conjugate())
    straight_ok = all(_seg_dist(0j, t, c) > 0.05 for c in corners)
    if straight_ok:
        if atlas is not None:
            straight_ok = not _crosses_polyline(0j, t, atlas.tongue_polygon("0"))
        else:
            straight_ok = abs(cmath.phase(t)) < 2 * math.pi / 3 - 0.05 or abs(t) < 0.95
    if straight_ok:
        return [0j, t]
    # detour: radially out along arg 0, sweep at radius r, then to t
    r = max(abs(t), 2.6)
    th = cmath.phase(t)
    n = max(3, int(abs(th) / 0.3) + 1)
    arcpts = [r * cmath.exp(1j * th * k / n) for k in range(n + 1)]
    return [0j] + arcpts + [t]


def abc(tau: str, t: complex, atlas: "RegionAtlas | None" = None):
    """One-cut endpoints a, b = x -/+ i sqrt(2)/sqrt(x), c = -x, and Q.

    x = x_tau(t) with the anchored sqrt; the assembled quartic is
    Q(z) = (1/4)(z - a)(z - b)(z - c)^2.
    """
    x, s = branch_x(tau, t, atlas, with_sqrt=True)
    shift = 1j * math.sqrt(2.0) / s
    a = x - shift
    b = x + shift
    c = -x
    return a, b, c, QuarticQ.from_zeros(t, (a, b, c, c))


# ---------------------------------------------------------------------------
# Quartic data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuarticQ:
    """Q(z; t) = (1/4)(z^2 - t)^2 + z + K, also carried by its four zeros."""

    t: complex
    bigK: complex
    zeros: tuple

    @staticmethod
    def from_zeros(t: complex, zeros) -> "QuarticQ":
        z0, z1, z2, z3 = zeros
        # K = Q(0) - t^2/4 evaluated from the factorized form
        k = 0.25 * z0 * z1 * z2 * z3 - 0.25 * t * t
        return QuarticQ(complex(t), k, tuple(complex(z) for z in zeros))

    @staticmethod
    def from_K(t: complex, k: complex) -> "QuarticQ":
        coeffs = [0.25, 0.0, -0.5 * complex(t), 1.0, 0.25 * complex(t) ** 2 + complex(k)]
        zeros = np.roots(coeffs)
        zeros = [_polish_quartic(complex(t), complex(k), complex(z)) for z in zeros]
        return QuarticQ(complex(t), complex(k), tuple(zeros))

    def value(self, z: complex) -> complex:
        return 0.25 * (z * z - self.t) ** 2 + z + self.bigK

    def field(self) -> PolyQuartic:
        return PolyQuartic(self.zeros)

    def coefficient_residual(self) -> float:
        """Mismatch between the zero product form and (1/4)(z^2-t)^2 + z + K."""
        worst = 0.0
        for z in (0.7 + 0.2j, -1.1 + 0.9j, 2.0 - 1.3j):
            direct = self.value(z)
            spread = 0.25
            for r in self.zeros:
                spread *= z - r
            worst = max(worst, abs(direct - spread) / max(1.0, abs(direct)))
        return worst


def _polish_quartic(t, k, z):
    for _ in range(3):
        f = 0.25 * (z * z - t) ** 2 + z + k
        df = z * (z * z - t) + 1.0
        if df == 0:
            break
        z -= f / df
    return z


# ---------------------------------------------------------------------------
# Atlas
# ---------------------------------------------------------------------------

@dataclass
class RegionAtlas:
    """Boundary polylines of the phase regions plus the source curves.

    curves_s: the five critical trajectories of -(1+1/s)^3 ds^2 from s = -1;
    curves_x: their lifts under s = 2 x^3 (the set Delta);
    tongues: per tau-tag, dict with 'front', 'flanks' (t-plane polylines) and
    'corners'; trefoil: closed polyline around O_{1,-}; corners: the three
    critical t values.
    """

    curves_s: dict
    curves_x: list
    tongues: dict
    trefoil: list
    corners: tuple
    version: int = 1

    def tongue_polygon(self, tau: str):
        ent = self.tongues[tau]
        front = ent["front"]
        fl_a, fl_b = ent["flanks"]
        # orient: flank_a runs corner -> infinity; walk in from one flank,
        # across the front, out the other, closing across the pinch
        poly = list(reversed(fl_a)) + list(front) + list(fl_b)
        poly.append(poly[0])
        return poly

    def trefoil_polygon(self):
        poly = list(self.trefoil)
        if poly[0] != poly[-1]:
            poly.append(poly[0])
        return poly

    def reach(self) -> float:
        return min(abs(ent["flanks"][0][-1]) for ent in self.tongues.values())

    def to_json(self) -> str:
        def ser(poly):
            return [[float(z.real), float(z.imag)] for z in poly]
        data = {
            "atlas_version": self.version,
            "corners": ser(self.corners),
            "curves_s": {k: ser(v) for k, v in self.curves_s.items()},
            "curves_x": [ser(v) for v in self.curves_x],
            "trefoil": ser(self.trefoil),
            "tongues": {
                tau: {
                    "front": ser(ent["front"]),
                    "flanks": [ser(f) for f in ent["flanks"]],
                    "corners": ser(ent["corners"]),
                }
                for tau, ent in self.tongues.items()
            },
        }
        return json.dumps(data, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "RegionAtlas":
        data = json.loads(text)
        if data.get("atlas_version") != 1:
            raise ValueError("unsupported atlas version")

        def de(poly):
            return [complex(a, b) for a, b in poly]

        return RegionAtlas(
            curves_s={k: de(v) for k, v in data["curves_s"].items()},
            curves_x=[de(v) for v in data["curves_x"]],
            tongues={tau: {"front": de(ent["front"]),
                           "flanks": [de(f) for f in ent["flanks"]],
                           "corners": de(ent["corners"])}
                     for tau, ent in data["tongues"].items()},
            trefoil=de(data["trefoil"]),
            corners=tuple(de(data["corners"])),
        )


def _winding_contains(poly, z: complex) -> bool:
    pts = np.asarray(poly, dtype=complex)
    a = pts[:-1] - z
    b = pts[1:] - z
    ang = np.angle(b / a)
    return abs(np.sum(ang)) > math.pi


def _dist_to_polyline(poly, z: complex) -> float:
    pts = np.asarray(poly, dtype=complex)
    a, b = pts[:-1], pts[1:]
    ab = b - a
    tt = np.clip(((z - a) * np.conj(ab)).real / np.maximum(np.abs(ab) ** 2, 1e-300), 0.0, 1.0)
    proj = a + tt * ab
    return float(np.min(np.abs(proj - z)))


def build_atlas(resolution: float = 0.02, *, r_out: float = 200.0) -> RegionAtlas:
    """Trace the auxiliary critical graph, lift it, and assemble the regions.

    The five critical trajectories of -(1+1/s)^3 ds^2 leave s = -1 at angles
    2 pi k/5; the segment (-1, 0) ends at the pole, one loop crosses the
    positive real axis near 0.635, and two arcs run to +/- i infinity.  The
    lifts under x = (s/2)^{1/3} (three branches each) form Delta; mapping by
    t = (x^3 - 1)/x = (s/2 - 1)/x gives the region boundaries.
    """
    aux = AuxiliaryField()
    curves_s = {}
    for k in range(5):
        d = cmath.exp(2j * math.pi * k / 5)
        arc = trace(aux, -1.0 + LAUNCH_EPS * d, d, "trajectory", start_tag=("zero", 0),
                    r_out=r_out, max_arclength=6.0 * r_out, h_max=resolution * 60)
        curves_s[f"k{k}"] = arc.points
    # the loop is traced twice (k=1 up, k=4 down); keep both for symmetry use
    lifts = []
    for name, pts in curves_s.items():
        s_arr = np.asarray(pts, dtype=complex)
        # unwrapped argument along the arc (starts at s = -1, arg = +pi for
        # upper-half launches, -pi for lower)
        raw = np.angle(s_arr)
        unwrapped = np.unwrap(raw)
        start_dir = cmath.exp(2j * math.pi * int(name[1]) / 5)
        if (-1 + 0.01 * start_dir).imag < 0:
            if unwrapped[0] > 0:
                unwrapped -= 2 * math.pi
        else:
            if unwrapped[0] < 0:
                unwrapped += 2 * math.pi
        mag = np.abs(s_arr / 2.0) ** (1.0 / 3.0)
        for b in range(3):
            x_arr = mag * np.exp(1j * (unwrapped + 2 * math.pi * b) / 3.0)
            lifts.append((name, b, [complex(v) for v in x_arr]))
    curves_x = [pts for _, _, pts in lifts]

    # t-images of the lifted loop arcs give the three fronts; of the lifted
    # unbounded arcs, the six flanks
    fronts = []
    flanks = []
    for name, b, xpts in lifts:
        s_pts = curves_s[name]
        tpts = [((s / 2.0) - 1.0) / x for s, x in zip(s_pts, xpts)]
        ends_at_pole = abs(s_pts[-1]) < 10 * CAPTURE_EPS
        returns_to_zero = abs(s_pts[-1] + 1.0) < 10 * CAPTURE_EPS
        if returns_to_zero:
            fronts.append(tpts)
        elif not ends_at_pole:
            flanks.append(tpts)

    # dedupe fronts: the loop appears as k1 and k4 traces of the same curve;
    # the three distinct fronts have three distinct corner pairs
    seen = {}
    for f in fronts:
        key = tuple(sorted((round(f[0].real, 5), round(f[0].imag, 5),
                            round(f[-1].real, 5), round(f[-1].imag, 5))))
        seen.setdefault(key, f)
    uniq_fronts = list(seen.values())
    if len(uniq_fronts) != 3:
        raise RuntimeError(f"expected 3 tongue fronts, found {len(uniq_fronts)}")

    tongues = {}
    for tau, ray in TONGUE_RAY.items():
        front = min(uniq_fronts,
                    key=lambda f: abs(cmath.phase(f[len(f) // 2] * cmath.exp(-1j * ray))))
        my_flanks = [fl for fl in flanks
                     if abs((cmath.phase(fl[-1]) - ray + math.pi) % (2 * math.pi) - math.pi) < 0.5]
        if len(my_flanks) != 2:
            raise RuntimeError(f"tongue {tau}: expected 2 flanks, found {len(my_flanks)}")
        corner_pair = [front[0], front[-1]]
        # order flanks to attach to front[0] and front[-1]
        my_flanks.sort(key=lambda fl: abs(fl[0] - front[0]))
        if abs(my_flanks[0][0] - front[0]) > 1e-3 or abs(my_flanks[1][0] - front[-1]) > 1e-3:
            raise RuntimeError(f"tongue {tau}: flank/front corners mismatch")
        tongues[tau] = {"front": front, "flanks": my_flanks, "corners": corner_pair}

    # trefoil boundary: the three fronts chained into a closed curve
    trefoil = []
    chain = [tongues["0"]["front"], tongues["i"]["front"], tongues["-i"]["front"]]
    cur = list(chain[0])
    used = [chain[0]]
    while len(used) < 3:
        nxt = None
        for f in chain:
            if any(f is u for u in used):
                continue
            if abs(f[0] - cur[-1]) < 1e-6:
                nxt = list(f)
            elif abs(f[-1] - cur[-1]) < 1e-6:
                nxt = list(reversed(f))
            if nxt is not None:
                used.append(f)
                cur.extend(nxt[1:])
                break
        if nxt is None:
            raise RuntimeError("trefoil fronts do not chain up")
    trefoil = cur
    return RegionAtlas(curves_s, curves_x, tongues, trefoil, CORNERS)


LAUNCH_EPS = 1e-5
CAPTURE_EPS = 1e-4


@dataclass(frozen=True)
class PhaseLabel:
    """Classification of a parameter point."""

    kind: str            # "one-cut" | "two-cut" | "trefoil" | "boundary" | "corner"
    tau: str | None = None

    def __str__(self):
        return self.kind if self.tau is None else f"{self.kind}({self.tau})"


def classify(t: complex, atlas: RegionAtlas, *, boundary_tol: float = 1e-6) -> PhaseLabel:
    """Label t by region; points within boundary_tol of a boundary polyline
    are 'boundary' (or 'corner' at the three critical points)."""
    t = complex(t)
    for c in atlas.corners:
        if abs(t - c) <= max(boundary_tol, 1e-6):
            return PhaseLabel("corner")
    polys = [atlas.trefoil_polygon()] + [atlas.tongue_polygon(tau) for tau in ("0", "-i", "i")]
    for poly in polys:
        if _dist_to_polyline(poly, t) <= boundary_tol:
            return PhaseLabel("boundary")
    if _winding_contains(atlas.trefoil_polygon(), t):
        return PhaseLabel("trefoil")
    for tau in ("0", "-i", "i"):
        if _winding_contains(atlas.tongue_polygon(tau), t):
            return PhaseLabel("two-cut", tau)
    th = cmath.phase(t)
    if -math.pi / 3 <= th <= math.pi / 3:
        return PhaseLabel("one-cut", "-i")
    if th > math.pi / 3:
        return PhaseLabel("one-cut", "0")
    return PhaseLabel("one-cut", "i")


# ---------------------------------------------------------------------------
# Boutroux conditions
# ---------------------------------------------------------------------------

def _seg_dist(a: complex, b: complex, p: complex) -> float:
    ab = b - a
    tt = ((p - a) * ab.conjugate()).real / max(abs(ab) ** 2, 1e-300)
    tt = min(1.0, max(0.0, tt))
    return abs(a + tt * ab - p)


def _pair_contour(z_a, z_b, others, n_per_piece: int = 64):
    """Stadium contour around the segment [z_a, z_b]; the tube radius is
    0.6 x the clearance from the segment to the other zeros, so the contour
    encloses exactly the pair."""
    d_other = min(_seg_dist(z_a, z_b, o) for o in others)
    r = max(0.6 * d_other, 1e-3)
    seg = z_b - z_a
    u = seg / abs(seg) if abs(seg) > 0 else 1.0 + 0j
    n = 1j * u
    pieces = []
    # side 1: z_a + r n -> z_b + r n
    pieces.append(("line", z_a + r * n, z_b + r * n))
    pieces.append(("arc", z_b, r, cmath.phase(n), cmath.phase(n) - math.pi, False))
    pieces.append(("line", z_b - r * n, z_a - r * n))
    pieces.append(("arc", z_a, r, cmath.phase(-n), cmath.phase(-n) - math.pi, False))
    return pieces, r


def _contour_nodes(pieces, n_per_piece):
    x, w = np.polynomial.legendre.leggauss(n_per_piece)
    zs, dzs, wts = [], [], []
    for piece in pieces:
        if piece[0] == "line":
            _, a, b = piece
            mid, half = 0.5 * (a + b), 0.5 * (b - a)
            zs.append(mid + np.asarray(x) * half)
            dzs.append(np.full(n_per_piece, half, dtype=complex))
            wts.append(np.asarray(w))
        else:
            _, c, r, th0, th1, _ = piece
            th = 0.5 * (th0 + th1) + 0.5 * (th1 - th0) * np.asarray(x)
            e = np.exp(1j * th)
            zs.append(c + r * e)
            dzs.append(1j * r * e * 0.5 * (th1 - th0))
            wts.append(np.asarray(w))
    return np.concatenate(zs), np.concatenate(dzs), np.concatenate(wts)


def _cycle_periods(q: QuarticQ, pair, *, n_start: int = 64, tol: float = 1e-10):
    """(period of w dz, period of dz/w) around the zero pair, with the branch
    of w = sqrt(Q) continued along the contour; clockwise (negative) stadia
    are normalized to counterclockwise orientation."""
    z_a, z_b = pair
    others = [z for z in q.zeros if z not in (z_a, z_b)]
    pieces, _ = _pair_contour(z_a, z_b, others)
    npp = n_start
    prev = None
    while npp <= 1024:
        zs, dzs, wts = _contour_nodes(pieces, npp)
        vals = np.array([q.value(z) for z in zs])
        ws = np.sqrt(vals)
        # continuity pass
        for k in range(1, len(ws)):
            if (ws[k].real * ws[k - 1].real + ws[k].imag * ws[k - 1].imag) < 0:
                ws[k] = -ws[k]
        if (ws[0].real * ws[-1].real + ws[0].imag * ws[-1].imag) < 0:
            raise ArithmeticError("branch of sqrt(Q) fails to close around the pair")
        p_w = np.sum(wts * ws * dzs)
        p_inv = np.sum(wts * dzs / ws)
        if prev is not None and abs(p_w - prev[0]) + abs(p_inv - prev[1]) < tol:
            return complex(p_w), complex(p_inv)
        prev = (p_w, p_inv)
        npp *= 2
    return complex(prev[0]), complex(prev[1])


@dataclass(frozen=True)
class BoutrouxResult:
    """Converged Boutroux data; iterable as (K, Q, iters, gap, dets)."""

    k: complex
    q: QuarticQ
    iterations: int
    min_gap: float
    jacobian_dets: tuple
    labeled_zeros: tuple

    def __iter__(self):
        return iter((self.k, self.q, self.iterations, self.min_gap,
                     self.jacobian_dets))


def boutroux_residual(q: QuarticQ):
    """(B_alpha, B_beta) = Re of half the w-periods over the two basis cycles."""
    z0, z1, z2, _ = _label_zeros(q)
    pa, _ = _cycle_periods(q, (z0, z1))
    pb, _ = _cycle_periods(q, (z0, z2))
    return 0.5 * pa.real, 0.5 * pb.real


def _label_zeros(q: QuarticQ, prev=None):
    """Zero labeling (z0, z1, z2, z3), continued from the trefoil reference
    at t = 0 (z0 toward arg pi, z1 toward -pi/3, z2 toward +pi/3, z3 the
    center).  With prev given, labels follow by nearest matching, which keeps
    the homology basis orientation stable along continuation paths."""
    pool = list(q.zeros)
    out = []
    if prev is not None:
        for p in prev:
            pick = min(pool, key=lambda z: abs(z - p))
            out.append(pick)
            pool.remove(pick)
        return out
    ref = [cmath.rect(1.0, math.pi), cmath.rect(1.0, -math.pi / 3),
           cmath.rect(1.0, math.pi / 3)]
    for r in ref:
        pick = max(pool, key=lambda z: (z * r.conjugate()).real)
        out.append(pick)
        pool.remove(pick)
    out.append(pool[0])
    return out


def boutroux_solve(t: complex, k_start: complex, *, tol: float = 1e-10,
                   max_iter: int = 40, prev_zeros=None, collision_gap: float = 1e-3):
    """Newton iteration on (B_alpha, B_beta)(Re K, Im K) at fixed t.

    Returns (K, QuarticQ, iterations, min_gap, jacobian_dets).  Raises
    BoundaryReached when a zero pair collides during the iteration and
    ArithmeticError with the last iterate on Newton failure.
    """
    t = complex(t)
    k = complex(k_start)
    dets = []
    zl = None
    for it in range(max_iter):
        q = QuarticQ.from_K(t, k)
        gap = min(abs(a - b) for i, a in enumerate(q.zeros)
                  for b in q.zeros[i + 1:])
        if gap < collision_gap:
            raise BoundaryReached(t, k, gap)
        zl = _label_zeros(q, prev_zeros if zl is None else zl)
        pa, ia = _cycle_periods(q, (zl[0], zl[1]))
        pb, ib = _cycle_periods(q, (zl[0], zl[2]))
        ba, bb = 0.5 * pa.real, 0.5 * pb.real
        # dB/du = (1/4) Re oint dz/w, dB/dv = -(1/4) Im oint dz/w
        jac = np.array([[0.25 * ia.real, -0.25 * ia.imag],
                        [0.25 * ib.real, -0.25 * ib.imag]])
        det = float(np.linalg.det(jac))
        dets.append(det)
        if abs(ba) + abs(bb) <= tol:
            return BoutrouxResult(k, q, it, gap, tuple(dets), tuple(zl))
        try:
            du, dv = np.linalg.solve(jac, [-ba, -bb])
        except np.linalg.LinAlgError as exc:
            raise ArithmeticError(f"Boutroux Newton singular at K={k}") from exc
        step = complex(du, dv)
        if abs(step) > 0.5:
            step *= 0.5 / abs(step)
        k = k + step
    raise ArithmeticError(f"Boutroux Newton did not converge; last K={k}")


def continuation_path(t_target: complex, atlas: RegionAtlas, *,
                      step: float = 0.12):
    """Waypoints [(t, K), ...] from the trefoil anchor (0, 0) to t_target.

    Trefoil targets use a straight path from 0.  Two-cut targets enter the
    tongue just inside the front nearest the target (epsilon-split of the
    boundary double zero) and continue inward.
    """
    t_target = complex(t_target)
    label = classify(t_target, atlas)
    if label.kind == "trefoil":
        if t_target == 0:
            return [(0j, 0j)]
        results = _continue_k(_segment_points(0j, t_target, step), 0j)
    elif label.kind == "two-cut":
        tau = label.tau
        front = atlas.tongues[tau]["front"]
        t_star = min(front, key=lambda f: abs(f - t_target))
        inward = t_target - t_star
        inward /= max(abs(inward), 1e-12)
        t_entry = t_star + 1e-3 * inward
        _, _, c, _ = abc(tau, t_star, atlas)
        k_boundary = -0.25 * (c * c - t_star) ** 2 - c
        results = _continue_k(_segment_points(t_entry, t_target, step), k_boundary)
    else:
        raise DomainError(f"continuation targets must be trefoil or two-cut; got {label}")
    return [(r.q.t, r.k) for r in results]


def _segment_points(a: complex, b: complex, step: float):
    n = max(1, int(abs(b - a) / step) + 1)
    return [a + (b - a) * k / n for k in range(n + 1)]


def _continue_k(ts, k0: complex):
    """Boutroux continuation along waypoints; returns BoutrouxResult list."""
    out = []
    k = complex(k0)
    prev = None
    for t in ts:
        res = boutroux_solve(t, k, prev_zeros=prev)
        k, prev = res.k, res.labeled_zeros
        out.append(res)
    return out


# ---------------------------------------------------------------------------
# Support systems and preferred contours
# ---------------------------------------------------------------------------

@dataclass
class SupportSystem:
    """Q, its field, the support arcs J_t, and the harmonic function U."""

    t: complex
    label: PhaseLabel
    q: QuarticQ
    field: object
    support: list           # TrajectoryArc list forming J_t
    u: object                # UField
    graph: object = None     # CriticalGraph for simple-zero Q
    boutroux: object = None  # BoutrouxResult when applicable


def support_system(t: complex, atlas: RegionAtlas, *, label: PhaseLabel | None = None,
                   waypoint_step: float = 0.12) -> SupportSystem:
    """Build Q(z;t), trace the support J_t, and set up U.

    One-cut t uses the endpoint formulas through the branch x_tau; two-cut
    and trefoil t solve the Boutroux conditions by continuation from (0, 0).
    """
    from .quaddiff import critical_graph, launch_from_zero, short_trajectories, trace

    t = complex(t)
    label = label or classify(t, atlas)
    if label.kind in ("one-cut", "boundary", "corner"):
        tau = label.tau or "-i"
        a, b, c, q = abc(tau, t, atlas)
        field = q.field()
        j_arc = None
        for d in launch_from_zero(field, a):
            arc = trace(field, a + 1e-5 * d, d, start_tag=("zero", 0))
            if arc.end == ("zero", 1):
                j_arc = arc
                break
        if j_arc is None:
            raise ArithmeticError(f"no short trajectory from a to b at t={t}")
        u = _u_for(field, [j_arc], anchor=a)
        return SupportSystem(t, label, q, field, [j_arc], u)
    res = continuation_result(t, atlas, step=waypoint_step)
    q = res.q
    field = q.field()
    graph = critical_graph(field)
    shorts = short_trajectories(graph.arcs)
    support = [s for s in shorts if _is_support_arc(graph.u_at, s)]
    return SupportSystem(t, label, q, field, support, graph.u_at, graph, res)


def _u_for(field, cuts, anchor):
    from .quaddiff import u_function
    return u_function(field, cuts, anchor=anchor)


def _is_support_arc(u, arc, probe: float = 5e-4) -> bool:
    """J-arcs border {U > 0} on both sides; the two-cut middle connector
    has a sign change across it."""
    pts = arc.points
    mid = pts[len(pts) // 2]
    tang = pts[len(pts) // 2 + 1] - pts[len(pts) // 2 - 1]
    tang /= abs(tang)
    return u(mid + probe * 1j * tang) > 0 and u(mid - probe * 1j * tang) > 0


def continuation_result(t: complex, atlas: RegionAtlas, *, step: float = 0.12):
    """Boutroux data at t obtained by continuation (trefoil or two-cut)."""
    label = classify(t, atlas)
    if label.kind == "trefoil":
        return _continue_k(_segment_points(0j, t, step), 0j)[-1]
    if label.kind != "two-cut":
        raise DomainError(f"continuation targets must be trefoil or two-cut; got {label}")
    tau = label.tau
    front = atlas.tongues[tau]["front"]
    t_star = min(front, key=lambda f: abs(f - complex(t)))
    inward = complex(t) - t_star
    inward /= max(abs(inward), 1e-12)
    _, _, c, _ = abc(tau, t_star, atlas)
    k_boundary = -0.25 * (c * c - t_star) ** 2 - c
    t_entry = t_star + 1e-3 * inward
    return _continue_k(_segment_points(t_entry, complex(t), step), k_boundary)[-1]


def _rotate_arc(arc, factor: complex):
    from .quaddiff import TrajectoryArc
    return TrajectoryArc(arc.kind, [factor * p for p in arc.points],
                         arc.start, arc.end, arc.arclength * abs(factor))


def preferred_contour(t: complex, weights, atlas: RegionAtlas):
    """The preferred S-curve chain at t: [(coefficient, TrajectoryArc), ...].

    weights is a ContourWeights; rotated regions reduce to the representative
    case (one-cut O_{0,-i}, two-cut O_{1,-i}, or the trefoil) with the chain
    coefficients cycled accordingly, then rotate back.
    """
    from .cubicmodel import ContourWeights
    from .quaddiff import critical_graph, s_curve, short_trajectories

    t = complex(t)
    label = classify(t, atlas)
    alphas = (weights.alpha0, weights.alpha1, weights.alpha2)

    if label.kind == "trefoil":
        sysm = support_system(t, atlas)
        labels = _trefoil_labels(sysm.graph)
        return s_curve(sysm.graph, weights, "trefoil", labels).pieces

    if label.kind == "two-cut":
        # reduce to the representative tongue O_{1,-i}
        rot, cyc = _reduction_for(label.tau)
        t_rep = rot.conjugate() * t if abs(rot - 1) > 1e-12 else t
        w_rep = _cycled_weights(weights, cyc)
        sys_rep = support_system(t_rep, atlas)
        labels = _twocut_labels(sys_rep.graph)
        chain = s_curve(sys_rep.graph, w_rep, "twocut", labels).pieces
        if abs(rot - 1) > 1e-12:
            chain = [(coef, _rotate_arc(arc, rot)) for coef, arc in chain]
        return chain

    # one-cut (and its boundary limits)
    rot, cyc = _reduction_for(label.tau or "-i")
    t_rep = rot.conjugate() * t if abs(rot - 1) > 1e-12 else t
    w_rep = _cycled_weights(weights, cyc)
    chain = _onecut_chain(t_rep, w_rep, atlas)
    if abs(rot - 1) > 1e-12:
        chain = [(coef, _rotate_arc(arc, rot)) for coef, arc in chain]
    return chain


def _reduction_for(tau: str):
    """(rotation factor, weight cycle) mapping region tau to its representative.

    t = rot * t_rep; Sum alpha_k L_k = rot * Sum alpha'_k L_k with the cycled
    weights alpha' = (a1, a2, a0) when rot = eta, (a2, a0, a1) when conj(eta).
    """
    if tau in ("-i",):
        return 1.0 + 0j, (0, 1, 2)
    if tau == "0":
        return ETA, (1, 2, 0)
    return ETA.conjugate(), (2, 0, 1)


def _cycled_weights(weights, cyc):
    from .cubicmodel import ContourWeights
    alphas = (weights.alpha0, weights.alpha1, weights.alpha2)
    return ContourWeights(weights.lam, alphas[cyc[0]], alphas[cyc[1]], alphas[cyc[2]])


def _trefoil_labels(graph):
    deg = [0, 0, 0, 0]
    for i, j in graph.short_pairs:
        deg[i] += 1
        deg[j] += 1
    center = deg.index(3)
    labels = {"z3": center}
    for name, binm in (("z0", 3), ("z1", 5), ("z2", 1)):
        for i in range(4):
            if i != center and binm in graph.adjacency[i]:
                labels[name] = i
                break
    if len(labels) != 4:
        raise ArithmeticError("trefoil labeling failed; graph not star-shaped")
    return labels


def _twocut_labels(graph):
    """Path a1 - b1 - a2 - b2 with J = {[a1,b1], [a2,b2]}; a1 carries the
    orthogonal tail toward ray pi (bin 3)."""
    deg = [0, 0, 0, 0]
    for i, j in graph.short_pairs:
        deg[i] += 1
        deg[j] += 1
    ends = [i for i in range(4) if deg[i] == 1]
    mids = [i for i in range(4) if deg[i] == 2]
    pairs = set(graph.short_pairs)
    a1 = next(i for i in ends if 3 in graph.adjacency[i])
    b2 = next(i for i in ends if i != a1)
    b1 = next(i for i in mids if (min(a1, i), max(a1, i)) in pairs)
    a2 = next(i for i in mids if i != b1)
    return {"a1": a1, "b1": b1, "a2": a2, "b2": b2}


def _onecut_chain(t: complex, weights, atlas: RegionAtlas):
    """thm-geometry-1 chains for t in the closure of O_{0,-i}."""
    from .quaddiff import launch_directions, launch_from_zero, trace

    a0c, a1c, a2c = weights.alpha0, weights.alpha1, weights.alpha2
    a, b, c, q = abc("-i", t, atlas)
    field = q.field()

    def zidx(z0):
        return min(range(len(field.zeros)), key=lambda i: abs(field.zeros[i] - z0))

    def orth_tail(z0, target_bin, mult=1):
        dirs = (launch_from_zero(field, z0, kind="orthogonal") if mult == 1
                else launch_directions(field, z0, mult, kind="orthogonal"))
        for d in dirs:
            arc = trace(field, z0 + 1e-5 * d, d, kind="orthogonal",
                        start_tag=("zero", zidx(z0)))
            if arc.end == ("infinity", target_bin):
                return arc
        raise ArithmeticError(f"no orthogonal tail to ray bin {target_bin} from {z0}")

    def orth_short(z0, z_target, mult=1):
        dirs = (launch_from_zero(field, z0, kind="orthogonal") if mult == 1
                else launch_directions(field, z0, mult, kind="orthogonal"))
        for d in dirs:
            arc = trace(field, z0 + 1e-5 * d, d, kind="orthogonal",
                        start_tag=("zero", zidx(z0)))
            if arc.points and abs(arc.points[-1] - z_target) < 1e-3:
                return arc
        raise ArithmeticError(f"no orthogonal connector from {z0} to {z_target}")

    def traj_short(z_from, z_to):
        for d in launch_from_zero(field, z_from):
            arc = trace(field, z_from + 1e-5 * d, d, start_tag=("zero", zidx(z_from)))
            if arc.points and abs(arc.points[-1] - z_to) < 1e-3:
                return arc
        raise ArithmeticError(f"no trajectory from {z_from} to {z_to}")

    im = t.imag
    boundary = classify(t, atlas).kind in ("boundary", "corner")
    if boundary:
        # J = [a,c] u [c,b]; alpha0 (inf_pi -> a -> c) + alpha1 (inf_{-pi/3}
        # -> c) - alpha2 (c -> b -> inf_{pi/3})
        return [
            (a0c, orth_tail(a, 3).reversed()), (a0c, traj_short(a, c)),
            (a1c, orth_tail(c, 5, mult=2).reversed()),
            (-a2c, traj_short(c, b)), (-a2c, orth_tail(b, 1)),
        ]
    j_arc = traj_short(a, b)
    if abs(im) < 1e-9:
        # real t: alpha0 (inf_pi -> a, J, b -> c] + alpha1 inf_{-pi/3} -> c
        # - alpha2 c -> inf_{pi/3}
        return [
            (a0c, orth_tail(a, 3).reversed()), (a0c, j_arc),
            (a0c, orth_short(b, c)),
            (a1c, orth_tail(c, 5, mult=2).reversed()),
            (-a2c, orth_tail(c, 1, mult=2)),
        ]
    if im > 0:
        return [
            (a0c, orth_tail(a, 3).reversed()), (a0c, j_arc),
            (a0c, orth_tail(b, 5)),
            (-a2c, orth_tail(c, 5, mult=2).reversed()),
            (-a2c, orth_tail(c, 1, mult=2)),
        ]
    return [
        (a0c, orth_tail(a, 3).reversed()), (a0c, j_arc),
        (a0c, orth_tail(b, 1)),
        (a1c, orth_tail(c, 5, mult=2).reversed()),
        (a1c, orth_tail(c, 1, mult=2)),
    ]
