"""Command-line surface.

Subcommands:
    poles         pole/zero map of q_n in a window -> CSV + SVG scatter with
                  the rescaled two-cut/trefoil boundary overlay
    phase         raster classification of the t-plane -> CSV + boundary
                  JSON + SVG
    trajectories  critical graph and preferred contour at a given t -> JSON + SVG
    bridge        residuals of the recurrence/Painleve identities on a t-grid -> CSV
    verify        run the built-in invariant suite; nonzero exit on failure

Exit codes: 0 ok, 2 invalid configuration, 3 numerical failure (a diagnostic
file is written next to the requested output).
"""

from __future__ import annotations

import argparse
import cmath
import csv
import json
import math
import os
import sys
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

from . import airy
from .airy import SeedWeights, airy_pair
from .cubicmodel import ContourWeights, recurrence_coeffs, z_from_t
from .phase import (
    RegionAtlas,
    T_CRITICAL,
    boutroux_solve,
    build_atlas,
    classify,
    preferred_contour,
    support_system,
)
from .taufun import painleve_triple, residuals, tau
from .zerofind import Window, pole_map

VERSION = "0.1.0"


@dataclass
class RunConfig:
    """Parsed invocation; round-trips to/from JSON identically."""

    command: str
    n: int = 3
    lam: str = "inf"                 # two reals "a,b" or the token "inf"
    bigN: float = 1.0
    t: tuple = (0.0, 0.0)
    window: tuple = (-8.0, -8.0, 8.0, 8.0)
    resolution: float = 0.02
    grid: int = 200
    extent: float = 4.2
    precision: str = "binary64"      # or "extended"
    tol: float = 1e-9
    seed: int = 0
    out_csv: str | None = None
    out_json: str | None = None
    out_svg: str | None = None

    def to_json(self) -> str:
        d = asdict(self)
        d["t"] = list(self.t)
        d["window"] = list(self.window)
        return json.dumps(d, sort_keys=True, indent=1)

    @staticmethod
    def from_json(text: str) -> "RunConfig":
        d = json.loads(text)
        d["t"] = tuple(d.get("t", (0.0, 0.0)))
        d["window"] = tuple(d.get("window", (-8.0, -8.0, 8.0, 8.0)))
        return RunConfig(**d)

    def lam_value(self):
        if isinstance(self.lam, str) and self.lam.lower() == "inf":
            return None
        if isinstance(self.lam, str):
            parts = [float(p) for p in self.lam.replace(",", " ").split()]
            return complex(parts[0], parts[1] if len(parts) > 1 else 0.0)
        return complex(self.lam)


# ---------------------------------------------------------------------------
# SVG emission (presentation only; deterministic up to the version comment)
# ---------------------------------------------------------------------------

STYLE = {
    "pole_plus": "#c82020",
    "pole_minus": "#e07030",
    "zero": "#2050c8",
    "boundary": "#101010",
    "trajectory": "#105010",
    "orthogonal": "#888888",
    "chain": "#b01080",
}


class SvgCanvas:
    """Equal-aspect complex-plane canvas, 640 px wide."""

    def __init__(self, lo: complex, hi: complex, px: int = 640):
        self.lo, self.hi = lo, hi
        self.px = px
        self.scale = px / (hi.real - lo.real)
        self.py = int(round((hi.imag - lo.imag) * self.scale))
        self.parts = []

    def xy(self, z: complex):
        return ((z.real - self.lo.real) * self.scale,
                (self.hi.imag - z.imag) * self.scale)

    def polyline(self, pts, color, width=1.2):
        coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in (self.xy(z) for z in pts))
        self.parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" '
            f'stroke-width="{width}"/>')

    def dot(self, z, color, r=2.6):
        x, y = self.xy(z)
        self.parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r}" fill="{color}"/>')

    def rect(self, z, color, half=0.45):
        x, y = self.xy(z)
        s = half * self.scale
        self.parts.append(
            f'<rect x="{x - s:.2f}" y="{y - s:.2f}" width="{2 * s:.2f}" '
            f'height="{2 * s:.2f}" fill="{color}"/>')

    def render(self) -> str:
        body = "\n".join(self.parts)
        return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.px}" '
                f'height="{self.py}" viewBox="0 0 {self.px} {self.py}">\n'
                f"<!-- airyp2 {VERSION} -->\n"
                f'<rect width="100%" height="100%" fill="white"/>\n'
                f"{body}\n</svg>\n")


def _write(path: str, text: str):
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_poles(cfg: RunConfig) -> int:
    weights = SeedWeights.from_lambda(cfg.lam_value())
    wl = cfg.window
    win = Window(complex(wl[0], wl[1]), complex(wl[2], wl[3]))
    pm = pole_map(cfg.n, weights, win, tol=cfg.tol)
    rows = ([("pole+", z) for z in pm.poles_plus]
            + [("pole-", z) for z in pm.poles_minus]
            + [("zero", z) for z in pm.zeros_q])
    rows.sort(key=lambda kv: (kv[1].real, kv[1].imag, kv[0]))
    if cfg.out_csv:
        with open(cfg.out_csv, "w", newline="", encoding="utf-8") as f:
            wr = csv.writer(f)
            wr.writerow(["re", "im", "kind"])
            for kind, z in rows:
                wr.writerow([_fmt(z.real), _fmt(z.imag), kind])
    if cfg.out_svg:
        canvas = SvgCanvas(win.lo, win.hi)
        scale = -((math.sqrt(2.0) * cfg.n) ** (2.0 / 3.0))
        atlas = build_atlas(cfg.resolution)
        for tau in ("0", "-i", "i"):
            ent = atlas.tongues[tau]
            for poly in [ent["front"], *ent["flanks"]]:
                pts = [scale * t for t in poly if abs(scale * t) < 2.2 * abs(win.hi)]
                if len(pts) > 1:
                    canvas.polyline(pts, STYLE["boundary"], 1.0)
        for kind, z in rows:
            canvas.dot(z, STYLE["pole_plus" if kind == "pole+" else
                                "pole_minus" if kind == "pole-" else "zero"])
        _write(cfg.out_svg, canvas.render())
    print(f"poles: {len(pm.poles_plus)}+{len(pm.poles_minus)} poles, "
          f"{len(pm.zeros_q)} zeros, unresolved={len(pm.unresolved)}")
    return 0 if not pm.unresolved else 3


def cmd_phase(cfg: RunConfig) -> int:
    atlas = build_atlas(cfg.resolution)
    n = cfg.grid
    ext = cfg.extent
    coords = [(-ext + 2 * ext * (k + 0.5) / n) for k in range(n)]

    def classify_row(i):
        y = coords[i]
        return [(coords[j], y, str(classify(complex(coords[j], y), atlas)))
                for j in range(n)]

    threads = int(os.environ.get("AIRYP2_THREADS", "1"))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            rows = list(ex.map(classify_row, range(n)))
    else:
        rows = [classify_row(i) for i in range(n)]
    if cfg.out_csv:
        with open(cfg.out_csv, "w", newline="", encoding="utf-8") as f:
            wr = csv.writer(f)
            wr.writerow(["t_re", "t_im", "label"])
            for row in rows:
                for x, y, lab in row:
                    wr.writerow([_fmt(x), _fmt(y), lab])
    if cfg.out_json:
        _write(cfg.out_json, atlas.to_json())
    if cfg.out_svg:
        canvas = SvgCanvas(complex(-ext, -ext), complex(ext, ext))
        colors = {"one-cut(-i)": "#d8e8ff", "one-cut(0)": "#ffe8d8",
                  "one-cut(i)": "#e8ffd8", "two-cut(0)": "#c08040",
                  "two-cut(-i)": "#4080c0", "two-cut(i)": "#40c080",
                  "trefoil": "#c040c0", "boundary": "#000000", "corner": "#000000"}
        for row in rows:
            for x, y, lab in row:
                canvas.rect(complex(x, y), colors.get(lab, "#ffffff"),
                            half=ext / n)
        for tau in ("0", "-i", "i"):
            ent = atlas.tongues[tau]
            for poly in [ent["front"], *ent["flanks"]]:
                canvas.polyline([z for z in poly if abs(z) < 1.6 * ext],
                                STYLE["boundary"], 1.1)
        for c in atlas.corners:
            canvas.dot(c, "#000000", r=3.2)
        _write(cfg.out_svg, canvas.render())
    print(f"phase: {n}x{n} grid classified; corners at |t| = {T_CRITICAL:.6f}")
    return 0


def cmd_trajectories(cfg: RunConfig) -> int:
    atlas = build_atlas(cfg.resolution)
    t = complex(cfg.t[0], cfg.t[1])
    weights = ContourWeights.from_lambda(cfg.lam_value())
    label = classify(t, atlas)
    sysm = support_system(t, atlas)
    chain = preferred_contour(t, weights, atlas)
    if cfg.out_json:
        def ser_arc(arc):
            return {"kind": arc.kind,
                    "start": list(arc.start), "end": list(arc.end),
                    "points": [[p.real, p.imag] for p in arc.points]}
        data = {
            "graph_version": 1,
            "t": [t.real, t.imag],
            "label": str(label),
            "zeros": [[z.real, z.imag] for z in sysm.q.zeros],
            "K": [sysm.q.bigK.real, sysm.q.bigK.imag],
            "support": [ser_arc(a) for a in sysm.support],
            "chain": [{"coefficient": [c.real, c.imag], "arc": ser_arc(a)}
                      for c, a in chain],
        }
        if sysm.graph is not None:
            data["arcs"] = [ser_arc(a) for a in sysm.graph.arcs]
            data["adjacency"] = [sorted(a) for a in sysm.graph.adjacency]
            data["shading"] = {str(k): v for k, v in sysm.graph.shading.items()}
        _write(cfg.out_json, json.dumps(data, sort_keys=True))
    if cfg.out_svg:
        ext = 1.5 + max(abs(z) for z in sysm.q.zeros)
        canvas = SvgCanvas(complex(-ext, -ext), complex(ext, ext))
        if sysm.graph is not None:
            for arc in sysm.graph.arcs:
                canvas.polyline(arc.points, STYLE["trajectory"], 1.0)
            for arc in sysm.graph.orth_arcs:
                canvas.polyline(arc.points, STYLE["orthogonal"], 0.6)
        for arc in sysm.support:
            canvas.polyline(arc.points, STYLE["trajectory"], 2.2)
        for _, arc in chain:
            canvas.polyline(arc.points, STYLE["chain"], 1.4)
        for z in sysm.q.zeros:
            canvas.dot(z, "#000000", r=3.0)
        _write(cfg.out_svg, canvas.render())
    print(f"trajectories: t={t} label={label} zeros={len(set(sysm.q.zeros))} "
          f"chain pieces={len(chain)}")
    return 0


def cmd_bridge(cfg: RunConfig) -> int:
    lam = cfg.lam_value()
    cw = ContourWeights.from_lambda(lam)
    sw = SeedWeights.from_lambda(lam)
    n = max(2, cfg.grid)
    ext = cfg.extent
    rows = []
    worst = 0.0
    for i in range(n):
        for j in range(n):
            t = complex(-ext + 2 * ext * (i + 0.5) / n,
                        -ext + 2 * ext * (j + 0.5) / n)
            z = z_from_t(t, cfg.bigN)
            try:
                beta, _, _ = recurrence_coeffs(cfg.n - 1, t, cfg.bigN, cw)
                _, gamma2, p_sub = recurrence_coeffs(cfg.n, t, cfg.bigN, cw)
                tr = painleve_triple(cfg.n, z, sw)
            except ArithmeticError:
                continue
            s = (2.0 / cfg.bigN) ** (1.0 / 3.0)
            res = (abs(beta + s * tr.q), abs(gamma2 + 0.5 * s * s * tr.p),
                   abs(p_sub + s * tr.sigma))
            worst = max(worst, *res)
            rows.append((t, *res))
    if cfg.out_csv:
        with open(cfg.out_csv, "w", newline="", encoding="utf-8") as f:
            wr = csv.writer(f)
            wr.writerow(["t_re", "t_im", "res_beta", "res_gamma2", "res_psub"])
            for t, r1, r2, r3 in rows:
                wr.writerow([_fmt(t.real), _fmt(t.imag), _fmt(r1), _fmt(r2), _fmt(r3)])
    print(f"bridge: n={cfg.n} N={cfg.bigN} worst residual {worst:.3e} over {len(rows)} points")
    return 0 if worst < 1e-7 else 3


def cmd_verify(cfg: RunConfig) -> int:
    """Built-in invariant subset; the full suite is `pytest` in the repo."""
    import numpy as np

    failures = []

    def check(name, ok):
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
        if not ok:
            failures.append(name)

    rng = np.random.default_rng(7)
    pts = [complex(a, b) for a, b in rng.uniform(-5, 5, (40, 2))]
    worst = 0.0
    for w in pts:
        ai, aip, bi, bip = airy_pair(w)
        wr = ai * bip - aip * bi
        worst = max(worst, abs(wr - 1 / math.pi)
                    / max(1 / math.pi, abs(ai * bip) + abs(aip * bi)))
    check("airy wronskian", worst <= 1e-10)

    sw = SeedWeights.from_lambda(1 + 1j)
    worst = 0.0
    for w in pts[:20]:
        tr = painleve_triple(1, w, sw)
        worst = max(worst, abs(tr.dq - tr.q**2 - w / 2))
    check("riccati seed", worst <= 1e-11)

    worst = 0.0
    for w in pts[:15]:
        te = tau(3, w, sw, derivatives=2)
        lhs = te.value * te.dvals[1] - te.dvals[0] * te.dvals[0]
        rhs = tau(4, w, sw, derivatives=0).value * tau(2, w, sw, derivatives=0).value
        sc = max(abs(lhs.to_complex()), abs(rhs.to_complex()), 1e-300)
        worst = max(worst, abs((lhs - rhs).to_complex()) / sc)
    check("toda identity", worst <= 1e-8)

    cw = ContourWeights.from_lambda(1 + 1j)
    worst = 0.0
    for t in (0.3 + 0.2j, -0.4 + 0.1j):
        z = z_from_t(t, 2.0)
        beta, _, _ = recurrence_coeffs(2, t, 2.0, cw)
        tr = painleve_triple(3, z, sw)
        worst = max(worst, abs(beta + (2 / 2.0) ** (1 / 3) * tr.q))
    check("recurrence bridge", worst <= 1e-7)

    atlas = build_atlas(cfg.resolution)
    corner_err = max(min(abs(c - e) for e in atlas.corners)
                     for ent in atlas.tongues.values() for c in ent["corners"])
    check("atlas corners", corner_err <= 1e-6)

    res = boutroux_solve(0.0, 0.05 + 0.02j)
    check("boutroux K(0)", abs(res.k) <= 1e-8 and all(d < 0 for d in res.jacobian_dets))

    sysm = support_system(0.0005 + 0.0005j, atlas)
    check("trefoil graph", sysm.graph is not None and not sysm.graph.validate())
    return 0 if not failures else 3


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="airyp2", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--config", help="JSON file with the same keys as the flags")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--lambda", dest="lam", default=None,
                        help='seed parameter: "a,b" or "inf"')
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--resolution", type=float, default=None)
        sp.add_argument("--tol", type=float, default=None)
        sp.add_argument("--precision", choices=["binary64", "extended"], default=None)
        sp.add_argument("--out-csv", default=None)
        sp.add_argument("--out-json", default=None)
        sp.add_argument("--out-svg", default=None)

    sp = sub.add_parser("poles", help="pole/zero map of q_n in a window")
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--window", nargs=4, type=float, default=None,
                    metavar=("RE_LO", "IM_LO", "RE_HI", "IM_HI"))
    common(sp)

    sp = sub.add_parser("phase", help="classify a t-plane raster")
    sp.add_argument("--grid", type=int, default=None)
    sp.add_argument("--extent", type=float, default=None)
    common(sp)

    sp = sub.add_parser("trajectories", help="critical graph and contour at t")
    sp.add_argument("--t", nargs=2, type=float, default=None, metavar=("RE", "IM"))
    common(sp)

    sp = sub.add_parser("bridge", help="identity residual table over a t-grid")
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--bigN", type=float, default=None)
    sp.add_argument("--grid", type=int, default=None)
    sp.add_argument("--extent", type=float, default=None)
    common(sp)

    sp = sub.add_parser("verify", help="run the built-in invariant suite")
    common(sp)
    return p


def config_from_args(argv) -> RunConfig:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(command=args.command)
    if args.config:
        with open(args.config, encoding="utf-8") as f:
            cfg = RunConfig.from_json(f.read())
        cfg.command = args.command
    for name in ("n", "lam", "bigN", "t", "window", "resolution", "grid",
                 "extent", "precision", "tol", "seed", "out_csv", "out_json",
                 "out_svg"):
        val = getattr(args, name, None)
        if val is not None:
            if name in ("t", "window"):
                val = tuple(val)
            setattr(cfg, name, val)
    return cfg


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = config_from_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    handlers = {"poles": cmd_poles, "phase": cmd_phase,
                "trajectories": cmd_trajectories, "bridge": cmd_bridge,
                "verify": cmd_verify}
    try:
        return handlers[cfg.command](cfg)
    except Exception:
        diag = (cfg.out_csv or cfg.out_json or cfg.out_svg or "airyp2") + ".diag.json"
        _write(diag, json.dumps({"config": json.loads(cfg.to_json()),
                                 "traceback": traceback.format_exc()}, indent=1))
        print(f"numerical failure; diagnostic written to {diag}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
