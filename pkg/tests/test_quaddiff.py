"""Trajectory tracing, critical graphs, U, and equilibrium checks."""

import cmath
import math
from dataclasses import dataclass

import numpy as np
import pytest

from airyp2.quaddiff import (
    AuxiliaryField,
    NearDoubleZeroError,
    PolyQuartic,
    critical_graph,
    equilibrium_check,
    launch_from_zero,
    short_trajectories,
    trace,
    u_function,
)

R = 4 ** (1 / 3)
TREFOIL_ZEROS = (0j, -R + 0j, R * cmath.exp(1j * math.pi / 3),
                 R * cmath.exp(-1j * math.pi / 3))


@dataclass(frozen=True)
class AiryModelField:
    """Q(z) = z: the local model with three trajectories from the origin."""

    @property
    def zeros(self):
        return (0j,)

    @property
    def poles(self):
        return ()

    def value(self, z):
        return z

    def deriv(self, z):
        return 1.0 + 0j

    def traj_asymptotes(self):
        return [(-2 + 2 * k) * math.pi / 3 for k in range(3)]

    def orth_asymptotes(self):
        return [(-1 + 2 * k) * math.pi / 3 for k in range(3)]


def test_airy_model_launch_directions():
    f = AiryModelField()
    dirs = launch_from_zero(f, 0j)
    want = [cmath.exp(1j * math.pi / 3), cmath.exp(1j * math.pi),
            cmath.exp(5j * math.pi / 3)]
    for d, w in zip(dirs, want):
        assert abs(d - w) < 1e-12


def test_launch_rotation_covariance():
    q = PolyQuartic(TREFOIL_ZEROS)
    rot = cmath.exp(0.7j)
    q_rot = PolyQuartic(tuple(rot * z for z in TREFOIL_ZEROS))
    for z, d in zip(q.zeros[1:], launch_from_zero(q, q.zeros[1])):
        pass
    d0 = launch_from_zero(q, q.zeros[1])
    d1 = launch_from_zero(q_rot, rot * q.zeros[1])
    # rotating Q's zeros rotates Q' phase by 3*arg(rot) at the matched zero;
    # the launch triple rotates as a set
    set0 = sorted(cmath.phase(rot * d) % (2 * math.pi / 3) for d in d0)
    set1 = sorted(cmath.phase(d) % (2 * math.pi / 3) for d in d1)
    for a, b in zip(set0, set1):
        assert min(abs(a - b), abs(abs(a - b) - 2 * math.pi / 3)) < 1e-6


def test_near_double_zero_signal():
    c = 0.4 + 0.1j
    q = PolyQuartic((c, c + 1e-12, -1.0 + 0j, 1.5j))
    with pytest.raises(NearDoubleZeroError):
        launch_from_zero(q, c)
    with pytest.raises(NearDoubleZeroError):
        critical_graph(q)


def test_trefoil_short_trajectory():
    q = PolyQuartic(TREFOIL_ZEROS)
    for d in launch_from_zero(q, 0j):
        arc = trace(q, 1e-5 * d, d, start_tag=("zero", 0))
        assert arc.end[0] == "zero"
        assert arc.end[1] in (1, 2, 3)
    # specifically toward -4^{1/3}
    arc = trace(q, -1e-5, -1.0, start_tag=("zero", 0))
    assert arc.end == ("zero", 1)
    assert arc.phase_defect(q.value) <= 1e-3


def test_phase_invariant_on_all_arcs():
    q = PolyQuartic(TREFOIL_ZEROS)
    g = critical_graph(q)
    for arc in g.arcs:
        if len(arc.points) > 4:
            assert arc.phase_defect(q.value) <= 1e-3


def test_trefoil_graph_structure():
    g = critical_graph(PolyQuartic(TREFOIL_ZEROS))
    assert g.validate() == []
    assert g.short_pairs == [(0, 1), (0, 2), (0, 3)]
    assert g.short_graph_shape() == "star"
    assert sorted(g.adjacency[0]) == [0, 2, 4]      # center: unshaded domains
    # outer zeros emit two unbounded arcs each; center emits none
    emitted = {i: 0 for i in range(4)}
    for arc in g.arcs:
        if arc.end[0] == "infinity":
            emitted[arc.start[1]] += 1
    assert emitted == {0: 0, 1: 2, 2: 2, 3: 2}
    assert g.shading == {0: 1, 1: -1, 2: 1, 3: -1, 4: 1, 5: -1}


def test_aux_field_critical_graph():
    aux = AuxiliaryField()
    ends = []
    for k in range(5):
        d = cmath.exp(2j * math.pi * k / 5)
        arc = trace(aux, -1.0 + 1e-5 * d, d, start_tag=("zero", 0),
                    r_out=50.0, max_arclength=300.0, h_max=1.0)
        ends.append(arc.end[0])
    assert ends.count("pole") == 1      # the segment (-1, 0)
    assert ends.count("zero") == 2      # the loop, traced from both sides
    assert ends.count("infinity") == 2  # the vertical arcs


def test_trajectory_orthogonal_duality():
    q = PolyQuartic(TREFOIL_ZEROS)

    @dataclass(frozen=True)
    class NegQ:
        def value(self, z):
            return -q.value(z)

        def deriv(self, z):
            return -q.deriv(z)

        @property
        def zeros(self):
            return q.zeros

        @property
        def poles(self):
            return ()

        def traj_asymptotes(self):
            return q.orth_asymptotes()

        def orth_asymptotes(self):
            return q.traj_asymptotes()

    d = -1.0 + 0j
    a1 = trace(q, 1e-5 * d, d, kind="trajectory", start_tag=("zero", 0))
    a2 = trace(NegQ(), 1e-5 * d, d, kind="orthogonal", start_tag=("zero", 0))
    assert a1.end == a2.end
    pts2 = np.asarray(a2.points)
    for p in a1.points[:: max(1, len(a1.points) // 10)]:
        assert np.min(np.abs(pts2 - p)) <= 1e-6


def test_u_path_independence():
    q = PolyQuartic(TREFOIL_ZEROS)
    shorts = short_trajectories(critical_graph(q).arcs)
    u = u_function(q, shorts)
    from airyp2.quaddiff import _integrate_sqrtq
    z = 2.0 + 1.5j
    direct = u(z)
    # second homotopic path through an explicit waypoint
    val1, _ = _integrate_sqrtq(q, [u.b0, 4.0 + 4.0j, z], u.w0)
    alt = 2.0 * (u.c0 + val1).real
    assert abs(direct - alt) <= 1e-8 * max(1.0, abs(direct))


def test_u_signs_around_support():
    q = PolyQuartic(TREFOIL_ZEROS)
    g = critical_graph(q)
    u = g.u_at
    sh = short_trajectories(g.arcs)[0]
    mid = sh.points[len(sh.points) // 2]
    tang = sh.points[len(sh.points) // 2 + 1] - sh.points[len(sh.points) // 2 - 1]
    nrm = 1j * tang / abs(tang)
    # support arcs border U > 0 on both sides; far tails sit in U < 0
    assert u(mid + 1e-3 * nrm) > 0 and u(mid - 1e-3 * nrm) > 0
    assert u(-6.0 + 0.3j) < 0  # deep in the shaded end domain at ray pi


def test_equilibrium_trefoil():
    q = PolyQuartic(TREFOIL_ZEROS)
    g = critical_graph(q)
    rep = equilibrium_check(q, short_trajectories(g.arcs), g.u_at)
    assert abs(rep["mass"] - 1) <= 1e-6
    assert rep["max_im_density"] <= 1e-7
    assert rep["min_density"] >= 0
    assert rep["max_u_on_support"] <= 1e-7
    assert rep["s_property_mismatch"] <= 1e-5


def test_non_boutroux_fixture_has_strip():
    # planted K != K(t): some pairwise Re-period is nonzero, giving a strip
    # of positive width, and the graph diagnostics flag the topology
    from airyp2.phase import QuarticQ, boutroux_residual

    q = QuarticQ.from_K(0.0, 0.35 + 0.1j)
    ba, bb = boutroux_residual(q)
    assert max(abs(ba), abs(bb)) > 1e-3          # strip width > 0
    g = critical_graph(PolyQuartic(q.zeros))
    assert g.validate() != []
