"""Penner edge lengths and everything computed from them.

Lengths are stored per halfedge (equal on the two halfedges of an edge,
bitwise) and need not satisfy triangle inequalities: they are coordinates
for a decorated hyperbolic structure, and all operations on them (conformal
scaling, the Delaunay predicate, Ptolemy flips) are rational or
trigonometric expressions that remain meaningful for any positive values.

A conformal factor ``u`` per vertex scales lengths as
``l'_ij = l_ij * exp((u_i + u_j)/2)``.  Angles, the Delaunay predicate and
the Newton derivatives all use scaled lengths; flips always update the
*original* lengths so that scaling and flipping commute.

Transient quad faces (created by symmetric flips) are measured through
their stored diagonal: the quad splits into two virtual triangles along
the diagonal, which scales like an ordinary edge between its endpoints.

``make_delaunay`` flips until every interior edge satisfies the Delaunay
condition.  The scan is vectorized over triangle-triangle edges when
running in float64; a scalar path covers quads, other precisions, and the
per-edge helpers used by tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .halfedge import CombinatorialMesh, FlipFrame, apply_flip, plan_flip
from .symmetry import FlipType, ReflectionMap, apply_symmetric_flip, classify_flip

if TYPE_CHECKING:  # pragma: no cover
    import scipy.sparse


class MetricError(Exception):
    """Raised when lengths cannot support the requested computation."""


class FlipBudgetError(Exception):
    """Raised when make_delaunay exceeds its flip budget."""


class RealOps:
    """Scalar hooks used by the metric kernels.

    The default routes through :mod:`math` (float64).  The kernels only
    call these entry points for transcendental steps, so a subclass backed
    by a wider float type can reuse them unchanged; only float64 is
    exercised by the shipped tools.
    """

    pi = math.pi

    @staticmethod
    def exp(x: float) -> float:
        return math.exp(x)

    @staticmethod
    def acos(x: float) -> float:
        return math.acos(x)

    @staticmethod
    def sqrt(x: float) -> float:
        return math.sqrt(x)


REAL64 = RealOps()


@dataclass
class PennerMetric:
    """Per-halfedge lengths plus stored diagonals of transient quad faces.

    ``quad_diag`` is keyed by quad face id.  The stored diagonal connects
    the heads of the second and fourth halfedges of the face cycle; both
    diagonals of an axis quad have the same length, so the choice only
    fixes which virtual triangulation measures the quad.
    """

    lengths: list[float]
    quad_diag: dict[int, float] = field(default_factory=dict)

    def copy(self) -> "PennerMetric":
        return PennerMetric(list(self.lengths), dict(self.quad_diag))

    @classmethod
    def from_edge_lengths(
        cls, mesh: CombinatorialMesh, edge_lengths: dict[int, float]
    ) -> "PennerMetric":
        """Expand a per-edge map (keyed by edge id) to per-halfedge storage."""
        lengths = [0.0] * mesh.n_halfedges()
        for e, val in edge_lengths.items():
            if not val > 0:
                raise MetricError(f"edge {e} has nonpositive length {val}")
            lengths[e] = val
            lengths[mesh.opp[e]] = val
        for e in mesh.edges():
            if lengths[e] == 0.0:
                raise MetricError(f"edge {e} missing from the length map")
        return cls(lengths)

    @classmethod
    def uniform(cls, mesh: CombinatorialMesh, value: float = 1.0) -> "PennerMetric":
        return cls([value] * mesh.n_halfedges())


def scaled_length(
    mesh: CombinatorialMesh,
    metric: PennerMetric,
    u: "list[float] | np.ndarray",
    h: int,
    ops: RealOps = REAL64,
) -> float:
    """Length of the edge of ``h`` under the conformal factor ``u``."""
    i = mesh.to[mesh.opp[h]]
    j = mesh.to[h]
    return metric.lengths[h] * ops.exp(0.5 * (u[i] + u[j]))


def _scaled_diag(
    mesh: CombinatorialMesh,
    metric: PennerMetric,
    u: "list[float] | np.ndarray",
    f: int,
    ops: RealOps = REAL64,
) -> float:
    hs = mesh.face_halfedges(f)
    a = mesh.to[hs[1]]
    b = mesh.to[hs[3]]
    return metric.quad_diag[f] * ops.exp(0.5 * (u[a] + u[b]))


def corner_angle(l_opp: float, l_a: float, l_b: float, ops: RealOps = REAL64) -> float:
    """Angle between sides ``l_a`` and ``l_b`` opposite ``l_opp``.

    The cosine is clamped to [-1, 1]: lengths violating the triangle
    inequality yield a flat angle of 0 or pi instead of a domain error.
    """
    c = (l_a * l_a + l_b * l_b - l_opp * l_opp) / (2.0 * l_a * l_b)
    if c > 1.0:
        c = 1.0
    elif c < -1.0:
        c = -1.0
    return ops.acos(c)


def vertex_angle_sums(
    mesh: CombinatorialMesh,
    metric: PennerMetric,
    u: "list[float] | np.ndarray",
    ops: RealOps = REAL64,
) -> list[float]:
    """Total scaled angle around each vertex; quads count via their
    virtual triangulation along the stored diagonal."""
    theta = [0.0] * mesh.n_vertices
    sl = metric.lengths
    to = mesh.to
    opp = mesh.opp

    cache: dict[int, float] = {}

    def lp(h: int) -> float:
        v = cache.get(h)
        if v is None:
            v = sl[h] * ops.exp(0.5 * (u[to[h]] + u[to[opp[h]]]))
            cache[h] = v
        return v

    for f in mesh.faces():
        hs = mesh.face_halfedges(f)
        if len(hs) == 3:
            h0, h1, h2 = hs
            a, b, c = lp(h0), lp(h1), lp(h2)
            theta[to[h0]] += corner_angle(c, a, b, ops)
            theta[to[h1]] += corner_angle(a, b, c, ops)
            theta[to[h2]] += corner_angle(b, c, a, ops)
        else:
            q0, q1, q2, q3 = hs
            l0, l1, l2, l3 = lp(q0), lp(q1), lp(q2), lp(q3)
            d = _scaled_diag(mesh, metric, u, f, ops)
            theta[to[q3]] += corner_angle(l1, l0, d, ops)
            theta[to[q0]] += corner_angle(d, l0, l1, ops)
            theta[to[q1]] += corner_angle(l0, l1, d, ops)
            theta[to[q1]] += corner_angle(l3, l2, d, ops)
            theta[to[q2]] += corner_angle(d, l2, l3, ops)
            theta[to[q3]] += corner_angle(l2, l3, d, ops)
    return theta


# -- Delaunay predicate -------------------------------------------------------


def _side_term(
    mesh: CombinatorialMesh,
    metric: PennerMetric,
    u: "list[float] | np.ndarray",
    h: int,
    ops: RealOps,
) -> float:
    """One side's contribution to the Delaunay value of its edge.

    For a triangle side this equals twice the cosine of the opposite
    corner; for a quad side the opposite corner lives in the virtual
    triangle cut off by the stored diagonal.
    """

    def lp(x: int) -> float:
        return metric.lengths[x] * ops.exp(
            0.5 * (u[mesh.to[x]] + u[mesh.to[mesh.opp[x]]])
        )

    c = lp(h)
    if not mesh.in_quad[h]:
        a = lp(mesh.next_he[h])
        b = lp(mesh.next_he[mesh.next_he[h]])
        return (a * a + b * b - c * c) / (a * b)
    f = mesh.he_face[h]
    hs = mesh.face_halfedges(f)
    idx = hs.index(h)
    partner = lp(hs[idx ^ 1])
    d = _scaled_diag(mesh, metric, u, f, ops)
    return (partner * partner + d * d - c * c) / (partner * d)


def delaunay_value(
    mesh: CombinatorialMesh,
    metric: PennerMetric,
    u: "list[float] | np.ndarray",
    e: int,
    ops: RealOps = REAL64,
) -> float:
    """Sum of the two side terms of edge ``e``; nonnegative means Delaunay."""
    return _side_term(mesh, metric, u, e, ops) + _side_term(
        mesh, metric, u, mesh.opp[e], ops
    )


def is_delaunay(
    mesh: CombinatorialMesh,
    metric: PennerMetric,
    u: "list[float] | np.ndarray",
    e: int,
    refl: ReflectionMap | None = None,
    eps_flip: float = 1e-12,
    ops: RealOps = REAL64,
) -> bool:
    """Delaunay test with a guard band: values down to ``-eps_flip`` pass.

    With a reflection map, configurations whose symmetry forces the
    condition short-circuit to true without evaluating lengths.
    """
    if refl is not None:
        kind, _ = classify_flip(mesh, refl, e)
        if kind is FlipType.ALWAYS_DELAUNAY:
            return True
    return delaunay_value(mesh, metric, u, e, ops) >= -eps_flip


# -- flips --------------------------------------------------------------------


def ptolemy_flip_length(mesh: CombinatorialMesh, metric: PennerMetric, h: int) -> float:
    """Original-scale length the edge of ``h`` acquires when flipped."""
    fr = plan_flip(mesh, h)
    sl = metric.lengths
    return (sl[fr.h1] * sl[fr.h4] + sl[fr.h2] * sl[fr.h5]) / sl[fr.h0]


def flip_edge(
    mesh: CombinatorialMesh, metric: PennerMetric, h: int
) -> tuple[FlipFrame, float]:
    """Plain (asymmetric) flip with the Ptolemy length update."""
    sl = metric.lengths
    fr = plan_flip(mesh, h)
    lnew = (sl[fr.h1] * sl[fr.h4] + sl[fr.h2] * sl[fr.h5]) / sl[fr.h0]
    apply_flip(mesh, fr)
    sl[fr.h0] = lnew
    sl[fr.h3] = lnew
    return fr, lnew


@dataclass
class FlipLog:
    """Counts of flips performed by one make_delaunay call, by surgery type.

    ``single`` counts plain flips on meshes without a reflection map;
    symmetric surgeries count once each regardless of how many elementary
    flips they bundle.
    """

    total: int = 0
    single: int = 0
    paired: int = 0
    axis: int = 0
    tri_quad: int = 0
    quad_quad: int = 0

    def add(self, kind: FlipType | None) -> None:
        self.total += 1
        if kind is None:
            self.single += 1
        elif kind is FlipType.PAIRED:
            self.paired += 1
        elif kind is FlipType.AXIS:
            self.axis += 1
        elif kind is FlipType.TRI_QUAD:
            self.tri_quad += 1
        elif kind is FlipType.QUAD_QUAD:
            self.quad_quad += 1

    def merge(self, other: "FlipLog") -> None:
        self.total += other.total
        self.single += other.single
        self.paired += other.paired
        self.axis += other.axis
        self.tri_quad += other.tri_quad
        self.quad_quad += other.quad_quad


def _scan_violations_scalar(
    mesh: CombinatorialMesh,
    metric: PennerMetric,
    u: "list[float] | np.ndarray",
    refl: ReflectionMap | None,
    eps_flip: float,
    ops: RealOps,
) -> list[int]:
    out = []
    for e in mesh.edges():
        if mesh.is_boundary_edge(e):
            continue
        if refl is not None:
            kind, _ = classify_flip(mesh, refl, e)
            if kind is FlipType.ALWAYS_DELAUNAY:
                continue
        if delaunay_value(mesh, metric, u, e, ops) < -eps_flip:
            out.append(e)
    return out


def _scan_violations_vectorized(
    mesh: CombinatorialMesh,
    metric: PennerMetric,
    u: "list[float] | np.ndarray",
    refl: ReflectionMap | None,
    eps_flip: float,
) -> list[int]:
    n = mesh.n_halfedges()
    idx = np.arange(n)
    nxt = np.asarray(mesh.next_he)
    opp = np.asarray(mesh.opp)
    to = np.asarray(mesh.to)
    parked = np.asarray(mesh.parked, dtype=bool)
    in_quad = np.asarray(mesh.in_quad, dtype=bool)
    uu = np.asarray(u, dtype=float)
    active = ~parked

    lp = np.ones(n)
    heads = np.where(active, to, 0)
    tails = np.where(active, to[opp], 0)
    lp[active] = np.asarray(metric.lengths)[active] * np.exp(
        0.5 * (uu[heads[active]] + uu[tails[active]])
    )

    # Triangle side terms for every active non-quad halfedge.
    tri_side = active & ~in_quad
    a = lp[nxt]
    b = lp[nxt[nxt]]
    with np.errstate(invalid="ignore", divide="ignore"):
        term = (a * a + b * b - lp * lp) / (a * b)

    he_face = np.asarray(mesh.he_face)
    canonical = active & (idx < opp)
    tri_edge = canonical & tri_side & tri_side[opp]
    quad_edge = canonical & (in_quad | in_quad[opp])

    if mesh.boundary_faces:
        bnd = np.zeros(n, dtype=bool)
        for f in mesh.boundary_faces:
            bnd |= he_face == f
        interior = ~(bnd | bnd[opp])
        tri_edge &= interior
        quad_edge &= interior

    if refl is not None:
        r = np.asarray(refl.r)
        fixed = active & (r == idx)
        face_is_axis = np.zeros(n, dtype=bool)
        face_is_axis[np.unique(he_face[fixed])] = True
        axis_h = face_is_axis[he_face]
        skip = (he_face == he_face[opp]) | (axis_h & axis_h[opp] & (r != idx))
        tri_edge &= ~skip
        quad_edge &= ~skip

    value = term + term[opp]
    bad = tri_edge & (value < -eps_flip)
    out = list(np.flatnonzero(bad))

    for e in np.flatnonzero(quad_edge):
        e = int(e)
        if refl is not None:
            kind, _ = classify_flip(mesh, refl, e)
            if kind is FlipType.ALWAYS_DELAUNAY:
                continue
        if delaunay_value(mesh, metric, u, e) < -eps_flip:
            out.append(e)
    out.sort()
    return [int(e) for e in out]


def make_delaunay(
    mesh: CombinatorialMesh,
    metric: PennerMetric,
    u: "list[float] | np.ndarray",
    refl: ReflectionMap | None = None,
    eps_flip: float = 1e-12,
    flip_budget_factor: float = 100.0,
    ops: RealOps = REAL64,
) -> FlipLog:
    """Flip edges until the scaled metric is Delaunay; returns flip counts.

    Works in place.  With ``refl`` every flip is a symmetric surgery and
    the reflection structure is maintained; without it flips are plain
    triangle-triangle flips.  A full scan seeds a stack; after each flip
    the edges of the rebuilt faces are re-examined, and the scan repeats
    until clean.  Raises :class:`FlipBudgetError` after
    ``flip_budget_factor * n_edges`` flips.
    """
    log = FlipLog()
    budget = flip_budget_factor * mesh.n_edges()
    while True:
        if ops is REAL64:
            violations = _scan_violations_vectorized(mesh, metric, u, refl, eps_flip)
        else:
            violations = _scan_violations_scalar(mesh, metric, u, refl, eps_flip, ops)
        if not violations:
            return log
        stack = sorted(violations, reverse=True)
        while stack:
            h = stack.pop()
            if mesh.parked[h] or mesh.is_boundary_edge(h):
                continue
            if is_delaunay(mesh, metric, u, h, refl, eps_flip, ops):
                continue
            if log.total >= budget:
                raise FlipBudgetError(
                    f"exceeded {budget:.0f} flips without reaching Delaunay"
                )
            if refl is None:
                fr, _ = flip_edge(mesh, metric, h)
                log.add(None)
                for x in (fr.h1, fr.h2, fr.h4, fr.h5):
                    stack.append(mesh.edge_of(x))
            else:
                rec = apply_symmetric_flip(mesh, metric, refl, h)
                log.add(rec.kind)
                for f in rec.faces:
                    for x in mesh.face_halfedges(f):
                        stack.append(mesh.edge_of(x))


# -- Newton derivatives -------------------------------------------------------


def _corner_cots(la: float, lb: float, lc: float) -> tuple[float, float, float]:
    """Cotangents of the angles opposite sides (la, lb, lc)."""
    out = []
    for l_opp, l1, l2 in ((la, lb, lc), (lb, lc, la), (lc, la, lb)):
        c = (l1 * l1 + l2 * l2 - l_opp * l_opp) / (2.0 * l1 * l2)
        if c > 1.0:
            c = 1.0
        elif c < -1.0:
            c = -1.0
        s = math.sqrt(max(0.0, 1.0 - c * c))
        if s == 0.0:
            raise MetricError("degenerate triangle while assembling the Hessian")
        out.append(c / s)
    return out[0], out[1], out[2]


def gradient(
    mesh: CombinatorialMesh,
    metric: PennerMetric,
    u: "list[float] | np.ndarray",
    theta_hat: "list[float] | np.ndarray",
    ops: RealOps = REAL64,
) -> np.ndarray:
    """Residual target minus current angle sums (the Newton right-hand side)."""
    theta = vertex_angle_sums(mesh, metric, u, ops)
    return np.asarray(theta_hat, dtype=float) - np.asarray(theta)


def hessian(
    mesh: CombinatorialMesh,
    metric: PennerMetric,
    u: "list[float] | np.ndarray",
    ops: RealOps = REAL64,
) -> "scipy.sparse.csr_matrix":
    """Positive semidefinite cotangent matrix of the scaled metric.

    Row i holds the negated derivatives of the angle sum at vertex i with
    respect to u: off-diagonal entries are -(cot a + cot b)/2 over the
    corners opposite the edge ij, diagonals make rows sum to zero.  Quads
    are assembled through their virtual triangles, consistent with how
    ``vertex_angle_sums`` measures them.
    """
    import scipy.sparse

    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []

    def lp(h: int) -> float:
        return metric.lengths[h] * ops.exp(
            0.5 * (u[mesh.to[h]] + u[mesh.to[mesh.opp[h]]])
        )

    def add_triangle(va: int, vb: int, vc: int, lab: float, lbc: float, lca: float):
        cot_a, cot_b, cot_c = _corner_cots(lbc, lca, lab)
        # Angle at va sits opposite side bc, etc.  Each angle contributes
        # +cot/2 to the two off-diagonal entries of its row and balances
        # the diagonal, then the whole matrix is negated.
        for v_self, v1, v2, c1, c2 in (
            (va, vb, vc, cot_c, cot_b),
            (vb, vc, va, cot_a, cot_c),
            (vc, va, vb, cot_b, cot_a),
        ):
            rows.extend((v_self, v_self, v_self))
            cols.extend((v1, v2, v_self))
            vals.extend((-0.5 * c1, -0.5 * c2, 0.5 * (c1 + c2)))

    for f in mesh.faces():
        hs = mesh.face_halfedges(f)
        if len(hs) == 3:
            h0, h1, h2 = hs
            add_triangle(
                mesh.to[h2], mesh.to[h0], mesh.to[h1], lp(h0), lp(h1), lp(h2)
            )
        else:
            q0, q1, q2, q3 = hs
            d = _scaled_diag(mesh, metric, u, f, ops)
            add_triangle(mesh.to[q3], mesh.to[q0], mesh.to[q1], lp(q0), lp(q1), d)
            add_triangle(mesh.to[q1], mesh.to[q2], mesh.to[q3], lp(q2), lp(q3), d)

    n = mesh.n_vertices
    return scipy.sparse.csr_matrix(
        scipy.sparse.coo_matrix((vals, (rows, cols)), shape=(n, n))
    )
