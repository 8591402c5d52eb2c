"""Doubling a bounded mesh across its boundary, and undoing it.

A mesh with boundary is turned into a closed symmetric mesh by gluing a
mirror image along the boundary.  Interior halfedges are duplicated (copy 2
reverses orientation, so its face walk is the reversed source walk);
boundary edges become axis-parallel edges joining the two sheets; boundary
vertices become axis vertices shared by both sheets.  The reflection simply
exchanges the two slots of every halfedge pair, and mirrored edges reuse
the same length values, so the initial state is exactly symmetric.

Target angles transfer as curvatures: an interior vertex with target
curvature k keeps theta_hat = 2*pi - k on both of its copies, while a
boundary vertex with target geodesic curvature k gets the doubled budget
theta_hat = 2*pi - 2*k, since its two half-disks merge into one disk.

``restrict_to_single_cover`` maps a converged symmetric metric back to a
bounded mesh: copy-1 faces are kept whole, and every axis face is cut along
the symmetry axis through the midpoints of its crossing edges.  The cut
produces concrete Euclidean lengths (the scaled metric of a Delaunay state
satisfies the triangle inequality), so the output carries scaled lengths
and needs no conformal factor of its own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .halfedge import (
    CombinatorialMesh,
    MeshError,
    build_from_face_edge_lists,
    validate,
)
from .metric import MetricError, PennerMetric, RealOps, REAL64
from .symmetry import ReflectionMap, SymmetryError, validate_symmetry


@dataclass
class TargetAngles:
    """Per-vertex target angle sums for a closed mesh.

    Solvable targets must exhaust the total angle of all faces:
    sum(theta_hat) equals pi * sum(deg f - 2) over faces.  ``residual``
    measures the violation of that balance.
    """

    theta_hat: list[float]

    def residual(self, mesh: CombinatorialMesh) -> float:
        want = math.pi * sum(mesh.degree(f) - 2 for f in mesh.faces())
        return math.fsum(self.theta_hat) - want


@dataclass
class DoubleCover:
    """A closed symmetric mesh built from a bounded one.

    ``origin`` reports, for a halfedge index of the construction state,
    which sheet it lies on and which source halfedge it duplicates; flips
    reuse slots, so the mapping describes construction-time identity only.
    Vertices 0..n_source_vertices-1 keep their source ids; mirrored
    interior vertices follow.
    """

    mesh: CombinatorialMesh
    refl: ReflectionMap
    n_source_halfedges: int
    n_source_vertices: int

    def origin(self, h: int) -> tuple[int, int]:
        if h < self.n_source_halfedges:
            return (1, h)
        return (2, h - self.n_source_halfedges)


def build_double_cover(
    mesh: CombinatorialMesh,
    metric: PennerMetric,
    kappa_interior: "list[float]",
    kappa_boundary: "list[float]",
) -> tuple[DoubleCover, PennerMetric, TargetAngles]:
    """Glue a mirror copy of ``mesh`` along its boundary.

    ``kappa_interior[v]`` is the target cone curvature at interior vertex
    ``v``; ``kappa_boundary[v]`` the target geodesic curvature at boundary
    vertex ``v``.  Entries at vertices of the other kind are ignored.
    Returns the cover, its (mirrored) metric, and per-vertex target angles.
    """
    if not mesh.boundary_faces:
        raise MeshError("input mesh has no boundary; nothing to double")

    src = [h for h in range(mesh.n_halfedges()) if not mesh.is_boundary_halfedge(h)]
    pos = {h: i for i, h in enumerate(src)}
    n_int = len(src)

    boundary_v = {
        mesh.to[h] for h in range(mesh.n_halfedges()) if mesh.is_boundary_halfedge(h)
    }
    v0 = mesh.n_vertices
    interior_vs = [v for v in range(v0) if v not in boundary_v]
    n_cover_v = v0 + len(interior_vs)
    vrefl = list(range(n_cover_v))
    for rank, v in enumerate(interior_vs):
        vrefl[v] = v0 + rank
        vrefl[v0 + rank] = v

    next_he = [-1] * (2 * n_int)
    opp = [-1] * (2 * n_int)
    to = [-1] * (2 * n_int)
    lengths = [0.0] * (2 * n_int)
    for i, h in enumerate(src):
        j = i + n_int
        next_he[i] = pos[mesh.next_he[h]]
        next_he[j] = pos[mesh.prev(h)] + n_int
        o = mesh.opp[h]
        if mesh.is_boundary_halfedge(o):
            opp[i] = j
            opp[j] = i
        else:
            opp[i] = pos[o]
            opp[j] = pos[o] + n_int
        to[i] = mesh.to[h]
        to[j] = vrefl[mesh.to[o]]
        lengths[i] = metric.lengths[h]
        lengths[j] = metric.lengths[h]

    cover_mesh = CombinatorialMesh(
        next_he=next_he, opp=opp, to=to, n_vertices=n_cover_v
    )
    r = [i + n_int for i in range(n_int)] + list(range(n_int))
    he_label = [1] * n_int + [2] * n_int
    refl = ReflectionMap(r=r, he_label=he_label, vertex_refl=vrefl)

    errs = validate(cover_mesh)
    if errs:
        raise MeshError("double cover invalid: " + "; ".join(errs))
    errs = validate_symmetry(cover_mesh, refl)
    if errs:
        raise SymmetryError("double cover asymmetric: " + "; ".join(errs))

    theta_hat = [0.0] * n_cover_v
    for v in range(v0):
        if v in boundary_v:
            theta_hat[v] = 2.0 * math.pi - 2.0 * kappa_boundary[v]
        else:
            theta_hat[v] = 2.0 * math.pi - kappa_interior[v]
            theta_hat[vrefl[v]] = theta_hat[v]

    targets = TargetAngles(theta_hat)
    deviation = targets.residual(cover_mesh)
    if abs(deviation) > 1e-8 * max(1, n_cover_v):
        raise MeshError(
            f"targets violate Gauss-Bonnet on the closed cover (deviation {deviation!r})"
        )

    cover = DoubleCover(
        mesh=cover_mesh,
        refl=refl,
        n_source_halfedges=n_int,
        n_source_vertices=v0,
    )
    return cover, PennerMetric(lengths), targets


def symmetric_make_delaunay(
    cover: DoubleCover,
    metric: PennerMetric,
    u: "list[float]",
    eps_flip: float = 1e-12,
    flip_budget_factor: float = 100.0,
    ops: RealOps = REAL64,
):
    """Flip the cover to Delaunay with symmetry-preserving surgeries."""
    from .metric import make_delaunay

    return make_delaunay(
        cover.mesh,
        metric,
        u,
        refl=cover.refl,
        eps_flip=eps_flip,
        flip_budget_factor=flip_budget_factor,
        ops=ops,
    )


def restrict_to_single_cover(
    cover: DoubleCover,
    metric: PennerMetric,
    u: "list[float]",
    ops: RealOps = REAL64,
) -> tuple[CombinatorialMesh, PennerMetric, list[float]]:
    """Cut a symmetric scaled metric along its axis and keep one sheet.

    Every crossing edge gets a midpoint vertex; axis triangles keep the
    half on sheet 1 (apex, sheet-1 vertex, midpoint), axis quads keep the
    half-quad between their two midpoints, split into two triangles.  The
    returned mesh carries *scaled* lengths and a conformal factor list
    holding the solved values at kept source vertices and NaN at the new
    midpoints.
    """
    mesh, refl = cover.mesh, cover.refl
    v0 = cover.n_source_vertices

    def lp(h: int) -> float:
        return metric.lengths[h] * ops.exp(
            0.5 * (u[mesh.to[h]] + u[mesh.to[mesh.opp[h]]])
        )

    crossing = sorted(e for e in mesh.edges() if refl.r[e] == e)
    midpoint: dict[int, int] = {}
    half_len: dict[int, float] = {}
    for rank, e in enumerate(crossing):
        midpoint[e] = v0 + rank
        half_len[e] = 0.5 * lp(e)

    faces_v: list[list[int]] = []
    faces_e: list[list[int]] = []
    edge_len: dict[int, float] = {}
    eid_of_cover_edge: dict[int, int] = {}
    next_eid = 0

    def fresh(length: float) -> int:
        nonlocal next_eid
        eid = next_eid
        next_eid += 1
        edge_len[eid] = length
        return eid

    def kept_edge(h: int) -> int:
        e = mesh.edge_of(h)
        eid = eid_of_cover_edge.get(e)
        if eid is None:
            eid = fresh(lp(h))
            eid_of_cover_edge[e] = eid
        return eid

    def half_edge_id(h: int) -> int:
        e = mesh.edge_of(h)
        eid = eid_of_cover_edge.get(e)
        if eid is None:
            eid = fresh(half_len[e])
            eid_of_cover_edge[e] = eid
        return eid

    for f in mesh.faces():
        hs = mesh.face_halfedges(f)
        labs = [refl.he_label[x] for x in hs]
        if 0 not in labs:
            if labs[0] == 2:
                continue
            faces_v.append([mesh.tail_of(x) for x in hs])
            faces_e.append([kept_edge(x) for x in hs])
            continue
        if len(hs) == 3:
            c = next(x for x in hs if refl.r[x] == x)
            g = next(x for x in hs if refl.he_label[x] == 1)
            s = lp(g)
            b = lp(c)
            arg = s * s - 0.25 * b * b
            if not arg > 0.0:
                raise MetricError(f"axis triangle {f} has no real height")
            cut = fresh(ops.sqrt(arg))
            m = midpoint[mesh.edge_of(c)]
            if mesh.next_he[g] == c:
                # g runs apex -> sheet-1 vertex, then the crossing side.
                faces_v.append([mesh.tail_of(g), mesh.to[g], m])
                faces_e.append([kept_edge(g), half_edge_id(c), cut])
            else:
                faces_v.append([m, mesh.tail_of(g), mesh.to[g]])
                faces_e.append([half_edge_id(c), kept_edge(g), cut])
        else:
            g = next(x for x in hs if refl.he_label[x] == 1)
            pg = mesh.prev(g)
            ng = mesh.next_he[g]
            a = mesh.tail_of(g)
            b = mesh.to[g]
            m_in = midpoint[mesh.edge_of(pg)]
            m_out = midpoint[mesh.edge_of(ng)]
            b1 = lp(pg)
            b2 = lp(ng)
            s = lp(g)
            arg = s * s - 0.25 * (b1 - b2) * (b1 - b2)
            if not arg > 0.0:
                raise MetricError(f"axis quad {f} has no real height")
            height = ops.sqrt(arg)
            cut = fresh(height)
            diag = fresh(ops.sqrt(0.25 * b1 * b1 + height * height))
            faces_v.append([m_in, a, m_out])
            faces_e.append([half_edge_id(pg), diag, cut])
            faces_v.append([a, b, m_out])
            faces_e.append([kept_edge(g), half_edge_id(ng), diag])

    n_out_v = v0 + len(crossing)
    out_mesh, he_eid = build_from_face_edge_lists(faces_v, faces_e, n_out_v)
    out_lengths = [0.0] * out_mesh.n_halfedges()
    for h in range(out_mesh.n_halfedges()):
        out_lengths[h] = edge_len[he_eid[h]]
    u_out = [float(u[v]) for v in range(v0)] + [math.nan] * len(crossing)
    return out_mesh, PennerMetric(out_lengths), u_out
