"""Shared fixtures: small meshes, randomized states, symmetric test rigs."""

import math

import numpy as np

from confmetric.cover import build_double_cover
from confmetric.generate import icosphere
from confmetric.halfedge import build_from_face_lists, plan_flip
from confmetric.metric import PennerMetric, flip_edge
from confmetric.symmetry import FlipType, apply_symmetric_flip, classify_flip


def tetra():
    return build_from_face_lists([[0, 1, 2], [0, 2, 3], [0, 3, 1], [1, 3, 2]])


def octa():
    return build_from_face_lists(
        [[0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 1],
         [5, 2, 1], [5, 3, 2], [5, 4, 3], [5, 1, 4]]
    )


def fan_disk(k):
    """k boundary triangles around one interior hub vertex (id k)."""
    return build_from_face_lists([[i, (i + 1) % k, k] for i in range(k)])


def set_length(mesh, metric, a, b, val):
    """Assign one edge length by endpoint pair (both halfedge slots)."""
    hit = False
    for e in mesh.edges():
        if set(mesh.edge_endpoints(e)) == {a, b}:
            metric.lengths[e] = val
            metric.lengths[mesh.opp[e]] = val
            hit = True
    assert hit, f"no edge {a}-{b}"


def flippable_edges(mesh):
    out = []
    for e in mesh.edges():
        if mesh.is_boundary_edge(e):
            continue
        try:
            plan_flip(mesh, e)
        except Exception:
            continue
        out.append(e)
    return out


def shuffled_closed_mesh(rng, level=0, flips=12, low=0.6, high=1.8):
    """Random connectivity + random Penner lengths on a small sphere."""
    mesh = build_from_face_lists(icosphere(level)[0])
    metric = PennerMetric.uniform(mesh)
    for e in mesh.edges():
        val = float(rng.uniform(low, high))
        metric.lengths[e] = val
        metric.lengths[mesh.opp[e]] = val
    for _ in range(flips):
        cand = flippable_edges(mesh)
        flip_edge(mesh, metric, cand[rng.integers(len(cand))])
    return mesh, metric


def hexagon_cover(long_edges=((0, 1),), length=1.9):
    """Double cover of a hexagonal fan disk with selected edges lengthened.

    The stretched boundary edges become non-Delaunay axis-parallel edges of
    the cover, which is the seed every symmetric surgery chain grows from.
    """
    disk = fan_disk(6)
    metric = PennerMetric.uniform(disk)
    for e in disk.edges():
        if tuple(sorted(disk.edge_endpoints(e))) in {tuple(sorted(p)) for p in long_edges}:
            metric.lengths[e] = length
            metric.lengths[disk.opp[e]] = length
    cover, cmetric, targets = build_double_cover(
        disk, metric, [0.0] * 7, [math.pi / 3] * 7
    )
    return cover, cmetric, targets


def find_flip_of_kind(mesh, refl, want, forward):
    for e in mesh.edges():
        kind, fwd = classify_flip(mesh, refl, e)
        if kind is want and fwd == forward:
            return e
    return None


def drive_to_quads(cover, cmetric):
    """Produce a cover state containing quad faces: axis, tri-quad, quad-quad.

    Returns the list of flip records applied.  Requires a hexagon_cover-like
    state with one stretched parallel edge.
    """
    mesh, refl = cover.mesh, cover.refl
    recs = []
    for want in (FlipType.AXIS, FlipType.TRI_QUAD, FlipType.QUAD_QUAD):
        e = find_flip_of_kind(mesh, refl, want, True)
        assert e is not None, f"no forward {want} available"
        recs.append(apply_symmetric_flip(mesh, cmetric, refl, e))
    return recs


def active_lengths(mesh, metric):
    return sorted(
        metric.lengths[h] for h in range(mesh.n_halfedges()) if not mesh.parked[h]
    )


def random_symmetric_lengths(mesh, refl, rng, low=0.5, high=2.0):
    """Fresh positive lengths, assigned once per reflection orbit."""
    L = [0.0] * mesh.n_halfedges()
    for h in range(mesh.n_halfedges()):
        if mesh.parked[h] or L[h]:
            continue
        val = float(rng.uniform(low, high))
        for x in (h, mesh.opp[h], refl.r[h], mesh.opp[refl.r[h]]):
            L[x] = val
    return L
