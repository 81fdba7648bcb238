"""Oriented triangle meshes with circumcentric-dual metrics.

A :class:`SimplicialSurface` is a triangulated 2-manifold embedded in 3-space,
stored with canonical edge orientations and integer incidence matrices.  The
companion :class:`DualMetrics` carries every primal and circumcentric-dual
measure the diagonal Hodge stars and the time steppers need: edge lengths,
face areas, dual edge (polyline) lengths and dual vertex-cell areas.

Conventions
-----------
* Edges are canonically oriented from the lower vertex index to the higher.
* ``d0[e, v]`` is +1 at the edge head, -1 at the tail.
* ``d1[f, e]`` is +1 when the edge's canonical orientation agrees with the
  face's boundary traversal, -1 otherwise, so ``d1 @ d0 == 0`` exactly in
  integer arithmetic.
* Circumcenters are computed in each face's own plane in 3D; the dual of an
  edge is the polyline joining the circumcenters of its (one or two) incident
  faces through the edge midpoint, so dual lengths are correct on curved
  surfaces.

Construction is pure: a surface and its metrics are immutable after creation
and safe for concurrent read-only use.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

__all__ = [
    "MeshError",
    "SimplicialSurface",
    "DualMetrics",
    "from_arrays",
    "load_obj",
    "build_incidence",
    "compute_dual_metrics",
    "mesh_report",
]

# Face considered degenerate when area < DEGENERATE_REL * (longest edge)^2.
DEGENERATE_REL = 1e-14
# Interior dual edge shorter than ZERO_DUAL_REL * primal edge length is
# treated as zero (cocircular adjacent triangles).
ZERO_DUAL_REL = 1e-12


class MeshError(ValueError):
    """Raised for invalid, degenerate or non-orientable mesh input."""


@dataclass(frozen=True)
class SimplicialSurface:
    """Oriented triangle mesh with edge/vertex incidence structure.

    Attributes
    ----------
    vertices : (V, 3) float array
        Vertex positions.
    edges : (E, 2) int array
        Canonically oriented edges, ``edges[:, 0] < edges[:, 1]``, sorted
        lexicographically (deterministic, independent of face order).
    faces : (F, 3) int array
        Vertex triples in the winding order of the input file.
    d0 : (E, V) int sparse matrix
        Vertex-to-edge incidence.
    d1 : (F, E) int sparse matrix
        Edge-to-face incidence.
    boundary_edges : frozenset of int
        Indices of edges with exactly one incident face.
    """

    vertices: np.ndarray
    edges: np.ndarray
    faces: np.ndarray
    d0: sp.csr_matrix
    d1: sp.csr_matrix
    boundary_edges: frozenset = field(default_factory=frozenset)

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    @property
    def n_faces(self) -> int:
        return self.faces.shape[0]

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_faces

    @property
    def d0_real(self) -> sp.csr_matrix:
        """Float copy of d0 for numerical work (cached)."""
        if not hasattr(self, "_d0_real"):
            object.__setattr__(self, "_d0_real", self.d0.astype(np.float64))
        return self._d0_real

    @property
    def d1_real(self) -> sp.csr_matrix:
        """Float copy of d1 for numerical work (cached)."""
        if not hasattr(self, "_d1_real"):
            object.__setattr__(self, "_d1_real", self.d1.astype(np.float64))
        return self._d1_real

    @property
    def interior_edge_mask(self) -> np.ndarray:
        mask = np.ones(self.n_edges, dtype=bool)
        if self.boundary_edges:
            mask[list(self.boundary_edges)] = False
        return mask

    @property
    def face_edges(self) -> np.ndarray:
        """(F, 3) edge indices per face, in (a,b),(b,c),(c,a) local order (cached)."""
        if not hasattr(self, "_face_edges"):
            _, fe = _canonical_edges(self.faces)
            object.__setattr__(self, "_face_edges", fe)
        return self._face_edges

    def count_carriers(self, degree: int, placement: str) -> int:
        """Number of cells carrying a cochain of the given degree/placement."""
        primal = (self.n_vertices, self.n_edges, self.n_faces)
        if placement == "primal":
            return primal[degree]
        if placement == "dual":
            # dual 0-cells sit on faces, dual 1-cells on edges, dual 2-cells
            # on vertices
            return primal[2 - degree]
        raise ValueError(f"unknown placement {placement!r}")


def _canonical_edges(faces: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return unique sorted edges and a (F, 3) map of face-edge indices.

    The k-th directed boundary edge of face (a, b, c) is (a,b), (b,c), (c,a).
    """
    a, b, c = faces[:, 0], faces[:, 1], faces[:, 2]
    directed = np.stack(
        [np.stack([a, b], axis=1), np.stack([b, c], axis=1), np.stack([c, a], axis=1)],
        axis=1,
    )  # (F, 3, 2)
    undirected = np.sort(directed.reshape(-1, 2), axis=1)
    edges, inverse = np.unique(undirected, axis=0, return_inverse=True)
    return edges, inverse.reshape(-1, 3)


def build_incidence(
    vertices: np.ndarray, faces: np.ndarray
) -> tuple[np.ndarray, sp.csr_matrix, sp.csr_matrix, frozenset]:
    """Derive edges and the incidence matrices d0, d1 from face triples.

    Returns ``(edges, d0, d1, boundary_edges)``.  Raises :class:`MeshError`
    on non-manifold edges (more than two incident faces), edges traversed in
    the same direction by two faces (inconsistent winding), or isolated
    vertices.
    """
    n_v = vertices.shape[0]
    n_f = faces.shape[0]
    edges, face_edge = _canonical_edges(faces)
    n_e = edges.shape[0]

    # d0: one -1 at the tail (low index), +1 at the head (high index)
    rows = np.repeat(np.arange(n_e), 2)
    cols = edges.reshape(-1)
    vals = np.tile(np.array([-1, 1], dtype=np.int64), n_e)
    d0 = sp.csr_matrix((vals, (rows, cols)), shape=(n_e, n_v))

    isolated = np.setdiff1d(np.arange(n_v), np.unique(faces))
    if isolated.size:
        raise MeshError(f"isolated vertices (no incident face): {isolated.tolist()}")

    # d1: sign +1 when the directed traversal matches the canonical (low->high)
    # orientation of the edge
    a, b, c = faces[:, 0], faces[:, 1], faces[:, 2]
    directed_tails = np.stack([a, b, c], axis=1)  # tails of (a,b),(b,c),(c,a)
    signs = np.where(directed_tails == edges[face_edge, 0], 1, -1).astype(np.int64)
    rows = np.repeat(np.arange(n_f), 3)
    d1 = sp.csr_matrix(
        (signs.reshape(-1), (rows, face_edge.reshape(-1))), shape=(n_f, n_e)
    )

    counts = np.bincount(face_edge.reshape(-1), minlength=n_e)
    bad = np.nonzero(counts > 2)[0]
    if bad.size:
        raise MeshError(f"non-manifold edge (more than two incident faces): edge {bad[0]}")

    # Interior edges must be traversed in opposite directions by their two
    # faces, i.e. the signed d1 column sums to zero there.
    signed_sums = np.asarray(d1.sum(axis=0)).ravel()
    interior = counts == 2
    inconsistent = np.nonzero(interior & (signed_sums != 0))[0]
    if inconsistent.size:
        raise MeshError(
            f"inconsistent winding across interior edge {inconsistent[0]}: "
            "the surface must be consistently oriented"
        )

    boundary = frozenset(np.nonzero(counts == 1)[0].tolist())
    return edges, d0, d1, boundary


def from_arrays(vertices, faces) -> SimplicialSurface:
    """Build a surface from raw vertex/face arrays (used by loaders and tests)."""
    vertices = np.ascontiguousarray(vertices, dtype=np.float64)
    faces = np.ascontiguousarray(faces, dtype=np.int64)
    if vertices.ndim != 2 or vertices.shape[1] != 3:
        raise MeshError("vertices must be an (V, 3) array")
    if faces.ndim != 2 or faces.shape[1] != 3:
        raise MeshError("faces must be an (F, 3) array of vertex triples")
    if faces.size and (faces.min() < 0 or faces.max() >= vertices.shape[0]):
        raise MeshError("face vertex index out of range")
    if faces.size == 0:
        raise MeshError("mesh has no faces")
    edges, d0, d1, boundary = build_incidence(vertices, faces)
    return SimplicialSurface(
        vertices=vertices, edges=edges, faces=faces, d0=d0, d1=d1,
        boundary_edges=boundary,
    )


def load_obj(path) -> SimplicialSurface:
    """Load a Wavefront OBJ file with triangular faces.

    Only ``v x y z`` and ``f i j k`` records are honoured (1-based indices;
    ``i/t/n`` vertex references are accepted, everything after the first
    slash is ignored).  Other record types are skipped.  Face orientation is
    taken from the file's winding order.
    """
    vertices: list[list[float]] = []
    faces: list[list[int]] = []
    with open(path, "r") as fh:
        for lineno, line in enumerate(fh, start=1):
            tokens = line.split()
            if not tokens or tokens[0].startswith("#"):
                continue
            if tokens[0] == "v":
                if len(tokens) < 4:
                    raise MeshError(f"{path}:{lineno}: vertex record needs 3 coordinates")
                vertices.append([float(t) for t in tokens[1:4]])
            elif tokens[0] == "f":
                idx = [int(t.split("/")[0]) - 1 for t in tokens[1:]]
                if len(idx) != 3:
                    raise MeshError(
                        f"non-triangular face at face {len(faces)} "
                        f"({len(idx)} vertices, line {lineno})"
                    )
                faces.append(idx)
    if not vertices:
        raise MeshError(f"{path}: no vertices found")
    return from_arrays(np.array(vertices), np.array(faces))


@dataclass(frozen=True)
class DualMetrics:
    """Primal and circumcentric-dual measures of a surface.

    ``dual_edge_len[e]`` is the length of the polyline joining the
    circumcenters of the faces incident to edge ``e`` through the edge
    midpoint (a single segment for boundary edges).  ``dual_vertex_area[v]``
    is the area of the circumcentric dual 2-cell of vertex ``v``, assembled
    from the per-corner kite triangles (vertex, edge midpoint, face
    circumcenter).  In signed mode both can be negative for non-well-centered
    faces.
    """

    edge_len: np.ndarray
    face_area: np.ndarray
    dual_edge_len: np.ndarray
    dual_vertex_area: np.ndarray
    circumcenters: np.ndarray
    edge_midpoints: np.ndarray
    well_centered: np.ndarray
    signed: bool

    @property
    def all_well_centered(self) -> bool:
        return bool(self.well_centered.all())


def _face_geometry(surface: SimplicialSurface):
    """Per-face circumcenters, areas and signed circumcenter-edge distances.

    Returns ``(circumcenters, areas, signed_dist)`` where ``signed_dist[f, k]``
    is the distance from the circumcenter of face ``f`` to its k-th edge
    (edge opposite local vertex ordering (a,b),(b,c),(c,a)), positive when
    the circumcenter lies on the same side of the edge as the opposite
    vertex (i.e. inside for well-centered faces).
    """
    v = surface.vertices
    f = surface.faces
    p0, p1, p2 = v[f[:, 0]], v[f[:, 1]], v[f[:, 2]]
    u = p1 - p0
    w = p2 - p0
    uu = np.einsum("ij,ij->i", u, u)
    ww = np.einsum("ij,ij->i", w, w)
    uw = np.einsum("ij,ij->i", u, w)
    det = uu * ww - uw * uw  # = |u x w|^2
    areas = 0.5 * np.sqrt(np.maximum(det, 0.0))

    longest_sq = np.maximum(uu, np.maximum(ww, np.einsum("ij,ij->i", p2 - p1, p2 - p1)))
    degenerate = np.nonzero(areas < DEGENERATE_REL * longest_sq)[0]
    if degenerate.size:
        raise MeshError(f"degenerate face (collinear vertices): face {degenerate[0]}")

    # Circumcenter c = p0 + s*u + t*w from the equidistance conditions
    #   2 (c - p0).u = |u|^2,  2 (c - p0).w = |w|^2
    s = 0.5 * (ww * uu - uw * ww) / det
    t = 0.5 * (uu * ww - uw * uu) / det
    cc = p0 + s[:, None] * u + t[:, None] * w

    # signed distance from circumcenter to each edge line, in the face plane
    corners = np.stack([p0, p1, p2], axis=1)  # (F, 3, 3)
    signed = np.empty((f.shape[0], 3))
    for k, (i, j, opp) in enumerate(((0, 1, 2), (1, 2, 0), (2, 0, 1))):
        tail, head, other = corners[:, i], corners[:, j], corners[:, opp]
        mid = 0.5 * (tail + head)
        t_hat = head - tail
        t_hat = t_hat / np.linalg.norm(t_hat, axis=1, keepdims=True)

        def perp(x):
            return x - np.einsum("ij,ij->i", x, t_hat)[:, None] * t_hat

        to_cc = perp(cc - mid)
        to_opp = perp(other - mid)
        dist = np.linalg.norm(to_cc, axis=1)
        side = np.sign(np.einsum("ij,ij->i", to_cc, to_opp))
        # circumcenter exactly on the edge line -> distance 0, sign moot
        signed[:, k] = dist * np.where(side == 0, 1.0, side)
    return cc, areas, signed


def face_circumcenters(surface: SimplicialSurface) -> np.ndarray:
    """Circumcenters of all faces, computed in each face's own 3D plane."""
    cc, _, _ = _face_geometry(surface)
    return cc


def compute_dual_metrics(
    surface: SimplicialSurface, allow_non_well_centered: bool = False
) -> DualMetrics:
    """Compute circumcentric dual measures for every mesh element.

    Without the flag, any face not containing its own circumcenter is an
    error.  With the flag, dual edge segments and kite areas carry signs
    (negative where the circumcenter falls outside), which keeps the
    dual-tiling identity ``sum |*v| == sum |P|`` exact but may produce
    negative Hodge star entries downstream.

    Raises :class:`MeshError` for degenerate faces and for (near-)zero dual
    edges, which would break the diagonal Hodge star.
    """
    cc, areas, signed = _face_geometry(surface)
    f = surface.faces
    n_e = surface.n_edges

    edge_vec = surface.vertices[surface.edges[:, 1]] - surface.vertices[surface.edges[:, 0]]
    edge_len = np.linalg.norm(edge_vec, axis=1)
    edge_mid = 0.5 * (
        surface.vertices[surface.edges[:, 0]] + surface.vertices[surface.edges[:, 1]]
    )

    well_centered = (signed > 0.0).all(axis=1)
    if not allow_non_well_centered and not well_centered.all():
        offenders = np.nonzero(~well_centered)[0]
        raise MeshError(
            "non-well-centered faces (circumcenter outside): "
            f"{offenders.tolist()[:20]}"
            + (" ..." if offenders.size > 20 else "")
            + "; pass allow_non_well_centered to use signed dual lengths"
        )

    # face-local edge indices in the (a,b),(b,c),(c,a) order used by signed[]
    face_edge = surface.face_edges

    segment = signed if allow_non_well_centered else np.abs(signed)
    dual_edge_len = np.zeros(n_e)
    np.add.at(dual_edge_len, face_edge.reshape(-1), segment.reshape(-1))

    interior = surface.interior_edge_mask
    zero = np.abs(dual_edge_len) <= ZERO_DUAL_REL * edge_len
    if zero.any():
        which = np.nonzero(zero)[0]
        kind = "interior" if interior[which[0]] else "boundary"
        raise MeshError(
            f"zero dual edge at {kind} edge {which[0]} "
            "(adjacent triangles cocircular or circumcenter on the edge); "
            "the diagonal Hodge star would divide by zero"
        )

    # kite triangles: for each (face, local edge k) the two corners tail/head
    # each receive area |e|/4 * signed_dist
    dual_vertex_area = np.zeros(surface.n_vertices)
    local_pairs = ((0, 1), (1, 2), (2, 0))
    for k, (i, j) in enumerate(local_pairs):
        contrib = 0.25 * edge_len[face_edge[:, k]] * segment[:, k]
        np.add.at(dual_vertex_area, f[:, i], contrib)
        np.add.at(dual_vertex_area, f[:, j], contrib)

    return DualMetrics(
        edge_len=edge_len,
        face_area=areas,
        dual_edge_len=dual_edge_len,
        dual_vertex_area=dual_vertex_area,
        circumcenters=cc,
        edge_midpoints=edge_mid,
        well_centered=well_centered,
        signed=allow_non_well_centered,
    )


def mesh_report(surface: SimplicialSurface, path=None) -> str:
    """Plain-text well-formedness report (the ``check-mesh`` output).

    Always computes signed dual metrics so problems are reported instead of
    raised; the returned text lists counts, the Euler characteristic, edge
    length extremes, the minimum (signed) dual edge length and the number of
    non-well-centered faces.
    """
    lines = [f"mesh: {path}" if path else "mesh: <in-memory>"]
    lines.append(
        f"vertices={surface.n_vertices} edges={surface.n_edges} "
        f"faces={surface.n_faces} boundary_edges={len(surface.boundary_edges)}"
    )
    lines.append(f"euler_characteristic={surface.euler_characteristic}")
    issues = []
    try:
        metrics = compute_dual_metrics(surface, allow_non_well_centered=True)
    except MeshError as exc:
        lines.append(f"geometry: ERROR {exc}")
        lines.append("status: FAIL")
        return "\n".join(lines)
    lines.append(
        f"edge_len: min={metrics.edge_len.min():.6g} max={metrics.edge_len.max():.6g}"
    )
    lines.append(f"min_dual_edge_len={metrics.dual_edge_len.min():.6g}")
    n_bad = int((~metrics.well_centered).sum())
    lines.append(f"non_well_centered_faces={n_bad}")
    if n_bad:
        issues.append(f"{n_bad} non-well-centered faces")
    if metrics.dual_edge_len.min() <= 0:
        issues.append("nonpositive dual edge length")
    lines.append("status: " + ("FAIL (" + "; ".join(issues) + ")" if issues else "PASS"))
    return "\n".join(lines)
