"""Triangle mesh data model, topology validation, boundary extraction and OBJ I/O."""

import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

# Faces with area below DEGENERATE_AREA_REL * (bbox diagonal)^2 are rejected:
# cotangent weights blow up on slivers.
DEGENERATE_AREA_REL = 1e-12


class MeshError(ValueError):
    """Raised for invalid mesh data (bad indices, degenerate or non-manifold input)."""


class TriMesh:
    """Indexed triangle surface with 3D vertex positions.

    Vertices and faces are frozen after construction so instances can be
    shared read-only across concurrent subdomain workers.

    Parameters
    ----------
    vertices : (n, 3) array_like
        3D vertex positions.
    faces : (m, 3) array_like
        Vertex index triples, counterclockwise orientation.
    check : bool
        Validate indices, degeneracy, manifoldness and orientation consistency.
    """

    def __init__(self, vertices, faces, check=True):
        v = np.asarray(vertices, dtype=np.float64)
        f = np.asarray(faces, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 3:
            raise MeshError("vertices must be an (n, 3) array")
        if f.size == 0:
            f = f.reshape(0, 3)
        if f.ndim != 2 or f.shape[1] != 3:
            raise MeshError("faces must be an (m, 3) array")
        v.flags.writeable = False
        f.flags.writeable = False
        self.vertices = v
        self.faces = f
        self._edges = None
        self._bd_next = None
        if check:
            self._validate()

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def n_faces(self):
        return self.faces.shape[0]

    def _validate(self):
        f = self.faces
        n = self.n_vertices
        if f.size and (f.min() < 0 or f.max() >= n):
            raise MeshError(f"face index out of range [0, {n})")
        same = (f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 2] == f[:, 0])
        if same.any():
            raise MeshError(f"face {np.nonzero(same)[0][0]} has repeated vertices")
        areas = self.face_areas()
        if len(areas):
            diag = self.bbox_diagonal()
            bad = areas < DEGENERATE_AREA_REL * diag * diag
            if bad.any():
                raise MeshError(f"degenerate face {np.nonzero(bad)[0][0]} (area below epsilon)")
        # Manifoldness: every undirected edge in at most 2 faces; consistent
        # orientation: every directed edge appears at most once.
        de = self.directed_edges()
        _, counts = np.unique(de, axis=0, return_counts=True)
        if (counts > 1).any():
            raise MeshError("inconsistent orientation or non-manifold edge "
                            "(directed edge repeated)")

    def directed_edges(self):
        """All 3m directed edges (u, v) in face order."""
        f = self.faces
        return np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])

    def edges(self):
        """Unique undirected edges as a sorted (e, 2) array."""
        if self._edges is None:
            de = np.sort(self.directed_edges(), axis=1)
            self._edges = np.unique(de, axis=0)
        return self._edges

    def edge_set(self):
        return {(int(a), int(b)) for a, b in self.edges()}

    def face_areas(self):
        v = self.vertices
        f = self.faces
        c = np.cross(v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]])
        return 0.5 * np.linalg.norm(c, axis=1)

    def bbox_diagonal(self):
        v = self.vertices
        if not len(v):
            return 0.0
        return float(np.linalg.norm(v.max(axis=0) - v.min(axis=0)))

    def signed_volume(self):
        """Sum of signed tetra volumes; positive for outward-oriented closed meshes."""
        v = self.vertices
        f = self.faces
        return float(np.einsum("ij,ij->", v[f[:, 0]], np.cross(v[f[:, 1]], v[f[:, 2]]))) / 6.0

    def boundary_directed_edges(self):
        """Directed edges (u, v) whose reverse (v, u) is not in any face.

        The surface lies to the left of each returned edge for CCW faces.
        """
        de = self.directed_edges()
        fwd = {(int(a), int(b)) for a, b in de}
        mask = np.array([(int(b), int(a)) not in fwd for a, b in de])
        return de[mask]

    def vertex_face_incidence(self):
        """List of face-index arrays, one per vertex."""
        f = self.faces
        inc = [[] for _ in range(self.n_vertices)]
        for fi, (a, b, c) in enumerate(f):
            inc[a].append(fi)
            inc[b].append(fi)
            inc[c].append(fi)
        return [np.array(x, dtype=np.int64) for x in inc]


@dataclass
class TopologyReport:
    euler_characteristic: int
    boundary_loop_count: int
    classification: str  # disk_type | sphere_type | unsupported


def boundary_loops(mesh):
    """Extract boundary loops as ordered vertex-index arrays.

    Each loop traverses its boundary once with the surface to the left
    (consistent with CCW face orientation). Raises MeshError on pinched
    boundary vertices (two loops meeting at one vertex).
    """
    bde = mesh.boundary_directed_edges()
    nxt = {}
    for a, b in bde:
        a, b = int(a), int(b)
        if a in nxt:
            raise MeshError(f"pinched boundary at vertex {a}")
        nxt[a] = b
    loops = []
    visited = set()
    for start in sorted(nxt):
        if start in visited:
            continue
        loop = [start]
        visited.add(start)
        cur = nxt[start]
        while cur != start:
            if cur in visited or cur not in nxt:
                raise MeshError(f"boundary traversal failed at vertex {cur}")
            loop.append(cur)
            visited.add(cur)
            cur = nxt[cur]
        loops.append(np.array(loop, dtype=np.int64))
    return loops


def validate_topology(mesh):
    """Compute Euler characteristic and boundary loop count, classify the surface.

    disk_type iff chi == 1 with one boundary loop; sphere_type iff chi == 2
    with no boundary. Everything else is unsupported (not an error).
    """
    chi = mesh.n_vertices - len(mesh.edges()) + mesh.n_faces
    try:
        n_loops = len(boundary_loops(mesh))
    except MeshError:
        return TopologyReport(chi, -1, "unsupported")
    if chi == 1 and n_loops == 1:
        cls = "disk_type"
    elif chi == 2 and n_loops == 0:
        cls = "sphere_type"
    else:
        cls = "unsupported"
    return TopologyReport(chi, n_loops, cls)


def load_obj(path):
    """Load a Wavefront OBJ file as a TriMesh.

    Only "v" and "f" records are used. Polygonal faces are fan-split into
    triangles (v0, vi, vi+1). Closed meshes with negative signed volume are
    flipped to outward orientation with a warning.
    """
    verts = []
    tris = []
    with open(path, "r", encoding="utf-8") as fh:
        for ln, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            tag = parts[0]
            if tag == "v":
                if len(parts) < 4:
                    raise MeshError(f"{path}:{ln}: vertex needs 3 coordinates")
                try:
                    verts.append([float(x) for x in parts[1:4]])
                except ValueError as exc:
                    raise MeshError(f"{path}:{ln}: bad vertex coordinate") from exc
            elif tag == "f":
                if len(parts) < 4:
                    raise MeshError(f"{path}:{ln}: face needs at least 3 vertices")
                idx = []
                for tok in parts[1:]:
                    head = tok.split("/")[0]
                    try:
                        i = int(head)
                    except ValueError as exc:
                        raise MeshError(f"{path}:{ln}: bad face index {tok!r}") from exc
                    if i < 0:
                        raise MeshError(f"{path}:{ln}: negative face indices unsupported")
                    idx.append(i - 1)
                for j in range(1, len(idx) - 1):
                    tris.append([idx[0], idx[j], idx[j + 1]])
    verts = np.array(verts, dtype=np.float64).reshape(-1, 3)
    tris = np.array(tris, dtype=np.int64).reshape(-1, 3)
    if tris.size and tris.max() >= len(verts):
        raise MeshError(f"{path}: face index {tris.max() + 1} out of range "
                        f"(file has {len(verts)} vertices)")
    mesh = TriMesh(verts, tris)
    rep = validate_topology(mesh)
    if rep.classification == "sphere_type" and mesh.signed_volume() < 0:
        logger.warning("%s: inward orientation detected, flipping faces", path)
        mesh = TriMesh(verts, tris[:, ::-1])
    return mesh


def write_obj_with_param(path, mesh, param, precision=9):
    """Write mesh plus parameterization to OBJ.

    2D param: original geometry with "vt" texture coordinates and "f v/vt"
    records. 3D param (spherical): the parameterized geometry itself is
    written as the vertex positions. Round-trips through load_obj.
    """
    param = np.asarray(param, dtype=np.float64)
    if param.shape[0] != mesh.n_vertices:
        raise MeshError("param length must equal vertex count")
    fmt = f"%.{int(precision)}g"

    def row(prefix, vals):
        return prefix + " " + " ".join(fmt % x for x in vals) + "\n"

    with open(path, "w", encoding="utf-8") as fh:
        if param.ndim == 2 and param.shape[1] == 2:
            for p in mesh.vertices:
                fh.write(row("v", p))
            for uv in param:
                fh.write(row("vt", uv))
            for a, b, c in mesh.faces + 1:
                fh.write(f"f {a}/{a} {b}/{b} {c}/{c}\n")
        elif param.ndim == 2 and param.shape[1] == 3:
            for p in param:
                fh.write(row("v", p))
            for a, b, c in mesh.faces + 1:
                fh.write(f"f {a} {b} {c}\n")
        else:
            raise MeshError("param must be (n, 2) or (n, 3)")
