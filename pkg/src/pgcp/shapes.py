"""Synthetic test surfaces: planar grids, bumpy heightfields, icospheres, caps.

Also provides cut-edge generators that split a mesh along the boundaries of a
face labeling, which is how all partition fixtures are built.
"""

import numpy as np

from .mesh import TriMesh


def flat_grid(nx, ny=None, width=1.0, height=1.0):
    """Regular triangulated grid in the z=0 plane, (nx+1)*(ny+1) vertices."""
    if ny is None:
        ny = nx
    xs = np.linspace(0.0, width, nx + 1)
    ys = np.linspace(0.0, height, ny + 1)
    gx, gy = np.meshgrid(xs, ys, indexing="xy")
    verts = np.column_stack([gx.ravel(), gy.ravel(), np.zeros(gx.size)])

    def vid(ix, iy):
        return iy * (nx + 1) + ix

    faces = []
    for iy in range(ny):
        for ix in range(nx):
            v00 = vid(ix, iy)
            v10 = vid(ix + 1, iy)
            v11 = vid(ix + 1, iy + 1)
            v01 = vid(ix, iy + 1)
            faces.append([v00, v10, v11])
            faces.append([v00, v11, v01])
    return TriMesh(verts, np.array(faces))


def bumpy_grid(nx, ny=None, amplitude=0.1, n_bumps=4, seed=0):
    """Heightfield over the unit square with smooth random bumps."""
    base = flat_grid(nx, ny)
    rng = np.random.default_rng(seed)
    v = np.array(base.vertices)
    z = np.zeros(len(v))
    for _ in range(n_bumps):
        cx, cy = rng.uniform(0.2, 0.8, size=2)
        s = rng.uniform(0.1, 0.3)
        a = rng.uniform(-amplitude, amplitude)
        z += a * np.exp(-((v[:, 0] - cx) ** 2 + (v[:, 1] - cy) ** 2) / (2 * s * s))
    v[:, 2] = z
    return TriMesh(v, base.faces)


_ICO_T = (1.0 + np.sqrt(5.0)) / 2.0

_ICO_VERTS = np.array([
    [-1, _ICO_T, 0], [1, _ICO_T, 0], [-1, -_ICO_T, 0], [1, -_ICO_T, 0],
    [0, -1, _ICO_T], [0, 1, _ICO_T], [0, -1, -_ICO_T], [0, 1, -_ICO_T],
    [_ICO_T, 0, -1], [_ICO_T, 0, 1], [-_ICO_T, 0, -1], [-_ICO_T, 0, 1],
], dtype=np.float64)

_ICO_FACES = np.array([
    [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
    [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
    [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
    [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
], dtype=np.int64)


def icosphere(subdiv=3, radius=1.0):
    """Unit icosphere by repeated edge-midpoint subdivision, outward oriented."""
    verts = [p / np.linalg.norm(p) for p in _ICO_VERTS]
    faces = _ICO_FACES.tolist()
    for _ in range(subdiv):
        cache = {}
        new_faces = []

        def midpoint(i, j):
            key = (i, j) if i < j else (j, i)
            if key not in cache:
                p = verts[i] + verts[j]
                verts.append(p / np.linalg.norm(p))
                cache[key] = len(verts) - 1
            return cache[key]

        for a, b, c in faces:
            ab = midpoint(a, b)
            bc = midpoint(b, c)
            ca = midpoint(c, a)
            new_faces += [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]
        faces = new_faces
    v = np.array(verts) * radius
    mesh = TriMesh(v, np.array(faces))
    if mesh.signed_volume() < 0:
        mesh = TriMesh(v, np.array(faces)[:, ::-1])
    return mesh


def spherical_cap(subdiv=4, polar_deg=60.0, smooth_rim=True):
    """Cap of the unit icosphere around the north pole: faces with all vertices
    at polar angle <= polar_deg.

    With smooth_rim, boundary vertices are snapped onto the exact rim circle
    (the whole-face cut otherwise leaves a zigzag boundary whose corners cost
    O(1) local distortion in any conformal map to a smooth target).
    """
    sphere = icosphere(subdiv)
    zmin = np.cos(np.radians(polar_deg))
    keep = np.all(sphere.vertices[sphere.faces][:, :, 2] >= zmin, axis=1)
    cap = submesh_of_faces(sphere, np.nonzero(keep)[0])
    if not smooth_rim:
        return cap
    from .mesh import TriMesh, boundary_loops
    loop = boundary_loops(cap)[0]
    v = np.array(cap.vertices)
    rim_r = np.sin(np.radians(polar_deg))
    xy = v[loop, :2]
    nrm = np.linalg.norm(xy, axis=1)
    v[loop, 0] = xy[:, 0] / nrm * rim_r
    v[loop, 1] = xy[:, 1] / nrm * rim_r
    v[loop, 2] = zmin
    return TriMesh(v, cap.faces)


def submesh_of_faces(mesh, face_idx):
    """New TriMesh from a face subset, vertices reindexed."""
    f = mesh.faces[np.asarray(face_idx, dtype=np.int64)]
    used = np.unique(f)
    remap = np.full(mesh.n_vertices, -1, dtype=np.int64)
    remap[used] = np.arange(len(used))
    return TriMesh(mesh.vertices[used], remap[f])


def cuts_from_face_labels(mesh, labels):
    """Cut edges = interior edges whose two incident faces carry different labels.

    Returns an (e, 2) array of parent vertex index pairs.
    """
    labels = np.asarray(labels)
    de = mesh.directed_edges()
    # directed_edges lists the (0,1), (1,2), (2,0) blocks in face order
    face_of = np.concatenate([np.arange(mesh.n_faces)] * 3)
    owner = {}
    cuts = set()
    for (u, v), fi in zip(de, face_of):
        key = (min(u, v), max(u, v))
        if key in owner:
            if labels[owner[key]] != labels[fi]:
                cuts.add(key)
        else:
            owner[key] = fi
    return np.array(sorted(cuts), dtype=np.int64).reshape(-1, 2)


def quadrant_labels(mesh, center=None):
    """Face labels 0..3 by centroid quadrant in the xy plane."""
    cent = mesh.vertices[mesh.faces].mean(axis=1)
    if center is None:
        center = 0.5 * (mesh.vertices.min(axis=0) + mesh.vertices.max(axis=0))
    return (cent[:, 0] > center[0]).astype(int) + 2 * (cent[:, 1] > center[1]).astype(int)


def strip_labels(mesh, k, axis=0):
    """Face labels 0..k-1 by balanced split of face centroids along an axis."""
    cent = mesh.vertices[mesh.faces].mean(axis=1)[:, axis]
    qs = np.quantile(cent, np.linspace(0, 1, k + 1)[1:-1])
    return np.searchsorted(qs, cent, side="right")


def hemisphere_labels(mesh, axis=2):
    """Two labels split by the coordinate plane through the origin."""
    cent = mesh.vertices[mesh.faces].mean(axis=1)
    return (cent[:, axis] > 0).astype(int)


def azimuth_labels(mesh, k=4):
    """Face labels by azimuthal sector around the z axis."""
    cent = mesh.vertices[mesh.faces].mean(axis=1)
    ang = np.mod(np.arctan2(cent[:, 1], cent[:, 0]), 2 * np.pi)
    return np.minimum((ang / (2 * np.pi) * k).astype(int), k - 1)
