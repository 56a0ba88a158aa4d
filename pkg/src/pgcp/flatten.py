"""Free-boundary conformal flattening of disk-type submeshes.

The flattening minimizes the discrete conformal energy E_C = E_D - A, where
E_D is the Dirichlet energy (cotangent discretization) and A the signed area
of the boundary polygon (shoelace). E_D >= A for every embedding, with
equality exactly for conformal maps, so pinning two boundary vertices and
solving the stationarity system of E_C yields a free-boundary conformal map
(the discrete natural conformal parameterization / LSCM energy).
"""

import logging

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import spsolve

from .mesh import MeshError, boundary_loops

logger = logging.getLogger(__name__)

COT_CLAMP = 1e8


class SolveError(RuntimeError):
    """Raised when a sparse solve fails or violates its residual contract."""


def cotangent_laplacian(mesh):
    """Cotangent Laplacian, positive semidefinite convention.

    Off-diagonal (p, q) entries are -(cot a + cot b)/2 over the angles
    opposite edge [p, q]; diagonals make row sums zero. u^T L u equals
    sum_e (cot a + cot b)/2 * (u_p - u_q)^2.
    """
    v = mesh.vertices
    f = mesh.faces
    n = mesh.n_vertices
    rows, cols, vals = [], [], []
    for corner in range(3):
        i = f[:, corner]
        j = f[:, (corner + 1) % 3]
        k = f[:, (corner + 2) % 3]
        u1 = v[j] - v[i]
        u2 = v[k] - v[i]
        cross = np.linalg.norm(np.cross(u1, u2), axis=1)
        if np.any(cross == 0):
            bad = int(np.nonzero(cross == 0)[0][0])
            raise MeshError(f"zero-area face {bad} in cotangent weights")
        cot = np.einsum("ij,ij->i", u1, u2) / cross
        if np.any(np.abs(cot) > COT_CLAMP):
            logger.warning("clamping %d near-degenerate cotangents",
                           int(np.sum(np.abs(cot) > COT_CLAMP)))
            cot = np.clip(cot, -COT_CLAMP, COT_CLAMP)
        w = 0.5 * cot
        rows += [j, k, j, k]
        cols += [k, j, j, k]
        vals += [-w, -w, w, w]
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    return sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))


def area_matrix(mesh, loops=None):
    """Sparse symmetric matrix M with (x^T y^T) M (x; y) equal to the shoelace
    signed area of the boundary polygon(s).

    Nonzeros sit at (p, q + n) index pairs for boundary edges [p, q] oriented
    along the boundary loops, with magnitude 1/4 so the quadratic form equals
    the area exactly.
    """
    n = mesh.n_vertices
    if loops is None:
        loops = boundary_loops(mesh)
    rows, cols, vals = [], [], []
    for loop in loops:
        p = loop
        q = np.roll(loop, -1)
        rows += [p, q + n, q, p + n]
        cols += [q + n, p, p + n, q]
        vals += [np.full(len(p), 0.25), np.full(len(p), 0.25),
                 np.full(len(p), -0.25), np.full(len(p), -0.25)]
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    return sparse.csr_matrix((vals, (rows, cols)), shape=(2 * n, 2 * n))


def dirichlet_energy(L, z):
    """E_D of a complex embedding via the Laplacian quadratic form."""
    x, y = z.real, z.imag
    return 0.5 * (x @ (L @ x) + y @ (L @ y))


def boundary_signed_area(z, loops):
    """Shoelace area of the boundary polygon(s) of a complex embedding."""
    total = 0.0
    for loop in loops:
        w = z[loop]
        total += 0.5 * np.sum(w.real * np.roll(w, -1).imag - w.imag * np.roll(w, -1).real)
    return total


def conformal_energy(mesh, z, L=None, loops=None):
    """E_C = E_D - A of a complex embedding; >= 0, zero iff conformal."""
    if L is None:
        L = cotangent_laplacian(mesh)
    if loops is None:
        loops = boundary_loops(mesh)
    return dirichlet_energy(L, z) - boundary_signed_area(z, loops)


def default_pins(loop, vertices):
    """Two boundary vertices at (approximately) half-perimeter separation."""
    pts = vertices[loop]
    seg = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    half = cum[-1] / 2.0
    j = int(np.argmin(np.abs(cum[:-1] - half)))
    if j == 0:
        j = len(loop) // 2
    return int(loop[0]), int(loop[j])


def flatten_free_boundary(mesh, pins=None, pin_targets=(0.0 + 0.0j, 1.0 + 0.0j),
                          residual_tol=1e-10):
    """Free-boundary conformal flattening of a disk-type mesh.

    Parameters
    ----------
    mesh : TriMesh
        Disk-type submesh.
    pins : (int, int) or None
        Boundary vertex indices to pin. Defaults to two vertices at
        half-perimeter separation along the boundary.
    pin_targets : (complex, complex)
        Target positions of the pinned vertices.

    Returns
    -------
    (n,) complex ndarray of vertex positions; total signed area positive.
    """
    loops = boundary_loops(mesh)
    if len(loops) != 1:
        raise MeshError(f"flattening needs one boundary loop, got {len(loops)}")
    loop = loops[0]
    if pins is None:
        pins = default_pins(loop, mesh.vertices)
    p0, p1 = pins
    bset = set(int(x) for x in loop)
    if p0 == p1 or p0 not in bset or p1 not in bset:
        raise MeshError("pins must be two distinct boundary vertices")
    t0, t1 = complex(pin_targets[0]), complex(pin_targets[1])
    if t0 == t1:
        raise MeshError("pin targets must be distinct")

    n = mesh.n_vertices
    L = cotangent_laplacian(mesh)
    M = area_matrix(mesh, loops)
    C = sparse.block_diag([L, L], format="csr") - 2.0 * M

    fixed = np.array([p0, p1, p0 + n, p1 + n])
    fixed_vals = np.array([t0.real, t1.real, t0.imag, t1.imag])
    free = np.setdiff1d(np.arange(2 * n), fixed)
    Cff = C[free][:, free].tocsc()
    rhs = -C[free][:, fixed] @ fixed_vals
    sol = spsolve(Cff, rhs)
    if not np.all(np.isfinite(sol)):
        raise SolveError("singular constrained system in conformal flattening")
    res = np.linalg.norm(Cff @ sol - rhs)
    ref = np.linalg.norm(rhs)
    if ref > 0 and res > max(residual_tol * ref, 1e3 * residual_tol * np.linalg.norm(sol)):
        raise SolveError(f"flattening residual {res:.3e} above tolerance")

    xy = np.empty(2 * n)
    xy[free] = sol
    xy[fixed] = fixed_vals
    z = xy[:n] + 1j * xy[n:]

    area = boundary_signed_area(z, loops)
    if area <= 0:
        raise MeshError("flattening produced nonpositive signed area "
                        "(inconsistent input orientation)")
    scale2 = float(np.max(np.abs(z)) ** 2)
    ec = conformal_energy(mesh, z, L=L, loops=loops)
    if ec < -1e-8 * scale2:
        raise SolveError(f"conformal energy {ec:.3e} below lower bound")
    return z
