"""Interior reconstruction and global assembly.

Each submesh's interior is rebuilt by a cotangent-Laplacian harmonic solve
with the welded boundary as Dirichlet data. Bijectivity is checked through
the Beltrami coefficient of the inverse map and repaired, if needed, by a
linear Beltrami solve (divergence-form elliptic system whose coefficients
come from the capped Beltrami field) with the boundary held fixed. Sphere
mode finishes with an inverse stereographic projection.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import spsolve

from .flatten import SolveError, cotangent_laplacian
from .mesh import boundary_loops

MU_CAP = 0.95


def harmonic_solve(mesh, boundary_idx, boundary_vals, residual_tol=1e-10):
    """Dirichlet harmonic extension of boundary values into the mesh interior.

    boundary_idx are local vertex indices; boundary_vals complex. Returns the
    full complex embedding.
    """
    n = mesh.n_vertices
    boundary_idx = np.asarray(boundary_idx, dtype=np.int64)
    boundary_vals = np.asarray(boundary_vals, dtype=np.complex128)
    if not np.all(np.isfinite(boundary_vals.real) & np.isfinite(boundary_vals.imag)):
        raise SolveError("non-finite boundary data for harmonic solve")
    L = cotangent_laplacian(mesh)
    z = np.zeros(n, dtype=np.complex128)
    z[boundary_idx] = boundary_vals
    interior = np.setdiff1d(np.arange(n), boundary_idx)
    if len(interior) == 0:
        return z
    Lii = L[interior][:, interior].tocsc()
    rhs = -(L[interior][:, boundary_idx] @ boundary_vals)
    sol = spsolve(Lii, rhs)
    if not np.all(np.isfinite(sol.real) & np.isfinite(sol.imag)):
        raise SolveError("singular harmonic system")
    res = np.linalg.norm(Lii @ sol - rhs)
    ref = np.linalg.norm(rhs)
    if ref > 0 and res > max(residual_tol * ref, 1e3 * residual_tol * np.linalg.norm(sol)):
        raise SolveError(f"harmonic residual {res:.3e} above tolerance")
    z[interior] = sol
    return z


def face_layout(mesh):
    """Isometric per-face 2D coordinates of a 3D mesh: (m, 3) complex array
    with corner 0 at the origin and corner 1 on the positive real axis."""
    v = mesh.vertices
    f = mesh.faces
    e1 = v[f[:, 1]] - v[f[:, 0]]
    e2 = v[f[:, 2]] - v[f[:, 0]]
    x1 = np.linalg.norm(e1, axis=1)
    x2 = np.einsum("ij,ij->i", e2, e1) / x1
    y2 = np.linalg.norm(np.cross(e1, e2), axis=1) / x1
    out = np.zeros((len(f), 3), dtype=np.complex128)
    out[:, 1] = x1
    out[:, 2] = x2 + 1j * y2
    return out


def _face_corners(coords, faces):
    z = np.asarray(coords, dtype=np.complex128)
    return z[np.asarray(faces)]


def beltrami_per_face(source, target, faces=None):
    """Per-face Beltrami coefficient of the piecewise-linear map source -> target.

    source/target are either per-vertex complex coordinates (with faces) or
    per-face (m, 3) complex corner arrays.
    """
    s = _face_corners(source, faces) if faces is not None else np.asarray(source)
    t = _face_corners(target, faces) if faces is not None else np.asarray(target)
    d1 = s[:, 1] - s[:, 0]
    d2 = s[:, 2] - s[:, 0]
    e1 = t[:, 1] - t[:, 0]
    e2 = t[:, 2] - t[:, 0]
    det = d1 * np.conj(d2) - np.conj(d1) * d2
    if np.any(det == 0):
        bad = int(np.nonzero(det == 0)[0][0])
        raise SolveError(f"degenerate source triangle {bad} in Beltrami computation")
    fz = (e1 * np.conj(d2) - np.conj(d1) * e2) / det
    fzb = (d1 * e2 - e1 * d2) / det
    with np.errstate(divide="ignore", invalid="ignore"):
        mu = np.where(fz == 0, np.inf, fzb / np.where(fz == 0, 1, fz))
    return mu


def signed_areas(coords, faces):
    """Signed areas of faces of a planar (complex) embedding."""
    z = _face_corners(coords, faces)
    d1 = z[:, 1] - z[:, 0]
    d2 = z[:, 2] - z[:, 0]
    return 0.5 * (d1.real * d2.imag - d1.imag * d2.real)


@dataclass
class BijectivityReport:
    bad_faces: np.ndarray
    max_mu: float
    threshold: float

    @property
    def ok(self):
        return len(self.bad_faces) == 0


def check_bijectivity(mu, threshold=0.99):
    """Faces whose Beltrami magnitude reaches the threshold (folded or nearly)."""
    mag = np.abs(np.asarray(mu))
    mag = np.where(np.isfinite(mag), mag, np.inf)
    bad = np.nonzero(mag >= threshold)[0]
    return BijectivityReport(bad, float(np.max(mag)) if len(mag) else 0.0, threshold)


def lbs_stiffness(coords, faces, mu):
    """Stiffness matrix of the divergence-form operator whose solutions have
    Beltrami coefficient mu on the given planar mesh (linear elements).

    Absolute face areas are used so folded configurations stay solvable.
    """
    z = _face_corners(coords, faces)
    rho, tau = mu.real, mu.imag
    den = np.maximum(1.0 - rho * rho - tau * tau, 1e-12)
    a1 = ((rho - 1.0) ** 2 + tau * tau) / den
    a2 = -2.0 * tau / den
    a3 = ((1.0 + rho) ** 2 + tau * tau) / den

    area = 0.5 * ((z[:, 1] - z[:, 0]).real * (z[:, 2] - z[:, 0]).imag
                  - (z[:, 1] - z[:, 0]).imag * (z[:, 2] - z[:, 0]).real)
    s = np.sign(area)
    s[s == 0] = 1.0
    absarea = np.maximum(np.abs(area), 1e-300)

    # hat-function gradients: grad_i = rot90(z_{i+2} - z_{i+1}) / (2 area)
    n = len(np.atleast_1d(coords))
    rows, cols, vals = [], [], []
    grads = []
    for i in range(3):
        e = z[:, (i + 2) % 3] - z[:, (i + 1) % 3]
        gx = -e.imag / (2.0 * area)
        gy = e.real / (2.0 * area)
        grads.append((gx, gy))
    for i in range(3):
        gxi, gyi = grads[i]
        for j in range(3):
            gxj, gyj = grads[j]
            q = (a1 * gxi * gxj + a2 * (gxi * gyj + gyi * gxj) + a3 * gyi * gyj)
            rows.append(np.asarray(faces)[:, i])
            cols.append(np.asarray(faces)[:, j])
            vals.append(q * absarea)
    K = sparse.csr_matrix((np.concatenate(vals),
                           (np.concatenate(rows), np.concatenate(cols))),
                          shape=(n, n))
    return K


@dataclass
class RepairReport:
    iterations: int
    cleared: bool
    remaining_faces: np.ndarray
    initial_flips: int


def qc_correct(layout, faces, embedding, fixed_idx, max_iter=5, cap=MU_CAP):
    """Remove fold-overs from a planar embedding by quasi-conformal composition.

    layout: (m, 3) complex per-face isometric coordinates of the surface
    (the reference the embedding parameterizes). The Beltrami coefficient of
    the inverse map (embedding -> surface) is capped below 1 and fed to a
    linear Beltrami solve on the embedding with the boundary fixed; repeats
    until no face is flipped or max_iter is reached.
    """
    emb = np.array(embedding, dtype=np.complex128)
    fixed_idx = np.asarray(fixed_idx, dtype=np.int64)
    fixed_vals = emb[fixed_idx].copy()
    flips0 = int(np.sum(signed_areas(emb, faces) <= 0))
    if flips0 == 0:
        return emb, RepairReport(0, True, np.array([], dtype=np.int64), 0)
    n = len(emb)
    free = np.setdiff1d(np.arange(n), fixed_idx)
    faces = np.asarray(faces)
    for it in range(1, max_iter + 1):
        mu_inv = beltrami_per_face(emb[faces], layout)
        mag = np.abs(mu_inv)
        bad = ~np.isfinite(mag) | (mag > cap)
        scalef = np.ones_like(mag)
        scalef[bad] = cap / np.where(np.isfinite(mag) & (mag > 0), mag, np.inf)[bad]
        scalef[~np.isfinite(scalef)] = 0.0
        mu = np.where(np.isfinite(mu_inv), mu_inv, 0.0) * scalef
        K = lbs_stiffness(emb, faces, mu)
        Kff = K[free][:, free].tocsc()
        new = emb.copy()
        for comp in (0, 1):
            g = fixed_vals.real if comp == 0 else fixed_vals.imag
            rhs = -(K[free][:, fixed_idx] @ g)
            sol = spsolve(Kff, rhs)
            if not np.all(np.isfinite(sol)):
                raise SolveError("singular linear Beltrami system during repair")
            if comp == 0:
                new[free] = sol
            else:
                new[free] = new[free].real + 1j * sol
        emb = new
        flipped = np.nonzero(signed_areas(emb, faces) <= 0)[0]
        if len(flipped) == 0:
            return emb, RepairReport(it, True, np.array([], dtype=np.int64), flips0)
    return emb, RepairReport(max_iter, False, flipped, flips0)


# ---------------------------------------------------------------------------
# Stereographic projection


def stereographic_inverse(z):
    """Complex plane (plus infinity) to the unit sphere: 0 -> south pole
    (0,0,-1), infinity -> north pole (0,0,1), unit circle -> equator."""
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    out = np.empty((len(z), 3))
    infm = np.isinf(z.real) | np.isinf(z.imag)
    out[infm] = (0.0, 0.0, 1.0)
    fin = ~infm
    zf = z[fin]
    big = np.abs(zf) > 1.0
    res = np.empty((len(zf), 3))
    s = np.abs(zf[~big]) ** 2
    res[~big, 0] = 2 * zf[~big].real / (1 + s)
    res[~big, 1] = 2 * zf[~big].imag / (1 + s)
    res[~big, 2] = (s - 1) / (1 + s)
    w = 1.0 / zf[big]
    sw = np.abs(w) ** 2
    res[big, 0] = 2 * w.real / (1 + sw)
    res[big, 1] = -2 * w.imag / (1 + sw)
    res[big, 2] = (1 - sw) / (1 + sw)
    out[fin] = res
    return out


def stereographic_project(p):
    """Unit sphere to the complex plane; the north pole maps to infinity."""
    p = np.atleast_2d(np.asarray(p, dtype=np.float64))
    den = 1.0 - p[:, 2]
    out = np.empty(len(p), dtype=np.complex128)
    pole = den == 0
    out[pole] = complex(np.inf, 0.0)
    out[~pole] = (p[~pole, 0] + 1j * p[~pole, 1]) / den[~pole]
    return out


def spherical_flips(points3, faces):
    """Indices of inverted spherical triangles (negative triple product)."""
    p = np.asarray(points3)[np.asarray(faces)]
    det = np.einsum("ij,ij->i", p[:, 0], np.cross(p[:, 1], p[:, 2]))
    return np.nonzero(det < 0)[0]


# ---------------------------------------------------------------------------
# Stitching


@dataclass
class GlobalParam:
    mode: str                     # free | disk | sphere
    coords: np.ndarray            # complex (n,) for free/disk, float (n, 3) for sphere
    flipped_faces: np.ndarray
    provenance: np.ndarray        # submesh id per parent vertex
    seam_max_dev: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    @property
    def uv(self):
        """(n, 2) real view of planar coordinates."""
        z = np.asarray(self.coords, dtype=np.complex128)
        return np.column_stack([z.real, z.imag])


def stitch_global(partition, embeddings, mode, snap_tol=1e-8, hard_tol=1e-6,
                  boundary_circle_tol=1e-9):
    """Combine per-submesh embeddings into one coordinate per parent vertex.

    Seam vertices (owned by several submeshes) must agree to hard_tol
    relative; their copies are averaged (snap). Disk mode verifies the global
    boundary sits on the unit circle; sphere mode applies the inverse
    stereographic projection and checks spherical orientation.
    """
    mesh = partition.mesh
    n = mesh.n_vertices
    vals = np.zeros(n, dtype=np.complex128)
    wsum = np.zeros(n)
    prov = np.full(n, -1, dtype=np.int64)
    spread = np.zeros(n)
    first = np.zeros(n, dtype=np.complex128)
    scale = 0.0
    for si, (vmap, emb) in enumerate(zip(partition.vertex_maps, embeddings)):
        emb = np.asarray(emb, dtype=np.complex128)
        fresh = prov[vmap] < 0
        prov[vmap[fresh]] = si
        first[vmap[fresh]] = emb[fresh]
        dev = np.abs(emb - first[vmap])
        spread[vmap] = np.maximum(spread[vmap], dev)
        vals[vmap] += emb
        wsum[vmap] += 1.0
        scale = max(scale, float(np.max(np.abs(emb))))
    if np.any(wsum == 0):
        raise SolveError("some parent vertices received no coordinates")
    seam_max = float(np.max(spread))
    if scale > 0 and seam_max > hard_tol * scale:
        raise SolveError(f"seam disagreement {seam_max:.3e} exceeds "
                         f"{hard_tol:g} x scale {scale:.3e} (welding bug upstream)")
    coords = vals / wsum

    diagnostics = {"seam_max_dev": seam_max, "scale": scale}
    if mode == "sphere":
        # positively-oriented planar charts + south-pole projection convention
        # give inward sphere orientation; conjugate to orient outward
        pts = stereographic_inverse(np.conj(coords))
        nrm = np.linalg.norm(pts, axis=1)
        pts /= nrm[:, None]
        flips = spherical_flips(pts, mesh.faces)
        return GlobalParam(mode, pts, flips, prov, seam_max, diagnostics)
    if mode == "disk":
        bloop = boundary_loops(mesh)[0]
        dev = np.max(np.abs(np.abs(coords[bloop]) - 1.0))
        if dev > boundary_circle_tol:
            raise SolveError(f"disk boundary off the unit circle by {dev:.3e}")
        diagnostics["boundary_circle_dev"] = float(dev)
    flips = np.nonzero(signed_areas(coords, mesh.faces) <= 0)[0]
    return GlobalParam(mode, coords, flips, prov, seam_max, diagnostics)
