"""Distortion measurement and Mobius post-optimization of area distortion.

Angular distortion is the per-corner difference (degrees) between the
parameterized and the original angle; area distortion the per-face log of
the globally-normalized area ratio. Spherical parameterizations measure
angles between great-circle tangents and use the Euclidean area of the
inscribed triangle (documented convention).
"""

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.spatial import ConvexHull

from .assemble import stereographic_inverse, stereographic_project
from .flatten import conformal_energy  # noqa: F401  (re-exported for reports)
from .welding import mobius_apply


def _angles_from_edges(u, v):
    """Angle at a corner given edge vectors u, v (rows)."""
    nu = np.linalg.norm(u, axis=-1)
    nv = np.linalg.norm(v, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        c = np.einsum("...i,...i->...", u, v) / (nu * nv)
    return np.arccos(np.clip(c, -1.0, 1.0)), (nu == 0) | (nv == 0)


def corner_angles(points, faces):
    """(m, 3) corner angles of a 2D/3D vertex array, plus degeneracy mask."""
    p = np.asarray(points)
    if np.iscomplexobj(p) or p.ndim == 1:  # complex planar coordinates
        p = np.column_stack([p.real, p.imag])
    p = np.asarray(p, dtype=np.float64)
    tri = p[np.asarray(faces)]
    ang = np.empty((len(tri), 3))
    bad = np.zeros((len(tri), 3), dtype=bool)
    for i in range(3):
        u = tri[:, (i + 1) % 3] - tri[:, i]
        v = tri[:, (i + 2) % 3] - tri[:, i]
        ang[:, i], bad[:, i] = _angles_from_edges(u, v)
    return ang, bad


def corner_angles_sphere(points, faces):
    """Spherical vertex angles via tangent-plane projection of the edges."""
    p = np.asarray(points, dtype=np.float64)
    tri = p[np.asarray(faces)]
    ang = np.empty((len(tri), 3))
    bad = np.zeros((len(tri), 3), dtype=bool)
    for i in range(3):
        a = tri[:, i]
        tb = tri[:, (i + 1) % 3] - np.einsum("ij,ij->i", tri[:, (i + 1) % 3], a)[:, None] * a
        tc = tri[:, (i + 2) % 3] - np.einsum("ij,ij->i", tri[:, (i + 2) % 3], a)[:, None] * a
        ang[:, i], bad[:, i] = _angles_from_edges(tb, tc)
    return ang, bad


def angular_distortion(mesh, param):
    """Per-corner angular distortion in degrees (parameterized minus original).

    param is a GlobalParam or a coordinate array. Corners of degenerate
    parameterized faces are excluded via the returned validity mask.
    """
    coords, mode = _param_coords(param)
    ref, bad_ref = corner_angles(mesh.vertices, mesh.faces)
    if mode == "sphere":
        new, bad_new = corner_angles_sphere(coords, mesh.faces)
    else:
        new, bad_new = corner_angles(coords, mesh.faces)
    d = np.degrees(new - ref)
    valid = ~(bad_ref | bad_new)
    return d.ravel(), valid.ravel()


def _param_coords(param):
    mode = getattr(param, "mode", None)
    coords = getattr(param, "coords", param)
    if mode is None:
        arr = np.asarray(coords)
        mode = "sphere" if (arr.ndim == 2 and arr.shape[1] == 3) else "free"
    if mode == "sphere":
        return np.asarray(coords, dtype=np.float64), mode
    return np.asarray(coords, dtype=np.complex128), mode


def _face_areas(coords, faces, mode):
    if mode == "sphere":
        p = np.asarray(coords)[np.asarray(faces)]
        return 0.5 * np.linalg.norm(np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1)
    z = np.asarray(coords, dtype=np.complex128)[np.asarray(faces)]
    d1 = z[:, 1] - z[:, 0]
    d2 = z[:, 2] - z[:, 0]
    return 0.5 * np.abs(d1.real * d2.imag - d1.imag * d2.real)


def area_distortion(mesh, param):
    """Per-face log of the normalized area ratio (parameterized over original,
    both normalized by total area). Zero-area parameterized faces are flagged
    in the validity mask."""
    coords, mode = _param_coords(param)
    a_new = _face_areas(coords, mesh.faces, mode)
    a_ref = mesh.face_areas()
    valid = a_new > 0
    d = np.zeros(len(a_ref))
    ratio_new = a_new / np.sum(a_new)
    ratio_ref = a_ref / np.sum(a_ref)
    d[valid] = np.log(ratio_new[valid] / ratio_ref[valid])
    return d, valid


def summarize(values):
    """Mean, standard deviation, median and interquartile range (linear
    interpolation quantiles)."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise ValueError("cannot summarize an empty array")
    q25, q50, q75 = np.percentile(v, [25, 50, 75])
    return {
        "mean": float(np.mean(v)),
        "sd": float(np.std(v)),
        "median": float(q50),
        "iqr": float(q75 - q25),
    }


@dataclass
class DistortionReport:
    angular: np.ndarray           # per-corner degrees (valid entries only)
    area: np.ndarray              # per-face log ratios (valid entries only)
    angular_stats: dict
    area_stats: dict
    excluded_corners: int
    excluded_faces: int
    conformal_energy: float = None
    extra: dict = field(default_factory=dict)

    def to_dict(self, histogram_bin=0.1):
        d = np.abs(self.angular)
        if d.size:
            top = max(histogram_bin, float(np.max(d)))
            edges = np.arange(0.0, top + histogram_bin, histogram_bin)
            counts, edges = np.histogram(d, bins=edges)
            hist = {"bin_width": histogram_bin, "start": 0.0,
                    "counts": counts.tolist()}
        else:
            hist = {"bin_width": histogram_bin, "start": 0.0, "counts": []}
        return {
            "angular_abs": self.angular_stats,
            "area_abs": self.area_stats,
            "angular_histogram": hist,
            "excluded_corners": self.excluded_corners,
            "excluded_faces": self.excluded_faces,
            "conformal_energy": self.conformal_energy,
            **self.extra,
        }

    def to_json(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)


def distortion_report(mesh, param, energy=None):
    d, dvalid = angular_distortion(mesh, param)
    da, avalid = area_distortion(mesh, param)
    return DistortionReport(
        angular=d[dvalid],
        area=da[avalid],
        angular_stats=summarize(np.abs(d[dvalid])),
        area_stats=summarize(np.abs(da[avalid])),
        excluded_corners=int(np.sum(~dvalid)),
        excluded_faces=int(np.sum(~avalid)),
        conformal_energy=energy,
    )


# ---------------------------------------------------------------------------
# Mobius post-optimization of area distortion


def _mean_abs_area_distortion(mesh, coords, mode):
    a_new = _face_areas(coords, mesh.faces, mode)
    if np.any(a_new <= 0) or not np.all(np.isfinite(a_new)):
        return np.inf
    a_ref = mesh.face_areas()
    return float(np.mean(np.abs(np.log((a_new / a_new.sum()) / (a_ref / a_ref.sum())))))


def _hull_contains(hull, p):
    return bool(np.all(hull.equations[:, :2] @ p + hull.equations[:, 2] <= 1e-12))


def mobius_area_optimize(mesh, param, seed=0, budget=500, restarts=3):
    """Compose the parameterization with a Mobius transformation minimizing
    mean absolute area distortion.

    free/sphere: full 8-real-parameter Mobius (for spheres applied in the
    stereographic chart); disk: 2-parameter disk automorphism
    (z - alpha) / (1 - conj(alpha) z) with |alpha| < 1. The identity is always
    a candidate, so the objective never increases.

    Returns (new_param_coords, info dict).
    """
    coords, mode = _param_coords(param)
    rng = np.random.default_rng(seed)
    base = _mean_abs_area_distortion(mesh, coords, mode)

    if mode == "sphere":
        z = stereographic_project(coords)
    else:
        z = np.asarray(coords, dtype=np.complex128)
    hull = None
    if mode == "free":
        hull = ConvexHull(np.column_stack([z.real, z.imag]))

    def transform(theta):
        if mode == "disk":
            alpha = complex(theta[0], theta[1])
            if abs(alpha) >= 1:
                return None, abs(alpha)
            co = (1.0, -alpha, -np.conj(alpha), 1.0)
        else:
            a, b = complex(theta[0], theta[1]), complex(theta[2], theta[3])
            c, d = complex(theta[4], theta[5]), complex(theta[6], theta[7])
            nrm = max(abs(a), abs(b), abs(c), abs(d))
            if nrm == 0 or abs(a * d - b * c) < 1e-10 * nrm * nrm:
                return None, 0.0
            co = (a, b, c, d)
            if mode == "free" and abs(c) > 1e-14 * nrm:
                pole = -d / c
                if _hull_contains(hull, np.array([pole.real, pole.imag])):
                    return None, 0.0
        w = mobius_apply(co, z)
        if mode == "sphere":
            pts = stereographic_inverse(w)
            return pts / np.linalg.norm(pts, axis=1)[:, None], 0.0
        if not np.all(np.isfinite(w.real) & np.isfinite(w.imag)):
            return None, 0.0
        return w, 0.0

    def objective(theta):
        cand, pen = transform(theta)
        if cand is None:
            return 1e6 * (1.0 + pen)
        return _mean_abs_area_distortion(mesh, cand, mode)

    if mode == "disk":
        starts = [np.zeros(2)] + [rng.uniform(-0.4, 0.4, 2) for _ in range(restarts)]
    else:
        ident = np.array([1, 0, 0, 0, 0, 0, 1, 0], dtype=float)
        starts = [ident] + [ident + rng.normal(scale=0.3, size=8) for _ in range(restarts)]
    maxfev = max(50, budget // len(starts))

    best_theta, best_val = None, base
    for x0 in starts:
        res = minimize(objective, x0, method="Nelder-Mead",
                       options={"maxfev": maxfev, "xatol": 1e-8, "fatol": 1e-10})
        if res.fun < best_val:
            best_val, best_theta = float(res.fun), res.x

    info = {"pre": base, "post": best_val, "improved": best_theta is not None}
    if best_theta is None:
        return coords, info
    new_coords, _ = transform(best_theta)
    if mode == "disk":
        # automorphism keeps |z| <= 1; renormalize boundary drift from rounding
        info["alpha"] = [float(best_theta[0]), float(best_theta[1])]
    return new_coords, info
