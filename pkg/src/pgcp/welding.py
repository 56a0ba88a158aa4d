"""Conformal maps of the extended complex plane for boundary welding.

All welding machinery works on marked point sets rather than regions: lists
of complex boundary samples (the point at infinity is first-class) with a
per-point side tag recording whether the point currently sits on the
imaginary axis, and on which half. The tags make every square-root branch
decision deterministic:

* opening steps (sqrt(L(z)^2 - 1)) send every on-axis point back onto the
  chosen branch's half-axis and keep everything else in the open right
  half-plane (principal square root);
* closing steps (sqrt(T(z)^2 + 1)) resolve on-axis points by position:
  |t| > 1 stays on its own half-axis, |t| < 1 comes off the axis onto the
  positive real line. This is the continuous extension along the axis and
  handles the far end of the slit (the shared point at infinity) without
  any side ambiguity.

Everything is logged as a sequence of primitive map records so the composed
transformation can be replayed on any other point set (apply_log).
"""

from dataclasses import dataclass, field

import numpy as np

GENERIC = 0   # off the imaginary axis
UPPER = 1     # on the upper half of the imaginary axis
LOWER = -1    # on the lower half

INF = np.complex128(complex(np.inf, 0.0))

_BIG = 1e100  # switch to overflow-safe formulas beyond this magnitude


class WeldError(RuntimeError):
    """Raised when welding preconditions or numerical guards fail."""


def _as_points(z):
    return np.atleast_1d(np.asarray(z, dtype=np.complex128))


def _finite(z):
    return np.isfinite(z.real) & np.isfinite(z.imag)


def is_infinity(z):
    """True where z represents the point at infinity."""
    z = np.asarray(z)
    return np.isinf(z.real) | np.isinf(z.imag)


def _is_inf_scalar(z):
    return bool(np.isinf(np.real(z)) or np.isinf(np.imag(z)))


def _scale(z):
    fin = _finite(z)
    if not fin.any():
        return 1.0
    s = float(np.max(np.abs(z[fin])))
    return s if s > 0 else 1.0


def _check_nan(z, where):
    if np.isnan(z.real).any() or np.isnan(z.imag).any():
        raise WeldError(f"numerical breakdown (NaN) during {where}")


def _c2l(c):
    c = complex(c)
    return [c.real, c.imag]


# ---------------------------------------------------------------------------
# Mobius transformations


def mobius_apply(coeffs, z):
    """Apply (a z + b) / (c z + d) with exact handling of infinity and the pole."""
    a, b, c, d = (complex(x) for x in coeffs)
    if a * d - b * c == 0:
        raise WeldError("degenerate Mobius coefficients (ad - bc = 0)")
    z = _as_points(z)
    out = np.empty_like(z)
    infm = is_infinity(z)
    out[infm] = a / c if c != 0 else INF
    fin = ~infm
    den = c * z[fin] + d
    num = a * z[fin] + b
    pole = den == 0
    vals = np.empty_like(den)
    vals[pole] = INF
    vals[~pole] = num[~pole] / den[~pole]
    out[fin] = vals
    return out


def mobius_from_three_points(zs, ws):
    """Coefficients of the unique Mobius map sending z_i to w_i (i = 1, 2, 3).

    Any entry may be the point at infinity. Coefficients are normalized to
    unit maximum modulus.
    """
    zs = [np.complex128(z) for z in zs]
    ws = [np.complex128(w) for w in ws]
    for trip in (zs, ws):
        for i in range(3):
            for j in range(i + 1, 3):
                if (_is_inf_scalar(trip[i]) and _is_inf_scalar(trip[j])) or \
                        (not _is_inf_scalar(trip[i]) and not _is_inf_scalar(trip[j])
                         and trip[i] == trip[j]):
                    raise WeldError("three-point Mobius needs distinct points")

    def to_std(z1, z2, z3):
        # Mobius taking (z1, z2, z3) to (0, 1, inf)
        if _is_inf_scalar(z1):
            return (0, z2 - z3, 1, -z3)
        if _is_inf_scalar(z2):
            return (1, -z1, 1, -z3)
        if _is_inf_scalar(z3):
            return (1, -z1, 0, z2 - z1)
        return (z2 - z3, -z1 * (z2 - z3), z2 - z1, -z3 * (z2 - z1))

    a1, b1, c1, d1 = to_std(*zs)
    a2, b2, c2, d2 = to_std(*ws)
    # inverse of the w-side map composed with the z-side map
    a = d2 * a1 - b2 * c1
    b = d2 * b1 - b2 * d1
    c = -c2 * a1 + a2 * c1
    d = -c2 * b1 + a2 * d1
    norm = max(abs(a), abs(b), abs(c), abs(d))
    return (a / norm, b / norm, c / norm, d / norm)


def mobius_to_unit(xi):
    """Mobius fixing 0, sending xi to 1 and the imaginary axis to itself.

    Used as the zip-alignment step before each opening map. Requires
    Re(xi) > 0.
    """
    xi = complex(xi)
    if not np.isfinite(xi.real) or xi.real <= 0:
        raise WeldError("alignment target must lie strictly in the right half-plane")
    s = abs(xi) ** 2
    p = xi.real / s
    q = xi.imag / s
    return (p, 0.0, q * 1j, 1.0)


def mobius_pair_align(alpha, beta):
    """Mobius sending (alpha, 0, beta) to (i, 0, -i) for alpha = ai on the
    upper and beta = bi on the lower imaginary axis, preserving the axis.

    The welding loop itself uses the same coefficients in generalized form
    (CloseRec), where points may have wrapped past infinity along the axis
    circle; this public map enforces the plain a > 0 > b configuration."""
    a = complex(alpha).imag
    b = complex(beta).imag
    if not a > 0:
        raise WeldError("alpha must lie on the positive imaginary axis")
    if not b < 0:
        raise WeldError("beta must lie on the negative imaginary axis")
    c = -2 * a * b / (a - b)
    d = (a + b) / (a - b)
    return (1.0, 0.0, -d * 1j, c)


def _axis_walk_key(t):
    """Sort key for positions on the imaginary axis circle, walking upward
    from 0: positive heights first, then infinity, then negative heights."""
    if np.isinf(t):
        return (1, 0.0)
    if t > 0:
        return (0, t)
    return (2, t)


def cross_ratio(z1, z2, z3, z4):
    """(z1 - z3)(z2 - z4) / ((z1 - z4)(z2 - z3)), infinity-aware."""
    def diff(u, v):
        if _is_inf_scalar(u) or _is_inf_scalar(v):
            return None  # cancels against the matching factor
        return complex(u) - complex(v)

    n1, n2 = diff(z1, z3), diff(z2, z4)
    d1, d2 = diff(z1, z4), diff(z2, z3)
    num = (n1 if n1 is not None else 1) * (n2 if n2 is not None else 1)
    den = (d1 if d1 is not None else 1) * (d2 if d2 is not None else 1)
    if _is_inf_scalar(z1):
        num = n2 if n2 is not None else 1
        den = d2 if d2 is not None else 1
    elif _is_inf_scalar(z2):
        num = n1 if n1 is not None else 1
        den = d1 if d1 is not None else 1
    elif _is_inf_scalar(z3):
        num = n2 if n2 is not None else 1
        den = d1 if d1 is not None else 1
    elif _is_inf_scalar(z4):
        num = n1 if n1 is not None else 1
        den = d2 if d2 is not None else 1
    return num / den


# ---------------------------------------------------------------------------
# Bare slit maps


def opening_map(z, branch=UPPER):
    """z -> sqrt(z^2 - 1); purely imaginary results take the branch's half-axis."""
    return _slit_sqrt(z, -1.0, branch)


def closing_map(z, branch=UPPER):
    """z -> sqrt(z^2 + 1); purely imaginary results take the branch's half-axis."""
    return _slit_sqrt(z, 1.0, branch)


def _slit_sqrt(z, sign, branch):
    z = _as_points(z)
    out = np.empty_like(z)
    infm = is_infinity(z)
    out[infm] = INF
    fin = ~infm
    r = np.sqrt(z[fin] * z[fin] + sign)
    onaxis = r.real == 0
    r[onaxis] = branch * 1j * np.abs(r[onaxis].imag)
    out[fin] = r
    return out


# ---------------------------------------------------------------------------
# Primitive map records


@dataclass
class MobiusRec:
    """General Mobius step. axis=True marks maps that send the extended
    imaginary axis to itself, so tagged points stay exactly on it."""
    a: complex
    b: complex
    c: complex
    d: complex
    axis: bool = False
    pins: tuple = ()  # ((z, w, side), ...) bitwise-exact special values

    def __post_init__(self):
        if self.a * self.d - self.b * self.c == 0:
            raise WeldError("degenerate Mobius coefficients")

    def apply(self, z, side):
        out = np.empty_like(z)
        new_side = np.zeros_like(side)
        done = np.zeros(z.shape, dtype=bool)
        for pz, pw, ps in self.pins:
            m = (z == pz) & ~done
            out[m] = pw
            new_side[m] = ps
            done |= m
        infm = is_infinity(z) & ~done
        if infm.any():
            img = self.a / self.c if self.c != 0 else INF
            out[infm] = img
            if self.axis:
                new_side[infm] = side[infm]
            done |= infm
        rest = ~done
        if rest.any():
            num = self.a * z[rest] + self.b
            den = self.c * z[rest] + self.d
            vals = np.where(den == 0, INF, num / np.where(den == 0, 1, den))
            out[rest] = vals
        if self.axis:
            lab = (side != 0) & rest
            labf = lab & _finite(out)
            forced = 1j * out[labf].imag
            out[labf] = forced
            new_side[labf] = np.where(forced.imag > 0, UPPER,
                                      np.where(forced.imag < 0, LOWER, side[labf]))
            labi = lab & ~_finite(out)
            new_side[labi] = side[labi]
        return out, new_side

    def to_dict(self):
        return {"kind": "mobius", "a": _c2l(self.a), "b": _c2l(self.b),
                "c": _c2l(self.c), "d": _c2l(self.d), "axis": self.axis}


@dataclass
class SqrtRatioRec:
    """Initial zip step z -> sqrt((z - z1)/(z - z0)); z0 to infinity, z1 to 0."""
    z0: complex
    z1: complex
    branch: int

    def apply(self, z, side):
        out = np.empty_like(z)
        new_side = np.zeros_like(side)
        done = np.zeros(z.shape, dtype=bool)
        for pz, pw, ps in ((self.z0, INF, self.branch), (self.z1, 0j, self.branch),
                           (INF, 1.0 + 0j, GENERIC)):
            m = (z == pz) & ~done
            out[m] = pw
            new_side[m] = ps
            done |= m
        rest = ~done
        if rest.any():
            zr = z[rest]
            out[rest] = np.sqrt((zr - self.z1) / (zr - self.z0))
        return out, new_side

    def to_dict(self):
        return {"kind": "sqrt_ratio", "z0": _c2l(self.z0), "z1": _c2l(self.z1),
                "branch": self.branch}


@dataclass
class OpenRec:
    """Opening step sqrt(L(z)^2 - 1) with L = mobius_to_unit(xi).

    xi is sent exactly to 0. On-axis points stay on the axis with the sign
    of their position preserved (the continuous boundary extension of the
    principal square root); only the previous zip front at 0, where the new
    slit opens, is ambiguous and takes the branch's side.
    """
    xi: complex
    branch: int

    def apply(self, z, side):
        xi = complex(self.xi)
        s2 = abs(xi) ** 2
        p = xi.real / s2
        q = xi.imag / s2
        out = np.empty_like(z)
        new_side = np.zeros_like(side)
        done = np.zeros(z.shape, dtype=bool)
        pin = z == xi
        out[pin] = 0j
        new_side[pin] = self.branch
        done |= pin

        lab = (side != 0) & ~done
        if lab.any():
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                t = np.where(is_infinity(z[lab]), np.inf, z[lab].imag)
                den = 1.0 - q * t
                t2 = np.where(den == 0, np.inf, p * t / np.where(den == 0, 1, den))
                t2 = np.where(np.isinf(t), (-p / q if q != 0 else np.inf), t2)
            vals = np.empty(t2.shape, dtype=np.complex128)
            sides_l = np.zeros(t2.shape, dtype=side.dtype)
            finm = np.isfinite(t2)
            vals[~finm] = INF
            sides_l[~finm] = side[lab][~finm]
            sgn = np.where(t2[finm] == 0, self.branch, np.sign(t2[finm]))
            vals[finm] = sgn * 1j * np.hypot(t2[finm], 1.0)
            sides_l[finm] = sgn.astype(side.dtype)
            out[lab] = vals
            new_side[lab] = sides_l
            done |= lab

        rest = ~done
        if rest.any():
            zr = z[rest]
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                infm = is_infinity(zr)
                den = 1.0 + q * 1j * zr
                L = np.where(den == 0, INF, p * zr / np.where(den == 0, 1, den))
                if q != 0:
                    L = np.where(infm, -(p / q) * 1j, L)
                else:
                    L = np.where(infm, INF, L)
            Lfin = _finite(L)
            big = Lfin & (np.abs(L) > _BIG)
            small = Lfin & ~big
            vals = np.empty_like(L)
            vals[~Lfin] = INF
            # sqrt(L^2 - 1) ~ L beyond _BIG (principal branch keeps Re >= 0)
            vals[big] = np.where(L[big].real >= 0, L[big], -L[big])
            vals[small] = np.sqrt(L[small] * L[small] - 1.0)
            out[rest] = vals
        return out, new_side

    def to_dict(self):
        return {"kind": "open", "xi": _c2l(self.xi), "branch": self.branch}


@dataclass
class CloseRec:
    """Closing step sqrt(T(z)^2 + 1) with T = mobius_pair_align(ai, bi).

    The aligned pair (ai, bi) goes exactly to 0. Other on-axis points are
    resolved by position along the axis circle: |t'| > 1 stays on its half,
    |t'| < 1 comes off onto the positive real line.
    """
    ai: float
    bi: float

    def apply(self, z, side):
        a, b = self.ai, self.bi
        c = -2 * a * b / (a - b)
        d = (a + b) / (a - b)
        out = np.empty_like(z)
        new_side = np.zeros_like(side)
        done = np.zeros(z.shape, dtype=bool)
        for pz in (np.complex128(complex(0.0, a)), np.complex128(complex(0.0, b))):
            m = (z == pz) & ~done
            out[m] = 0j
            done |= m

        lab = (side != 0) & ~done
        if lab.any():
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                t = np.where(is_infinity(z[lab]), np.inf, z[lab].imag)
                den = c + d * t
                t2 = np.where(den == 0, np.inf, t / np.where(den == 0, 1, den))
                t2 = np.where(np.isinf(t), (1.0 / d if d != 0 else np.inf), t2)
            vals = np.empty(t2.shape, dtype=np.complex128)
            sides_l = np.zeros(t2.shape, dtype=side.dtype)
            infm = ~np.isfinite(t2)
            vals[infm] = INF
            sides_l[infm] = side[lab][infm]
            onax = ~infm & (np.abs(t2) > 1)
            tt = t2[onax]
            with np.errstate(over="ignore"):
                mag = np.where(np.abs(tt) < _BIG,
                               np.sqrt(np.maximum(tt * tt - 1.0, 0.0)),
                               np.abs(tt))
            vals[onax] = np.sign(tt) * 1j * mag
            sides_l[onax] = np.where(tt > 0, UPPER, LOWER)
            offax = ~infm & (np.abs(t2) <= 1)
            vals[offax] = np.sqrt(np.maximum(1.0 - t2[offax] * t2[offax], 0.0))
            out[lab] = vals
            new_side[lab] = sides_l
            done |= lab

        rest = ~done
        if rest.any():
            zr = z[rest]
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                infm = is_infinity(zr)
                den = c - d * 1j * zr
                T = np.where(den == 0, INF, zr / np.where(den == 0, 1, den))
                if d != 0:
                    T = np.where(infm, (1.0 / d) * 1j, T)
                else:
                    T = np.where(infm, INF, T)
            Tfin = _finite(T)
            big = Tfin & (np.abs(T) > _BIG)
            small = Tfin & ~big
            vals = np.empty_like(T)
            vals[~Tfin] = INF
            # sqrt(T^2 + 1) ~ T beyond _BIG (principal branch keeps Re >= 0)
            vals[big] = np.where(T[big].real >= 0, T[big], -T[big])
            vals[small] = np.sqrt(T[small] * T[small] + 1.0)
            out[rest] = vals
        return out, new_side

    def to_dict(self):
        return {"kind": "close", "ai": self.ai, "bi": self.bi}


@dataclass
class SquareMobiusRec:
    """Final map (z / (1 - z/q))^2: q to infinity, the axis onto the negative
    real line, the tracked region onto the upper half-plane."""
    q: complex

    def apply(self, z, side):
        out = np.empty_like(z)
        new_side = np.zeros_like(side)
        done = np.zeros(z.shape, dtype=bool)
        q = np.complex128(self.q)
        q_inf = _is_inf_scalar(q)
        m = (z == q)
        out[m] = INF
        done |= m
        if not q_inf:
            infm = is_infinity(z) & ~done
            out[infm] = q * q
            done |= infm
        lab = (side != 0) & ~done
        if lab.any():
            t = z[lab].imag
            if q_inf:
                t2 = t
            else:
                den = 1.0 - t / q.imag
                with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                    t2 = np.where(den == 0, np.inf, t / np.where(den == 0, 1, den))
            with np.errstate(over="ignore"):
                vals = np.where(np.isfinite(t2), -(t2 * t2) + 0j, INF)
            out[lab] = vals
            done |= lab
        rest = ~done
        if rest.any():
            zr = z[rest]
            if q_inf:
                mm = zr
            else:
                den = 1.0 - zr / q
                mm = np.where(den == 0, INF, zr / np.where(den == 0, 1, den))
            with np.errstate(over="ignore", invalid="ignore"):
                vals = mm * mm
            vals[~_finite(vals)] = INF
            out[rest] = vals
        return out, new_side

    def to_dict(self):
        return {"kind": "square_mobius", "q": _c2l(self.q)}


def apply_log(log, points, sides=None):
    """Replay a sequence of primitive map records on a point set.

    Points previously on a zipped slit must come with their side tags
    (UPPER / LOWER); everything else can be GENERIC. Returns (values, sides).
    """
    z = _as_points(points).copy()
    if sides is None:
        s = np.zeros(z.shape, dtype=np.int8)
    else:
        s = np.asarray(sides, dtype=np.int8).copy()
    for rec in log:
        z, s = rec.apply(z, s)
    _check_nan(z, "apply_log")
    return z, s


def log_to_dicts(log):
    """JSON-ready representation of a map log."""
    return [rec.to_dict() for rec in log]


# ---------------------------------------------------------------------------
# Intermediate form (half-unzipped boundary)


@dataclass
class IntermediateForm:
    values: np.ndarray
    sides: np.ndarray
    zipped_count: int
    log: list = field(default_factory=list)


def _zip_points(pts, sides, k, branch, collapse_tol=1e-13):
    """Apply the zip maps g_1 .. g_k in place; returns (values, sides, log).

    After the call, points 0..k sit on the branch's half of the imaginary
    axis (point 0 at its far end, point k at 0) and all other finite points
    have positive real part.
    """
    log = []
    if pts[0] == pts[1]:
        raise WeldError("zip points 0 and 1 coincide")
    rec = SqrtRatioRec(complex(pts[0]), complex(pts[1]), branch)
    pts, sides = rec.apply(pts, sides)
    log.append(rec)
    for j in range(2, k + 1):
        xi = complex(pts[j])
        if sides[j] != 0 or _is_inf_scalar(xi):
            raise WeldError(f"zip point {j} left the right half-plane")
        if not xi.real > 0:
            raise WeldError(f"zip point {j} landed on the imaginary axis "
                            "(duplicate or non-Jordan input)")
        # the frame is self-normalized (front at 0, previous point at +-i),
        # so a tiny |xi| means two zip points genuinely collapsed
        if abs(xi) < collapse_tol:
            raise WeldError(f"zip points {j - 1} and {j} collapsed "
                            f"(spacing below {collapse_tol:g} in the zip frame)")
        rec = OpenRec(xi, branch)
        pts, sides = rec.apply(pts, sides)
        log.append(rec)
    _check_nan(pts, "zipping")
    return pts, sides, log


def intermediate_form(points, k, branch=UPPER):
    """Half-unzip a boundary point sequence: points 0..k onto the imaginary
    axis (point 0 exactly at infinity, point k exactly at 0), the rest into
    the open right half-plane.

    branch selects the half-axis: UPPER for (-1)^(1/2) = i, LOWER for -i.
    """
    pts = _as_points(points).copy()
    branch = UPPER if branch in (UPPER, "plus_i") else LOWER
    if k < 1:
        raise WeldError("zip count must be at least 1")
    if len(pts) < k + 1:
        raise WeldError("need at least k + 1 points")
    sides = np.zeros(len(pts), dtype=np.int8)
    pts, sides, log = _zip_points(pts, sides, k, branch)
    w0 = np.complex128(pts[0])
    if not _is_inf_scalar(w0):
        if w0 == 0:
            raise WeldError("far end of the zip collapsed to 0")
        rec = MobiusRec(1, 0, -1 / w0, 1, axis=True,
                        pins=((w0, INF, branch), (np.complex128(0), np.complex128(0), branch)))
        pts, sides = rec.apply(pts, sides)
        log.append(rec)
    _check_nan(pts, "intermediate form")
    return IntermediateForm(pts, sides, k, log)


# ---------------------------------------------------------------------------
# Partial and closed welding


def _prenormalizer(pts, max_tries=4):
    """Mobius (z - c)/s putting a point set at unit scale around the origin,
    with c nudged deterministically if any sample would land exactly on 0."""
    fin = _finite(pts)
    if not fin.any():
        raise WeldError("no finite boundary points")
    c = complex(np.mean(pts[fin]))
    s = float(np.max(np.abs(pts[fin] - c)))
    if s == 0:
        raise WeldError("degenerate boundary (all points coincide)")
    for _ in range(max_tries):
        if not np.any(pts[fin] == c):
            break
        c += s * (0.0137 + 0.00271j)
    else:
        raise WeldError("could not place tracking origin off the boundary")
    return MobiusRec(1 / s, -c / s, 0, 1)


@dataclass
class WeldResult:
    a: np.ndarray          # transformed a_0 .. a_m
    b: np.ndarray          # transformed b_0 .. b_n
    log_a: list
    log_b: list
    aux_a: np.ndarray      # images of the tracking points (0, infinity)
    aux_b: np.ndarray
    seam_error: float      # max |a_j - b_j| over the shared indices
    k: int


def partial_weld(a_points, b_points, k, hard_tol=1e-6):
    """Weld two boundary point sequences along their shared prefix.

    a_points[0..k] and b_points[0..k] are corresponding samples of the
    shared arc; a traverses its region's boundary with the region on the
    left, b with the region on the right (i.e. the arc runs through both
    lists in the same order, enclosing regions on opposite sides).

    Returns transformed copies of both full sequences with the shared
    samples coinciding, plus the map logs that reproduce each side's
    transformation on any other point.
    """
    a = _as_points(a_points)
    b = _as_points(b_points)
    m = len(a) - 1
    n = len(b) - 1
    if k < 1 or k > min(m, n):
        raise WeldError(f"shared prefix length k={k} out of range")
    # Normalize each side so the tracking points 0 and infinity are generic
    # (raw inputs may contain the origin as a boundary sample).
    pre_a = _prenormalizer(a)
    pre_b = _prenormalizer(b)
    a_norm, _ = pre_a.apply(a, np.zeros(len(a), dtype=np.int8))
    b_norm, _ = pre_b.apply(b, np.zeros(len(b), dtype=np.int8))
    a_full = np.concatenate([a_norm, [np.complex128(0), INF]])
    b_full = np.concatenate([b_norm, [np.complex128(0), INF]])
    A = intermediate_form(a_full, k, UPPER)
    B = intermediate_form(b_full, k, LOWER)
    va, sa = A.values, A.sides
    vb, sb = B.values, B.sides
    log_a = [pre_a] + list(A.log)
    log_b = [pre_b] + list(B.log)

    for j in range(k - 1, 0, -1):
        alpha = np.complex128(va[j])
        beta = np.complex128(vb[j])
        if sa[j] == 0 or _is_inf_scalar(alpha) or alpha.imag == 0:
            raise WeldError(f"alignment point {j} (a side) left the imaginary axis")
        if sb[j] == 0 or _is_inf_scalar(beta) or beta.imag == 0:
            raise WeldError(f"alignment point {j} (b side) left the imaginary axis")
        if not _axis_walk_key(alpha.imag) < _axis_walk_key(beta.imag):
            raise WeldError(f"alignment points {j} not strictly ordered on the "
                            "imaginary axis (invalid correspondence)")
        rec = CloseRec(float(alpha.imag), float(beta.imag))
        va, sa = rec.apply(va, sa)
        vb, sb = rec.apply(vb, sb)
        log_a.append(rec)
        log_b.append(rec)

    qa, qb = np.complex128(va[0]), np.complex128(vb[0])
    if _is_inf_scalar(qa) != _is_inf_scalar(qb) or \
            (not _is_inf_scalar(qa) and abs(qa - qb) > 1e-9 * max(_scale(va), 1.0)):
        raise WeldError("far ends of the two slits diverged")
    rec = SquareMobiusRec(INF if _is_inf_scalar(qa) else qa)
    va, sa = rec.apply(va, sa)
    vb, sb = rec.apply(vb, sb)
    log_a.append(rec)
    log_b.append(rec)

    za, zb = np.complex128(va[m + 1]), np.complex128(vb[n + 1])
    inf_a, inf_b = np.complex128(va[m + 2]), np.complex128(vb[n + 2])
    if _is_inf_scalar(za) or _is_inf_scalar(zb) or _is_inf_scalar(inf_a) \
            or _is_inf_scalar(inf_b):
        raise WeldError("tracking points degenerated during welding")
    zmid = 0.5 * (inf_a + inf_b)
    if za != zb and za != zmid and zb != zmid:
        coeffs = mobius_from_three_points((za, zb, zmid), (-1.0, 1.0, INF))
    elif za != 0:
        # fully symmetric inputs collapse the tracking anchors; fall back to
        # a scaling that pins the a-side tracking origin at -1
        coeffs = (-1.0 / za, 0.0, 0.0, 1.0)
    else:
        coeffs = (1.0, 0.0, 0.0, 1.0)
    rec = MobiusRec(*coeffs)
    va, sa = rec.apply(va, sa)
    vb, sb = rec.apply(vb, sb)
    log_a.append(rec)
    log_b.append(rec)
    _check_nan(va, "partial weld")
    _check_nan(vb, "partial weld")

    with np.errstate(invalid="ignore"):
        seam = np.abs(va[:k + 1] - vb[:k + 1])
    both_inf = is_infinity(va[:k + 1]) & is_infinity(vb[:k + 1])
    seam[both_inf] = 0.0
    seam_error = float(np.max(seam))
    scale = max(_scale(va), _scale(vb))
    if seam_error > hard_tol * scale:
        raise WeldError(f"seam alignment error {seam_error:.3e} exceeds "
                        f"{hard_tol:g} x scale {scale:.3e}")
    return WeldResult(va[:m + 1], vb[:n + 1], log_a, log_b,
                      va[m + 1:], vb[n + 1:], seam_error, k)


def closed_weld(a_points, b_points, hard_tol=1e-6):
    """Weld two full boundary cycles with complete correspondence a_j <-> b_j.

    Equivalent to a partial weld whose shared arc is the entire boundary;
    the welded configuration covers the extended plane, with one side's
    region containing the point at infinity. A final Mobius spreads the seam
    (three index-equidistant seam points onto an equilateral circle triple):
    unlike an open seam, a closed seam has no true corner at the zip's far
    end, and without respreading the square map there leaves the seam
    parameterization extremely nonuniform.
    """
    a = _as_points(a_points)
    b = _as_points(b_points)
    if len(a) != len(b):
        raise WeldError("closed welding needs equal-length boundaries")
    if len(a) < 3:
        raise WeldError("closed welding needs at least 3 boundary points")
    res = partial_weld(a, b, k=len(a) - 1, hard_tol=hard_tol)
    n = len(res.a)
    anchors = (res.a[0], res.a[n // 3], res.a[(2 * n) // 3])
    targets = tuple(np.exp(2j * np.pi * np.arange(3) / 3))
    rec = MobiusRec(*mobius_from_three_points(anchors, targets))
    sides_a = np.zeros(len(res.a) + 2, dtype=np.int8)
    sides_b = np.zeros(len(res.b) + 2, dtype=np.int8)
    va, _ = rec.apply(np.concatenate([res.a, res.aux_a]), sides_a)
    vb, _ = rec.apply(np.concatenate([res.b, res.aux_b]), sides_b)
    res.log_a.append(rec)
    res.log_b.append(rec)
    return WeldResult(va[:-2], vb[:-2], res.log_a, res.log_b,
                      va[-2:], vb[-2:], res.seam_error, res.k)


# ---------------------------------------------------------------------------
# Polygon helpers


def point_in_polygon(poly, p):
    """Even-odd ray-casting test for a complex polygon vertex array."""
    x, y = p.real, p.imag
    xs, ys = poly.real, poly.imag
    x2, y2 = np.roll(xs, -1), np.roll(ys, -1)
    cond = (ys > y) != (y2 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = xs + (y - ys) / (y2 - ys) * (x2 - xs)
    return bool(np.sum(cond & (x < xint)) % 2)


def polygon_interior_point(poly):
    """A point strictly inside a simple polygon (centroid, or edge-midpoint
    offsets as a fallback)."""
    poly = _as_points(poly)
    c = complex(np.mean(poly))
    if point_in_polygon(poly, c):
        return c
    n = len(poly)
    for i in range(n):
        mid = 0.5 * (poly[i] + poly[(i + 1) % n])
        nrm = (poly[(i + 1) % n] - poly[i]) * 1j  # left normal for ccw polygons
        for t in (0.25, 0.05, 0.01):
            cand = mid + t * nrm
            if point_in_polygon(poly, cand):
                return complex(cand)
    raise WeldError("could not locate a point inside the polygon")


# ---------------------------------------------------------------------------
# Geodesic algorithm: boundary to the unit circle


def geodesic_to_circle(points, interior=None):
    """Map a Jordan polygon's vertices onto the unit circle.

    Runs the full zip over all points, the half-plane closing square map and
    a Cayley transform, then centers the disk map so that the designated
    interior point (polygon interior representative by default) maps to 0,
    fixing the automorphism freedom of the Riemann map. The input must
    traverse the boundary with the region on the left (counterclockwise).
    Returns (circle points, map log); the log maps the region's interior
    into the open unit disk.
    """
    pts = _as_points(points).copy()
    if len(pts) < 3:
        raise WeldError("need at least 3 boundary points")
    if interior is None:
        interior = polygon_interior_point(pts)
    n = len(pts)
    pts = np.concatenate([pts, [np.complex128(interior)]])
    sides = np.zeros(len(pts), dtype=np.int8)
    pts, sides, log = _zip_points(pts, sides, n - 1, UPPER)
    w0 = np.complex128(pts[0])
    rec = SquareMobiusRec(INF if _is_inf_scalar(w0) else w0)
    pts, sides = rec.apply(pts, sides)
    log.append(rec)
    cayley = MobiusRec(1, -1j, 1, 1j, pins=((INF, np.complex128(1.0), GENERIC),))
    pts, sides = cayley.apply(pts, sides)
    log.append(cayley)
    alpha = np.complex128(pts[-1])
    if not abs(alpha) < 1:
        raise WeldError("interior point left the unit disk during the "
                        "geodesic mapping")
    center = MobiusRec(1, -alpha, -np.conj(alpha), 1)
    pts, sides = center.apply(pts, sides)
    log.append(center)
    pts = pts[:-1]
    _check_nan(pts, "geodesic algorithm")
    err = np.max(np.abs(np.abs(pts) - 1.0))
    if err > 1e-9:
        raise WeldError(f"boundary point left the unit circle by {err:.3e}")
    return pts, log
