"""End-to-end parameterization pipeline and subdomain benchmark.

Stages: partition -> per-submesh free-boundary flattening (parallel, only
boundary values kept) -> scheduled partial welds of component boundaries ->
mode-specific boundary treatment (geodesic map to the circle for disk mode,
closed welding for sphere mode) -> per-submesh harmonic reconstruction with
bijectivity check/repair (parallel) -> stitch, metrics and optional Mobius
area optimization.
"""

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import shapes
from .assemble import (GlobalParam, face_layout, harmonic_solve, qc_correct,
                       signed_areas, stitch_global)
from .flatten import SolveError, conformal_energy, flatten_free_boundary
from .mesh import (MeshError, TriMesh, boundary_loops, load_obj,
                   validate_topology, write_obj_with_param)
from .metrics import distortion_report, mobius_area_optimize
from .partition import (Partition, PartitionError, partition_mesh,
                        plan_weld_schedule, read_cut_edges)
from .welding import (WeldError, apply_log, closed_weld, geodesic_to_circle,
                      partial_weld, polygon_interior_point)


class ValidationError(ValueError):
    """Configuration or input-topology mismatch."""


@dataclass
class RunConfig:
    input: str = None
    cuts: str = None
    mode: str = "free"             # free | disk | sphere
    workers: int = 1
    out: str = None
    report: str = None
    mobius_area: bool = False
    seed: int = 0
    snap_tol: float = 1e-8
    hard_tol: float = 1e-6
    beltrami_threshold: float = 0.99
    repair_iters: int = 5

    def validate(self):
        if self.mode not in ("free", "disk", "sphere"):
            raise ValidationError(f"unknown mode {self.mode!r}")
        if self.workers < 1:
            raise ValidationError("worker count must be >= 1")


@dataclass
class RunReport:
    mode: str = ""
    n_vertices: int = 0
    n_faces: int = 0
    n_submeshes: int = 0
    submesh_sizes: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    seam_residuals: list = field(default_factory=list)
    repairs: list = field(default_factory=list)
    flips: int = 0
    distortion: dict = field(default_factory=dict)
    ok: bool = False
    mobius_info: dict = None
    bench: dict = None

    def to_dict(self):
        return {k: v for k, v in self.__dict__.items() if v is not None}

    def to_json(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)


def _dncp_task(args):
    verts, faces = args
    sub = TriMesh(verts, faces, check=False)
    return flatten_free_boundary(sub)


def _harmonic_task(args):
    verts, faces, bd_idx, bd_vals, threshold, repair_iters = args
    sub = TriMesh(verts, faces, check=False)
    z = harmonic_solve(sub, bd_idx, bd_vals)
    flipped = np.nonzero(signed_areas(z, sub.faces) <= 0)[0]
    info = {"flips_before": int(len(flipped)), "repair_iterations": 0,
            "cleared": bool(len(flipped) == 0)}
    if len(flipped):
        layout = face_layout(sub)
        z, rep = qc_correct(layout, sub.faces, z, bd_idx, max_iter=repair_iters)
        info = {"flips_before": rep.initial_flips,
                "repair_iterations": rep.iterations,
                "cleared": rep.cleared,
                "remaining": [int(x) for x in rep.remaining_faces]}
    return z, info


def _run_tasks(task, argslist, workers):
    if workers <= 1 or len(argslist) <= 1:
        return [task(a) for a in argslist]
    with ProcessPoolExecutor(max_workers=min(workers, len(argslist))) as ex:
        return list(ex.map(task, argslist))


def _polygon_area(vals):
    return 0.5 * float(np.sum(vals.real * np.roll(vals, -1).imag
                              - vals.imag * np.roll(vals, -1).real))




def parameterize(mesh, cuts=None, mode="free", workers=1, seed=0,
                 mobius_area=False, config=None):
    """Compute a global conformal parameterization of a simply-connected mesh.

    cuts: (e, 2) array of parent vertex index pairs (or None/empty for a
    single-domain run; sphere mode requires a nonempty cut set). Returns
    (GlobalParam, RunReport).
    """
    cfg = config or RunConfig(mode=mode, workers=workers, seed=seed,
                              mobius_area=mobius_area)
    cfg.validate()
    mode = cfg.mode
    report = RunReport(mode=mode, n_vertices=mesh.n_vertices, n_faces=mesh.n_faces)
    timings = report.timings

    topo = validate_topology(mesh)
    if mode in ("free", "disk") and topo.classification != "disk_type":
        raise ValidationError(f"mode {mode!r} needs a disk-type mesh, got "
                              f"{topo.classification}")
    if mode == "sphere" and topo.classification != "sphere_type":
        raise ValidationError(f"sphere mode needs a genus-0 closed mesh, got "
                              f"{topo.classification}")

    t0 = time.perf_counter()
    if cuts is None or len(cuts) == 0:
        if mode == "sphere":
            raise ValidationError("sphere mode requires a cut set (K >= 2)")
        part = Partition(mesh, [mesh], [np.arange(mesh.n_vertices)],
                         np.zeros(mesh.n_faces, dtype=np.int64),
                         np.zeros((0, 2), dtype=np.int64),
                         [boundary_loops(mesh)[0]])
        steps = []
    else:
        part = partition_mesh(mesh, cuts)
        steps = plan_weld_schedule(part, mode)
    timings["partition"] = time.perf_counter() - t0
    report.n_submeshes = part.n_submeshes
    report.submesh_sizes = [int(m.n_vertices) for m in part.submeshes]

    # local free-boundary conformal flattening (parallel); boundary kept
    t0 = time.perf_counter()
    args = [(m.vertices, m.faces) for m in part.submeshes]
    embeddings0 = _run_tasks(_dncp_task, args, cfg.workers)
    timings["flatten"] = time.perf_counter() - t0

    if part.n_submeshes == 1 and mode == "free":
        # single-domain free mode: the flattening already is the result
        t0 = time.perf_counter()
        gp = stitch_global(part, embeddings0, mode,
                           snap_tol=cfg.snap_tol, hard_tol=cfg.hard_tol)
        timings["stitch"] = time.perf_counter() - t0
        return _finish(mesh, part, [embeddings0[0]], gp, report, cfg)

    # per-component tracked boundary values, keyed by parent vertex
    local_loops = [boundary_loops(m)[0] for m in part.submeshes]
    comp_vals = {}
    comp_members = {}
    for i in range(part.n_submeshes):
        vmap = part.vertex_maps[i]
        loop = local_loops[i]
        comp_vals[i] = dict(zip(map(int, vmap[loop]), embeddings0[i][loop]))
        comp_members[i] = [i]

    t0 = time.perf_counter()
    exterior_members = []
    for st in steps:
        A = comp_vals[st.comp_a]
        B = comp_vals[st.comp_b]
        a_list = np.array([A[int(p)] for p in st.a_cycle], dtype=np.complex128)
        b_list = np.array([B[int(p)] for p in st.b_cycle], dtype=np.complex128)
        if st.closed:
            res = closed_weld(a_list, b_list, hard_tol=cfg.hard_tol)
        else:
            res = partial_weld(a_list, b_list, st.k, hard_tol=cfg.hard_tol)
        scale = max(float(np.max(np.abs(res.a))), float(np.max(np.abs(res.b))))
        report.seam_residuals.append(res.seam_error / scale if scale else 0.0)
        new = {}
        for p, v in zip(st.b_cycle, res.b):
            new[int(p)] = v
        for p, v in zip(st.a_cycle, res.a):
            new[int(p)] = v
        for side, logr in ((A, res.log_a), (B, res.log_b)):
            others = [p for p in side if p not in new]
            if others:
                vals, _ = apply_log(logr, np.array([side[p] for p in others]))
                new.update(zip(others, vals))
        if st.closed:
            # decide which side's region became the exterior (contains infinity)
            area = _polygon_area(res.a)
            exterior = st.comp_b if area > 0 else st.comp_a
            exterior_members = list(comp_members[exterior])
        comp_vals[st.comp_a] = new
        comp_members[st.comp_a] += comp_members[st.comp_b]
        del comp_vals[st.comp_b], comp_members[st.comp_b]
    timings["weld"] = time.perf_counter() - t0

    final_rep = next(iter(comp_vals))
    tracked = comp_vals[final_rep]

    if mode == "disk":
        t0 = time.perf_counter()
        if steps:
            global_cycle = [int(p) for p in steps[-1].merged_cycle]
        else:
            global_cycle = [int(p) for p in part.boundary_cycles[0]]
        bvals = np.array([tracked[p] for p in global_cycle], dtype=np.complex128)
        if _polygon_area(bvals) < 0:
            global_cycle = [global_cycle[0]] + global_cycle[:0:-1]
            bvals = np.array([tracked[p] for p in global_cycle], dtype=np.complex128)
        circ, log = geodesic_to_circle(bvals)
        new = dict(zip(global_cycle, circ))
        others = [p for p in tracked if p not in new]
        if others:
            vals, _ = apply_log(log, np.array([tracked[p] for p in others]))
            new.update(zip(others, vals))
        tracked = new
        timings["boundary_map"] = time.perf_counter() - t0

    # harmonic reconstruction with the welded boundary (parallel)
    t0 = time.perf_counter()
    exterior_set = set(exterior_members)
    centers = {}
    if mode == "sphere" and exterior_set:
        seam = steps[-1]
        seam_vals = np.array([tracked[int(p)] for p in seam.a_cycle])
        if _polygon_area(seam_vals) < 0:
            seam_vals = seam_vals[::-1]
        c = polygon_interior_point(seam_vals)
        centers = {i: c for i in exterior_set}
    args = []
    for i in range(part.n_submeshes):
        vmap = part.vertex_maps[i]
        loop = local_loops[i]
        bvals = np.array([tracked[int(p)] for p in vmap[loop]], dtype=np.complex128)
        if i in exterior_set:
            bvals = 1.0 / (bvals - centers[i])
        args.append((part.submeshes[i].vertices, part.submeshes[i].faces,
                     loop, bvals, cfg.beltrami_threshold, cfg.repair_iters))
    results = _run_tasks(_harmonic_task, args, cfg.workers)
    embeddings = []
    for i, (z, info) in enumerate(results):
        info["submesh"] = i
        report.repairs.append(info)
        if i in exterior_set:
            z = centers[i] + 1.0 / z
        embeddings.append(z)
    timings["harmonic"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    gp = stitch_global(part, embeddings, mode, snap_tol=cfg.snap_tol,
                       hard_tol=cfg.hard_tol)
    timings["stitch"] = time.perf_counter() - t0
    return _finish(mesh, part, embeddings, gp, report, cfg)


def _finish(mesh, part, embeddings, gp, report, cfg):
    """Shared tail: metrics, optional Mobius optimization, acceptance flags."""
    timings = report.timings
    t0 = time.perf_counter()
    energy = None
    if gp.mode in ("free", "disk"):
        energy = float(sum(conformal_energy(m, e)
                           for m, e in zip(part.submeshes, embeddings)))
    dist = distortion_report(mesh, gp, energy=energy)
    timings["metrics"] = time.perf_counter() - t0

    if cfg.mobius_area:
        t0 = time.perf_counter()
        new_coords, info = mobius_area_optimize(mesh, gp, seed=cfg.seed)
        gp = GlobalParam(gp.mode, new_coords, gp.flipped_faces, gp.provenance,
                         gp.seam_max_dev, gp.diagnostics)
        dist = distortion_report(mesh, gp, energy=energy)
        report.mobius_info = info
        timings["mobius_area"] = time.perf_counter() - t0

    report.flips = int(len(gp.flipped_faces))
    report.distortion = dist.to_dict()
    seam_ok = all(r <= cfg.snap_tol for r in report.seam_residuals)
    report.ok = report.flips == 0 and seam_ok
    return gp, report


def run_pipeline(config):
    """File-driven entry point: load inputs, run, write outputs.

    Returns (GlobalParam, RunReport).
    """
    config.validate()
    if not config.input:
        raise ValidationError("missing input mesh path")
    mesh = load_obj(config.input)
    cuts = read_cut_edges(config.cuts) if config.cuts else None
    gp, report = parameterize(mesh, cuts=cuts, config=config)
    if config.out:
        coords = gp.coords if gp.mode == "sphere" else gp.uv
        write_obj_with_param(config.out, mesh, coords)
    if config.report:
        report.to_json(config.report)
    return gp, report


def benchmark_subdomains(mesh, n_values, mode="free", repeats=3, workers=None,
                         cut_files=None, seed=0):
    """Time the pipeline with different subdomain counts.

    Cuts come from cut_files (one per n) or from a balanced split of face
    centroids along the x axis. Reports T_n (median of repeats), the speedup
    S_n = T_2 / T_n and the efficiency E_n = S_n / (n / 2); n = 2 is the
    baseline since welding needs at least two subdomains.
    """
    n_values = sorted(set(int(n) for n in n_values))
    if any(n < 2 for n in n_values):
        raise ValidationError("subdomain counts must be >= 2")
    if 2 not in n_values:
        n_values = [2] + n_values
    T = {}
    for idx, n in enumerate(n_values):
        if cut_files:
            cuts = read_cut_edges(cut_files[idx])
        else:
            cuts = shapes.cuts_from_face_labels(mesh, shapes.strip_labels(mesh, n))
        w = workers if workers is not None else min(n, os.cpu_count() or 1)
        times = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            gp, rep = parameterize(mesh, cuts=cuts, mode=mode, workers=w, seed=seed)
            times.append(time.perf_counter() - t0)
            if not rep.ok:
                raise SolveError(f"benchmark run with n={n} subdomains failed "
                                 f"acceptance (flips={rep.flips})")
        T[n] = float(np.median(times))
    bench = {
        "n": n_values,
        "T_n": {str(n): T[n] for n in n_values},
        "S_n": {str(n): T[2] / T[n] for n in n_values},
        "E_n": {str(n): (T[2] / T[n]) / (n / 2.0) for n in n_values},
        "repeats": repeats,
    }
    out = RunReport(mode=mode, n_vertices=mesh.n_vertices, n_faces=mesh.n_faces)
    out.bench = bench
    out.ok = True
    out.timings = {f"T_{n}": T[n] for n in n_values}
    return out
