"""Mesh partition along prescribed cut edges, shared-arc extraction and
weld-schedule planning.

Submeshes are the connected components of the face-adjacency graph after
removing cut and boundary edges. The weld schedule is planned purely
combinatorially on boundary cycles of parent vertex ids: each step glues one
contiguous shared arc between two current components (greedy longest-first),
so the numerical welding stage just follows the recorded cycles.
"""

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .mesh import MeshError, TriMesh, boundary_loops, validate_topology


class PartitionError(ValueError):
    """Raised for invalid cut sets or unweldable partitions."""


def read_cut_edges(path):
    """Read a cut-edge file: one '<i> <j>' pair of 1-based vertex ids per line."""
    pairs = []
    with open(path, "r", encoding="utf-8") as fh:
        for ln, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if len(parts) != 2:
                raise PartitionError(f"{path}:{ln}: expected two vertex ids")
            i, j = int(parts[0]), int(parts[1])
            if i < 1 or j < 1:
                raise PartitionError(f"{path}:{ln}: vertex ids are 1-based")
            pairs.append((i - 1, j - 1))
    return np.array(pairs, dtype=np.int64).reshape(-1, 2)


def write_cut_edges(path, cuts):
    with open(path, "w", encoding="utf-8") as fh:
        for i, j in np.asarray(cuts, dtype=np.int64):
            fh.write(f"{i + 1} {j + 1}\n")


def validate_cuts(mesh, cuts):
    """Normalize a cut set: every pair an existing interior mesh edge, no duplicates."""
    cuts = np.asarray(cuts, dtype=np.int64).reshape(-1, 2)
    norm = np.sort(cuts, axis=1)
    keys = {tuple(e) for e in norm}
    if len(keys) != len(norm):
        raise PartitionError("duplicate cut edges")
    mesh_edges = mesh.edge_set()
    for e in keys:
        if e not in mesh_edges:
            raise PartitionError(f"cut pair {tuple(int(x) + 1 for x in e)} is not a mesh edge")
    return norm


@dataclass
class Partition:
    mesh: TriMesh
    submeshes: list
    vertex_maps: list          # per submesh: local index -> parent index
    face_assignment: np.ndarray  # parent face -> submesh id
    cuts: np.ndarray           # normalized cut edges (parent vertex pairs)
    boundary_cycles: list = field(default_factory=list)  # per submesh, parent ids, CCW

    @property
    def n_submeshes(self):
        return len(self.submeshes)

    def local_index(self, i):
        """Parent -> local index lookup array for submesh i (-1 where absent)."""
        arr = np.full(self.mesh.n_vertices, -1, dtype=np.int64)
        arr[self.vertex_maps[i]] = np.arange(len(self.vertex_maps[i]))
        return arr

    def summary(self):
        return {
            "n_submeshes": self.n_submeshes,
            "submesh_vertices": [int(m.n_vertices) for m in self.submeshes],
            "submesh_faces": [int(m.n_faces) for m in self.submeshes],
            "n_cut_edges": int(len(self.cuts)),
        }

    def summary_json(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.summary(), fh, indent=2)


def partition_mesh(mesh, cuts):
    """Split the mesh into submeshes along the cut edges.

    Components of the face-adjacency graph restricted to interior non-cut
    edges become the submeshes; each must be disk-type.
    """
    cuts = validate_cuts(mesh, cuts)
    cut_keys = {tuple(e) for e in cuts}
    de = mesh.directed_edges()
    face_of = np.concatenate([np.arange(mesh.n_faces)] * 3)
    owner = {}
    rows, cols = [], []
    for (u, v), fi in zip(de, face_of):
        key = (min(int(u), int(v)), max(int(u), int(v)))
        if key in owner:
            if key not in cut_keys:
                fj = owner[key]
                rows += [fi, fj]
                cols += [fj, fi]
        else:
            owner[key] = fi
    g = coo_matrix((np.ones(len(rows)), (rows, cols)),
                   shape=(mesh.n_faces, mesh.n_faces))
    n_comp, labels = connected_components(g, directed=False)

    submeshes, vertex_maps, cycles = [], [], []
    for ci in range(n_comp):
        fidx = np.nonzero(labels == ci)[0]
        f = mesh.faces[fidx]
        used = np.unique(f)
        remap = np.full(mesh.n_vertices, -1, dtype=np.int64)
        remap[used] = np.arange(len(used))
        sub = TriMesh(mesh.vertices[used], remap[f])
        rep = validate_topology(sub)
        if rep.classification != "disk_type":
            raise PartitionError(
                f"component {ci} is {rep.classification} (chi={rep.euler_characteristic}, "
                f"{rep.boundary_loop_count} loops); adjust the cut set")
        submeshes.append(sub)
        vertex_maps.append(used)
        loop = boundary_loops(sub)[0]
        cycles.append(used[loop])
    return Partition(mesh, submeshes, vertex_maps, labels.astype(np.int64),
                     cuts, cycles)


@dataclass
class SharedArc:
    pair: tuple                  # (submesh i, submesh j)
    parents: np.ndarray          # ordered along submesh i's boundary orientation
    local_i: np.ndarray
    local_j: np.ndarray
    closed: bool = False


def _cyclic_runs(c1, c2):
    """Maximal runs of consecutive c1 vertices that appear consecutively
    reversed in c2. Returns list of parent-id lists (length >= 2), or the
    string 'full' when the two cycles coincide as a full reversed loop."""
    n1, n2 = len(c1), len(c2)
    pos2 = {int(v): i for i, v in enumerate(c2)}
    ok = np.zeros(n1, dtype=bool)  # edge c1[i] -> c1[i+1] weldable
    for i in range(n1):
        u, v = int(c1[i]), int(c1[(i + 1) % n1])
        if u in pos2 and v in pos2 and (pos2[v] + 1) % n2 == pos2[u]:
            ok[i] = True
    if ok.all():
        if n1 != n2:
            raise PartitionError("inconsistent full-cycle correspondence")
        return "full"
    if not ok.any():
        return []
    runs = []
    # find maximal chains of consecutive ok edges, cyclic
    start = int(np.nonzero(~ok)[0][0])
    i = start
    for _ in range(n1):
        i = (i + 1) % n1
        if ok[i] and not ok[i - 1]:
            j = i
            chain = [int(c1[j])]
            while ok[j % n1]:
                chain.append(int(c1[(j + 1) % n1]))
                j += 1
            runs.append(chain)
    return runs


def shared_arcs(partition):
    """Maximal contiguous arcs of cut edges between submesh pairs.

    Arc vertex order follows submesh i's boundary orientation (i < j); the
    same parents appear reversed in submesh j's boundary.
    """
    # every cut edge must border two distinct submeshes
    edge_faces = {}
    de = partition.mesh.directed_edges()
    face_of = np.concatenate([np.arange(partition.mesh.n_faces)] * 3)
    for (u, v), fi in zip(de, face_of):
        edge_faces.setdefault((min(int(u), int(v)), max(int(u), int(v))), []).append(fi)
    for e in map(tuple, partition.cuts):
        faces = edge_faces.get(e, [])
        subs = {int(partition.face_assignment[f]) for f in faces}
        if len(subs) != 2:
            raise PartitionError(f"cut edge {tuple(int(x) + 1 for x in e)} does not "
                                 "separate two submeshes (dangling cut)")

    arcs = []
    K = partition.n_submeshes
    for i in range(K):
        for j in range(i + 1, K):
            runs = _cyclic_runs(partition.boundary_cycles[i], partition.boundary_cycles[j])
            loc_i = partition.local_index(i)
            loc_j = partition.local_index(j)
            if runs == "full":
                parents = np.asarray(partition.boundary_cycles[i], dtype=np.int64)
                arcs.append(SharedArc((i, j), parents, loc_i[parents], loc_j[parents],
                                      closed=True))
                continue
            for chain in runs:
                parents = np.array(chain, dtype=np.int64)
                arcs.append(SharedArc((i, j), parents, loc_i[parents], loc_j[parents]))
    return arcs


@dataclass
class WeldStep:
    comp_a: int
    comp_b: int
    a_cycle: np.ndarray   # parent ids; first k+1 entries are the shared arc
    b_cycle: np.ndarray   # parent ids; same arc first, then the b-side remainder
    k: int
    closed: bool
    merged_cycle: np.ndarray


def _rotate_to(cycle, v):
    cycle = list(map(int, cycle))
    i = cycle.index(int(v))
    return cycle[i:] + cycle[:i]


def plan_weld_schedule(partition, mode="free"):
    """Greedy longest-arc-first merge plan.

    Each step glues one contiguous shared arc between two current components;
    ties break on smallest component ids. Sphere mode stops at two components
    and finishes with a closed weld of their full common boundary.
    """
    K = partition.n_submeshes
    if mode == "sphere":
        if K < 2:
            raise PartitionError("sphere mode needs at least 2 submeshes")
        target = 2
    else:
        target = 1
    comp_of = list(range(K))           # submesh -> component rep (min submesh id)
    cycles = {i: list(map(int, partition.boundary_cycles[i])) for i in range(K)}
    steps = []

    while len(cycles) > target:
        best = None
        reps = sorted(cycles)
        for ai in range(len(reps)):
            for bi in range(ai + 1, len(reps)):
                ca, cb = reps[ai], reps[bi]
                runs = _cyclic_runs(cycles[ca], cycles[cb])
                if runs == "full":
                    continue  # full correspondence is only weldable as the sphere closure
                for chain in runs:
                    key = (-len(chain), ca, cb, chain[0])
                    if best is None or key < best[0]:
                        best = (key, ca, cb, chain)
        if best is None:
            raise PartitionError(
                "no contiguous shared arc between any two components; "
                "multi-arc gluing in one step is unsupported")
        _, ca, cb, chain = best
        shared_left = (set(cycles[ca]) & set(cycles[cb])) - set(chain)
        if shared_left:
            raise PartitionError(
                f"components {ca} and {cb} share vertices beyond one contiguous "
                "arc; this cut layout needs multi-arc gluing, which is unsupported")
        a_cycle = _rotate_to(cycles[ca], chain[0])
        b_cycle = _rotate_to(list(reversed(cycles[cb])), chain[0])
        k = len(chain) - 1
        if a_cycle[:k + 1] != chain or b_cycle[:k + 1] != chain:
            raise PartitionError("arc is not a prefix of both component cycles")
        merged = [chain[-1]] + a_cycle[k + 1:] + [chain[0]] + list(reversed(b_cycle[k + 1:]))
        steps.append(WeldStep(ca, cb, np.array(a_cycle), np.array(b_cycle), k,
                              False, np.array(merged)))
        for s in range(K):
            if comp_of[s] == cb:
                comp_of[s] = ca
        del cycles[cb]
        cycles[ca] = merged

    if mode == "sphere":
        ca, cb = sorted(cycles)
        c1, c2 = cycles[ca], cycles[cb]
        if set(c1) != set(c2) or len(c1) != len(c2):
            raise PartitionError("final two components do not share their full boundary")
        if _cyclic_runs(c1, c2) != "full":
            raise PartitionError("final boundaries are not a reversed cyclic match")
        start = min(c1)
        a_cycle = _rotate_to(c1, start)
        b_cycle = _rotate_to(list(reversed(c2)), start)
        steps.append(WeldStep(ca, cb, np.array(a_cycle), np.array(b_cycle),
                              len(a_cycle) - 1, True, np.array([], dtype=np.int64)))
        for s in range(K):
            if comp_of[s] == cb:
                comp_of[s] = ca

    # every cut edge must be glued exactly once
    glued = set()
    for st in steps:
        arc = st.a_cycle[:st.k + 1]
        pairs = list(zip(arc[:-1], arc[1:]))
        if st.closed:
            pairs.append((arc[-1], arc[0]))
        for u, v in pairs:
            key = (min(int(u), int(v)), max(int(u), int(v)))
            if key in glued:
                raise PartitionError(f"edge {key} glued twice in the schedule")
            glued.add(key)
    cut_keys = {tuple(e) for e in partition.cuts}
    if glued != cut_keys:
        missing = cut_keys - glued
        raise PartitionError(f"schedule does not cover all cut edges "
                             f"({len(missing)} missing)")
    return steps
