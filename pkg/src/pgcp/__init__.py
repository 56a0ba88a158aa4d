"""Parallel global conformal parameterization of simply-connected triangle
meshes: partition, local conformal flattening, conformal partial welding of
boundaries, harmonic reassembly. Produces free-boundary, unit-disk or
spherical parameterizations with bijectivity checks and distortion reports.
"""

from .assemble import (BijectivityReport, GlobalParam, beltrami_per_face,
                       check_bijectivity, face_layout, harmonic_solve,
                       qc_correct, stereographic_inverse,
                       stereographic_project, stitch_global)
from .flatten import (SolveError, area_matrix, conformal_energy,
                      cotangent_laplacian, flatten_free_boundary)
from .mesh import (MeshError, TriMesh, boundary_loops, load_obj,
                   validate_topology, write_obj_with_param)
from .metrics import (DistortionReport, angular_distortion, area_distortion,
                      distortion_report, mobius_area_optimize, summarize)
from .partition import (Partition, PartitionError, SharedArc, WeldStep,
                        partition_mesh, plan_weld_schedule, read_cut_edges,
                        shared_arcs, validate_cuts, write_cut_edges)
from .pipeline import (RunConfig, RunReport, ValidationError,
                       benchmark_subdomains, parameterize, run_pipeline)
from .welding import (INF, WeldError, apply_log, closed_weld, closing_map,
                      geodesic_to_circle, intermediate_form,
                      mobius_apply, mobius_from_three_points,
                      mobius_pair_align, mobius_to_unit, opening_map,
                      partial_weld)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
