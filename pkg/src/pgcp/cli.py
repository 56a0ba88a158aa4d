"""Command line interface.

    pgcp --input mesh.obj --cuts cuts.txt --mode {free|disk|sphere}
         [--workers N] [--out param.obj] [--report report.json]
         [--mobius-area] [--seed S] [--config run.cfg]
    pgcp bench --input mesh.obj --n 2,3,4 [--repeats R] [--mode M] ...

Config files hold one key=value per line (same keys as the flags); the
precedence is CLI flag > config file > built-in default. Exit codes:
0 success, 2 validation failure, 3 numerical failure, 4 I/O failure.
"""

import argparse
import json
import sys

from .flatten import SolveError
from .mesh import MeshError, load_obj
from .partition import PartitionError
from .pipeline import (RunConfig, ValidationError, benchmark_subdomains,
                       run_pipeline)
from .welding import WeldError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _read_config_file(path):
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for ln, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValidationError(f"{path}:{ln}: expected key=value")
            key, val = line.split("=", 1)
            out[key.strip().replace("-", "_")] = val.strip()
    return out


def _build_parser():
    p = argparse.ArgumentParser(
        prog="pgcp",
        description="Global conformal parameterization of simply-connected "
                    "triangle meshes via partitioning and partial welding.")
    sub = p.add_subparsers(dest="command")

    def common(q):
        q.add_argument("--input", help="input OBJ mesh")
        q.add_argument("--cuts", help="cut-edge file (one 1-based 'i j' pair per line)")
        q.add_argument("--mode", choices=["free", "disk", "sphere"])
        q.add_argument("--workers", type=int)
        q.add_argument("--seed", type=int)
        q.add_argument("--config", help="key=value config file")
        q.add_argument("--report", help="write run report JSON here")

    run = sub.add_parser("run", help="parameterize a mesh (default command)")
    common(run)
    run.add_argument("--out", help="output OBJ with the parameterization")
    run.add_argument("--mobius-area", action="store_true", default=None,
                     help="post-compose a Mobius transformation minimizing "
                          "area distortion")

    bench = sub.add_parser("bench", help="subdomain-count speedup benchmark")
    common(bench)
    bench.add_argument("--n", help="comma-separated subdomain counts (baseline 2)")
    bench.add_argument("--repeats", type=int, default=3)
    bench.add_argument("--cut-files", help="comma-separated cut files, one per n")

    # allow flag-style invocation without the 'run' word
    common(p)
    p.add_argument("--out")
    p.add_argument("--mobius-area", action="store_true", default=None)
    return p


def _merge_config(args):
    defaults = RunConfig()
    file_vals = _read_config_file(args.config) if getattr(args, "config", None) else {}
    cfg = RunConfig()
    for key in ("input", "cuts", "mode", "workers", "out", "report",
                "mobius_area", "seed"):
        val = getattr(args, key, None)
        if val is None and key in file_vals:
            raw = file_vals[key]
            if key in ("workers", "seed"):
                val = int(raw)
            elif key == "mobius_area":
                val = raw.lower() in ("1", "true", "yes", "on")
            else:
                val = raw
        if val is None:
            val = getattr(defaults, key)
        setattr(cfg, key, val)
    return cfg


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    args = parser.parse_args(argv)
    command = args.command or "run"
    try:
        cfg = _merge_config(args)
        if command == "bench":
            if not cfg.input:
                raise ValidationError("bench needs --input")
            if not getattr(args, "n", None):
                raise ValidationError("bench needs --n (e.g. --n 2,3,4)")
            n_values = [int(x) for x in args.n.split(",")]
            mesh = load_obj(cfg.input)
            cut_files = args.cut_files.split(",") if args.cut_files else None
            report = benchmark_subdomains(mesh, n_values, mode=cfg.mode,
                                          repeats=args.repeats,
                                          workers=cfg.workers if args.workers else None,
                                          cut_files=cut_files, seed=cfg.seed)
            if cfg.report:
                report.to_json(cfg.report)
            print(json.dumps(report.bench, indent=2))
            return EXIT_OK
        gp, report = run_pipeline(cfg)
        stats = report.distortion.get("angular_abs", {})
        print(f"mode={report.mode} submeshes={report.n_submeshes} "
              f"flips={report.flips} mean(|d|)={stats.get('mean', float('nan')):.4f} deg "
              f"ok={report.ok}")
        return EXIT_OK if report.ok else EXIT_NUMERICAL
    except (ValidationError, PartitionError, MeshError) as exc:
        print(f"pgcp: validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (WeldError, SolveError) as exc:
        print(f"pgcp: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"pgcp: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
