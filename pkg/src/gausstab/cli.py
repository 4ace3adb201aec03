"""Command line front end.

Subcommands:
    gen          write the configured surface mesh to OFF/OBJ
    analyze      full spectral analysis, JSON report (+ figures)
    estimates    estimate battery, JSON report (+ figures)
    convergence  refinement sweep, CSV table (+ figures)

Exit code 0 means every hard assertion (closed-form comparisons within the
configured tolerance) passed; 1 means at least one failed; 2 is bad usage.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .meshio import read_mesh, write_mesh
from .report import (
    StageError,
    convergence_passed,
    dump_csv,
    dump_json,
    run_analysis,
    run_convergence,
    run_estimates,
)


def _parse_levels(text):
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            levels = list(range(int(a), int(b) + 1))
        else:
            levels = [int(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad level range {text!r}; use A..B") from None
    if not levels:
        raise argparse.ArgumentTypeError("empty level range")
    return levels


def _parse_tol(pairs):
    out = []
    for pair in pairs or []:
        if "=" not in pair:
            raise ConfigError(f"--tol expects KEY=VAL, got {pair!r}")
        key, val = pair.split("=", 1)
        key = key.strip()
        if not key.startswith("tol."):
            key = f"tol.{key}"
        out.append((key, val.strip()))
    return out


def _figure_path(out, suffix):
    out = Path(out)
    return out.with_name(out.stem + "_" + suffix + ".png")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gausstab",
        description="Spectral stability laboratory for hypersurfaces in Gaussian-weighted space.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("gen", "generate a surface mesh file"),
        ("analyze", "run the spectral analysis pipeline"),
        ("estimates", "run the curvature/stability estimate battery"),
        ("convergence", "run a refinement convergence sweep"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, default=None, help="flat key=value config file")
        p.add_argument("--out", type=Path, required=True, help="output path")
        p.add_argument(
            "--tol", action="append", metavar="KEY=VAL", help="tolerance override, e.g. zero=1e-2"
        )
        if name in ("analyze", "estimates"):
            p.add_argument("--mesh", type=Path, default=None, help="analyze an existing OFF/OBJ mesh")
            p.add_argument("--no-figures", action="store_true", help="skip figure rendering")
        if name == "convergence":
            p.add_argument("--levels", type=_parse_levels, default=list(range(4, 7)), help="A..B")
            p.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config, _parse_tol(args.tol))
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    try:
        if args.command == "gen":
            from .surface import generate

            mesh = generate(config.surface_spec())
            write_mesh(mesh, args.out)
            print(f"wrote {args.out} ({mesh.n_vertices} vertices, {mesh.n_faces} faces)")
            return 0

        mesh = None
        if getattr(args, "mesh", None) is not None:
            mesh = read_mesh(args.mesh)

        if args.command == "analyze":
            rep = run_analysis(config, mesh=mesh)
            figures = []
            if config.figures and not args.no_figures:
                fig_path = _figure_path(args.out, "spectrum")
                from .figures import save_spectrum_figure

                save_spectrum_figure(rep, fig_path)
                figures.append(str(fig_path))
            rep["figures"] = figures
            dump_json(rep, args.out)
            _summarize_analysis(rep)
            return 0 if rep["checks"]["passed"] else 1

        if args.command == "estimates":
            rep = run_estimates(config, mesh=mesh)
            figures = []
            if config.figures and not args.no_figures:
                fig_path = _figure_path(args.out, "margins")
                from .figures import save_margins_figure

                save_margins_figure(rep, fig_path)
                figures.append(str(fig_path))
            rep["figures"] = figures
            dump_json(rep, args.out)
            _summarize_estimates(rep)
            return 0 if rep["checks"]["passed"] else 1

        rows = run_convergence(config, args.levels)
        dump_csv(rows, args.out)
        if config.figures and not args.no_figures:
            from .figures import save_convergence_figure

            save_convergence_figure(rows, _figure_path(args.out, "convergence"))
        ok = convergence_passed(rows)
        for row in rows:
            msg = row.get("error") or ""
            print(
                f"level {row['level']}: "
                + (f"lambda1 rel err {row.get('lambda1_rel_err', float('nan')):.3e} " if "lambda1_rel_err" in row else "")
                + msg
            )
        print(f"convergence: {'ok' if ok else 'FAILED'} -> {args.out}")
        return 0 if ok else 1

    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _summarize_analysis(rep):
    crit = rep["criticality"]
    print(
        f"criticality: C_hat={crit['C_hat']:.6g} residual={crit['residual']:.3g}"
    )
    clusters = rep["spectrum"]["clusters"]
    text = ", ".join(f"{c['value']:.4g} (x{c['multiplicity']})" for c in clusters)
    print(f"spectrum clusters: {text}")
    if rep.get("index") and "index" in rep["index"]:
        print(
            f"index: {rep['index']['index']}  zero modes: {rep['index']['zero_modes']}"
        )
    print(f"splitting kernel dim: {rep['splitting']['kernel_dim']}")
    span = rep["localized_span"]
    print(
        f"localized span (R={span['cutoff_radius']:.3g}): dim {span['dimension']}, "
        f"all negative: {span['all_negative']}"
    )
    checks = rep["checks"]
    print("checks: " + ("all passed" if checks["passed"] else "; ".join(checks["failures"])))


def _summarize_estimates(rep):
    for est in rep["estimates"]:
        status = "holds" if est["margin"] >= 0 else "VIOLATED"
        if not est["hypothesis_ok"]:
            status += " (informational: hypotheses not met)"
        print(f"{est['name']}: lhs={est['lhs']:.6g} rhs={est['rhs']:.6g} {status}")
    for sk in rep["skipped"]:
        print(f"{sk['name']}: skipped ({sk['reason']})")
    checks = rep["checks"]
    print("checks: " + ("all passed" if checks["passed"] else "; ".join(checks["failures"])))


if __name__ == "__main__":
    sys.exit(main())
