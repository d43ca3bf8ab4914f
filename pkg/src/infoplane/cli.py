"""Command-line surface: analyze representations against the feasible
region, emit frontiers, certify suboptimality, run the constructive Gaussian
oracle, mix representations, and render information-plane figures.

Exit codes are a stable contract: 0 success (or not certified), 10 certified
suboptimal, 2 input error, 3 numerical or degeneracy error.  Errors are
reported as machine-readable JSON on stdout.  All randomness sits behind
--seed (default 0).  The INFOPLANE_LOG environment variable sets the log
level and nothing else.
"""

from __future__ import annotations

import argparse
import importlib.resources
import json
import logging
import math
import os
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import classification as cls
from . import regression as reg
from .data import (
    DataError,
    load_csv,
    load_representation_csv,
    representation_csv_text,
    save_representation_csv,
)
from .gaussian import (
    GaussianModel,
    PsdTarget,
    closed_form_plane_point,
    construct_invariant_optimal,
    construct_lagrangian_optimal,
    construct_sufficiency_optimal,
    monte_carlo_verify,
    realize_psd_target,
)
from .metrics import (
    ContingencyTable,
    DegenerateStatisticError,
    EstimatorConfig,
    InfoPlaneError,
    PlanePoint,
    discretize_rows,
    plane_point,
)
from .mixing import mix
from .plotting import render_information_plane

logger = logging.getLogger("infoplane")

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3
EXIT_CERTIFIED = 10

with importlib.resources.files("infoplane").joinpath("report_schema.json").open() as _fh:
    REPORT_SCHEMA = json.load(_fh)


def _report(command: str, task: str | None, inputs: dict, **sections) -> dict:
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "inputs": inputs,
        "warnings": sections.pop("warnings", []),
    }
    if task is not None:
        report["task"] = task
    report.update({k: v for k, v in sections.items() if v is not None})
    jsonschema.validate(report, REPORT_SCHEMA)
    return report


def _emit(report: dict, fmt: str = "json") -> None:
    if fmt == "json":
        print(json.dumps(report, indent=2, sort_keys=True, allow_nan=False))
        return
    # delimited summary: one row per named record
    rows = [("record", "name", "utility", "leakage", "status")]
    vertices = report.get("vertices") or {}
    for key in ("e_y_star", "e_a_star"):
        if key in vertices:
            u, l = vertices[key]
            rows.append(("vertex", key, repr(u), repr(l), ""))
    for p in report.get("points", []):
        rows.append(("point", p["name"], repr(p["utility"]), repr(p["leakage"]), p.get("status", "")))
    for q in (report.get("frontier") or {}).get("polyline", []):
        rows.append(("frontier", repr(q["alpha"]), repr(q["utility"]), repr(q["leakage"]), ""))
    print("\n".join(",".join(r) for r in rows))


def _estimator_config(args) -> EstimatorConfig:
    return EstimatorConfig(discretization_bins=args.bins, knn_k=args.knn_k)


def _load_dataset(path: str, args):
    roles = {
        "target": args.target_col,
        "attribute": args.attribute_col,
        "features": [c for c in args.feature_cols.split(",") if c] if args.feature_cols else [],
    }
    train, _ = load_csv(path, schema={}, roles=roles, split=None)
    return train


def _classification_sections(y: np.ndarray, a: np.ndarray) -> tuple[cls.ClassificationPlane, dict, dict, dict]:
    table = ContingencyTable.from_observations({"y": y, "a": a})
    plane = cls.ClassificationPlane.from_table(table)
    ey, ea = cls.vertex_ey(plane), cls.vertex_ea(plane)
    plane_dict = {
        "h_y": plane.h_y,
        "h_a": plane.h_a,
        "delta_y_given_a": plane.delta_y_given_a,
        "delta_a_given_y": plane.delta_a_given_y,
        "i_ay": plane.i_ay,
    }
    vertices = {
        "e_y_star": [ey, 0.0],
        "e_a_star": [plane.h_y, ea],
        "rectangle": {"max_utility": plane.h_y, "max_leakage": plane.h_a},
    }
    poly = cls.inner_polygon(plane)
    poly_dict = {
        "vertices": [list(v) for v in poly.vertices],
        "frontier_segment": [list(poly.frontier_segment[0]), list(poly.frontier_segment[1])],
    }
    return plane, plane_dict, vertices, poly_dict


def _regression_sections(y: np.ndarray, a: np.ndarray) -> tuple[reg.RegressionPlane, dict, dict]:
    plane = reg.RegressionPlane.from_sample(y, a)
    plane_dict = {
        "var_y": plane.var_y,
        "var_a": plane.var_a,
        "cov_ya": plane.cov_ya,
        "rho_sq": plane.rho_sq,
        "noisy": plane.noisy,
    }
    vertices = {
        "e_y_star": [reg.vertex_ey_ls(plane), 0.0],
        "e_a_star": [plane.var_y, reg.vertex_ea_ls(plane)],
        "rectangle": {"max_utility": plane.var_y, "max_leakage": plane.var_a},
    }
    return plane, plane_dict, vertices


def _point_entry(name: str, point: PlanePoint, plane, task: str, warnings: list[str]) -> dict:
    entry: dict = {"name": name, "utility": point.utility, "leakage": point.leakage}
    if task == "classification":
        try:
            assessment = cls.classify_point(plane, point)
            entry["status"] = assessment.status
            entry["statistic"] = None if math.isnan(assessment.statistic) else assessment.statistic
            entry["frontier_distance"] = assessment.frontier_distance
        except DegenerateStatisticError as exc:
            warnings.append(f"{name}: {exc}")
    else:
        assessment = reg.classify_point_ls(plane, point)
        entry["status"] = assessment.status
        entry["frontier_distance"] = assessment.frontier_distance
        entry["alpha"] = assessment.alpha_of_point
    return entry


def cmd_analyze(args) -> int:
    dataset = _load_dataset(args.dataset, args)
    task = args.task
    warnings: list[str] = []
    config = _estimator_config(args)
    if task == "classification":
        plane, plane_dict, vertices, poly_dict = _classification_sections(dataset.y, dataset.a)
    else:
        plane, plane_dict, vertices = _regression_sections(dataset.y, dataset.a)
        poly_dict = None
    points = []
    for rep_path in args.representations:
        name = Path(rep_path).stem
        rep = load_representation_csv(rep_path, kind=task)
        pt = plane_point(rep, config)
        points.append(_point_entry(name, pt, plane, task, warnings))
    dominance = []
    for p in points:
        p["dominated_by"] = []
    for p in points:
        for q in points:
            if p is q:
                continue
            if p["utility"] > q["utility"] and p["leakage"] < q["leakage"]:
                dominance.append([p["name"], q["name"]])
                q["dominated_by"].append(p["name"])
    frontier_dict = None
    if task == "regression":
        frontier_dict = {
            "polyline": reg.FrontierCurve(plane).sample(args.samples),
            "alpha_max": plane.rho_sq,
        }
    report = _report(
        "analyze",
        task,
        inputs={
            "dataset": args.dataset,
            "representations": list(args.representations),
            "seed": args.seed,
            "bins": args.bins,
            "knn_k": args.knn_k,
            "estimator": "plug-in; continuous representations are "
            "equal-frequency binned (artifact choice, see docs)",
        },
        plane=plane_dict,
        vertices=vertices,
        points=points,
        dominance=dominance,
        feasible_polygon=poly_dict,
        frontier=frontier_dict,
        warnings=warnings,
    )
    if args.plot:
        render_information_plane(report, args.plot)
    _emit(report, args.format)
    return EXIT_OK


def cmd_frontier(args) -> int:
    task = args.task
    warnings: list[str] = []
    if args.plane_json:
        stats = json.loads(Path(args.plane_json).read_text())
        if task == "classification":
            plane = cls.ClassificationPlane(**{k: stats[k] for k in (
                "h_y", "h_a", "delta_y_given_a", "delta_a_given_y", "i_ay")})
            plane_dict = stats
            ey, ea = cls.vertex_ey(plane), cls.vertex_ea(plane)
            vertices = {
                "e_y_star": [ey, 0.0],
                "e_a_star": [plane.h_y, ea],
                "rectangle": {"max_utility": plane.h_y, "max_leakage": plane.h_a},
            }
            poly = cls.inner_polygon(plane)
            poly_dict = {
                "vertices": [list(v) for v in poly.vertices],
                "frontier_segment": [list(poly.frontier_segment[0]), list(poly.frontier_segment[1])],
            }
        else:
            plane = reg.RegressionPlane(
                var_y=stats["var_y"], var_a=stats["var_a"], cov_ya=stats["cov_ya"],
                noisy=bool(stats.get("noisy", False)),
            )
            plane_dict = {
                "var_y": plane.var_y, "var_a": plane.var_a, "cov_ya": plane.cov_ya,
                "rho_sq": plane.rho_sq, "noisy": plane.noisy,
            }
            vertices = {
                "e_y_star": [reg.vertex_ey_ls(plane), 0.0],
                "e_a_star": [plane.var_y, reg.vertex_ea_ls(plane)],
                "rectangle": {"max_utility": plane.var_y, "max_leakage": plane.var_a},
            }
            poly_dict = None
    else:
        if not args.dataset:
            raise DataError("either a dataset or --plane-json is required")
        dataset = _load_dataset(args.dataset, args)
        if task == "classification":
            plane, plane_dict, vertices, poly_dict = _classification_sections(dataset.y, dataset.a)
        else:
            plane, plane_dict, vertices = _regression_sections(dataset.y, dataset.a)
            poly_dict = None
    frontier_dict = None
    if task == "regression":
        if plane.rho_sq <= 0.0:
            warnings.append("degenerate plane: flat frontier at Var(Y)")
        frontier_dict = {
            "polyline": reg.FrontierCurve(plane).sample(args.samples),
            "alpha_max": plane.rho_sq,
        }
    else:
        seg = poly_dict["frontier_segment"]
        if math.dist(seg[0], seg[1]) <= 1e-12:
            warnings.append("degenerate plane: frontier collapses to a single point")
    report = _report(
        "frontier",
        task,
        inputs={"dataset": args.dataset, "plane_json": args.plane_json, "samples": args.samples},
        plane=plane_dict,
        vertices=vertices,
        feasible_polygon=poly_dict,
        frontier=frontier_dict,
        warnings=warnings,
    )
    if args.plot:
        render_information_plane(report, args.plot)
    _emit(report, args.format)
    return EXIT_OK


def cmd_certify(args) -> int:
    dataset = _load_dataset(args.dataset, args)
    rep = load_representation_csv(args.representation, kind=args.task)
    warnings: list[str] = []
    config = _estimator_config(args)
    if args.task == "classification":
        codes = discretize_rows(rep.z, config.discretization_bins)
        tables = {
            "table_az": ContingencyTable.from_observations({"a": rep.a, "z": codes}),
            "table_ay": ContingencyTable.from_observations({"y": rep.y, "a": rep.a}),
            "table_yz": ContingencyTable.from_observations({"y": rep.y, "z": codes}),
        }
        certificate = cls.certify(tables, epsilon=args.epsilon, seed=args.seed)
        plane_ds, plane_dict, vertices, _ = _classification_sections(dataset.y, dataset.a)
        try:
            delta_ds = plane_ds.delta_y_given_a
            table_rep = ContingencyTable.from_observations({"y": rep.y, "a": rep.a})
            delta_rep = cls.ClassificationPlane.from_table(table_rep).delta_y_given_a
            if abs(delta_ds - delta_rep) > 0.05:
                warnings.append(
                    "representation rows and dataset disagree on the base-rate gap "
                    f"({delta_rep:.3f} vs {delta_ds:.3f})"
                )
        except InfoPlaneError as exc:
            warnings.append(f"dataset consistency check skipped: {exc}")
    else:
        plane, plane_dict, vertices = _regression_sections(rep.y, rep.a)
        pt = plane_point(rep, config)
        certificate = reg.certify_ls(plane, pt.utility, pt.leakage, epsilon=args.epsilon, n=rep.n)
        warnings.append(
            "regression certificate uses the chord rule between the two extreme "
            "points (artifact instantiation; the exact frontier lies above it)"
        )
    report = _report(
        "certify",
        args.task,
        inputs={
            "dataset": args.dataset,
            "representation": args.representation,
            "epsilon": args.epsilon,
            "seed": args.seed,
            "bins": args.bins,
        },
        plane=plane_dict,
        vertices=vertices,
        certificate=certificate.to_dict(),
        warnings=warnings,
    )
    _emit(report, args.format)
    return EXIT_CERTIFIED if certificate.verdict == "suboptimal" else EXIT_OK


def cmd_oracle(args) -> int:
    model = GaussianModel.from_dict(json.loads(Path(args.model).read_text()))
    plane = model.plane()
    warnings: list[str] = []
    mode = args.mode
    if mode == "ey":
        rep = construct_invariant_optimal(model)
        target = PlanePoint(utility=reg.vertex_ey_ls(plane), leakage=0.0, kind="regression")
    elif mode == "ea":
        rep = construct_sufficiency_optimal(model)
        target = PlanePoint(utility=plane.var_y, leakage=reg.vertex_ea_ls(plane), kind="regression")
    elif mode.startswith("lagrangian:"):
        lam = float(mode.split(":", 1)[1])
        rep = construct_lagrangian_optimal(model, lam)
        target = closed_form_plane_point(model, rep)
        objective = lam * target.leakage - target.utility
        gap = abs(objective - reg.lagrangian_bound(plane, lam))
        if gap > 1e-8:
            warnings.append(f"objective misses the closed-form bound by {gap:.3e}")
    elif mode.startswith("target:"):
        m = np.asarray(json.loads(Path(mode.split(":", 1)[1]).read_text()), dtype=float)
        rep = realize_psd_target(model, PsdTarget(m=m))
        target = PlanePoint(
            utility=float(model.y @ m @ model.y),
            leakage=float(model.a @ m @ model.a),
            kind="regression",
        )
    else:
        raise DataError(f"unknown oracle mode {mode!r}")
    if args.mc > 0:
        ach = monte_carlo_verify(model, rep, n=args.mc, seed=args.seed, bound_target=target)
        ach_dict = ach.to_dict()
    else:
        closed = closed_form_plane_point(model, rep)
        attained = (
            abs(closed.utility - target.utility) <= 1e-8
            and abs(closed.leakage - target.leakage) <= 1e-8
        )
        ach_dict = {
            "closed_form": {"utility": closed.utility, "leakage": closed.leakage},
            "bound_target": {"utility": target.utility, "leakage": target.leakage},
            "verdict": "attained" if attained else "gap",
            "n": 0,
            "seed": args.seed,
        }
    report = _report(
        "oracle",
        "regression",
        inputs={"model": args.model, "mode": mode, "mc": args.mc, "seed": args.seed},
        oracle={"mode": mode, "representation": rep.to_dict(), "report": ach_dict},
        warnings=warnings,
    )
    _emit(report, args.format)
    return EXIT_OK


def cmd_mix(args) -> int:
    kind = args.task or _infer_kind(args.rep0)
    rep0 = load_representation_csv(args.rep0, kind=kind)
    rep1 = load_representation_csv(args.rep1, kind=kind)
    mixed = mix(rep0, rep1, u=args.u, seed=args.seed)
    if args.out:
        save_representation_csv(args.out, mixed.base)
    else:
        sys.stdout.write(representation_csv_text(mixed.base))
    return EXIT_OK


def _infer_kind(rep_path: str) -> str:
    rep = load_representation_csv(rep_path, kind="regression")
    binary = np.isin(rep.y, (0.0, 1.0)).all() and np.isin(rep.a, (0.0, 1.0)).all()
    return "classification" if binary else "regression"


def cmd_plot(args) -> int:
    report = json.loads(Path(args.report).read_text())
    render_information_plane(report, args.out)
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser, *, task_required: bool = True) -> None:
    parser.add_argument("--task", choices=["classification", "regression"],
                        required=task_required, help="analysis setting")
    parser.add_argument("--target-col", default="y")
    parser.add_argument("--attribute-col", default="a")
    parser.add_argument("--feature-cols", default="", help="comma-separated feature columns")
    parser.add_argument("--bins", type=int, default=None, help="discretization bins per coordinate")
    parser.add_argument("--knn-k", type=int, default=None)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--format", choices=["json", "csv"], default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="infoplane",
        description="accuracy-invariance tradeoff analysis on the information plane",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="place representations on the plane")
    p.add_argument("dataset")
    p.add_argument("representations", nargs="*")
    p.add_argument("--samples", type=int, default=65)
    p.add_argument("--plot", default=None, help="also render an SVG figure to this path")
    _add_common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("frontier", help="emit the feasible region boundary")
    p.add_argument("dataset", nargs="?", default=None)
    p.add_argument("--plane-json", default=None, help="plane statistics JSON instead of a dataset")
    p.add_argument("--samples", type=int, default=65)
    p.add_argument("--plot", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_frontier)

    p = sub.add_parser("certify", help="finite-sample suboptimality certificate")
    p.add_argument("dataset")
    p.add_argument("representation")
    p.add_argument("--epsilon", type=float, required=True)
    _add_common(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("oracle", help="constructive Gaussian achievability")
    p.add_argument("model", help="GaussianModel JSON file")
    p.add_argument("--mode", required=True, help="ey | ea | lagrangian:LAM | target:MATRIX_JSON")
    p.add_argument("--mc", type=int, default=0, help="Monte Carlo sample count (0 = closed form only)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("mix", help="randomized interpolation of two representations")
    p.add_argument("rep0")
    p.add_argument("rep1")
    p.add_argument("--u", type=float, required=True)
    p.add_argument("--out", default=None)
    _add_common(p, task_required=False)
    p.set_defaults(func=cmd_mix)

    p = sub.add_parser("plot", help="render a report JSON to an SVG figure")
    p.add_argument("report")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)

    return parser


def _error_json(exc: Exception) -> str:
    return json.dumps({"error": {"type": type(exc).__name__, "message": str(exc)}})


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("INFOPLANE_LOG", "WARNING").upper())
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DataError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(_error_json(exc))
        return EXIT_INPUT
    except (InfoPlaneError, ValueError, np.linalg.LinAlgError) as exc:
        print(_error_json(exc))
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
