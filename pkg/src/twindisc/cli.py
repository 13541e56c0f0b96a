"""Batch front end: simulate -> match -> identify -> discriminate -> select.

Subcommands ingest/emit CSV datasets and JSON reports.  Exit codes form a
stable contract: 0 success, 1 computational failure, 2 usage or validation
error.  All randomness flows from a single seed that is recorded in the
outputs, so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import math
import os
import sys
from dataclasses import dataclass
from importlib import resources

import jsonschema
import numpy as np

from . import coding, configio, criteria, matching, sysid, twin
from .nugap import DEFAULT_GRID_SIZE, UnitCirclePoleError, select_nominal

EXIT_OK = 0
EXIT_COMPUTE = 1
EXIT_USAGE = 2

THREADS_ENV_VAR = "TWIN_DISCRIM_THREADS"

CRITERION_KEYS = ("information_gain", "naic", "bic", "mdl")

_REPORT_CSV_COLUMNS = (
    "setpoint,order,n_params,"
    "l_t_y,l_bj_y,ig_y,l_t_u,l_bj_u,ig_u,ig_total,"
    "naic_y,naic_u,naic_total,bic_y,bic_u,bic_total,mdl_y,mdl_u,mdl_total,"
    "best_ig,best_naic,best_bic,best_mdl"
)


@dataclass(frozen=True)
class DiscriminateOptions:
    orders: tuple = sysid.DEFAULT_ORDER_LABELS
    precision: int = 2
    naic_form: str = "normalized"
    nugap_grid: int = DEFAULT_GRID_SIZE
    strict_winding: bool = False
    seed: int = 0
    residual_source: str = "sim"
    threads: int = 1


def _atomic_write_text(path: str, text: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _num(value: float):
    """JSON-safe number: non-finite collapses to null (flags carry the why)."""
    return float(value) if math.isfinite(value) else None


def _fmt(value) -> str:
    """Shortest round-trip text for report CSV cells."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def load_report_schema() -> dict:
    with resources.files("twindisc.schemas").joinpath(
        "discrimination_report.schema.json"
    ).open("r", encoding="utf-8") as fh:
        return json.load(fh)


def validate_report(report: dict) -> None:
    jsonschema.validate(report, load_report_schema())


def _best_orders(rows: list) -> tuple[dict, dict]:
    """Flag the winning order per criterion; exact ties go to the lowest index."""
    best: dict = {}
    ties: dict = {}
    scored = {
        "information_gain": [(-(r["ig_total"]), r["order"]) for r in rows],
        "naic": [(r["_naic_total"], r["order"]) for r in rows],
        "bic": [(r["_bic_total"], r["order"]) for r in rows],
        "mdl": [(r["mdl_total"], r["order"]) for r in rows],
    }
    for key, pairs in scored.items():
        if not pairs:
            best[key] = None
            ties[key] = False
            continue
        values = [v for v, _ in pairs]
        winner = min(range(len(values)), key=values.__getitem__)
        best[key] = pairs[winner][1]
        ties[key] = sum(1 for v in values if v == values[winner]) > 1
    return best, ties


def _nugap_model_order(best: dict) -> str | None:
    """Consensus order for the gap stage: majority of naic/bic/mdl winners."""
    votes = [best[k] for k in ("naic", "bic", "mdl") if best.get(k) is not None]
    if not votes:
        return None
    counts: dict = {}
    for v in votes:
        counts[v] = counts.get(v, 0) + 1
    top = max(counts.values())
    return min(label for label, c in counts.items() if c == top)


def _score_dataset(dataset: twin.TimeSeriesDataset, opts: DiscriminateOptions) -> dict:
    """Identify the model family on one dataset and score every order."""
    cfg_coding = coding.CodingConfig(decimal_precision=opts.precision)
    family = sysid.identify_family(
        dataset, opts.orders, sysid.FitOptions(seed=opts.seed)
    )
    errors = [f"order {lbl} channel {ch}: {msg}" for lbl, ch, msg in family.errors]

    rows = []
    for label in opts.orders:
        if label not in family.models:
            continue
        simo = family.models[label]
        fit_y = family.fits[(label, "y")]
        fit_u = family.fits[(label, "u")]
        n_params = fit_y.model.n_params
        gains = coding.simo_information_gain(dataset, simo, cfg_coding)
        crit = criteria.simo_criteria(
            dataset,
            simo,
            n_params,
            residual_source=opts.residual_source,
            pred_residuals=(fit_y.pred_residuals, fit_u.pred_residuals),
            naic_form=opts.naic_form,
        )
        channel = {}
        for name, ig, rep in (("y", gains.y, crit.y), ("u", gains.u, crit.u)):
            channel[name] = {
                "l_trivial": ig.l_trivial,
                "l_model": ig.l_model,
                "gain": ig.gain,
                "explanation_degree": ig.explanation_degree,
                "naic": _num(rep.naic),
                "bic": _num(rep.bic),
                "mdl": rep.mdl,
                "loss": rep.loss,
                "zero_loss": rep.zero_loss,
            }
        rows.append(
            {
                "order": label,
                "n_params": n_params,
                "y": channel["y"],
                "u": channel["u"],
                "ig_total": gains.total_gain,
                "naic_total": _num(crit.naic_total),
                "bic_total": _num(crit.bic_total),
                "mdl_total": crit.mdl_total,
                "_naic_total": crit.naic_total,
                "_bic_total": crit.bic_total,
            }
        )

    best, ties = _best_orders(rows)
    for row in rows:
        row.pop("_naic_total")
        row.pop("_bic_total")
    order_for_gap = _nugap_model_order(best)
    return {
        "label": dataset.label,
        "n_samples": len(dataset),
        "sample_time": dataset.sample_time,
        "orders": rows,
        "best": best,
        "ties": ties,
        "nugap_model_order": order_for_gap,
        "errors": errors,
        "_gap_model": family.models.get(order_for_gap) if order_for_gap else None,
    }


def discriminate_datasets(
    datasets: list, opts: DiscriminateOptions = DiscriminateOptions()
) -> dict:
    """Run identification + scoring on each dataset, then the gap selection.

    Per-dataset failures are isolated into the report's error section; the
    nu-gap stage runs over the per-dataset consensus-best models and is
    omitted (with a note) when fewer than two are available.
    """
    results: list = [None] * len(datasets)
    errors: list = []

    def work(i: int):
        return i, _score_dataset(datasets[i], opts)

    max_workers = max(1, opts.threads)
    if max_workers > 1 and len(datasets) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=max_workers) as pool:
            futures = [pool.submit(work, i) for i in range(len(datasets))]
            outcomes = []
            for fut in futures:
                try:
                    outcomes.append(fut.result())
                except Exception as exc:  # noqa: BLE001 - isolate per-dataset failure
                    outcomes.append(exc)
            for i, out in enumerate(outcomes):
                if isinstance(out, Exception):
                    errors.append(f"dataset {datasets[i].label!r}: {out}")
                else:
                    results[out[0]] = out[1]
    else:
        for i in range(len(datasets)):
            try:
                results[i] = work(i)[1]
            except Exception as exc:  # noqa: BLE001
                errors.append(f"dataset {datasets[i].label!r}: {exc}")

    dataset_reports = [r for r in results if r is not None]

    gap_entries = [
        (rep["label"], rep["_gap_model"])
        for rep in dataset_reports
        if rep["_gap_model"] is not None
    ]
    nugap_section = None
    nugap_note = ""
    if len(gap_entries) < 2:
        nugap_note = "nu-gap selection needs >=2 identified models; section omitted"
    else:
        try:
            models = [m for _, m in gap_entries]
            matrix, winner, tie = select_nominal(
                models, grid_size=opts.nugap_grid, strict_winding=opts.strict_winding
            )
            labels = [lbl for lbl, _ in gap_entries]
            nugap_section = {
                "labels": labels,
                "matrix": [[float(v) for v in row] for row in matrix.values],
                "cumulative": [float(v) for v in matrix.cumulative],
                "winner_index": winner,
                "winner_label": labels[winner],
                "tie": tie,
            }
        except (UnitCirclePoleError, ValueError) as exc:
            nugap_note = f"nu-gap selection failed: {exc}"
            errors.append(nugap_note)

    for rep in dataset_reports:
        rep.pop("_gap_model", None)

    return {
        "config": {
            "orders": list(opts.orders),
            "precision": opts.precision,
            "naic_form": opts.naic_form,
            "nugap_grid": opts.nugap_grid,
            "strict_winding": opts.strict_winding,
            "seed": opts.seed,
            "residual_source": opts.residual_source,
        },
        "datasets": dataset_reports,
        "nugap": nugap_section,
        "nugap_note": nugap_note,
        "errors": errors,
    }


def report_csv_text(report: dict) -> str:
    """Flatten a report into the tabular per-(setpoint, order) CSV."""
    lines = [_REPORT_CSV_COLUMNS]
    for ds in report["datasets"]:
        best = ds["best"]
        for row in ds["orders"]:
            y, u = row["y"], row["u"]
            cells = [
                ds["label"],
                row["order"],
                _fmt(row["n_params"]),
                _fmt(y["l_trivial"]), _fmt(y["l_model"]), _fmt(y["gain"]),
                _fmt(u["l_trivial"]), _fmt(u["l_model"]), _fmt(u["gain"]),
                _fmt(row["ig_total"]),
                _fmt(y["naic"]), _fmt(u["naic"]), _fmt(row["naic_total"]),
                _fmt(y["bic"]), _fmt(u["bic"]), _fmt(row["bic_total"]),
                _fmt(y["mdl"]), _fmt(u["mdl"]), _fmt(row["mdl_total"]),
                _fmt(best["information_gain"] == row["order"]),
                _fmt(best["naic"] == row["order"]),
                _fmt(best["bic"] == row["order"]),
                _fmt(best["mdl"] == row["order"]),
            ]
            lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def write_report(report: dict, out_path: str) -> tuple[str, str]:
    """Emit the JSON and CSV forms of a report (validated against the schema)."""
    validate_report(report)
    base, ext = os.path.splitext(out_path)
    json_path = out_path if ext == ".json" else f"{out_path}.json"
    csv_path = f"{base if ext == '.json' else out_path}.csv"
    _atomic_write_text(json_path, json.dumps(report, indent=2) + "\n")
    _atomic_write_text(csv_path, report_csv_text(report))
    return json_path, csv_path


def cmd_simulate(args) -> int:
    try:
        base_cfg, setpoints = configio.load_sim_config(args.config)
        params_map = configio.load_params_file(args.params)
        by_setpoint = {
            sp: configio.params_for_setpoint(params_map, sp, args.params)
            for sp in setpoints
        }
    except configio.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    os.makedirs(args.out_dir, exist_ok=True)
    try:
        datasets = twin.generate_campaign(by_setpoint, base_cfg, seed=args.seed)
    except twin.SimulationDivergedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE

    entries = []
    for i, ds in enumerate(datasets):
        name = f"dataset_{ds.label}.csv"
        path = os.path.join(args.out_dir, name)
        tmp = f"{path}.tmp"
        twin.write_csv(ds, tmp)
        os.replace(tmp, path)
        entries.append({"label": ds.label, "file": name, "sensor_seed": args.seed + i})
        print(f"wrote {path} ({len(ds)} samples)")

    manifest = {
        "seed": args.seed,
        "config": os.path.basename(args.config),
        "config_sha256": _sha256_file(args.config),
        "params": os.path.basename(args.params),
        "params_sha256": _sha256_file(args.params),
        "datasets": entries,
    }
    manifest_path = os.path.join(args.out_dir, "manifest.json")
    _atomic_write_text(manifest_path, json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {manifest_path}")
    return EXIT_OK


def cmd_discriminate(args) -> int:
    datasets = []
    load_errors = []
    for path in args.datasets:
        try:
            datasets.append(twin.read_csv(path))
        except (OSError, ValueError) as exc:
            load_errors.append(f"{path}: {exc}")
    if not datasets:
        for msg in load_errors:
            print(f"error: {msg}", file=sys.stderr)
        return EXIT_USAGE

    opts = DiscriminateOptions(
        orders=tuple(args.orders.split(",")),
        precision=args.precision,
        naic_form=args.naic_form,
        nugap_grid=args.nugap_grid,
        strict_winding=args.strict_winding,
        seed=args.seed,
        residual_source=args.residuals,
        threads=int(os.environ.get(THREADS_ENV_VAR, "1")),
    )
    try:
        for label in opts.orders:
            sysid.OrderSpec.from_label(label)
        if opts.precision < 0:
            raise ValueError("--precision must be >= 0")
        if opts.nugap_grid < 64:
            raise ValueError("--nugap-grid must be >= 64")
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    report = discriminate_datasets(datasets, opts)
    report["errors"] = load_errors + report["errors"]
    json_path, csv_path = write_report(report, args.out)
    print(f"wrote {json_path}")
    print(f"wrote {csv_path}")
    if not report["datasets"]:
        for msg in report["errors"]:
            print(f"error: {msg}", file=sys.stderr)
        return EXIT_COMPUTE
    return EXIT_OK


def _parse_initial(text: str) -> twin.PeltierParams:
    if text in matching.INITIAL_GUESS_PRESETS:
        return matching.INITIAL_GUESS_PRESETS[text]
    parts = text.split(",")
    if len(parts) != 3:
        presets = ", ".join(sorted(matching.INITIAL_GUESS_PRESETS))
        raise ValueError(
            f"initial guess must be one of the presets ({presets}) "
            f"or 'alpha,k,c' in V/K, W/K, J/K"
        )
    alpha, k_cond, c_heat = (float(p) for p in parts)
    return twin.PeltierParams(
        alpha=alpha, r_ohm=matching.MEASURED_RESISTANCE, k_cond=k_cond, c_heat=c_heat
    )


def cmd_match(args) -> int:
    try:
        dataset = twin.read_csv(args.dataset)
    except (OSError, ValueError) as exc:
        print(f"error: {args.dataset}: {exc}", file=sys.stderr)
        return EXIT_USAGE

    sim_config = None
    if args.config:
        try:
            sim_config, _ = configio.load_sim_config(args.config)
        except configio.ConfigError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE

    try:
        initial = _parse_initial(args.initial)
        weights = (1.0, 1.0) if args.channels == "yu" else (1.0, 0.0)
        problem = matching.MatchProblem(
            dataset=dataset, initial=initial, weights=weights, sim_config=sim_config
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        result = matching.match_parameters(problem)
    except matching.MatchFailureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE

    payload = {
        "dataset": dataset.label,
        "n_samples": len(dataset),
        "initial": args.initial,
        "channels": args.channels,
        "params": {
            "alpha_v_per_k": result.params.alpha,
            "r_ohm": result.params.r_ohm,
            "k_w_per_k": result.params.k_cond,
            "c_j_per_k": result.params.c_heat,
        },
        "sse": result.sse,
        "iterations": result.iterations,
        "converged": result.converged,
        "at_bound": result.at_bound,
        "start_index": result.start_index,
        "start_costs": [(_num(c)) for c in result.start_costs],
    }
    _atomic_write_text(args.out, json.dumps(payload, indent=2) + "\n")
    print(f"wrote {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twindisc",
        description="Digital-twin model discrimination pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate campaign datasets from configs")
    p_sim.add_argument("--config", required=True, help="simulation config (INI)")
    p_sim.add_argument("--params", required=True, help="Peltier parameter file (INI)")
    p_sim.add_argument("--out-dir", required=True, help="output directory for CSVs")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.set_defaults(func=cmd_simulate)

    p_dis = sub.add_parser("discriminate", help="identify, score and select models")
    p_dis.add_argument("datasets", nargs="+", help="dataset CSV paths")
    p_dis.add_argument("--out", required=True, help="report path (JSON + CSV emitted)")
    p_dis.add_argument("--orders", default=",".join(sysid.DEFAULT_ORDER_LABELS))
    p_dis.add_argument("--precision", type=int, default=2)
    p_dis.add_argument("--naic-form", choices=criteria.NAIC_FORMS, default="normalized")
    p_dis.add_argument("--nugap-grid", type=int, default=DEFAULT_GRID_SIZE)
    p_dis.add_argument("--strict-winding", action="store_true")
    p_dis.add_argument("--seed", type=int, default=0)
    p_dis.add_argument("--residuals", choices=("sim", "pred"), default="sim")
    p_dis.set_defaults(func=cmd_discriminate)

    p_match = sub.add_parser("match", help="behavioral matching on one dataset")
    p_match.add_argument("dataset", help="dataset CSV path")
    p_match.add_argument(
        "--initial",
        default="datasheet",
        help="preset name (datasheet, experience, measurement) or 'alpha,k,c'",
    )
    p_match.add_argument("--channels", choices=("yu", "y"), default="yu")
    p_match.add_argument("--config", default=None, help="simulation config (INI)")
    p_match.add_argument("--out", required=True, help="result JSON path")
    p_match.set_defaults(func=cmd_match)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
