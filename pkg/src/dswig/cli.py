"""Command line interface.

One verb per engine capability: check, swig, delta, render for graph work;
vas and table1 for adjustment sets; simulate, estimate, event-study,
pretrend for the numerical side; serve for the HTTP facade. Output goes to
stdout (data) and stderr (diagnostics); identical arguments produce
identical bytes.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import actions
from .adjust import PATTERN_DISPLAY, RESTRICTION_NAMES
from .dsl import parse_document, serialize_graph, split_names
from .dot import to_dot
from .errors import DswigError
from .estimate import Control, Strategy, did_gt, event_study, pretrend_battery
from .simulate import Panel, SimConfig, oracle_att_from_panel, simulate_panel
from .transform import run_pipeline


def _dump_json(data) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":")) + "\n"


def _emit(args, data: dict, text: str | None = None):
    if getattr(args, "quiet", False):
        return
    if getattr(args, "format", "text") == "json":
        sys.stdout.write(_dump_json(data))
    else:
        sys.stdout.write(text if text is not None else _dump_json(data))


def _read_document(path: str):
    text = Path(path).read_text(encoding="utf-8")
    return parse_document(text, name=Path(path).stem)


def _final_stage(doc):
    return run_pipeline(doc.graph, doc.pipeline) if doc.pipeline else doc.graph


def _restrictions_arg(value: str | None):
    return list(split_names(value)) if value else []


def cmd_check(args) -> int:
    text = Path(args.file).read_text(encoding="utf-8")
    doc = parse_document(text, name=Path(args.file).stem)
    _final_stage(doc)  # runs the embedded pipeline, validating it
    lines = [f"ok: {len(doc.graph.nodes)} nodes, {len(doc.graph.edges)} edges, {len(doc.pipeline)} pipeline statements"]
    result: dict = {"graph": doc.graph.to_json(), "statements": len(doc.pipeline)}
    if args.dsep:
        # shared action layer, so the JSON output is byte-identical to the
        # HTTP facade's /api/dsep result for the same file
        result = actions.act_dsep({"graph": text, "query": args.dsep, "mode": args.mode})
        if args.mode == "dsep":
            lines.append("SEPARATED" if result["separated"] else "NOT SEPARATED")
        else:
            lines.append(
                "SEPARATED (implies conditional independence)"
                if result["separated"]
                else "NOT SEPARATED (no implied conditional independence)"
            )
    _emit(args, result, "\n".join(lines) + "\n")
    return 0


def cmd_render(args) -> int:
    doc = _read_document(args.file)
    stage = doc.graph if args.stage == "dag" else _final_stage(doc)
    if args.format == "json":
        sys.stdout.write(_dump_json(stage.to_json()))
    elif args.format == "dsl":
        if hasattr(stage, "graph"):
            raise DswigError("dsl output is only defined for the dag stage")
        sys.stdout.write(serialize_graph(stage))
    else:
        sys.stdout.write(to_dot(stage))
    return 0


def _fix_mapping(text: str) -> dict[str, int]:
    out = {}
    for item in split_names(text):
        key, _, value = item.partition("=")
        if value not in ("0", "1"):
            raise DswigError(f"bad fix assignment {item!r} (want D=0 or D=1)")
        out[key] = int(value)
    if not out:
        raise DswigError("empty fix assignment")
    return out


def cmd_swig(args) -> int:
    doc = _read_document(args.file)
    result = actions.act_swig(
        {
            "graph": doc.graph.to_json(),
            "fix": _fix_mapping(args.fix),
            "relabel": not args.no_relabel,
        }
    )
    _emit(args, result["swig"], result["dot"])
    return 0


def cmd_delta(args) -> int:
    doc = _read_document(args.file)
    if not doc.pipeline:
        raise DswigError(f"{args.file} carries no pipeline statements (fix/delta/prune)")
    stage = run_pipeline(doc.graph, doc.pipeline)
    if not hasattr(stage, "deltas"):
        raise DswigError("pipeline produced no difference node; add a delta statement")
    _emit(args, stage.to_json(), to_dot(stage))
    return 0


def cmd_vas(args) -> int:
    params: dict = {
        "g": args.g,
        "t": args.t,
        "restrictions": _restrictions_arg(args.restrict),
        "method": args.method,
    }
    control = Control.parse(args.control)
    params["control"] = control.kind
    if control.kind == "nyt":
        params["s"] = control.s
    if args.graph:
        params["graph"] = Path(args.graph).read_text(encoding="utf-8")
    elif args.template:
        raw = args.template.removeprefix("T=")
        try:
            params["template"] = {"T": int(raw)}
        except ValueError:
            raise DswigError(f"bad template spec {args.template!r} (want T=<n> or <n>)") from None
    else:
        raise DswigError("vas needs --graph FILE or --template T")
    result = actions.act_vas(params)
    lines = [
        f"ATT(g={result['g']}, t={result['t']}) control={result['control']}",
        f"minimal (potential):  {', '.join(result['minimal_potential']) or '(none)'}",
        f"minimal (observable): {', '.join(result['minimal_observable']) or '(none)'}",
        f"feasible: {'yes' if result['feasible'] else 'no'}",
    ]
    family = result["vas_family"]
    if family["kind"] == "interval":
        lines.append(f"valid sets: every Z with {{{', '.join(family['lower'])}}} <= Z <= {{{', '.join(family['upper'])}}}")
    elif family["kind"] == "list":
        lines.append(f"valid sets ({len(family['sets'])}): " + "; ".join("{" + ", ".join(s) + "}" for s in family["sets"]))
    else:
        lines.append("valid sets: none")
    _emit(args, result, "\n".join(lines) + "\n")
    return 0


_TABLE_COLUMNS = ("pre_trends", "short_term", "dynamic")


def _table1_text(result: dict) -> str:
    flag_keys = (
        "swas_staggered",
        "no_outcome_dynamics",
        "no_within_period_dx",
        "no_dx_feedback",
        "no_xy_dynamics",
        "no_within_period_xy",
    )
    header = f"{'restrictions (a/y/dxt/dx1/xy1/xyt)':<36} {'pre-trends':<14} {'short-term':<14} dynamic"
    lines = [f"minimal valid adjustment sets (T={result['T']})", header]
    for row in result["rows"]:
        flags = "/".join("y" if row["restrictions"][k] else "n" for k in flag_keys)
        cells = [PATTERN_DISPLAY.get(row[c], row[c]) for c in _TABLE_COLUMNS]
        lines.append(f"{flags:<36} {cells[0]:<14} {cells[1]:<14} {cells[2]}")
    return "\n".join(lines) + "\n"


def _table1_csv(result: dict) -> str:
    flag_keys = sorted(RESTRICTION_NAMES.values())
    lines = [",".join(flag_keys + list(_TABLE_COLUMNS))]
    for row in result["rows"]:
        cells = ["1" if row["restrictions"][k] else "0" for k in flag_keys]
        cells += [row[c] for c in _TABLE_COLUMNS]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def cmd_table1(args) -> int:
    result = actions.act_table1({"T": args.T})
    if args.format == "csv":
        sys.stdout.write(_table1_csv(result))
    else:
        _emit(args, result, _table1_text(result))
    return 0


def cmd_simulate(args) -> int:
    cfg = SimConfig(
        n=args.n,
        T=args.T,
        rho=args.rho,
        beta_xd=args.beta_xd,
        seed=args.seed,
        zero_effect=args.zero_effect,
        xy_effect=not args.no_xy_effect,
    )
    panel = simulate_panel(cfg)
    if args.out:
        panel.to_csv(args.out, include_latents=args.latents)
        if not args.quiet:
            sys.stdout.write(f"wrote {panel.n} units x {panel.T} periods to {args.out}\n")
    else:
        panel.to_csv(sys.stdout, include_latents=args.latents)
    return 0


def _load_panel(path: str) -> Panel:
    return Panel.read_csv(path)


def _estimate_row(panel: Panel, res, with_oracle: bool) -> dict:
    row = res.to_json()
    if with_oracle and res.t != res.g - 1:
        row["oracle_att"] = oracle_att_from_panel(panel, res.g, res.t)
    return row


def cmd_estimate(args) -> int:
    panel = _load_panel(args.panel)
    res = did_gt(
        panel,
        args.g,
        args.t,
        Strategy.parse(args.strategy),
        Control.parse(args.control),
        se_method="bootstrap" if args.bootstrap else "analytic",
        bootstrap=args.bootstrap or 200,
        seed=args.seed,
    )
    row = _estimate_row(panel, res, panel.has_oracle())
    text = (
        f"DiD(g={res.g}, t={res.t}, Z={res.strategy}, control={res.control}): "
        f"{res.estimate:+.6f} (se {res.std_error:.6f}, n_treated {res.n_treated}, "
        f"n_control {res.n_control}, dropped strata {res.dropped_strata})"
    )
    if "oracle_att" in row:
        text += f"\noracle ATT: {row['oracle_att']:+.6f}"
    _emit(args, row, text + "\n")
    return 0


def cmd_event_study(args) -> int:
    panel = _load_panel(args.panel)
    rows = [
        _estimate_row(panel, res, panel.has_oracle())
        for res in event_study(
            panel,
            args.g,
            Strategy.parse(args.strategy),
            Control.parse(args.control),
            se_method="bootstrap" if args.bootstrap else "analytic",
            bootstrap=args.bootstrap or 200,
            seed=args.seed,
        )
    ]
    if args.format == "csv":
        cols = ["g", "t", "strategy", "control", "estimate", "std_error", "n_treated", "n_control", "dropped_strata"]
        if rows and "oracle_att" in rows[0]:
            cols.append("oracle_att")
        lines = [",".join(cols)]
        for row in rows:
            lines.append(",".join(str(row.get(c, "")) for c in cols))
        sys.stdout.write("\n".join(lines) + "\n")
        return 0
    text_lines = [
        f"t={row['t']}: {row['estimate']:+.6f} (se {row['std_error']:.6f})"
        + (f" oracle {row['oracle_att']:+.6f}" if "oracle_att" in row else "")
        for row in rows
    ]
    _emit(args, {"rows": rows}, "\n".join(text_lines) + "\n")
    return 0


def cmd_pretrend(args) -> int:
    panel = _load_panel(args.panel)
    report = pretrend_battery(panel, args.g, level=args.level, control=Control.parse(args.control))
    lines = [f"pre-trend battery for group {args.g} at level {args.level}"]
    for row in report.rows:
        lines.append(
            f"  t={row.t} {row.hypothesis}: {row.estimate:+.6f} (se {row.std_error:.6f}, |t| {abs(row.t_stat):.2f})"
        )
    for hyp, rej in report.rejected.items():
        lines.append(f"  {hyp}: {'REJECTED' if rej else 'not rejected'}")
    lines.extend("  " + s for s in report.implications)
    _emit(args, report.to_json(), "\n".join(lines) + "\n")
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    serve(port=args.port, host=args.host, static_dir=args.static)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dswig",
        description="Causal-graph engine for difference-in-differences designs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt=("text", "json")):
        p.add_argument("--format", choices=fmt, default=fmt[0])
        p.add_argument("--quiet", action="store_true")

    p = sub.add_parser("check", help="parse a graph file, run its pipeline, optionally query")
    p.add_argument("file")
    p.add_argument("--dsep", metavar="QUERY", help='e.g. "dY1 _||_ D | X0, X1"')
    p.add_argument("--mode", choices=("implied", "dsep"), default="implied")
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("render", help="export a graph stage as DOT, JSON, or canonical DSL")
    p.add_argument("file")
    p.add_argument("--stage", choices=("dag", "final"), default="final")
    p.add_argument("--format", choices=("dot", "json", "dsl"), default="dot")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("swig", help="fix treatments and print the split/relabel result")
    p.add_argument("file")
    p.add_argument("--fix", required=True, metavar="D1=0,D2=0")
    p.add_argument("--no-relabel", action="store_true")
    common(p, fmt=("dot", "json"))
    p.set_defaults(func=cmd_swig)

    p = sub.add_parser("delta", help="run the file's fix/delta/prune pipeline")
    p.add_argument("file")
    common(p, fmt=("dot", "json"))
    p.set_defaults(func=cmd_delta)

    p = sub.add_parser("vas", help="minimal and complete valid adjustment sets")
    p.add_argument("--graph", metavar="FILE")
    p.add_argument("--template", metavar="T=<n>")
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--control", default="nt", metavar="nt|nyt:<s>")
    p.add_argument("--restrict", metavar="r-alpha,r-y,...", help=", ".join(sorted(RESTRICTION_NAMES)))
    p.add_argument("--method", choices=("auto", "formula", "search"), default="auto")
    common(p)
    p.set_defaults(func=cmd_vas)

    p = sub.add_parser("table1", help="minimal valid adjustment sets per restriction row")
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("simulate", help="simulate a staggered panel (CSV)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--T", type=int, default=6)
    p.add_argument("--rho", type=float, default=0.9)
    p.add_argument("--beta-xd", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--zero-effect", action="store_true")
    p.add_argument("--no-xy-effect", action="store_true")
    p.add_argument("--latents", action="store_true", help="include latent and counterfactual columns")
    p.add_argument("--out", metavar="FILE")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="one conditional DiD cell")
    p.add_argument("--panel", required=True, metavar="CSV")
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--strategy", default="pre-outcome", metavar="none|pre-treatment|pre-outcome|two-point|full|custom:<t,..>")
    p.add_argument("--control", default="nt", metavar="nt|nyt:<s>")
    p.add_argument("--bootstrap", type=int, default=0, metavar="N", help="bootstrap replicates (default: analytic SE)")
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("event-study", help="estimates for every period except the base")
    p.add_argument("--panel", required=True, metavar="CSV")
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--strategy", default="pre-outcome")
    p.add_argument("--control", default="nt")
    p.add_argument("--bootstrap", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_event_study)

    p = sub.add_parser("pretrend", help="pre-trend hypothesis battery")
    p.add_argument("--panel", required=True, metavar="CSV")
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--level", type=float, default=0.05)
    p.add_argument("--control", default="nt")
    common(p)
    p.set_defaults(func=cmd_pretrend)

    p = sub.add_parser("serve", help="HTTP facade over the graph engine")
    p.add_argument("--port", type=int, default=8787)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--static", metavar="DIR", help="also serve a built web UI from this directory")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DswigError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except FileNotFoundError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
