"""``gatenergy`` command-line front end.

Exit codes: 0 success, 2 usage or validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import reports
from .decomposition import CoefficientMultiset, wht_decompose
from .energetics import (
    HBAR_SI,
    FieldConfig,
    FieldMode,
    Objective,
    energy_report,
    multiset_objective,
    optimize_branch,
)
from .error_model import mc_verify
from .errors import GateEnergyError, NumericalFailure
from .evolution import DriveEnvelope, figure1_run

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise GateEnergyError(message)


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isinf(x)):
        return "inf"
    return f"{x:.12g}"


def _table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(_cell(c, w) for c, w in zip(r, widths)).rstrip() for r in rows]
    return "\n".join(line.rstrip() for line in lines)


def _cell(text: str, width: int) -> str:
    try:
        float(text)
    except ValueError:
        return text.ljust(width)
    return text.rjust(width)


def _emit(payload: dict, schema: str | None, as_json: bool, text: str, out=None) -> None:
    if schema:
        reports.validate(payload, schema)
    if out is not None:
        Path(out).write_text(reports.dumps(payload), encoding="utf-8")
    if as_json:
        sys.stdout.write(reports.dumps(payload))
    else:
        print(text)


def _positive(name: str, value: float) -> None:
    if not (value > 0 and math.isfinite(value)):
        raise GateEnergyError(f"{name} must be positive and finite, got {value}")


def _multiset_text(values) -> str:
    return "{" + ", ".join(_fmt(v) for v in values) + "}"


# --------------------------------------------------------------------- commands


def cmd_decompose(args) -> int:
    target = reports.resolve_target(args.target, args.controls)
    branch = reports.parse_branch(args.branch, target.unitary.shape[0])
    payload = reports.decomposition_report(target, branch, args.basis)
    lines = [
        f"gate:       {payload['gate']}",
        f"branch:     {payload['branch']}",
        f"basis:      {payload['basis']}",
        f"multiset:   {_multiset_text(payload['multiset'])}",
        f"entangling: {payload['entangling']}  (max Pauli weight {payload['max_weight']})",
        f"commuting:  {payload['commuting']}",
    ]
    rows = [[t["label"], _fmt(t["coefficient"])] for t in payload["terms"]]
    text = "\n".join(lines) + "\n\n" + _table(["term", "coefficient"], rows)
    _emit(payload, "decompose", args.json, text)
    return EXIT_OK


def _hbar(args) -> float:
    return HBAR_SI if args.si else args.hbar


def _budget(args, circuit, label: str) -> int:
    rep = reports.circuit_budget(circuit, args.epsilon, args.omega0, _hbar(args), args.allow_infinite)
    payload = rep.to_dict()
    payload["circuit"] = label
    rows = [
        [str(i), r.gate, _fmt(r.epsilon), _fmt(r.independent_bound), _fmt(r.shared_bound)]
        for i, r in enumerate(rep.per_gate)
    ]
    rows.append(["", "total", _fmt(rep.epsilon_total), _fmt(rep.total_independent), _fmt(rep.total_shared)])
    text = f"circuit {label}: {len(rep.per_gate)} gates, eps_g = eps_total / G\n\n" + _table(
        ["#", "gate", "epsilon", "independent", "shared"], rows
    )
    _emit(payload, "budget", args.json, text)
    return EXIT_OK


def cmd_bound(args) -> int:
    _positive("omega0", args.omega0)
    _positive("hbar", _hbar(args))
    if args.epsilon < 0 or not math.isfinite(args.epsilon):
        raise GateEnergyError(f"epsilon must be non-negative, got {args.epsilon}")
    target = reports.resolve_target(args.target, args.controls)
    if target.circuit is not None and args.branch is None:
        return _budget(args, target.circuit, args.target)
    branch = reports.parse_branch(args.branch, target.unitary.shape[0])
    m = reports.target_multiset(target, branch, args.basis)
    rep = energy_report(
        m,
        args.omega0,
        args.epsilon,
        _hbar(args),
        args.allow_infinite,
        gate=target.label,
        branch="principal" if branch is None else str(branch),
    )
    payload = reports.energy_payload(rep, args.scenario, args.basis)
    lines = [f"gate: {target.label}", f"multiset: {_multiset_text(m.values)}"]
    if args.scenario in ("independent", "both"):
        lines.append(f"independent bound: {_fmt(rep.independent_bound)}")
    if args.scenario in ("shared", "both"):
        lines.append(f"shared bound:      {_fmt(rep.shared_bound)}")
    _emit(payload, "energy", args.json, "\n".join(lines))
    return EXIT_OK


def cmd_budget(args) -> int:
    _positive("omega0", args.omega0)
    _positive("hbar", _hbar(args))
    target = reports.resolve_target(args.circuit)
    if target.circuit is None:
        raise GateEnergyError(f"{args.circuit!r} is not a circuit file")
    return _budget(args, target.circuit, args.circuit)


def cmd_optimize(args) -> int:
    target = reports.resolve_target(args.target, args.controls)
    objective = Objective(args.objective)
    opt = optimize_branch(target.unitary, objective, args.offset_bound, args.strategy)
    payload = {
        "schema": reports.SCHEMA_VERSION,
        "gate": target.label,
        "objective": objective.value,
        "strategy": args.strategy,
        "offset_bound": args.offset_bound,
        "branch": list(opt.branch.offsets),
        "multiset": list(opt.multiset.values),
        "objective_value": opt.objective_value,
        "principal_value": opt.principal_value,
        "improvement": None if math.isinf(opt.improvement) else opt.improvement,
        "evaluations": opt.evaluations,
    }
    improved = opt.objective_value < opt.principal_value * (1 - 1e-12)
    lines = [
        f"gate: {target.label}   objective: {objective.value}   strategy: {args.strategy}",
        f"principal: {_fmt(opt.principal_value)}",
        f"optimum:   {_fmt(opt.objective_value)}  at offsets ({', '.join(map(str, opt.branch.offsets))})",
        "improvement found" if improved else "no improvement found",
    ]
    if target.factors:
        local: CoefficientMultiset = reports.local_sum_multiset(target.factors)
        local_value = multiset_objective(local, objective)
        ratio = local_value / opt.objective_value if opt.objective_value else math.inf
        payload["local_sum"] = {
            "multiset": list(local.values),
            "objective_value": local_value,
            "ratio_to_optimum": None if math.isinf(ratio) else ratio,
        }
        lines.append(f"local-sum construction: {_fmt(local_value)}  (ratio to optimum {_fmt(ratio)})")
    _emit(payload, "optimize", args.json, "\n".join(lines))
    return EXIT_OK


def cmd_simulate(args) -> int:
    _positive("tau", args.tau)
    if args.steps < 1:
        raise GateEnergyError("--steps must be at least 1")
    extra = ()
    if args.midpoint:
        env = DriveEnvelope((FieldMode(1.0 / args.tau, 1.0 + 0j, 1.0),), args.tau)
        extra = (env.time_at_fraction(0.5),)
    trace = figure1_run(args.variant, tau=args.tau, n_steps=args.steps, extra_times=extra)
    out = Path(args.out)
    if args.format == "json" or (args.format is None and out.suffix == ".json"):
        trace.to_json(out)
    else:
        trace.to_csv(out)
    ent = trace.renyi_half()
    print(f"wrote {len(trace.times)} rows to {out}; max renyi_half = {_fmt(float(np.max(ent)))}")
    return EXIT_OK


def _default_field() -> FieldConfig:
    return FieldConfig((FieldMode(math.pi, 0j, 0.1),), tau=1.0)


def cmd_verify(args) -> int:
    if args.samples < 1:
        raise GateEnergyError("--samples must be at least 1")
    if args.states < 0:
        raise GateEnergyError("--states must be non-negative")
    if args.field:
        try:
            data = json.loads(Path(args.field).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise GateEnergyError(f"{args.field}: invalid JSON ({exc})") from None
        field = FieldConfig.from_dict(data)
    else:
        field = _default_field()
    if args.scenario:
        field = FieldConfig(field.modes, field.tau, field.hbar, args.scenario)
    target = reports.resolve_target(args.target, args.controls)
    d = wht_decompose(target.unitary)
    rep = mc_verify(d, field, args.samples, args.seed, n_states=args.states, gate=target.label)
    payload = {"schema": reports.SCHEMA_VERSION, "field": field.to_dict()}
    payload.update(rep.to_dict())
    text = _table(
        ["quantity", "value"],
        [[k, _fmt(v) if isinstance(v, float) else str(v)] for k, v in sorted(rep.to_dict().items())],
    )
    _emit(payload, "verify", args.json, text, args.out)
    return EXIT_OK


# ----------------------------------------------------------------------- parser


def _add_target(p, help_text="gate name (X, RZ(pi/2), CNX, X*X, ...) or circuit file"):
    p.add_argument("target", help=help_text)
    p.add_argument("--controls", type=int, default=0, help="control count for CNX / CNH / CNTOFF")


def _add_physics(p):
    p.add_argument("--omega0", type=float, default=1.0, help="lowest drive frequency (default 1)")
    p.add_argument("--epsilon", type=float, default=0.1, help="target gate error (default 0.1)")
    p.add_argument("--hbar", type=float, default=1.0, help="reduced Planck constant (default 1)")
    p.add_argument("--si", action="store_true", help="use SI hbar in J s")
    p.add_argument("--allow-infinite", action="store_true", help="report infinite bounds at epsilon 0")
    p.add_argument("--json", action="store_true", help="emit JSON")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gatenergy", description="Energy bounds for quantum gates from their generators.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("decompose", help="commuting decomposition and coefficient multiset")
    _add_target(p)
    p.add_argument("--branch", help="comma-separated eigenphase offsets (default principal)")
    p.add_argument("--basis", choices=["wht", "pauli"], default="wht")
    p.add_argument("--json", action="store_true", help="emit JSON")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("bound", help="energy bounds for a gate, or per-gate budget for a circuit")
    _add_target(p)
    _add_physics(p)
    p.add_argument("--scenario", choices=["shared", "independent", "both"], default="both")
    p.add_argument("--branch", help="comma-separated eigenphase offsets (default principal)")
    p.add_argument("--basis", choices=["wht", "pauli"], default="wht")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("budget", help="circuit energy budget with an equal error split")
    p.add_argument("circuit", help="circuit file")
    _add_physics(p)
    p.set_defaults(func=cmd_budget)

    p = sub.add_parser("optimize", help="search logarithm branches for the cheapest multiset")
    _add_target(p)
    p.add_argument("--objective", choices=["shared", "independent"], default="shared")
    p.add_argument("--offset-bound", type=int, default=2)
    p.add_argument("--strategy", choices=["exhaustive", "local"], default="exhaustive")
    p.add_argument("--json", action="store_true", help="emit JSON")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("simulate", help="driven X(x)X evolution trace")
    p.add_argument("--variant", choices=["entangling", "localsum"], default="entangling")
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=200, help="intervals; steps + 1 rows including both ends")
    p.add_argument("--midpoint", action="store_true", help="also sample the time where half the drive has accrued")
    p.add_argument("--out", required=True, help="output path (.csv or .json)")
    p.add_argument("--format", choices=["csv", "json"], help="override the format implied by --out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="Monte Carlo check of the gate-error theorems")
    _add_target(p)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--field", help="JSON field description (modes, tau, hbar, scenario)")
    p.add_argument("--scenario", choices=["independent", "shared"])
    p.add_argument("--states", type=int, default=1000, help="Haar states per batch of samples")
    p.add_argument("--out", help="also write the JSON report here")
    p.add_argument("--json", action="store_true", help="emit JSON")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (GateEnergyError, OSError) as exc:
        print(f"gatenergy: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalFailure, np.linalg.LinAlgError) as exc:
        print(f"gatenergy: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
