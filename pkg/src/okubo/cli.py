"""``okubo`` command line: canonical forms, Katz chains, connection tables, monodromy, verification.

All output is JSON (complex numbers as ``[re, im]``), written to stdout or
``--out``.  Exit status is 0 when every check is within tolerance, 1 on a
numerical failure or a failed check, 2 on usage errors.  ``OKUBO_TOL``
overrides the default verification tolerance.
"""
from __future__ import annotations

import argparse
import json
import os
import re
import sys
from dataclasses import dataclass

import numpy as np

from .canonical import ExponentChart, build, random_chart
from .connection import calibrated_branch, closed_form, default_points, family, registry_entries
from .core import OkuboSystem, spectral, validate
from .katz import KatzStep, katz_apply
from .monodromy import assemble, product_relation, rigidity_index, spectrum_mismatch
from .serialize import cx_from_json, mat_to_json, vec_to_json

DEFAULT_TOL = 1e-6


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    type_tag: str | None
    n: int | None
    chart_file: str | None
    points: tuple[complex, ...] | None
    seed: int
    samples: int
    tol: float
    variant: str
    out: str | None


_TYPE_RE = re.compile(r"^(III\*|II\*|IV\*|IV)(\d*)$")


def parse_type(text: str, n: int | None = None) -> tuple[str, int | None]:
    """``"II*"`` with ``--n``, or a rank-subscripted form such as ``"II*4"``, ``"III*3"``, ``"IV*6"``."""
    m = _TYPE_RE.match(text.strip())
    if not m:
        raise UsageError(f"unknown type {text!r}")
    fam, rank = m.group(1), m.group(2)
    if fam in ("IV", "IV*"):
        if rank and int(rank) != 6:
            raise UsageError(f"type {fam} has rank 6")
        return fam, None
    if rank:
        size = int(rank)
        if fam == "II*":
            if size % 2 or size < 4:
                raise UsageError("II* needs an even rank >= 4")
            return fam, size // 2
        if size % 2 == 0 or size < 3:
            raise UsageError("III* needs an odd rank >= 3")
        return fam, (size - 1) // 2
    if n is None:
        raise UsageError(f"type {fam} needs --n or a rank suffix")
    return fam, n


def _points(text: str | None):
    if text is None:
        return None
    try:
        return tuple(complex(p.strip().replace(" ", "")) for p in text.split(","))
    except ValueError as exc:
        raise UsageError(f"cannot parse --points {text!r}") from exc


def _read_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise UsageError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc


def _tol(arg: float | None) -> float:
    if arg is not None:
        return arg
    env = os.environ.get("OKUBO_TOL")
    if env:
        try:
            return float(env)
        except ValueError as exc:
            raise UsageError(f"OKUBO_TOL={env!r} is not a number") from exc
    return DEFAULT_TOL


def _config(args) -> RunConfig:
    type_tag, n = None, getattr(args, "n", None)
    if getattr(args, "type", None):
        type_tag, n = parse_type(args.type, n)
    variant = "literal" if getattr(args, "literal", False) else "corrected"
    return RunConfig(args.command, type_tag, n, getattr(args, "chart", None),
                     _points(getattr(args, "points", None)), getattr(args, "seed", 0) or 0,
                     getattr(args, "samples", 1) or 1, _tol(getattr(args, "tol", None)),
                     variant, args.out)


def _chart(cfg: RunConfig) -> ExponentChart:
    if cfg.chart_file:
        chart = ExponentChart.from_dict(_read_json(cfg.chart_file))
        if cfg.type_tag and family(chart.type_tag) != cfg.type_tag:
            raise UsageError(f"chart is of type {chart.type_tag}, --type says {cfg.type_tag}")
        return chart
    if cfg.type_tag is None:
        raise UsageError("give --chart or --type")
    return random_chart(cfg.type_tag, cfg.n, np.random.default_rng(cfg.seed))


def _chart_points(cfg: RunConfig, chart: ExponentChart):
    pts = cfg.points or default_points(chart)
    if len(pts) != len(chart.partition):
        raise UsageError(f"type {chart.type_tag} needs {len(chart.partition)} points")
    return pts


# --- subcommands --------------------------------------------------------------

def cmd_canonical(cfg: RunConfig) -> tuple[dict, bool]:
    chart = _chart(cfg)
    system = build(chart, _chart_points(cfg, chart))
    rep = validate(system, chart)
    out = {"chart": chart.to_dict(), "system": system.to_dict(),
           "violations": rep.violations, "warnings": rep.warnings,
           "fuchs_residual": rep.fuchs_residual}
    ok = rep.ok
    if ok:
        sp = spectral(system, chart)
        out["multiplicities"] = list(sp.multiplicities)
        out["trace_residual"] = sp.trace_residual
    return out, ok


def cmd_katz(cfg: RunConfig, chain_file: str, system_file: str | None) -> tuple[dict, bool]:
    doc = _read_json(chain_file)
    if isinstance(doc, list):
        steps = doc
        if system_file:
            system = OkuboSystem.from_dict(_read_json(system_file))
        else:
            chart = _chart(cfg)
            system = build(chart, _chart_points(cfg, chart))
    else:
        steps = doc.get("steps", [])
        if "system" in doc:
            system = OkuboSystem.from_dict(doc["system"])
        elif "chart" in doc:
            chart = ExponentChart.from_dict(doc["chart"])
            pts = tuple(cx_from_json(p) for p in doc["points"]) if "points" in doc else default_points(chart)
            system = build(chart, pts)
        else:
            raise UsageError("chain file needs 'system' or 'chart'")
    maps = []
    for raw in steps:
        step = KatzStep.from_dict(raw)
        norm = raw.get("normalize")
        if norm is not None:
            norm = (int(norm[0]), int(norm[1]), cx_from_json(norm[2]))
        system, bmap = katz_apply(system, step, norm)
        maps.append(bmap.to_dict())
    rep = validate(system)
    return {"system": system.to_dict(), "block_maps": maps,
            "violations": rep.violations, "warnings": rep.warnings}, rep.ok


def cmd_connection(cfg: RunConfig) -> tuple[dict, bool]:
    chart = _chart(cfg)
    pts = _chart_points(cfg, chart)
    table = closed_form(chart, pts, calibrated_branch(pts), cfg.variant)
    corrections = {f"{e.block[0]},{e.block[1]}": list(e.corrections)
                   for e in registry_entries(chart.type_tag) if e.corrected is not None}
    out = {"chart": chart.to_dict(), "points": vec_to_json(pts), "variant": cfg.variant,
           "table": table.to_dict(),
           "corrections": corrections if cfg.variant == "corrected" else {}}
    return out, table.is_complete()


def cmd_monodromy(cfg: RunConfig, oracle: bool) -> tuple[dict, bool]:
    chart = _chart(cfg)
    pts = _chart_points(cfg, chart)
    system = build(chart, pts)
    mt = assemble(system, closed_form(chart, pts, calibrated_branch(pts), cfg.variant).require_complete())
    rep = product_relation(mt)
    out = {"chart": chart.to_dict(), "points": vec_to_json(pts), "variant": cfg.variant,
           "M": [mat_to_json(M) for M in mt.matrices], "M_inf": mat_to_json(rep.M_inf),
           "ordering": rep.ordering, "product_residual": rep.residual,
           "rigidity": rigidity_index(mt), "spectrum_mismatch": spectrum_mismatch(mt, system, chart)}
    ok = rep.residual <= 1e-8 and out["rigidity"] == 2 and out["spectrum_mismatch"] <= cfg.tol
    if oracle:
        from .oracle import canonical_frame, loop_monodromy
        loops = loop_monodromy(system, result=canonical_frame(system))
        diff = max(float(np.max(np.abs(a - b))) for a, b in zip(mt.matrices, loops))
        out["oracle_mismatch"] = diff
        ok = ok and diff <= cfg.tol
    return out, ok


def verify_sample(chart: ExponentChart, pts, tol: float) -> dict:
    """Oracle comparison of one chart: connection blocks (both variants) and monodromy."""
    from .oracle import canonical_frame, loop_monodromy
    system = build(chart, pts)
    res = canonical_frame(system)
    truth = res.table()
    br = calibrated_branch(pts)
    blocks = {}
    for entry in registry_entries(chart.type_tag):
        key = entry.block
        row = {}
        for variant in ("corrected", "literal"):
            t = closed_form(chart, pts, br, variant)
            d = np.abs(t[key] - truth[key]) / np.maximum(1.0, np.abs(truth[key]))
            d = np.where(np.isfinite(d), d, np.inf)
            row[variant] = float(np.max(d))
        row["has_correction"] = entry.corrected is not None
        blocks[f"{key[0]},{key[1]}"] = row
    mt = assemble(system, closed_form(chart, pts, br))
    loops = loop_monodromy(system, result=res)
    prod = product_relation(mt)
    mono = max(float(np.max(np.abs(a - b))) for a, b in zip(mt.matrices, loops))
    out = {
        "chart": chart.to_dict(),
        "connection": blocks,
        "connection_max": max(b["corrected"] for b in blocks.values()),
        "monodromy_max": mono,
        "product_residual": prod.residual,
        "spectrum_mismatch": spectrum_mismatch(mt, system, chart),
        "rigidity": rigidity_index(mt),
    }
    out["ok"] = bool(out["connection_max"] <= tol and mono <= tol and prod.residual <= 1e-8
                     and out["spectrum_mismatch"] <= tol and out["rigidity"] == 2)
    return out


def cmd_verify(cfg: RunConfig) -> tuple[dict, bool]:
    if cfg.type_tag is None:
        raise UsageError("verify needs --type")
    rng = np.random.default_rng(cfg.seed)
    samples = []
    for _ in range(cfg.samples):
        chart = random_chart(cfg.type_tag, cfg.n, rng)
        samples.append(verify_sample(chart, _chart_points(cfg, chart), cfg.tol))
    summary = {}
    for key in samples[0]["connection"] if samples else []:
        lit = min(s["connection"][key]["literal"] for s in samples)
        cor = max(s["connection"][key]["corrected"] for s in samples)
        summary[key] = {"corrected_max": cor, "literal_min": lit,
                        "literal_passes": bool(max(s["connection"][key]["literal"] for s in samples) <= cfg.tol)}
    ok = all(s["ok"] for s in samples)
    return {"type": cfg.type_tag, "n": cfg.n, "seed": cfg.seed, "tol": cfg.tol,
            "samples": samples, "registry": summary, "ok": ok}, ok


# --- entry point ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="okubo", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, chart=True):
        sp.add_argument("--type", help="II*, III*, IV, IV* (with --n) or e.g. II*4, III*3, IV*6")
        sp.add_argument("--n", type=int)
        if chart:
            sp.add_argument("--chart", help="exponent chart JSON; random from --seed if omitted")
        sp.add_argument("--points", help="comma-separated singular points, e.g. 0,1,2")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--tol", type=float)
        sp.add_argument("--out")

    def variant(sp):
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--literal", action="store_true", help="printed formulas as transcribed")
        g.add_argument("--corrected", action="store_true", help="oracle-checked variants (default)")

    common(sub.add_parser("canonical", help="build a canonical Okubo system"))
    sp = sub.add_parser("katz", help="apply a chain of add-mc-add steps")
    common(sp)
    sp.add_argument("--chain", required=True, help="JSON list of steps, or object with system/chart and steps")
    sp.add_argument("--system", help="starting system JSON when --chain is a bare list")
    sp = sub.add_parser("connection", help="closed-form connection table")
    common(sp)
    variant(sp)
    sp = sub.add_parser("monodromy", help="monodromy matrices from the closed forms")
    common(sp)
    variant(sp)
    sp.add_argument("--oracle", action="store_true", help="also compare with numerically continued loops")
    sp = sub.add_parser("verify", help="oracle verification over seeded random charts")
    common(sp, chart=False)
    sp.add_argument("--samples", type=int, default=5)
    return p


def _emit(obj: dict, out: str | None) -> None:
    text = json.dumps(obj, sort_keys=True, indent=1)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _config(args)
        if cfg.subcommand == "canonical":
            obj, ok = cmd_canonical(cfg)
        elif cfg.subcommand == "katz":
            obj, ok = cmd_katz(cfg, args.chain, args.system)
        elif cfg.subcommand == "connection":
            obj, ok = cmd_connection(cfg)
        elif cfg.subcommand == "monodromy":
            obj, ok = cmd_monodromy(cfg, args.oracle)
        else:
            obj, ok = cmd_verify(cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"okubo: error: {exc}\n")
        return 2
    except (ValueError, ArithmeticError, RuntimeError, np.linalg.LinAlgError) as exc:
        _emit({"error": str(exc), "kind": type(exc).__name__, "ok": False}, getattr(args, "out", None))
        return 1
    _emit(obj, cfg.out)
    return 0 if ok else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
