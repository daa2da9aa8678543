"""Command-line front end.

Subcommands: analyze | solve | witness | reduce. Configuration comes
from a JSON document (--config) or a bundled scenario (--scenario);
outputs are deterministic JSON reports plus CSV scatter data, with
matplotlib figures rendered alongside. Exit codes: 0 completion,
2 configuration, 3 compatibility, 4 no witness, 5 closedness.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .diophantine import (
    RationalVector,
    characterize_homogeneous,
    detect_rational,
    rational_lowerbound,
)
from .errors import (
    ResourceError,
    ClosednessError,
    CompatibilityError,
    ConfigError,
    DomainError,
    NoWitnessError,
    TorsolveError,
)
from .forms import FrequencyBox, TrigPForm, TrigPoly
from .normal_form import (
    CoefficientProfile,
    check_condition_D,
    classify_decoupled,
    decompose,
    verify_conjugation,
)
from .reports import (
    condition_figure,
    growth_figure,
    report_envelope,
    scan_figure,
    witness_figure,
    write_report,
    write_scan_csv,
)
from .scalars import scalar_from_json
from .scenarios import load_scenario
from .spectral import (
    WitnessSequence,
    cf_witness_candidates,
    WitnessTerm,
    build_witness,
    compatibility_check,
    demonstrate_blowup,
    divisor_scan,
    solve_constant,
    witness_from_records,
)
from .symbols import system_from_json

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_COMPAT = 3
EXIT_NO_WITNESS = 4
EXIT_CLOSEDNESS = 5


def _load_config(args) -> dict:
    if args.scenario and args.config:
        raise ConfigError("give either --config or --scenario, not both")
    if args.scenario:
        return {"scenario": args.scenario}
    if not args.config:
        raise ConfigError("missing --config PATH or --scenario NAME")
    path = Path(args.config)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed config at line {exc.lineno}: {exc.msg}")


def _resolve(config: dict, args) -> dict:
    """Merge scenario defaults with explicit config/CLI settings."""
    ctx = {"config": config}
    if "scenario" in config:
        sc = load_scenario(config["scenario"])
        ctx.update(sc)
    if "system" in config:
        ctx["spec"] = system_from_json(config["system"])
        profile = _profile_from_json(config["system"])
        if profile is not None:
            ctx["profile"] = profile
    if "box" in config:
        ctx["box"] = FrequencyBox(int(config["box"]["H"]), int(config["box"]["X"]))
    if "spec" not in ctx:
        raise ConfigError("no system: provide a scenario or a system section")
    box = ctx.get("box")
    if box is None or (box.H == 0 and box.X == 0):
        raise ConfigError("empty or missing frequency box")
    ctx["tolerances"] = {"zero": 1e-10, "compat": 1e-9, "integral": 1e-9,
                         "tail": 1e-9}
    ctx["tolerances"].update(config.get("tolerances", {}))
    ctx["seed"] = args.seed if args.seed is not None else config.get("seed", 0)
    ctx["mode"] = ("exact" if args.exact else
                   "float" if args.float_mode else config.get("mode", "auto"))
    ctx["out"] = Path(args.out)
    return ctx


def _profile_from_json(system: dict):
    entries = [e for e in system.get("coefficients", [])
               if e.get("kind") in ("decoupled", "general")]
    if not entries:
        return None
    n = int(system["n"])
    polys = [TrigPoly.constant(n, 1.0 + 0j) for _ in range(n)]
    for entry in entries:
        j = int(entry["j"])
        if entry["kind"] == "decoupled":
            data = {int(k): _parse_coeff(v) for k, v in entry["data"].items()}
            polys[j - 1] = TrigPoly.axis(n, j, data)
        else:
            data = {tuple(int(t) for t in k.split(",")): _parse_coeff(v)
                    for k, v in entry["data"].items()}
            polys[j - 1] = TrigPoly(n, data)
    return CoefficientProfile(n, polys)


def _parse_coeff(v):
    if isinstance(v, dict):
        return scalar_from_json(v, exact=isinstance(v.get("re"), str))
    if isinstance(v, str):
        return float(Fraction(v))
    if isinstance(v, list):
        return complex(v[0], v[1])
    return complex(v)


def _envelope(ctx) -> dict:
    return report_envelope(ctx["config"], ctx.get("box"), ctx["tolerances"],
                           ctx.get("digits"), ctx.get("seed"), ctx.get("mode"))


def cmd_analyze(ctx) -> int:
    """Divisor scan plus arithmetic verdicts; always exits 0 on completion."""
    spec, box, out = ctx["spec"], ctx["box"], ctx["out"]
    scan = divisor_scan(spec, box)
    doc = {"report": _envelope(ctx), "scan": scan.to_json()}
    if "alpha" in ctx:
        digits = ctx.get("digits") or 50
        detection = detect_rational(ctx["alpha"], digits=digits)
        doc["rationality"] = detection.to_json()
        if isinstance(detection, RationalVector) and not detection.precision_limited:
            try:
                doc["lower_bound"] = rational_lowerbound(detection).to_json()
            except ResourceError as exc:
                doc["lower_bound"] = {"skipped": str(exc)}
        if "kappa" in ctx:
            rep = characterize_homogeneous(ctx["alpha"], ctx["kappa"],
                                           box_xi=box.X, digits=digits)
            doc["homogeneous"] = rep.to_json()
    write_report(out / "report.json", doc)
    write_scan_csv(out / "scan.csv", scan.records)
    scan_figure(out / "scan.png", scan)
    print(f"analyze: verdict {scan.verdict}; report in {out}")
    return EXIT_OK


def cmd_solve(ctx, f_path: str | None) -> int:
    """Solve the constant-coefficient problem for a stored right-hand side."""
    spec, box, out = ctx["spec"], ctx["box"], ctx["out"]
    source = f_path or ctx["config"].get("solve", {}).get("f_file")
    if not source:
        raise ConfigError("solve needs --f FILE or a solve.f_file entry")
    path = Path(source)
    if not path.exists():
        raise ConfigError(f"right-hand side not found: {path}")
    f = TrigPForm.from_json(json.loads(path.read_text()))
    tols = ctx["tolerances"]
    report = compatibility_check(f, spec, tol=tols["compat"],
                                 eps_int=tols["integral"])
    if not report.ok:
        doc = {"report": _envelope(ctx), "compatibility": report.to_json()}
        write_report(out / "report.json", doc)
        print("solve: compatibility failed; offending frequencies in report",
              file=sys.stderr)
        return EXIT_COMPAT
    scan = divisor_scan(spec, box)
    result = solve_constant(spec, f, tol=tols["zero"],
                            eps_int=tols["integral"], scan=scan, check=False)
    doc = {"report": _envelope(ctx),
           "compatibility": report.to_json(),
           "scan": {"lambda_hat": scan.lambda_hat, "C_hat": scan.c_hat},
           "solve": result.to_json()}
    write_report(out / "report.json", doc)
    write_report(out / "solution.json", result.u.to_json())
    growth_figure(out / "growth.png", result)
    print(f"solve: residual {result.residual:.3e}; solution in {out}")
    return EXIT_OK


def cmd_witness(ctx) -> int:
    """Build non-solvability witness artifacts from a scan or given terms."""
    spec, box, out = ctx["spec"], ctx["box"], ctx["out"]
    wcfg = ctx["config"].get("witness", {})
    delta = Fraction(wcfg.get("delta", "1/4"))
    p = int(wcfg.get("p", 0))
    min_terms = int(wcfg.get("min_terms", 3))
    if "terms" in wcfg:
        terms = []
        for t in wcfg["terms"]:
            eta, xi = tuple(t["eta"]), tuple(t["xi"])
            from .symbols import eval_symbol_slice, slice_norm, slice_norm_exact
            try:
                L = eval_symbol_slice(spec, eta, xi, exact=True)
                nf_ = slice_norm_exact(L)
                terms.append(WitnessTerm(eta, xi, float(nf_),
                                         max(max(map(abs, eta)), max(map(abs, xi))),
                                         nf_))
            except DomainError:
                L = eval_symbol_slice(spec, eta, xi)
                terms.append(WitnessTerm(eta, xi, slice_norm(L),
                                         max(max(map(abs, eta)), max(map(abs, xi)))))
        ws = WitnessSequence(terms, delta)
    else:
        scan = divisor_scan(spec, box)
        candidates = list(scan.records) + cf_witness_candidates(spec)
        ws = witness_from_records(spec, candidates, delta, min_terms=min_terms)
    artifacts = build_witness(spec, ws, p)
    blowup = demonstrate_blowup(spec, ws, p,
                                lambda_cap=float(wcfg.get("lambda_cap", 10.0)))
    doc = {"report": _envelope(ctx),
           "witness": artifacts.to_json(),
           "terms": [t.to_json() for t in ws.terms],
           "blowup": blowup.to_json()}
    write_report(out / "report.json", doc)
    write_report(out / "witness_form.json", artifacts.form.to_json())
    witness_figure(out / "witness.png", ws, artifacts)
    print(f"witness: {len(ws.terms)} terms; artifacts in {out}")
    return EXIT_OK


def cmd_reduce(ctx) -> int:
    """Normal-form reduction artifacts for a variable-coefficient system."""
    spec, box, out = ctx["spec"], ctx["box"], ctx["out"]
    profile = ctx.get("profile")
    if profile is None:
        raise ConfigError("reduce needs a variable-coefficient profile")
    rcfg = ctx["config"].get("reduce", {})
    nf = decompose(profile, spec, box, tol=ctx["tolerances"]["zero"])
    condition = check_condition_D(nf)
    import random as _random

    conj = verify_conjugation(
        profile, spec, box, trials=int(rcfg.get("trials", 5)),
        p_list=tuple(rcfg.get("p_list", [0])),
        rng=_random.Random(ctx["seed"]),
        cap_factor=int(rcfg.get("cap_factor", 4)),
        tail_tol=ctx["tolerances"]["tail"])
    doc = {"report": _envelope(ctx),
           "condition": condition.to_json(),
           "conjugation": conj.to_json()}
    if profile.is_decoupled:
        classify_box = ctx.get("classify_box", FrequencyBox(0, max(box.X, 2048)))
        doc["classifier"] = classify_decoupled(profile, spec, classify_box).to_json()
    write_report(out / "report.json", doc)
    condition_figure(out / "condition.png", condition)
    print(f"reduce: max conjugation residual "
          f"{max(conj.residuals.values(), default=0.0):.3e}; report in {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="torsolve",
        description="Fourier-spectral solvability analysis on frequency boxes")
    ap.add_argument("command", choices=["analyze", "solve", "witness", "reduce"])
    ap.add_argument("--config", help="JSON configuration file")
    ap.add_argument("--scenario", help="bundled scenario name")
    ap.add_argument("--out", default="out", help="output directory")
    ap.add_argument("--f", dest="f_file", help="right-hand side (solve)")
    ap.add_argument("--threads", type=int, default=1,
                    help="reserved for chunked evaluation; results are "
                         "deterministic regardless")
    ap.add_argument("--seed", type=int, default=None,
                    help="seed for randomized checks (recorded in reports)")
    mode = ap.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true",
                      help="force exact rational arithmetic")
    mode.add_argument("--float", dest="float_mode", action="store_true",
                      help="force floating arithmetic")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _load_config(args)
        ctx = _resolve(config, args)
        if args.command == "analyze":
            return cmd_analyze(ctx)
        if args.command == "solve":
            return cmd_solve(ctx, args.f_file)
        if args.command == "witness":
            return cmd_witness(ctx)
        return cmd_reduce(ctx)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CompatibilityError as exc:
        print(f"compatibility error: {exc}", file=sys.stderr)
        return EXIT_COMPAT
    except NoWitnessError as exc:
        print(f"no witness: {exc}", file=sys.stderr)
        return EXIT_NO_WITNESS
    except ClosednessError as exc:
        print(f"closedness error: {exc}", file=sys.stderr)
        return EXIT_CLOSEDNESS
    except TorsolveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
