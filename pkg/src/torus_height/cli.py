"""Command-line interface.

Exit codes: 0 negative immersions (or command succeeded), 1 audit failures,
2 input error, 3 negative immersions fail (witness attached), 4 no verdict
(iteration cap reached or map not pi_1-injective).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .folding import Unknown, directed_height_general, fold_to_immersion
from .maps import INFINITE, directed_height, validate_map
from .serialize import (
    FormatError,
    Instance,
    certificate_to_json,
    complex_to_json,
    dumps,
    factorization_to_json,
    instance_to_json,
    load_instance,
    to_dot,
)
from .torus import NegativeImmersions, NotPi1Injective, Undecided, ZeroEulerWitness, build_mapping_torus, decide_negative_immersions
from .verifier import RetryError, audit_instance, random_instance, run_parallel

EXIT_OK = 0
EXIT_FAILURES = 1
EXIT_INPUT = 2
EXIT_NOT_NI = 3
EXIT_UNKNOWN = 4


def _cap(args) -> int | None:
    env = os.environ.get("TORUS_HEIGHT_CAP")
    if env:
        try:
            return int(env)
        except ValueError:
            raise FormatError(f"TORUS_HEIGHT_CAP must be an integer, got {env!r}")
    return args.cap


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _height_json(h):
    if h == INFINITE:
        return "infinite"
    if isinstance(h, Unknown):
        return {"unknown": h.cap}
    return h


def analyze(inst: Instance, cap: int | None) -> tuple[dict, int, str | None]:
    """Report and exit code for one instance."""
    psi = inst.psi
    flags = validate_map(psi)
    fact = fold_to_immersion(psi)
    injective = fact.pi1_injective
    if flags.immersion:
        height = directed_height(psi)
    else:
        height = directed_height_general(psi, cap=cap)
    report = {
        "name": inst.name,
        "flags": {"cellular": flags.cellular, "combinatorial": flags.combinatorial, "immersion": flags.immersion},
        "pi1_injective": injective,
        "directed_height": _height_json(height),
    }
    if not injective:
        bad = [mv for mv in fact.rho.moves if not mv.rank_preserving]
        msg = f"map is not π1-injective (pi1-injective check failed: {len(bad)} rank-dropping fold/collapse move(s)); no verdict"
        report["certificate"] = None
        report["diagnostic"] = msg
        return report, EXIT_UNKNOWN, msg
    try:
        cert = decide_negative_immersions(psi, cap=cap)
    except NotPi1Injective as exc:
        report["certificate"] = None
        report["diagnostic"] = str(exc)
        return report, EXIT_UNKNOWN, str(exc)
    report["certificate"] = certificate_to_json(cert)
    if isinstance(cert, NegativeImmersions):
        return report, EXIT_OK, None
    if isinstance(cert, ZeroEulerWitness):
        return report, EXIT_NOT_NI, None
    assert isinstance(cert, Undecided)
    msg = f"no verdict within cap {cert.cap}: {cert.reason}"
    report["diagnostic"] = msg
    return report, EXIT_UNKNOWN, msg


def _text_summary(report: dict) -> str:
    lines = [f"instance: {report.get('name') or '-'}"]
    fl = report["flags"]
    lines.append(f"immersion: {fl['immersion']}  combinatorial: {fl['combinatorial']}  pi1-injective: {report['pi1_injective']}")
    lines.append(f"directed height: {report['directed_height']}")
    cert = report.get("certificate")
    if cert is None:
        lines.append(f"verdict: none ({report.get('diagnostic')})")
    elif cert["verdict"] == "negative_immersions":
        c = cert["c"]
        lines.append(f"verdict: negative immersions with c = {c['num']}/{c['den']} (m={cert['m']}, M={cert['M']}, N={cert['N']})")
        if cert["malnormal"]:
            cp = cert["malnormal"]["c_prime"]
            lines.append(f"forest preimage constant c' = {cp['num']}/{cp['den']}")
    elif cert["verdict"] == "zero_euler_witness":
        y = cert["Y"]
        lines.append(f"verdict: not negative immersions; witness Y with {len(y['faces'])} 2-cells and chi = 0")
    else:
        lines.append(f"verdict: unknown ({cert.get('reason')})")
    return "\n".join(lines)


def cmd_analyze(args) -> int:
    inst = load_instance(args.path)
    report, code, msg = analyze(inst, _cap(args))
    if args.format == "text":
        _emit(_text_summary(report), args.output)
    else:
        _emit(dumps(report), args.output)
    if msg:
        print(msg, file=sys.stderr)
    return code


def _audit_task(task):
    path, K, isolated, timing = task
    inst = load_instance(path)
    cert = None
    try:
        cert = decide_negative_immersions(inst.psi)
    except NotPi1Injective as exc:
        return path, None, str(exc)
    if not isinstance(cert, NegativeImmersions):
        return path, None, "directed height is not known to be finite; run `torus-height analyze` for the verdict"
    rep = audit_instance(inst.psi, K=K, max_isolated=isolated, name=inst.name or str(path), certificate=cert)
    return path, rep.to_json(include_timing=timing), None


def cmd_audit(args) -> int:
    tasks = [(p, args.max_cells, args.isolated, args.timing) for p in args.paths]
    for p in args.paths:
        load_instance(p)
    results = run_parallel(_audit_task, tasks, args.jobs)
    reports = []
    code = EXIT_OK
    for path, rep, err in results:
        if err is not None:
            print(f"{path}: {err}", file=sys.stderr)
            return EXIT_INPUT
        reports.append(rep)
        if rep["failures"]:
            code = EXIT_FAILURES
            if args.counterexamples:
                out = Path(args.counterexamples)
                out.mkdir(parents=True, exist_ok=True)
                for k, f in enumerate(rep["failures"]):
                    (out / f"{Path(path).stem}-{k}.json").write_text(dumps(f["Y"]) + "\n")
    payload = reports[0] if len(reports) == 1 else {"reports": reports}
    _emit(dumps(payload), args.output)
    if code != EXIT_OK:
        print("audit found failures", file=sys.stderr)
    return code


def cmd_fold(args) -> int:
    import random

    inst = load_instance(args.path)
    rng = random.Random(args.seed) if args.seed is not None else None
    fact = fold_to_immersion(inst.psi, rng)
    _emit(dumps(factorization_to_json(fact)), args.output)
    return EXIT_OK


def cmd_export(args) -> int:
    inst = load_instance(args.path)
    torus = build_mapping_torus(inst.psi)
    out = Path(args.dot)
    out.mkdir(parents=True, exist_ok=True)
    (out / "F.dot").write_text(to_dot(inst.F, "F", highlight=inst.H))
    (out / "H.dot").write_text(to_dot(inst.H, "H"))
    (out / "X.dot").write_text(to_dot(torus.complex, "X"))
    if args.json:
        (out / "X.json").write_text(dumps(complex_to_json(torus.complex)) + "\n")
    print(f"wrote F.dot, H.dot, X.dot to {out}")
    return EXIT_OK


def cmd_random(args) -> int:
    outputs = []
    for k in range(args.count):
        seed = args.seed + k
        try:
            F, H, psi = random_instance(seed, args.petals, args.h_edges, args.max_image_len)
        except RetryError as exc:
            print(f"seed {seed}: {exc}", file=sys.stderr)
            return EXIT_UNKNOWN
        except ValueError as exc:
            raise FormatError(str(exc))
        outputs.append(instance_to_json(Instance(F, H, psi, name=f"random-{seed}")))
    if args.output_dir:
        out = Path(args.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        for d in outputs:
            (out / f"{d['name']}.json").write_text(dumps(d) + "\n")
    else:
        print(dumps(outputs[0] if len(outputs) == 1 else outputs))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="torus-height",
        description="Directed height of partial graph maps and negative immersions of their mapping tori.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="decide negative immersions for an instance file")
    p.add_argument("path")
    p.add_argument("--cap", type=int, default=None, help="iteration cap for non-immersions (env TORUS_HEIGHT_CAP overrides)")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("audit", help="enumerate immersions Y -> X and check the bounds")
    p.add_argument("paths", nargs="+")
    p.add_argument("--max-cells", "-K", type=int, default=4, help="largest number of 2-cells in Y")
    p.add_argument("--isolated", type=int, default=0, help="allow up to this many edges on no 2-cell")
    p.add_argument("--jobs", "-j", type=int, default=1, help="worker processes across instance files")
    p.add_argument("--timing", action="store_true", help="include elapsed time in the report")
    p.add_argument("--counterexamples", default=None, help="directory for failing Y in complex JSON")
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("fold", help="Stallings factorization dump")
    p.add_argument("path")
    p.add_argument("--seed", type=int, default=None, help="random admissible fold order")
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_fold)

    p = sub.add_parser("export", help="DOT files for F, H and the mapping torus 1-skeleton")
    p.add_argument("path")
    p.add_argument("--dot", required=True, help="output directory")
    p.add_argument("--json", action="store_true", help="also write the mapping torus as complex JSON")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("random", help="random immersion instances")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--petals", type=int, default=2)
    p.add_argument("--h-edges", type=int, default=1)
    p.add_argument("--max-image-len", type=int, default=2)
    p.add_argument("--output-dir", default=None)
    p.set_defaults(func=cmd_random)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
