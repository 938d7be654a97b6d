"""Command line interface.

Every command writes one JSON result document (to stdout or ``--output``)
and exits with 0 on success, 1 when the computation hits a domain error and
2 on a usage error.  Documents contain no timestamps or timings, so repeated
runs with the same inputs produce identical bytes.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .continuation import solve_from_infinity
from .core import (Tolerances, eigenvalues, require_valid, spectral_data, spectral_distance,
                   validate_system)
from .errors import IsomonodromyError
from .geometry import LoopWord, PolyPath
from .monodromy import (CONVENTION, canonical_generators, default_realization, monodromy,
                        monodromy_representation)
from .reference import example_family, example_residues, example_solution
from .schlesinger import (FlowPath, SchlesingerState, auxiliary_system_residual,
                          isomonodromy_check, jacobi_compatibility_defect, schlesinger_flow,
                          schlesinger_residual, trace_realization)
from .sysfile import (complex_pair, digest, dump_document, fixture_names, fixture_text,
                      load_system, matrix_pairs, serialize_system)


class UsageError(Exception):
    code = "usage"


def _num(x):
    """JSON-safe float; non-finite values become strings."""
    x = float(x)
    return x if math.isfinite(x) else repr(x)


def parse_point(text: str) -> complex:
    try:
        return complex(text.strip().replace(" ", "").replace("i", "j"))
    except ValueError:
        raise UsageError(f"cannot read {text!r} as a complex number") from None


def parse_points(text: str) -> list:
    return [parse_point(p) for p in text.split(",") if p.strip()]


def parse_configurations(text: str) -> np.ndarray:
    rows = [parse_points(r) for r in text.split(";") if r.strip()]
    if not rows or len({len(r) for r in rows}) != 1:
        raise UsageError("--path needs ';'-separated configurations of equal length")
    return np.array(rows, dtype=np.complex128)


def _read_system(source: str):
    """Return (text, system, tolerances) for a fixture name or a file path."""
    if source in fixture_names():
        text = fixture_text(source)
    else:
        path = Path(source)
        if not path.is_file():
            raise UsageError(f"{source!r} is neither a file nor a fixture "
                             f"({', '.join(fixture_names())})")
        text = path.read_text()
    system, tol = load_system(text)
    return text, system, tol


def _tolerances(args, tol: Tolerances) -> Tolerances:
    changes = {}
    if args.tol_rel is not None:
        changes["ode_rel_tol"] = args.tol_rel
    if args.tol_abs is not None:
        changes["ode_abs_tol"] = args.tol_abs
    try:
        return tol.replace(**changes)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _realization(args, system):
    base = None if args.base_point is None else parse_point(args.base_point)
    return default_realization(system, args.clearance, base)


# ---------------------------------------------------------------------------
# commands; each returns (matrices, diagnostics, error_estimates)
# ---------------------------------------------------------------------------

def cmd_validate(args, system, tol):
    report = validate_system(system, tol)
    diag = {"valid": report.ok,
            "violations": [{"code": v.code, "message": v.message, "measured": _num(v.measured)}
                           for v in report]}
    if report.ok:
        sd = spectral_data(system, tol)
        diag["eigenvalues"] = [[complex_pair(z) for z in lam] for lam in sd.eigenvalues]
        diag["non_resonant"] = list(sd.non_resonant)
        diag["resonance_witnesses"] = [[j, complex_pair(a), complex_pair(b)]
                                       for j, a, b in sd.resonance_witnesses]
    else:
        require_valid(system, tol)
    return {}, diag, {}


def cmd_continue(args, system, tol):
    require_valid(system, tol)
    if args.to is None:
        raise UsageError("continue needs --to X")
    target = parse_point(args.to)
    approach = None
    if args.path is not None:
        pts = parse_points(args.path)
        if not pts or abs(pts[-1] - target) > 0:
            pts.append(target)
        approach = PolyPath(pts)
    out = solve_from_infinity(system, target, approach, tol)
    return ({"Y": matrix_pairs(out.Y_end)},
            {"target": complex_pair(target), "steps": out.steps_taken,
             "winding_turns": [_num(v) for v in out.winding.turns]},
            {"integration": _num(out.error_estimate)})


def cmd_monodromy(args, system, tol):
    require_valid(system, tol)
    if args.word is None:
        raise UsageError("monodromy needs --word")
    word = _word(args.word, system.n)
    real = _realization(args, system)
    res = monodromy(system, word, real, tol)
    M = res.matrix
    diag = {"word": str(word), "base_point": complex_pair(real.base_point),
            "identity_defect": _num(np.linalg.norm(M - np.eye(system.k))),
            "steps": res.steps_taken, "convention": CONVENTION}
    if len(word.letters) == 1:
        j, e = word.letters[0]
        expected = np.exp(2j * np.pi * e * eigenvalues(system.residues[j - 1]))
        diag["local_spectrum_defect"] = _num(spectral_distance(eigenvalues(M), expected))
    return {"M": matrix_pairs(M)}, diag, {"integration": _num(res.error_estimate)}


def cmd_rep(args, system, tol):
    require_valid(system, tol)
    real = _realization(args, system)
    rep = monodromy_representation(system, real, tol)
    spectra = []
    for j, M in enumerate(rep.generators):
        expected = np.exp(2j * np.pi * eigenvalues(system.residues[j]))
        spectra.append(_num(spectral_distance(eigenvalues(M), expected)))
    return ({f"M{j + 1}": matrix_pairs(M) for j, M in enumerate(rep.generators)},
            {"words": [str(w) for w in rep.words], "base_point": complex_pair(real.base_point),
             "relation_defect": _num(rep.relation_defect),
             "local_spectrum_defects": spectra, "convention": rep.convention},
            {f"M{j + 1}": _num(e) for j, e in enumerate(rep.error_estimates)})


def _flow(args, system, tol):
    require_valid(system, tol)
    if args.path is None:
        raise UsageError("this command needs --path with ';'-separated pole configurations")
    samples = parse_configurations(args.path)
    if samples.shape[1] != system.n:
        raise UsageError(f"configurations have {samples.shape[1]} entries, system has {system.n} poles")
    if not np.array_equal(samples[0], system.poles):
        samples = np.vstack([system.poles[None, :], samples])
    path = FlowPath.confined(samples, args.pad)
    return schlesinger_flow(SchlesingerState.from_system(system), path, tol)


def _flow_common(trace):
    final = trace.final
    return ({f"Q{j + 1}": matrix_pairs(q) for j, q in enumerate(final.Q)},
            {"final_poles": [complex_pair(t) for t in final.t],
             "disk_centers": [complex_pair(c) for c in trace.path.centers],
             "disk_radii": [_num(r) for r in trace.path.radii],
             "steps": list(trace.steps),
             "first_integral_drift": _num(trace.first_integral_drift),
             "isospectrality_drift": _num(trace.isospectrality_drift)},
            {"integration": _num(trace.error_estimate)})


def cmd_flow(args, system, tol):
    return _flow_common(_flow(args, system, tol))


def cmd_invariants(args, system, tol):
    trace = _flow(args, system, tol)
    mats, diag, errs = _flow_common(trace)
    real = trace_realization(trace.path)
    words = canonical_generators(real)
    diag["isomonodromy_words"] = [str(w) for w in words]
    diag["isomonodromy_deviation"] = _num(isomonodromy_check(trace, words, tol, real))
    diag["jacobi_defect_initial"] = _num(jacobi_compatibility_defect(trace.initial))
    diag["jacobi_defect_final"] = _num(jacobi_compatibility_defect(trace.final))
    if args.probe is not None:
        probes = parse_points(args.probe)
        aux = auxiliary_system_residual(trace, probes, args.h_fd, -1, tol)
        diag["auxiliary_residual"] = {"h": _num(aux.h), "value": _num(aux.value),
                                      "value_half": _num(aux.value_half),
                                      "ratio": _num(aux.ratio)}
    return mats, diag, errs


def cmd_residual(args, system, tol):
    if args.family != "example":
        raise UsageError(f"unknown family {args.family!r}; available: example")
    h = parse_points(args.h)
    t = parse_point(args.at)
    res = schlesinger_residual(example_family(h, args.h_fd), [t, 1, 2, 3], tol=tol)
    grid = lambda g: [[_num(v) for v in row] for row in g]  # noqa: E731
    return ({}, {"family": args.family, "h": [complex_pair(c) for c in h], "at": complex_pair(t),
                 "directions": list(res.directions), "h_fd": _num(res.h),
                 "residual_grid": grid(res.grid), "residual_grid_h": grid(res.grid_h),
                 "residual_grid_half": grid(res.grid_half),
                 "max_residual": _num(res.max), "max_residual_h": _num(res.max_h),
                 "max_residual_half": _num(res.max_half)},
            {})


def cmd_example(args, system, tol):
    h = parse_points(args.h)
    t = parse_point(args.at)
    mats = {f"Q{j + 1}": matrix_pairs(q) for j, q in enumerate(example_residues(t, h))}
    diag = {"poles": [complex_pair(p) for p in (t, 1, 2, 3)], "h": [complex_pair(c) for c in h]}
    if args.x is not None:
        x = parse_point(args.x)
        mats["Y"] = matrix_pairs(example_solution(x, t, h))
        diag["x"] = complex_pair(x)
    return mats, diag, {}


def _word(text, n):
    try:
        word = LoopWord.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    for j, _ in word.letters:
        if not 1 <= j <= n:
            raise UsageError(f"pole index {j} in --word is out of range 1..{n}")
    return word


COMMANDS = {
    "validate": (cmd_validate, "check the invariants and spectral data of a system"),
    "continue": (cmd_continue, "normalised solution continued from infinity to a point"),
    "monodromy": (cmd_monodromy, "monodromy matrix of one loop word"),
    "rep": (cmd_rep, "generator matrices of the monodromy representation"),
    "flow": (cmd_flow, "Schlesinger flow of the residues along a path of pole positions"),
    "invariants": (cmd_invariants, "flow plus isomonodromy, compatibility and auxiliary checks"),
    "residual": (cmd_residual, "Schlesinger residual of a parameterised family"),
    "example": (cmd_example, "residues and closed-form solution of the four-pole example"),
}
NEEDS_SYSTEM = {"validate", "continue", "monodromy", "rep", "flow", "invariants"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isomonodromy", description="Monodromy and Schlesinger deformations of Fuchsian systems.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text,
                           formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        if name in NEEDS_SYSTEM:
            p.add_argument("system", help="system file path or fixture name "
                           f"({', '.join(fixture_names())})")
        p.add_argument("--output", "-o", default=None, help="write the document here instead of stdout")
        p.add_argument("--tol-rel", type=float, default=None,
                       help="relative ODE tolerance (default: file value or 1e-12)")
        p.add_argument("--tol-abs", type=float, default=None,
                       help="absolute ODE tolerance (default: file value or 1e-14)")
        if name in ("monodromy", "rep"):
            p.add_argument("--clearance", type=float, default=None,
                           help="loop radius around each pole (default: 0.1 x min pole separation)")
            p.add_argument("--base-point", default=None,
                           help="base point, e.g. '30-5j' (default: chosen on the switch circle)")
        if name == "monodromy":
            p.add_argument("--word", default=None,
                           help="comma-separated signed pole indices, e.g. '1,-2,1'")
        if name == "continue":
            p.add_argument("--to", default=None, help="target point, e.g. '-1' or '0.5+2j'")
            p.add_argument("--path", default=None,
                           help="approach vertices 'z0,z1,...'; the target is appended if missing "
                                "(default: radial route from the switch circle)")
        if name in ("flow", "invariants"):
            p.add_argument("--path", default=None,
                           help="pole configurations 'a1,...,an; b1,...,bn; ...'; the system's "
                                "poles are prepended if the first row differs")
            p.add_argument("--pad", type=float, default=0.1,
                           help="confinement disk padding relative to the smallest pole gap")
        if name == "invariants":
            p.add_argument("--probe", default=None,
                           help="comma-separated probe points for the auxiliary-system residual")
            p.add_argument("--h-fd", type=float, default=1e-3, help="finite-difference step")
        if name in ("residual", "example"):
            p.add_argument("--h", default="0", help="coefficients of h(t), ascending powers")
            p.add_argument("--at", default="0", help="position t of the moving pole")
        if name == "residual":
            p.add_argument("--family", default="example", help="parameterised family")
            p.add_argument("--h-fd", type=float, default=1e-3, help="finite-difference step")
        if name == "example":
            p.add_argument("--x", default=None, help="evaluate the closed-form solution here")
    return parser


def run_command(name: str, args) -> tuple[dict, int]:
    """Run one command; returns the result document and the exit status."""
    func, _ = COMMANDS[name]
    doc = {"command": name, "version": __version__, "matrices": {}, "diagnostics": {},
           "error_estimates": {}}
    inputs = [name]
    try:
        if name in NEEDS_SYSTEM:
            text, system, tol = _read_system(args.system)
            inputs.append(serialize_system(system, tol))
        else:
            system, tol = None, Tolerances()
        tol = _tolerances(args, tol)
        inputs.append(repr(sorted((k, v) for k, v in vars(args).items()
                                  if k not in ("system", "output", "command"))))
        inputs.append(repr(tol))
        doc["input_digest"] = digest(*inputs)
        mats, diag, errs = func(args, system, tol)
        doc.update(status="ok", matrices=mats, diagnostics=diag, error_estimates=errs)
        return doc, 0
    except UsageError as exc:
        doc.setdefault("input_digest", digest(*inputs))
        doc.update(status="error", error={"code": exc.code, "message": str(exc)})
        return doc, 2
    except IsomonodromyError as exc:
        doc.setdefault("input_digest", digest(*inputs))
        err = {"code": exc.code, "type": type(exc).__name__, "message": str(exc)}
        if getattr(exc, "violations", None):
            err["violations"] = [{"code": v.code, "message": v.message,
                                  "measured": _num(v.measured)} for v in exc.violations]
        if getattr(exc, "line", None) is not None:
            err["line"], err["column"] = exc.line, exc.column
        if getattr(exc, "blocking_pole", None) is not None:
            err["blocking_pole"] = exc.blocking_pole
        doc.update(status="error", error=err)
        return doc, 1
    except ValueError as exc:
        doc.setdefault("input_digest", digest(*inputs))
        doc.update(status="error", error={"code": "usage", "message": str(exc)})
        return doc, 2


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    doc, status = run_command(args.command, args)
    text = dump_document(doc)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    if status:
        print(f"isomonodromy {args.command}: {doc['error']['message']}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
