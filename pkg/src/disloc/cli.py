"""disloc command line: spectra, wavefunctions, deformations, oracle, verify.

Option values resolve as: command-line flag > ``--config`` JSON file > default.
CSV goes to ``--out`` (stdout if omitted); the JSON run report goes to
``--report`` when given.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Dict, List, Optional

import numpy as np

from . import acceptance
from .darboux import DeformationSpec, system_for, validate_deletion_set
from .errors import DislocError, WronskianZero
from .io import (
    RunReport,
    atomic_write_text,
    deformation_csv,
    fmt,
    spectrum_csv,
    wavefunction_csv,
)
from .model import LEFT, RIGHT, PotentialSpec, potential_value
from .oracle import GridConfig, grid_spectrum
from .spectrum import (
    appendix_closed_forms,
    build_algebraic_equation,
    check_root_symmetry,
    find_spectrum_general,
    full_spectrum_hermite_case,
    levels as exact_levels,
    negative_spectrum_hermite_case,
)
from .states import HermiteForm, boundary_report, count_nodes, eigenstate, general_state, sample_rows

DEFAULTS: Dict[str, Dict[str, object]] = {
    "spectrum": {"a": None, "ell": None, "emin": None, "emax": None, "nmax": 6, "tol": 1e-10,
                 "out": None, "report": None},
    "wavefunction": {"a": None, "ell": None, "n": 0, "energy": None, "xmin": -6.0, "xmax": 6.0,
                     "samples": 601, "derivative": False, "out": None, "report": None},
    "deform": {"ell": None, "crum": None, "delete": None, "states": None, "xmin": -8.0, "xmax": 8.0,
               "samples": 801, "verify": False, "levels": 4, "out": None, "report": None},
    "oracle": {"a": None, "ell": None, "crum": None, "delete": None, "L": 8.0, "N": 4000, "levels": 6,
               "compare": False, "out": None, "report": None},
    "verify": {"suite": "quick", "report": None},
}

# a flag from one of these groups overrides any member set in the config file
EXCLUSIVE = (("a", "ell"), ("crum", "delete"))

ISO_TOL = 2e-3
CONCORDANCE_FACTOR = 5.0


class UsageError(Exception):
    pass


def _int_list(text: str) -> List[int]:
    try:
        return [int(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="disloc", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="JSON file of option values (flags take precedence)")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, csv=True):
        if csv:
            sp.add_argument("--out", help="CSV output path (default: stdout)")
        sp.add_argument("--report", help="write the JSON run report here")
        sp.add_argument("--config", dest="config_sub", help=argparse.SUPPRESS)

    def potential(sp):
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--a", type=float, help="jump height a > 0 (matching-determinant route)")
        g.add_argument("--ell", type=int, help="integer l, a = 4l (exact polynomial route)")

    s = sub.add_parser("spectrum", help="eigenvalues of V(x; a)")
    potential(s)
    s.add_argument("--emin", type=float)
    s.add_argument("--emax", type=float)
    s.add_argument("--nmax", type=int, help="highest level index (default 6)")
    s.add_argument("--tol", type=float, help="root tolerance (default 1e-10)")
    common(s)

    w = sub.add_parser("wavefunction", help="sample one eigenfunction")
    potential(w)
    w.add_argument("--n", type=int, help="level index (default 0)")
    w.add_argument("--energy", type=float, help="use this energy instead of the computed level")
    w.add_argument("--xmin", type=float)
    w.add_argument("--xmax", type=float)
    w.add_argument("--samples", type=int)
    w.add_argument("--derivative", action="store_true", default=None, help="add a dpsi column")
    common(w)

    d = sub.add_parser("deform", help="Crum or Krein-Adler deformed potential")
    d.add_argument("--ell", type=int)
    g = d.add_mutually_exclusive_group()
    g.add_argument("--crum", type=int, metavar="M", help="delete the M lowest states")
    g.add_argument("--delete", type=_int_list, metavar="D", help="comma-separated adjacent pairs, e.g. 1,2")
    d.add_argument("--states", type=_int_list, help="deformed states to export: n for Crum, original index for Krein-Adler")
    d.add_argument("--xmin", type=float)
    d.add_argument("--xmax", type=float)
    d.add_argument("--samples", type=int)
    d.add_argument("--levels", type=int, help="levels compared by --verify (default 4)")
    d.add_argument("--verify", action="store_true", default=None, help="grid-oracle check of the spectrum")
    common(d)

    o = sub.add_parser("oracle", help="finite-difference spectrum")
    potential(o)
    g = o.add_mutually_exclusive_group()
    g.add_argument("--crum", type=int, metavar="M")
    g.add_argument("--delete", type=_int_list, metavar="D")
    o.add_argument("--L", type=float, help="box half-width (default 8)")
    o.add_argument("--N", type=int, help="grid points, even (default 4000)")
    o.add_argument("--levels", type=int, help="number of levels (default 6)")
    o.add_argument("--compare", action="store_true", default=None, help="check against the exact levels")
    common(o)

    v = sub.add_parser("verify", help="run an acceptance suite")
    v.add_argument("--suite", choices=sorted(acceptance.SUITES))
    common(v, csv=False)
    return p


def resolve(args: argparse.Namespace) -> Dict[str, object]:
    """Merge flags over the config file over defaults."""
    defaults = DEFAULTS[args.command]
    path = args.config_sub or args.config
    config = {}
    if path:
        with open(path) as fh:
            config = json.load(fh)
        if not isinstance(config, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(config) - set(defaults)
        if unknown:
            raise UsageError(f"unknown config keys for {args.command}: {sorted(unknown)}")
    for group in EXCLUSIVE:
        if any(getattr(args, k, None) is not None for k in group):
            for k in group:
                config.pop(k, None)
    opts = {}
    for key, default in defaults.items():
        flag = getattr(args, key, None)
        opts[key] = flag if flag is not None else config.get(key, default)
    for key in ("delete", "states"):
        if isinstance(opts.get(key), str):
            opts[key] = _int_list(opts[key])
    return opts


def _potential(opts) -> PotentialSpec:
    if opts.get("a") is not None and opts.get("ell") is not None:
        raise UsageError("give exactly one of --a and --ell")
    if opts.get("ell") is not None:
        return PotentialSpec.from_ell(int(opts["ell"]))
    if opts.get("a") is not None:
        return PotentialSpec(float(opts["a"]))
    raise UsageError("one of --a or --ell is required")


def _deformation(opts) -> DeformationSpec:
    if opts.get("ell") is None:
        raise UsageError("--ell is required for a deformation")
    if (opts.get("crum") is None) == (opts.get("delete") is None):
        raise UsageError("give exactly one of --crum and --delete")
    if opts.get("crum") is not None:
        return DeformationSpec(int(opts["ell"]), "crum", M=int(opts["crum"]))
    return DeformationSpec(int(opts["ell"]), "krein_adler", D=validate_deletion_set(opts["delete"]))


def _emit(text: str, path: Optional[str], report: RunReport) -> None:
    if path:
        atomic_write_text(path, text)
        report.outputs.append(path)
    else:
        sys.stdout.write(text)


def _info(opts, line: str) -> None:
    # keep stdout clean for CSV when no --out is given
    print(line, file=sys.stdout if opts.get("out") else sys.stderr)


def _sample_grid(opts) -> np.ndarray:
    lo, hi, n = float(opts["xmin"]), float(opts["xmax"]), int(opts["samples"])
    if not lo < hi or n < 2:
        raise UsageError("need xmin < xmax and samples >= 2")
    return np.linspace(lo, hi, n)


def cmd_spectrum(opts, report: RunReport) -> RunReport:
    spec = _potential(opts)
    nmax = int(opts["nmax"])
    if spec.hermite_case is not None:
        ell = spec.hermite_case
        tol = min(float(opts["tol"]), 1e-13)
        found = full_spectrum_hermite_case(ell, nmax, tol) if nmax >= ell \
            else negative_spectrum_hermite_case(ell, tol)[: nmax + 1]
        if opts["emin"] is not None or opts["emax"] is not None:
            lo = -np.inf if opts["emin"] is None else opts["emin"]
            hi = np.inf if opts["emax"] is None else opts["emax"]
            found = [e for e in found if lo <= e.E <= hi]
        eq = build_algebraic_equation(ell)
        roots = [e.E for e in negative_spectrum_hermite_case(ell, tol)]
        sym = check_root_symmetry(roots, ell)
        _info(opts, "polynomial coefficients (ascending powers): " + " ".join(str(c) for c in eq.coefficients))
        _info(opts, f"root symmetry residual: {sym:.3e}")
        report.check("root symmetry about -1-2l", sym, 1e-10)
        report.data["polynomial"] = [int(c) for c in eq.coefficients]
        if ell == 6:
            closed = sorted(appendix_closed_forms(6))
            dev = max(abs(c - r) for c, r in zip(closed, roots))
            _info(opts, f"closed-form cross-check: max |dE| = {dev:.3e}")
            report.check("radical closed forms vs polynomial roots", dev, 1e-9)
    else:
        windowed = opts["emin"] is not None or opts["emax"] is not None
        found = find_spectrum_general(spec, opts["emin"], opts["emax"], tol=float(opts["tol"]), n_max=nmax)
        if not windowed:
            found = found[: nmax + 1]
        worst = max(e.residual for e in found)
        report.check("normalized determinant at roots", worst, 1e-6)
    report.data["levels"] = [{"n": e.n, "E": e.E, "provenance": e.provenance, "residual": e.residual}
                             for e in found]
    _emit(spectrum_csv(found), opts["out"], report)
    return report


def _form_label(form) -> str:
    return f"H{form.degree}" if isinstance(form, HermiteForm) else "1F1"


def cmd_wavefunction(opts, report: RunReport) -> RunReport:
    spec = _potential(opts)
    n = int(opts["n"])
    if opts["energy"] is not None:
        state = general_state(spec, float(opts["energy"]), n=n)
    else:
        state = eigenstate(spec, n)
    xs = _sample_grid(opts)
    rows = sample_rows(state, xs, with_derivative=bool(opts["derivative"]))
    br = boundary_report(state)
    nodes = count_nodes(state)
    report.data.update({"E": state.E, "nodes": nodes, "value_jump": br.value_jump,
                        "slope_jump": br.slope_jump, "tail_decay_ok": br.tail_decay_ok,
                        "left_form": _form_label(state.left_form),
                        "right_form": _form_label(state.right_form)})
    report.check("value continuity at 0", br.value_jump, 1e-10)
    report.check("slope continuity at 0", br.slope_jump, 1e-10)
    report.check("tail decay", 0.0 if br.tail_decay_ok else 1.0, 0.0)
    if opts["energy"] is None:
        report.check("node count equals n", abs(nodes - n), 0)
    _emit(wavefunction_csv(rows, bool(opts["derivative"])), opts["out"], report)
    return report


def _with_sentinels(xs: np.ndarray):
    xs = xs[xs != 0]
    neg, pos = xs[xs < 0], xs[xs > 0]
    return neg, pos


def cmd_deform(opts, report: RunReport) -> RunReport:
    dspec = _deformation(opts)
    report.inputs["deformation"] = dspec.to_json()
    system = system_for(dspec)
    ratio = system.regularity_scan()
    report.check("Wronskian regularity on [-8,8] (local |W| ratio)", ratio, 1e-12, passed=ratio >= 1e-12)
    # Crum states are labelled by the deformed index n (level n + M of the
    # original system); Krein-Adler states keep their original index
    shift = dspec.M if dspec.kind == "crum" else 0
    if opts["states"] is None:
        labels = [n - shift for n, _ in system.retained_levels(3)]
    else:
        labels = list(opts["states"])
    kept = [n + shift for n in labels]
    for lab, n in zip(labels, kept):
        if lab < 0 or n in system.deleted:
            raise UsageError(f"state {lab} is not a retained state of this deformation")
    neg, pos = _with_sentinels(_sample_grid(opts))
    xs = np.concatenate([neg, [-0.0, 0.0], pos])
    parts = [(neg, None), (np.array([0.0]), LEFT), (np.array([0.0]), RIGHT), (pos, None)]
    v = np.concatenate([system.potential(x, side or "auto") for x, side in parts])
    psis = [np.concatenate([system.state(n, x, side or "auto") for x, side in parts]) for n in kept]
    energies = dict(system.retained_levels(max(kept, default=0) + 1))
    report.data["states"] = [{"label": lab, "level": n, "E": energies[n]} for lab, n in zip(labels, kept)]
    report.data["jump_at_origin"] = float(v[len(neg) + 1] - v[len(neg)])
    if opts["verify"]:
        want = [e for _, e in system.retained_levels(int(opts["levels"]))]
        grid = grid_spectrum(system.potential, GridConfig(levels=len(want)))
        dev = max(abs(g.E - e) for g, e in zip(grid, want))
        report.data["oracle"] = [{"n": g.n, "E": g.E, "estimate": g.residual} for g in grid]
        report.check("oracle spectrum vs retained levels", dev, ISO_TOL)
        _info(opts, "oracle spectrum: " + " ".join(fmt(g.E) for g in grid))
        _info(opts, f"isospectrality residual: {dev:.3e}")
    _emit(deformation_csv(xs, v, psis, labels), opts["out"], report)
    return report


def cmd_oracle(opts, report: RunReport) -> RunReport:
    cfg = GridConfig(L=float(opts["L"]), N=int(opts["N"]), levels=int(opts["levels"]))
    if opts["crum"] is not None or opts["delete"] is not None:
        dspec = _deformation(opts)
        system = system_for(dspec)
        potential = system.potential
        exact = [e for _, e in system.retained_levels(cfg.levels)]
        report.inputs["deformation"] = dspec.to_json()
    else:
        spec = _potential(opts)
        potential = lambda x: potential_value(spec, x)  # noqa: E731
        exact = [e.E for e in exact_levels(spec, cfg.levels - 1)] if opts["compare"] else []
    grid = grid_spectrum(potential, cfg)
    if opts["compare"]:
        worst = max(abs(g.E - e) / g.residual if g.residual > 0 else 0.0 for g, e in zip(grid, exact))
        report.check("grid vs exact, in Richardson estimates", worst, CONCORDANCE_FACTOR)
    _emit(spectrum_csv(grid), opts["out"], report)
    return report


def cmd_verify(opts, report: RunReport) -> RunReport:
    acceptance.run_suite(opts["suite"], report)
    return report


COMMANDS = {
    "spectrum": cmd_spectrum,
    "wavefunction": cmd_wavefunction,
    "deform": cmd_deform,
    "oracle": cmd_oracle,
    "verify": cmd_verify,
}


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = resolve(args)
    except (UsageError, OSError, json.JSONDecodeError, argparse.ArgumentTypeError) as exc:
        parser.error(str(exc))
    report = RunReport(["disloc"] + argv, {k: v for k, v in opts.items() if k not in ("out", "report")})
    try:
        COMMANDS[args.command](opts, report)
    except UsageError as exc:
        parser.error(str(exc))
    except WronskianZero as exc:
        print(f"error: WronskianZero: {exc} (x = {exc.x})", file=sys.stderr)
        return 1
    except DislocError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    report.finish()
    if opts.get("report"):
        atomic_write_text(opts["report"], report.dumps())
    for c in report.checks:
        if not c.passed and args.command != "verify":
            print(f"check failed: {c.name}: residual={c.residual:.3e} tol={c.tolerance:.3e}", file=sys.stderr)
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
