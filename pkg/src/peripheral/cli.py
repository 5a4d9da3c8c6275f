"""Command-line front end.

Every command reads a JSON file, prints a JSON report on stdout and exits
with 0 on success, 1 when ``verify`` finds a defect above tolerance and 2 on
malformed or invalid input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .channel import is_cptp
from .divisibility import classify
from .linalg import DEFAULT_TOL, Tolerances
from .recovery import (
    HalfProductContext,
    eigvec_correspondence_check,
    hs_unitarity_report,
    petz_recovery,
    verify_recovery_on_attractor,
)
from .spectral import (
    DefectivePeripheralError,
    attractor_basis,
    fix_basis,
    fixed_point_projection,
    peripheral_data,
    recurrence_search,
    spectrum_report,
)
from .structure import (
    DecompositionError,
    coarse_grained_unitary,
    compare_decompositions,
    cyclic_normalize,
    fixed_points_from_cycles,
    verify_decomposition,
    wolf_decompose,
)
from .unfold import spec_decomposition, unfold, verify_unfold

TOL_ENV = "PERIPHERAL_TOL"
COMMANDS = ("spectrum", "attractor", "decompose", "cycles", "recover", "classify",
            "unfold", "verify")


def tolerances_from_env(environ=None) -> Tolerances:
    """Defaults, optionally overridden by ``PERIPHERAL_TOL="eig=1e-9,psd=1e-9,eq=1e-8"``."""
    environ = os.environ if environ is None else environ
    raw = environ.get(TOL_ENV, "").strip()
    vals = {"eig_peripheral": DEFAULT_TOL.eig_peripheral, "psd": DEFAULT_TOL.psd,
            "equality": DEFAULT_TOL.equality}
    alias = {"eig": "eig_peripheral", "eq": "equality"}
    if raw:
        for item in raw.split(","):
            key, _, value = item.partition("=")
            key = alias.get(key.strip(), key.strip())
            if key not in vals:
                raise io.InputError("tolerance_override", f"unknown key {key!r} in {TOL_ENV}")
            vals[key] = float(value)
    return Tolerances(**vals)


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise io.InputError("readable_file", str(exc)) from None
    except json.JSONDecodeError as exc:
        raise io.InputError("json_syntax", f"{path}: {exc}") from None


def _peripheral_summary(pdata) -> list:
    return [{"eigenvalue": io.encode_complex(c.eigenvalue), "multiplicity": c.multiplicity}
            for c in pdata.clusters]


def _report(rep) -> dict:
    return io.jsonable(rep.to_dict())


# ----------------------------------------------------------------------
# commands
# ----------------------------------------------------------------------

def cmd_spectrum(args, tol) -> tuple[dict, int]:
    ch = io.channel_from_json(_read_json(args.file), tol)
    sr = spectrum_report(ch)
    pdata = peripheral_data(ch, tol)
    order = np.lexsort((sr.eigenvalues.imag, -np.abs(sr.eigenvalues)))
    w = sr.eigenvalues[order]
    return {
        "dim": ch.dim,
        "eigenvalues": io.encode_vector(w),
        "determinant": io.encode_complex(np.linalg.det(np.asarray(ch.superop))),
        "axioms": {"one_defect": sr.one_defect, "conjugation_defect": sr.conjugation_defect,
                   "radius_excess": sr.radius_excess,
                   "hold": sr.axioms_hold(tol.equality)},
        "peripheral": _peripheral_summary(pdata),
    }, 0


def cmd_attractor(args, tol) -> tuple[dict, int]:
    ch = io.channel_from_json(_read_json(args.file), tol)
    pdata = peripheral_data(ch, tol)
    d = ch.dim
    ident = np.eye(d).reshape(-1, order="F")
    pp_id = (pdata.projector_superop @ ident).reshape(d, d, order="F")
    p_id = (fixed_point_projection(ch, tol, pdata) @ ident).reshape(d, d, order="F")
    n, defect = recurrence_search(pdata, args.n_max)
    return {
        "dim": d,
        "attractor_dim": len(attractor_basis(ch, tol, pdata)),
        "fix_dim": len(fix_basis(ch, tol, pdata)),
        "peripheral": _peripheral_summary(pdata),
        "basis": [io.encode_matrix(x) for x in attractor_basis(ch, tol, pdata)],
        "pp_identity": io.encode_matrix(pp_id),
        "p_identity": io.encode_matrix(p_id),
        "recurrence": {"n": n, "defect": defect, "n_max": args.n_max},
    }, 0


def _decompose(ch, tol, seed):
    dec = wolf_decompose(ch, tol, seed)
    return dec, verify_decomposition(ch, dec, tol)


def cmd_decompose(args, tol) -> tuple[dict, int]:
    ch = io.channel_from_json(_read_json(args.file), tol)
    dec, ver = _decompose(ch, tol, args.seed)
    cl = classify(ch, tol, args.seed, dec=dec)
    out = {
        "h0_dim": dec.h0.dim,
        "decomposition": io.decomposition_to_json(dec),
        "verification": _report(ver),
        "classification": io.jsonable(cl.to_dict()),
    }
    if args.spec:
        spec = io.spec_from_json(_read_json(args.spec))
        cmp = compare_decompositions(dec, spec_decomposition(spec), seed=args.seed)
        out["equivalence"] = {"verdict": "pass" if cmp.ok else "fail", **_report(cmp)}
    return out, 0


def cmd_cycles(args, tol) -> tuple[dict, int]:
    ch = io.channel_from_json(_read_json(args.file), tol)
    dec = wolf_decompose(ch, tol, args.seed)
    cyc = cyclic_normalize(dec)
    big_l, w = coarse_grained_unitary(dec)
    ver = verify_decomposition(ch, cyc.transformed(), tol)
    return {
        "decomposition": io.decomposition_to_json(dec),
        "cycles": [{"blocks": [k + 1 for k in c.block_indices],
                    "uniform_unitary": io.encode_matrix(c.uniform_unitary),
                    "local_changes": [io.encode_matrix(v) for v in c.local_changes]}
                   for c in cyc.cycles],
        "lcm": big_l,
        "coarse_grained_unitary": io.encode_matrix(w),
        "fix_dim": len(fix_basis(ch, tol)),
        "fix_dim_from_cycles": len(fixed_points_from_cycles(cyc)),
        "normalized_verification": _report(ver),
    }, 0


def cmd_recover(args, tol) -> tuple[dict, int]:
    ch = io.channel_from_json(_read_json(args.file), tol)
    ctx = HalfProductContext.from_channel(ch, tol)
    rec = petz_recovery(ch, ctx, tol)
    dec = wolf_decompose(ch, tol, args.seed)
    faithful = bool(np.linalg.eigvalsh(ctx.sigma).min() > tol.psd)
    out = {
        "sigma": io.encode_matrix(ctx.sigma),
        "faithful": faithful,
        "recovery_kraus": [io.encode_matrix(k) for k in rec.kraus],
        "attractor_identity": _report(verify_recovery_on_attractor(ch, tol)),
        "hs_unitarity": io.jsonable(hs_unitarity_report(dec).to_dict()),
        "eigenvector_correspondence": (_report(eigvec_correspondence_check(ch, tol))
                                       if faithful else None),
    }
    return out, 0


def cmd_classify(args, tol) -> tuple[dict, int]:
    ch = io.channel_from_json(_read_json(args.file), tol)
    return io.jsonable(classify(ch, tol, args.seed).to_dict()), 0


def cmd_unfold(args, tol) -> tuple[dict, int]:
    spec = io.spec_from_json(_read_json(args.file))
    ch = unfold(spec)
    return {
        "channel": io.channel_to_json(ch, "superop"),
        "spec": io.spec_to_json(spec),
        "verification": _report(verify_unfold(spec, ch, tol)),
    }, 0


def cmd_verify(args, tol) -> tuple[dict, int]:
    ch = io.channel_from_json(_read_json(args.file), tol)
    cp = is_cptp(ch, tol)
    sr = spectrum_report(ch)
    if args.report:
        dec = io.decomposition_from_json(_read_json(args.report))
        if dec.ambient_dim != ch.dim:
            raise io.InputError("dim", "report and channel have different dimensions")
        ver = verify_decomposition(ch, dec, tol)
        source = "report"
    else:
        dec, ver = _decompose(ch, tol, args.seed)
        source = "computed"
    checks = _report(ver)["checks"]
    checks["spectral_axioms"] = {
        "defect": max(sr.one_defect, sr.conjugation_defect, sr.radius_excess),
        "threshold": tol.equality,
        "passed": sr.axioms_hold(tol.equality)}
    ok = all(c["passed"] for c in checks.values()) and cp.ok
    out = {"ok": ok, "decomposition_source": source, "cptp": cp.ok, "checks": checks}
    return out, 0 if ok else 1


HANDLERS = {
    "spectrum": cmd_spectrum, "attractor": cmd_attractor, "decompose": cmd_decompose,
    "cycles": cmd_cycles, "recover": cmd_recover, "classify": cmd_classify,
    "unfold": cmd_unfold, "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-eig", type=float, default=None,
                        help="distance of |lambda| to 1 counted as peripheral")
    common.add_argument("--tol-eq", type=float, default=None,
                        help="tolerance for equalities and ranks")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized steps")
    common.add_argument("--pretty", action="store_true", help="indent the JSON output")

    parser = argparse.ArgumentParser(prog="peripheral",
                                     description="Asymptotic structure of quantum channels.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common], help=HANDLERS[name].__name__[4:])
        p.add_argument("file", help="unfold spec" if name == "unfold" else "channel file")
        if name == "decompose":
            p.add_argument("--spec", help="unfold spec to compare the decomposition with")
        if name == "verify":
            p.add_argument("report", nargs="?", help="decomposition report to check")
        if name == "attractor":
            p.add_argument("--n-max", type=int, default=1000,
                           help="search range for the recurrence time")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        tol = tolerances_from_env()
        if args.tol_eig is not None or args.tol_eq is not None:
            tol = Tolerances(
                eig_peripheral=args.tol_eig if args.tol_eig is not None else tol.eig_peripheral,
                psd=tol.psd,
                equality=args.tol_eq if args.tol_eq is not None else tol.equality)
        body, code = HANDLERS[args.command](args, tol)
    except io.InputError as exc:
        print(f"peripheral {args.command}: invalid input: {exc}", file=sys.stderr)
        return 2
    except (DecompositionError, DefectivePeripheralError) as exc:
        print(f"peripheral {args.command}: analysis failed: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"peripheral {args.command}: invalid input: {exc}", file=sys.stderr)
        return 2
    doc = {"command": args.command, "seed": args.seed,
           "tolerances": {"eig_peripheral": tol.eig_peripheral, "psd": tol.psd,
                          "equality": tol.equality}}
    doc.update(body)
    doc = io.jsonable(doc)
    print(json.dumps(doc, sort_keys=True, indent=2 if args.pretty else None))
    return code


if __name__ == "__main__":
    sys.exit(main())
