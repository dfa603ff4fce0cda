"""Command-line interface: ``tailored-bell <subcommand> ...``.

Exit status is 0 on success, 2 on a usage error and 3 when an input violates
a domain invariant.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io
from .bases import BasisPair, basis_pair_from_overlap_blocks, overlap_of, preprocess
from .errors import DomainError, ShapeMismatch, VisibilityOutOfRange
from .functional import evaluate_behavior, evaluate_n_realization, evaluate_realization, functional_from_overlap, n_functional
from .localvalue import local_value, nu_threshold, simplex_extremals
from .realization import (
    canonical,
    canonical_n_realization,
    certification_completeness_check,
    certify_measurements,
    exceptional_report,
    extract_state,
    isotropic_realization,
    spectrum_report,
)
from .search import minimize_local_value

DEFAULT_TOL = 1e-9


def _f(x) -> str:
    return f"{float(x):.6f}"


def _emit(args, doc: dict, lines: list[str]) -> None:
    print("\n".join(lines))
    if args.out:
        io.write_json(args.out, doc)


def _pair_or_overlap(args):
    """(pair, overlap) from --bases or --overlap; pair is None for overlap-only input."""
    if getattr(args, "bases", None):
        pair = io.read_bases(io.load_json(args.bases))
        return pair, overlap_of(pair)
    if getattr(args, "overlap", None):
        return None, io.read_overlap(io.load_json(args.overlap))
    raise DomainError("one of --bases or --overlap is required")


def _preprocessed(pair: BasisPair, args):
    rep = preprocess(pair, args.unit_tol)
    return rep, canonical(rep.truncated)


# -- subcommands ---------------------------------------------------------------


def cmd_eval(args) -> None:
    if args.behavior:
        doc = io.load_json(args.behavior)
        beh = io.read_behavior(doc)
        if args.overlap:
            o = io.read_overlap(io.load_json(args.overlap))
        elif "overlap" in doc:
            o = io.read_overlap({"d": doc["d"], "overlap": doc["overlap"]})
        else:
            raise DomainError("behavior input needs an overlap (--overlap or an 'overlap' field)")
        if o.dim != beh.p.shape[1]:
            raise ShapeMismatch(f"overlap dimension {o.dim} != behavior dimension {beh.p.shape[1]}")
        beh.validate(args.tol)
        c, f = evaluate_behavior(functional_from_overlap(o), beh)
        d = o.dim
    else:
        pair = io.read_bases(io.load_json(args.bases))
        rep, real = _preprocessed(pair, args)
        c, f = evaluate_realization(functional_from_overlap(real.overlap), real)
        d = rep.effective_dim
    _emit(args, {"d": d, "C_d": c, "F_d": f}, [f"d {d}", f"C_d {_f(c)}", f"F_d {_f(f)}"])


def cmd_local_value(args) -> None:
    _, o = _pair_or_overlap(args)
    rep = local_value(o)
    s = rep.best_strategy
    doc = {
        "d": rep.dim,
        "beta_L": rep.beta_L,
        "nu_star": rep.nu_star,
        "best_strategy": {"u": s.u, "v": s.v, "alice": s.alice},
        "per_strategy_scores": rep.per_strategy_scores,
    }
    _emit(args, doc, [f"beta_L {_f(rep.beta_L)}", f"nu_star {_f(rep.nu_star)}", f"best_strategy u={s.u} v={s.v}"])


def cmd_quantum_check(args) -> None:
    pair = io.read_bases(io.load_json(args.bases))
    rep, real = _preprocessed(pair, args)
    sr = spectrum_report(real)
    d = rep.effective_dim
    ok = (
        abs(sr.value - (d - 1)) < args.tol
        and sr.max_spectrum_deviation < args.tol
        and sr.projector_sum_residual < args.tol
        and sr.saturation_residual < args.tol
        and bool(np.all(sr.kernel_dims == d - 2))
    )
    doc = {
        "d": d,
        "original_dim": pair.dim,
        "removed_pairs": [list(p) for p in rep.removed_pairs],
        "F_d": sr.value,
        "quantum_value": d - 1,
        "max_spectrum_deviation": sr.max_spectrum_deviation,
        "kernel_dims": sr.kernel_dims,
        "projector_sum_residual": sr.projector_sum_residual,
        "saturation_residual": sr.saturation_residual,
        "passed": ok,
    }
    if args.realization_out:
        io.write_json(args.realization_out, io.realization_doc(real, real.overlap))
    _emit(
        args,
        doc,
        [
            f"d {d} (removed {len(rep.removed_pairs)} shared vector(s))",
            f"F_d {sr.value:.9f}",
            f"quantum_value {d - 1}",
            f"spectrum_deviation {sr.max_spectrum_deviation:.3e}",
            f"projector_sum_residual {sr.projector_sum_residual:.3e}",
            f"saturation_residual {sr.saturation_residual:.3e}",
            f"passed {str(ok).lower()}",
        ],
    )


def _realization_and_overlap(args):
    r, o = io.read_realization(io.load_json(args.realization))
    if args.overlap:
        o = io.read_overlap(io.load_json(args.overlap))
    if o is None:
        raise DomainError("an overlap is required (--overlap or an 'overlap' field in the realization)")
    return r, o


def cmd_certify(args) -> None:
    r, o = _realization_and_overlap(args)
    rep = certify_measurements(r.bob_P, r.bob_Q, o, args.tol)
    doc = {
        "d": o.dim,
        "max_residual_P": rep.max_residual_P,
        "max_residual_Q": rep.max_residual_Q,
        "max_projectivity_residual": max(rep.projectivity_residuals),
        "completeness_residual": rep.completeness_residual,
        "tol": rep.tol,
        "passed": rep.passed,
    }
    lines = [
        f"max_residual_P {rep.max_residual_P:.3e}",
        f"max_residual_Q {rep.max_residual_Q:.3e}",
        f"passed {str(rep.passed).lower()}",
    ]
    if args.complete and rep.passed:
        comp = certification_completeness_check(r.bob_P, r.bob_Q, o, args.tol)
        doc["completeness"] = {"n": comp.n, "D": comp.D, "spectrum_ok": comp.spectrum_ok, "value": comp.value}
        lines.append(f"completeness n={comp.n} D={comp.D} value {_f(comp.value)}")
    _emit(args, doc, lines)


def cmd_extract(args) -> None:
    r, o = _realization_and_overlap(args)
    rep = extract_state(r, o, args.column)
    doc = {
        "d": o.dim,
        "column": args.column,
        "fidelity": rep.fidelity,
        "product_residual": rep.product_residual,
        "marginals_P": rep.marginals_P,
        "marginals_Q": rep.marginals_Q,
        "isometry_residuals": list(rep.isometry_residuals),
        "extracted_state": io.encode_complex(rep.extracted_state),
    }
    _emit(
        args,
        doc,
        [
            f"fidelity {rep.fidelity:.9f}",
            f"product_residual {rep.product_residual:.3e}",
            f"max_marginal_deviation {np.abs(np.concatenate([rep.marginals_P, rep.marginals_Q]) - 1 / o.dim).max():.3e}",
        ],
    )


def _parse_grid(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad visibility list {text!r}") from exc


def cmd_robustness(args) -> None:
    pair, o = _pair_or_overlap(args)
    if pair is not None:
        _, real = _preprocessed(pair, args)
        o = real.overlap
        f = functional_from_overlap(o)
    d = o.dim
    beta = local_value(o).beta_L
    nu_star = nu_threshold(beta, d)
    rows = []
    for nu in args.nu:
        if not 0 <= nu <= 1:
            raise VisibilityOutOfRange(f"visibility {nu} outside [0, 1]")
        if pair is not None:
            score = evaluate_realization(f, isotropic_realization(real, nu))[1]
        else:
            score = (d - 1) * (2 * nu - 1)
        rows.append((nu, score, score > beta))
    csv = "nu,score,violated\n" + "".join(f"{io.format_float(n)},{io.format_float(s)},{str(v).lower()}\n" for n, s, v in rows)
    print(f"beta_L {_f(beta)}  threshold {_f(nu_star)}")
    for n, s, v in rows:
        print(f"{_f(n)} {_f(s)} {str(v).lower()}")
    if args.out:
        if str(args.out).endswith(".csv"):
            Path(args.out).write_text(csv)
        else:
            doc = {"d": d, "beta_L": beta, "nu_star": nu_star, "rows": [{"nu": n, "score": s, "violated": v} for n, s, v in rows]}
            io.write_json(args.out, doc)


def cmd_search(args) -> None:
    doc = io.load_json(args.config)
    if args.seed is not None:
        doc["seed"] = args.seed
    cfg = io.read_search_config(doc)
    res = minimize_local_value(cfg)
    if args.trajectory_csv:
        Path(args.trajectory_csv).write_text(io.trajectory_csv(res))
    lines = [f"d {cfg.d}", f"best_beta_L {_f(res.best_beta_L)}", f"best_restart {res.best_restart}", "best_overlap"]
    lines += ["  " + " ".join(_f(x) for x in row) for row in res.best_overlap.entries]
    _emit(args, io.search_result_doc(res), lines)


def cmd_simplex(args) -> None:
    ext = simplex_extremals(args.tau, args.n, args.total)
    doc = {"tau": args.tau, "n": args.n, "total": args.total, "extremals": [list(e.vector) for e in ext]}
    _emit(args, doc, [f"{len(ext)} extremal point(s)"] + [" ".join(_f(x) for x in e.vector) for e in ext])


def cmd_extension(args) -> None:
    bases = io.read_n_bases(io.load_json(args.bases))
    nf = n_functional(bases)
    state, obs, bob = canonical_n_realization(bases)
    value = evaluate_n_realization(nf, state, obs, bob)
    doc = {"d": nf.d, "N": len(bases), "value": value, "quantum_value": nf.quantum_value}
    _emit(args, doc, [f"F_d^N {_f(value)}", f"quantum_value {_f(nf.quantum_value)}"])


def cmd_exceptional(args) -> None:
    doc = io.load_json(args.spec)
    if "e" in doc:
        pair = io.read_bases(doc)
    else:
        pair = basis_pair_from_overlap_blocks(io.read_overlap(doc))
    blocks = doc.get("blocks")
    if not isinstance(blocks, list):
        raise DomainError("block spec needs a 'blocks' list of index lists")
    rep = exceptional_report(pair, blocks)
    d = pair.dim
    ok = abs(rep.value - (d - 1)) < args.tol and rep.max_behavior_deviation < args.tol
    out = {
        "d": d,
        "blocks": blocks,
        "F_d": rep.value,
        "quantum_value": d - 1,
        "max_behavior_deviation": rep.max_behavior_deviation,
        "block_weights": list(rep.block_weights),
        "distance_from_phi": rep.distinct_from_phi,
        "passed": ok,
    }
    _emit(
        args,
        out,
        [
            f"F_d {rep.value:.9f}",
            f"max_behavior_deviation {rep.max_behavior_deviation:.3e}",
            f"distance_from_phi {_f(rep.distinct_from_phi)}",
            f"passed {str(ok).lower()}",
        ],
    )


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="random seed (used by search)")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="pass/fail tolerance")
    common.add_argument("--out", type=Path, default=None, help="write the JSON result here")
    common.add_argument("--unit-tol", type=float, default=1e-9, help="threshold for shared basis vectors")

    p = argparse.ArgumentParser(prog="tailored-bell", description="Tailored Bell functionals toolkit")
    sub = p.add_subparsers(dest="command", required=True, metavar="subcommand")

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    sp = add("eval", cmd_eval, "value of the functional on a basis pair or a behavior")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--bases", type=Path)
    g.add_argument("--behavior", type=Path)
    sp.add_argument("--overlap", type=Path)

    for name, func, help_ in (
        ("local-value", cmd_local_value, "local value and visibility threshold"),
        ("robustness", cmd_robustness, "isotropic-noise scores over a visibility grid"),
    ):
        sp = add(name, func, help_)
        g = sp.add_mutually_exclusive_group(required=True)
        g.add_argument("--overlap", type=Path)
        g.add_argument("--bases", type=Path)
        if name == "robustness":
            sp.add_argument("--nu", type=_parse_grid, required=True, help="comma-separated visibilities")

    sp = add("quantum-check", cmd_quantum_check, "verify the canonical optimal realization")
    sp.add_argument("--bases", type=Path, required=True)
    sp.add_argument("--realization-out", type=Path)

    sp = add("certify", cmd_certify, "check Bob's measurements against the certified relations")
    sp.add_argument("--realization", type=Path, required=True)
    sp.add_argument("--overlap", type=Path)
    sp.add_argument("--complete", action="store_true", help="also rebuild and evaluate an optimal realization")

    sp = add("extract", cmd_extract, "extract the maximally entangled state with local isometries")
    sp.add_argument("--realization", type=Path, required=True)
    sp.add_argument("--overlap", type=Path)
    sp.add_argument("--column", type=int, default=0, help="zero-based column of the overlap matrix")

    sp = add("search", cmd_search, "minimize the local value over overlap matrices")
    sp.add_argument("--config", type=Path, required=True)
    sp.add_argument("--trajectory-csv", type=Path)

    sp = add("simplex", cmd_simplex, "extremal points of the capped probability simplex")
    sp.add_argument("--tau", type=float, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--total", type=float, default=1.0)

    sp = add("extension", cmd_extension, "N-basis functional on its canonical realization")
    sp.add_argument("--bases", type=Path, required=True)

    sp = add("exceptional", cmd_exceptional, "verify a block-diagonal optimal state")
    sp.add_argument("--spec", type=Path, required=True)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    for attr in ("bases", "overlap", "behavior", "realization", "config", "spec"):
        path = getattr(args, attr, None)
        if path is not None and not Path(path).is_file():
            print(f"tailored-bell: error: no such file: {path}", file=sys.stderr)
            return 2
    try:
        args.func(args)
    except DomainError as exc:
        print(f"tailored-bell: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return 0


def main() -> None:
    sys.exit(run())
