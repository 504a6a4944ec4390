"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 validation error, 3 oracle mismatch.

Every command prints a human-readable table. ``--format csv|json`` prints
machine output instead; ``--output PATH`` also writes the machine output to
PATH. When ``--output`` is absent and ``QCOMPRESS_OUTPUT_DIR`` is set, the
machine output goes to ``$QCOMPRESS_OUTPUT_DIR/<command>.<format>``. Reals
are printed with 12 significant digits, integers in exact decimal.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

from . import __version__
from .entropy_split import entropy_decomposition, orthogonality_trace_check, subadditivity_gap
from .errors import OracleMismatch, ValidationError
from .linalg import PureState, gram_schmidt, von_neumann_entropy
from .pipeline import RunConfig, run_pipeline
from .search import (
    CSV_HEADER,
    SearchRanges,
    exact_solutions,
    rows_to_csv,
    rows_to_json,
    verify_table1,
)
from .sources import (
    SignalEnsemble,
    compose_source,
    load_source,
    parse_source_parts,
    read_source_document,
)
from .typical import (
    BRUTEFORCE_LIMIT,
    TENSOR_LIMIT,
    d_lambda,
    d_lambda_bruteforce,
    fidelity_bruteforce,
    fidelity_majority,
    site_weights,
)

OUTPUT_DIR_ENV = "QCOMPRESS_OUTPUT_DIR"
FIDELITY_TOL = 1e-10


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def fmt_real(x: float) -> str:
    return format(float(x), ".12g")


def _round_reals(obj):
    if isinstance(obj, bool) or isinstance(obj, int):
        return obj
    if isinstance(obj, float):
        return float(fmt_real(obj))
    if isinstance(obj, dict):
        return {k: _round_reals(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_reals(v) for v in obj]
    return obj


def _cell(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return fmt_real(v)
    return str(v)


def _flatten(record: dict, prefix: str = "") -> dict:
    flat = {}
    for key, value in record.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, f"{name}."))
        else:
            flat[name] = value
    return flat


def records_to_csv(records: list[dict]) -> str:
    flat = [_flatten(r) for r in records]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = list(flat[0]) if flat else []
    writer.writerow(header)
    for row in flat:
        writer.writerow([_cell(row[h]) for h in header])
    return buf.getvalue()


def records_to_json(records) -> str:
    return json.dumps(_round_reals(records), indent=2) + "\n"


def table(pairs) -> str:
    width = max(len(k) for k, _ in pairs)
    return "\n".join(f"{k:<{width}}  {_cell(v)}" for k, v in pairs)


def emit(args, command: str, human: str, machine: dict[str, str]) -> None:
    fmt = args.format
    if fmt == "table":
        print(human)
    else:
        sys.stdout.write(machine[fmt])
    target = args.output
    out_fmt = "json" if fmt == "table" else fmt
    if target is None and os.environ.get(OUTPUT_DIR_ENV):
        target = Path(os.environ[OUTPUT_DIR_ENV]) / f"{command}.{out_fmt}"
    if target is not None:
        Path(target).parent.mkdir(parents=True, exist_ok=True)
        Path(target).write_text(machine[out_fmt])


def _single(record: dict) -> dict[str, str]:
    return {"csv": records_to_csv([record]), "json": records_to_json(record)}


# -- commands ---------------------------------------------------------------


def cmd_entropy(args) -> int:
    source = load_source(args.source)
    if isinstance(source, SignalEnsemble):
        s = von_neumann_entropy(source.density())
        record = {"s_total_bits": s}
        emit(args, "entropy", table([("S(rho) [bits]", s)]), _single(record))
        return 0
    rep = entropy_decomposition(source)
    record = {f"{k}_bits" if k != "p1" else k: v for k, v in rep.as_dict().items()}
    human = table(
        [
            ("P1", rep.p1),
            ("S(rho) [bits]", rep.s_total),
            ("H(X) [bits]", rep.h_x),
            ("S(rho1) [bits]", rep.s1),
            ("S(rho2) [bits]", rep.s2),
            ("residual [bits]", rep.residual),
        ]
    )
    emit(args, "entropy", human, _single(record))
    return 0


def cmd_ddim(args) -> int:
    value = d_lambda(args.d, args.N)
    record: dict = {"d": args.d, "N": args.N, "D_Lambda": value}
    if args.oracle:
        if args.d**args.N > BRUTEFORCE_LIMIT:
            raise ValidationError(
                f"d^N = {args.d ** args.N} exceeds the enumeration limit {BRUTEFORCE_LIMIT}"
            )
        oracle = d_lambda_bruteforce(args.d, args.N)
        record["oracle"] = oracle
        record["oracle_match"] = oracle == value
    if args.format == "table":
        human = str(value)
        if args.oracle:
            human += f"\noracle {record['oracle']} ({'match' if record['oracle_match'] else 'MISMATCH'})"
    else:
        human = ""
    emit(args, "ddim", human, _single(record))
    if args.oracle and not record["oracle_match"]:
        raise OracleMismatch(f"formula {value} != enumeration {record['oracle']}")
    return 0


def _ranges(args) -> SearchRanges:
    return SearchRanges(
        d_min=args.d_min, d_max=args.d_max,
        n_min=args.n_min, n_max=args.n_max,
        q_min=args.q_min, q_max=args.q_max,
        m_min=args.m_min, m_max=args.m_max,
    )


def cmd_search(args) -> int:
    rows = exact_solutions(_ranges(args), workers=args.workers)
    human = table([(",".join(CSV_HEADER), "")] + [(",".join(map(str, r.as_tuple())), "") for r in rows])
    human = "\n".join(line.rstrip() for line in human.splitlines())
    emit(args, "search", human, {"csv": rows_to_csv(rows), "json": rows_to_json(rows)})
    return 0


def cmd_verify_table1(args) -> int:
    report = verify_table1()
    emit(args, "verify-table1", report.render(), {
        "csv": rows_to_csv(report.extras),
        "json": records_to_json(report.as_dict()),
    })
    return 0 if report.passed else 2


def _fidelity_record(name: str, ens: SignalEnsemble, n: int, d: int | None, oracle: bool) -> dict:
    d_eff = ens.span_dim if d is None else d
    if not 1 <= d_eff <= ens.span_dim:
        raise ValidationError(f"{name}: d = {d_eff} outside 1..{ens.span_dim}")
    rho = ens.density()
    basis = gram_schmidt([s.amplitudes for s in ens.states])
    record: dict = {"subspace": name, "d": d_eff, "d_star": ens.span_dim, "N": n}
    if d_eff == 1:
        # a single direction: the retained space is one product state
        w = site_weights(rho, [PureState(b) for b in basis], d=1)
        record.update(D_Lambda=1, fidelity=w.q_s**n)
        return record
    w = site_weights(rho, [PureState(b) for b in basis], d=d_eff)
    record.update(D_Lambda=d_lambda(d_eff, n), fidelity=fidelity_majority(w, n))
    if oracle:
        if rho.dim**n > TENSOR_LIMIT:
            raise ValidationError(
                f"{name}: (dim rho)^N = {rho.dim ** n} exceeds the tensor limit {TENSOR_LIMIT}"
            )
        brute = fidelity_bruteforce(rho, [PureState(b) for b in basis], n, d=d_eff)
        record["oracle"] = brute
        record["oracle_match"] = abs(brute - record["fidelity"]) < FIDELITY_TOL
    return record


def cmd_fidelity(args) -> int:
    if args.N < 3:
        raise ValidationError(f"N must be >= 3, got {args.N}")
    source = load_source(args.source)
    if isinstance(source, SignalEnsemble):
        records = [_fidelity_record("ensemble", source, args.N, args.d, args.oracle)]
    else:
        records = [
            _fidelity_record("H1", source.sub1, args.N, None, args.oracle),
            _fidelity_record("H2", source.sub2, args.N, None, args.oracle),
        ]
    human_rows = []
    for r in records:
        human_rows.append((f"{r['subspace']} d={r['d']} N={r['N']} D_Lambda", r["D_Lambda"]))
        human_rows.append((f"{r['subspace']} fidelity", r["fidelity"]))
        if "oracle" in r:
            human_rows.append((f"{r['subspace']} oracle", r["oracle"]))
    emit(args, "fidelity", table(human_rows), {
        "csv": records_to_csv(records),
        "json": records_to_json(records),
    })
    bad = [r["subspace"] for r in records if r.get("oracle_match") is False]
    if bad:
        raise OracleMismatch(f"closed form and tensor oracle disagree for {', '.join(bad)}")
    return 0


def cmd_pipeline(args) -> int:
    config = RunConfig(
        source=args.source, n=args.N, k=args.k, q=args.q, seed=args.seed,
        output=args.output, fmt=args.format,
    )
    rep = run_pipeline(config)
    record = rep.as_dict()
    rows = [
        ("N", rep.n_total),
        ("N1 (realized)", rep.n1),
        ("N2 (realized)", rep.n2),
        ("P1", rep.p1),
        ("H(X) bound [bits/signal]", rep.h_x_bound),
        ("classical rate [bits/signal]", rep.classical_bits_per_signal),
        ("expected rate [bits/signal]", rep.expected_bits_per_signal),
        ("classical payload [bits]", rep.classical_payload_bits),
        ("round trip", rep.round_trip_ok),
        ("S(rho) [bits]", rep.s_rho),
        ("S(rho1) [bits]", rep.s1),
        ("S(rho2) [bits]", rep.s2),
        ("decomposition residual [bits]", rep.residual),
    ]
    for name, acc in (("H1", rep.sub1), ("H2", rep.sub2)):
        rows += [
            (f"{name} mode", acc.mode),
            (f"{name} D (realized N={acc.n_realized})", acc.d_lambda),
            (f"{name} M for q={rep.q}", acc.m),
            (f"{name} M at expected N={acc.n_expected}", acc.m_expected),
        ]
    rows += [
        ("quantum resource [qubits]", rep.quantum_qubits),
        ("total resource [bits+qubits]", rep.total_resource),
        ("S(rho)*N bound [qubits]", rep.entropy_bound),
    ]
    emit(args, "pipeline", table(rows), _single(record))
    return 0


def cmd_gap(args) -> int:
    parts = parse_source_parts(read_source_document(args.source))
    if isinstance(parts, SignalEnsemble):
        raise ValidationError(f"{args.source}: the gap diagnostic needs a two-subspace source")
    p1, ens1, ens2 = parts
    gap = subadditivity_gap(p1, ens1, ens2)
    overlap12, overlap21 = orthogonality_trace_check(ens1.density(), ens2.density())
    try:
        compose_source(p1, ens1, ens2)
        orthogonal = True
    except ValidationError:
        orthogonal = False
    record = {
        "p1": p1,
        "gap_bits": gap,
        "overlap_rho2_on_supp_rho1": overlap12,
        "overlap_rho1_on_supp_rho2": overlap21,
        "orthogonal": orthogonal,
    }
    human = table([
        ("P1", p1),
        ("subadditivity gap [bits]", gap),
        ("||P1 rho2 P1||_1", overlap12),
        ("||P2 rho1 P2||_1", overlap21),
        ("orthogonal subspaces", orthogonal),
    ])
    emit(args, "gap", human, _single(record))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qcompress", description="Quantum noiseless coding toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        p.add_argument("--format", choices=("table", "csv", "json"), default="table")
        p.add_argument("--output", type=Path, default=None, help="also write machine output here")
        return p

    p = add("entropy", cmd_entropy, "entropy decomposition of a source file")
    p.add_argument("source", type=Path)

    p = add("ddim", cmd_ddim, "dimension of the majority-species subspace")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--oracle", action="store_true", help="cross-check by exhaustive enumeration")

    p = add("search", cmd_search, "exact solutions of q^M = D_Lambda")
    defaults = SearchRanges()
    for name in ("d", "n", "q", "m"):
        for end in ("min", "max"):
            flag = f"--{name.upper() if name in 'nm' else name}-{end}"
            p.add_argument(flag, dest=f"{name}_{end}", type=int, default=getattr(defaults, f"{name}_{end}"))
    p.add_argument("--workers", type=int, default=1)

    add("verify-table1", cmd_verify_table1, "check the published exact-solution table")

    p = add("fidelity", cmd_fidelity, "majority-subspace block fidelity for a source")
    p.add_argument("source", type=Path)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--d", type=int, default=None, help="retained dimension (single ensembles only)")
    p.add_argument("--oracle", action="store_true", help="cross-check with explicit tensors")

    p = add("pipeline", cmd_pipeline, "hybrid classical+quantum compression run")
    p.add_argument("source", type=Path)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)

    p = add("gap", cmd_gap, "subadditivity gap for possibly overlapping subspaces")
    p.add_argument("source", type=Path)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return 1
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except OracleMismatch as exc:
        print(f"oracle mismatch: {exc}", file=sys.stderr)
        return 3
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
