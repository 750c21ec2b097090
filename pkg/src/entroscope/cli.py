"""Command-line orchestration and report emission.

Five subcommands: ``count`` (word censuses), ``analyze`` (entropy gap with
certificate), ``bound`` (certificate arithmetic alone), ``rho`` (transition
probability decay and the h-transform identity check), ``schreier``
(built-in coset-graph families).  Reports are JSON on stdout (plus an
optional per-n CSV table); identical configs produce byte-identical
reports except for the timestamp field.

Exit codes: 0 success, 2 configuration error, 3 expansion budget exceeded,
4 certification failed (the analysis report is still emitted).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from fractions import Fraction
from typing import Optional

from . import __version__, census, chain, factors, graphs, schreier

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3
EXIT_CERTIFICATION = 4


@dataclass
class JobConfig:
    """Effective configuration after defaulting, echoed in every report."""

    command: str
    graph: Optional[str] = None
    family: Optional[str] = None
    x: Optional[str] = None
    y: Optional[str] = None
    depth: Optional[int] = None
    forbid: tuple = ()
    tail: int = 20
    alpha: Optional[float] = None
    D: Optional[int] = None
    D_max: int = 8
    conn_K: Optional[int] = None
    rho: Optional[float] = None
    R: Optional[int] = None
    stochastic: Optional[bool] = None
    window_radius: Optional[int] = None
    hv_radius: Optional[int] = None
    hv_tol: Optional[float] = None
    hv_scheme: str = "reflecting"
    identity_threshold: Optional[float] = None
    sigma_size: Optional[int] = None
    arithmetic: str = "exact"
    budget: int = graphs.DEFAULT_BUDGET
    threads: int = 1
    csv: Optional[str] = None
    out: Optional[str] = None


def _num(x):
    """JSON-safe number: infinities and NaN become null."""
    if x is None:
        return None
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def _sanitize(obj):
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (float, Fraction)):
        return _num(obj)
    return obj


def _estimate_dict(est: census.EntropyEstimate) -> dict:
    return {
        "value": _num(est.value),
        "method": est.method,
        "period": est.period,
        "finite_language": est.finite_language,
        "diagnostics": _sanitize(est.diagnostics),
    }


def _report(config: JobConfig, results: dict, warnings: list[str]) -> dict:
    return {
        "tool": "entroscope",
        "version": __version__,
        "command": config.command,
        "generated_at": datetime.now(timezone.utc).isoformat(),
        "config": _sanitize(asdict(config)),
        "results": results,
        "warnings": list(warnings),
    }


def _emit(report: dict, config: JobConfig, csv_rows=None, csv_header=None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if config.out:
        with open(config.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    if config.csv and csv_rows is not None:
        with open(config.csv, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(csv_header)
            writer.writerows(csv_rows)


def _load_graph(args) -> tuple[graphs.LabelledGraph, tuple[str, ...]]:
    """Graph plus any forbidden words carried by the source document."""
    if getattr(args, "graph", None):
        doc = graphs.load_graph_json(args.graph)
        return doc.graph, doc.forbidden
    if getattr(args, "family", None):
        spec = schreier.builtin_family(args.family)
        return schreier.schreier_graph(spec), ()
    raise graphs.GraphFormatError("a graph source is required: --graph FILE or --family NAME")


def _parse_vertex(text: str):
    """CLI vertex syntax: int, "(i,j)" integer tuple, else raw string."""
    try:
        return int(text)
    except ValueError:
        pass
    if text.startswith("(") and text.endswith(")"):
        parts = text[1:-1].split(",")
        try:
            return tuple(int(p) for p in parts)
        except ValueError:
            pass
    return text


def _resolve_endpoints(g: graphs.LabelledGraph, args):
    x = _parse_vertex(args.x) if getattr(args, "x", None) else g.roots[0]
    y = _parse_vertex(args.y) if getattr(args, "y", None) else g.roots[0]
    if g.is_finite:
        by_key = {graphs.vertex_key(v): v for v in g.vertex_list}
        for name, v in (("x", x), ("y", y)):
            if v not in g.vertex_list:
                k = graphs.vertex_key(v)
                if k in by_key:
                    v = by_key[k]
                else:
                    raise graphs.GraphFormatError(f"--{name} {k!r} is not a vertex of the graph")
            if name == "x":
                x = v
            else:
                y = v
    return x, y


def _forbidden_from(args, g: graphs.LabelledGraph, doc_words) -> Optional[factors.ForbiddenSet]:
    words = tuple(getattr(args, "forbid", None) or ()) or tuple(doc_words or ())
    if not words:
        return None
    return factors.ForbiddenSet.from_strings(words, g.alphabet)


def _cert_inputs(args) -> chain.CertificateInputs:
    return chain.CertificateInputs(
        alpha=args.alpha,
        D=args.D,
        D_max=args.D_max,
        conn_k=args.conn_K,
        rho=args.rho,
        stochastic=True if args.stochastic else None,
        window_radius=args.window_radius,
    )


def _base_config(args, command: str, **extra) -> JobConfig:
    return JobConfig(
        command=command,
        budget=args.budget,
        threads=args.threads,
        arithmetic=getattr(args, "arithmetic", "exact"),
        csv=getattr(args, "csv", None),
        out=getattr(args, "out", None),
        **extra,
    )


def _census_csv(plain, restricted):
    rows = []
    for n, c in enumerate(plain.counts):
        cf = restricted.counts[n] if restricted is not None else ""
        rows.append((n, c, cf))
    return rows


def cmd_count(args) -> int:
    g, doc_words = _load_graph(args)
    x, y = _resolve_endpoints(g, args)
    forbidden = _forbidden_from(args, g, doc_words)
    config = _base_config(
        args,
        "count",
        graph=getattr(args, "graph", None),
        family=getattr(args, "family", None),
        x=graphs.vertex_key(x),
        y=graphs.vertex_key(y),
        depth=args.depth,
        forbid=forbidden.as_strings() if forbidden else (),
        tail=args.tail,
    )
    plain = census.count_words(g, x, y, args.depth, budget=args.budget)
    restricted = None
    if forbidden is not None:
        restricted = census.count_words(g, x, y, args.depth, forbidden=forbidden, budget=args.budget)
    results = {
        "counts": list(plain.counts),
        "entropy": _estimate_dict(census.entropy_from_counts(plain, tail=args.tail)),
    }
    if restricted is not None:
        results["counts_forbidden"] = list(restricted.counts)
        results["entropy_forbidden"] = _estimate_dict(
            census.entropy_from_counts(restricted, tail=args.tail)
        )
    report = _report(config, results, [])
    _emit(report, config, _census_csv(plain, restricted), ("n", "c_n", "c_n_F"))
    return EXIT_OK


def _gap_results(g, report: census.GapReport) -> dict:
    sigma = len(g.alphabet)
    results = {
        "h": _estimate_dict(report.h),
        "h_forbidden": _estimate_dict(report.h_forbidden),
        "gap": _num(report.gap),
        "counts": list(report.census.counts),
        "counts_forbidden": list(report.census_forbidden.counts),
        "denseness_D": report.denseness_D,
        "certificate_scope": report.certificate_scope,
        "certificate": None,
    }
    if report.certificate is not None:
        cert = report.certificate.to_dict()
        cert["h_bound"] = _num(report.certificate.h_bound(sigma))
        results["certificate"] = cert
    return results


def cmd_analyze(args) -> int:
    g, doc_words = _load_graph(args)
    x, y = _resolve_endpoints(g, args)
    forbidden = _forbidden_from(args, g, doc_words)
    if forbidden is None:
        raise graphs.GraphFormatError("analyze requires forbidden words (--forbid)")
    config = _base_config(
        args,
        "analyze",
        graph=getattr(args, "graph", None),
        family=getattr(args, "family", None),
        x=graphs.vertex_key(x),
        y=graphs.vertex_key(y),
        depth=args.depth,
        forbid=forbidden.as_strings(),
        tail=args.tail,
        alpha=args.alpha,
        D=args.D,
        D_max=args.D_max,
        conn_K=args.conn_K,
        rho=args.rho,
        stochastic=args.stochastic,
        window_radius=args.window_radius,
    )
    report = census.entropy_gap_report(
        g, x, y, forbidden, args.depth,
        tail=args.tail, cert_inputs=_cert_inputs(args), budget=args.budget,
    )
    results = _gap_results(g, report)
    out = _report(config, results, report.warnings)
    _emit(out, config, _census_csv(report.census, report.census_forbidden), ("n", "c_n", "c_n_F"))
    return EXIT_OK if report.certificate is not None else EXIT_CERTIFICATION


def cmd_bound(args) -> int:
    config = _base_config(
        args,
        "bound",
        alpha=args.alpha,
        D=args.D,
        R=args.R,
        conn_K=args.conn_K,
        rho=args.rho if args.rho is not None else 1.0,
        stochastic=args.stochastic,
        sigma_size=args.sigma_size,
    )
    cert = chain.certified_gap_bound(
        alpha=args.alpha,
        D=args.D,
        R=args.R,
        conn_k=args.conn_K,
        rho=args.rho if args.rho is not None else 1.0,
        stochastic=args.stochastic,
    )
    results = cert.to_dict()
    results["h_bound"] = (
        _num(cert.h_bound(args.sigma_size)) if args.sigma_size else None
    )
    window_check = None
    if args.graph and args.forbid:
        doc = graphs.load_graph_json(args.graph)
        g = doc.graph
        forbidden = factors.ForbiddenSet.from_strings(args.forbid, g.alphabet)
        w = graphs.full_window(g, budget=args.budget)
        ch = chain.uniform_weights(g, exact=(args.arithmetic == "exact"))
        check = chain.k_step_restricted_rowsum_check(
            ch, forbidden, D=args.D, k=cert.k, w=w, budget=args.budget
        )
        window_check = {
            "ok": check.ok,
            "threshold": _num(check.threshold),
            "max_row_sum": _num(check.max_row_sum()),
            "violations": [
                [graphs.vertex_key(v), _num(s)] for v, s in check.violations
            ],
        }
    results["rowsum_check"] = window_check
    report = _report(config, results, [])
    _emit(report, config)
    if window_check is not None and not window_check["ok"]:
        return EXIT_CERTIFICATION
    return EXIT_OK


def _rho_csv(table, table_f):
    rows = []
    for n, p in enumerate(table):
        pf = float(table_f[n]) if table_f is not None else ""
        rows.append((n, float(p), pf))
    return rows


def cmd_rho(args) -> int:
    g, doc_words = _load_graph(args)
    x, y = _resolve_endpoints(g, args)
    forbidden = _forbidden_from(args, g, doc_words)
    exact = args.arithmetic == "exact"
    ch = chain.uniform_weights(g, exact=exact)
    config = _base_config(
        args,
        "rho",
        graph=getattr(args, "graph", None),
        family=getattr(args, "family", None),
        x=graphs.vertex_key(x),
        y=graphs.vertex_key(y),
        depth=args.depth,
        forbid=forbidden.as_strings() if forbidden else (),
        tail=args.tail,
        conn_K=args.conn_K,
        hv_radius=args.hv_radius,
        hv_tol=args.hv_tol,
        hv_scheme=args.hv_scheme,
        identity_threshold=args.identity_threshold,
    )
    warnings: list[str] = []
    est = chain.rho_estimate(ch, x, y, args.depth, tail=args.tail, budget=args.budget)
    dictionary = census.EntropyEstimate(
        value=chain.entropy_from_rho(est.value, len(g.alphabet)),
        method="rho-dictionary",
        period=est.period,
        diagnostics={"rho": est.value, "residual": est.residual},
    )
    results = {
        "rho": _num(est.value),
        "period": est.period,
        "residual": _num(est.residual),
        "converged": est.converged,
        "entropy_dictionary": _estimate_dict(dictionary),
    }
    table_f = None
    if forbidden is not None:
        est_f = chain.rho_estimate(
            ch, x, y, args.depth, forbidden=forbidden, tail=args.tail, budget=args.budget
        )
        table_f = est_f.table
        results["rho_forbidden"] = _num(est_f.value)
        results["period_forbidden"] = est_f.period
        results["residual_forbidden"] = _num(est_f.residual)
    if not est.converged:
        warnings.append("rho estimate did not stabilize (large tail residual)")
    if args.transform_check:
        if forbidden is None:
            raise graphs.GraphFormatError("--transform-check requires --forbid")
        # the transformed DP needs h wherever mass can reach within N steps
        radius = args.hv_radius if args.hv_radius is not None else args.depth + 2
        tol = args.hv_tol if args.hv_tol is not None else (1e-8 if g.is_finite else 1e-3)
        hv = chain.harmonic_vector(
            ch, x, radius, tol=tol, scheme=args.hv_scheme, budget=args.budget
        )
        identity = chain.transform_identity_check(
            ch, hv, forbidden, x, y, args.depth,
            conn_k=args.conn_K, threshold=args.identity_threshold,
            tail=args.tail, budget=args.budget,
        )
        results["harmonic"] = {
            "rho_hat": _num(hv.rho_hat),
            "residual": _num(hv.residual),
            "radius": radius,
            "scheme": hv.scheme,
            "diagnostics": _sanitize(hv.diagnostics),
        }
        results["transform_identity"] = {
            "lhs": _num(identity.lhs),
            "rhs": _num(identity.rhs),
            "difference": _num(identity.difference),
            "threshold": identity.threshold,
            "ok": identity.ok,
        }
        if not identity.ok:
            warnings.append("h-transform identity check exceeded its threshold")
    report = _report(config, results, warnings)
    _emit(report, config, _rho_csv(est.table, table_f), ("n", "p_n", "p_n_F"))
    return EXIT_OK


def cmd_schreier(args) -> int:
    if args.x or args.y:
        raise graphs.GraphFormatError(
            "schreier analyzes the loop language at the root coset; use"
            " `analyze --family` for other vertex pairs"
        )
    spec = schreier.builtin_family(args.family)
    g = schreier.schreier_graph(spec)
    forbidden = _forbidden_from(args, g, ())
    if forbidden is None:
        raise graphs.GraphFormatError("schreier requires forbidden words (--forbid)")
    config = _base_config(
        args,
        "schreier",
        family=args.family,
        x=graphs.vertex_key(spec.root),
        y=graphs.vertex_key(spec.root),
        depth=args.depth,
        forbid=forbidden.as_strings(),
        tail=args.tail,
        alpha=args.alpha,
        D=args.D,
        D_max=args.D_max,
        conn_K=args.conn_K,
        rho=args.rho,
        stochastic=args.stochastic,
        window_radius=args.window_radius,
    )
    report = schreier.growth_sensitivity_report(
        spec, forbidden, args.depth,
        tail=args.tail, cert_inputs=_cert_inputs(args), budget=args.budget,
    )
    results = _gap_results(g, report)
    results["family"] = args.family
    results["declared"] = {
        "conn_K": spec.declared.conn_k,
        "rho": spec.declared.rho,
        "homogeneous": spec.declared.homogeneous,
    }
    out = _report(config, results, report.warnings)
    _emit(out, config, _census_csv(report.census, report.census_forbidden), ("n", "c_n", "c_n_F"))
    return EXIT_OK if report.certificate is not None else EXIT_CERTIFICATION


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--budget", type=int,
                   default=int(os.environ.get("ENTROSCOPE_BUDGET", graphs.DEFAULT_BUDGET)),
                   help="expansion budget in vertices per ball (env ENTROSCOPE_BUDGET)")
    p.add_argument("--threads", type=int, default=1,
                   help="upper bound on internal parallelism (current build is sequential)")
    p.add_argument("--out", help="also write the JSON report to this file")


def _add_source(p: argparse.ArgumentParser, family_only: bool = False) -> None:
    if not family_only:
        p.add_argument("--graph", help="finite graph JSON document")
    p.add_argument("--family", choices=schreier.family_names(),
                   help="built-in infinite family")


def _add_analysis(p: argparse.ArgumentParser) -> None:
    p.add_argument("--x", help="start vertex (default: first root)")
    p.add_argument("--y", help="end vertex (default: first root)")
    p.add_argument("--depth", type=int, required=True, help="census horizon N")
    p.add_argument("--forbid", action="append", default=None,
                   help="forbidden word (repeatable; per-character over 1-char alphabets)")
    p.add_argument("--tail", type=int, default=20, help="tail points used by the slope fit")
    p.add_argument("--arithmetic", choices=("exact", "float"), default="exact")
    p.add_argument("--csv", help="write the per-n table to this CSV file")


def _add_certificate(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, default=None,
                   help="edge probability floor (default 1/|alphabet|)")
    p.add_argument("--D", type=int, default=None, help="declared denseness constant")
    p.add_argument("--d-max", dest="D_max", type=int, default=8,
                   help="search bound for the denseness constant")
    p.add_argument("--conn-K", dest="conn_K", type=int, default=None,
                   help="declared uniform-connectedness constant")
    p.add_argument("--rho", type=float, default=None, help="declared spectral radius")
    p.add_argument("--stochastic", action="store_true",
                   help="force the stochastic fast path (rows sum to 1, rho = 1)")
    p.add_argument("--window-radius", type=int, default=None,
                   help="window radius for measured certificate constants")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entroscope",
        description="entropy of automaton languages and certified drops under forbidden factors",
    )
    parser.add_argument("--version", action="version", version=f"entroscope {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("count", help="word census between two vertices")
    _add_source(p)
    _add_analysis(p)
    _add_common(p)
    p.set_defaults(handler=cmd_count)

    p = sub.add_parser("analyze", help="entropy gap under forbidden factors, with certificate")
    _add_source(p)
    _add_analysis(p)
    _add_certificate(p)
    _add_common(p)
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("bound", help="certified gap bound from explicit constants")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--D", type=int, required=True)
    p.add_argument("--R", type=int, required=True, help="max forbidden word length")
    p.add_argument("--conn-K", dest="conn_K", type=int, default=None)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--stochastic", action="store_true")
    p.add_argument("--sigma-size", type=int, default=None,
                   help="alphabet size for the entropy form of the bound")
    p.add_argument("--graph", help="optional finite graph for the k-step row-sum check")
    p.add_argument("--forbid", action="append", default=None)
    p.add_argument("--arithmetic", choices=("exact", "float"), default="exact")
    _add_common(p)
    p.set_defaults(handler=cmd_bound)

    p = sub.add_parser("rho", help="n-step probability decay and h-transform identity")
    _add_source(p)
    _add_analysis(p)
    p.add_argument("--conn-K", dest="conn_K", type=int, default=None)
    p.add_argument("--transform-check", action="store_true",
                   help="fit a harmonic vector and check the h-transform identity")
    p.add_argument("--hv-radius", type=int, default=None, help="harmonic window radius")
    p.add_argument("--hv-tol", type=float, default=None,
                   help="harmonic residual tolerance (default 1e-8 finite, 1e-3 windowed)")
    p.add_argument("--hv-scheme", choices=("reflecting", "absorbing"), default="reflecting")
    p.add_argument("--identity-threshold", type=float, default=0.05,
                   help="acceptance threshold for the h-transform identity check")
    _add_common(p)
    p.set_defaults(handler=cmd_rho)

    p = sub.add_parser("schreier", help="growth sensitivity of a built-in coset family")
    p.add_argument("--family", choices=schreier.family_names(), required=True)
    _add_analysis(p)
    _add_certificate(p)
    _add_common(p)
    p.set_defaults(handler=cmd_schreier)

    return parser


_CONFIG_ERRORS = (
    graphs.GraphFormatError,
    factors.ForbiddenWordError,
    census.NondeterministicWindow,
    census.NotStronglyConnected,
    chain.ChainError,
    FileNotFoundError,
    json.JSONDecodeError,
    KeyError,
    ValueError,
)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except graphs.ExpansionBudgetExceeded as exc:
        print(json.dumps({"error": {"type": "budget-exceeded", "message": str(exc)}},
                         indent=2, sort_keys=True))
        return EXIT_BUDGET
    except _CONFIG_ERRORS as exc:
        print(json.dumps(
            {"error": {"type": type(exc).__name__, "message": str(exc)}},
            indent=2, sort_keys=True,
        ))
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
