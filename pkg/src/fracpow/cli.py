"""``fracpow`` command-line front end.

Every subcommand writes a CSV table (header first, LF endings) to stdout or
``--out``; ``--json`` switches to a JSON array of objects.  Exit codes:
0 ok, 2 validation error, 3 resource limit, 4 regression assertion.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from . import fixtures
from .blackbox import CapabilityError
from .gsearch import FlagOracle, entangled_search, estimate_subspace_dim, magnification_experiment
from .phasest import AncillaConfig
from .power import PowerRequest, gap_check, measure_error
from .qcore import MAX_STATE_QUBITS, ResourceLimitError
from .ratspec import PremiseError, PrimeSpectrumFixture, required_m
from .records import ExperimentRecord, records_to_csv, records_to_json, table_to_json, write_table
from .svg import line_plot

EXIT_OK, EXIT_VALIDATION, EXIT_RESOURCE, EXIT_REGRESSION = 0, 2, 3, 4

MODES = {"standard": "standard", "inverse-free": "inverse_free", "exact-rational": "exact_rational"}


class ValidationError(Exception):
    pass


class RegressionError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ValidationError(message)


# --------------------------------------------------------------------------
# argument parsing


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file whose keys mirror the long flags")
    p.add_argument("--m", type=int, default=None, help="estimation bits")
    p.add_argument("--r", type=int, default=None, help="parallel estimations (odd; default 2m+1)")
    p.add_argument("--t", type=float, default=0.5, help="power to apply")
    p.add_argument("--dim", type=int, default=4, help="fixture dimension (power of two)")
    p.add_argument("--gap", type=float, default=None, help="claimed spectral gap")
    p.add_argument("--spectrum", default="dyadic",
                   help="dyadic | third | qft | prime:b | file:path.json")
    p.add_argument("--samples", type=int, default=16, help="Haar-random inputs per point")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=sorted(MODES), default="standard")
    p.add_argument("--backend", choices=["auto", "dense", "sector"], default="auto")
    p.add_argument("--out", help="write here instead of stdout")
    p.add_argument("--json", action="store_true", help="emit JSON instead of CSV")
    p.add_argument("--svg", help="also write an SVG line plot here")
    p.add_argument("--max-width", type=int, default=MAX_STATE_QUBITS,
                   help="largest dense state width in qubits")
    p.add_argument("--force", action="store_true", help="run despite a failed gap check")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fracpow", description="Fractional powers of black-box unitaries.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("power", help="measure the error of one U^t application")
    _common(p)

    p = sub.add_parser("sweep-m", help="error versus estimation bits")
    _common(p)
    p.add_argument("--m-min", type=int, default=3)
    p.add_argument("--m-max", type=int, default=8)
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)

    p = sub.add_parser("fqft", help="fractional QFT with two ancilla bits")
    _common(p)
    p.add_argument("--n", type=int, default=2, help="QFT qubits")

    p = sub.add_parser("primorial", help="exact powers on a prime-denominator spectrum")
    _common(p)
    p.add_argument("--b", type=int, default=3, help="number of primes")
    p.add_argument("--scale", type=int, default=10 ** 6, help="second t is t * scale")

    p = sub.add_parser("search", help="generalized search from a maximally entangled start")
    _common(p)
    p.add_argument("--d", type=int, default=1, help="flagged eigenvectors")
    p.add_argument("--k", default="0,1,2,3", help="comma-separated iteration counts")
    p.add_argument("--bits", type=int, default=None,
                   help="estimate d with this many phase bits instead of searching")

    p = sub.add_parser("magnify", help="error magnification by repeated square roots")
    _common(p)
    p.add_argument("--k", default="0,1,2,3,4", help="comma-separated iteration counts")
    p.add_argument("--exact", action="store_true", help="use the exact square root")
    p.add_argument("--window", type=float, default=None,
                   help="flag phases within this distance of pi (default pi/2^(m-1))")
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not args.config:
        return args
    try:
        with open(args.config) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read config {args.config}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationError("config must be a JSON object")
    known = {k for k in vars(args) if k not in ("command", "config")}
    keys = {k.replace("-", "_") for k in doc}
    unknown = sorted(keys - known)
    if unknown:
        raise ValidationError(f"unknown config keys: {', '.join(unknown)}")
    # flags given on the command line win over the file
    sub = parser._subparsers._group_actions[0].choices[args.command]
    sub.set_defaults(**{k.replace("-", "_"): v for k, v in doc.items()})
    return parser.parse_args(argv)


def _k_list(text: str) -> list[int]:
    try:
        ks = [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError as exc:
        raise ValidationError(f"bad --k list {text!r}") from exc
    if not ks or min(ks) < 0:
        raise ValidationError("--k needs non-negative integers")
    return ks


# --------------------------------------------------------------------------
# output


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_records(args, records: list[ExperimentRecord]) -> None:
    _emit(args, records_to_json(records) if args.json else records_to_csv(records))


def _emit_table(args, header, rows) -> None:
    if args.json:
        _emit(args, table_to_json(header, rows))
        return
    import io

    buf = io.StringIO()
    write_table(header, rows, buf)
    _emit(args, buf.getvalue())


def _write_svg(path: str, xs, ys, **kw) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(line_plot(xs, ys, **kw))


# --------------------------------------------------------------------------
# shared run setup


def _config(args, m: int | None = None) -> AncillaConfig:
    m = args.m if m is None else m
    if m is None:
        m = 2
    try:
        return AncillaConfig(m, args.r)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc


def _fixture(args, m: int):
    try:
        return fixtures.from_spec(args.spectrum, dim=args.dim, m=m, seed=args.seed)
    except (ValueError, OSError, KeyError) as exc:
        raise ValidationError(str(exc)) from exc


def _check_gap(args, spectral, m: int) -> None:
    claimed = spectral.gap if args.gap is None else args.gap
    rep = gap_check(spectral, claimed, m)
    if not rep.ok and not args.force:
        raise ValidationError("gap check failed: " + "; ".join(rep.messages) + " (use --force)")


def _check_width(args, cfg: AncillaConfig, spectral) -> None:
    if args.backend == "dense" and cfg.dense_width(spectral.qubits) > args.max_width:
        raise ResourceLimitError(
            f"dense run needs {cfg.dense_width(spectral.qubits)} qubits, --max-width is {args.max_width}")


def _request(args, cfg: AncillaConfig, t=None) -> PowerRequest:
    t = args.t if t is None else t
    if not (math.isfinite(t) and t >= 0):
        raise ValidationError(f"--t must be finite and non-negative, got {t}")
    mode = MODES[args.mode]
    if mode == "exact_rational":
        if float(t) != int(t):
            raise ValidationError("exact-rational mode needs an integer --t")
        t = int(t)
    elif float(t).is_integer():
        t = int(t)
    return PowerRequest(t, cfg, mode, backend=args.backend)


def _measure(args, fixture, req: PowerRequest, run_id: str, subcommand: str) -> ExperimentRecord:
    if req.mode == "exact_rational" and not isinstance(fixture, PrimeSpectrumFixture):
        raise ValidationError("exact-rational mode needs a prime:b spectrum")
    if args.samples < 1:
        raise ValidationError("--samples must be at least 1")
    try:
        return measure_error(fixture, req, args.samples, args.seed, run_id=run_id,
                             subcommand=subcommand)
    except PremiseError as exc:
        raise ValidationError(str(exc)) from exc
    except CapabilityError as exc:
        raise ValidationError(str(exc)) from exc


# --------------------------------------------------------------------------
# subcommands


def cmd_power(args) -> int:
    cfg = _config(args)
    fixture = _fixture(args, cfg.m)
    spectral = getattr(fixture, "underlying", fixture)
    _check_gap(args, spectral, cfg.m)
    _check_width(args, cfg, spectral)
    req = _request(args, cfg)
    if req.mode == "inverse_free" and req.t < cfg.grid:
        raise ValidationError(f"inverse-free mode needs --t >= 2^m = {cfg.grid}")
    rec = _measure(args, fixture, req, "power-0", "power")
    _emit_records(args, [rec])
    return EXIT_OK


def _sweep_point(payload):
    args, m = payload
    cfg = _config(args, m)
    fixture = _fixture(args, m)
    spectral = getattr(fixture, "underlying", fixture)
    _check_gap(args, spectral, m)
    _check_width(args, cfg, spectral)
    return _measure(args, fixture, _request(args, cfg), f"sweep-m{m}", "sweep-m")


def cmd_sweep_m(args) -> int:
    if args.m_min > args.m_max or args.m_min < 1:
        raise ValidationError(f"empty m range {args.m_min}..{args.m_max}")
    ms = list(range(args.m_min, args.m_max + 1))
    payloads = [(args, m) for m in ms]
    if args.workers > 1 and len(ms) > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(_sweep_point, payloads))
    else:
        rows = [_sweep_point(p) for p in payloads]
    rows.sort(key=lambda rec: rec.m)
    logs = [math.log2(max(rec.max_err, 1e-16)) for rec in rows]
    if len(ms) > 1:
        slope, intercept = np.polyfit(ms, logs, 1)
    else:
        slope, intercept = 0.0, logs[0]
    first = rows[0]
    footer = replace(first, run_id="fit", m=len(ms), r=0, max_err=float(slope),
                     mean_err=float(intercept), residual_ancilla=0.0, calls_u=0, calls_cu=0,
                     calls_uinv=0, calls_cuinv=0, wall_ms=sum(rec.wall_ms for rec in rows))
    _emit_records(args, rows + [footer])
    if args.svg:
        _write_svg(args.svg, ms, logs, title=f"{args.spectrum}, t = {args.t:g}",
                   xlabel="m", ylabel="log2(max err)")
    return EXIT_OK


def cmd_fqft(args) -> int:
    if not 1 <= args.n <= 10:
        raise ValidationError("--n must lie in 1..10")
    args.spectrum, args.dim = "qft", 1 << args.n
    args.m, args.r = 2, 1
    cfg = _config(args)
    fixture = _fixture(args, 2)
    req = _request(args, cfg)
    if req.mode != "standard":
        raise ValidationError("fqft runs in standard mode")
    rec = _measure(args, fixture, req, "fqft-0", "fqft")
    _emit_records(args, [rec])
    if isinstance(req.t, int):
        # integer powers are direct calls; nothing to assert about the estimator
        return EXIT_OK
    units = rec.calls_cu + rec.calls_cuinv
    msgs = []
    if units != 6:
        msgs.append(f"expected 6 controlled queries, got {units}")
    if rec.max_err > 1e-10:
        msgs.append(f"expected max_err <= 1e-10, got {rec.max_err:.3e}")
    print(f"fqft: controlled queries = {units} "
          f"({rec.calls_cu} + {rec.calls_cuinv}), max_err = {rec.max_err:.3e}", file=sys.stderr)
    if msgs:
        raise RegressionError("; ".join(msgs))
    return EXIT_OK


def cmd_primorial(args) -> int:
    from .ratspec import first_primes

    if args.b < 1:
        raise ValidationError("--b must be at least 1")
    args.spectrum = f"prime:{args.b}"
    args.mode = "exact-rational"
    need = required_m(first_primes(args.b))
    m = need if args.m is None else args.m
    if m < need:
        raise ValidationError(
            f"m = {m} too small: need 2^m > 2 p_b p_(b-1); use m >= {need}")
    if args.dim < args.b:
        dim = 1
        while dim < args.b:
            dim *= 2
        args.dim = dim
    cfg = _config(args, m)
    fixture = _fixture(args, m)
    recs = []
    for i, t in enumerate((args.t, args.t * args.scale)):
        recs.append(_measure(args, fixture, _request(args, cfg, t), f"primorial-{i}", "primorial"))
    _emit_records(args, recs)
    a, b = recs
    keys = ("calls_u", "calls_cu", "calls_uinv", "calls_cuinv")
    print("primorial: t = %s and t = %s use %s and %s" % (
        a.t, b.t, [getattr(a, k) for k in keys], [getattr(b, k) for k in keys]), file=sys.stderr)
    if any(getattr(a, k) != getattr(b, k) for k in keys):
        raise RegressionError("query counts depend on t")
    return EXIT_OK


def cmd_search(args) -> int:
    N = args.dim
    if not 1 <= args.d <= N:
        raise ValidationError(f"--d must lie in 1..{N}")
    fixture = fixtures.dyadic(N, max(1, N.bit_length() - 1), seed=args.seed)
    oracle = FlagOracle.from_fixture(fixture, range(args.d))
    if args.bits is not None:
        est = estimate_subspace_dim(fixture, oracle, args.bits)
        rows = [(e, p) for e, p in sorted(est.distribution.items())]
        _emit_table(args, ("estimate", "probability"), rows)
        print(f"search: estimated d = {est.estimate}", file=sys.stderr)
        return EXIT_OK
    rows = []
    for k in _k_list(args.k):
        run = entangled_search(fixture, oracle, k)
        rows.append((k, run.theta, run.success_prob, run.predicted))
    _emit_table(args, ("k", "theta", "success_prob", "predicted"), rows)
    if args.svg:
        _write_svg(args.svg, [r[0] for r in rows], [r[2] for r in rows],
                   title=f"N = {N}, d = {args.d}", xlabel="k", ylabel="success probability")
    return EXIT_OK


def cmd_magnify(args) -> int:
    m = 5 if args.m is None else args.m
    if not 1 <= m <= 6:
        raise ValidationError("--m must lie in 1..6 for the magnification experiment")
    cfg = _config(args, m)
    res = magnification_experiment(m, _k_list(args.k), cfg=cfg, exact=args.exact,
                                   window=args.window)
    rows = [(row.k, row.error_prob, row.predicted, res.flagged, res.discarded_weight)
            for row in res.rows]
    _emit_table(args, ("k", "error_prob", "predicted", "flagged", "discarded_weight"), rows)
    if args.svg:
        _write_svg(args.svg, [r[0] for r in rows], [r[1] for r in rows],
                   title=f"m = {m}", xlabel="k", ylabel="error probability")
    return EXIT_OK


COMMANDS = {
    "power": cmd_power,
    "sweep-m": cmd_sweep_m,
    "fqft": cmd_fqft,
    "primorial": cmd_primorial,
    "search": cmd_search,
    "magnify": cmd_magnify,
}


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return COMMANDS[args.command](args)
    except SystemExit as exc:          # --help
        return int(exc.code or 0)
    except (ValidationError, ValueError) as exc:
        print(f"fracpow: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ResourceLimitError as exc:
        print(f"fracpow: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except RegressionError as exc:
        print(f"fracpow: regression: {exc}", file=sys.stderr)
        return EXIT_REGRESSION


if __name__ == "__main__":
    sys.exit(main())
