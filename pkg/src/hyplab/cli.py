"""Command-line front end.

Each subcommand writes its table (CSV or JSON) to ``--out`` or stdout.  With
``--out`` a sidecar ``<out>.json`` records the resolved configuration, the
fitted exponents, the tool version and wall time; passing that sidecar back
through ``--config`` replays the run exactly.

Exit status: 0 on success, 2 on bad input, 3 when ``--assert`` fails.
"""
import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import time
import warnings

import numpy as np

from . import __version__, kernels
from . import analysis, regions
from . import operator_model as om
from .blockcore import DomainError, ExponentPair

EXIT_OK, EXIT_DOMAIN, EXIT_ASSERT = 0, 2, 3

THERMOPLATE_NOTES = (
    "plate preset: A is the hinged-plate bilaplacian on (0, pi), mu_k = k^4, pair (alpha, 1/2). "
    "Read literally, the coupling (-Laplacian)^alpha equals A^(alpha/2), i.e. pair (alpha/2, 1/2), "
    "which never lies in S3 for alpha <= 1; the pair (alpha, 1/2) is the reading consistent with "
    "the stated range 3/4 < alpha <= 1."
)

RESULTS = {
    "resolvent": ("s", "norm", "argmax_mu"),
    "decay": ("t", "norm", "argmax_mu"),
    "thermoplate": ("t", "norm", "argmax_mu"),
    "gap": ("mu", "max_re_lambda"),
    "region-map": ("alpha", "beta", "label", "boundary", "near_zero_slope", "decay_slope", "gap", "note"),
}


def thermoplate_preset(alpha, modes):
    """Plate model: pair ``(alpha, 1/2)`` over ``mu_k = k^4``, ``k = 1..modes``."""
    alpha = float(alpha)
    if not 0.75 < alpha <= 1.0:
        raise DomainError(f"alpha={alpha} violates 3/4 < alpha <= 1 (S3 condition for beta = 1/2)")
    if int(modes) != modes or modes < 1:
        raise DomainError(f"modes must be a positive integer, got {modes!r}")
    k = np.arange(1, int(modes) + 1, dtype=float)
    return om.OperatorModel(ExponentPair(alpha, 0.5), om.SpectrumSpec.explicit(k**4))


# --- argument parsing ------------------------------------------------------

def _range(text):
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'lo,hi', got {text!r}") from None
    return [lo, hi]


def _assert_spec(text):
    if text == "auto":
        return text
    try:
        target, tol = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'target,tol', got {text!r}") from None
    return [target, tol]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_DOMAIN, f"{self.prog}: error: {message}\n")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=float, default=0.9)
    common.add_argument("--beta", type=float, default=0.5)
    common.add_argument("--config", help="replay the JSON sidecar of an earlier run")
    common.add_argument("--out", help="output file; a <out>.json sidecar is written next to it")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument(
        "--assert", dest="check", nargs="?", const="auto", type=_assert_spec, default=None,
        metavar="TARGET,TOL",
        help="exit 3 unless the result matches TARGET within TOL (default: the region prediction)",
    )

    spectral = argparse.ArgumentParser(add_help=False)
    spectral.add_argument("--spectrum", default=om.default_spectrum().to_string(),
                          help="power:c,p,N | geometric:lo,hi,N | explicit:m1;m2;... | continuum:lo,hi")

    fitting = argparse.ArgumentParser(add_help=False)
    fitting.add_argument("--points", type=int, default=40)
    fitting.add_argument("--fit", action="store_true", help="fit a log-log slope")
    fitting.add_argument("--window", type=_range, default=None, metavar="LO,HI")

    parser = _Parser(prog="hyplab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"hyplab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("classify", parents=[common], help="region label and predicted decay")
    p = sub.add_parser("resolvent", parents=[common, spectral, fitting], help="resolvent norm sweep")
    p.add_argument("--s", type=_range, default=list(analysis.RESOLVENT_WINDOW), metavar="LO,HI")
    for name in ("decay", "thermoplate"):
        p = sub.add_parser(name, parents=[common] + ([spectral] if name == "decay" else []) + [fitting],
                           help="semigroup norm sweep" if name == "decay" else "hinged plate preset")
        p.add_argument("--t", type=_range, default=[10.0, 3162.2776601683795], metavar="LO,HI")
        p.add_argument("--weight", choices=sorted(kernels.WEIGHTS), default="conditioned")
        if name == "thermoplate":
            p.add_argument("--modes", type=int, default=200)
    p = sub.add_parser("gap", parents=[common, spectral], help="spectral abscissa profile")
    p.add_argument("--samples", type=int, default=200)
    p = sub.add_parser("region-map", parents=[common, spectral], help="metrics over the unit square")
    p.add_argument("--grid", type=int, default=11)
    p.add_argument("--metrics", default="label")
    p.add_argument("--time-budget", type=float, default=10.0)
    sub.add_parser("bct-check", parents=[common, spectral, fitting], help="resolvent/decay exponent cross-check")
    return parser


_NOT_CONFIG = {"config", "out", "format"}


def resolve(argv):
    """Parse ``argv`` into a plain config dict, merging ``--config`` if given."""
    args = build_parser().parse_args(argv)
    config = {k: v for k, v in vars(args).items() if k not in _NOT_CONFIG}
    if args.config:
        try:
            with open(args.config) as fh:
                saved = json.load(fh)["config"]
        except (OSError, ValueError, KeyError) as exc:
            raise DomainError(f"cannot read config {args.config}: {exc}") from None
        if saved.get("command") != args.command:
            raise DomainError(f"config is for {saved.get('command')!r}, not {args.command!r}")
        config.update(saved)
    return config, args.out, args.format


# --- execution -------------------------------------------------------------

def _model(config):
    return om.OperatorModel(ExponentPair(config["alpha"], config["beta"]),
                            om.SpectrumSpec.parse(config["spectrum"]))


def _fit(config, sweep, out):
    if not config.get("fit"):
        return
    fit = analysis.fit_loglog(sweep, config.get("window"))
    out["fit"] = {"slope": fit.slope, "intercept": fit.intercept,
                  "max_rel_residual": fit.max_rel_residual, "window": list(fit.window)}


def _check(config, value, auto):
    """Failure message, or None when the value is within tolerance."""
    target, tol = auto if config["check"] == "auto" else config["check"]
    if value is None or not abs(value - target) <= tol:
        return f"assertion failed: {value} not within {tol} of {target}"
    return None


def _sweep_rows(sweep):
    return [list(r) for r in zip(sweep.axis.tolist(), sweep.values.tolist(), sweep.argmax_mu.tolist())]


def _expected_decay_slope(pair, weight):
    pred = regions.predict(pair)
    if pred.order is None or analysis.decay_weight(regions.classify(pair).label) != weight:
        raise DomainError("no automatic target for this pair and weight; pass --assert TARGET,TOL")
    return (-pred.order, 0.15 if pred.kind == "conditioned_polynomial" else 0.1)


def run(config):
    """Execute a resolved config.

    Returns ``(rows, summary, lines, failure)``: the table rows (None for
    commands without a table), a dict for the sidecar, lines for stdout and
    the ``--assert`` failure message if any.
    """
    cmd = config["command"]
    summary, lines = {}, []
    failure = None
    rows = None
    pair = ExponentPair(config["alpha"], config["beta"])

    if cmd == "classify":
        region = regions.classify(pair)
        pred = regions.predict(pair)
        summary.update(label=region.label, boundary=region.boundary, kind=pred.kind,
                       order=pred.order, notes=pred.notes)
        lines.append(regions.describe(pair))

    elif cmd == "resolvent":
        sweep = analysis.resolvent_sweep(_model(config), *config["s"], config["points"])
        rows = _sweep_rows(sweep)
        _fit(config, sweep, summary)
        slope = summary.get("fit", {}).get("slope")
        if slope is not None:
            lines.append(f"slope {slope:.6g}")
        if config.get("check"):
            failure = _check(config, slope, (-1.0, 0.1))

    elif cmd in ("decay", "thermoplate"):
        if cmd == "thermoplate":
            model = thermoplate_preset(config["alpha"], config["modes"])
            pair = model.pair
            summary["label"] = regions.classify(pair).label
            summary["notes"] = THERMOPLATE_NOTES
            lines += [regions.describe(pair), THERMOPLATE_NOTES]
        else:
            model = _model(config)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", analysis.PreconditionWarning)
            sweep = analysis.decay_sweep(model, *config["t"], config["points"], config["weight"])
        rows = _sweep_rows(sweep)
        if sweep.warning:
            summary["warning"] = sweep.warning
            print(f"warning: {sweep.warning}", file=sys.stderr)
        _fit(config, sweep, summary)
        slope = summary.get("fit", {}).get("slope")
        if slope is not None:
            lines.append(f"slope {slope:.6g}")
        if config.get("check"):
            auto = (-1.0, 0.2) if cmd == "thermoplate" else None
            if config["check"] == "auto" and auto is None:
                auto = _expected_decay_slope(pair, config["weight"])
            failure = _check(config, slope, auto)

    elif cmd == "gap":
        profile = om.gap_profile(_model(config), config["samples"])
        rows = [list(s) for s in profile.samples]
        summary.update(global_gap=profile.global_gap, argmax_mu=profile.argmax_mu)
        lines.append(f"global_gap {profile.global_gap:.6g} at mu={profile.argmax_mu:.6g}")
        if config.get("check"):
            if config["check"] == "auto":
                if not profile.global_gap < 0:
                    failure = f"assertion failed: global gap {profile.global_gap} >= 0"
            else:
                failure = _check(config, profile.global_gap, None)

    elif cmd == "region-map":
        metrics = [m.strip() for m in config["metrics"].split(",") if m.strip()]
        table = analysis.region_map(config["grid"], metrics, om.SpectrumSpec.parse(config["spectrum"]),
                                    config["time_budget"])
        rows = [[r[k] for k in RESULTS[cmd]] for r in table]
        summary["rows"] = len(rows)
        if config.get("check"):
            bad = [r for r in table if r["label"] != regions.classify((r["alpha"], r["beta"])).label]
            if bad:
                failure = f"assertion failed: {len(bad)} labels disagree with classify"

    elif cmd == "bct-check":
        model = _model(config)
        s_win = tuple(config["window"]) if config.get("window") else analysis.RESOLVENT_WINDOW
        report = analysis.bct_crosscheck(model, s_window=s_win, n_points=config["points"])
        summary.update(gamma_resolvent=report.gamma_resolvent, gamma_decay=report.gamma_decay,
                       consistent=report.consistent,
                       residuals={"resolvent": report.resolvent_fit.max_rel_residual,
                                  "decay": report.decay_fit.max_rel_residual})
        lines.append(f"gamma_resolvent {report.gamma_resolvent:.6g}; gamma_decay "
                     f"{report.gamma_decay:.6g}; consistent {str(report.consistent).lower()}")
        if config.get("check") and not report.consistent:
            failure = "assertion failed: exponents inconsistent"
    if failure:
        summary["assertion"] = failure
    return rows, summary, lines, failure


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def render(cmd, rows, fmt):
    header = RESULTS[cmd]
    if fmt == "json":
        recs = [dict(zip(header, (None if isinstance(v, float) and math.isnan(v) else v for v in r)))
                for r in rows]
        return json.dumps(recs, indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def write_atomic(path, text):
    """Write via a temporary file in the same directory, then rename over ``path``."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".hyplab-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def main(argv=None):
    try:
        config, out, fmt = resolve(sys.argv[1:] if argv is None else argv)
        start = time.perf_counter()
        rows, summary, lines, failure = run(config)
        wall = time.perf_counter() - start
        for line in lines:
            print(line)
        if rows is not None:
            table = render(config["command"], rows, fmt)
            if out:
                write_atomic(out, table)
            else:
                sys.stdout.write(table)
        if out:
            sidecar = {"config": config, "results": summary, "version": __version__,
                       "backend": kernels.BACKEND, "wall_time_s": wall}
            write_atomic(out + ".json", json.dumps(sidecar, indent=1, default=_json_default) + "\n")
        if failure:
            print(failure, file=sys.stderr)
            return EXIT_ASSERT
        return EXIT_OK
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")
