"""Command-line front end.

    corrpin curve        --alpha 1 --coeffs 0.7071,0.7071 --beta 0:2:0.02
    corrpin free-energy  --alpha 1 --coeffs 0.8,0.36,0.48 --beta 0,0.5 --h -1:1:0.05
    corrpin validate     [--quick]
    corrpin sample       --alpha 2 --coeffs 0.8,0.36,0.48 --beta 1 --N 100000 --seed 3

Exit codes: 0 ok, 1 validation failure, 2 bad input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .critical import closed_form_h_c_ann, curve_point, h_c_zero, weak_disorder_slope
from .disorder import MovingAverage, correlations
from .errors import InvalidParameter, NumericalFailure, NumericalInconsistency
from .free_energy import f_ann_detail
from .kernels import DEFAULT_N_MAX, TableLaw, ZetaLaw, law_from_dict
from .sampler import sample_tilde
from .transfer import build_qstar, invariant_mu, perron, tilted_kernel
from .validation import run_suite

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3

DEFAULTS = {
    "alpha": 1.0,
    "k_infinity": 0.0,
    "coeffs": "0.8,0.36,0.48",
    "n_max": DEFAULT_N_MAX,
    "mass_table": None,
    "seed": 0,
    "tol": 1e-13,
    "root_tol": 1e-12,
    "out": None,
    "format": "csv",
    "threads": None,
    "beta": "0:2:0.02",
    "h": "-1:1:0.05",
    "N": 10_000,
    "quick": False,
}
_INT_KEYS = {"n_max", "seed", "threads", "N"}
_FLOAT_KEYS = {"alpha", "k_infinity", "tol", "root_tol"}


class BadInput(Exception):
    pass


def parse_grid(text):
    """``start:stop:step`` (inclusive), a comma list, or a single number."""
    text = str(text).strip()
    try:
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            if step <= 0 or stop < start:
                raise BadInput(f"bad grid {text!r}")
            n = int(round((stop - start) / step)) + 1
            if abs(start + (n - 1) * step - stop) > 1e-9 * max(1.0, abs(stop)):
                raise BadInput(f"grid step does not divide the range in {text!r}")
            return list(np.linspace(start, stop, n))
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise BadInput(f"cannot parse grid {text!r}") from exc
    if not vals:
        raise BadInput("empty grid")
    return vals


def read_config_file(path):
    cfg = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise BadInput(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in DEFAULTS:
                raise BadInput(f"{path}:{lineno}: unknown key {key!r}")
            cfg[key] = value
    return cfg


def _coerce(key, value):
    if value is None:
        return None
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
    except ValueError as exc:
        raise BadInput(f"invalid value for {key}: {value!r}") from exc
    if key == "quick" and isinstance(value, str):
        return value.lower() in ("1", "true", "yes")
    return value


def resolve(args):
    """Defaults < config file < command-line flags."""
    cfg = dict(DEFAULTS)
    if args.config:
        cfg.update(read_config_file(args.config))
    for key in DEFAULTS:
        v = getattr(args, key, None)
        if v is not None and v is not False:
            cfg[key] = v
    cfg = {k: _coerce(k, v) for k, v in cfg.items()}
    cfg["command"] = args.command
    if cfg["tol"] <= 0 or cfg["root_tol"] <= 0:
        raise BadInput("tolerances must be positive")
    if cfg["threads"] is None:
        cfg["threads"] = os.cpu_count() or 1
    return cfg


def load_law(cfg):
    if cfg.get("mass_table"):
        path = cfg["mass_table"]
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise BadInput(f"cannot read mass table: {exc}") from exc
        try:
            doc = json.loads(text)
        except json.JSONDecodeError:
            try:
                doc = [float(x) for x in text.replace(",", " ").split()]
            except ValueError as exc:
                raise BadInput(f"cannot parse mass table {path}") from exc
        if isinstance(doc, list):
            return TableLaw(doc, cfg["k_infinity"])
        return law_from_dict(doc)
    return ZetaLaw(cfg["alpha"], cfg["k_infinity"], cfg["n_max"])


def load_profile(cfg):
    ma = MovingAverage.from_string(str(cfg["coeffs"]))
    return ma, correlations(ma)


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % x


_UNUSED = {
    "curve": {"h", "N", "quick", "seed", "root_tol"},
    "free-energy": {"N", "quick", "seed"},
    "validate": {"h", "N", "beta", "root_tol"},
    "sample": {"h", "quick", "root_tol", "threads"},
}


def _shown(cfg):
    skip = _UNUSED.get(cfg["command"], set()) | {"out"}
    return {k: v for k, v in cfg.items() if k not in skip}


def _header(cfg, law):
    shown = _shown(cfg)
    shown["law"] = json.dumps(law.to_dict())
    return [f"# {k}={v}" for k, v in sorted(shown.items())]


def write_table(cfg, law, columns, rows, extra=None):
    buf = io.StringIO()
    if cfg["format"] == "json":
        doc = {"config": _shown(cfg), "law": law.to_dict(), "columns": columns,
               "rows": [dict(zip(columns, r)) for r in rows]}
        if extra:
            doc.update(extra)
        buf.write(json.dumps(doc, indent=2, default=_json_default) + "\n")
    else:
        for line in _header(cfg, law):
            buf.write(line + "\n")
        for k, v in (extra or {}).items():
            buf.write(f"# {k}={_fmt(v) if isinstance(v, float) else v}\n")
        buf.write(",".join(columns) + "\n")
        for r in rows:
            buf.write(",".join(_fmt(x) for x in r) + "\n")
    emit(cfg, buf.getvalue())


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(type(o))


def emit(cfg, text):
    if cfg["out"]:
        with open(cfg["out"], "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_curve(cfg):
    law = load_law(cfg)
    _, rho = load_profile(cfg)
    betas = parse_grid(cfg["beta"])
    if any(b < 0 for b in betas):
        raise BadInput("beta must be nonnegative")
    slope = weak_disorder_slope(law, rho)
    hc0 = h_c_zero(law)

    def row(b):
        cp = curve_point(law, rho, b, cfg["tol"])
        return [b, cp.lam, cp.Lambda, cp.h_c_ann, closed_form_h_c_ann(law, rho, b), hc0 - slope * b * b / 2]

    with ThreadPoolExecutor(max_workers=cfg["threads"]) as pool:
        rows = list(pool.map(row, betas))
    cols = ["beta", "lambda", "Lambda", "h_c_ann", "closed_form", "slope_asymptote_prediction"]
    write_table(cfg, law, cols, rows)
    return EXIT_OK


def cmd_free_energy(cfg):
    law = load_law(cfg)
    _, rho = load_profile(cfg)
    betas = parse_grid(cfg["beta"])
    hs = parse_grid(cfg["h"])
    if any(b < 0 for b in betas):
        raise BadInput("beta must be nonnegative")
    grid = [(b, h) for b in betas for h in hs]

    def row(point):
        b, h = point
        r = f_ann_detail(law, rho, b, h, cfg["root_tol"])
        return [b, h, r.Lambda, r.epsilon, r.f_ann, r.bracket_width]

    with ThreadPoolExecutor(max_workers=cfg["threads"]) as pool:
        rows = list(pool.map(row, grid))
    write_table(cfg, law, ["beta", "h", "Lambda", "epsilon", "f_ann", "bracket_width"], rows)
    return EXIT_OK


def cmd_validate(cfg):
    law = load_law(cfg)
    _, rho = load_profile(cfg)
    checks = run_suite(quick=cfg["quick"], law=law, rho=rho, log=lambda s: print(s, file=sys.stderr))
    ok = all(c.passed for c in checks)
    doc = {
        "config": _shown(cfg),
        "law": law.to_dict(),
        "passed": ok,
        "checks": [c.as_dict() for c in checks],
    }
    emit(cfg, json.dumps(doc, indent=2, default=_json_default) + "\n")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_sample(cfg):
    law = load_law(cfg)
    _, rho = load_profile(cfg)
    betas = parse_grid(cfg["beta"])
    if len(betas) != 1 or betas[0] < 0:
        raise BadInput("sample needs a single nonnegative --beta value")
    beta = betas[0]
    N = cfg["N"]
    if N < 1:
        raise BadInput("--N must be positive")
    m = build_qstar(law, rho, beta)
    sp = perron(m, cfg["tol"])
    path = sample_tilde(law, rho, beta, sp, N, cfg["seed"])
    c = invariant_mu(tilted_kernel(m, sp), law.hat(), cfg["tol"]).mean_spacing
    inv_c = None if math.isinf(c) else 1.0 / c
    stats = {"i_N": path.i_N, "density": path.density(), "inverse_mean_spacing": inv_c}
    if cfg["format"] == "json":
        doc = {"config": _shown(cfg), "law": law.to_dict(), **stats, "contacts": path.contacts.tolist()}
        emit(cfg, json.dumps(doc, indent=2, default=_json_default) + "\n")
    else:
        lines = _header(cfg, law)
        lines.append(f"# i_N={path.i_N}")
        lines.append(f"# density={_fmt(path.density())}")
        if inv_c is None:
            lines.append("# mean_spacing=inf")
        else:
            lines.append(f"# inverse_mean_spacing={_fmt(inv_c)}")
        emit(cfg, "\n".join(lines) + "\n" + path.to_lines())
    return EXIT_OK


COMMANDS = {
    "curve": cmd_curve,
    "free-energy": cmd_free_energy,
    "validate": cmd_validate,
    "sample": cmd_sample,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=float, help="tail exponent of K (zeta family)")
    common.add_argument("--k-infinity", dest="k_infinity", type=float, help="escape mass K(inf)")
    common.add_argument("--coeffs", help="moving-average coefficients a_0,...,a_q")
    common.add_argument("--n-max", dest="n_max", type=int, help="tabulation cutoff of K")
    common.add_argument("--mass-table", dest="mass_table", help="file with K(1..M) (numbers or JSON law)")
    common.add_argument("--seed", type=int)
    common.add_argument("--tol", type=float, help="eigenvalue residual tolerance")
    common.add_argument("--root-tol", dest="root_tol", type=float, help="free-energy bracket width")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--threads", type=int)
    common.add_argument("--config", help="key=value configuration file")
    common.add_argument("--beta", help="beta grid: start:stop:step, list, or value")

    parser = argparse.ArgumentParser(prog="corrpin", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("curve", parents=[common], help="annealed critical curve over a beta grid")
    fe = sub.add_parser("free-energy", parents=[common], help="annealed free energy on a (beta, h) grid")
    fe.add_argument("--h", help="h grid: start:stop:step, list, or value")
    va = sub.add_parser("validate", parents=[common], help="run the verification suite")
    va.add_argument("--quick", action="store_true", default=None, help="fast subset")
    sa = sub.add_parser("sample", parents=[common], help="simulate the tilted renewal process")
    sa.add_argument("--N", type=int, help="horizon")
    return parser


_VALUE_FLAGS = ("--beta", "--h", "--coeffs")


def _glue_values(argv):
    """Attach values such as ``-1:1:0.1`` to their flag so argparse does not read them as options."""
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in _VALUE_FLAGS and i + 1 < len(argv):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
        else:
            out.append(a)
            i += 1
    return out


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_glue_values(argv))
    try:
        cfg = resolve(args)
        return COMMANDS[args.command](cfg)
    except (BadInput, InvalidParameter, OSError) as exc:
        print(f"corrpin: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalFailure, NumericalInconsistency) as exc:
        print(f"corrpin: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
