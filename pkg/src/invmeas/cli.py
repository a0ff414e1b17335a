"""Command-line front end: ``invmeas sample | verify | spectra | fourier``.

Exit codes: 0 success, 1 a verification check failed, 2 bad configuration.
Every JSON document carries ``"schema": 1``; every CSV has a header row.
"""

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import checks, ewens, finfourier, gaussian, haar, poisson, spectra
from .errors import InvMeasError
from .rng import RngHandle

SCHEMA = 1

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(Exception):
    pass


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="64-bit seed (required for statistical commands)")
    common.add_argument("--samples", type=int, default=100_000)
    common.add_argument("--alpha", type=float, default=0.01)
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default=None)

    p = argparse.ArgumentParser(prog="invmeas", description="Samplers and checks for invariant and quasi-invariant measures.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", parents=[common], help="draw samples or derived statistics")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--group", choices=("O", "SO", "U", "Sp"))
    src.add_argument("--ensemble", choices=("GOE", "GUE", "GSE"))
    src.add_argument("--process", choices=("poisson", "ewens", "brownian"))
    s.add_argument("--n", type=int, default=None, help="matrix or permutation size")
    s.add_argument("--count", type=int, default=1)
    s.add_argument("--stat", choices=("eigenphases", "matrix", "eigenvalues", "cycles"), default=None)
    s.add_argument("--mass", type=float, default=1.0, help="total Poisson intensity on the window")
    s.add_argument("--window", type=float, nargs=2, default=(0.0, 1.0), metavar=("A", "B"))
    s.add_argument("--t", type=float, default=1.0, help="Ewens parameter")
    s.add_argument("--levels", type=int, default=10, help="Schauder levels for Brownian paths")

    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("suite")

    h = sub.add_parser("spectra", parents=[common], help="phase histogram with the analytic marginal")
    h.add_argument("--group", choices=("SO", "U", "Sp"), required=True)
    h.add_argument("--n", type=int, required=True)
    h.add_argument("--bins", type=int, default=32)

    f = sub.add_parser("fourier", parents=[common], help="character table and Fourier residuals of a finite group")
    g = f.add_mutually_exclusive_group(required=True)
    g.add_argument("--group-file", help='JSON with {"table": ...} or {"perm_generators": ...}')
    g.add_argument("--named", help="cyclic:N, symmetric:N, alternating:N, dihedral:N or quaternion")
    return p


def _need_seed(args):
    if args.seed is None:
        raise ConfigError("--seed is required for this command")
    if not 0 <= args.seed < 2**64:
        raise ConfigError("--seed must be a 64-bit non-negative integer")
    return RngHandle(args.seed)


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _json_text(doc):
    return json.dumps({"schema": SCHEMA, **doc}, indent=1, sort_keys=False) + "\n"


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------- sample


def cmd_sample(args):
    if args.count < 0:
        raise ConfigError("--count must be non-negative")
    if args.count == 0:
        return EXIT_OK, ""
    rng = _need_seed(args)
    if args.group:
        return EXIT_OK, _sample_group(args, rng)
    if args.ensemble:
        return EXIT_OK, _sample_ensemble(args, rng)
    return EXIT_OK, {"poisson": _sample_poisson, "ewens": _sample_ewens, "brownian": _sample_brownian}[args.process](args, rng)


def _size(args):
    if args.n is None or args.n < 1:
        raise ConfigError("--n must be a positive integer")
    return args.n


def _sample_group(args, rng):
    kind = haar.GroupKind(args.group, _size(args))
    g = haar.sample_haar(kind, rng, args.count)
    stat = args.stat or "eigenphases"
    fmt = args.format or "csv"
    if stat == "eigenphases":
        ph = spectra.eigenphases(g)
        if fmt == "json":
            return _json_text({"group": str(kind), "stat": stat, "phases": ph.tolist()})
        rows = ((s, i, ph[s, i]) for s in range(ph.shape[0]) for i in range(ph.shape[1]))
        return _csv_text(["sample", "index", "phase"], rows)
    if stat == "matrix":
        if fmt == "json":
            return _json_text({"group": str(kind), "stat": stat, "matrices": [[[[z.real, z.imag] for z in row] for row in m] for m in g.astype(complex)]})
        m = g.shape[-1]
        rows = ((s, i, j, g[s, i, j].real, g[s, i, j].imag) for s in range(g.shape[0]) for i in range(m) for j in range(m))
        return _csv_text(["sample", "row", "col", "re", "im"], rows)
    raise ConfigError(f"--stat {stat} is not available for groups")


def _sample_ensemble(args, rng):
    d = {"GOE": 1, "GUE": 2, "GSE": 4}[args.ensemble]
    n = _size(args)
    x = spectra.sample_hermitian(d, n, rng, args.count)
    ev = spectra.hermitian_eigenvalues(d, x)
    if (args.format or "csv") == "json":
        return _json_text({"ensemble": args.ensemble, "n": n, "eigenvalues": ev.tolist()})
    rows = ((s, i, ev[s, i]) for s in range(ev.shape[0]) for i in range(ev.shape[1]))
    return _csv_text(["sample", "index", "eigenvalue"], rows)


def _sample_poisson(args, rng):
    a, b = args.window
    if not b > a or args.mass < 0:
        raise ConfigError("need a window with b > a and a non-negative mass")
    space = poisson.MeasureSpace1D.uniform(a, b, args.mass / (b - a))
    configs = poisson.sample_batch(space, rng, args.count).configurations()
    if (args.format or "json") == "json":
        return _json_text({"process": "poisson", "window": [a, b], "mass": args.mass, "configurations": [c.points.tolist() for c in configs]})
    rows = ((k, x) for k, c in enumerate(configs) for x in c.points)
    return _csv_text(["configuration", "x"], rows)


def _sample_ewens(args, rng):
    n = _size(args)
    if not args.t > 0:
        raise ConfigError("--t must be positive")
    perms = ewens.crp_sample(n, args.t, rng, args.count)
    cycles = ewens.cycle_counts(perms)
    if (args.format or "csv") == "json":
        hist = np.bincount(cycles, minlength=n + 1)
        return _json_text(
            {
                "process": "ewens",
                "n": n,
                "t": args.t,
                "cycle_histogram": {str(k): int(c) for k, c in enumerate(hist) if k > 0},
                "expected_cycles": ewens.expected_cycles(n, args.t),
            }
        )
    rows = ((s, int(cycles[s]), " ".join(str(v + 1) for v in perms[s])) for s in range(perms.shape[0]))
    return _csv_text(["sample", "cycles", "one_line"], rows)


def _sample_brownian(args, rng):
    if not 0 <= args.levels <= 20:
        raise ConfigError("--levels must lie in 0..20")
    grid = np.linspace(0.0, 1.0, 2**args.levels + 1)
    paths = gaussian.brownian_batch(args.levels, args.count, rng, grid) + 0.0
    if (args.format or "csv") == "json":
        return _json_text({"process": "brownian", "levels": args.levels, "t": grid.tolist(), "paths": paths.tolist()})
    if args.count == 1:
        return _csv_text(["t", "B"], zip(grid, paths[0]))
    rows = ((p, t, b) for p in range(paths.shape[0]) for t, b in zip(grid, paths[p]))
    return _csv_text(["path", "t", "B"], rows)


# ---------------------------------------------------------------- verify


def cmd_verify(args):
    if args.suite not in checks.suite_names():
        raise ConfigError(f"unknown suite {args.suite!r}; choose from {', '.join(checks.suite_names())}")
    _need_seed(args)
    if args.samples < 1000:
        raise ConfigError("--samples must be at least 1000")
    if not 0 < args.alpha < 1:
        raise ConfigError("--alpha must lie in (0, 1)")
    rows = checks.run_suite(args.suite, args.seed, args.samples, args.alpha)
    ok = all(r.passed for r in rows)
    if (args.format or "json") == "csv":
        text = _csv_text(
            ["id", "anchor", "measured", "reference", "passed", "detail"],
            ((r.id, r.anchor, json.dumps(_plain(r.measured)), json.dumps(_plain(r.reference)), "PASS" if r.passed else "FAIL", r.detail) for r in rows),
        )
    else:
        text = _json_text(
            {
                "suite": args.suite,
                "seed": args.seed,
                "samples": args.samples,
                "alpha": args.alpha,
                "passed": ok,
                "checks": [r.to_json() for r in rows],
            }
        )
    return (EXIT_OK if ok else EXIT_FAIL), text


def _plain(v):
    return checks.CheckRow("", "", v, None, True).to_json()["measured"]


# ---------------------------------------------------------------- spectra


def cmd_spectra(args):
    rng = _need_seed(args)
    kind = haar.GroupKind(args.group, args.n)
    if args.bins < 1:
        raise ConfigError("--bins must be positive")
    g = haar.sample_haar(kind, rng, args.samples)
    phases = spectra.group_phases(kind, g)
    rows = spectra.histogram_rows(kind, phases, args.bins)
    if (args.format or "csv") == "json":
        keys = ("bin_left", "bin_right", "count", "analytic_density")
        return EXIT_OK, _json_text({"group": str(kind), "samples": args.samples, "bins": [dict(zip(keys, r)) for r in rows]})
    return EXIT_OK, _csv_text(["bin_left", "bin_right", "count", "analytic_density"], rows)


# ---------------------------------------------------------------- fourier


def load_group(path=None, named=None):
    if named is not None:
        return _named_group(named)
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read group file: {exc}") from exc
    if "table" in data:
        return finfourier.FiniteGroup(np.asarray(data["table"], dtype=np.int64), name=data.get("name", path))
    if "perm_generators" in data:
        return finfourier.from_permutations(data["perm_generators"], name=data.get("name", path))
    raise ConfigError('group file needs a "table" or "perm_generators" key')


def _named_group(text):
    name, _, arg = text.partition(":")
    makers = {
        "cyclic": finfourier.cyclic,
        "symmetric": finfourier.symmetric,
        "alternating": finfourier.alternating,
        "dihedral": finfourier.dihedral,
    }
    if name == "quaternion" and not arg:
        return finfourier.quaternion()
    if name not in makers or not arg.isdigit():
        raise ConfigError(f"unknown group {text!r}")
    return makers[name](int(arg))


def cmd_fourier(args):
    group = load_group(args.group_file, args.named)
    seed = 0 if args.seed is None else args.seed
    rep = checks.fourier_report(group, seed % 2**32)
    table = finfourier.character_table(group, rng=seed % 2**32)
    worst = max(rep[k] for k in ("orthogonality", "homomorphism", "convolution", "plancherel", "inversion"))
    ok = worst < 1e-8 and rep["classes"] == rep["irreps"] and rep["sum_dim_sq"] == rep["order"]
    doc = {"group": group.name, "character_table": table.to_json(), "residuals": rep, "passed": ok}
    if args.format == "csv":
        rows = [(k, v) for k, v in rep.items()]
        return (EXIT_OK if ok else EXIT_FAIL), _csv_text(["quantity", "value"], rows)
    return (EXIT_OK if ok else EXIT_FAIL), _json_text(doc)


COMMANDS = {"sample": cmd_sample, "verify": cmd_verify, "spectra": cmd_spectra, "fourier": cmd_fourier}


def main(argv=None):
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    code = EXIT_OK
    try:
        code, text = COMMANDS[args.command](args)
        _emit(text, args.out)
    except BrokenPipeError:
        return code
    except (ConfigError, InvMeasError, ValueError, OSError) as exc:
        print(f"invmeas: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return code


if __name__ == "__main__":
    sys.exit(main())
