"""Command-line front door: generate, compose, verify, and table emission.

Exit codes: 0 success, 1 verification failure, 2 usage or I/O error.
Identical configurations (including the seed) produce byte-identical
outputs; every file embeds its configuration and the library version.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .algebra import (
    twisted_convolution_coeff,
    twisted_convolution_grid,
    wong_from_json,
    wong_to_json,
)
from .errors import TwcError
from .hermite import (
    HermiteCoeffVector,
    coeff_vector_to_json,
    gauss_hermite_rule,
    hermite_batch,
)
from .oscillators import apply_h_sigma_grid
from .phase_space import hermite_wong_eval
from .regularity import (
    default_planted_rate,
    random_positive_element,
    verify_matrix_report,
    verify_regularity_theorem,
)

FLOAT_FMT = "%.17g"


def _limit_threads():
    n = os.environ.get("TWC_THREADS")
    if not n:
        return
    try:
        limit = max(1, int(n))
    except ValueError:
        return
    try:
        import threadpoolctl

        threadpoolctl.threadpool_limits(limit)
    except ImportError:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, str(limit))


def _config_dict(args, keys):
    return {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _write_csv(path, header, rows, config):
    with open(path, "w") as fh:
        fh.write("# " + json.dumps({"config": config, "version": __version__}, sort_keys=True) + "\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(FLOAT_FMT % v if isinstance(v, float) else str(v) for v in row) + "\n")


def cmd_gen(args) -> int:
    config = _config_dict(args, ["d", "n_max", "rank", "planted_s", "planted_r", "seed", "flavor"])
    planted_r = args.planted_r
    if planted_r is None:
        planted_r = default_planted_rate(args.planted_s, args.n_max, args.N_max)
        config["planted_r"] = planted_r
    C, vectors = random_positive_element(
        args.rank, args.planted_s, planted_r, args.seed, args.d, args.n_max, args.flavor)
    meta = {"config": config, "version": __version__}
    with open(args.out, "w") as fh:
        fh.write(wong_to_json(C, meta))
        fh.write("\n")
    if args.vectors_out:
        entries = []
        for vec in vectors:
            coeffs = vec.reshape((args.n_max + 1,) * args.d)
            f = HermiteCoeffVector(args.d, args.n_max, coeffs)
            entries.append(json.loads(coeff_vector_to_json(f)))
        _write_json(args.vectors_out, {"config": config, "version": __version__,
                                       "vectors": entries})
    return 0


def cmd_compose(args) -> int:
    if len(args.inputs) != 2:
        print("compose needs exactly two --in files", file=sys.stderr)
        return 2
    mats = []
    for path in args.inputs:
        with open(path) as fh:
            mats.append(wong_from_json(fh.read()))
    try:
        out = twisted_convolution_coeff(mats[0], mats[1])
    except ValueError as exc:
        print(f"compose: {exc}", file=sys.stderr)
        return 2
    meta = {"config": {"inputs": list(args.inputs)}, "version": __version__}
    with open(args.out, "w") as fh:
        fh.write(wong_to_json(out, meta))
        fh.write("\n")
    return 0


def cmd_verify(args) -> int:
    config = _config_dict(args, ["d", "n_max", "N_max", "rank", "planted_s", "seed", "tol", "mode"])
    if args.input:
        with open(args.input) as fh:
            C = wong_from_json(fh.read())
        report = verify_matrix_report(C, args.N_max, planted_s=None, seed=args.seed,
                                      s_tol=args.tol, mode=args.mode)
    else:
        report = verify_regularity_theorem(
            args.planted_s, args.rank, args.seed, args.N_max,
            d=args.d, n_max=args.n_max, s_tol=args.tol, mode=args.mode)
    report["config"] = config
    report["version"] = __version__
    growth = report.pop("growth_log_values", None)
    _write_json(args.out, report)
    if growth is not None:
        rows = [(N, float(g)) for N, g in enumerate(growth)]
        _write_csv(os.path.splitext(args.out)[0] + "_growth.csv", ["N", "log_g_N"], rows, config)
    if not report["pass"]:
        print("verify: FAIL " + report.get("reason", "estimates disagree"), file=sys.stderr)
        return 1
    print("verify: PASS")
    return 0


def cmd_tables(args) -> int:
    config = _config_dict(args, ["d", "n_max", "N_max", "rank", "planted_s", "seed", "grid_L", "grid_n"])
    os.makedirs(args.out_dir, exist_ok=True)
    kmax = min(args.n_max, 16)

    rule = gauss_hermite_rule(4 * (kmax + 1))
    hs = hermite_batch(kmax, rule.nodes)
    G = (hs * rule.weights_compensated) @ hs.T
    rows = [(i, j, float(abs(G[i, j] - (1.0 if i == j else 0.0))))
            for i in range(kmax + 1) for j in range(kmax + 1)]
    _write_csv(os.path.join(args.out_dir, "hermite_orthonormality.csv"),
               ["i", "j", "deviation"], rows, config)

    # coefficient product vs grid quadrature, small index range
    oracle_n = 73
    rows = []
    for a2 in range(3):
        for b1 in range(3):
            a = hermite_wong_eval(((0,), (a2,)), args.grid_L, oracle_n)
            b = hermite_wong_eval(((b1,), (1,)), args.grid_L, oracle_n)
            got = twisted_convolution_grid(a, b, strict=args.strict)
            expect = hermite_wong_eval(((0,), (1,)), args.grid_L, oracle_n).values \
                if a2 == b1 else np.zeros_like(got.values)
            gap = float(np.sqrt(np.sum(np.abs(got.values - expect) ** 2) * got.cell))
            rows.append((a2, b1, gap))
    _write_csv(os.path.join(args.out_dir, "twisted_product_gaps.csv"),
               ["alpha2", "beta1", "l2_gap"], rows, config)

    rows = []
    for a1 in range(3):
        for a2 in range(3):
            r = hermite_wong_eval(((a1,), (a2,)), args.grid_L, args.grid_n)
            out = apply_h_sigma_grid(r, strict=args.strict)
            lam = 2 * a1 + 1
            err = float(np.max(np.abs(out.values - lam * r.values)) / np.max(np.abs(lam * r.values)))
            rows.append((a1, a2, err))
    _write_csv(os.path.join(args.out_dir, "oscillator_eigen_residuals.csv"),
               ["alpha1", "alpha2", "rel_error"], rows, config)

    report = verify_regularity_theorem(args.planted_s, args.rank, args.seed,
                                       args.N_max, d=args.d, n_max=args.n_max)
    rows = [(N, float(g)) for N, g in enumerate(report["growth_log_values"])]
    _write_csv(os.path.join(args.out_dir, "growth_sequence.csv"), ["N", "log_g_N"], rows, config)
    rows = [(report["planted_s"], report["fitted_s_growth"], report["fitted_s_decay"],
             report["residuals"]["growth"], report["residuals"]["decay"], int(report["pass"]))]
    _write_csv(os.path.join(args.out_dir, "growth_fit.csv"),
               ["planted_s", "fitted_s_growth", "fitted_s_decay",
                "growth_residual", "decay_residual", "pass"], rows, config)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="twcalc", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--d", type=int, default=1, choices=(1, 2))
        sp.add_argument("--n-max", dest="n_max", type=int, default=48)
        sp.add_argument("--N-max", dest="N_max", type=int, default=40)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--planted-s", dest="planted_s", type=float, default=0.5)
        sp.add_argument("--planted-r", dest="planted_r", type=float, default=None)
        sp.add_argument("--rank", type=int, default=3)
        sp.add_argument("--grid-L", dest="grid_L", type=float, default=8.0)
        sp.add_argument("--grid-n", dest="grid_n", type=int, default=129)
        sp.add_argument("--tol", type=float, default=0.15)
        sp.add_argument("--strict", action="store_true", default=True)
        sp.add_argument("--permissive", dest="strict", action="store_false")
        sp.add_argument("--mode", choices=("origin", "sup"), default="origin")

    g = sub.add_parser("gen", help="generate a random positive element with planted decay")
    common(g)
    g.add_argument("--flavor", choices=("roumieu", "beurling"), default="roumieu")
    g.add_argument("--out", required=True)
    g.add_argument("--vectors-out", dest="vectors_out", default=None)
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("compose", help="twisted convolution of two coefficient files")
    c.add_argument("--in", dest="inputs", action="append", required=True)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_compose)

    v = sub.add_parser("verify", help="run the positivity/regularity verification")
    common(v)
    v.add_argument("--in", dest="input", default=None)
    v.add_argument("--out", required=True)
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("tables", help="emit acceptance-style residual tables as CSV")
    common(t)
    t.add_argument("--out-dir", dest="out_dir", required=True)
    t.set_defaults(func=cmd_tables)
    return p


def main(argv=None) -> int:
    _limit_threads()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"twcalc: {exc}", file=sys.stderr)
        return 2
    except (TwcError, ValueError, json.JSONDecodeError) as exc:
        print(f"twcalc: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
