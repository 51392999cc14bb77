"""Command-line front end.

Exit codes: 0 pass, 2 property fail, 3 inconclusive, 64 usage or input error,
70 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from contextlib import nullcontext
from fractions import Fraction
from pathlib import Path

import numpy as np

EXIT_OK, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3, 64, 70


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _outdir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise UsageError(f"output directory is not writable: {out}")
    return out


def _load_kernel(path: str):
    from .kernels import load_kernel_config
    return load_kernel_config(path)


def _number(text: str) -> float:
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"not a number: {text!r}") from exc


def _numbers(text: str) -> list:
    return [_number(t) for t in text.split(",") if t.strip()]


def _domain(text: str, n: int) -> list:
    vals = _numbers(text)
    if len(vals) != 2 * n:
        raise UsageError(f"--domain needs {2 * n} numbers for n={n}")
    box = [(vals[2 * i], vals[2 * i + 1]) for i in range(n)]
    if any(b <= a for a, b in box):
        raise UsageError("--domain intervals must be increasing")
    return box


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_hypotheses(args) -> int:
    from .kernels import check_hypotheses
    kernel = _load_kernel(args.config)
    rep = check_hypotheses(kernel)
    out = _outdir(args.out)
    ck = ";".join(_fmt(c) for c in rep.ck)
    _write_csv(out / "hypotheses.csv",
               ["label", "n", "h0_ok", "h1_ok", "h2_ok", "h3_ok", "h4_ok", "mu", "sigma",
                "gamma", "ck", "limit_class", "notes"],
               [[kernel.label, kernel.n, bool(rep.h0_ok), bool(rep.h1_ok), bool(rep.h2_ok),
                 bool(rep.h3_ok), bool(rep.h4_ok), "" if rep.mu is None else rep.mu,
                 "" if rep.sigma is None else rep.sigma, "" if rep.gamma is None else rep.gamma,
                 ck, rep.limit_class or "", " | ".join(rep.notes)]])
    print(f"{kernel.label}: H0-H4 {'pass' if rep.all_ok else 'fail'}")
    return EXIT_OK if rep.all_ok else EXIT_FAIL


def cmd_symbol(args) -> int:
    from .symbol import bound_report, default_k_grid, qhat
    kernel = _load_kernel(args.config)
    if args.samples < 2 or args.kmax <= 1e-2:
        raise UsageError("--samples must be >= 2 and --kmax > 0.01")
    ks = default_k_grid(args.kmax, args.samples)
    primary = "sine" if args.method == "sine" else "bessel"
    q = np.array([qhat(kernel, float(k), primary) for k in ks])
    rep = bound_report(kernel, k_max=args.kmax, samples=args.bound_samples, method=primary)
    header = ["k", "qhat", "lower_envelope", "upper_envelope", "positive"]
    rows = []
    q2 = None
    if args.method == "both":
        q2 = np.array([qhat(kernel, float(k), "sine") for k in ks])
        header += ["qhat_sine", "agreement"]
    for i, k in enumerate(ks):
        if not rep.empty and rep.k_range[0] <= k <= rep.k_range[1]:
            env = float(kernel(np.array([1.0 / k]))[0]) / k**kernel.n
            lo, up = rep.lower_ratio * env, rep.upper_ratio * env
        else:
            lo = up = math.nan
        row = [k, q[i], lo, up, bool(q[i] > 0)]
        if q2 is not None:
            row += [q2[i], abs(q[i] - q2[i]) / abs(q2[i])]
        rows.append(row)
    out = _outdir(args.out)
    _write_csv(out / "symbol.csv", header, rows)
    msg = f"{kernel.label}: {len(ks)} samples, min qhat {q.min():.6g}"
    if q2 is not None:
        msg += f", max route disagreement {max(r[-1] for r in rows):.3g}"
    print(msg)
    return EXIT_OK if np.all(q > 0) else EXIT_FAIL


def _input_field(args, kernel):
    from .fields import GridSpec, make_bump, read_field
    if args.field:
        u = read_field(args.field)
        if u.spec.n != kernel.n:
            raise UsageError("field and kernel dimensions differ")
        return u
    h = _number(args.h)
    R = args.bump_radius
    spec = GridSpec.centered(kernel.n, kernel.delta + R + 4 * h, h)
    return make_bump(spec, [0.0] * kernel.n, R)


def cmd_gradient(args) -> int:
    from .fields import write_csv_slice, write_field, write_vector_field
    from .operators import gradient_direct, gradient_fft
    kernel = _load_kernel(args.config)
    u = _input_field(args, kernel)
    G = gradient_direct(kernel, u) if args.method == "direct" else gradient_fft(kernel, None, u)
    out = _outdir(args.out)
    if not args.field:
        write_field(out / "input.nlgf", u)
    write_vector_field(out / "gradient.nlgf", G)
    write_csv_slice(out / "gradient.csv", G)
    print(f"{kernel.label}: gradient ({args.method}) on {u.spec.shape}")
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    from .fields import lp_norm, read_field, read_vector_field, write_csv_slice, write_field
    from .ftc import build_reconstruction, reconstruct
    kernel = _load_kernel(args.config)
    G = read_vector_field(args.gradient)
    if G.spec.n != kernel.n:
        raise UsageError("gradient and kernel dimensions differ")
    box = _domain(args.domain, kernel.n)
    coords = G.spec.coordinates()
    mask = np.all([(c >= a) & (c <= b) for c, (a, b) in zip(coords, box)], axis=0)
    rk = build_reconstruction(kernel, G.spec)
    u = reconstruct(rk, G, mask)
    out = _outdir(args.out)
    write_field(out / "reconstructed.nlgf", u)
    write_csv_slice(out / "reconstructed.csv", u)
    if args.reference:
        ref = read_field(args.reference)
        err = lp_norm(u - ref, 2) / lp_norm(ref, 2)
        _write_csv(out / "reconstruct_error.csv", ["relative_l2_error"], [[err]])
        print(f"{kernel.label}: relative L2 error {err:.3e}")
        return EXIT_OK if err < 1e-2 else EXIT_FAIL
    print(f"{kernel.label}: reconstructed on {u.spec.shape}")
    return EXIT_OK


def cmd_poincare(args) -> int:
    from .analysis import poincare_estimate
    kernel = _load_kernel(args.config)
    box = _domain(args.domain, kernel.n)
    if args.p != 2.0:
        return _mihlin_surrogate(kernel, args)
    hs = _numbers(args.resolutions)
    if not hs or any(h <= 0 for h in hs):
        raise UsageError("--resolutions must be positive spacings")
    rep = poincare_estimate(kernel, box, hs)
    out = _outdir(args.out)
    _write_csv(out / "poincare.csv", ["h", "sigma_min", "poincare_constant", "converged"],
               zip(rep.resolutions, rep.sigma_min, rep.poincare_constant, rep.converged))
    _write_csv(out / "poincare_trend.csv", ["trend"], [[rep.trend]])
    spread = max(rep.sigma_min) / min(rep.sigma_min)
    print(f"{kernel.label}: sigma_min {', '.join(f'{s:.5g}' for s in rep.sigma_min)}; "
          f"trend {rep.trend:.3f}")
    if not all(rep.converged):
        return EXIT_INCONCLUSIVE
    if len(hs) >= 2 and rep.trend > 0.1:
        return EXIT_FAIL
    if spread < 2 and (len(hs) < 2 or abs(rep.trend) < 0.05):
        return EXIT_OK
    return EXIT_INCONCLUSIVE


def _mihlin_surrogate(kernel, args) -> int:
    # singular values only make sense for p = 2; report the multiplier bounds instead
    from .symbol import bound_report
    if args.p <= 1:
        raise UsageError("--p must exceed 1")
    rep = bound_report(kernel)
    out = _outdir(args.out)
    _write_csv(out / "poincare_mihlin.csv", ["p", "derivative_ratio_1", "derivative_ratio_2"],
               [[args.p, rep.derivative_ratios.get(1, math.nan),
                 rep.derivative_ratios.get(2, math.nan)]])
    finite = not rep.empty and all(math.isfinite(v) for v in rep.derivative_ratios.values())
    print(f"{kernel.label}: p = {args.p}, multiplier derivative ratios "
          f"{rep.derivative_ratios.get(1, math.nan):.4g}, {rep.derivative_ratios.get(2, math.nan):.4g}")
    return EXIT_OK if finite else EXIT_INCONCLUSIVE


def cmd_compare(args) -> int:
    from .symbol import comparison_multiplier, default_k_grid, tabulate_symbol
    k1 = _load_kernel(args.config)
    k2 = _load_kernel(args.config2)
    if k1.n != k2.n:
        raise UsageError("kernels live in different dimensions")
    ks = default_k_grid(args.kmax, args.samples)
    s1 = tabulate_symbol(k1, ks)
    s2 = tabulate_symbol(k2, ks)
    rep = comparison_multiplier(s1, s2)
    out = _outdir(args.out)
    _write_csv(out / "compare.csv", ["k", "qhat1", "qhat2", "m"],
               zip(ks, s1.qhat, s2.qhat, rep.m))
    _write_csv(out / "compare_summary.csv", ["sup_m", "inf_m", "mihlin_1", "mihlin_2"],
               [[rep.sup_m, rep.inf_m, rep.mihlin[1], rep.mihlin[2]]])
    print(f"{k1.label} / {k2.label}: sup m {rep.sup_m:.6g}, inf m {rep.inf_m:.6g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nlgrad", description="Nonlocal gradients with radial kernels on grids.")
    p.add_argument("--seed", type=int, default=0, help="seed recorded for reproducibility")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("config", help="kernel INI file with a [kernel] section")
        sp.add_argument("--out", default=".", help="output directory")
        return sp

    common(sub.add_parser("hypotheses", help="check (H0)-(H4) for a kernel"))

    sp = common(sub.add_parser("symbol", help="tabulate the Fourier symbol"))
    sp.add_argument("--kmax", type=float, default=500.0)
    sp.add_argument("--samples", type=int, default=400)
    sp.add_argument("--bound-samples", type=int, default=24)
    sp.add_argument("--method", choices=("sine", "bessel", "both"), default="bessel")

    sp = common(sub.add_parser("gradient", help="nonlocal gradient of a field"))
    sp.add_argument("--field", help="input field file (default: a centred bump)")
    sp.add_argument("--method", choices=("direct", "fft"), default="fft")
    sp.add_argument("--h", default="1/128", help="spacing for the default bump")
    sp.add_argument("--bump-radius", type=float, default=0.25)

    sp = common(sub.add_parser("reconstruct", help="recover u from its nonlocal gradient"))
    sp.add_argument("--gradient", required=True, help="vector field base path (reads .c0, .c1, ...)")
    sp.add_argument("--domain", required=True, help="box a0,b0[,a1,b1,...] containing supp u")
    sp.add_argument("--reference", help="field to compare against")

    sp = common(sub.add_parser("poincare", help="estimate the Poincare constant"))
    sp.add_argument("--domain", required=True)
    sp.add_argument("--resolutions", default="1/64,1/128,1/256")
    sp.add_argument("--p", type=float, default=2.0)

    sp = common(sub.add_parser("compare", help="comparison multiplier between two kernels"))
    sp.add_argument("config2")
    sp.add_argument("--kmax", type=float, default=1000.0)
    sp.add_argument("--samples", type=int, default=200)
    return p


COMMANDS = {
    "hypotheses": cmd_hypotheses,
    "symbol": cmd_symbol,
    "gradient": cmd_gradient,
    "reconstruct": cmd_reconstruct,
    "poincare": cmd_poincare,
    "compare": cmd_compare,
}


def _workers():
    raw = os.environ.get("NLGRAD_THREADS")
    if not raw:
        return nullcontext()
    try:
        count = max(1, int(raw))
    except ValueError as exc:
        raise UsageError("NLGRAD_THREADS must be an integer") from exc
    from scipy import fft as sfft
    return sfft.set_workers(count)


def main(argv=None) -> int:
    from .fields import FieldFormatError
    from .kernels import KernelConfigError, KernelEvaluationError
    args = build_parser().parse_args(argv)
    try:
        with _workers():
            return COMMANDS[args.command](args)
    except (UsageError, KernelConfigError, FieldFormatError, FileNotFoundError) as exc:
        print(f"nlgrad: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, RuntimeError, ValueError, KernelEvaluationError) as exc:
        print(f"nlgrad: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
