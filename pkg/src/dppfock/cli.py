"""Command-line entry point: verification suites, determinants and sampling.

Exit status is 0 when every residual is within tolerance, 1 when a suite
fails and 2 for malformed input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from contextlib import contextmanager
from typing import Any, Callable

import numpy as np

from . import dpp_finite, embedding, fock, fredholm, kernels, sampler
from .errors import DPPFockError
from .generators import case_rng, random_kernel, random_matrix, random_projector, random_symbol
from .linalg import det, rel_diff

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
Z_BAND = 4.0


class ConfigError(ValueError):
    """Malformed command-line input; the message names the offending field."""


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def dumps17(obj: Any) -> str:
    """JSON with every float written to 17 significant digits."""
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj) if math.isfinite(obj) else json.dumps(str(float(obj)))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps17(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(dumps17(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _load_json(text: str, field: str) -> Any:
    if text is None:
        raise ConfigError(f"{field}: missing")
    candidate = text[1:] if text.startswith("@") else text
    if text.startswith("@") or (not text.lstrip().startswith(("{", "[")) and os.path.exists(candidate)):
        try:
            with open(candidate) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"{field}: cannot read {candidate}: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{field}: invalid JSON ({exc.msg})") from None


def _only_keys(obj: dict, allowed: set, field: str) -> None:
    if not isinstance(obj, dict):
        raise ConfigError(f"{field}: expected a JSON object")
    extra = set(obj) - allowed
    if extra:
        raise ConfigError(f"{field}: unknown field(s) {sorted(extra)}")


def _real_matrix(rows, field: str) -> np.ndarray:
    try:
        m = np.array(rows, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{field}: must be a rectangular array of numbers") from None
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ConfigError(f"{field}: must be a square matrix")
    return m


def parse_kernel(desc: Any) -> tuple[str, Any]:
    """Kernel descriptor -> ``("matrix", DiscreteKernel)`` or ``("function", callable)``."""
    if not isinstance(desc, dict) or "type" not in desc:
        raise ConfigError("kernel.type: missing")
    kind = desc["type"]
    if kind == "matrix":
        _only_keys(desc, {"type", "re", "im"}, "kernel")
        if "re" not in desc:
            raise ConfigError("kernel.re: missing")
        m = _real_matrix(desc["re"], "kernel.re").astype(complex)
        if "im" in desc:
            im = _real_matrix(desc["im"], "kernel.im")
            if im.shape != m.shape:
                raise ConfigError("kernel.im: shape differs from kernel.re")
            m = m + 1j * im
        try:
            return "matrix", kernels.make_discrete_kernel(m)
        except DPPFockError as exc:
            raise ConfigError(f"kernel.re: {exc}") from None
    if kind == "sine":
        _only_keys(desc, {"type"}, "kernel")
        return "function", kernels.sine_kernel
    if kind == "rank_one_uniform":
        _only_keys(desc, {"type", "lo", "hi"}, "kernel")
        try:
            return "function", kernels.rank_one_uniform(float(desc.get("lo", 0.0)), float(desc.get("hi", 1.0)))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"kernel.lo/hi: {exc}") from None
    raise ConfigError(f"kernel.type: unknown kernel type {kind!r}")


def parse_quadrature(desc: Any) -> kernels.QuadratureRule:
    _only_keys(desc, {"n", "lo", "hi"}, "quadrature")
    for key in ("n", "lo", "hi"):
        if key not in desc:
            raise ConfigError(f"quadrature.{key}: missing")
    if not isinstance(desc["n"], int) or desc["n"] < 1:
        raise ConfigError("quadrature.n: must be a positive integer")
    try:
        return kernels.gauss_legendre(desc["n"], float(desc["lo"]), float(desc["hi"]))
    except (DPPFockError, TypeError, ValueError) as exc:
        raise ConfigError(f"quadrature.lo/hi: {exc}") from None


def parse_symbol(desc: Any) -> fredholm.PiecewiseSymbol:
    """``{"breakpoints": [...], "re": [...], "im": [...]}`` with ``im`` optional."""
    _only_keys(desc, {"breakpoints", "re", "im"}, "symbol")
    for key in ("breakpoints", "re"):
        if key not in desc:
            raise ConfigError(f"symbol.{key}: missing")
    try:
        b = [float(x) for x in desc["breakpoints"]]
        re = [float(x) for x in desc["re"]]
        im = [float(x) for x in desc.get("im", [0.0] * len(re))]
    except (TypeError, ValueError):
        raise ConfigError("symbol: breakpoints/re/im must be numeric arrays") from None
    if len(im) != len(re):
        raise ConfigError("symbol.im: length differs from symbol.re")
    if len(re) != len(b) - 1:
        raise ConfigError("symbol.re: need one value per piece (len(breakpoints) - 1)")
    try:
        return fredholm.PiecewiseSymbol(tuple(b), tuple(complex(r, i) for r, i in zip(re, im)))
    except DPPFockError as exc:
        raise ConfigError(f"symbol.breakpoints: {exc}") from None


@contextmanager
def _output(path: str | None):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _config_of(args: argparse.Namespace) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    cfg["threads"] = sampler.resolve_threads(args.threads)
    return cfg


def _write_csv(args, header: list[str], rows: list[list]) -> None:
    buf = io.StringIO()
    buf.write("# config: " + dumps17(_config_of(args)) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    with _output(args.out) as fh:
        fh.write(buf.getvalue())


def _require_positive(args, *names: str) -> None:
    for name in names:
        v = getattr(args, name)
        if v is None or v < 1:
            raise ConfigError(f"--{name.replace('_', '-')}: must be a positive integer")


def cmd_verify_finite(args) -> int:
    _require_positive(args, "n", "cases")
    if args.n > dpp_finite.MAX_ENUMERATION:
        raise ConfigError(f"--n: enumeration limited to n <= {dpp_finite.MAX_ENUMERATION}")
    rows, worst = [], 0.0
    for case in range(args.cases):
        rng = case_rng(args.seed, case)
        dpp = dpp_finite.FiniteDPP(random_kernel(args.n, rng))
        a = random_symbol(args.n, rng)
        b = random_symbol(args.n, rng)
        e_res = rel_diff(dpp_finite.expectation_brute(dpp, a), dpp_finite.expectation_det(dpp, a))
        g_res = rel_diff(dpp_finite.gram_brute(dpp, a, b), dpp_finite.gram_det(dpp, a, b))
        p = dpp_finite.all_point_probabilities(dpp)
        p_res = max(abs(p.sum() - 1.0), max(0.0, -p.min()))
        res = max(e_res, g_res, p_res)
        worst = max(worst, res)
        rows.append([case, args.n, e_res, g_res, p_res, res])
    _write_csv(args, ["case", "n", "expectation_residual", "gram_residual", "probability_residual", "max_residual"], rows)
    return EXIT_OK if worst <= args.tol else EXIT_FAIL


def cmd_verify_fock(args) -> int:
    _require_positive(args, "n", "cases")
    if args.m is not None and not 0 <= args.m <= args.n:
        raise ConfigError("--m: must satisfy 0 <= m <= n")
    rows, worst = [], 0.0
    for case in range(args.cases):
        rng = case_rng(args.seed, case)
        m = args.m if args.m is not None else int(rng.integers(0, args.n + 1))
        split = fock.SplitSpace.last(args.n, m)
        g = fock.BlockOperator(random_matrix(args.n, rng), split)
        h = fock.BlockOperator(random_matrix(args.n, rng), split)
        brute = fock.fock_inner(fock.coherent_state(g), fock.coherent_state(h))
        blocks = det(g.c @ h.c.conj().T + g.d @ h.d.conj().T)
        proj = det(np.eye(args.n) + split.projector @ (g.matrix @ h.matrix.conj().T - np.eye(args.n)))
        cb = max(rel_diff(brute, blocks), rel_diff(proj, blocks))
        formula = rel_diff(proj, blocks)
        rep = fock.representation_residual(g.matrix, h.matrix, m) if args.n <= fock.DENSE_LIMIT else float("nan")
        res = max(cb, formula, 0.0 if math.isnan(rep) else rep)
        worst = max(worst, res)
        rows.append([case, m, cb, formula, rep, res])
    _write_csv(args, ["case", "m", "cauchy_binet_residual", "formula_residual", "representation_residual", "max_residual"], rows)
    return EXIT_OK if worst <= args.tol else EXIT_FAIL


def cmd_verify_embedding(args) -> int:
    _require_positive(args, "n", "cases")
    rows, worst = [], 0.0
    for case in range(args.cases):
        rng = case_rng(args.seed, case)
        a = None
        if args.mode == "projector":
            rank = int(rng.integers(0, args.n + 1))
            kern = random_projector(args.n, rank, rng)
            a, b = random_symbol(args.n, rng), random_symbol(args.n, rng)
            check = embedding.projector_embedding_check(kern, a, b)
            extra = float(rank)
        else:
            kern = random_kernel(args.n, rng)
            a, b = random_symbol(args.n, rng), random_symbol(args.n, rng)
            check = embedding.general_embedding_check(kern, a, b)
            extra = max(
                embedding.doubling_projector(kern).idempotency_residual(),
                embedding.block_conjugation_residual(kern, a),
            )
        res = max(check.residual, extra if args.mode == "general" else 0.0)
        worst = max(worst, res)
        rows.append([case, args.mode, check.residual, extra, res])
    label = "rank" if args.mode == "projector" else "structure_residual"
    _write_csv(args, ["case", "mode", "identity_residual", label, "residual"], rows)
    return EXIT_OK if worst <= args.tol else EXIT_FAIL


def _emit_json(args, payload: dict) -> None:
    payload = dict(payload)
    payload["config"] = _config_of(args)
    with _output(args.out) as fh:
        fh.write(dumps17(payload) + "\n")


def cmd_fredholm(args) -> int:
    _require_positive(args, "n")
    kind, kern = parse_kernel(_load_json(args.kernel, "kernel"))
    if kind != "function":
        raise ConfigError("kernel.type: fredholm needs a continuous kernel (sine or rank_one_uniform)")
    sym = parse_symbol(_load_json(args.symbol, "symbol"))
    value, delta = fredholm.fredholm_det_with_delta(kern, sym, args.n)
    _emit_json(args, {"value_re": value.real, "value_im": value.imag, "self_convergence_delta": delta})
    return EXIT_OK if delta <= args.tol else EXIT_FAIL


def cmd_gap(args) -> int:
    _require_positive(args, "n")
    desc = {"type": args.kernel} if not args.kernel.lstrip().startswith("{") else _load_json(args.kernel, "kernel")
    kind, kern = parse_kernel(desc)
    if kind != "function":
        raise ConfigError("kernel.type: gap needs a continuous kernel")
    if not args.hi >= args.lo:
        raise ConfigError("--hi: must be >= --lo")
    p = fredholm.gap_probability(kern, (args.lo, args.hi), args.n)
    delta = abs(p - fredholm.gap_probability(kern, (args.lo, args.hi), 2 * args.n))
    _emit_json(args, {"probability": p, "delta": delta})
    ok = delta <= args.tol and -1e-8 <= p <= 1 + 1e-8
    return EXIT_OK if ok else EXIT_FAIL


def cmd_sample(args) -> int:
    _require_positive(args, "trials")
    kind, kern = parse_kernel(_load_json(args.kernel, "kernel"))
    if kind == "function":
        if args.quadrature is None:
            raise ConfigError("quadrature: required for continuous kernels")
        try:
            kern = kernels.discretize(kern, parse_quadrature(_load_json(args.quadrature, "quadrature")))
        except DPPFockError as exc:
            raise ConfigError(f"quadrature.n: {exc}") from None
    dpp = dpp_finite.FiniteDPP(kern)
    batch = sampler.sample_batch(dpp, args.trials, args.seed, args.threads)
    if args.audit:
        rep = sampler.inclusion_audit(dpp, args.trials, args.seed, batch=batch)
        rows = [[j, rep.frequency[j], rep.expected[j], rep.stderr[j], rep.z[j]] for j in range(dpp.n)]
        _write_csv(args, ["point", "frequency", "expected", "stderr", "z"], rows)
        return EXIT_OK if rep.max_abs_z() <= Z_BAND else EXIT_FAIL
    lines = [dumps17({"config": _config_of(args), "kernel_fingerprint": batch.kernel_fingerprint})]
    lines += [dumps17(list(c)) for c in batch.configurations]
    with _output(args.out) as fh:
        fh.write("\n".join(lines) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed (unsigned 64-bit)")
    common.add_argument("--out", default="-", help="output path, '-' for stdout")
    common.add_argument("--threads", type=int, default=None, help="worker threads (env DPPFOCK_THREADS)")

    def tol(p, default):
        p.add_argument("--tol", type=float, default=default)

    parser = argparse.ArgumentParser(prog="dppfock", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-finite", parents=[common], help="brute vs determinant identities on random kernels")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--cases", type=int, default=100)
    tol(p, 1e-9)
    p.set_defaults(func=cmd_verify_finite)

    p = sub.add_parser("verify-fock", parents=[common], help="Cauchy-Binet and representation checks")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=None, help="degree; random per case when omitted")
    p.add_argument("--cases", type=int, default=100)
    tol(p, 1e-10)
    p.set_defaults(func=cmd_verify_fock)

    p = sub.add_parser("verify-embedding", parents=[common], help="isometry checks, projector or doubled")
    p.add_argument("--mode", choices=["projector", "general"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--cases", type=int, default=100)
    tol(p, 1e-9)
    p.set_defaults(func=cmd_verify_embedding)

    p = sub.add_parser("fredholm", parents=[common], help="det(1 + K(A - 1)) by quadrature")
    p.add_argument("--kernel", required=True, help="kernel JSON (inline, or @path)")
    p.add_argument("--symbol", required=True, help="piecewise symbol JSON (inline, or @path)")
    p.add_argument("--n", type=int, default=fredholm.DEFAULT_N_PER_PIECE, help="nodes per piece")
    tol(p, 1e-8)
    p.set_defaults(func=cmd_fredholm)

    p = sub.add_parser("gap", parents=[common], help="gap probability of an interval")
    p.add_argument("--kernel", default="sine", help="'sine', 'rank_one_uniform' or kernel JSON")
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--n", type=int, default=fredholm.DEFAULT_N_PER_PIECE)
    tol(p, 1e-8)
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("sample", parents=[common], help="exact DPP samples as JSON lines")
    p.add_argument("--kernel", required=True, help="kernel JSON (inline, or @path)")
    p.add_argument("--quadrature", default=None, help='{"n":..,"lo":..,"hi":..} for continuous kernels')
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--audit", action="store_true", help="emit inclusion-frequency CSV instead")
    tol(p, 1e-9)
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not 0 <= args.seed < 2**64:
        print("dppfock: error: --seed: must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    if args.threads is None and os.environ.get("DPPFOCK_THREADS"):
        try:
            int(os.environ["DPPFOCK_THREADS"])
        except ValueError:
            print("dppfock: error: DPPFOCK_THREADS: must be an integer", file=sys.stderr)
            return EXIT_CONFIG
    func: Callable = args.func
    try:
        return func(args)
    except ConfigError as exc:
        print(f"dppfock: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
