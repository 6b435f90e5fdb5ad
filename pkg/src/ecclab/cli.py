"""``ecc`` command-line entry point.

Exit status: 0 on success, 1 on a domain error (the message names the
error class), 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import channels as ch
from . import montecarlo as mc
from . import scldpc
from .gf import GF
from .gfft import TransformPlan, parse_factors
from .polar_codec import (MessageLayout, encode, sc_decode_erasure, sc_decode_hard,
                          sc_decode_soft)
from .polar_design import PolarDesign, design


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# output

def fmt_value(v):
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.6g}"
    return str(v)


def emit_table(rows, columns, fmt: str = "csv") -> str:
    """Render rows (dicts) with a stable column order."""
    if fmt == "json":
        return json.dumps([{c: r.get(c, "") for c in columns} for r in rows], indent=2)
    if fmt == "csv":
        shown = [{c: fmt_value(r.get(c, "")) for c in columns} for r in rows]
        return mc.rows_to_csv(shown, columns).rstrip("\n")
    cells = [list(columns)] + [[fmt_value(r.get(c, "")) for c in columns] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(columns))]
    return "\n".join("  ".join(s.ljust(wd) for s, wd in zip(row, widths)).rstrip() for row in cells)


def _write(path, text):
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"{path}: {exc.strerror or exc}") from exc


def _read(path):
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise OSError(f"{path}: {exc.strerror or exc}") from exc


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("ECC_SEED")
    if env is None:
        raise UsageError("this command is randomized: pass --seed or set ECC_SEED")
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"ECC_SEED must be an integer, got '{env}'") from None


def _symbols(text: str) -> np.ndarray:
    out = []
    for tok in text.replace(" ", "").split(","):
        if tok in ("e", "E", "?", "-1", "*"):
            out.append(ch.ERASED)
        elif tok:
            out.append(int(tok))
    return np.array(out, dtype=np.int64)


def _render_symbols(v) -> str:
    return ",".join("e" if int(x) == ch.ERASED else str(int(x)) for x in v)


# ---------------------------------------------------------------------------
# verbs

def _build_design(args) -> PolarDesign:
    f = GF(args.q)
    factors = parse_factors(args.factors) if args.factors else None
    plan = TransformPlan.create(f, args.n, factors)
    model = ch.parse_channel(args.channel)
    if not isinstance(model, (ch.QEC, ch.BEC)):
        raise UsageError("designs are computed for qec:<eps> or bec:<eps>")
    d = design(plan, model.epsilon, args.delta)
    return d


def cmd_design(args) -> str:
    d = _build_design(args)
    if args.out:
        _write(args.out, d.dumps())
    row = {"N": d.n, "q": d.plan.field.q, "factors": "x".join(map(str, d.plan.factors)),
           "k": d.k, "rate": d.rate, "union_bound": d.union_bound}
    if args.format == "json":
        return d.dumps()
    return emit_table([row], list(row), args.format)


def _load_design(path) -> PolarDesign:
    return PolarDesign.from_dict(json.loads(_read(path)))


def cmd_encode(args) -> str:
    d = _load_design(args.design)
    if args.message is not None:
        payload = _symbols(args.message)
    else:
        rng = np.random.default_rng(_seed(args))
        payload = rng.integers(0, d.plan.field.q, d.k)
    v = encode(MessageLayout(d, payload))
    text = _render_symbols(v)
    if args.out:
        _write(args.out, text + "\n")
    if args.format == "json":
        return json.dumps({"message": payload.tolist(), "codeword": v.tolist()})
    return text


def cmd_decode(args) -> str:
    d = _load_design(args.design)
    y = _symbols(args.received if args.received is not None else _read(args.input))
    if y.size != d.n:
        raise ch.ParameterOutOfRange(f"received word has {y.size} symbols, design needs {d.n}")
    model = ch.parse_channel(args.channel) if args.channel else None
    dec = args.decoder
    if dec == "auto":
        dec = "erasure" if model is None or isinstance(model, (ch.QEC, ch.BEC)) else "hard"
    if dec == "erasure":
        u = sc_decode_erasure(y, d)
    elif dec == "hard":
        u = sc_decode_hard(y, d)
    else:
        if model is None:
            raise UsageError("--decoder soft needs --channel")
        mc.PolarSystem(d, "soft").resolve_decoder(model)
        u = sc_decode_soft(y, d, model)
    msg = u[d.info_set]
    ok = bool(np.all(msg != ch.ERASED))
    if args.format == "json":
        return json.dumps({"message": msg.tolist(), "spectrum": u.tolist(), "success": ok})
    return _render_symbols(msg)


def _ensemble(args, L_required=True) -> scldpc.EnsembleParams:
    if L_required and args.L is None:
        raise UsageError("--L is required here")
    return scldpc.EnsembleParams(args.dv, args.dc, args.w, args.m, args.L, args.flavor)


def _int_list(text):
    """``80,100`` or ``80:200:20`` (inclusive stop)."""
    if ":" in text:
        a, b, *s = (int(x) for x in text.split(":"))
        return list(range(a, b + 1, s[0] if s else 1))
    return [int(x) for x in text.split(",")]


def cmd_simulate(args) -> str:
    seed = _seed(args)
    if args.trials is None and args.failures is None:
        raise UsageError("give --trials and/or --failures")
    workers = args.workers or mc.default_workers()
    cfgs = []
    chans = [ch.parse_channel(c) for c in args.channel]
    if args.family == "polar":
        if args.design:
            d = _load_design(args.design)
        else:
            if not (args.q and args.n):
                raise UsageError("polar simulation needs --design or --q/--n/--delta/--design-channel")
            args.channel, keep = args.design_channel, args.channel
            d = _build_design(args)
            args.channel = keep
        systems = [mc.PolarSystem(d, args.decoder)]
    else:
        if args.m is None:
            raise UsageError("--m is required")
        if args.L is None:
            raise UsageError("--L is required")
        systems = [mc.LdpcSystem(scldpc.EnsembleParams(args.dv, args.dc, args.w, M, args.L, args.flavor))
                   for M in _int_list(args.m)]
    for s in systems:
        for c in chans:
            cfgs.append(mc.CampaignConfig(s, c, args.failures, args.trials, seed, args.metric, workers))
    rows = mc.sweep(cfgs)
    text = emit_table(rows, mc.CSV_COLUMNS, args.format)
    if args.out:
        _write(args.out, (mc.rows_to_csv(rows) if args.format == "csv" else text + "\n"))
    if any(r["error"] for r in rows) and len(rows) == 1:
        raise mc.ConfigError(rows[0]["error"])
    return text


def cmd_bounds(args) -> str:
    if args.family != "scldpc":
        raise UsageError("only --family scldpc has closed-form bounds")
    p = scldpc.EnsembleParams(args.dv, args.dc, args.w, args.m, args.L)
    model = args.model
    form = args.form
    if model == "spbc":
        rep = scldpc.spbc_bound(p, form=form or "approx")
    elif model == "spbc-exp":
        rep = scldpc.spbc_bound(p, expurgated=True)
    elif model == "rbc":
        if args.b is None:
            raise UsageError("--model rbc needs --b")
        rep = scldpc.rbc_bound(p, args.b, form or "approx")
    elif model == "lambda":
        pv, lam = scldpc.p_vector(p, form or "exact")
        rep = scldpc.BoundReport(f"lambda-{form or 'exact'}", scldpc._params_dict(p), float(lam[0]),
                                 {"p_vector": pv.tolist(), "lambda": lam.tolist()})
    elif model == "p":
        rep = scldpc.BoundReport(f"p-{form or 'exact'}", scldpc._params_dict(p),
                                 scldpc.p_size2(p, form or "exact"))
    elif model == "n2h":
        rep = scldpc.n2h_mean(_ensemble(args), form or "exact")
    else:
        if args.eps is None:
            raise UsageError("--model floor needs --eps")
        rep = scldpc.error_floor(_ensemble(args), args.eps, form or "exact")
    if args.format == "json":
        return rep.to_json()
    row = {"formula": rep.formula, "value": rep.value}
    for k, v in rep.components.items():
        if isinstance(v, list):
            for i, x in enumerate(v, start=1):
                row[f"{k}_{i}"] = x
        else:
            row[k] = v
    if args.format == "text" and len(row) == 2:
        return fmt_value(rep.value)
    return emit_table([row], list(row), args.format) if args.format == "csv" else \
        fmt_value(rep.value) + "\n" + emit_table([row], list(row), "text")


def cmd_capacity(args) -> str:
    if args.rate is not None:
        if args.q is None:
            raise UsageError("--rate needs --q")
        beta = ch.qsc_shannon_limit(args.q, args.rate)
        row = {"q": args.q, "rate": args.rate, "beta_limit": beta}
        val = beta
    else:
        if args.channel is None:
            raise UsageError("give --channel or --rate")
        model = ch.parse_channel(args.channel)
        q = getattr(model, "q", None) or args.q
        if isinstance(model, (ch.QEC, ch.BEC)):
            c = 1.0 - model.epsilon
            q = q or 2
        elif isinstance(model, (ch.QSC, ch.QSCE)):
            if q is None:
                raise UsageError("symbol-error channels need q (q=<n> in the channel or --q)")
            c = ch.qsce_capacity(q, model.beta, getattr(model, "epsilon", 0.0))
        else:
            raise UsageError(f"no capacity formula for {model}")
        row = {"channel": str(model), "q": q, "capacity": c}
        val = c
    if args.format == "json":
        return json.dumps(row)
    if args.format == "text":
        return fmt_value(val)
    return emit_table([row], list(row), "csv")


def cmd_sample_graph(args) -> str:
    seed = _seed(args)
    p = _ensemble(args)
    g = scldpc.sample_graph(p, np.random.default_rng(seed), seed=seed)
    if args.out:
        _write(args.out, g.to_text())
    census = scldpc.count_small_stopping_sets(g) if args.census else {}
    row = {"n_vn": g.n_vn, "n_cn": g.n_cn, "max_cn_degree": int(g.cn_degrees().max()),
           "four_cycles": int(len(g.four_cycles())), **census}
    if args.format == "json":
        return json.dumps(row)
    if not args.out and args.format == "text" and not args.census:
        return g.to_text().rstrip("\n")
    return emit_table([row], list(row), args.format)


# ---------------------------------------------------------------------------
# parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="ecc", description="Cyclic polar codes and SC-LDPC burst analysis.")
    sub = ap.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    def common(p, seed=False):
        p.add_argument("--format", choices=("csv", "text", "json"), default="text")
        if seed:
            p.add_argument("--seed", type=int, help="master seed (falls back to $ECC_SEED)")

    def ensemble(p, L=True):
        p.add_argument("--dv", type=int, default=3)
        p.add_argument("--dc", type=int, default=6)
        p.add_argument("--w", type=int, default=3)
        p.add_argument("--L", "--l", dest="L", type=int)
        p.add_argument("--flavor", choices=scldpc.FLAVORS, default="random")

    def design_flags(p, chan_flag="--channel"):
        p.add_argument("--q", type=int)
        p.add_argument("--n", type=int)
        p.add_argument("--factors", help="input-side first, e.g. 3,5,17 or 2x8")
        p.add_argument(chan_flag, dest=chan_flag.lstrip("-").replace("-", "_"), default="qec:0.5")
        p.add_argument("--delta", type=float, default=0.1)

    p = sub.add_parser("design", help="density-evolution design over the QEC")
    design_flags(p)
    p.add_argument("--out")
    common(p)
    p.set_defaults(func=cmd_design, need=("q", "n"))

    p = sub.add_parser("encode", help="encode a message with a design file")
    p.add_argument("--design", required=True)
    p.add_argument("--message", help="comma-separated information symbols; random if omitted")
    p.add_argument("--out")
    common(p, seed=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="successive-cancellation decoding of one word")
    p.add_argument("--design", required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--received", help="comma-separated symbols, 'e' marks an erasure")
    g.add_argument("--input", help="file holding the received word")
    p.add_argument("--decoder", choices=("auto", "erasure", "hard", "soft"), default="auto")
    p.add_argument("--channel")
    common(p)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("simulate", help="Monte-Carlo campaign, one CSV row per configuration")
    p.add_argument("--family", choices=("polar", "scldpc"), required=True)
    p.add_argument("--channel", action="append", required=True,
                   help="repeat the flag to sweep several channels")
    p.add_argument("--design")
    p.add_argument("--q", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--factors")
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--design-channel", default="qec:0.5")
    p.add_argument("--decoder", choices=("auto", "erasure", "hard", "soft"), default="auto")
    ensemble(p)
    p.add_argument("--m", help="VNs per position: 80 or 80,100 or 80:1000:20")
    p.add_argument("--trials", type=int)
    p.add_argument("--failures", type=int)
    p.add_argument("--metric", choices=("block", "bit"), default="block")
    p.add_argument("--workers", type=int)
    p.add_argument("--out")
    common(p, seed=True)
    p.set_defaults(func=cmd_simulate, format="csv")

    p = sub.add_parser("bounds", help="closed-form SC-LDPC estimates")
    p.add_argument("--family", default="scldpc")
    ensemble(p)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--model", choices=("spbc", "spbc-exp", "rbc", "lambda", "p", "n2h", "floor"),
                   default="spbc")
    p.add_argument("--form", choices=("exact", "approx", "poisson"))
    p.add_argument("--b", type=int)
    p.add_argument("--eps", type=float)
    common(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("capacity", help="QSCE capacity or the QSC Shannon limit for a rate")
    p.add_argument("--channel")
    p.add_argument("--q", type=int)
    p.add_argument("--rate", type=float)
    common(p)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("sample-graph", help="draw an SC-LDPC Tanner graph")
    ensemble(p)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--census", action="store_true", help="count size-2 and size-(dv+1) stopping sets")
    p.add_argument("--out")
    common(p, seed=True)
    p.set_defaults(func=cmd_sample_graph)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        for name in getattr(args, "need", ()):
            if getattr(args, name) is None:
                raise UsageError(f"--{name} is required")
        out = args.func(args)
    except UsageError as exc:
        print(f"ecc: usage error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except Exception as exc:
        print(f"ecc: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if out:
        print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
