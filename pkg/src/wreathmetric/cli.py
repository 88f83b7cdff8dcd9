"""Command-line front end: ``wreathmetric {eval,norm,compare,distortion,orbits,nonregular-norm}``.

Exit codes: 0 success, 2 parse error, 3 resource cap, 4 invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import pickle
import random
import sys
from pathlib import Path

from . import __version__
from .distortion import (
    distortion_table,
    embed_subwreath,
    embed_words,
    regime_fit,
    superadditivity_probe,
)
from .errors import (
    ActionError,
    HomomorphismError,
    ResourceLimit,
    TooLarge,
    Unreachable,
    WordError,
)
from .groups import CayleyBall, evaluate_word, generating_set, parse_group, parse_word, word_norm
from .metric import (
    DEFAULT_BFS_CAP,
    DEFAULT_TSP_CAP,
    EXACT,
    EstimateConfig,
    MetricSource,
    WreathMetric,
    fit_equivalence_constants,
)
from .nonregular import NonregularWreath, nonregular_metric, parse_action
from .wreath import WreathProduct, evaluate_lamplighter_word, parse_wreath

EXIT_PARSE = 2
EXIT_CAP = 3
EXIT_INVARIANT = 4

CACHE_ENV = "WREATHMETRIC_CACHE_DIR"


class InvariantViolation(Exception):
    pass


class CapExceeded(Exception):
    pass


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), sort_keys=True)


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(_dumps(cfg).encode()).hexdigest()[:16]


def _header(cfg: dict) -> str:
    return f"# wreathmetric {__version__} config={config_hash(cfg)}\n"


def _parse_group(text):
    if " wr " in text:
        return parse_wreath(text)
    return parse_group(text)


def _gens(G):
    return G.generating_set() if hasattr(G, "generating_set") else generating_set(G)


def _element(G, args):
    if getattr(args, "element", None):
        return G.from_json(json.loads(args.element))
    tokens = _read_word(args)
    if isinstance(G, WreathProduct):
        return evaluate_lamplighter_word(G, tokens)
    gens = _gens(G)
    return evaluate_word(G, gens, parse_word(gens, tokens))


def _read_word(args):
    if getattr(args, "word_file", None):
        return Path(args.word_file).read_text().split()
    word = args.word or []
    if len(word) == 1:
        return word[0].split()
    return word


def _estimate_config(args, variant=1) -> EstimateConfig:
    if getattr(args, "config", None):
        base = EstimateConfig.load(args.config)
    else:
        src = MetricSource.perturbed() if getattr(args, "perturb", False) else EXACT
        base = EstimateConfig(variant, src, src)
    return EstimateConfig(
        variant, base.a_source, base.b_source, getattr(args, "tsp_cap", None) or base.tsp_cap,
        getattr(args, "bfs_cap", None) or base.bfs_cap,
    )


def _cached_ball(G, radius: int) -> dict:
    """Wreath BFS ball, memoized on disk when WREATHMETRIC_CACHE_DIR is set."""
    cache_dir = os.environ.get(CACHE_ENV)
    path = None
    if cache_dir:
        key = hashlib.sha256(f"{G.descriptor}|{radius}|{__version__}".encode()).hexdigest()[:24]
        path = Path(cache_dir) / f"ball-{key}.pickle"
        if path.exists():
            with open(path, "rb") as fh:
                return pickle.load(fh)
    ball = CayleyBall(G, _gens(G)).snapshot(radius)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as fh:
            pickle.dump(ball, fh)
    return ball


# --- subcommands -------------------------------------------------------------


def cmd_eval(args, out):
    G = _parse_group(args.group)
    x = _element(G, args)
    out.write(_dumps(G.to_json(x)) + "\n")
    return 0


def cmd_norm(args, out):
    G = _parse_group(args.group)
    x = _element(G, args)
    mode = args.mode
    if not isinstance(G, WreathProduct):
        d = word_norm(G, None, x, args.bfs_cap or DEFAULT_BFS_CAP)
        if isinstance(d, Unreachable):
            raise CapExceeded(f"norm exceeds bfs cap {d.cap}")
        out.write(f"{d}\n# word norm in {G.descriptor}, exact, bfs_cap={args.bfs_cap or DEFAULT_BFS_CAP}\n")
        return 0
    cfg = _estimate_config(args)
    M = WreathMetric(G, cfg)
    if mode == "exact":
        value = M.exact_norm(x)
        what = f"sum|a_i|_A + tau(e,b_i,b_f) (Held-Karp), exact, tsp_cap={cfg.tsp_cap}"
    elif mode == "bfs":
        value = CayleyBall(G, G.generating_set()).norm(x, cfg.bfs_cap)
        what = f"BFS over the Cayley graph of {G.descriptor}, exact, bfs_cap={cfg.bfs_cap}"
    elif mode.startswith("estimate:"):
        v = int(mode.split(":", 1)[1])
        cfg = _estimate_config(args, v)
        value = M.estimate(x, cfg)
        what = (
            f"estimate variant {v}, a_source={_dumps(cfg.a_source.to_json())}, "
            f"b_source={_dumps(cfg.b_source.to_json())}, not exact"
        )
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if isinstance(value, Unreachable):
        raise CapExceeded(f"norm exceeds bfs cap {value.cap}")
    out.write(f"{value}\n# {what}\n")
    return 0


def _ratio(v, exact):
    """exact / estimate, so variant 1 always lands in [1, 2]."""
    if v is None:
        return ""
    if v == 0:
        return "1.0000" if exact == 0 else "inf"
    return f"{exact / v:.4f}"


def cmd_compare(args, out):
    G = _parse_group(args.group)
    if not isinstance(G, WreathProduct):
        raise ValueError("compare needs a wreath product")
    src = MetricSource.perturbed() if args.perturb else EXACT
    cfg = EstimateConfig(1, src, src, args.tsp_cap or DEFAULT_TSP_CAP, args.bfs_cap or DEFAULT_BFS_CAP)
    if args.config:
        cfg = EstimateConfig.load(args.config)
    M = WreathMetric(G, cfg)
    ball = _cached_ball(G, args.radius)
    elements = sorted(ball, key=lambda x: (ball[x], G.sort_key(x)))
    if args.sample is not None and args.sample < len(elements):
        rng = random.Random(args.seed)
        picked = sorted(rng.sample(range(len(elements)), args.sample))
        elements = [elements[i] for i in picked]
    settings = {
        "command": "compare",
        "group": G.descriptor,
        "radius": args.radius,
        "seed": args.seed,
        "sample": args.sample,
        "estimate": cfg.to_json(),
        "D": args.D,
    }
    buf = io.StringIO()
    buf.write(_header(settings))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["element_id", "element", "exact"] + [f"v{k}" for k in range(1, 8)] + [f"ratio{k}" for k in range(1, 8)])
    samples = {k: [] for k in range(1, 8)}
    for i, x in enumerate(elements):
        exact = M.exact_norm(x)
        if exact != ball[x]:
            raise InvariantViolation(f"exact formula {exact} != BFS {ball[x]} for {_dumps(G.to_json(x))}")
        parts = M.parts(x, cfg)
        vals = [parts.variant(k) for k in range(1, 8)]
        for k, v in enumerate(vals, 1):
            if v is not None:
                samples[k].append((v, exact))
        w.writerow([i, _dumps(G.to_json(x)), exact] + ["" if v is None else v for v in vals] + [_ratio(v, exact) for v in vals])
    fits = [fit_equivalence_constants(samples[k], args.D) if samples[k] else None for k in range(1, 8)]
    w.writerow(["fit_C", "", ""] + [f"{float(f.C):.4f}" if f else "" for f in fits] + [""] * 7)
    w.writerow(["fit_D", "", ""] + [f"{float(f.D):.4f}" if f else "" for f in fits] + [""] * 7)
    text = buf.getvalue()
    if args.out:
        Path(args.out).write_text(text)
    else:
        out.write(text)
    return 0


def _load_json_arg(value):
    if value is None:
        return None
    p = Path(value)
    if not value.lstrip().startswith("{") and p.exists():
        return json.loads(p.read_text())
    return json.loads(value)


def cmd_distortion(args, out):
    cfg = _load_json_arg(args.config)
    kind = cfg.get("type", "subgroup")
    outdir = Path(args.out) if args.out else None
    header = _header(cfg)
    if kind == "subgroup":
        G = _parse_group(cfg["ambient"])
        metric = cfg.get("metric", "exact")
        if "words" in cfg:
            emb = embed_words(G, cfg["words"], metric)
        else:
            emb = embed_subwreath(G, cfg.get("a_words", []), cfg.get("b_words", []), metric)
        emb.check_homomorphism(random.Random(cfg.get("seed", 0)))
        table = distortion_table(emb, int(cfg.get("n_max", 12)), int(cfg.get("h_radius", 10)))
        if any(a.delta > b.delta for a, b in zip(table.rows, table.rows[1:])):
            raise InvariantViolation("distortion table is not monotone")
        probe = superadditivity_probe(table.as_function(include_truncated=False) or {0: 0})
        summary = {
            "type": "subgroup",
            "ambient": G.descriptor,
            "metric_kind": metric,
            "rows": len(table.rows),
            "truncated_rows": [r.n for r in table.rows if r.truncated],
            "delta_at_n_max": table.rows[-1].delta,
            "superadditive_on_sample": probe.ok,
            "superadditivity_violations": probe.violations[:20],
            "note": probe.note,
        }
        csv_text = header + table.to_csv(G.to_json)
        json_obj = {"tool": f"wreathmetric {__version__}", "config_hash": config_hash(cfg), **table.to_json(G.to_json)}
        plot = "".join(f"{r.n} {r.delta}\n" for r in table.rows)
    elif kind == "cyclic":
        W = _parse_group(cfg["group"])
        if "element" in cfg:
            x = W.from_json(cfg["element"])
        else:
            x = evaluate_lamplighter_word(W, cfg.get("word", ""))
        ecfg = EstimateConfig(int(cfg.get("variant", 1)))
        window = int(cfg.get("window", 16))
        cls, fit, profile = regime_fit(W, x, int(cfg.get("N", 64)), ecfg, window)
        summary = {
            "type": "cyclic",
            "group": W.descriptor,
            "element": W.to_json(x),
            "classification": cls.kind,
            "period": cls.period,
            "n0": cls.n0,
            "regime": cls.regime,
            "finite_window_heuristic": cls.heuristic,
            "window": window,
            "fit_C": float(fit.C),
            "fit_D": float(fit.D),
        }
        sbuf = io.StringIO()
        w = csv.writer(sbuf, lineterminator="\n")
        w.writerow(["n", "support_size", "cursor_norm", "estimate"])
        for r in profile:
            w.writerow([r.n, r.support_size, r.cursor_norm, r.estimate])
        csv_text = header + sbuf.getvalue()
        json_obj = {
            "tool": f"wreathmetric {__version__}",
            "config_hash": config_hash(cfg),
            "summary": summary,
            "profile": [vars(r) for r in profile],
        }
        plot = "".join(f"{r.n} {r.estimate}\n" for r in profile)
    else:
        raise ValueError(f"unknown distortion config type {kind!r}")
    summary = {"tool": f"wreathmetric {__version__}", "config_hash": config_hash(cfg), **summary}
    if outdir:
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "table.csv").write_text(csv_text)
        (outdir / "table.json").write_text(json.dumps(json_obj, indent=1, sort_keys=True) + "\n")
        (outdir / "summary.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")
    if args.plot:
        out.write(plot)
    else:
        out.write(json.dumps(summary, sort_keys=True) + "\n")
    return 0


def cmd_orbits(args, out):
    action = parse_action(_load_json_arg(args.action))
    for o in action.orbits:
        size = "infinite" if o.points is None else len(o.points)
        out.write(f"orbit {o.index}: basepoint={_dumps(action.point_to_json(o.basepoint))} size={size}\n")
    return 0


def cmd_nonregular_norm(args, out):
    action = parse_action(_load_json_arg(args.action))
    NW = NonregularWreath(parse_group(args.A), action)
    if args.element:
        x = NW.from_json(json.loads(args.element))
    else:
        gens = NW.generating_set()
        x = evaluate_word(NW, gens, parse_word(gens, _read_word(args)))
    cap = args.bfs_cap or DEFAULT_BFS_CAP
    out.write(_dumps(NW.to_json(x)) + "\n")
    if args.mode in ("estimate", "both"):
        e = nonregular_metric(NW, cap).estimate(x)
        if isinstance(e, Unreachable):
            raise CapExceeded(f"estimate needs Schreier distances beyond bfs cap {cap}")
        out.write(f"estimate {e}\n# sum|a_i|_A + sum_j mu_j (Schreier MST per orbit) + |b_f|_B, omega={action.omega}\n")
    if args.mode in ("bfs", "both"):
        d = CayleyBall(NW, NW.generating_set()).norm(x, cap)
        if isinstance(d, Unreachable):
            raise CapExceeded(f"norm exceeds bfs cap {cap}")
        out.write(f"bfs {d}\n# BFS over S_B plus one copy of S_A per orbit, exact, bfs_cap={cap}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wreathmetric", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"wreathmetric {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def caps(sp):
        sp.add_argument("--tsp-cap", type=int, default=None, help=f"Held-Karp point cap (default {DEFAULT_TSP_CAP})")
        sp.add_argument("--bfs-cap", type=int, default=None, help=f"factor BFS radius cap (default {DEFAULT_BFS_CAP})")

    def word_input(sp):
        sp.add_argument("word", nargs="*", help="whitespace-separated tokens; trailing '-' inverts")
        sp.add_argument("--word-file")
        sp.add_argument("--element", help="element as JSON instead of a word")

    sp = sub.add_parser("eval", help="evaluate a word to a canonical element")
    sp.add_argument("--group", required=True)
    word_input(sp)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("norm", help="exact norm, BFS norm or an estimate")
    sp.add_argument("--group", required=True)
    sp.add_argument("--mode", default="exact", help="exact | bfs | estimate:1..7")
    sp.add_argument("--config", help="EstimateConfig JSON file")
    sp.add_argument("--perturb", action="store_true", help="use E = 2d+1 for E_A and E_B")
    caps(sp)
    word_input(sp)
    sp.set_defaults(func=cmd_norm)

    sp = sub.add_parser("compare", help="CSV of exact norm vs all seven estimates on a ball")
    sp.add_argument("--group", default="Z2 wr Z")
    sp.add_argument("--radius", type=int, default=6)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--sample", type=int, default=None, help="random subset size (seeded)")
    sp.add_argument("--perturb", action="store_true")
    sp.add_argument("--config")
    sp.add_argument("--D", type=float, default=2, help="additive slack for the fitted constants")
    sp.add_argument("--out")
    caps(sp)
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("distortion", help="distortion table or cyclic-subgroup profile from a JSON config")
    sp.add_argument("config", help="JSON file or inline JSON")
    sp.add_argument("--out", help="directory for table.csv, table.json, summary.json")
    sp.add_argument("--plot", action="store_true", help="print two-column 'n value' output")
    sp.set_defaults(func=cmd_distortion)

    sp = sub.add_parser("orbits", help="orbits and basepoints of an action")
    sp.add_argument("action", help="action JSON file or inline JSON")
    sp.set_defaults(func=cmd_orbits)

    sp = sub.add_parser("nonregular-norm", help="estimate and/or BFS norm in A wr_Omega B")
    sp.add_argument("--action", required=True)
    sp.add_argument("--A", default="Z2")
    sp.add_argument("--mode", choices=["estimate", "bfs", "both"], default="both")
    sp.add_argument("--bfs-cap", type=int, default=None)
    word_input(sp)
    sp.set_defaults(func=cmd_nonregular_norm)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_PARSE if e.code else 0
    try:
        return args.func(args, out)
    except WordError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except (TooLarge, ResourceLimit, CapExceeded) as e:
        print(f"error: {e}; raise --tsp-cap/--bfs-cap or use an estimate mode", file=sys.stderr)
        return EXIT_CAP
    except (InvariantViolation, HomomorphismError) as e:
        print(f"invariant violation: {e}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ValueError, KeyError, ActionError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
