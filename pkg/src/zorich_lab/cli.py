"""Command-line front end.

Every subcommand reads one JSON configuration (defaults overlaid with
``--config``) and writes its results below ``--out``. Exit codes: 0 on
success, 1 on a configuration or usage error, 2 when a verification fails.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .config import load_config
from .errors import ConfigError, ConvergenceError, InadmissibleError, ZorichError
from .geometry import MapParams

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_VERIFY = 2

COMMANDS = ("render", "orbit", "itinerary", "periodic", "verify", "surfaces", "curves", "regime")


class _Parser(argparse.ArgumentParser):
    """Argument parser that exits with status 1 on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _common(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=default, help="JSON configuration overlaid on the defaults")
    parser.add_argument("--out", default=default, help="output directory (default: zorich_out)")
    parser.add_argument("--threads", type=int, default=default, help="render workers (overrides ZORICH_LAB_THREADS)")
    parser.add_argument("--seed", type=int, default=default, help="random seed (unsigned 64-bit)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="zorich-lab", description="Numerical laboratory for Zorich maps.")
    _common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "render": "render a planar slice as an escape-time image",
        "orbit": "print a finite orbit",
        "itinerary": "print the beam itinerary of a point",
        "periodic": "find the periodic point of a symbol word",
        "verify": "run the analysis checks and emit a JSON report",
        "surfaces": "level-surface heights and the volume table",
        "curves": "planar and spatial escaping curves",
        "regime": "face constants and parameter thresholds",
    }
    for name in COMMANDS:
        _common(sub.add_parser(name, help=helps[name]), suppress=True)
    return parser


def _write_csv(path: Path, header: list, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2, default=_jsonable), encoding="utf-8")


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, np.generic):
        return v.item()
    return str(v)


def _params(cfg: dict) -> MapParams:
    try:
        return MapParams(float(cfg["lambda"]), float(cfg["nu"]), str(cfg["face"]), float(cfg["guard"]))
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"bad map parameters: {exc}") from exc


def _vec3(v, name: str) -> np.ndarray:
    try:
        a = np.asarray(v, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be three numbers") from exc
    if a.shape != (3,) or not np.all(np.isfinite(a)):
        raise ConfigError(f"{name} must be three finite numbers")
    return a


# ---------------------------------------------------------------------------
# subcommands


def cmd_render(cfg, params, out, args) -> int:
    from .render import render_slice, resolve_threads, slice_from_config, write_raster

    spec = slice_from_config(cfg["render"], cfg["horizon"], cfg["escape_radius"], cfg["bound_radius"])
    threads = resolve_threads(args.threads)
    raster = render_slice(params, spec, threads)
    sidecar = write_raster(out, raster, params, png=bool(cfg["render"].get("png", True)))
    print(json.dumps({"out": str(out), "threads": threads, "counts": sidecar["counts"]}))
    return EXIT_OK


def cmd_orbit(cfg, params, out, args) -> int:
    from .zorich import zorich_iterate

    x = _vec3(cfg["orbit"]["x"], "orbit.x")
    trace = zorich_iterate(params, x, int(cfg["orbit"]["n"]), float(cfg["escape_radius"]))
    rows = [[k, *p, int(par)] for k, (p, par) in enumerate(zip(trace.points, trace.parities))]
    _write_csv(out / "orbit.csv", ["k", "x1", "x2", "x3", "parity"], rows)
    for r in rows:
        print(" ".join(f"{v:.17g}" if isinstance(v, float) else str(v) for v in r))
    print(f"stop: {trace.stop}")
    return EXIT_OK


def cmd_itinerary(cfg, params, out, args) -> int:
    from .symbolic import itinerary

    x = _vec3(cfg["itinerary"]["x"], "itinerary.x")
    it = itinerary(params, x, int(cfg["itinerary"]["horizon"]))
    _write_csv(out / "itinerary.csv", ["k", "i", "j"], [[k, *s] for k, s in enumerate(it.symbols)])
    doc = {"x": x, "symbols": [list(s) for s in it.symbols], "horizon": it.horizon, "truncated": it.truncated}
    _write_json(out / "itinerary.json", doc)
    print(json.dumps(doc, default=_jsonable))
    return EXIT_OK


def cmd_periodic(cfg, params, out, args) -> int:
    from .symbolic import itinerary, periodic_point

    pc = cfg["periodic"]
    try:
        word = [tuple(int(c) for c in w) for w in pc["word"]]
    except (TypeError, ValueError) as exc:
        raise ConfigError("periodic.word must be a list of integer pairs") from exc
    seed = None if pc.get("seed_point") is None else _vec3(pc["seed_point"], "periodic.seed_point")
    try:
        res = periodic_point(params, word, float(pc["tol"]), int(pc["max_rounds"]), seed)
    except InadmissibleError as exc:
        raise ConfigError(f"inadmissible word (step {exc.step}): {exc}") from exc
    except ConvergenceError as exc:
        doc = {"word": word, "converged": False, "residual": exc.residual, "message": str(exc)}
        _write_json(out / "periodic.json", doc)
        print(json.dumps(doc, default=_jsonable))
        return EXIT_VERIFY
    it = itinerary(params, res.x_star, 3 * len(word), partition="diamond")
    doc = {
        "word": word,
        "converged": True,
        "x_star": res.x_star,
        "residual": res.residual,
        "pullback_residual": res.pullback_residual,
        "rounds": res.rounds,
        "method": res.method,
        "itinerary": [list(s) for s in it.symbols],
    }
    _write_json(out / "periodic.json", doc)
    print(json.dumps(doc, default=_jsonable))
    return EXIT_OK


def cmd_verify(cfg, params, out, args) -> int:
    from .analysis import regime_report, run_verification_suite

    vc = cfg["verify"]
    records = run_verification_suite(
        params, int(vc["samples"]), int(vc["pairs"]), int(vc["quad_resolution"]), int(vc["n_max"]), int(cfg["seed"])
    )
    ok = all(r["ok"] for r in records)
    doc = {"params": params.as_dict(), "regime": regime_report(params).to_record(), "all_ok": ok, "checks": records}
    _write_json(out / "verify.json", doc)
    for r in records:
        print(f"{'ok  ' if r['ok'] else 'FAIL'} {r['check']}: {r['lhs']} {r['relation']} {r['rhs']}")
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_surfaces(cfg, params, out, args) -> int:
    from .analysis import level_surface_height, volume_Tn

    sc = cfg["surfaces"]
    n_max, grid = int(sc["n_max"]), int(sc["grid"])
    rows = []
    for n in range(n_max + 1):
        num, form = volume_Tn(params, n, int(sc["resolution"]))
        rows.append([n, num, form, abs(num - form) / form])
    _write_csv(out / "volumes.csv", ["n", "T_n_quadrature", "T_n_formula", "rel_err"], rows)
    # sample S_n above a grid of the beam B_(0,0), in (d, s) coordinates
    lam = params.lam
    d = (np.arange(grid) + 0.5) * (2 * lam / grid)
    s = -2 * lam + (np.arange(2 * grid) + 0.5) * (2 * lam / grid)
    D, S = np.meshgrid(d, s, indexing="ij")
    u = np.stack([(S + D) / 2, (S - D) / 2], axis=-1).reshape(-1, 2)
    hrows = []
    for n in range(n_max + 1):
        h = level_surface_height(params, n, u)
        hrows.extend([n, a, b, c] for (a, b), c in zip(u, h))
    _write_csv(out / "surfaces.csv", ["n", "x1", "x2", "x3"], hrows)
    for r in rows:
        print(f"T_{r[0]} = {r[1]:.12g} (closed form {r[2]:.12g}, rel err {r[3]:.2e})")
    return EXIT_OK


def cmd_curves(cfg, params, out, args) -> int:
    from .planar import gamma_m_curve
    from .symbolic import gamma_k_curves

    cc = cfg["curves"]
    n_points = int(cc["n_points"])
    rows = []
    for m in range(1, int(cc["m_max"]) + 1):
        rows.extend([m, x, y] for x, y in gamma_m_curve(params, m, n_points))
    _write_csv(out / "planar_curves.csv", ["m", "x", "y"], rows)
    cs = gamma_k_curves(params, int(cc["k_max"]), n_points)
    srows = []
    for k, c in enumerate(cs.curves):
        srows.extend([k, *p] for p in c)
    _write_csv(out / "spatial_curves.csv", ["k", "x1", "x2", "x3"], srows)
    doc = {"planar_curves": int(cc["m_max"]), "spatial_curves": len(cs.curves), "dropped": cs.dropped}
    print(json.dumps(doc))
    return EXIT_OK


def cmd_regime(cfg, params, out, args) -> int:
    from .analysis import regime_report

    doc = regime_report(params).to_record()
    _write_json(out / "regime.json", doc)
    print(json.dumps(doc, indent=2, default=_jsonable))
    return EXIT_OK


_HANDLERS = {
    "render": cmd_render,
    "orbit": cmd_orbit,
    "itinerary": cmd_itinerary,
    "periodic": cmd_periodic,
    "verify": cmd_verify,
    "surfaces": cmd_surfaces,
    "curves": cmd_curves,
    "regime": cmd_regime,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("--seed must be an unsigned 64-bit integer")
            cfg["seed"] = args.seed
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        params = _params(cfg)
        out = Path(args.out or "zorich_out")
        out.mkdir(parents=True, exist_ok=True)
        return _HANDLERS[args.command](cfg, params, out, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ZorichError):
            print(f"error: {exc}", file=sys.stderr)
        else:
            print(f"config error: {exc!r}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
