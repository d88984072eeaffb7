"""Command-line front end.

Subcommands: ``generate`` (one roundabout from a config), ``random`` (a
numbered batch of random layouts), ``era`` (radius reports) and ``preview``
(SVG of an existing ``.xodr``).

Exit codes: 0 success, 1 some batch inputs failed, 2 bad configuration,
3 infeasible layout, 4 validation failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .defs import GenerationParams, IncidentRoadDefinition, TurboParams
from .errors import (
    DegenerateInputError,
    EmptyNetworkError,
    InfeasibleLayoutError,
    OpenDriveParseError,
    RoundaboutError,
    ValidationFailedError,
)
from .noise import NoiseParams

log = logging.getLogger("roundabouts")

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_INVALID = 4

SEED_ENV = "ROUNDABOUT_SEED"
MODES = ("classic", "turbo")


class ConfigError(Exception):
    pass


@dataclass
class JobConfig:
    mode: str = "classic"
    defs: list = field(default_factory=list)
    params: dict = field(default_factory=dict)
    seed: int | None = None
    out_dir: Path = Path(".")
    name: str = "roundabout"
    svg: bool = False

    def generation_params(self, seed: int):
        cls = TurboParams if self.mode == "turbo" else GenerationParams
        return build_params(cls, self.params, seed)


def build_params(cls, overrides: dict, seed: int):
    known = set(cls.field_names())
    unknown = sorted(set(overrides) - known)
    if unknown:
        if "translation_distance" in unknown and cls is GenerationParams:
            raise ConfigError("translation_distance is only valid in turbo mode")
        raise ConfigError(f"unknown parameter(s): {', '.join(unknown)}")
    kw = dict(overrides)
    if isinstance(kw.get("distortion"), dict):
        try:
            kw["distortion"] = NoiseParams(seed=seed, **kw["distortion"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad distortion settings: {exc}") from None
    kw["seed"] = seed
    try:
        return cls(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad parameters: {exc}") from None


def resolve_seed(flag: int | None, config_seed: int | None = None) -> int:
    """Command-line flag, then ``ROUNDABOUT_SEED``, then the config file, then 0."""
    if flag is not None:
        return int(flag)
    env = os.environ.get(SEED_ENV)
    if env not in (None, ""):
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    if config_seed is not None:
        return int(config_seed)
    return 0


def _parse_value(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def parse_overrides(pairs) -> dict:
    out = {}
    for item in pairs or []:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        out[key.strip()] = _parse_value(value.strip())
    return out


def _load_json(path: Path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def load_defs(raw) -> list[IncidentRoadDefinition]:
    if not isinstance(raw, list):
        raise ConfigError("road definitions must be a JSON array")
    defs = []
    for i, d in enumerate(raw):
        if not isinstance(d, dict):
            raise ConfigError(f"road definition {i} must be an object")
        try:
            defs.append(IncidentRoadDefinition.from_dict(d))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"road definition {i}: {exc}") from None
    if len(defs) < 3:
        raise ConfigError(f"a roundabout needs at least 3 incident road definitions, got {len(defs)}")
    return defs


def load_config(path) -> JobConfig:
    """A bare JSON array of definitions, or an object with ``defs``/``defs_file``."""
    path = Path(path)
    raw = _load_json(path)
    if isinstance(raw, list):
        return JobConfig(defs=load_defs(raw))
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object or array")
    has_inline, has_file = "defs" in raw, "defs_file" in raw
    if has_inline == has_file:
        raise ConfigError("config needs exactly one of 'defs' or 'defs_file'")
    defs_raw = raw["defs"] if has_inline else _load_json(path.parent / raw["defs_file"])
    mode = raw.get("mode", "classic")
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
    params = raw.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("'params' must be an object")
    out = raw.get("output", {})
    return JobConfig(
        mode=mode,
        defs=load_defs(defs_raw),
        params=params,
        seed=raw.get("seed"),
        out_dir=Path(out.get("dir", ".")),
        name=out.get("name", "roundabout"),
        svg=bool(out.get("svg", False)),
    )


def _generate(mode: str, defs, params):
    if mode == "turbo":
        from .turbo import generate_turbo

        return generate_turbo(defs, params, validate=False)
    from .classic import generate_classic

    return generate_classic(defs, params, validate=False)


def _write_text(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _build_one(mode, defs, params, out_base: Path, svg: bool) -> tuple[int, str]:
    """Generate, validate and write one roundabout; returns (exit code, summary)."""
    from .odr.validate import validate_links
    from .odr.writer import emit_opendrive
    from .svg import network_svg

    try:
        net = _generate(mode, defs, params)
    except (InfeasibleLayoutError, DegenerateInputError) as exc:
        return EXIT_INFEASIBLE, f"infeasible: {exc}"
    violations = validate_links(net, params.clearance)
    _write_text(out_base.with_suffix(".xodr"), emit_opendrive(net, validate=False))
    if svg:
        _write_text(out_base.with_suffix(".svg"), network_svg(net))
    if violations:
        return EXIT_INVALID, f"{len(violations)} violation(s): " + "; ".join(str(v) for v in violations[:5])
    return EXIT_OK, f"valid: {len(net.roads)} roads, {len(net.junctions)} junctions"


# --------------------------------------------------------------------------
# subcommands


def cmd_generate(args) -> int:
    cfg = load_config(args.config)
    if args.mode:
        cfg.mode = args.mode
    cfg.params.update(parse_overrides(args.set))
    if args.out:
        cfg.out_dir = Path(args.out)
    if args.name:
        cfg.name = args.name
    cfg.svg = cfg.svg or args.svg
    seed = resolve_seed(args.seed, cfg.seed)
    params = cfg.generation_params(seed)
    code, summary = _build_one(cfg.mode, cfg.defs, params, cfg.out_dir / cfg.name, cfg.svg)
    print(f"{cfg.name}: {summary}")
    return code


def cmd_random(args) -> int:
    from .era import random_road_defs

    if args.count < 1:
        raise ConfigError("--count must be at least 1")
    if args.n_ways < 3:
        raise ConfigError("--n-ways must be at least 3")
    seed = resolve_seed(args.seed)
    cls = TurboParams if args.mode == "turbo" else GenerationParams
    overrides = parse_overrides(args.set)
    build_params(cls, overrides, seed)  # reject bad overrides before any work
    out = Path(args.out)
    instances = []
    worst = EXIT_OK
    for k in range(args.count):
        inst_seed = seed + k
        name = f"{args.mode}_{args.n_ways}way_{k:03d}"
        defs = random_road_defs(args.n_ways, inst_seed)
        params = build_params(cls, overrides, inst_seed)
        code, summary = _build_one(args.mode, defs, params, out / name, args.svg)
        worst = max(worst, code)
        if code:
            log.error("%s: %s", name, summary)
        print(f"{name}: {summary}")
        instances.append(
            {
                "instance_id": name,
                "file": f"{name}.xodr" if code != EXIT_INFEASIBLE else None,
                "layout_seed": inst_seed,
                "noise_seed": inst_seed,
                "status": "ok" if code == EXIT_OK else summary,
                "defs": [d.to_dict() for d in defs],
            }
        )
    manifest = {"mode": args.mode, "n_ways": args.n_ways, "count": args.count, "seed": seed, "instances": instances}
    _write_text(out / "manifest.json", _json_text(manifest))
    return worst


def _xodr_inputs(paths) -> list[Path]:
    files = []
    for p in map(Path, paths):
        files.extend(sorted(p.glob("*.xodr")) if p.is_dir() else [p])
    return files


def cmd_era(args) -> int:
    from .era import BatchItem, analyse_network, era_batch, fixed_batch, random_batch
    from .odr.reader import read_opendrive

    seed = resolve_seed(args.seed)
    cls = TurboParams if args.mode == "turbo" else GenerationParams
    overrides = parse_overrides(args.set)
    base = build_params(cls, overrides, seed)
    items: list[BatchItem] = []
    for batch in args.random or []:
        try:
            n, count = (int(v) for v in batch.split(":"))
        except ValueError:
            raise ConfigError(f"--random expects N_WAYS:COUNT, got {batch!r}") from None
        if n < 3 or count < 0:
            raise ConfigError(f"--random {batch}: need N_WAYS >= 3 and COUNT >= 0")
        items += random_batch(n, count, seed + 1000 * n, base, args.mode)
    if args.fixed:
        cfg = load_config(args.fixed)
        lo, _, hi = (args.seeds or "0:30").partition(":")
        try:
            seeds = range(int(lo), int(hi))
        except ValueError:
            raise ConfigError(f"--seeds expects START:STOP, got {args.seeds!r}") from None
        items += fixed_batch(cfg.defs, seeds, build_params(cls, {**cfg.params, **overrides}, seed), args.mode)

    report = era_batch(items, step=args.step)
    for f in _xodr_inputs(args.inputs or []):
        try:
            net = read_opendrive(f)
            report.instances.append(analyse_network(net, None, f.stem, len(net.roads_by_role("incident")), args.step))
        except (OSError, OpenDriveParseError, ValueError, RoundaboutError) as exc:
            report.failures.append({"instance_id": f.name, "error": type(exc).__name__, "message": str(exc)})
            log.error("%s: %s", f, exc)
    report.instances.sort(key=lambda i: i.instance_id)

    out = Path(args.out)
    paths = report.write(out)
    if args.svg and report.instances:
        from .svg import superposition_svg

        _write_text(out / "era_superposition.svg", superposition_svg([i.series for i in report.instances]))
    print(f"analysed {len(report.instances)} roundabout(s), {len(report.failures)} failure(s) -> {paths['report']}")
    for fail in report.failures:
        print(f"failed: {fail['instance_id']}: {fail['message']}")
    return EXIT_PARTIAL if report.failures else EXIT_OK


def cmd_preview(args) -> int:
    from .odr.reader import read_opendrive
    from .svg import network_svg

    try:
        net = read_opendrive(args.input)
    except OSError as exc:
        raise ConfigError(f"cannot read {args.input}: {exc.strerror}") from None
    out = Path(args.out) if args.out else Path(args.input).with_suffix(".svg")
    _write_text(out, network_svg(net))
    print(f"wrote {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="roundabouts", description="Procedural roundabout generator (OpenDRIVE output).")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, mode_default=None):
        sp.add_argument("--mode", choices=MODES, default=mode_default)
        sp.add_argument("--seed", type=int, default=None, help=f"overrides ${SEED_ENV}")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a generation parameter")

    g = sub.add_parser("generate", help="generate one roundabout from a JSON config")
    g.add_argument("config")
    common(g)
    g.add_argument("--out", help="output directory")
    g.add_argument("--name", help="output file stem")
    g.add_argument("--svg", action="store_true", help="also write an SVG preview")
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("random", help="generate a batch of random roundabouts")
    r.add_argument("--n-ways", type=int, required=True)
    r.add_argument("--count", type=int, default=20)
    common(r, "classic")
    r.add_argument("--out", default="random_out")
    r.add_argument("--svg", action="store_true")
    r.set_defaults(func=cmd_random)

    e = sub.add_parser("era", help="expressive range analysis")
    e.add_argument("inputs", nargs="*", help=".xodr files or directories")
    e.add_argument("--random", action="append", metavar="N_WAYS:COUNT")
    e.add_argument("--fixed", metavar="CONFIG", help="one layout, many noise seeds")
    e.add_argument("--seeds", metavar="START:STOP", help="seed range for --fixed (default 0:30)")
    e.add_argument("--step", type=float, default=0.5)
    common(e, "classic")
    e.add_argument("--out", default="era_out")
    e.add_argument("--svg", action="store_true", help="write the normalised-ring superposition")
    e.set_defaults(func=cmd_era)

    v = sub.add_parser("preview", help="render an .xodr file as SVG")
    v.add_argument("input")
    v.add_argument("--out")
    v.set_defaults(func=cmd_preview)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, OpenDriveParseError, EmptyNetworkError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidationFailedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except InfeasibleLayoutError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
