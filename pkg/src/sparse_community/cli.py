"""Command-line driver.

Parameters are flat ``key=value`` pairs, given on the command line or in a
``--config`` file (one pair per line, ``#`` starts a comment). A JSON run
manifest written by an earlier run is also accepted as a config, which
replays that run. Every command that writes files also writes
``<output>.manifest.json`` next to the first output.

Exit codes: 2 invalid parameters or unparsable input, 3 I/O failure,
4 computation refused as infeasible, 5 invariant failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from .graphs import GraphFormatError, gen_er, gen_planted, read_edgelist, write_edgelist
from .inference import (
    TestSpec, boundary_curves, calibrate, diagram, ktree_default_k,
    write_curves_csv, write_diagram_csv,
)
from .likelihood import (
    InvariantError, TruncationEvent, exhaustive_moments, forest_cap, risk_lower_bound,
)
from .statistics import FeasibilityError, evaluate

EXIT_PARAMS, EXIT_IO, EXIT_FEASIBILITY, EXIT_INVARIANT = 2, 3, 4, 5


class ParamError(ValueError):
    pass


class Params:
    """String-valued parameters with typed accessors."""

    def __init__(self, raw: dict[str, str]):
        self.raw = dict(raw)

    def _get(self, key: str, default):
        if key in self.raw:
            return self.raw[key]
        if default is _REQUIRED:
            raise ParamError(f"missing required key {key!r}")
        return default

    def str(self, key: str, default=None):
        return self._get(key, _REQUIRED if default is None else default)

    def int(self, key: str, default=None) -> int:
        v = self._get(key, _REQUIRED if default is None else default)
        try:
            return int(v)
        except (TypeError, ValueError):
            raise ParamError(f"{key} must be an integer, got {v!r}") from None

    def float(self, key: str, default=None) -> float:
        v = self._get(key, _REQUIRED if default is None else default)
        try:
            return float(v)
        except (TypeError, ValueError):
            raise ParamError(f"{key} must be a number, got {v!r}") from None

    def floats(self, key: str) -> list[float]:
        v = self._get(key, _REQUIRED)
        try:
            return [float(x) for x in str(v).split(",") if x.strip()]
        except ValueError:
            raise ParamError(f"{key} must be a comma-separated list of numbers") from None

    def has(self, key: str) -> bool:
        return key in self.raw


_REQUIRED = object()


def parse_pairs(items) -> dict[str, str]:
    out = {}
    for item in items:
        if "=" not in item:
            raise ParamError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def load_config(path: str) -> dict[str, str]:
    text = Path(path).read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParamError(f"bad JSON config: {exc}") from None
        params = data.get("params", data)
        return {str(k): str(v) for k, v in params.items()}
    lines = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    return parse_pairs(lines)


def gather_params(args) -> Params:
    raw = {}
    if args.config:
        raw.update(load_config(args.config))
    raw.update(parse_pairs(args.pairs))
    return Params(raw)


def sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(command: str, params: Params, outputs: list, seed=None) -> Path:
    manifest = {
        "command": command,
        "params": dict(sorted(params.raw.items())),
        "seed": seed,
        "version": __version__,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "outputs": {str(p): sha256(p) for p in outputs},
    }
    path = Path(str(outputs[0]) + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _probability(params: Params, N: int, p_key: str, lam_key: str, scale: int) -> float:
    if params.has(p_key):
        return params.float(p_key)
    if params.has(lam_key):
        return params.float(lam_key) / scale
    raise ParamError(f"need {p_key} or {lam_key}")


def _format_value(name: str, value: float) -> str:
    if float(value).is_integer() and name != "broad_scan":
        return str(int(value))
    return repr(float(value))


def parse_test(text: str) -> tuple[str, dict[str, str]]:
    """``name`` or ``name:key=value:key=value``."""
    parts = text.strip().split(":")
    return parts[0], parse_pairs(parts[1:])


def _typed(params: dict[str, str]) -> dict:
    out = {}
    for k, v in params.items():
        try:
            out[k] = int(v)
        except ValueError:
            try:
                out[k] = float(v)
            except ValueError:
                out[k] = v
    return out


# --- commands -------------------------------------------------------------

def cmd_generate(params: Params, args) -> int:
    N = params.int("N")
    seed = params.int("seed", "0")
    out = Path(args.out or params.str("out"))
    if params.has("n"):
        n = params.int("n")
        p0 = _probability(params, N, "p0", "lambda0", N)
        p1 = _probability(params, N, "p1", "lambda1", n)
        inst = gen_planted(N, p0, n, p1, seed)
        g = inst.graph
        community = out.with_name(out.name + ".community")
    else:
        p = params.float("p") if params.has("p") else _probability(params, N, "p0", "lambda0", N)
        g = gen_er(N, p, seed)
        community = None
    write_edgelist(g, out)
    outputs = [out]
    if community is not None:
        community.write_text(" ".join(map(str, inst.community.tolist())) + "\n")
        outputs.append(community)
    write_manifest("generate", params, outputs, seed)
    return 0


def cmd_stat(params: Params, args) -> int:
    try:
        g = read_edgelist(args.file)
    except GraphFormatError as exc:
        raise ParamError(str(exc)) from None
    value = evaluate(args.name, g, **_typed(params.raw))
    text = _format_value(args.name, value)
    print(text)
    if args.record:
        record = {"file": str(args.file), "sha256": sha256(args.file), "statistic": args.name,
                  "params": params.raw, "value": value, "version": __version__}
        Path(args.record).write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")
    return 0


def _split_stat_params(params: Params, reserved: set[str]) -> dict:
    return _typed({k: v for k, v in params.raw.items() if k not in reserved})


def cmd_calibrate(params: Params, args) -> int:
    N = params.int("N")
    p0 = _probability(params, N, "p0", "lambda0", N)
    reserved = {"test", "N", "p0", "lambda0", "level", "R", "seed", "out"}
    spec = TestSpec(params.str("test"), _split_stat_params(params, reserved))
    res = calibrate(spec, N, p0, params.float("level", "0.05"), params.int("R", "1000"),
                    params.int("seed", "0"), args.threads)
    result = {"test": spec.label, "t": res.t, "level": res.level, "achieved": res.achieved,
              "R": res.R, "seed": res.seed}
    text = json.dumps(result, indent=2, sort_keys=True) + "\n"
    out = args.out or params.raw.get("out")
    if out:
        Path(out).write_text(text)
        write_manifest("calibrate", params, [out], res.seed)
    else:
        sys.stdout.write(text)
    return 0


def _resolve_spec(name: str, raw: dict[str, str], N: int, n: int, lam0: float,
                  lam1: float) -> TestSpec:
    p = _typed(raw)
    if name == "broad_scan":
        p.setdefault("n", n)
    if name == "ktree" and "k" not in p:
        p["k"] = ktree_default_k(N, n, lam0, lam1, p.pop("c", None))
    return TestSpec(name, p)


def cmd_diagram(params: Params, args) -> int:
    N, n = params.int("N"), params.int("n")
    lambda0s, lambda1s = params.floats("lambda0"), params.floats("lambda1")
    tests = [parse_test(t) for t in params.str("tests").split(";") if t.strip()]
    level = params.float("level", "0.05")
    R, seed = params.int("R", "1000"), params.int("seed", "0")
    out = Path(args.out or params.str("out"))
    specs = [lambda l0, l1, name=name, raw=raw: _resolve_spec(name, raw, N, n, l0, l1)
             for name, raw in tests]
    for name, raw in tests:
        _resolve_spec(name, raw, N, n, lambda0s[0], lambda1s[0])  # fail early on bad tests
    full = diagram(N, n, lambda0s, lambda1s, specs, level, R, seed, args.threads)
    write_diagram_csv(full, out)
    outputs = [out]
    if params.has("curves"):
        curves_path = Path(params.str("curves"))
        write_curves_csv(boundary_curves(N, n, lambda0s), curves_path)
        outputs.append(curves_path)
    write_manifest("diagram", params, outputs, seed)
    return 0


def cmd_curves(params: Params, args) -> int:
    N, n = params.int("N"), params.int("n")
    grid = params.floats("lambda0") if params.has("lambda0") else None
    out = Path(args.out or params.str("out"))
    write_curves_csv(boundary_curves(N, n, grid), out)
    write_manifest("curves", params, [out])
    return 0


def _truncation(params: Params, n: int, lambda1: float) -> TruncationEvent:
    kind = params.str("trunc", "none")
    if kind in ("none", "forest"):
        return TruncationEvent(kind)
    if kind == "forest_with_cap":
        if params.has("cap"):
            return TruncationEvent.forest_with_cap(params.float("cap"))
        return TruncationEvent.forest_with_cap(
            forest_cap(n, lambda1, params.float("c", "0.1")))
    if kind == "edge_cap_profile":
        prof = parse_pairs(x.replace(":", "=") for x in params.str("profile").split(","))
        return TruncationEvent.edge_cap_profile({int(k): int(v) for k, v in prof.items()})
    raise ParamError(f"unknown truncation {kind!r}")


def _jsonable(x):
    return float(x)


def cmd_lrlab(params: Params, args) -> int:
    N, n = params.int("N"), params.int("n")
    exact = params.str("exact", "false").lower() in ("1", "true", "yes")
    p0 = Fraction(params.str("p0")) if exact else params.float("p0")
    p1 = Fraction(params.str("p1")) if exact else params.float("p1")
    trunc = _truncation(params, n, n * float(p1))
    m = exhaustive_moments(N, n, p0, p1, trunc, exact=exact)
    bound = risk_lower_bound(float(m.E0_Lt), float(m.E0_Lt2))
    result = {
        "params": params.raw,
        "truncation": trunc.kind,
        "E0_L": _jsonable(m.E0_L),
        "E0_L2": _jsonable(m.E0_L2),
        "E0_Lt": _jsonable(m.E0_Lt),
        "E0_Lt2": _jsonable(m.E0_Lt2),
        "P_S_Gamma": _jsonable(m.P_S_Gamma),
        "risk_lower_bound": bound,
    }
    if exact:
        result["exact"] = {k: str(getattr(m, k))
                           for k in ("E0_L", "E0_L2", "E0_Lt", "E0_Lt2", "P_S_Gamma")}
        if m.E0_L != 1:
            raise InvariantError(f"E0[L] = {m.E0_L}, expected exactly 1")
    text = json.dumps(result, indent=2, sort_keys=True) + "\n"
    out = args.out or params.raw.get("out")
    if out:
        Path(out).write_text(text)
        write_manifest("lrlab", params, [out])
    else:
        sys.stdout.write(text)
    return 0


def cmd_verify(params: Params, args) -> int:
    from .verify import run_battery

    results = run_battery(params.int("seed", "0"))
    passed = 0
    for name, ok, detail in results:
        passed += ok
        print(f"{'PASS' if ok else 'FAIL'} {name}" + (f": {detail}" if detail else ""))
    print(f"passed {passed}/{len(results)}")
    return 0 if passed == len(results) else EXIT_INVARIANT


COMMANDS = {
    "generate": cmd_generate,
    "stat": cmd_stat,
    "calibrate": cmd_calibrate,
    "diagram": cmd_diagram,
    "curves": cmd_curves,
    "lrlab": cmd_lrlab,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparse-community",
        description="Planted dense subgraph detection experiments.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        if name == "stat":
            p.add_argument("file", help="edge-list file")
            p.add_argument("name", help="statistic name")
            p.add_argument("--record", help="write a JSON record of the result here")
        p.add_argument("pairs", nargs="*", metavar="key=value")
        p.add_argument("--config", help="key=value file or JSON manifest")
        p.add_argument("-o", "--out", help="output path")
        p.add_argument("--threads", type=int, default=1)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        params = gather_params(args)
        if args.threads < 1:
            raise ParamError("--threads must be at least 1")
        return COMMANDS[args.command](params, args)
    except FeasibilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FEASIBILITY
    except InvariantError as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMS


if __name__ == "__main__":
    sys.exit(main())
