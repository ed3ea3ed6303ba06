"""Reproducible command-line experiment runs with JSON/CSV output.

Every subcommand resolves its configuration from flags, an optional JSON
config file, and defaults (in that precedence), echoes the resolved values
into the output metadata, and writes deterministic bytes for a given
(command, config, seed) triple.  Exit codes: 0 success, 2 usage or input
error, 3 scientific anomaly, 4 numerical-tolerance failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .core import (
    EPS_EQ,
    InfeasibleError,
    SystemMismatchError,
    ValidationError,
    classical_system,
    composite_system,
    ket_state,
    phase_unitary,
    projector_effect,
    quantum_system,
)
from .paths import (
    NotAPhaseError,
    PathRankError,
    basis_experiment,
    detection_order,
)
from .interference import (
    VERDICT_ABSENT,
    VERDICT_PRESENT,
    interference_pattern_sweep,
    second_order_witness,
    third_order_scan_quantum,
)
from .control import (
    anyonic_exchange_unitary,
    build_controlled,
    classify_particle,
    exchange_experiment,
    extract_kickback,
    swap_exchange_unitary,
)
from .oracle import build_oracle, run_deutsch
from .serialize import complex_matrix_from_dict, state_from_dict

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_ANOMALY = 3
EXIT_TOLERANCE = 4

SEED_ENV_VAR = "INTERFERLAB_SEED"

_LIBRARY_ERRORS = (
    ValidationError,
    SystemMismatchError,
    NotAPhaseError,
    PathRankError,
    InfeasibleError,
)


class CliError(Exception):
    """Error carrying a CLI exit code."""

    def __init__(self, message: str, code: int = EXIT_USAGE) -> None:
        super().__init__(message)
        self.code = code


_COMMON_OPTIONS: dict[str, tuple] = {
    "theory": (str, "quantum"),
    "dim": (int, None),
    "paths": (int, None),
    "trials": (int, None),
    "seed": (int, None),
    "eps_eq": (float, EPS_EQ),
    "format": (str, None),
    "out": (str, None),
    "config": (str, None),
}

_COMMAND_OPTIONS: dict[str, dict[str, tuple]] = {
    "mz-sweep": {
        "grid_points": (int, 200),
        "angle_min": (float, 0.0),
        "angle_max": (float, math.pi),
    },
    "sorkin": {"order": (int, None)},
    "kickback": {"unitaries": (str, None)},
    "deutsch": {"function": (str, None)},
    "exchange": {"state": (str, None)},
    "phase-order": {"angles": (str, None)},
}

_FORMATS = {
    "mz-sweep": ("csv", "json"),
    "sorkin": ("json", "csv"),
    "kickback": ("json",),
    "deutsch": ("json",),
    "exchange": ("json",),
    "phase-order": ("json",),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="interferlab",
        description="Path-experiment, interference, kick-back, and oracle runs.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--theory", help="backend: quantum or classical")
        sp.add_argument("--dim", type=int, help="system dimension")
        sp.add_argument("--paths", type=int, help="number of paths")
        sp.add_argument("--trials", type=int, help="number of sampled trials")
        sp.add_argument("--seed", type=int, help=f"rng seed (default: ${SEED_ENV_VAR})")
        sp.add_argument("--eps-eq", type=float, help="support/equality tolerance")
        sp.add_argument("--format", help="output format: json or csv")
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--config", help="JSON config file (flags take precedence)")

    mz = sub.add_parser("mz-sweep", help="two-path pattern over a phase grid")
    mz.add_argument("--grid-points", type=int, help="number of grid points")
    mz.add_argument("--angle-min", type=float, help="first grid angle")
    mz.add_argument("--angle-max", type=float, help="last grid angle")
    common(mz)

    so = sub.add_parser("sorkin", help="interference-order scan (order 2 or 3)")
    so.add_argument("--order", type=int, help="interference order to scan")
    common(so)

    kb = sub.add_parser("kickback", help="extract the kicked phase of branch unitaries")
    kb.add_argument(
        "--unitaries",
        help="JSON file with branch unitaries (row-major [re, im] entries)",
    )
    common(kb)

    de = sub.add_parser("deutsch", help="single-query parity of a two-bit function")
    de.add_argument("--function", help="function table as a bit string, e.g. 01")
    common(de)

    ex = sub.add_parser("exchange", help="classify exchange statistics of a state")
    ex.add_argument("--state", help="sym, antisym, or anyon:THETA")
    common(ex)

    po = sub.add_parser("phase-order", help="detection order of a diagonal phase")
    po.add_argument("--angles", help="comma-separated phase angles, e.g. 0,0,1.5")
    common(po)

    return parser


def _resolve_config(command: str, args: argparse.Namespace) -> dict:
    """Merge flags over config-file values over defaults."""
    spec = {**_COMMON_OPTIONS, **_COMMAND_OPTIONS[command]}
    file_values: dict = {}
    config_path = args.config
    if config_path is not None:
        try:
            with open(config_path, encoding="utf-8") as fh:
                file_values = json.load(fh)
        except OSError as err:
            raise CliError(f"cannot read config file: {err}") from err
        except json.JSONDecodeError as err:
            raise CliError(f"config file is not valid JSON: {err}") from err
        if not isinstance(file_values, dict):
            raise CliError("config file must hold a JSON object")
        unknown = set(file_values) - set(spec)
        if unknown:
            raise CliError(
                f"unknown config keys {sorted(unknown)}; allowed: {sorted(spec)}"
            )
    resolved = {}
    for key, (cast, default) in spec.items():
        value = getattr(args, key, None)
        if value is None and key in file_values and file_values[key] is not None:
            try:
                value = cast(file_values[key])
            except (TypeError, ValueError) as err:
                raise CliError(f"config key {key!r}: {err}") from err
        if value is None:
            value = default
        resolved[key] = value
    resolved["config"] = config_path
    if resolved["seed"] is None:
        env = os.environ.get(SEED_ENV_VAR)
        if env is not None:
            try:
                resolved["seed"] = int(env)
            except ValueError as err:
                raise CliError(f"{SEED_ENV_VAR} is not an integer: {env!r}") from err
    _validate_common(command, resolved)
    return resolved


def _validate_common(command: str, cfg: dict) -> None:
    if cfg["theory"] not in ("quantum", "classical"):
        raise CliError(f"unknown theory {cfg['theory']!r}; use quantum or classical")
    if cfg["dim"] is not None and cfg["dim"] < 2:
        raise CliError(f"dim must be >= 2, got {cfg['dim']}")
    if cfg["paths"] is not None and cfg["paths"] < 2:
        raise CliError(f"paths must be >= 2, got {cfg['paths']}")
    if cfg["trials"] is not None and cfg["trials"] < 1:
        raise CliError(f"trials must be >= 1, got {cfg['trials']}")
    if cfg["eps_eq"] is not None and cfg["eps_eq"] <= 0:
        raise CliError(f"eps-eq must be positive, got {cfg['eps_eq']}")
    allowed = _FORMATS[command]
    if cfg["format"] is None:
        cfg["format"] = allowed[0]
    if cfg["format"] not in allowed:
        raise CliError(
            f"{command} supports format {', '.join(allowed)}; got {cfg['format']!r}"
        )


def _require_seed(cfg: dict, command: str) -> int:
    if cfg["seed"] is None:
        raise CliError(
            f"{command} is randomized: pass --seed or set ${SEED_ENV_VAR}"
        )
    return cfg["seed"]


def _pin(cfg: dict, key: str, value: int, what: str) -> None:
    """Fill a derived config value, rejecting a conflicting explicit one."""
    if cfg[key] is not None and cfg[key] != value:
        raise CliError(f"{what} implies {key}={value}, got {key}={cfg[key]}")
    cfg[key] = value


def _metadata(command: str, cfg: dict) -> dict:
    """Document skeleton carrying the resolved configuration for provenance."""
    return {"metadata": {"command": command, "config": {k: cfg[k] for k in sorted(cfg)}}}


def _json_document(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _csv_document(header: list[str], rows: list[list[float]]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(format(v, ".17g") for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _run_mz_sweep(cfg: dict) -> tuple[str, int]:
    if cfg["theory"] != "quantum":
        raise CliError(
            "the classical backend has no nontrivial phase group to sweep"
        )
    _pin(cfg, "dim", 2, "mz-sweep")
    _pin(cfg, "paths", 2, "mz-sweep")
    if cfg["grid_points"] < 1:
        raise CliError(f"grid-points must be >= 1, got {cfg['grid_points']}")
    system = quantum_system(2)
    experiment = basis_experiment(system, epsilon_support=cfg["eps_eq"])
    uniform = np.array([1.0, 1.0]) / math.sqrt(2.0)
    state = ket_state(system, uniform)
    effect = projector_effect(system, uniform)
    deltas = np.linspace(cfg["angle_min"], cfg["angle_max"], cfg["grid_points"])
    grid = [(0.0, float(d)) for d in deltas]
    table = interference_pattern_sweep(state, effect, experiment, grid)
    rows = [[float(row[1]), float(row[2])] for row in table]
    if cfg["format"] == "csv":
        return _csv_document(["delta_phi", "probability"], rows), EXIT_OK
    payload = _metadata("mz-sweep", cfg)
    payload["rows"] = [
        {"delta_phi": dphi, "probability": prob} for dphi, prob in rows
    ]
    return _json_document(payload), EXIT_OK


def _run_sorkin(cfg: dict) -> tuple[str, int]:
    order = cfg["order"]
    if order not in (2, 3):
        raise CliError(f"order must be 2 or 3, got {order}")
    if order == 3 and cfg["theory"] != "quantum":
        raise CliError("the third-order scan runs on the quantum backend only")
    _pin(cfg, "dim", order, f"order {order}")
    _pin(cfg, "paths", order, f"order {order}")
    if cfg["trials"] is None:
        cfg["trials"] = 256 if order == 2 else 1000
    randomized = cfg["theory"] == "quantum"
    seed = _require_seed(cfg, "sorkin") if randomized else (cfg["seed"] or 0)
    make = quantum_system if cfg["theory"] == "quantum" else classical_system
    experiment = basis_experiment(make(order), epsilon_support=cfg["eps_eq"])
    if order == 2:
        report = second_order_witness(experiment, seed=seed, phase_samples=cfg["trials"])
    else:
        report = third_order_scan_quantum(experiment, trials=cfg["trials"], seed=seed)
    expected = VERDICT_PRESENT if (order == 2 and randomized) else VERDICT_ABSENT
    if report.verdict == expected:
        code = EXIT_OK
    elif report.verdict in (VERDICT_PRESENT, VERDICT_ABSENT):
        code = EXIT_ANOMALY
    else:
        code = EXIT_TOLERANCE
    if cfg["format"] == "csv":
        n_angles = len(report.samples[0].angles) if report.samples else 0
        header = [f"theta_{i}" for i in range(n_angles)] + ["lhs", "rhs", "residual"]
        rows = [
            [*s.angles, s.lhs, s.rhs, s.residual] for s in report.samples
        ]
        return _csv_document(header, rows), code
    payload = _metadata("sorkin", cfg)
    payload.update(report.to_json_dict())
    return _json_document(payload), code


def _run_kickback(cfg: dict) -> tuple[str, int]:
    if cfg["theory"] != "quantum":
        raise CliError("kick-back extraction runs on the quantum backend only")
    if cfg["unitaries"] is None:
        raise CliError("kickback needs --unitaries FILE")
    seed = _require_seed(cfg, "kickback")
    try:
        with open(cfg["unitaries"], encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as err:
        raise CliError(f"cannot read unitaries file: {err}") from err
    except json.JSONDecodeError as err:
        raise CliError(f"unitaries file is not valid JSON: {err}") from err
    if not isinstance(data, dict) or "unitaries" not in data:
        raise CliError('unitaries file must hold {"unitaries": [matrix, ...]}')
    try:
        mats = [complex_matrix_from_dict(m) for m in data["unitaries"]]
    except _LIBRARY_ERRORS as err:
        raise CliError(f"bad unitary descriptor: {err}") from err
    if len(mats) < 2:
        raise CliError(f"need at least two branch unitaries, got {len(mats)}")
    dims = {m.shape for m in mats}
    if len(dims) != 1 or any(s[0] != s[1] for s in dims):
        raise CliError(f"branch unitaries must share one square shape, got {sorted(dims)}")
    d_target = mats[0].shape[0]
    _pin(cfg, "dim", d_target, "the unitaries file")
    _pin(cfg, "paths", len(mats), "the unitaries file")
    fixed = None
    if "fixed_state" in data and data["fixed_state"] is not None:
        try:
            fixed = state_from_dict(data["fixed_state"])
        except _LIBRARY_ERRORS as err:
            raise CliError(f"bad fixed-state descriptor: {err}") from err
    try:
        controlled = build_controlled(mats, quantum_system(d_target), seed=seed)
    except _LIBRARY_ERRORS as err:
        raise CliError(f"cannot build the controlled transformation: {err}") from err
    try:
        result = extract_kickback(controlled, fixed, seed=seed)
    except InfeasibleError as err:
        raise CliError(str(err)) from err
    except ValidationError as err:
        raise CliError(str(err), EXIT_TOLERANCE) from err
    payload = _metadata("kickback", cfg)
    payload.update(result.to_json_dict())
    return _json_document(payload), EXIT_OK


def _run_deutsch(cfg: dict) -> tuple[str, int]:
    if cfg["theory"] != "quantum":
        raise CliError("oracle protocols run on the quantum backend only")
    bits = cfg["function"]
    if bits is None:
        raise CliError("deutsch needs --function BITS (e.g. --function 01)")
    if len(bits) != 2 or set(bits) - {"0", "1"}:
        raise CliError(f"function must be two bits like 01, got {bits!r}")
    _pin(cfg, "dim", 2, "a two-bit function")
    _pin(cfg, "paths", 2, "a two-bit function")
    oracle = build_oracle(tuple(int(b) for b in bits))
    result = run_deutsch(oracle)
    payload = _metadata("deutsch", cfg)
    payload["parity"] = result.parity
    payload["queries"] = result.queries
    payload["prob"] = float(result.probability)
    return _json_document(payload), EXIT_OK


def _exchange_state_spec(spec: str) -> tuple[str, float | None]:
    lowered = spec.strip().lower()
    if lowered in ("sym", "antisym"):
        return lowered, None
    if lowered.startswith("anyon:"):
        try:
            return "anyon", float(lowered.partition(":")[2])
        except ValueError as err:
            raise CliError(f"bad anyon angle in {spec!r}: {err}") from err
    raise CliError(f"state must be sym, antisym, or anyon:THETA, got {spec!r}")


def _run_exchange(cfg: dict) -> tuple[str, int]:
    if cfg["theory"] != "quantum":
        raise CliError("exchange experiments run on the quantum backend only")
    if cfg["state"] is None:
        raise CliError("exchange needs --state sym|antisym|anyon:THETA")
    kind, injected = _exchange_state_spec(cfg["state"])
    seed = _require_seed(cfg, "exchange")
    if cfg["dim"] is None:
        cfg["dim"] = 2
    _pin(cfg, "paths", 2, "a two-branch exchange")
    d = cfg["dim"]
    factor = quantum_system(d)
    system = composite_system(factor, factor)
    amplitudes = np.zeros(d * d, dtype=complex)
    amplitudes[0 * d + 1] = 1.0 / math.sqrt(2.0)
    amplitudes[1 * d + 0] = (-1.0 if kind == "antisym" else 1.0) / math.sqrt(2.0)
    state = ket_state(system, amplitudes)
    if kind == "anyon":
        op = anyonic_exchange_unitary(state, injected)
    else:
        op = swap_exchange_unitary(d)
    try:
        theta = exchange_experiment(state, op, seed=seed)
    except InfeasibleError as err:
        raise CliError(str(err)) from err
    except ValidationError as err:
        raise CliError(str(err), EXIT_TOLERANCE) from err
    particle = classify_particle(theta)
    payload = _metadata("exchange", cfg)
    payload["class"] = particle.kind.capitalize()
    payload["theta"] = float(particle.theta)
    return _json_document(payload), EXIT_OK


def _run_phase_order(cfg: dict) -> tuple[str, int]:
    if cfg["theory"] != "quantum":
        raise CliError("phase-order builds a quantum diagonal phase")
    if cfg["angles"] is None:
        raise CliError("phase-order needs --angles LIST (e.g. --angles 0,0,1.5)")
    try:
        angles = [float(a) for a in str(cfg["angles"]).split(",")]
    except ValueError as err:
        raise CliError(f"bad angle list {cfg['angles']!r}: {err}") from err
    if len(angles) < 2:
        raise CliError(f"need at least two angles, got {len(angles)}")
    _pin(cfg, "dim", len(angles), "the angle list")
    _pin(cfg, "paths", len(angles), "the angle list")
    system = quantum_system(len(angles))
    experiment = basis_experiment(system, epsilon_support=cfg["eps_eq"])
    transformation = phase_unitary(system, angles)
    order = detection_order(transformation, experiment)
    payload = _metadata("phase-order", cfg)
    payload["angles"] = angles
    payload["order"] = order
    return _json_document(payload), EXIT_OK


_RUNNERS = {
    "mz-sweep": _run_mz_sweep,
    "sorkin": _run_sorkin,
    "kickback": _run_kickback,
    "deutsch": _run_deutsch,
    "exchange": _run_exchange,
    "phase-order": _run_phase_order,
}


def _emit(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
        return
    try:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as err:
        raise CliError(f"cannot write output file: {err}") from err


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return int(err.code or 0)
    try:
        cfg = _resolve_config(args.command, args)
        text, code = _RUNNERS[args.command](cfg)
        _emit(text, cfg["out"])
        return code
    except CliError as err:
        print(f"interferlab: error: {err}", file=sys.stderr)
        return err.code
    except _LIBRARY_ERRORS as err:
        print(f"interferlab: error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
