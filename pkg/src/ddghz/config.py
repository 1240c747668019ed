"""Run configuration, register ingestion, and result archives.

A run is described by a JSON document naming the register, the scheme, the
search tolerances, and output plumbing. Validation is total: every problem
in the document is collected and reported at once, before any computation
starts. Archives are directories of JSON + CSV files written
deterministically (sorted keys, fixed float formatting, no timestamps
unless one is passed in), so identical configs produce byte-identical
output trees.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import ConfigError
from .metrics import MetricsReport
from .search import DEFAULT_RANK_WEIGHTS, Case, SearchTolerances
from .spinmodel import NuclearSpin, Register, SequenceUnit

TOOL_NAME = "ddghz"
TOOL_VERSION = "0.1.0"

DEFAULT_OMEGA_LARMOR_KHZ = 431.94
SCHEMES = ("sequential", "multispin")

# tolerance fields exposed in config files; time-valued ones carry a _us
# suffix and are converted to seconds on load
_TOLERANCE_INT_KEYS = (
    "ghz_size",
    "k_max",
    "N_truncation",
    "n_maxima",
    "t_keep",
    "enumeration_options",
    "combo_cap",
    "beam_width",
)
_TOLERANCE_FLOAT_KEYS = (
    "gate_error_tol",
    "target_one_tangle_tol",
    "unwanted_one_tangle_tol",
)
_TOLERANCE_TIME_KEYS_US = ("gate_time_tol_us", "t_window_us", "t_step_us")


def format_float(x: float) -> str:
    """Fixed 12-significant-digit rendering used in all CSV output."""
    return f"{float(x):.12g}"


def unit_from_name(name: str) -> SequenceUnit:
    """Sequence unit from its config name: "cpmg" or "udd<n>" (e.g. udd4)."""
    if name == "cpmg":
        return SequenceUnit.cpmg()
    m = re.fullmatch(r"udd(\d+)", name)
    if m:
        n = int(m.group(1))
        if n < 1:
            raise ConfigError(f"udd order must be >= 1, got {n}")
        return SequenceUnit.udd(n)
    raise ConfigError(f"unknown sequence unit {name!r} (expected 'cpmg' or 'udd<n>')")


def unit_name(unit: SequenceUnit) -> str:
    return unit.kind


@dataclass(frozen=True)
class RunConfig:
    """Validated inputs of one CLI run."""

    register_path: "Path | None"
    scheme: str
    tolerances: SearchTolerances
    unit: SequenceUnit
    omega_larmor_kHz: float
    rank_weights: tuple[float, float, float]
    output_dir: Path
    rng_seed: int

    def load_register(self) -> Register:
        if self.register_path is None:
            return bundled_register(self.omega_larmor_kHz)
        return load_register(self.register_path, omega_larmor_kHz=self.omega_larmor_kHz)

    def snapshot(self) -> dict:
        """JSON-ready copy of the config for archive metadata."""
        tol = dataclasses.asdict(self.tolerances)
        return {
            "register_path": None if self.register_path is None else str(self.register_path),
            "scheme": self.scheme,
            "tolerances": tol,
            "unit": unit_name(self.unit),
            "omega_larmor_kHz": self.omega_larmor_kHz,
            "rank_weights": list(self.rank_weights),
            "output_dir": str(self.output_dir),
            "rng_seed": self.rng_seed,
        }


def load_run_config(path) -> RunConfig:
    """Parse and fully validate a RunConfig JSON document.

    Raises:
        ConfigError: listing every detected problem, none of the pipeline
            having run.
    """
    path = Path(path)
    problems: list[str] = []
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    if not isinstance(raw, dict):
        raise ConfigError("config document must be a JSON object")

    known = (
        {"register_path", "scheme", "unit", "omega_larmor_kHz", "rank_weights", "output_dir", "rng_seed"}
        | set(_TOLERANCE_INT_KEYS)
        | set(_TOLERANCE_FLOAT_KEYS)
        | set(_TOLERANCE_TIME_KEYS_US)
    )
    for key in sorted(set(raw) - known):
        problems.append(f"unknown key {key!r}")

    scheme = raw.get("scheme")
    if scheme not in SCHEMES:
        problems.append(f"scheme must be one of {SCHEMES}, got {scheme!r}")

    ghz_size = raw.get("ghz_size")
    if not isinstance(ghz_size, int) or isinstance(ghz_size, bool) or ghz_size < 3:
        problems.append(f"ghz_size must be an integer >= 3, got {ghz_size!r}")

    overrides: dict = {}
    for key in _TOLERANCE_INT_KEYS:
        if key == "ghz_size" or key not in raw:
            continue
        v = raw[key]
        if not isinstance(v, int) or isinstance(v, bool):
            problems.append(f"{key} must be an integer, got {v!r}")
        else:
            overrides[key] = v
    for key in _TOLERANCE_FLOAT_KEYS:
        if key in raw:
            v = raw[key]
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                problems.append(f"{key} must be a number, got {v!r}")
            else:
                overrides[key] = float(v)
    for key in _TOLERANCE_TIME_KEYS_US:
        if key in raw:
            v = raw[key]
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                problems.append(f"{key} must be a number of microseconds, got {v!r}")
            else:
                overrides[key.removesuffix("_us")] = float(v) * 1e-6

    tolerances = None
    if not any(p.startswith("ghz_size") for p in problems) and scheme in SCHEMES:
        try:
            if scheme == "sequential":
                tolerances = SearchTolerances.sequential_defaults(ghz_size, **overrides)
            else:
                tolerances = SearchTolerances.multispin_defaults(ghz_size, **overrides)
        except (ConfigError, ValueError) as exc:
            problems.append(str(exc))

    unit = None
    try:
        unit = unit_from_name(raw.get("unit", "cpmg"))
    except ConfigError as exc:
        problems.append(str(exc))

    omega = raw.get("omega_larmor_kHz", DEFAULT_OMEGA_LARMOR_KHZ)
    if not isinstance(omega, (int, float)) or isinstance(omega, bool) or omega <= 0:
        problems.append(f"omega_larmor_kHz must be a positive number, got {omega!r}")

    weights_raw = raw.get("rank_weights", list(DEFAULT_RANK_WEIGHTS))
    weights = None
    if (
        not isinstance(weights_raw, (list, tuple))
        or len(weights_raw) != 3
        or not all(isinstance(w, (int, float)) and not isinstance(w, bool) for w in weights_raw)
    ):
        problems.append(f"rank_weights must be a list of three numbers, got {weights_raw!r}")
    else:
        weights = tuple(float(w) for w in weights_raw)
        if abs(sum(weights) - 1.0) > 1e-9:
            problems.append(f"rank_weights must sum to 1 within 1e-9, got sum {sum(weights)!r}")

    register_path = raw.get("register_path")
    reg_path: "Path | None" = None
    if register_path is not None:
        if not isinstance(register_path, str):
            problems.append(f"register_path must be a string path or null, got {register_path!r}")
        else:
            reg_path = Path(register_path)
            if not reg_path.is_absolute():
                reg_path = path.parent / reg_path
            if not reg_path.is_file():
                problems.append(f"register file does not exist: {reg_path}")

    output_dir = raw.get("output_dir")
    out_path = None
    if not isinstance(output_dir, str) or not output_dir:
        problems.append(f"output_dir must be a non-empty string, got {output_dir!r}")
    else:
        out_path = Path(output_dir)
        if not out_path.is_absolute():
            out_path = path.parent / out_path

    seed = raw.get("rng_seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        problems.append(f"rng_seed must be a nonnegative integer, got {seed!r}")

    if problems:
        raise ConfigError("invalid config:\n  " + "\n  ".join(problems))
    return RunConfig(
        register_path=reg_path,
        scheme=scheme,
        tolerances=tolerances,
        unit=unit,
        omega_larmor_kHz=float(omega),
        rank_weights=weights,
        output_dir=out_path,
        rng_seed=seed,
    )


# ---------------------------------------------------------------------------
# Register ingestion


def bundled_register(omega_larmor_kHz: float = DEFAULT_OMEGA_LARMOR_KHZ) -> Register:
    """The packaged 27-spin register at the given Larmor frequency."""
    omega = omega_larmor_kHz * 2.0 * math.pi * 1e3
    with resources.files("ddghz.data").joinpath("register27.csv").open() as f:
        return _register_from_lines(f, "<bundled register27.csv>", omega)


def load_register(path, omega_larmor_kHz: float = DEFAULT_OMEGA_LARMOR_KHZ) -> Register:
    """Register from a CSV with header ``label,A_kHz,B_kHz``.

    Values convert kHz -> rad/s. Errors name the offending line number.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise ConfigError(f"register file not found: {path}")
    omega = omega_larmor_kHz * 2.0 * math.pi * 1e3
    return _register_from_lines(io.StringIO(text), str(path), omega)


def _register_from_lines(f, name: str, omega_larmor: float) -> Register:
    reader = csv.reader(f)
    try:
        header = next(reader)
    except StopIteration:
        raise ConfigError(f"{name}: empty register file")
    if [h.strip() for h in header] != ["label", "A_kHz", "B_kHz"]:
        raise ConfigError(f"{name}:1: header must be 'label,A_kHz,B_kHz', got {','.join(header)!r}")
    spins = []
    seen = set()
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 3:
            raise ConfigError(f"{name}:{lineno}: expected 3 fields, got {len(row)}")
        label = row[0].strip()
        if not label:
            raise ConfigError(f"{name}:{lineno}: empty label")
        if label in seen:
            raise ConfigError(f"{name}:{lineno}: duplicate label {label!r}")
        seen.add(label)
        try:
            a_khz = float(row[1])
            b_khz = float(row[2])
        except ValueError:
            raise ConfigError(f"{name}:{lineno}: non-numeric hyperfine value in {row[1:]!r}")
        if b_khz < 0:
            raise ConfigError(f"{name}:{lineno}: B_kHz must be >= 0, got {b_khz}")
        spins.append(NuclearSpin.from_khz(label, a_khz, b_khz))
    if not spins:
        raise ConfigError(f"{name}: no spin rows")
    return Register(spins=tuple(spins), omega_larmor=omega_larmor)


# ---------------------------------------------------------------------------
# Archives


def _json_text(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def case_to_json(case: Case, case_id: str) -> dict:
    """JSON form of a Case; plan parameters keep full float precision so the
    metrics recompute bit-exactly on reload."""
    flat = case.metrics.flat()
    return {
        "case_id": case_id,
        "scheme": case.scheme,
        "spins": list(case.spin_labels),
        "blocks": [
            {"unit": unit_name(b.unit), "t_us": b.t * 1e6, "N": b.N} for b in case.plan.blocks
        ],
        "T_ms": case.total_time * 1e3,
        "metrics": flat,
        "gate_error": case.error.infidelity,
        "target_unitary_dim": case.error.target_unitary_dim,
        "rank_score": case.rank_score,
    }


def plan_from_json(payload: dict) -> tuple[list[str], "SequencePlan"]:
    """(target labels, plan) from a plan/case JSON object."""
    from .spinmodel import SequenceBlock, SequencePlan

    if not isinstance(payload, dict):
        raise ConfigError("plan document must be a JSON object")
    targets = payload.get("targets", payload.get("spins"))
    if not isinstance(targets, list) or not targets or not all(isinstance(x, str) for x in targets):
        raise ConfigError("plan needs a non-empty 'targets' (or 'spins') list of labels")
    blocks_raw = payload.get("blocks")
    if not isinstance(blocks_raw, list) or not blocks_raw:
        raise ConfigError("plan needs a non-empty 'blocks' list")
    blocks = []
    for i, b in enumerate(blocks_raw):
        if not isinstance(b, dict):
            raise ConfigError(f"plan block {i}: must be an object")
        try:
            unit = unit_from_name(b.get("unit", "cpmg"))
            t_us = float(b["t_us"])
            n = int(b["N"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"plan block {i}: needs numeric 't_us' and integer 'N' ({exc})")
        try:
            blocks.append(SequenceBlock(unit=unit, t=t_us * 1e-6, N=n))
        except ValueError as exc:
            raise ConfigError(f"plan block {i}: {exc}")
    return list(targets), SequencePlan(tuple(blocks))


def _case_csv_rows(cases: list[Case], ids: list[str]):
    yield ["case_id", "spins", "blocks_t_us", "blocks_N", "T_ms", "ep_scaled", "gate_error", "one_tangles_scaled"]
    for case, cid in zip(cases, ids):
        flat = case.metrics.flat()
        yield [
            cid,
            ";".join(case.spin_labels),
            ";".join(format_float(b.t * 1e6) for b in case.plan.blocks),
            ";".join(str(b.N) for b in case.plan.blocks),
            format_float(case.total_time * 1e3),
            format_float(flat["ep_scaled"]),
            format_float(case.error.infidelity),
            ";".join(format_float(x) for x in flat["target_one_tangles_scaled"].values()),
        ]


def _csv_text(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def write_case_archive(
    config: RunConfig, cases: list[Case], out_dir: Path, timestamp: "str | None" = None
) -> dict:
    """Write a search archive: meta.json, cases.json, cases.csv, plot CSVs.

    The timestamp stays null unless one is passed in, keeping archives
    byte-identical across reruns of the same config.

    Returns:
        mapping of logical name -> written path.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ids = [f"{config.scheme}-{i + 1:03d}" for i in range(len(cases))]
    files = {}

    meta = {
        "tool": TOOL_NAME,
        "version": TOOL_VERSION,
        "config": config.snapshot(),
        "n_cases": len(cases),
        "timestamp": timestamp,
    }
    files["meta"] = _write_text(out_dir / "meta.json", _json_text(meta))
    files["cases_json"] = _write_text(
        out_dir / "cases.json", _json_text([case_to_json(c, i) for c, i in zip(cases, ids)])
    )
    files["cases_csv"] = _write_text(out_dir / "cases.csv", _csv_text(_case_csv_rows(cases, ids)))

    # per-figure data files: case index against each reported quantity
    tangle_rows = [["case_index", "case_id", "spin", "one_tangle_scaled"]]
    ep_rows = [["case_index", "case_id", "ep_scaled", "ep_unitary", "ep_nonunitary"]]
    time_rows = [["case_index", "case_id", "T_ms"]]
    err_rows = [["case_index", "case_id", "gate_error"]]
    for i, (case, cid) in enumerate(zip(cases, ids), start=1):
        flat = case.metrics.flat()
        for label, val in flat["target_one_tangles_scaled"].items():
            tangle_rows.append([str(i), cid, label, format_float(val)])
        ep_rows.append(
            [str(i), cid, format_float(flat["ep_scaled"]), format_float(flat["ep_unitary"]), format_float(flat["ep_nonunitary"])]
        )
        time_rows.append([str(i), cid, format_float(case.total_time * 1e3)])
        err_rows.append([str(i), cid, format_float(case.error.infidelity)])
    files["plot_one_tangles"] = _write_text(out_dir / "plot_one_tangles.csv", _csv_text(tangle_rows))
    files["plot_ep"] = _write_text(out_dir / "plot_ep.csv", _csv_text(ep_rows))
    files["plot_time"] = _write_text(out_dir / "plot_time.csv", _csv_text(time_rows))
    files["plot_error"] = _write_text(out_dir / "plot_error.csv", _csv_text(err_rows))
    return files


def _write_text(path: Path, text: str) -> Path:
    path.write_text(text)
    return path


def metrics_to_json(report: MetricsReport, gate_error) -> dict:
    flat = report.flat()
    flat["gate_error"] = gate_error.infidelity
    flat["target_unitary_dim"] = gate_error.target_unitary_dim
    return flat
