"""Command-line entry point: ``qutritbus {mrap,measure,cluster,cz,crosscheck}``.

Every subcommand writes JSON (and CSV for time series) into ``--out`` and
echoes the main JSON document to stdout.  Records carry the seed; the
``timestamp`` field is the only part that differs between identical runs.

Exit codes: 0 success, 1 runtime/capacity error, 2 configuration error.
"""

from __future__ import annotations

import argparse
import datetime
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from . import crosscheck as xc
from . import mrap
from . import statevector as sv
from .errors import CapacityError, ConfigError, InvalidSizeError, QutritBusError
from .qtp import OperatorKind, measure_operator, measure_operator_dynamical, measure_until_known
from .stabilizer import canonical_form, tableau_from_zero_state
from .synthesis import (
    cz_via_measurements,
    execute_schedule,
    linear_cluster_schedule,
    verify_cluster,
)

log = logging.getLogger("qutritbus")

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2
ENGINES = ("dense", "tableau", "dynamical")
SCHEDULE_KEYS = ("sigma", "omega_a_max", "omega_b_max", "omega_b2_max", "t_start", "t_end", "n_steps")

DEFAULTS: dict[str, dict[str, Any]] = {
    "common": {"seed": 0, "engine": None, "out": ".", "trials": 1, "jobs": 1},
    "mrap": {},
    "measure": {"kind": "XX", "state": "00", "q1": 0, "q2": 1, "loss": 0.0, "max_trials": 10},
    "cluster": {"n": 4, "force_plus": False},
    "cz": {"random_states": 100, "state_file": None, "all_branches": False},
    "crosscheck": {"circuits": 100, "n_qubits": 8},
}
DEFAULT_ENGINE = {"mrap": "dynamical", "measure": "dense", "cluster": "tableau", "cz": "dense", "crosscheck": "dense"}


@dataclass
class RunConfig:
    command: str
    seed: int
    engine: str
    out: str
    trials: int
    jobs: int
    params: dict = field(default_factory=dict)


def _timestamp() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


def _write_json(cfg: RunConfig, name: str, doc: dict) -> None:
    doc = {**doc, "seed": cfg.seed, "timestamp": _timestamp()}
    text = json.dumps(doc, indent=2, sort_keys=True)
    with open(os.path.join(cfg.out, name), "w") as fh:
        fh.write(text + "\n")
    print(text)


# -- configuration ------------------------------------------------------------------


def build_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults < config file < explicit flags, then validate ranges."""
    file_cfg: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise ConfigError("config file must hold a JSON object")
    merged = {**DEFAULTS["common"], **DEFAULTS[args.command]}
    if args.command in ("mrap", "measure"):
        merged.update({k: None for k in SCHEDULE_KEYS})
    for key in list(merged):
        if key in file_cfg:
            merged[key] = file_cfg[key]
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    unknown = set(file_cfg) - set(merged)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    engine = merged.pop("engine") or DEFAULT_ENGINE[args.command]
    if engine not in ENGINES:
        raise ConfigError(f"unknown engine {engine!r}")
    try:
        seed = int(merged.pop("seed"))
        trials = int(merged.pop("trials"))
        jobs = int(merged.pop("jobs"))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if not 0 <= seed < 2**64:
        raise ConfigError("seed must be a 64-bit unsigned integer")
    if trials < 1:
        raise ConfigError("--trials must be at least 1")
    if jobs < 1:
        raise ConfigError("--jobs must be at least 1")
    out = merged.pop("out")
    os.makedirs(out, exist_ok=True)
    return RunConfig(args.command, seed, engine, out, trials, jobs, merged)


def _schedule(params: dict) -> mrap.PulseSchedule:
    fields = {k: params[k] for k in SCHEDULE_KEYS if params.get(k) is not None}
    return mrap.PulseSchedule(**fields)


def parse_state(label: str) -> np.ndarray:
    """Product register from characters in ``01+-``, e.g. ``"0+"``."""
    single = {
        "0": np.array([1, 0], dtype=complex),
        "1": np.array([0, 1], dtype=complex),
        "+": np.array([1, 1], dtype=complex) / np.sqrt(2),
        "-": np.array([1, -1], dtype=complex) / np.sqrt(2),
    }
    if not label or any(c not in single for c in label):
        raise ConfigError(f"state {label!r} must be a string over '01+-'")
    v = np.array([1.0 + 0j])
    for c in label:
        v = np.kron(v, single[c])
    return v


# -- subcommands ----------------------------------------------------------------------


def cmd_mrap(cfg: RunConfig) -> int:
    sched = _schedule(cfg.params)
    start = sv.init_state(4, 0, sv.BusSite.A, "")
    final, traj = mrap.evolve(sched, start)
    traj.write_csv(os.path.join(cfg.out, "trajectory.csv"))
    max_c, min_d3 = mrap.adiabaticity_report(traj)
    d3_end = mrap.dark_states_at(sched, sched.t_end).d3
    back = mrap.propagator(sched.reversed()) @ final.amplitudes
    doc = {
        "schedule": sched.to_dict(),
        "final_fidelity": float(abs(np.vdot(d3_end, final.amplitudes)) ** 2),
        "transfer_fidelity": float(abs(np.vdot(mrap.target_superposition(sched), final.amplitudes)) ** 2),
        "return_fidelity": float(abs(back[mrap.A]) ** 2),
        "max_c_population": max_c,
        "min_d3_overlap": min_d3,
        "rows": len(traj),
    }
    _write_json(cfg, "mrap_summary.json", doc)
    return EXIT_OK


def cmd_measure(cfg: RunConfig) -> int:
    p = cfg.params
    try:
        kind = OperatorKind(str(p["kind"]).upper())
    except ValueError as exc:
        raise ConfigError(f"kind must be XX or ZZ, not {p['kind']!r}") from exc
    psi = parse_state(str(p["state"]))
    loss = float(p["loss"])
    if not 0.0 <= loss <= 1.0:
        raise ConfigError("--loss must lie in [0, 1]")
    q1, q2 = int(p["q1"]), int(p["q2"])
    n = int(round(np.log2(psi.size)))
    if not (0 <= q1 < n and 0 <= q2 < n and q1 != q2):
        raise ConfigError("q1, q2 must be distinct qubits of the state")
    max_trials = int(p["max_trials"])
    if max_trials < 1:
        raise ConfigError("--max-trials must be at least 1")
    if cfg.engine == "tableau":
        raise ConfigError("measure supports the dense and dynamical engines")
    bus_dim = 4 if cfg.engine == "dynamical" else 3
    state = sv.from_qubit_vector(psi, bus_dim)
    sched = _schedule(p) if cfg.engine == "dynamical" else None
    if sched is not None and loss > 0:
        raise ConfigError("loss modelling is only available on the dense engine")

    rng = np.random.default_rng(cfg.seed)
    records = []
    for run in range(cfg.trials):
        if sched is not None:
            outcome, _ = measure_operator_dynamical(state, kind, q1, q2, rng, sched)
        elif loss > 0:
            outcome, _ = measure_until_known(state, kind, q1, q2, rng, loss, max_trials)
        else:
            outcome, _ = measure_operator(state, kind, q1, q2, rng)
        records.append({**outcome.to_record(cfg.seed), "run": run})
    plus = sum(r["eigenvalue"] == 1 for r in records)
    minus = sum(r["eigenvalue"] == -1 for r in records)
    doc = {
        "engine": cfg.engine,
        "state": str(p["state"]),
        "records": records,
        "summary": {
            "runs": len(records),
            "plus": plus,
            "minus": minus,
            "unknown": len(records) - plus - minus,
            "at_alice_frequency": plus / len(records),
        },
    }
    _write_json(cfg, "measure.json", doc)
    return EXIT_OK


def cmd_cluster(cfg: RunConfig) -> int:
    n = int(cfg.params["n"])
    if n < 2:
        raise ConfigError("cluster size must be at least 2")
    sched = linear_cluster_schedule(n)
    rng = np.random.default_rng(cfg.seed)
    force_plus = bool(cfg.params["force_plus"])
    if cfg.engine == "tableau":
        final, frame = execute_schedule(tableau_from_zero_state(n), sched, rng, force_plus)
        tableau = final
        verdict = verify_cluster(final, n)
    elif cfg.engine == "dense":
        if n > sv.MAX_QUBITS:
            raise CapacityError(f"dense engine is capped at {sv.MAX_QUBITS} qubits")
        outcomes: list = []
        final, frame = execute_schedule(sv.init_state(3, n, sv.BusSite.A, "0" * n), sched, rng, force_plus, log=outcomes)
        verdict = verify_cluster(final, n)
        tableau, _ = execute_schedule(tableau_from_zero_state(n), sched, outcomes=outcomes)
        verdict = verdict and verify_cluster(tableau, n)
    else:
        raise ConfigError("cluster supports the tableau and dense engines")
    with open(os.path.join(cfg.out, "schedule.json"), "w") as fh:
        json.dump(sched.to_dict(), fh, indent=2)
    doc = {
        "n": n,
        "engine": cfg.engine,
        "schedule": sched.to_dict(),
        "step_count": sched.step_count,
        "canonical_tableau": canonical_form(tableau).labels(),
        "byproduct_frame": frame.label(),
        "verified": bool(verdict),
    }
    _write_json(cfg, "cluster.json", doc)
    return EXIT_OK if verdict else EXIT_RUNTIME


def _load_state_file(path: str) -> np.ndarray:
    try:
        with open(path) as fh:
            data = json.load(fh)
        pairs = data["amplitudes"] if isinstance(data, dict) else data
        psi = np.array([complex(float(re), float(im)) for re, im in pairs])
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"malformed state file {path}: {exc}") from exc
    if psi.shape != (4,) or not np.linalg.norm(psi) > 0:
        raise ConfigError("state file must hold four non-zero [re, im] amplitudes")
    return psi / np.linalg.norm(psi)


CZ_MATRIX = np.diag([1, 1, 1, -1]).astype(complex)
BRANCHES = [(a, b, c) for a in (True, False) for b in (True, False) for c in (0, 1)]


def _cz_case(args) -> tuple[float, list]:
    seed, k, psi, all_branches = args
    rng = np.random.default_rng([seed, k])
    if psi is None:
        psi = rng.normal(size=4) + 1j * rng.normal(size=4)
        psi /= np.linalg.norm(psi)
    start = sv.from_qubit_vector(np.kron(psi, [1, 0]))
    want = sv.from_qubit_vector(np.kron(CZ_MATRIX @ psi, [1, 0]))
    fids, records = [], []
    for forced in BRANCHES if all_branches else [None]:
        out, rec = cz_via_measurements(start, 0, 1, 2, rng, forced)
        fids.append(sv.fidelity(out, want))
        records.append(rec)
    return min(fids), records


def _map(fn, items, jobs: int):
    if jobs == 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def cmd_cz(cfg: RunConfig) -> int:
    p = cfg.params
    if cfg.engine != "dense":
        raise ConfigError("cz runs on the dense engine")
    all_branches = bool(p["all_branches"])
    if p["state_file"]:
        items = [(cfg.seed, 0, _load_state_file(p["state_file"]), all_branches)]
    else:
        count = int(p["random_states"])
        if count < 1:
            raise ConfigError("--random-states must be at least 1")
        items = [(cfg.seed, k, None, all_branches) for k in range(count)]
    results = _map(_cz_case, items, cfg.jobs)
    fids = [r[0] for r in results]
    branch_counts: dict[str, int] = {}
    for _, recs in results:
        for rec in recs:
            key = f"zz{rec['zz_eigenvalue']:+d}/xx{rec['xx_eigenvalue']:+d}/bit{rec['ancilla_bit']}"
            branch_counts[key] = branch_counts.get(key, 0) + 1
    doc = {
        "states": len(items),
        "min_fidelity": float(min(fids)),
        "mean_fidelity": float(np.mean(fids)),
        "branches": dict(sorted(branch_counts.items())),
    }
    _write_json(cfg, "cz.json", doc)
    return EXIT_OK


def _crosscheck_case(args):
    seed, k, max_qubits = args
    rng = np.random.default_rng([seed, k])
    n, ops = xc.random_circuit(rng, max_qubits)
    return n, xc.run_circuit(n, ops, rng)


def cmd_crosscheck(cfg: RunConfig) -> int:
    count = int(cfg.params["circuits"])
    max_qubits = int(cfg.params["n_qubits"])
    if count < 1:
        raise ConfigError("--circuits must be at least 1")
    if max_qubits < 1:
        raise ConfigError("--n-qubits must be positive")
    if max_qubits > xc.MAX_CROSSCHECK_QUBITS:
        raise CapacityError(f"crosscheck is limited to {xc.MAX_CROSSCHECK_QUBITS} qubits")
    results = _map(_crosscheck_case, [(cfg.seed, k, max_qubits) for k in range(count)], cfg.jobs)
    doc = {
        "circuits": count,
        "max_qubits": max_qubits,
        "max_deviation": float(max(dev for _, dev in results)),
    }
    _write_json(cfg, "crosscheck.json", doc)
    return EXIT_OK


COMMANDS = {
    "mrap": cmd_mrap,
    "measure": cmd_measure,
    "cluster": cmd_cluster,
    "cz": cmd_cz,
    "crosscheck": cmd_crosscheck,
}


# -- parser -----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int)
    common.add_argument("--engine", choices=ENGINES)
    common.add_argument("--out", help="output directory")
    common.add_argument("--trials", type=int)
    common.add_argument("--jobs", type=int)
    common.add_argument("--config", help="JSON file with default parameters")
    common.add_argument("-v", "--verbose", action="store_true")

    pulses = argparse.ArgumentParser(add_help=False)
    pulses.add_argument("--sigma", type=float)
    pulses.add_argument("--omega-a-max", type=float)
    pulses.add_argument("--omega-b-max", type=float)
    pulses.add_argument("--omega-b2-max", type=float)
    pulses.add_argument("--t-start", type=float)
    pulses.add_argument("--t-end", type=float)
    pulses.add_argument("--n-steps", type=int)

    parser = argparse.ArgumentParser(prog="qutritbus", description="Qutrit-bus operator measurements, transport and cluster synthesis.")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("mrap", parents=[common, pulses], help="integrate the adiabatic transport")

    p = sub.add_parser("measure", parents=[common, pulses], help="bus-mediated XX/ZZ measurement")
    p.add_argument("--kind")
    p.add_argument("--state", help="product state over '01+-', e.g. 00 or ++")
    p.add_argument("--q1", type=int)
    p.add_argument("--q2", type=int)
    p.add_argument("--loss", type=float, help="bus loss probability per attempt")
    p.add_argument("--max-trials", type=int)

    p = sub.add_parser("cluster", parents=[common], help="linear cluster synthesis")
    p.add_argument("--n", type=int)
    p.add_argument("--force-plus", action="store_true", default=None)

    p = sub.add_parser("cz", parents=[common], help="CZ gate from bus measurements")
    p.add_argument("--random-states", type=int)
    p.add_argument("--state-file")
    p.add_argument("--all-branches", action="store_true", default=None)

    p = sub.add_parser("crosscheck", parents=[common], help="tableau vs dense engine comparison")
    p.add_argument("--circuits", type=int)
    p.add_argument("--n-qubits", type=int)
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = build_config(args)
        return COMMANDS[args.command](cfg)
    except (ConfigError, InvalidSizeError) as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except (CapacityError, QutritBusError) as exc:
        log.error("runtime error: %s", exc)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
