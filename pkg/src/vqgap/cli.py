"""Command-line entry point: generate, solve, run, sweep and report.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from vqgap.driver import LAYOUT_OF, AlgorithmConfig, Problem, RunResult, run_algorithm
from vqgap.instance import GapInstance, InstanceError, brute_force_solve, generate_instance
from vqgap.layout import LayoutKind, layout
from vqgap.metrics import REPORT_COLUMNS, aggregate_runs, solution_counts
from vqgap.simulator import CircuitError, NoiseConfig

log = logging.getLogger("vqgap")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2
SWEEP_PARAMS = ("noise_p2", "shots", "rep")


class ConfigError(Exception):
    """Bad command line or experiment configuration (exit code 1)."""


# -- configuration --------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    instance: GapInstance
    algorithms: tuple[AlgorithmConfig, ...]
    repetitions: int = 100
    seed: int = 0
    output: str | None = None
    noise: NoiseConfig | None = None
    raw: str = field(default="", repr=False)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        path = Path(path)
        try:
            raw = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        try:
            return cls.from_dict(data, base=path.parent, raw=raw)
        except (KeyError, TypeError, ValueError, InstanceError, CircuitError) as exc:
            raise ConfigError(f"{path}: {exc}") from None

    @classmethod
    def from_dict(cls, data: dict, base: Path = Path("."), raw: str = "") -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        spec = data.get("instance")
        if isinstance(spec, str):
            ipath = base / spec
            if not ipath.is_file():
                raise ConfigError(f"instance file {ipath} does not exist")
            instance = GapInstance.load(ipath)
        elif isinstance(spec, dict) and "generate" in spec:
            instance = generate_instance(**spec["generate"])
        elif isinstance(spec, dict):
            instance = GapInstance.from_dict(spec)
        else:
            raise ConfigError("'instance' must be a path, an instance object or {'generate': {...}}")

        repetitions = int(data.get("repetitions", 100))
        if repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        opt = data.get("optimizer", {})
        noise_spec = data.get("noise")
        noise = None
        trajectories = 16
        if noise_spec is not None:
            noise = NoiseConfig(float(noise_spec.get("p1", 0.0)), float(noise_spec.get("p2", 0.0)))
            trajectories = int(noise_spec.get("trajectories", 16))

        entries = data.get("algorithms")
        if not entries:
            raise ConfigError("'algorithms' must list at least one algorithm")
        algorithms = []
        for entry in entries:
            entry = {"algorithm": entry} if isinstance(entry, str) else dict(entry)
            algorithms.append(AlgorithmConfig(
                algorithm=entry["algorithm"],
                ansatz=entry.get("ansatz"),
                reps=int(entry.get("reps", 1)),
                shots=int(data.get("shots", 4096)),
                method=opt.get("method", "NELDER_MEAD"),
                max_iterations=int(opt.get("max_iterations", 300)),
                tolerance=float(opt.get("tolerance", 1e-3)),
                initial_step=float(opt.get("initial_step", 0.5)),
                noise=noise,
                trajectories=trajectories,
                init=data.get("init", "UNIFORM_RANDOM"),
            ))
        return cls(instance, tuple(algorithms), repetitions, int(data.get("seed", 0)),
                   data.get("output"), noise, raw)

    def swept(self, param: str, value) -> "ExperimentConfig":
        if param == "shots":
            return replace(self, algorithms=tuple(replace(a, shots=int(value)) for a in self.algorithms))
        if param == "rep":
            return replace(self, algorithms=tuple(replace(a, reps=int(value)) for a in self.algorithms))
        p1 = self.noise.p1 if self.noise else 0.0
        noise = NoiseConfig(p1, float(value))
        return replace(self, noise=noise, algorithms=tuple(replace(a, noise=noise) for a in self.algorithms))


def repetition_seed(master: int, r: int) -> int:
    return master ^ r


# -- file helpers -----------------------------------------------------------------


def write_atomic(path: Path, data: str | bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.tmp")
    if isinstance(data, str):
        tmp.write_text(data)
    else:
        tmp.write_bytes(data)
    os.replace(tmp, path)


def csv_text(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _dump(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


# -- experiment execution ------------------------------------------------------------

_PROBLEMS: dict = {}


def _execute(job: tuple[GapInstance, AlgorithmConfig]) -> dict:
    """Worker: one repetition, returned as its JSON form (or an error record)."""
    instance, config = job
    key = (instance, replace(config, seed=0))
    problem = _PROBLEMS.get(key)
    if problem is None:
        problem = _PROBLEMS[key] = Problem(instance, config)
    try:
        return {"ok": True, "result": run_algorithm(config, instance, problem).to_dict()}
    except Exception as exc:  # recorded per repetition, never fatal for the batch
        return {"ok": False, "error": f"{type(exc).__name__}: {exc}"}


def _map(jobs: list, n_jobs: int) -> list[dict]:
    if n_jobs <= 1 or len(jobs) <= 1:
        return [_execute(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=min(n_jobs, len(jobs))) as pool:
        return list(pool.map(_execute, jobs))


def _label_row(report_row: dict, label: str) -> dict:
    return {**report_row, "label": label}


def _failed_row(config: AlgorithmConfig, noise: NoiseConfig | None, q: int) -> dict:
    row = {c: "" for c in REPORT_COLUMNS}
    row.update(
        algorithm=config.algorithm.value,
        ansatz=config.ansatz.value,
        reps=config.reps if config.ansatz.value == "VQGAPE_ESU2" else "",
        shots=config.shots,
        noise_p1=noise.p1 if noise else 0.0,
        noise_p2=noise.p2 if noise else 0.0,
        Q=q,
        runs=0,
    )
    return row


def run_experiment(cfg: ExperimentConfig, out: Path, n_jobs: int) -> tuple[list[dict], list[dict]]:
    """Execute every (algorithm, repetition) and write results into ``out``.

    Returns the labelled comparison rows and the failure records.
    """
    out.mkdir(parents=True, exist_ok=True)
    write_atomic(out / "instance.json", cfg.instance.to_json())
    oracle = brute_force_solve(cfg.instance)
    rows, failures = [], []
    for algo in cfg.algorithms:
        jobs = [(cfg.instance, algo.with_seed(repetition_seed(cfg.seed, r))) for r in range(cfg.repetitions)]
        outcomes = _map(jobs, n_jobs)
        runs = []
        for r, outcome in enumerate(outcomes):
            if outcome["ok"]:
                write_atomic(out / "runs" / algo.label / f"rep_{r:04d}.json", _dump(outcome["result"]))
                runs.append(RunResult.from_dict(outcome["result"]))
            else:
                log.error("%s repetition %d failed: %s", algo.label, r, outcome["error"])
                failures.append({"label": algo.label, "repetition": r, "seed": jobs[r][1].seed,
                                 "error": outcome["error"]})
        noise = algo.noise
        if runs:
            report = aggregate_runs(runs, cfg.instance, oracle=oracle, shots=algo.shots,
                                    noise_p1=noise.p1 if noise else 0.0, noise_p2=noise.p2 if noise else 0.0)
            row = report.row()
        else:
            row = _failed_row(algo, noise, layout(cfg.instance, LAYOUT_OF[algo.algorithm]).num_qubits)
        write_atomic(out / f"report_{algo.label}.csv", csv_text([row], REPORT_COLUMNS))
        rows.append(_label_row(row, algo.label))
    write_atomic(out / "comparison.csv", csv_text(rows, REPORT_COLUMNS))
    if failures:
        write_atomic(out / "failures.csv", csv_text(failures, ["label", "repetition", "seed", "error"]))
    return rows, failures


def _render(fn, *args) -> None:
    try:
        from vqgap import plotting
    except ImportError:  # rendering is optional; the CSVs are the primary output
        log.warning("matplotlib unavailable, skipping figures")
        return
    getattr(plotting, fn)(*args)


# -- commands ----------------------------------------------------------------------


def cmd_generate(args) -> int:
    if args.tasks < 1 or args.agents < 1 or args.max_budget < 1 or args.max_profit < 1:
        raise ConfigError("tasks, agents, max-budget and max-profit must all be >= 1")
    out = Path(args.out)
    if out.exists() and not args.force:
        raise ConfigError(f"{out} exists; pass --force to overwrite")
    inst = generate_instance(args.tasks, args.agents, args.max_budget, args.max_profit, args.seed)
    write_atomic(out, inst.to_json())
    q = layout(inst, LayoutKind.VQE_FULL).num_qubits
    print(f"wrote {out} (T={inst.tasks}, A={inst.agents}, budgets={list(inst.budgets)}, VQE qubits={q})")
    return EXIT_OK


def cmd_solve(args) -> int:
    path = Path(args.instance)
    if not path.is_file():
        raise ConfigError(f"instance file {path} does not exist")
    try:
        inst = GapInstance.load(path)
    except (json.JSONDecodeError, InstanceError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    res = brute_force_solve(inst)
    best = res.optimal_set[0]
    summary = {
        "optimal_cost": res.optimal_cost,
        "optimal_profit": res.optimal_profit,
        "assignment": [row.index(1) + 1 if any(row) else 0 for row in best],
        "layouts": {},
    }
    print(f"optimal cost {res.optimal_cost} (profit {res.optimal_profit})")
    print("assignment (task -> agent, 0 = unassigned): " + " ".join(str(a) for a in summary["assignment"]))
    for kind in LayoutKind:
        n_best, n_feas = solution_counts(inst, kind, res)
        q = layout(inst, kind).num_qubits
        summary["layouts"][kind.value] = {"Q": q, "N_best": n_best, "N_feas": n_feas}
        print(f"{kind.value:8s} Q={q:2d} N_best={n_best} N_feas={n_feas}")
    if args.out:
        write_atomic(Path(args.out), _dump(summary))
    return EXIT_OK


def _out_dir(args, cfg: ExperimentConfig, config_path: Path) -> Path:
    if args.out:
        return Path(args.out)
    if cfg.output:
        return config_path.parent / cfg.output
    raise ConfigError("no output directory: pass --out or set 'output' in the config")


def cmd_run(args) -> int:
    config_path = Path(args.config)
    cfg = ExperimentConfig.load(config_path)
    out = _out_dir(args, cfg, config_path)
    out.mkdir(parents=True, exist_ok=True)
    write_atomic(out / "config.json", cfg.raw)
    rows, failures = run_experiment(cfg, out, args.jobs)
    if not args.no_figures:
        _render("comparison_figure", rows, out / "comparison.png")
    for row in rows:
        print(f"{row['label']:16s} runs={row['runs']} P_feas={row['P_feas_mean']} C_feas={row['C_feas_mean']}")
    if failures:
        print(f"{len(failures)} repetition(s) failed, see {out / 'failures.csv'}", file=sys.stderr)
        return EXIT_RUNTIME if any(r["runs"] == 0 for r in rows) else EXIT_OK
    return EXIT_OK


def _parse_value(param: str, text: str):
    try:
        return float(text) if param == "noise_p2" else int(text)
    except ValueError:
        raise ConfigError(f"bad value {text!r} for {param}") from None


def cmd_sweep(args) -> int:
    if not args.values:
        raise ConfigError("sweep needs at least one value")
    values = [_parse_value(args.param, v) for v in args.values]
    config_path = Path(args.config)
    cfg = ExperimentConfig.load(config_path)
    out = _out_dir(args, cfg, config_path)
    out.mkdir(parents=True, exist_ok=True)
    write_atomic(out / "config.json", cfg.raw)
    rows = []
    for value in values:
        try:
            variant = cfg.swept(args.param, value)
        except (CircuitError, InstanceError, ValueError) as exc:
            raise ConfigError(f"{args.param}={value}: {exc}") from None
        sub_rows, _ = run_experiment(variant, out / f"{args.param}={value}", args.jobs)
        rows += [{"param": args.param, "value": value, **r} for r in sub_rows]
    write_atomic(out / "sweep.csv", csv_text(rows, ["param", "value", *REPORT_COLUMNS]))
    if not args.no_figures:
        _render("sweep_figure", rows, args.param, out / "sweep.png")
    for r in rows:
        print(f"{args.param}={r['value']} {r['label']:16s} P_feas={r['P_feas_mean']}")
    return EXIT_OK


def cmd_report(args) -> int:
    """Re-aggregate the per-run JSON files of an existing ``run`` directory."""
    root = Path(args.results)
    runs_dir = root / "runs"
    if not runs_dir.is_dir() or not (root / "instance.json").is_file():
        raise ConfigError(f"{root} does not look like a run directory (need runs/ and instance.json)")
    instance = GapInstance.load(root / "instance.json")
    cfg_noise = None
    if (root / "config.json").is_file():
        noise = json.loads((root / "config.json").read_text()).get("noise")
        cfg_noise = noise and NoiseConfig(float(noise.get("p1", 0.0)), float(noise.get("p2", 0.0)))
    oracle = brute_force_solve(instance)
    rows = []
    for label_dir in sorted(p for p in runs_dir.iterdir() if p.is_dir()):
        runs = [RunResult.from_dict(json.loads(f.read_text())) for f in sorted(label_dir.glob("rep_*.json"))]
        if not runs:
            continue
        report = aggregate_runs(runs, instance, oracle=oracle,
                                noise_p1=cfg_noise.p1 if cfg_noise else 0.0,
                                noise_p2=cfg_noise.p2 if cfg_noise else 0.0)
        rows.append(_label_row(report.row(), label_dir.name))
    if not rows:
        raise ConfigError(f"no run files under {runs_dir}")
    out = Path(args.out) if args.out else root
    write_atomic(out / "comparison.csv", csv_text(rows, REPORT_COLUMNS))
    if not args.no_figures:
        _render("comparison_figure", rows, out / "comparison.png")
    sys.stdout.write(csv_text(rows, REPORT_COLUMNS))
    return EXIT_OK


# -- parser -------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vqgap", description="Variational quantum solvers for the generalized assignment problem.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="write a random instance")
    p.add_argument("--tasks", "-T", type=int, required=True)
    p.add_argument("--agents", "-A", type=int, required=True)
    p.add_argument("--max-budget", type=int, default=3)
    p.add_argument("--max-profit", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="instance JSON path")
    p.add_argument("--force", action="store_true", help="overwrite an existing file")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="brute-force optimum and solution counts")
    p.add_argument("instance")
    p.add_argument("--out", help="also write the summary as JSON")
    p.set_defaults(func=cmd_solve)

    jobs = dict(type=int, default=os.cpu_count() or 1, help="worker processes (default: all cores)")

    p = sub.add_parser("run", help="run an experiment config")
    p.add_argument("config")
    p.add_argument("--out", help="output directory (overrides the config)")
    p.add_argument("--jobs", **jobs)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="repeat an experiment over one parameter")
    p.add_argument("config")
    p.add_argument("--param", choices=SWEEP_PARAMS, required=True)
    p.add_argument("--values", nargs="*", default=[])
    p.add_argument("--out", help="output directory (overrides the config)")
    p.add_argument("--jobs", **jobs)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="re-aggregate an existing run directory")
    p.add_argument("results")
    p.add_argument("--out", help="directory for the regenerated CSV (default: in place)")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "jobs", 1) < 1:
        print("vqgap: error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"vqgap: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InstanceError, CircuitError, FloatingPointError, OSError, RuntimeError) as exc:
        print(f"vqgap: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
