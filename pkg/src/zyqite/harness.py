"""Command-line driver: instance generation, batch runs, and figure-data summaries.

Subcommands::

    zyqite generate --ensemble sk --sizes 8,10 --instances 5 --out runs/sk
    zyqite run --preset fig2 --instances 10 --out runs/fig2
    zyqite analyze runs/fig2
    zyqite presets

Precedence for every setting is preset < ``--config`` file < explicit flag.
Exit codes: 0 ok, 1 bad input, 2 IO failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis, baseline_adam, varit
from . import graph as gm
from .graph import Convention, Ensemble, GraphError
from .hamiltonian import approximation_ratio, build as build_hamiltonian, energy, \
    exact_imaginary_time_state
from .statevector import plus_state
from .trajectory import atomic_write_rows, read_csv, write_csv, write_params_csv

log = logging.getLogger(__name__)

EXIT_OK, EXIT_INPUT, EXIT_IO = 0, 1, 2

MANIFEST_COLUMNS = ["ensemble", "n", "index", "seed", "graph"]
RUNS_COLUMNS = ["optimizer", "ensemble", "n", "epsilon", "index", "seed", "convention",
                "trajectory", "params", "graph"]
SUMMARY_COLUMNS = ["ensemble", "n", "epsilon", "instances", "success_fraction",
                   "mean_iterations", "mean_max_layers", "entropy_slope_a",
                   "entropy_intercept_b"]
CURVE_COLUMNS = ["optimizer", "ensemble", "n", "epsilon", "iteration", "mean_ar_error",
                 "stderr_ar_error"]


class InputError(ValueError):
    pass


def instance_seed(master_seed: int, ensemble: str, size: int, index: int) -> int:
    """Stable 64-bit seed: blake2b of ``"master:ensemble:size:index"``."""
    key = f"{master_seed}:{Ensemble(ensemble).value}:{size}:{index}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")


def default_convention(ensemble: str) -> Convention:
    return Convention.PHYSICS if Ensemble(ensemble) is Ensemble.SK else Convention.COMPUTER_SCIENCE


@dataclass
class ExperimentSpec:
    ensemble: str = "three_regular"
    sizes: list[int] = field(default_factory=lambda: [8])
    instances: int = 1
    optimizers: list[str] = field(default_factory=lambda: ["varit"])
    epsilons: list[float] = field(default_factory=lambda: [0.0])
    master_seed: int = 0
    convention: str | None = None
    dtau: float = 0.1
    use_sigmoid: bool = True
    max_iterations: int = 100
    learning_rates: list[float] = field(default_factory=lambda: [0.05])
    exact_reference: bool = False

    def validate(self) -> None:
        try:
            Ensemble(self.ensemble)
        except ValueError:
            raise InputError(f"unknown ensemble {self.ensemble!r}") from None
        if not self.sizes or any(n < 2 for n in self.sizes):
            raise InputError(f"bad sizes {self.sizes}")
        if self.instances < 1:
            raise InputError("instances must be >= 1")
        bad = set(self.optimizers) - {"varit", "adam"}
        if bad or not self.optimizers:
            raise InputError(f"unknown optimizer(s) {sorted(bad)}")
        if any(e < 0 for e in self.epsilons):
            raise InputError("epsilon must be nonnegative")
        if self.dtau <= 0 or self.max_iterations < 1:
            raise InputError("dtau and max_iterations must be positive")
        if self.convention is not None:
            try:
                Convention(self.convention)
            except ValueError:
                raise InputError(f"unknown convention {self.convention!r}") from None

    @property
    def resolved_convention(self) -> Convention:
        if self.convention is not None:
            return Convention(self.convention)
        return default_convention(self.ensemble)


PRESETS: dict[str, tuple[str, dict]] = {
    "fig1": ("8-vertex complete graph, U(0,1) weights, sigmoid off, exact ITE reference",
             dict(ensemble="custom", sizes=[8], instances=1, dtau=0.1, use_sigmoid=False,
                  exact_reference=True)),
    "fig2": ("n=16 convergence batches, VAR-IT and ADAM (run once per ensemble)",
             dict(ensemble="three_regular", sizes=[16], instances=100,
                  optimizers=["varit", "adam"], dtau=0.5,
                  learning_rates=[0.01, 0.05, 0.1])),
    "fig3": ("3-regular pruning sweep",
             dict(ensemble="three_regular", sizes=[8, 12, 16], instances=20,
                  epsilons=[0.05, 0.10, 0.15], dtau=0.5)),
    "fig4": ("SK entanglement volume law",
             dict(ensemble="sk", sizes=[8, 10, 12, 14, 16], instances=20, dtau=0.5)),
}


def _int_list(text: str) -> list[int]:
    return [int(x) for x in str(text).replace(" ", "").split(",") if x]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in str(text).replace(" ", "").split(",") if x]


def _str_list(text: str) -> list[str]:
    return [x for x in str(text).replace(" ", "").split(",") if x]


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise InputError(f"not a boolean: {text!r}")


# key -> (ExperimentSpec field, parser); shared by config files and CLI flags
_KEYS = {
    "ensemble": ("ensemble", str),
    "sizes": ("sizes", _int_list),
    "instances": ("instances", int),
    "optimizer": ("optimizers", _str_list),
    "epsilon": ("epsilons", _float_list),
    "seed": ("master_seed", int),
    "convention": ("convention", str),
    "dtau": ("dtau", float),
    "sigmoid": ("use_sigmoid", _bool),
    "max_iterations": ("max_iterations", int),
    "learning_rate": ("learning_rates", _float_list),
    "exact_reference": ("exact_reference", _bool),
}


def read_config(path: str | Path) -> dict:
    """Flat ``key = value`` pairs from every section of an INI file."""
    cp = configparser.ConfigParser()
    with open(path) as fh:
        cp.read_file(fh)
    out = {}
    for section in cp.sections():
        for key, value in cp.items(section):
            key = key.replace("-", "_")
            if key not in _KEYS:
                raise InputError(f"{path}: unknown key {key!r} in [{section}]")
            out[key] = value
    return out


def build_spec(args: argparse.Namespace) -> ExperimentSpec:
    values: dict = {}
    if getattr(args, "preset", None):
        if args.preset not in PRESETS:
            raise InputError(f"unknown preset {args.preset!r}")
        values.update(PRESETS[args.preset][1])
    raw = read_config(args.config) if getattr(args, "config", None) else {}
    for key, value in vars(args).items():
        if key in _KEYS and value is not None:
            raw[key] = value
    try:
        for key, value in raw.items():
            name, parse = _KEYS[key]
            values[name] = parse(value)
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from None
    experiment = ExperimentSpec(**values)
    experiment.validate()
    return experiment


def _graph_path(out: Path, ensemble: str, n: int, index: int) -> Path:
    return out / "graphs" / f"{ensemble}_n{n}_i{index:03d}.txt"


def cmd_generate(experiment: ExperimentSpec, out: Path) -> list[dict]:
    """Write one graph file per (size, index) and a manifest of seeds."""
    rows = []
    for n in experiment.sizes:
        for i in range(experiment.instances):
            seed = instance_seed(experiment.master_seed, experiment.ensemble, n, i)
            g = gm.generate(experiment.ensemble, n, seed)
            path = _graph_path(out, experiment.ensemble, n, i)
            path.parent.mkdir(parents=True, exist_ok=True)
            gm.write_graph(g, path)
            rows.append(dict(ensemble=experiment.ensemble, n=n, index=i, seed=seed,
                             graph=str(path.relative_to(out))))
    atomic_write_rows(out / "manifest.csv", MANIFEST_COLUMNS,
                      ([r[c] for c in MANIFEST_COLUMNS] for r in rows))
    return rows


def exact_reference_columns(traj, graph, convention) -> dict[str, list[float]]:
    """Exact ``e^{-tau H}`` energy and AR at each recorded tau."""
    h = build_hamiltonian(graph, convention)
    start = plus_state(graph.n_vertices)
    cache: dict[float, float] = {}
    for rec in traj.records:
        if rec.tau not in cache:
            state = exact_imaginary_time_state(start, h, rec.tau) if rec.tau > 0 else start
            cache[rec.tau] = energy(state, h)
    e = [cache[r.tau] for r in traj.records]
    return {"exact_energy": e, "exact_ar": [approximation_ratio(x, h) for x in e]}


def _best_adam(graph, convention, experiment: ExperimentSpec, seed: int):
    """ADAM over every configured learning rate; keeps the run with the lowest final AR error."""
    best = None
    for lr in experiment.learning_rates:
        cfg = baseline_adam.AdamConfig(learning_rate=lr, max_iterations=experiment.max_iterations)
        traj = baseline_adam.run(graph, convention, cfg, seed)
        key = (not traj.success, traj.final.ar_error)
        if best is None or key < best[0]:
            best = (key, traj)
    return best[1]


def run_instance(task: tuple) -> dict:
    """One (optimizer, epsilon, instance) job; top-level so worker processes can pickle it."""
    experiment, out, optimizer, eps, n, index = task
    seed = instance_seed(experiment.master_seed, experiment.ensemble, n, index)
    gpath = _graph_path(out, experiment.ensemble, n, index)
    if gpath.exists():
        graph = gm.read_graph(gpath)
    else:
        graph = gm.generate(experiment.ensemble, n, seed)
        gpath.parent.mkdir(parents=True, exist_ok=True)
        gm.write_graph(graph, gpath)
    conv = experiment.resolved_convention
    if optimizer == "varit":
        cfg = varit.VarItConfig(dtau=experiment.dtau, max_iterations=experiment.max_iterations,
                                use_sigmoid=experiment.use_sigmoid, epsilon=eps)
        traj = varit.run(graph, conv, cfg, seed)
    else:
        traj = _best_adam(graph, conv, experiment, seed)
    extra = {"ar_rounded": [r.ar_rounded for r in traj.records]}
    if experiment.exact_reference:
        extra.update(exact_reference_columns(traj, graph, conv))
    stem = f"{optimizer}_{experiment.ensemble}_n{n}_eps{eps:g}_i{index:03d}"
    tpath = out / "trajectories" / f"{stem}.csv"
    ppath = out / "trajectories" / f"{stem}.params.csv"
    write_csv(traj, tpath, extra)
    write_params_csv(traj, ppath)
    return dict(optimizer=optimizer, ensemble=experiment.ensemble, n=n, epsilon=eps, index=index,
                seed=seed, convention=conv.value, trajectory=str(tpath.relative_to(out)),
                params=str(ppath.relative_to(out)), graph=str(gpath.relative_to(out)))


def cmd_run(experiment: ExperimentSpec, out: Path, jobs: int = 1) -> list[dict]:
    cmd_generate(experiment, out)
    tasks = [(experiment, out, opt, eps, n, i) for opt in experiment.optimizers for eps in experiment.epsilons
             for n in experiment.sizes for i in range(experiment.instances)]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            rows = list(pool.map(run_instance, tasks))
    else:
        rows = [run_instance(t) for t in tasks]
    atomic_write_rows(out / "runs.csv", RUNS_COLUMNS,
                      ([r[c] for c in RUNS_COLUMNS] for r in rows))
    return rows


def _load_runs(out: Path) -> list[dict]:
    path = out / "runs.csv"
    if not path.exists():
        raise FileNotFoundError(f"{path} not found; run `zyqite run` first")
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise InputError(f"{path} lists no runs")
    return rows


def load_trajectory(out: Path, row: dict):
    graph = gm.read_graph(out / row["graph"])
    traj = read_csv(out / row["trajectory"], out / row["params"], row["optimizer"],
                    graph.n_vertices)
    traj.meta.update(seed=int(row["seed"]), n_edges=graph.n_edges,
                     convention=row["convention"])
    return traj


def max_entropy(traj) -> float:
    values = analysis.truncated_entropy(traj)
    values = values[np.isfinite(values)]
    return float(values.max()) if values.size else math.nan


def cmd_analyze(out: Path) -> dict:
    """Per-batch summaries, long-format mean curves, and entropy volume-law fits."""
    rows = _load_runs(out)
    groups: dict[tuple, list] = {}
    for row in rows:
        key = (row["optimizer"], row["ensemble"], float(row["epsilon"]))
        groups.setdefault(key, []).append(row)
    summaries: dict[str, list] = {}
    curves, report = [], []
    for (opt, ens, eps), members in sorted(groups.items()):
        by_n: dict[int, list] = {}
        for row in members:
            by_n.setdefault(int(row["n"]), []).append(load_trajectory(out, row))
        ent_points = []
        for n, trajs in sorted(by_n.items()):
            m = [max_entropy(t) for t in trajs]
            if np.isfinite(m).any():
                ent_points.append((n, float(np.nanmean(m))))
        fit = None
        if len(ent_points) >= 3:
            fit = analysis.volume_law_fit(ent_points)
            report.append(f"{opt} {ens} epsilon={eps:g}: S(N) = a N + b, "
                          f"a = {fit.a:.6f} +- {fit.stderr_a:.6f}, "
                          f"b = {fit.b:.6f} +- {fit.stderr_b:.6f} "
                          f"over N = {[p[0] for p in ent_points]}")
        for n, trajs in sorted(by_n.items()):
            stats = analysis.batch_stats(trajs)
            summaries.setdefault(opt, []).append(
                [ens, n, eps, stats.instances, stats.success_fraction, stats.mean_iterations,
                 stats.mean_max_layers, fit.a if fit else math.nan, fit.b if fit else math.nan])
            for it, (mu, se) in enumerate(zip(stats.mean_ar_error, stats.stderr_ar_error)):
                curves.append([opt, ens, n, eps, it, mu, se])
    for opt, srows in summaries.items():
        atomic_write_rows(out / f"summary_{opt}.csv", SUMMARY_COLUMNS, srows)
    atomic_write_rows(out / "curves.csv", CURVE_COLUMNS, curves)
    text = "\n".join(report) if report else "no entropy fit (needs >= 3 sizes with entropy)"
    (out / "entropy_fit.txt").write_text(text + "\n")
    return {"summaries": summaries, "report": report}


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zyqite", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def experiment(sp):
        sp.add_argument("--preset")
        sp.add_argument("--config")
        sp.add_argument("--ensemble")
        sp.add_argument("--sizes")
        sp.add_argument("--instances", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--convention")
        sp.add_argument("--out", required=True)

    g = sub.add_parser("generate", help="write instance graph files and a seed manifest")
    experiment(g)
    r = sub.add_parser("run", help="optimize every instance and write trajectory CSVs")
    experiment(r)
    r.add_argument("--optimizer", help="comma list of varit, adam")
    r.add_argument("--epsilon", help="comma list of pruning thresholds")
    r.add_argument("--dtau", type=float)
    r.add_argument("--sigmoid", help="true/false")
    r.add_argument("--max-iterations", dest="max_iterations", type=int)
    r.add_argument("--learning-rate", dest="learning_rate", help="comma list (ADAM)")
    r.add_argument("--jobs", type=int, default=1)
    r.add_argument("--analyze", action="store_true", help="run analyze afterwards")
    a = sub.add_parser("analyze", help="summaries, mean curves, entropy fit")
    a.add_argument("out")
    sub.add_parser("presets", help="list built-in presets")
    return p


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "presets":
            for name, (desc, values) in PRESETS.items():
                print(f"{name}: {desc}")
                print("    " + " ".join(f"{k}={v}" for k, v in values.items()))
            return EXIT_OK
        if args.command == "analyze":
            result = cmd_analyze(Path(args.out))
            for line in result["report"]:
                print(line)
            return EXIT_OK
        experiment = build_spec(args)
        out = Path(args.out)
        if args.command == "generate":
            rows = cmd_generate(experiment, out)
            print(f"wrote {len(rows)} graphs to {out}")
            return EXIT_OK
        if args.jobs < 1:
            raise InputError("--jobs must be >= 1")
        rows = cmd_run(experiment, out, args.jobs)
        print(f"wrote {len(rows)} trajectories to {out}")
        if args.analyze:
            for line in cmd_analyze(out)["report"]:
                print(line)
        return EXIT_OK
    except (InputError, GraphError, configparser.Error) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
