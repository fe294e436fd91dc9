"""Seeded instance generation and head-to-head evaluation.

Every instance comes from its own counter-based stream keyed by
``(seed, task, n, instance_id)``, so instances can be generated and
evaluated in any order or in parallel without changing the report.
"""
from __future__ import annotations

import csv
import io
import json
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from synthopt import oracles
from synthopt.partition import PartitionInstance, partition_metrics, solve_partition
from synthopt.tsp import DEFAULT_LAMBDA, Tour, TspInstance, solve_tsp, tsp_metrics

TASK_KEYS = {"partition": 1, "tsp": 2}
PARTITION_MAX_WEIGHT = 10**6
METHODS = {
    "partition": ("synthesis", "kk", "oracle"),
    "tsp": ("synthesis", "nn", "nn+2opt", "oracle"),
}


@dataclass(frozen=True)
class BenchConfig:
    task: str
    sizes: tuple[int, ...]
    instances_per_size: int
    seed: int = 0
    valency_mode: str = "greedy"
    polish: bool = True
    lam: float = DEFAULT_LAMBDA
    workers: int = 1

    def __post_init__(self):
        if self.task not in TASK_KEYS:
            raise ValueError(f"task must be one of {sorted(TASK_KEYS)}, got {self.task!r}")
        if self.valency_mode not in ("greedy", "regret"):
            raise ValueError(f"valency mode must be greedy or regret, got {self.valency_mode!r}")
        if self.instances_per_size < 1:
            raise ValueError("instances_per_size must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        low = 3 if self.task == "tsp" else 1
        for n in self.sizes:
            if n < low:
                raise ValueError(f"{self.task} sizes must be >= {low}, got {n}")


@dataclass(frozen=True)
class BenchRow:
    task: str
    n: int
    instance_id: int
    method: str
    value: float | None
    completeness: float | None
    efficiency: float | None
    steps: int | None
    wall_time: float


COLUMNS = tuple(f.name for f in fields(BenchRow))


@dataclass
class BenchReport:
    config: BenchConfig
    rows: list[BenchRow]
    summary: list[dict] = field(default_factory=list)


def _rng(task: str, n: int, seed: int, instance_id: int) -> np.random.Generator:
    key = np.random.SeedSequence([seed, TASK_KEYS[task], n, instance_id])
    return np.random.Generator(np.random.Philox(key))


def generate_instance(task: str, n: int, seed: int, instance_id: int):
    rng = _rng(task, n, seed, instance_id)
    if task == "partition":
        if n < 1:
            raise ValueError("partition instances need at least one item")
        weights = rng.integers(1, PARTITION_MAX_WEIGHT, size=n, endpoint=True)
        return PartitionInstance(tuple(int(w) for w in weights))
    if task == "tsp":
        if n < 3:
            raise ValueError("tsp instances need at least three nodes")
        return TspInstance.from_points(rng.random((n, 2)))
    raise ValueError(f"unknown task {task!r}")


def _timed(fn, *args, **kwargs):
    start = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - start


def _partition_rows(cfg: BenchConfig, n: int, k: int, inst: PartitionInstance) -> list[BenchRow]:
    exact = None
    exact_time = 0.0
    if oracles.within_bounds("partition", n):
        exact, exact_time = _timed(oracles.exact_partition, inst)

    def row(method, assignment, wall, steps=None):
        d, eff = partition_metrics(inst, assignment)
        return BenchRow("partition", n, k, method, d, 1.0, eff if exact else None, steps, wall)

    res, t = _timed(solve_partition, inst, cfg.polish)
    rows = [row("synthesis", res.assignment, t, len(res.trace))]
    kk, t = _timed(oracles.baseline_partition_kk, inst)
    rows.append(row("kk", kk, t))
    if exact is not None:
        rows.append(row("oracle", exact.witness, exact_time))
    return rows


def _tsp_rows(cfg: BenchConfig, n: int, k: int, inst: TspInstance) -> list[BenchRow]:
    exact = None
    exact_time = 0.0
    if oracles.within_bounds("tsp", n):
        exact, exact_time = _timed(oracles.exact_tsp, inst)
    optimum = exact.optimum if exact is not None else None

    def row(method, tour, wall, steps=None):
        if isinstance(tour, Tour):
            eff = tsp_metrics(inst, tour, optimum)[1] if optimum is not None else None
            return BenchRow("tsp", n, k, method, tour.length, 1.0, eff, steps, wall)
        return BenchRow("tsp", n, k, method, None, tour.completeness, None, steps, wall)

    res, t = _timed(solve_tsp, inst, cfg.valency_mode, cfg.lam)
    rows = [row("synthesis", res.tour, t, len(res.trace))]
    nn, t = _timed(oracles.baseline_tsp, inst, False)
    rows.append(row("nn", nn, t))
    nn2, t = _timed(oracles.baseline_tsp, inst, True)
    rows.append(row("nn+2opt", nn2, t))
    if exact is not None and exact.witness is not None:
        rows.append(row("oracle", exact.witness, exact_time))
    return rows


def evaluate_instance(cfg: BenchConfig, n: int, instance_id: int) -> list[BenchRow]:
    inst = generate_instance(cfg.task, n, cfg.seed, instance_id)
    if cfg.task == "partition":
        return _partition_rows(cfg, n, instance_id, inst)
    return _tsp_rows(cfg, n, instance_id, inst)


def _evaluate_job(job):
    return evaluate_instance(*job)


def summarize(task: str, rows: list[BenchRow]) -> list[dict]:
    order = {m: i for i, m in enumerate(METHODS[task])}
    groups: dict[tuple[int, str], list[BenchRow]] = {}
    for r in rows:
        groups.setdefault((r.n, r.method), []).append(r)
    out = []
    for (n, method), rs in sorted(groups.items(), key=lambda kv: (kv[0][0], order[kv[0][1]])):
        effs = [r.efficiency for r in rs if r.efficiency is not None]
        out.append(
            {
                "task": task,
                "n": n,
                "method": method,
                "count": len(rs),
                "mean_efficiency": statistics.fmean(effs) if effs else None,
                "min_efficiency": min(effs) if effs else None,
                "completeness_rate": sum(1 for r in rs if r.completeness == 1.0) / len(rs),
            }
        )
    return out


def run_benchmark(cfg: BenchConfig) -> BenchReport:
    jobs = [(cfg, n, k) for n in cfg.sizes for k in range(cfg.instances_per_size)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_evaluate_job, jobs))
    else:
        results = [_evaluate_job(job) for job in jobs]
    order = {m: i for i, m in enumerate(METHODS[cfg.task])}
    rows = sorted(
        (r for rs in results for r in rs),
        key=lambda r: (r.n, r.instance_id, order[r.method]),
    )
    return BenchReport(cfg, rows, summarize(cfg.task, rows))


def _cell(value) -> str:
    if value is None:
        return ""
    return repr(value) if isinstance(value, float) else str(value)


def report_csv(report: BenchReport, mask_wall_time: bool = False) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for r in report.rows:
        doc = asdict(r)
        if mask_wall_time:
            doc["wall_time"] = None
        writer.writerow([_cell(doc[c]) for c in COLUMNS])
    return buf.getvalue()


def report_jsonl(report: BenchReport, mask_wall_time: bool = False) -> str:
    lines = []
    for r in report.rows:
        doc = {"kind": "row", **asdict(r)}
        if mask_wall_time:
            doc["wall_time"] = None
        lines.append(json.dumps(doc))
    for s in report.summary:
        lines.append(json.dumps({"kind": "summary", **s}))
    return "".join(line + "\n" for line in lines)


def format_summary(summary: list[dict]) -> str:
    head = f"{'n':>5} {'method':<10} {'count':>5} {'mean_eff':>10} {'min_eff':>10} {'complete':>9}"
    lines = [head]
    for s in summary:
        mean = "-" if s["mean_efficiency"] is None else f"{s['mean_efficiency']:.6f}"
        low = "-" if s["min_efficiency"] is None else f"{s['min_efficiency']:.6f}"
        lines.append(
            f"{s['n']:>5} {s['method']:<10} {s['count']:>5} {mean:>10} {low:>10}"
            f" {s['completeness_rate']:>9.3f}"
        )
    return "\n".join(lines)


def read_report(path) -> list[dict]:
    """Rows of a CSV or JSONL report as dicts (numbers parsed, blanks as None)."""
    text = open(path).read()
    if text.lstrip().startswith("{"):
        docs = [json.loads(line) for line in text.splitlines() if line.strip()]
        return [d for d in docs if d.get("kind") == "row"]
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        row = {}
        for k, v in rec.items():
            if v == "":
                row[k] = None
            elif k in ("task", "method"):
                row[k] = v
            else:
                row[k] = float(v)
        rows.append(row)
    return rows


def plot_report(rows: list[dict], out_path) -> None:
    """Mean efficiency against instance size, one line per method."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    series: dict[str, dict[int, list[float]]] = {}
    for r in rows:
        if r.get("efficiency") is None:
            continue
        series.setdefault(r["method"], {}).setdefault(int(r["n"]), []).append(r["efficiency"])
    fig, ax = plt.subplots(figsize=(6, 4))
    for method, by_n in series.items():
        ns = sorted(by_n)
        ax.plot(ns, [statistics.fmean(by_n[n]) for n in ns], marker="o", label=method)
    ax.set_xlabel("n")
    ax.set_ylabel("mean efficiency")
    if series:
        ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
