"""Experiment configuration, seed sweeps and aggregation.

Each run derives independent seeds for instance generation, wake schedule,
adversarial delays and algorithm randomness from ``(run seed, stream label)``
so rows are reproducible one by one and in any execution order.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from statistics import mean
from typing import Any

import numpy as np

from . import netgraph as ng
from .advising import compute_advice
from .asim import DelayPolicy, RunMetrics, Simulator
from .netgraph import Knowledge, Network, WakeSchedule
from .protocols import make_protocol

__all__ = [
    "ExperimentConfig",
    "SweepResult",
    "ConfigError",
    "IncompleteWakeError",
    "derive_seed",
    "build_instance",
    "build_schedule",
    "staggered_schedule",
    "run_one",
    "run_experiment",
    "scaling_sweep",
    "write_csv",
]


class ConfigError(ValueError):
    pass


class IncompleteWakeError(RuntimeError):
    """Strict mode: a run ended with some node still asleep."""


def derive_seed(seed: int, label: str) -> int:
    digest = hashlib.blake2b(f"{seed}:{label}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little") >> 1


@dataclass
class ExperimentConfig:
    """One experiment: instances x seeds, one protocol.

    ``instance`` is a dict (or list of dicts) with ``kind`` in
    ``random | lb-g | lb-gk | path | star | complete | file``.  ``wake`` has
    ``kind`` in ``single-random | all | lb-centers | staggered | explicit |
    file``.
    """

    instance: dict | list[dict]
    protocol: str
    seeds: list[int]
    scheme: str | None = None
    k: int | None = None
    tau: int = 1
    delay_mode: str = "uniform"
    delay_value: int | None = None
    delay_table: str | None = None
    wake: dict = field(default_factory=lambda: {"kind": "single-random"})
    congest_limit: int | None = None
    strict: bool = False
    c: int = 4
    output: str | None = None
    workers: int = 1

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentConfig:
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path: str | Path) -> ExperimentConfig:
        return cls.from_dict(json.loads(Path(path).read_text()))

    @property
    def instances(self) -> list[dict]:
        return self.instance if isinstance(self.instance, list) else [self.instance]

    @property
    def protocol_id(self) -> str:
        if self.protocol == "advice":
            if not self.scheme:
                raise ConfigError("protocol 'advice' needs a scheme")
            return f"advice:{self.scheme}"
        return self.protocol

    @property
    def scheme_id(self) -> str | None:
        pid = self.protocol_id
        if not pid.startswith("advice:"):
            return None
        scheme = pid.split(":", 1)[1]
        if scheme == "spanner":
            if self.k is None:
                raise ConfigError("the spanner scheme needs k")
            scheme = f"spanner:{self.k}"
        return scheme

    def knowledge_for(self, inst: dict) -> Knowledge:
        default = Knowledge.KT1 if self.protocol_id == "dfs-rank" else Knowledge.KT0
        return Knowledge(inst.get("knowledge", default))

    def validate(self) -> None:
        if not self.seeds:
            raise ConfigError("seed list is empty")
        if self.tau < 1:
            raise ConfigError("tau must be >= 1")
        pid = self.protocol_id
        scheme = self.scheme_id
        try:
            make_protocol(pid if scheme is None else f"advice:{scheme}", self.c)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        for inst in self.instances:
            if "kind" not in inst:
                raise ConfigError("instance spec needs a kind")
            if pid == "dfs-rank" and self.knowledge_for(inst) is not Knowledge.KT1:
                raise ConfigError("dfs-rank requires a KT1 network")
            if inst["kind"] == "random":
                n, m = inst.get("n"), inst.get("m")
                if n is None or m is None or n < 2 or not n - 1 <= m <= n * (n - 1) // 2:
                    raise ConfigError(f"infeasible random instance n={n}, m={m}")
            if inst["kind"] == "lb-gk":
                raise ConfigError("the high-girth family G_k is not supported")
        if self.wake.get("kind") == "lb-centers" and any(i["kind"] != "lb-g" for i in self.instances):
            raise ConfigError("lb-centers wake schedule only applies to lb-g instances")


def build_instance(inst: dict, seed: int, knowledge: Knowledge) -> tuple[Network, WakeSchedule | None]:
    kind = inst["kind"]
    gseed = inst.get("seed", derive_seed(seed, "graph"))
    if kind == "random":
        return ng.generate_random_connected(inst["n"], inst["m"], gseed, knowledge), None
    if kind == "lb-g":
        return ng.generate_lb_family_G(inst["n"], gseed, inst.get("ids"), knowledge)
    if kind == "lb-gk":
        return ng.generate_lb_family_Gk(inst["n"], inst.get("k", 1), gseed)
    if kind == "path":
        return ng.path_graph(inst["n"], knowledge), None
    if kind == "star":
        return ng.star_graph(inst["n"] - 1, knowledge, seed=gseed), None
    if kind == "complete":
        return ng.complete_graph(inst["n"], knowledge), None
    if kind == "file":
        net = ng.read_network(inst["path"])
        return net.with_knowledge(inst.get("knowledge", net.knowledge)), None
    raise ConfigError(f"unknown instance kind {kind!r}")


def staggered_schedule(n: int, seed: int, gap: int | None = None, batches: list[int] | None = None) -> WakeSchedule:
    """Wake disjoint random batches at ticks ``0, gap, 2*gap, ...``.

    The default is three batches of ``n // 3`` nodes at ticks ``0, n, 2n``.
    """
    gap = n if gap is None else gap
    if batches is None:
        batches = [max(1, n // 3)] * min(3, n)
    if sum(batches) > n:
        raise ConfigError("staggered batches exceed n")
    order = np.random.default_rng(seed).permutation(n)
    entries, pos = [], 0
    for j, size in enumerate(batches):
        entries += [(int(v), j * gap) for v in order[pos : pos + size]]
        pos += size
    return WakeSchedule(tuple(entries))


def build_schedule(spec: dict, net: Network, seed: int, default: WakeSchedule | None) -> WakeSchedule:
    kind = spec.get("kind", "single-random")
    wseed = derive_seed(seed, "wake")
    if kind == "single-random":
        return WakeSchedule.at_zero([int(np.random.default_rng(wseed).integers(net.n))])
    if kind == "all":
        return WakeSchedule.at_zero(range(net.n))
    if kind == "lb-centers":
        if default is None:
            raise ConfigError("instance has no center set")
        return default
    if kind == "staggered":
        return staggered_schedule(net.n, wseed, spec.get("gap"), spec.get("batches"))
    if kind == "explicit":
        return WakeSchedule(tuple(tuple(e) for e in spec["entries"]))
    if kind == "file":
        return ng.read_schedule(spec["path"])
    raise ConfigError(f"unknown wake schedule kind {kind!r}")


def _delays(cfg: ExperimentConfig, seed: int) -> DelayPolicy:
    if cfg.delay_mode == "uniform":
        return DelayPolicy.uniform(cfg.tau, derive_seed(seed, "delay"))
    if cfg.delay_mode == "constant":
        return DelayPolicy.constant(cfg.delay_value or cfg.tau, cfg.tau)
    if cfg.delay_mode == "table":
        return DelayPolicy.from_table_file(cfg.delay_table, cfg.tau)
    raise ConfigError(f"unknown delay mode {cfg.delay_mode!r}")


def run_one(cfg: ExperimentConfig, inst_index: int, seed: int) -> tuple[dict, RunMetrics]:
    """Execute a single (instance, seed) cell and return its JSON row and metrics."""
    inst = cfg.instances[inst_index]
    net, centers = build_instance(inst, seed, cfg.knowledge_for(inst))
    schedule = build_schedule(cfg.wake, net, seed, centers)
    scheme = cfg.scheme_id
    protocol = make_protocol(cfg.protocol_id if scheme is None else f"advice:{scheme}", cfg.c)
    advice = None if scheme is None else compute_advice(net, scheme, derive_seed(seed, "spanner"))
    sim = Simulator(
        net,
        protocol,
        schedule,
        _delays(cfg, seed),
        advice=advice,
        rng_seed=derive_seed(seed, "algorithm"),
        congest_limit=cfg.congest_limit,
        strict_congest=cfg.strict,
    )
    metrics = sim.run()
    metrics.seed = seed
    if cfg.strict and not metrics.all_awake:
        raise IncompleteWakeError(f"instance {inst_index} seed {seed}: not every node woke up")
    return metrics.to_dict(), metrics


def _cell(args):
    cfg, i, s = args
    row, metrics = run_one(cfg, i, s)
    return row, metrics.max_node_forwards


@dataclass
class SweepResult:
    rows: list[dict]
    max_node_forwards: list[int]
    summary: dict = field(default_factory=dict)


def aggregate(rows: list[dict], forwards: list[int] | None = None) -> dict:
    """Summary statistics; everything but forwards is recomputable from rows."""
    msgs = [r["messages_total"] for r in rows]
    times = [r["time_units"] for r in rows]
    out: dict[str, Any] = {
        "runs": len(rows),
        "mean_messages": mean(msgs),
        "max_messages": max(msgs),
        "mean_time_units": mean(times),
        "max_time_units": max(times),
        "all_awake_fraction": sum(r["all_awake"] for r in rows) / len(rows),
        "advice_max_bits": max(r["advice_max_bits"] for r in rows),
        "mean_advice_avg_bits": mean(r["advice_avg_bits"] for r in rows),
    }
    if forwards is not None:
        out["max_node_forwards"] = max(forwards, default=0)
    return out


def run_experiment(cfg: ExperimentConfig) -> SweepResult:
    """Run every (instance, seed) cell; rows come back sorted by (instance, seed)."""
    cfg.validate()
    cells = [(cfg, i, s) for i in range(len(cfg.instances)) for s in cfg.seeds]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(_cell, cells))
    else:
        results = [_cell(c) for c in cells]
    rows = [r for r, _ in results]
    forwards = [f for _, f in results]
    result = SweepResult(rows, forwards, aggregate(rows, forwards))
    result.summary["config"] = asdict(cfg)
    if cfg.output:
        out = Path(cfg.output)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text("".join(json.dumps(r) + "\n" for r in rows))
        out.with_suffix(".summary.json").write_text(json.dumps(result.summary, indent=2, sort_keys=True) + "\n")
    return result


def scaling_sweep(
    protocol: str,
    sizes: list[int],
    seeds_per_size: int,
    *,
    edges_per_node: int = 4,
    tau: int = 4,
    wake: dict | None = None,
    k: int | None = None,
    with_diameter: bool = False,
    first_seed: int = 0,
) -> list[dict]:
    """Mean messages/time per size on random connected graphs with ``m = edges_per_node * n``.

    Normalized columns: messages and time over ``n ln n``, messages over
    ``2m``, and (with ``with_diameter``) time over ``D log2 n``.
    """
    if list(sizes) != sorted(sizes):
        raise ConfigError("sizes must be ascending")
    table = []
    scheme = protocol.split(":", 1)[1] if protocol.startswith("advice:") else None
    for n in sizes:
        m = min(edges_per_node * n, n * (n - 1) // 2)
        cfg = ExperimentConfig(
            instance={"kind": "random", "n": n, "m": m},
            protocol=protocol,
            seeds=list(range(first_seed, first_seed + seeds_per_size)),
            tau=tau,
            wake=wake or {"kind": "single-random"},
            k=k,
        )
        if scheme == "spanner" and k is None:
            raise ConfigError("spanner sweeps need k")
        res = run_experiment(cfg)
        msgs = mean(r["messages_total"] for r in res.rows)
        times = mean(r["time_units"] for r in res.rows)
        nlogn = n * math.log(n)
        row = {
            "n": n,
            "m": m,
            "runs": len(res.rows),
            "mean_messages": msgs,
            "mean_time_units": times,
            "max_node_forwards": max(res.max_node_forwards),
            "messages_per_n_ln_n": msgs / nlogn,
            "time_per_n_ln_n": times / nlogn,
            "messages_per_2m": msgs / (2 * m),
            "all_awake_fraction": res.summary["all_awake_fraction"],
        }
        if with_diameter:
            diams = [
                ng.diameter(build_instance(cfg.instance, s, cfg.knowledge_for(cfg.instance))[0])
                for s in cfg.seeds
            ]
            row["mean_diameter"] = mean(diams)
            row["time_per_D_log2_n"] = mean(
                r["time_units"] / (d * math.log2(n)) for r, d in zip(res.rows, diams)
            )
        table.append(row)
    return table


def write_csv(table: list[dict], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(table[0]))
        writer.writeheader()
        writer.writerows(table)
