"""Grid sweeps: train, onboard and run one xApp per cell, then tabulate."""

from __future__ import annotations

import csv
import io
import itertools
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from ..catalog import Catalog
from ..intent import make_intent, weights_for
from ..ransim import SLICES
from ..ric import TIMER_SETS, onboard_xapp
from .experiment import run_experiment
from .scenario import ScenarioConfig
from .training import train

log = logging.getLogger(__name__)

KIND_ACTIONS = {
    "slicing": ("ran_slicing",),
    "sched": ("scheduling",),
    "joint": ("ran_slicing", "scheduling"),
}
TABLE_COLUMNS = (
    "cell", "action_kind", "gamma", "weights", "timer_set", "scenario", "status", "model_id",
    "digest", "embb_dl_brate_median", "mmtc_dl_tx_pkts_median", "urllc_dl_buffer_median",
)
_SPEC_KEYS = {"dataset", "agent", "train_steps", "action_kinds", "gammas", "weights", "timer_sets",
              "scenarios", "seed", "encoder_epochs"}


@dataclass
class SweepSpec:
    dataset: str
    agent: str = "ppo"
    train_steps: int = 1000
    action_kinds: list[str] = field(default_factory=lambda: ["slicing", "sched", "joint"])
    gammas: list[float] = field(default_factory=lambda: [0.5, 0.99])
    weights: list[str] = field(default_factory=lambda: ["default"])
    timer_sets: list[int] = field(default_factory=lambda: [1])
    scenarios: list[dict[str, Any]] = field(default_factory=lambda: [{}])
    seed: int = 0
    encoder_epochs: int = 20

    def __post_init__(self) -> None:
        for k in self.action_kinds:
            if k not in KIND_ACTIONS:
                raise ValueError(f"unknown action kind {k!r}; use {sorted(KIND_ACTIONS)}")
        for t in self.timer_sets:
            if t not in TIMER_SETS:
                raise ValueError(f"unknown timer set {t!r}")
        for s in self.scenarios:
            ScenarioConfig.from_obj(s)

    @classmethod
    def from_obj(cls, o: Mapping[str, Any]) -> "SweepSpec":
        extra = set(o) - _SPEC_KEYS
        if extra:
            raise ValueError(f"unknown sweep keys {sorted(extra)}")
        return cls(**dict(o))

    def cells(self) -> list[dict[str, Any]]:
        grid = itertools.product(self.action_kinds, self.gammas, self.weights, self.timer_sets,
                                 range(len(self.scenarios)))
        out = []
        for kind, gamma, weights, timer_set, sc in grid:
            out.append({
                "cell": f"{kind}-g{gamma}-{weights}-set{timer_set}-sc{sc}",
                "action_kind": kind,
                "gamma": gamma,
                "weights": weights,
                "timer_set": timer_set,
                "scenario": sc,
            })
        return out


def run_cell(spec: SweepSpec, cell: Mapping[str, Any], catalog_root: str, out_root: str) -> dict[str, Any]:
    row = {k: cell[k] for k in ("cell", "action_kind", "gamma", "weights", "timer_set", "scenario")}
    try:
        cat = Catalog(catalog_root)
        intent = make_intent(SLICES, list(KIND_ACTIONS[cell["action_kind"]]),
                             weights_for(SLICES, cell["weights"]))
        trained = train(cat, intent, spec.dataset, spec.agent, spec.train_steps, {"gamma": cell["gamma"]},
                        seed=spec.seed, timer_set=cell["timer_set"], encoder_epochs=spec.encoder_epochs)
        desc, _ = onboard_xapp(cat, f"x-{trained.model_id}-set{cell['timer_set']}", trained.model_id,
                               trained.intent_id, trained.model.metadata["domain"], TIMER_SETS[cell["timer_set"]])
        scenario = ScenarioConfig.from_obj(spec.scenarios[cell["scenario"]]).with_(timer_set=cell["timer_set"])
        result = run_experiment(scenario, [desc], Path(out_root) / cell["cell"], catalog=cat)
        s = result.summary["slices"]
        row.update(
            status="ok",
            model_id=trained.model_id,
            digest=result.digest,
            embb_dl_brate_median=s.get("embb", {}).get("dl_brate", {}).get("median"),
            mmtc_dl_tx_pkts_median=s.get("mmtc", {}).get("dl_tx_pkts", {}).get("median"),
            urllc_dl_buffer_median=s.get("urllc", {}).get("dl_buffer", {}).get("median"),
        )
    except Exception as exc:  # a failed cell is a row, not a crashed sweep
        log.warning("sweep cell %s failed: %s", cell["cell"], exc)
        row.update(status=f"failed: {type(exc).__name__}: {exc}")
    return row


def _cell_job(args) -> dict[str, Any]:
    spec_obj, cell, catalog_root, out_root = args
    return run_cell(SweepSpec.from_obj(spec_obj), cell, catalog_root, out_root)


def table_csv(rows: list[dict[str, Any]]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, TABLE_COLUMNS, lineterminator="\n", restval="")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in TABLE_COLUMNS})
    return buf.getvalue()


def sweep(spec: SweepSpec, catalog_root: str | Path, out_root: str | Path, workers: int = 0) -> list[dict[str, Any]]:
    """Run every cell (in ``workers`` processes when > 1) and write ``sweep.csv``."""
    out = Path(out_root)
    out.mkdir(parents=True, exist_ok=True)
    cells = spec.cells()
    spec_obj = json.loads(json.dumps(spec.__dict__))
    jobs = [(spec_obj, c, str(catalog_root), str(out)) for c in cells]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_cell_job, jobs))
    else:
        rows = [_cell_job(j) for j in jobs]
    rows.sort(key=lambda r: r["cell"])
    (out / "sweep.csv").write_text(table_csv(rows))
    return rows
