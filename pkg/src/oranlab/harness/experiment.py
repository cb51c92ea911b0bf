"""Co-simulating the gNB and the RIC for one scenario, and recording the result."""

from __future__ import annotations

import hashlib
import json
import os
import shutil
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence

from ..catalog import Catalog
from ..drl.artifact import PolicyModel
from ..intent import IntentSpec
from ..ransim import KpmSample, read_kpm_csv, write_kpm_csv
from ..ric import EventLog, GnbNode, XappDescriptor, dispatch, run_virtual
from .analysis import summarize
from .scenario import ScenarioConfig

KPM_FILE = "kpm.csv"
EVENTS_FILE = "events.jsonl"
SUMMARY_FILE = "summary.json"
RESULT_FILE = "result.json"
HARNESS = "harness"


@dataclass
class ExperimentResult:
    out_dir: Path
    summary: dict[str, Any]
    digest: str

    @property
    def kpm_csv(self) -> Path:
        return self.out_dir / KPM_FILE

    @property
    def events_path(self) -> Path:
        return self.out_dir / EVENTS_FILE

    @classmethod
    def load(cls, out_dir: str | Path) -> "ExperimentResult":
        d = Path(out_dir)
        result = json.loads((d / RESULT_FILE).read_text())
        summary = json.loads((d / SUMMARY_FILE).read_text())
        return cls(d, summary, result["digest"])


def _dumps(obj: Any) -> bytes:
    return (json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n").encode("utf-8")


def run_digest(files: Mapping[str, bytes]) -> str:
    h = hashlib.sha256()
    for name in sorted(files):
        data = files[name]
        h.update(f"{name}\0{len(data)}\0".encode())
        h.update(data)
    return h.hexdigest()


def _model_digests(descs: Sequence[XappDescriptor], catalog: Catalog | None,
                   models: Mapping[str, tuple[PolicyModel, IntentSpec]] | None) -> dict[str, str]:
    out = {}
    for d in descs:
        if models is not None and d.xapp_id in models:
            out[d.xapp_id] = hashlib.sha256(models[d.xapp_id][0].to_bytes()).hexdigest()
        elif catalog is not None:
            out[d.xapp_id] = catalog.entry("model", d.model_id).digest
    return out


def run_experiment(
    scenario: ScenarioConfig,
    xapps: Sequence[XappDescriptor],
    out_dir: str | Path,
    catalog: Catalog | None = None,
    models: Mapping[str, tuple[PolicyModel, IntentSpec]] | None = None,
    workers: int = 0,
) -> ExperimentResult:
    """Run ``scenario`` with ``xapps`` dispatched and write its outputs to ``out_dir``.

    Outputs are assembled in a sibling scratch directory and moved into
    place only once complete, so a failed run leaves nothing behind.
    KPMs are logged at the scenario timer set's ``kpm_log`` granularity.
    """
    out = Path(out_dir)
    out.parent.mkdir(parents=True, exist_ok=True)
    scratch = out.parent / f".{out.name}.partial-{os.getpid()}"
    if scratch.exists():
        shutil.rmtree(scratch)
    scratch.mkdir()
    ric = None
    try:
        world = scenario.build_world()
        gnb = GnbNode(world)
        ev = EventLog()
        ev.emit(0, HARNESS, "run_start", {"scenario": scenario.digest(), "xapps": [d.xapp_id for d in xapps]})
        if xapps:
            ric = dispatch(xapps, gnb, catalog=catalog, models=dict(models or {}), log_=ev, workers=workers)

        log_ms = scenario.timers.kpm_log
        samples: list[KpmSample] = []

        def log_kpm(now: int) -> None:
            if now % log_ms == 0:
                samples.extend(world.sample_kpm(now - log_ms, now))

        run_virtual(gnb, ric, scenario.duration_ms, log_kpm)
        for e in world.events:
            ev.emit(e["tti"], "gnb", e["event"], e)
        ev.emit(world.now, HARNESS, "run_end", {"windows": len(samples) // max(1, len(world.by_slice))})

        kpm_path = scratch / KPM_FILE
        write_kpm_csv(kpm_path, samples)
        events = ev.dumps().encode("utf-8")
        (scratch / EVENTS_FILE).write_bytes(events)
        # Summaries come from the file, not from memory, so they can be recomputed from it.
        stats = summarize(read_kpm_csv(kpm_path))
        summary = {
            "scenario": scenario.to_obj(),
            "scenario_digest": scenario.digest(),
            "model_digests": _model_digests(xapps, catalog, models),
            "xapps": [d.to_obj() for d in xapps],
            "kpm_log_ms": log_ms,
            "windows_per_slice": {k: v["dl_brate"]["n"] for k, v in stats.items()},
            "controls": len(ric.controls) if ric is not None else 0,
            "slices": stats,
        }
        summary_bytes = _dumps(summary)
        (scratch / SUMMARY_FILE).write_bytes(summary_bytes)
        files = {KPM_FILE: kpm_path.read_bytes(), EVENTS_FILE: events, SUMMARY_FILE: summary_bytes}
        digest = run_digest(files)
        result = {"digest": digest, "files": {k: hashlib.sha256(v).hexdigest() for k, v in sorted(files.items())}}
        (scratch / RESULT_FILE).write_bytes(_dumps(result))
    except BaseException:
        shutil.rmtree(scratch, ignore_errors=True)
        raise
    finally:
        if ric is not None:
            ric.close()
    if out.exists():
        shutil.rmtree(out)
    os.replace(scratch, out)
    return ExperimentResult(out, summary, digest)
