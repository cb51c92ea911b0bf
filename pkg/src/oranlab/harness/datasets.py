"""Offline data collection and the environments agents train against.

A synthetic dataset is a KPM CSV recorded while the simulator cycles through
control configurations. Each configuration is held for a *segment* of
consecutive log windows; the segment manifest (stored alongside the CSV and
in the catalog metadata) says which configuration produced which windows.

:class:`ReplayEnv` turns such a dataset into an MDP: the agent's action
updates the current configuration, and the next observed window is drawn
from a segment recorded under the closest matching configuration.
"""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from ..drl.autoencoder import WINDOW_K, EncoderModel
from ..drl.observation import ObservationBuilder, window_matrix
from ..e2.messages import ControlDirective
from ..intent import ActionSpace, IntentSpec, RewardFunction
from ..ransim import DEFAULT_ALLOCATION, FEASIBLE_ALLOCATIONS, SLICES, KpmSample, Scheduler
from ..ransim.kpmcsv import write_kpm_csv
from .scenario import ScenarioConfig

Window = dict  # SliceId -> KpmSample

SEGMENTS_SUFFIX = ".segments.json"


@dataclass(frozen=True)
class Segment:
    first_end: int  # window_end of the first window recorded under this config
    last_end: int
    slicing: tuple[int, int, int] | None
    sched: tuple[str, str, str] | None  # scheduler names in slice order

    def to_obj(self) -> dict[str, Any]:
        return {
            "first_end": self.first_end,
            "last_end": self.last_end,
            "slicing": list(self.slicing) if self.slicing is not None else None,
            "sched": list(self.sched) if self.sched is not None else None,
        }

    @classmethod
    def from_obj(cls, o: Mapping[str, Any]) -> "Segment":
        return cls(
            int(o["first_end"]),
            int(o["last_end"]),
            tuple(o["slicing"]) if o.get("slicing") is not None else None,  # type: ignore[arg-type]
            tuple(o["sched"]) if o.get("sched") is not None else None,  # type: ignore[arg-type]
        )


def control_grid(kind: str = "basic") -> list[tuple[tuple[int, int, int], tuple[str, str, str]]]:
    """Configurations visited during collection.

    ``basic`` holds one dimension at its default while sweeping the other
    (16 slicing rows + 27 scheduler combinations); ``full`` is the product.
    """
    combos = [tuple(p.name for p in c) for c in itertools.product(Scheduler, repeat=len(SLICES))]
    default_sched = ("RR",) * len(SLICES)
    if kind == "basic":
        grid = [(a, default_sched) for a in FEASIBLE_ALLOCATIONS]
        grid += [(DEFAULT_ALLOCATION, c) for c in combos if c != default_sched]
        return grid  # type: ignore[return-value]
    if kind == "full":
        return [(a, c) for a in FEASIBLE_ALLOCATIONS for c in combos]  # type: ignore[misc]
    raise ValueError(f"unknown grid {kind!r}; use 'basic' or 'full'")


def generate_dataset(
    scenario: ScenarioConfig,
    segment_windows: int = 12,
    grid: str = "basic",
    shuffle: bool = True,
) -> tuple[list[KpmSample], list[Segment]]:
    """Run the simulator through every grid configuration and log KPMs.

    Window length follows the scenario's timer set. The visiting order is
    shuffled with the scenario seed so that slow drifts (mobility, buffer
    build-up) are not confounded with the configuration.
    """
    if segment_windows < 1:
        raise ValueError("segment_windows must be positive")
    configs = control_grid(grid)
    if shuffle:
        order = np.random.default_rng(scenario.seed).permutation(len(configs))
        configs = [configs[i] for i in order]
    world = scenario.build_world()
    log_ms = scenario.timers.kpm_log
    samples: list[KpmSample] = []
    segments: list[Segment] = []
    for alloc, sched in configs:
        world.apply_control(alloc, {s: Scheduler[n] for s, n in zip(SLICES, sched)})
        first = world.now + log_ms
        for _ in range(segment_windows):
            world.run(log_ms)
            samples.extend(world.sample_kpm(world.now - log_ms, world.now))
        segments.append(Segment(first, world.now, alloc, sched))
    return samples, segments


def write_dataset(path: str | Path, samples: Sequence[KpmSample], segments: Sequence[Segment]) -> Path:
    """Write the CSV and its segment manifest; returns the manifest path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_kpm_csv(path, samples)
    manifest = segments_path(path)
    manifest.write_text(json.dumps([s.to_obj() for s in segments], sort_keys=True, indent=1) + "\n")
    return manifest


def segments_path(csv_path: str | Path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.name + SEGMENTS_SUFFIX)


def load_segments(obj: Sequence[Mapping[str, Any]] | None) -> list[Segment]:
    return [Segment.from_obj(o) for o in (obj or [])]


def group_windows(samples: Sequence[KpmSample]) -> list[Window]:
    """Regroup CSV rows into per-window dicts, oldest first. Incomplete windows are dropped."""
    by_end: dict[int, Window] = {}
    for s in samples:
        by_end.setdefault(s.window_end, {})[s.slice] = s
    return [by_end[k] for k in sorted(by_end) if len(by_end[k]) == len(SLICES)]


def split_segments(windows: Sequence[Window], segments: Sequence[Segment]) -> list[list[Window]]:
    if not segments:
        return [list(windows)]
    out = []
    for seg in segments:
        part = [w for w in windows if seg.first_end <= _end(w) <= seg.last_end]
        out.append(part)
    return out


def _end(w: Window) -> int:
    return next(iter(w.values())).window_end


def encoder_training_windows(parts: Sequence[Sequence[Window]], stride: int = 1) -> np.ndarray:
    """Every K-long run of consecutive windows, for every slice: shape (N, K, M)."""
    out = []
    for part in parts:
        for start in range(0, len(part) - WINDOW_K + 1, stride):
            chunk = part[start : start + WINDOW_K]
            for s in SLICES:
                out.append(window_matrix(chunk, s))
    if not out:
        raise ValueError(f"dataset has no run of {WINDOW_K} consecutive windows")
    return np.stack(out)


# --------------------------------------------------------------------- environments
def _config_params(slicing, sched) -> dict[str, object]:
    out: dict[str, object] = {}
    if slicing is not None:
        out["slicing"] = tuple(slicing)
    if sched is not None:
        for s, name in zip(SLICES, sched):
            out[f"sched:{s.label}"] = Scheduler[name]
    return out


class ReplayEnv:
    """Dataset-replay environment.

    One step is one decision: the directive is folded into the current
    configuration, ``windows_per_step`` windows are read from the best
    matching segment, and the reward is the intent's global reward over
    those windows. The observation is built from the last K windows seen.
    """

    def __init__(
        self,
        windows: Sequence[Window],
        segments: Sequence[Segment],
        intent: IntentSpec,
        encoder: EncoderModel,
        space: ActionSpace,
        windows_per_step: int = 1,
    ) -> None:
        self.parts = split_segments(windows, segments)
        self.configs = [
            _config_params(s.slicing, s.sched) for s in segments
        ] if segments else [{}]
        keep = [i for i, p in enumerate(self.parts) if p]
        if not keep:
            raise ValueError("dataset has no usable windows")
        self.parts = [self.parts[i] for i in keep]
        self.configs = [self.configs[i] for i in keep]
        self.intent = intent
        self.space = space
        self.reward_fn = RewardFunction(intent)
        self.builder = ObservationBuilder(
            encoder, intent.slice_ids, {s.name: s.observation_kpis for s in intent.slices}
        )
        self.windows_per_step = int(windows_per_step)
        self.observation_dim = self.builder.dim
        self.n_actions = len(space)
        self.reset()

    def reset(self) -> np.ndarray:
        self.current = dict(self.configs[0])
        self.cursor = [0] * len(self.parts)
        self.history: deque = deque(maxlen=WINDOW_K)
        self.segment = 0
        for _ in range(WINDOW_K):
            self.history.append(self._next_window(0))
        return self.builder.build(list(self.history))

    def _next_window(self, seg: int) -> Window:
        part = self.parts[seg]
        w = part[self.cursor[seg] % len(part)]
        self.cursor[seg] += 1
        return w

    def match(self, config: Mapping[str, object], prefer: frozenset[str] | set[str] = frozenset()) -> int:
        """Segment closest to ``config``.

        Agreement on the ``prefer`` parameters (those the last action set)
        counts first, agreement on the rest breaks ties, then the lowest index.
        """
        best, best_score = 0, (-1, -1)
        for i, c in enumerate(self.configs):
            hits = [k for k, v in config.items() if c.get(k) == v]
            score = (sum(1 for k in hits if k in prefer), len(hits))
            if score > best_score:
                best, best_score = i, score
        return best

    def step(self, action: int) -> tuple[np.ndarray, float]:
        directive: ControlDirective = self.space[action]
        params = directive.parameters()
        self.current.update(params)
        self.segment = self.match(self.current, set(params))
        fresh = [self._next_window(self.segment) for _ in range(self.windows_per_step)]
        self.history.extend(fresh)
        return self.builder.build(list(self.history)), float(self.reward_fn(fresh))


class LiveSimEnv:
    """Trains directly against the simulator.

    Not part of the offline workflow: agents normally learn from recorded
    datasets. Useful to check that a policy can be learned at all when the
    dataset is too coarse.
    """

    def __init__(
        self,
        scenario: ScenarioConfig,
        intent: IntentSpec,
        encoder: EncoderModel,
        space: ActionSpace,
    ) -> None:
        self.scenario = scenario
        self.intent = intent
        self.space = space
        self.reward_fn = RewardFunction(intent)
        self.builder = ObservationBuilder(
            encoder, intent.slice_ids, {s.name: s.observation_kpis for s in intent.slices}
        )
        self.timers = scenario.timers
        self.observation_dim = self.builder.dim
        self.n_actions = len(space)
        self.reset()

    def _advance(self, ms: int) -> list[Window]:
        log_ms = self.timers.kpm_log
        out = []
        for _ in range(ms // log_ms):
            self.world.run(log_ms)
            out.append({s.slice: s for s in self.world.sample_kpm(self.world.now - log_ms, self.world.now)})
        self.history.extend(out)
        return out

    def reset(self) -> np.ndarray:
        self.world = self.scenario.build_world()
        self.history: deque = deque(maxlen=WINDOW_K)
        self._advance(WINDOW_K * self.timers.kpm_log)
        return self.builder.build(list(self.history))

    def step(self, action: int) -> tuple[np.ndarray, float]:
        d: ControlDirective = self.space[action]
        self.world.apply_control(d.slicing, d.sched)
        fresh = self._advance(self.timers.action_update)
        return self.builder.build(list(self.history)), float(self.reward_fn(fresh))

