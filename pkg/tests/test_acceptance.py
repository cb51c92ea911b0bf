"""Acceptance gate: ten criteria, each with its tolerance and wall-clock budget.

Run with ``pytest tests/test_acceptance.py -s`` to see the verdict lines as
they happen; they are also repeated in the terminal summary.
"""

from __future__ import annotations

import itertools
import json
import math
import statistics
import time
from contextlib import contextmanager
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from oranlab.drl import (
    BanditEnv,
    DqnAgent,
    DqnConfig,
    Experience,
    Mlp,
    PpoBatch,
    PpoConfig,
    dqn_loss,
    dqn_td_target,
    log_softmax,
    ppo_clip_term,
    ppo_total_objective,
    select_action_dqn,
    train_dqn,
    train_ppo,
)
from oranlab.e2 import E2Error, NeedMoreData, decode_frame, decode_message, encode_message
from oranlab.e2.golden import GOLDEN_MESSAGES
from oranlab.harness.cli import main
from oranlab.intent import DEFAULT_WEIGHTS, build_action_space, derive_weight, global_reward
from oranlab.ransim import (
    FEASIBLE_ALLOCATIONS,
    KPM_CSV_HEADER,
    TRAFFIC_PROFILES,
    RanWorld,
    Scheduler,
    SliceId,
    TrafficProfile,
    pf_metric,
    prb_ratio,
)
from oranlab.ric import HIERARCHICAL_SETUPS, TIMER_SETS, Domain, EventLog, GnbNode, XappDescriptor, dispatch, run_virtual

ROOT = Path(__file__).resolve().parents[1]
GOLDEN_DIR = ROOT / "proto-golden"
INTENT_FILE = Path(__file__).parent / "data" / "intent_three_slices.json"

# Allocation rows typed in by hand, in table order (eMBB, mMTC, URLLC).
ALLOCATION_ROWS = [
    (30, 9, 11), (30, 15, 5), (36, 9, 5), (24, 21, 5), (24, 15, 11), (18, 15, 17),
    (18, 9, 23), (18, 21, 11), (12, 27, 11), (12, 15, 23), (12, 9, 29), (6, 27, 17),
    (6, 39, 5), (6, 15, 29), (6, 9, 35), (36, 3, 11),
]
SATURATED = TrafficProfile(embb_bps=40e6, mmtc_bps=40e6, urllc_bps=40e6)


@contextmanager
def criterion(number: int, title: str, budget_s: float):
    """Time a criterion block, record PASS/FAIL, and fail on a blown budget."""
    t0 = time.perf_counter()
    try:
        yield
        elapsed = time.perf_counter() - t0
        assert elapsed < budget_s, f"took {elapsed:.1f} s, budget {budget_s:.0f} s"
    except BaseException as exc:
        line = f"FAIL [{number:2d}] {title} ({time.perf_counter() - t0:.1f} s): {type(exc).__name__}: {exc}"
        ACCEPTANCE_LINES.append(line)
        print("\n" + line)
        raise
    line = f"PASS [{number:2d}] {title} ({elapsed:.1f} s, budget {budget_s:.0f} s)"
    ACCEPTANCE_LINES.append(line)
    print("\n" + line)


# ---------------------------------------------------------------- oracles
def fraction_reward(rewards, weights) -> Fraction:
    return sum((Fraction(w) * Fraction(r) for w, r in zip(weights, rewards)), Fraction(0))


def finite_difference(f, params, h=1e-5):
    out = []
    for p in params:
        g = np.zeros_like(p)
        for i in np.ndindex(p.shape):
            old = p[i]
            p[i] = old + h
            up = f()
            p[i] = old - h
            down = f()
            p[i] = old
            g[i] = (up - down) / (2 * h)
        out.append(g)
    return out


def max_rel_err(analytic, numeric, floor=1e-6) -> float:
    worst = 0.0
    for a, n in zip(analytic, numeric):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
        worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst


def best_arm(payoffs) -> int:
    """Score every length-3 action sequence and return the first arm of the best one."""
    best = max(itertools.product(range(len(payoffs)), repeat=3), key=lambda seq: sum(payoffs[a] for a in seq))
    return best[0]


def medians(world: RanWorld, window_ms: int = 250) -> dict[SliceId, dict[str, float]]:
    samples = [s for k in range(window_ms, world.now + 1, window_ms) for s in world.sample_kpm(k - window_ms, k)]
    out = {}
    for sid in SliceId:
        rows = [s for s in samples if s.slice is sid]
        out[sid] = {k: statistics.median(s.kpi(k) for s in rows) for k in ("dl_brate", "dl_tx_pkts", "dl_buffer")}
    return out


# ---------------------------------------------------------------- 1
def test_01_action_spaces():
    with criterion(1, "action spaces are 16/27/43 and match the allocation table", 1):
        slicing = build_action_space({"ran_slicing"})
        sched = build_action_space({"scheduling"})
        joint = build_action_space({"ran_slicing", "scheduling"})
        assert (len(slicing), len(sched), len(joint)) == (16, 27, 43)
        assert [a.slicing for a in slicing.actions] == ALLOCATION_ROWS
        assert list(FEASIBLE_ALLOCATIONS) == ALLOCATION_ROWS
        triples = {tuple(a.sched[s] for s in SliceId) for a in sched.actions}
        assert triples == set(itertools.product(Scheduler, repeat=3))
        assert joint.actions == slicing.actions + sched.actions


# ---------------------------------------------------------------- 2
def test_02_reward_engine():
    with criterion(2, "global reward matches exact arithmetic to 1e-9", 1):
        rng = np.random.default_rng(20240)
        worst = 0.0
        for _ in range(100):
            r = [float(rng.uniform(0, 20)), float(rng.integers(0, 400)), float(rng.integers(0, 60_000))]
            worst = max(worst, abs(global_reward(r, DEFAULT_WEIGHTS) - float(fraction_reward(r, DEFAULT_WEIGHTS))))
        assert worst < 1e-9, worst
        assert list(DEFAULT_WEIGHTS) == [72.0440333, 0.229357798, -0.00005]
        assert Fraction(456, 304) == Fraction(3, 2)
        assert derive_weight(456, 304, "maximize") == 1.5


# ---------------------------------------------------------------- 3
def test_03_ppo_objective():
    with criterion(3, "PPO clip term, pessimistic bound and gradients", 30):
        assert ppo_clip_term(1.0, 2.0, 0.2) == 2.0
        assert ppo_clip_term(1.5, 1.0, 0.2) == 1.2
        assert ppo_clip_term(0.5, -1.0, 0.2) == -0.8

        rng = np.random.default_rng(3)
        n = 1_000_000
        q = rng.uniform(1e-3, 5.0, n)
        adv = rng.normal(scale=3.0, size=n)
        eps = rng.uniform(0.01, 0.9, n)
        assert np.all(ppo_clip_term(q, adv, eps) <= q * adv)

        net_rng = np.random.default_rng(7)
        actor = Mlp.create((4, 30, 30, 30, 5), "tanh", "linear", net_rng, output_scale=0.5)
        critic = Mlp.create((4, 30, 30, 30, 1), "tanh", "linear", net_rng)
        cfg = PpoConfig()
        m = 24
        states = rng.normal(size=(m, 4))
        actions = rng.integers(5, size=m)
        cur = log_softmax(actor.forward(states))[np.arange(m), actions]
        ratios = rng.choice([0.5, 0.7, 0.95, 1.05, 1.15, 1.4, 1.8], size=m)
        batch = PpoBatch(states, actions, cur - np.log(ratios), rng.normal(size=m), rng.normal(size=m))
        _, ga, gc = ppo_total_objective(batch, actor, critic, cfg)
        f = lambda: ppo_total_objective(batch, actor, critic, cfg)[0]  # noqa: E731
        assert max_rel_err(ga, finite_difference(f, actor.params())) < 1e-4
        assert max_rel_err(gc, finite_difference(f, critic.params())) < 1e-4


# ---------------------------------------------------------------- 4
def test_04_dqn():
    with criterion(4, "DQN target, loss descent, target sync and epsilon-greedy", 30):
        target = Mlp([np.zeros((1, 3))], [np.array([0.5, 2.0, -1.0])], ("linear",))
        assert dqn_td_target(1.0, np.ones(1), 0.95, target) == 2.9

        agent = DqnAgent(3, 4, DqnConfig(target_sync=10**9), seed=1)
        rng = np.random.default_rng(2)
        batch = [Experience(rng.normal(size=3), int(rng.integers(4)), float(rng.normal()), rng.normal(size=3))
                 for _ in range(32)]
        losses = []
        for _ in range(100):
            loss, grads = dqn_loss(agent.q, agent.target, batch, 0.95)
            agent._opt.step(grads)
            losses.append(loss)
        assert all(b < a for a, b in zip(losses, losses[1:]))

        synced = DqnAgent(2, 3, DqnConfig(batch_size=2, target_sync=3), seed=5)
        for _ in range(10):
            synced.observe(rng.normal(size=2), int(rng.integers(3)), 1.0, rng.normal(size=2))
        for _ in range(3):
            synced.update()
        for p, t in zip(synced.q.params(), synced.target.params()):
            assert np.array_equal(p, t)

        n, k, eps = 100_000, 43, 0.1
        qv = np.zeros(k)
        qv[17] = 1.0
        draw_rng = np.random.default_rng(5)
        counts = np.bincount([select_action_dqn(qv, eps, draw_rng) for _ in range(n)], minlength=k)
        for a in range(k):
            p = 1 - eps + eps / k if a == 17 else eps / k
            assert abs(counts[a] - n * p) < 3 * math.sqrt(n * p * (1 - p)), (a, counts[a])


# ---------------------------------------------------------------- 5
def test_05_bandit_learning():
    with criterion(5, "PPO and DQN find the best arm on >= 4/5 seeds", 120):
        env = BanditEnv((0.2, 0.5, 1.0))
        opt = best_arm(env.payoffs)
        assert opt == 2
        obs = env.reset()
        ppo_rates = [float(train_ppo(env, 5000, PpoConfig(), seed=s).probabilities(obs)[opt]) for s in range(5)]
        # The behavior policy explores by construction, so DQN is scored on its greedy choice.
        dqn_rates = []
        for s in range(5):
            agent = train_dqn(env, 5000, DqnConfig(), seed=s)
            dqn_rates.append(float(np.mean([select_action_dqn(agent.q.forward(obs), 0.0, np.random.default_rng(s)) == opt
                                            for _ in range(100)])))
        assert sum(r >= 0.95 for r in ppo_rates) >= 4, ppo_rates
        assert sum(r >= 0.95 for r in dqn_rates) >= 4, dqn_rates


# ---------------------------------------------------------------- 6
def test_06_simulator_ledger():
    with criterion(6, "byte conservation, RR fairness and PF argmax", 60):
        rng = np.random.default_rng(606)
        world = RanWorld({SliceId.EMBB: 3, SliceId.MMTC: 2, SliceId.URLLC: 2}, seed=606, speed_mps=3.0,
                         fading_sigma_db=3.0, profile=TRAFFIC_PROFILES[2], buffer_cap=30_000)
        per_slice = [0, 0, 0]
        for t in range(100_000):
            if t % 250 == 0:
                row = FEASIBLE_ALLOCATIONS[int(rng.integers(16))]
                scheds = {s: Scheduler(int(rng.integers(3))) for s in SliceId}
                world.apply_control(row, scheds)
            c = world.step()
            for s in SliceId:
                per_slice[s] += c.arrived[s] - c.served[s]
                assert per_slice[s] == c.buffer[s]
        for ue in world.ues:
            assert ue.cum_arrived == ue.cum_served + ue.cum_dropped + ue.buffer
        assert sum(ue.cum_dropped for ue in world.ues) > 0

        rr = RanWorld({s: 3 for s in SliceId}, seed=4, profile=SATURATED)
        rr.run(5_000)
        for s in SliceId:
            grants = [rr.ues[i].cum_grants for i in rr.by_slice[s]]
            assert max(grants) - min(grants) <= 1, (s, grants)

        pf = RanWorld({SliceId.EMBB: 4, SliceId.MMTC: 2, SliceId.URLLC: 3}, seed=5, profile=SATURATED,
                      scheds={s: Scheduler.PF for s in SliceId}, fading_sigma_db=4.0, record_grants=True)
        pf.run(2_000)
        assert pf.grant_log
        for _tti, _s, policy, chosen, backlog, rates, ewmas in pf.grant_log:
            assert policy is Scheduler.PF
            best = max(pf_metric(rates[u], ewmas[u]) for u in backlog)
            assert pf_metric(rates[chosen], ewmas[chosen]) == best


# ---------------------------------------------------------------- 7
def _timer_run(descs, ms):
    from conftest import _intent_for, _random_policy

    gnb = GnbNode(RanWorld(seed=0))
    models = {d.xapp_id: (_random_policy(str(d.domain), seed=i), _intent_for()) for i, d in enumerate(descs)}
    ev = EventLog()
    ric = dispatch(descs, gnb, models=models, log_=ev)
    try:
        run_virtual(gnb, ric, ms)
    finally:
        ric.close()
    return ev


def _gaps(ticks):
    return sorted(set(np.diff(ticks).tolist()))


def test_07_timer_semantics():
    with criterion(7, "report and directive cadence for every timer set and setup", 30):
        for set_id, ms in ((1, 60_000), (2, 10_000), (3, 10_000)):
            t = TIMER_SETS[set_id]
            ev = _timer_run([XappDescriptor("x", "m", "i", Domain("slicing"), t)], ms)
            reports = ev.select("report", "x")
            per_report = t.du_report // t.kpm_log
            assert [r.tick for r in reports] == list(range(t.du_report, ms + 1, t.du_report))
            assert all(len(r.payload["samples"]) == 3 * per_report for r in reports)
            ticks = ev.ticks("directive", "x")
            assert ticks[0] == t.du_report * -(-10 // per_report)
            assert _gaps(ticks) == [t.action_update]
            if set_id == 1:
                assert all(len(r.payload["samples"]) == 12 for r in reports)
        for setup, (slc_ms, sch_ms) in sorted(HIERARCHICAL_SETUPS.items()):
            set1 = TIMER_SETS[1]
            ev = _timer_run([XappDescriptor("slc", "m", "i", Domain("slicing"), set1, slc_ms),
                             XappDescriptor("sch", "m", "i", Domain("sched"), set1, sch_ms)], 30_000)
            for name, period in (("slc", slc_ms), ("sch", sch_ms)):
                assert [r.tick for r in ev.select("report", name)] == list(range(period, 30_001, period)), setup
                ticks = ev.ticks("directive", name)
                assert ticks[0] == period * -(-10 // (period // set1.kpm_log))
                assert _gaps(ticks) == [set1.action_update]


# ---------------------------------------------------------------- 8
def test_08_qualitative_trends():
    with criterion(8, "eMBB/mMTC trade-off, idle URLLC buffer, bounded PRB ratio", 120):
        competing = TrafficProfile(embb_bps=50e6, mmtc_bps=5e6, urllc_bps=TRAFFIC_PROFILES[1].urllc_bps)
        chain = [(24, 21, 5), (30, 15, 5), (36, 9, 5)]
        stats = []
        for row in chain:
            w = RanWorld(seed=0, profile=competing, allocation=row)
            w.run(10_000)
            stats.append(medians(w))
        brate = [m[SliceId.EMBB]["dl_brate"] for m in stats]
        pkts = [m[SliceId.MMTC]["dl_tx_pkts"] for m in stats]
        assert all(b > a for a, b in zip(brate, brate[1:])), brate
        assert all(b < a for a, b in zip(pkts, pkts[1:])), pkts

        ratios = []
        for row in FEASIBLE_ALLOCATIONS:
            assert row[SliceId.URLLC] >= 5
            w = RanWorld(seed=1, profile=TRAFFIC_PROFILES[1], allocation=row)
            w.run(10_000)
            assert medians(w)[SliceId.URLLC]["dl_buffer"] == 0, row
            for k in range(250, 10_001, 250):
                for s in w.sample_kpm(k - 250, k):
                    ratios.append(s.prb_ratio)
                    if s.granted_prbs >= s.requested_prbs:
                        assert s.prb_ratio == 1.0
        assert all(0.0 <= r <= 1.0 for r in ratios)
        assert min(ratios) < 1.0  # some starved windows were exercised
        grid = np.random.default_rng(8).integers(0, 10_000, size=(10_000, 2))
        for g, r in grid:
            v = prb_ratio(int(g), int(r))
            assert 0.0 <= v <= 1.0
            if g >= r:
                assert v == 1.0
            else:
                assert v == int(g) / int(r)


# ---------------------------------------------------------------- 9
def _pipeline(root: Path, capsys) -> dict:
    def run(*argv):
        assert main(["--catalog", str(root / "catalog"), *argv]) == 0, argv
        return json.loads(capsys.readouterr().out)

    csv = root / "synthetic.csv"
    run("generate", "--out", str(csv), "--seed", "11")
    run("ingest", str(csv), "--id", "synthetic")
    trained = run("train", "--intent", str(INTENT_FILE), "--dataset", "synthetic", "--agent", "ppo",
                  "--steps", "1000", "--seed", "0")
    run("onboard", "--id", "xapp-joint", "--model", trained["model_id"], "--intent", trained["intent_id"],
        "--domain", trained["domain"], "--timer-set", "1")
    plan = run("dispatch", "xapp-joint")
    assert plan["subscriptions"] == [{"du_report_ms/kpm_log_ms": "1000/250", "xapps": ["xapp-joint"]}]
    result = run("run", "--xapp", "xapp-joint", "--out", str(root / "run"))
    analysis = {s: run("analyze", str(root / "run" / "kpm.csv"), "--kpi", "dl_brate", "--slice", s)
                for s in ("embb", "mmtc", "urllc")}
    return {"model": trained["model_id"], "digest": result["digest"], "analysis": analysis,
            "kpm": (root / "run" / "kpm.csv").read_text()}


@pytest.mark.slow
def test_09_end_to_end(tmp_path, capsys):
    with criterion(9, "intent to analysis pipeline, twice, same digest", 300):
        first = _pipeline(tmp_path / "a", capsys)
        second = _pipeline(tmp_path / "b", capsys)
        assert first["model"] == second["model"]
        assert first["digest"] == second["digest"]
        assert first["kpm"] == second["kpm"]
        lines = first["kpm"].splitlines()
        assert lines[0] == KPM_CSV_HEADER
        assert len(lines) == 1 + 3 * 240
        for line in lines[1:]:
            ts, sl, buf, brate, pkts, granted, requested = line.split(",")
            assert int(ts) % 250 == 0 and sl in ("embb", "mmtc", "urllc")
            assert int(buf) >= 0 and float(brate) >= 0 and int(pkts) >= 0
            assert int(granted) >= 0 and int(requested) >= 0
        assert all(a["n"] == 240 for a in first["analysis"].values())
        controls = json.loads((tmp_path / "a" / "run" / "summary.json").read_text())["controls"]
        assert controls == 229


# ---------------------------------------------------------------- 10
def test_10_protocol_goldens():
    with criterion(10, "golden frames are bit-exact and damaged frames fail typed", 30):
        files = sorted(GOLDEN_DIR.glob("*.bin"))
        assert {p.stem for p in files} == set(GOLDEN_MESSAGES)
        for path in files:
            data = path.read_bytes()
            msg = decode_message(data)
            assert msg == GOLDEN_MESSAGES[path.stem]
            assert encode_message(msg) == data
            for cut in range(len(data)):
                with pytest.raises(NeedMoreData):
                    decode_frame(data[:cut])
        rng = np.random.default_rng(10)
        untyped = []
        for _ in range(5_000):
            data = bytearray(files[int(rng.integers(len(files)))].read_bytes())
            for _ in range(int(rng.integers(1, 4))):
                data[int(rng.integers(len(data)))] = int(rng.integers(256))
            blob = bytes(data[: int(rng.integers(len(data) + 1))])
            try:
                decode_message(blob)
            except E2Error:
                pass
            except Exception as exc:  # anything untyped is a failure
                untyped.append(repr(exc))
        assert not untyped, untyped[:3]
