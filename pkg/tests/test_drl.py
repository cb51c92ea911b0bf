from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oranlab.drl import (
    Adam,
    AdamState,
    ArtifactError,
    BanditEnv,
    DqnAgent,
    DqnConfig,
    Experience,
    Mlp,
    ObservationBuilder,
    PolicyModel,
    PpoAgent,
    PpoBatch,
    PpoConfig,
    ReplayBuffer,
    ReplayUnderflow,
    Trajectory,
    adam_step,
    compute_advantages,
    dqn_loss,
    dqn_td_target,
    encode_window,
    load_model,
    log_softmax,
    mlp_forward,
    mlp_gradients,
    ppo_clip_term,
    ppo_total_objective,
    select_action_dqn,
    select_action_ppo,
    train_autoencoder,
    untrained_encoder,
)
from oranlab.ransim.types import KpmSample, SliceId


# ---------------------------------------------------------------- oracles
def scalar_forward(net: Mlp, x: list[float]) -> list[float]:
    """Neuron-by-neuron forward pass in plain Python floats."""
    act = {"tanh": math.tanh, "relu": lambda z: z if z > 0 else 0.0, "linear": lambda z: z}
    a = list(x)
    for w, b, name in zip(net.weights, net.biases, net.activations):
        out = []
        for j in range(w.shape[1]):
            z = float(b[j])
            for i in range(w.shape[0]):
                z += a[i] * float(w[i, j])
            out.append(act[name](z))
        a = out
    return a


def finite_difference(f, params: list[np.ndarray], h: float = 1e-5) -> list[np.ndarray]:
    grads = []
    for p in params:
        g = np.zeros_like(p)
        it = np.nditer(p, flags=["multi_index"])
        for _ in it:
            i = it.multi_index
            old = p[i]
            p[i] = old + h
            up = f()
            p[i] = old - h
            down = f()
            p[i] = old
            g[i] = (up - down) / (2 * h)
        grads.append(g)
    return grads


def max_rel_err(analytic, numeric, floor: float = 1e-6) -> float:
    worst = 0.0
    for a, n in zip(analytic, numeric):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
        worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst


def small_tanh_net(seed: int, sizes=(4, 30, 30, 30, 3), scale=1.0) -> Mlp:
    return Mlp.create(sizes, "tanh", "linear", np.random.default_rng(seed), output_scale=scale)


# ---------------------------------------------------------------- MLP
class TestMlp:
    def test_zero_net_outputs_zero(self):
        net = Mlp([np.zeros((3, 4)), np.zeros((4, 2))], [np.zeros(4), np.zeros(2)], ("tanh", "tanh"))
        assert np.array_equal(mlp_forward(net, np.array([1.0, -2.0, 3.0])), np.zeros(2))

    def test_identity(self):
        net = Mlp([np.ones((1, 1))], [np.zeros(1)], ("linear",))
        assert mlp_forward(net, np.array([3.25]))[0] == 3.25

    def test_matches_scalar_oracle(self):
        rng = np.random.default_rng(7)
        for hidden in ("tanh", "relu"):
            net = Mlp.create((5, 8, 6, 2), hidden, "linear", rng)
            for _ in range(5):
                x = rng.normal(size=5)
                np.testing.assert_allclose(net.forward(x), scalar_forward(net, list(x)), rtol=1e-12, atol=1e-12)

    def test_dimension_mismatch(self):
        net = small_tanh_net(0)
        with pytest.raises(ValueError):
            net.forward(np.zeros(5))
        with pytest.raises(ValueError):
            Mlp([np.zeros((3, 4)), np.zeros((5, 2))], [np.zeros(4), np.zeros(2)], ("tanh", "linear"))

    def test_gradients_vs_finite_differences(self):
        net = small_tanh_net(3)
        rng = np.random.default_rng(4)
        x = rng.normal(size=(6, 4))
        up = rng.normal(size=(6, 3))
        analytic = mlp_gradients(net, x, up)
        numeric = finite_difference(lambda: float(np.sum(net.forward(x) * up)), net.params())
        assert max_rel_err(analytic, numeric) < 1e-4

    def test_zero_upstream(self):
        net = small_tanh_net(1)
        grads = mlp_gradients(net, np.ones((2, 4)), np.zeros((2, 3)))
        assert all(not g.any() for g in grads)

    def test_linear_weight_gradient(self):
        net = Mlp([np.array([[0.7]])], [np.zeros(1)], ("linear",))
        gw, gb = mlp_gradients(net, np.array([2.0]), np.array([1.0]))
        assert gw[0, 0] == 2.0 and gb[0] == 1.0


# ---------------------------------------------------------------- Adam
class TestAdam:
    def test_zero_grads(self):
        p = [np.array([1.0, -2.0])]
        state = AdamState()
        adam_step(p, [np.zeros(2)], state, 1e-3)
        assert np.array_equal(p[0], [1.0, -2.0])
        assert not state.m[0].any() and not state.v[0].any()

    def test_constant_gradient_step_tends_to_lr(self):
        p = [np.array([0.0, 0.0])]
        state = AdamState()
        before = p[0].copy()
        for _ in range(2000):
            before = p[0].copy()
            adam_step(p, [np.array([3.0, -0.5])], state, 1e-3)
        np.testing.assert_allclose(p[0] - before, [-1e-3, 1e-3], rtol=1e-6)

    def test_first_step_is_lr_sign(self):
        p = [np.array([0.0])]
        adam_step(p, [np.array([123.0])], AdamState(), 0.01)
        assert p[0][0] == pytest.approx(-0.01, rel=1e-6)

    def test_deterministic(self):
        def run():
            net = small_tanh_net(9)
            opt = Adam(net.params(), 1e-3)
            x = np.ones((3, 4))
            for _ in range(20):
                opt.step(mlp_gradients(net, x, np.ones((3, 3))))
            return [p.copy() for p in net.params()]

        assert all(np.array_equal(a, b) for a, b in zip(run(), run()))


# ---------------------------------------------------------------- Autoencoder
def sinusoid_windows(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    t = np.arange(10)[None, :]
    phase = rng.uniform(0, 2 * np.pi, size=(n, 1))
    buf = 5000 * (1 + np.sin(0.6 * t + phase))
    brate = 4 * (1 + np.cos(0.3 * t + phase))
    pkts = 300 * (1 + np.sin(0.9 * t + 2 * phase))
    return np.stack([buf, brate, pkts], axis=-1)


class TestAutoencoder:
    def test_zero_window_is_finite(self):
        enc = untrained_encoder(0)
        z = encode_window(enc, np.zeros((10, 3)))
        assert z.shape == (3,) and np.isfinite(z).all()
        assert np.array_equal(z, encode_window(enc, np.zeros((10, 3))))

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**16))
    def test_latent_is_three_dim(self, seed):
        w = np.random.default_rng(seed).uniform(0, 1e4, size=(10, 3))
        assert encode_window(untrained_encoder(1), w).shape == (3,)

    def test_wrong_shape(self):
        with pytest.raises(ValueError):
            encode_window(untrained_encoder(0), np.zeros((9, 3)))

    def test_memorizes_one_sample(self):
        data = sinusoid_windows(1, 0)
        model = train_autoencoder(data, epochs=300, lr=1e-3, seed=0)
        assert model.loss_curve[-1] < 1e-4

    def test_training_reduces_loss_and_beats_untrained(self):
        train, held = sinusoid_windows(256, 1), sinusoid_windows(64, 2)
        model = train_autoencoder(train, epochs=50, lr=1e-3, seed=3)
        assert model.loss_curve[49] < model.loss_curve[0]
        fresh = untrained_encoder(3, model.lo, model.hi)
        assert model.reconstruction_mse(held) < fresh.reconstruction_mse(held)

    def test_seeded(self):
        data = sinusoid_windows(32, 5)
        a = train_autoencoder(data, epochs=3, seed=11)
        b = train_autoencoder(data, epochs=3, seed=11)
        assert all(np.array_equal(x, y) for x, y in zip(a.encoder.params(), b.encoder.params()))

    def test_empty_dataset(self):
        with pytest.raises(ValueError):
            train_autoencoder(np.zeros((0, 10, 3)))


# ---------------------------------------------------------------- PPO
class TestAdvantages:
    def test_geometric_return(self):
        n = 200
        _, ret = compute_advantages(np.ones(n), np.zeros(n), 0.0, 0.5, 0.95, normalize=False)
        assert ret[0] == pytest.approx(2.0, abs=1e-12)

    def test_lambda_zero_is_td_error(self):
        rng = np.random.default_rng(0)
        r, v = rng.normal(size=20), rng.normal(size=20)
        last = 0.7
        adv, _ = compute_advantages(r, v, last, 0.9, 0.0, normalize=False)
        nxt = np.append(v[1:], last)
        assert np.array_equal(adv, r + 0.9 * nxt - v)

    def test_gamma_zero(self):
        r = np.array([1.0, -2.0, 3.5])
        _, ret = compute_advantages(r, np.zeros(3), 10.0, 0.0, 0.95, normalize=False)
        assert np.array_equal(ret, r)

    def test_normalized(self):
        rng = np.random.default_rng(1)
        adv, _ = compute_advantages(rng.normal(size=50), rng.normal(size=50), 0.0, 0.99, 0.95)
        assert abs(adv.mean()) < 1e-12 and abs(adv.std() - 1) < 1e-6

    def test_empty(self):
        with pytest.raises(ValueError):
            compute_advantages([], [], 0.0, 0.9, 0.9)


class TestClipTerm:
    def test_truth_table(self):
        assert ppo_clip_term(1.0, 2.0, 0.2) == 2.0
        assert ppo_clip_term(1.5, 1.0, 0.2) == 1.2
        assert ppo_clip_term(0.5, -1.0, 0.2) == -0.8

    @settings(max_examples=500)
    @given(st.floats(1e-3, 10), st.floats(-10, 10), st.floats(0.01, 0.9))
    def test_pessimistic(self, q, a, eps):
        assert ppo_clip_term(q, a, eps) <= q * a

    @settings(max_examples=300)
    @given(st.floats(1e-3, 10), st.floats(-10, 10), st.floats(0.01, 0.9))
    def test_gradient_kill(self, q, a, eps):
        h = 1e-7
        if (q > 1 + eps + h and a > 0) or (q < 1 - eps - h and a < 0):
            assert ppo_clip_term(q + h, a, eps) == ppo_clip_term(q - h, a, eps)


def _ppo_batch(actor: Mlp, rng: np.random.Generator, n: int, eps: float) -> PpoBatch:
    states = rng.normal(size=(n, actor.sizes[0]))
    logp_all = log_softmax(actor.forward(states))
    actions = rng.integers(actor.sizes[-1], size=n)
    cur = logp_all[np.arange(n), actions]
    # ratios spread over the clipped and unclipped regions, away from the kinks
    q = rng.choice([0.5, 0.7, 0.95, 1.05, 1.15, 1.4, 1.8], size=n)
    return PpoBatch(states, actions, cur - np.log(q), rng.normal(size=n), rng.normal(size=n))


class TestPpoObjective:
    def test_on_policy_clip_term_is_mean_advantage(self):
        actor, critic = small_tanh_net(0), small_tanh_net(1, (4, 30, 30, 30, 1))
        rng = np.random.default_rng(2)
        b = _ppo_batch(actor, rng, 40, 0.2)
        logp = log_softmax(actor.forward(b.states))[np.arange(40), b.actions]
        adv = rng.normal(size=40)
        adv = (adv - adv.mean()) / adv.std()
        b = PpoBatch(b.states, b.actions, logp, adv, b.returns)
        obj, _, _ = ppo_total_objective(b, actor, critic, PpoConfig(c1=0.0, c2=0.0))
        assert abs(obj) < 1e-12

    def test_reduction_without_coefficients(self):
        actor, critic = small_tanh_net(4), small_tanh_net(5, (4, 30, 30, 30, 1))
        rng = np.random.default_rng(6)
        b = _ppo_batch(actor, rng, 30, 0.2)
        obj, _, _ = ppo_total_objective(b, actor, critic, PpoConfig(c1=0.0, c2=0.0))
        q = np.exp(log_softmax(actor.forward(b.states))[np.arange(30), b.actions] - b.old_logp)
        assert obj == pytest.approx(float(np.mean(ppo_clip_term(q, b.advantages, 0.2))), abs=1e-14)

    def test_gradient_vs_finite_differences(self):
        actor = small_tanh_net(7, (4, 30, 30, 30, 5), scale=0.5)
        critic = small_tanh_net(8, (4, 30, 30, 30, 1))
        cfg = PpoConfig()
        b = _ppo_batch(actor, np.random.default_rng(9), 24, cfg.clip)
        _, ga, gc = ppo_total_objective(b, actor, critic, cfg)
        f = lambda: ppo_total_objective(b, actor, critic, cfg)[0]  # noqa: E731
        assert max_rel_err(ga, finite_difference(f, actor.params())) < 1e-4
        assert max_rel_err(gc, finite_difference(f, critic.params())) < 1e-4

    def test_nan_aborts(self):
        actor, critic = small_tanh_net(0), small_tanh_net(1, (4, 30, 30, 30, 1))
        b = _ppo_batch(actor, np.random.default_rng(0), 4, 0.2)
        b.returns[0] = np.nan
        with pytest.raises(FloatingPointError):
            ppo_total_objective(b, actor, critic, PpoConfig())


class TestPpoSelection:
    def test_dominant_logit(self):
        net = Mlp([np.zeros((1, 4))], [np.array([0.0, 100.0, 0.0, 0.0])], ("linear",))
        rng = np.random.default_rng(0)
        assert all(select_action_ppo(net, np.ones(1), rng)[0] == 1 for _ in range(1000))

    def test_uniform_logits(self):
        k, n = 5, 100_000
        net = Mlp([np.zeros((1, k))], [np.zeros(k)], ("linear",))
        rng = np.random.default_rng(1)
        counts = np.bincount([select_action_ppo(net, np.ones(1), rng)[0] for _ in range(n)], minlength=k)
        sigma = math.sqrt(n * (1 / k) * (1 - 1 / k))
        assert np.all(np.abs(counts - n / k) < 3 * sigma)

    def test_logp_consistent(self):
        net = small_tanh_net(2, (4, 8, 6), scale=3.0)
        rng = np.random.default_rng(3)
        s = rng.normal(size=4)
        for _ in range(20):
            a, lp = select_action_ppo(net, s, rng)
            assert lp == log_softmax(net.forward(s))[a]

    def test_trajectory_rejects_nonfinite_logp(self):
        with pytest.raises(ValueError):
            Trajectory().append(np.zeros(1), 0, float("-inf"), 0.0, 0.0)


# ---------------------------------------------------------------- DQN
def linear_q(weights: np.ndarray, bias: np.ndarray) -> Mlp:
    return Mlp([np.asarray(weights, dtype=float)], [np.asarray(bias, dtype=float)], ("linear",))


class TestDqn:
    def test_td_target(self):
        target = linear_q(np.zeros((1, 3)), [0.5, 2.0, -1.0])
        assert dqn_td_target(1.0, np.ones(1), 0.95, target) == 2.9
        assert dqn_td_target(1.0, np.ones(1), 0.0, target) == 1.0
        assert dqn_td_target(1.0, np.ones(1), 0.95, linear_q(np.zeros((1, 3)), np.zeros(3))) == 1.0

    def test_batch_at_fixed_point(self):
        agent = DqnAgent(2, 3, DqnConfig(batch_size=4, gamma=0.0), seed=0)
        s = np.array([0.3, -0.2])
        q = agent.q.forward(s)
        for a in range(3):
            agent.observe(s, a, float(q[a]), s)
        agent.observe(s, 0, float(q[0]), s)
        before = [p.copy() for p in agent.q.params()]
        loss = agent.update()
        assert loss == pytest.approx(0.0, abs=1e-24)
        for p, b in zip(agent.q.params(), before):
            np.testing.assert_allclose(p, b, atol=1e-12)

    def test_frozen_batch_loss_decreases(self):
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

    def test_target_sync_copy(self):
        cfg = DqnConfig(batch_size=2, target_sync=3)
        agent = DqnAgent(2, 3, cfg, seed=5)
        rng = np.random.default_rng(0)
        for _ in range(10):
            agent.observe(rng.normal(size=2), int(rng.integers(3)), 1.0, rng.normal(size=2))
        for _ in range(3):
            agent.update()
        probes = rng.normal(size=(50, 2))
        assert np.array_equal(agent.q.forward(probes), agent.target.forward(probes))
        agent.update()
        assert not np.array_equal(agent.q.forward(probes), agent.target.forward(probes))

    def test_underflow_is_counted(self):
        agent = DqnAgent(1, 2, DqnConfig(batch_size=8))
        assert agent.update() is None and agent.skipped == 1

    def test_greedy_ties_lowest_index(self):
        rng = np.random.default_rng(0)
        assert select_action_dqn([1.0, 3.0, 3.0], 0.0, rng) == 1

    def test_epsilon_one_uniform(self):
        n, k = 100_000, 43
        rng = np.random.default_rng(4)
        q = np.arange(k, dtype=float)
        counts = np.bincount([select_action_dqn(q, 1.0, rng) for _ in range(n)], minlength=k)
        sigma = math.sqrt(n * (1 / k) * (1 - 1 / k))
        assert np.all(np.abs(counts - n / k) < 4 * sigma)

    def test_epsilon_mixture(self):
        n, k, eps = 100_000, 43, 0.1
        rng = np.random.default_rng(5)
        q = np.zeros(k)
        q[17] = 1.0
        hits = sum(select_action_dqn(q, eps, rng) == 17 for _ in range(n))
        p = 1 - eps + eps / k
        assert abs(hits - n * p) < 3 * math.sqrt(n * p * (1 - p))

    def test_bad_epsilon(self):
        with pytest.raises(ValueError):
            DqnConfig(epsilon=1.5)


# ---------------------------------------------------------------- replay
class TestReplay:
    def test_single(self):
        buf = ReplayBuffer(5)
        buf.push("x")
        assert buf.sample(1, np.random.default_rng()) == ["x"]

    def test_eviction(self):
        buf = ReplayBuffer(10_000)
        for i in range(10_001):
            buf.push(i)
        assert len(buf) == 10_000
        items = buf.items()
        assert items[0] == 1 and items[-1] == 10_000

    def test_no_replacement_within_batch(self):
        buf = ReplayBuffer(50)
        for i in range(50):
            buf.push(i)
        batch = buf.sample(50, np.random.default_rng(0))
        assert sorted(batch) == list(range(50))

    def test_uniform(self):
        buf = ReplayBuffer(100)
        for i in range(100):
            buf.push(i)
        rng = np.random.default_rng(1)
        n = 100_000
        counts = np.bincount([buf.sample(1, rng)[0] for _ in range(n)], minlength=100)
        sigma = math.sqrt(n * 0.01 * 0.99)
        assert np.all(np.abs(counts - n / 100) < 4.5 * sigma)

    def test_underflow(self):
        with pytest.raises(ReplayUnderflow):
            ReplayBuffer(4).sample(1, np.random.default_rng())

    @given(st.integers(1, 50), st.lists(st.integers(), max_size=200))
    def test_size_bounded(self, cap, pushes):
        buf = ReplayBuffer(cap)
        for p in pushes:
            buf.push(p)
        assert len(buf) == min(cap, len(pushes))
        assert buf.items() == pushes[-cap:] if pushes else buf.items() == []


# ---------------------------------------------------------------- Bandit
class TestBandit:
    def test_ppo_learns(self):
        from oranlab.drl import train_ppo

        agent = train_ppo(BanditEnv(), 2000, PpoConfig(gamma=0.5), seed=0)
        assert agent.probabilities(np.ones(1))[2] > 0.9

    def test_agents_expose_action_count(self):
        assert PpoAgent(2, 7).n_actions == 7
        assert DqnAgent(2, 7).n_actions == 7


# ---------------------------------------------------------------- artifacts and observations
class TestArtifact:
    def test_roundtrip_bit_exact(self):
        enc = untrained_encoder(4, lo=[0.0, 0.1, 2.0], hi=[1e4, 9.5, 300.0])
        net = small_tanh_net(12, (9, 30, 30, 30, 43))
        model = PolicyModel("ppo", net, enc, {"slices": ["embb", "mmtc", "urllc"], "note": "é"})
        data = model.to_bytes()
        assert data.startswith(b"PNDR1\n")
        back = load_model(data)
        assert back.to_bytes() == data
        for a, b in zip(net.params() + enc.encoder.params(), back.net.params() + back.encoder.encoder.params()):
            assert np.array_equal(a, b)
        assert back.metadata == model.metadata

    def test_bad_magic_and_corruption(self):
        with pytest.raises(ArtifactError):
            load_model(b"PNDR2\n{}")
        with pytest.raises(ArtifactError):
            load_model(b"PNDR1\n{not json")
        good = PolicyModel("dqn", small_tanh_net(0)).to_bytes()
        with pytest.raises(ArtifactError):
            load_model(good.replace(b'"format":1', b'"format":9'))

    def test_greedy_act(self):
        net = linear_q(np.zeros((2, 3)), [0.0, 5.0, 1.0])
        assert PolicyModel("dqn", net).act(np.zeros(2)) == 1


class TestObservation:
    def _windows(self, n):
        return [
            {s: KpmSample(250 * (i + 1), s, 100 * i, 0.5 * i, i, 10, 10) for s in SliceId}
            for i in range(n)
        ]

    def test_dimension_and_mask(self):
        enc = untrained_encoder(0, lo=[0, 0, 0], hi=[1000, 5, 10])
        obs = ObservationBuilder(enc, list(SliceId), {SliceId.EMBB: ["dl_buffer", "dl_tx_pkts"]})
        v = obs.build(self._windows(10))
        assert v.shape == (9,) == (obs.dim,)
        assert np.array_equal(obs.masks[SliceId.EMBB], [1.0, 0.0, 1.0])

    def test_masked_column_is_ignored(self):
        enc = untrained_encoder(1, lo=[0, 0, 0], hi=[1000, 5, 10])
        obs = ObservationBuilder(enc, [SliceId.MMTC], {SliceId.MMTC: ["dl_brate", "dl_tx_pkts"]})
        w = self._windows(10)
        w2 = [{s: KpmSample(x.window_end, s, 999, x.dl_brate, x.dl_tx_pkts, 1, 1) for s, x in win.items()} for win in w]
        assert np.array_equal(obs.build(w), obs.build(w2))

    def test_short_history_padded(self):
        enc = untrained_encoder(0)
        obs = ObservationBuilder(enc, [SliceId.URLLC])
        assert obs.build(self._windows(3)).shape == (3,)
