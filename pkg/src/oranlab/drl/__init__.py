"""Numpy implementations of the learning pieces: MLPs, Adam, autoencoder, PPO and DQN."""

from .artifact import (
    MAGIC,
    ArtifactError,
    PolicyModel,
    encoder_from_bytes,
    encoder_to_bytes,
    load_model,
    save_model,
)
from .autoencoder import (
    ENCODER_SIZES,
    WINDOW_K,
    WINDOW_KPIS,
    EncoderModel,
    encode_window,
    train_autoencoder,
    untrained_encoder,
)
from .dqn import DqnAgent, DqnConfig, dqn_loss, dqn_td_target, dqn_update, select_action_dqn, train_dqn
from .mlp import Mlp, mlp_forward, mlp_gradients
from .observation import ObservationBuilder, kpi_mask, window_matrix
from .optim import Adam, AdamState, adam_step
from .ppo import (
    PpoAgent,
    PpoBatch,
    PpoConfig,
    Trajectory,
    compute_advantages,
    log_softmax,
    ppo_clip_term,
    ppo_total_objective,
    select_action_ppo,
    train_ppo,
)
from .replay import Experience, ReplayBuffer, ReplayUnderflow, replay_sample
from .toy import BanditEnv

__all__ = [
    "MAGIC", "encoder_from_bytes", "encoder_to_bytes", "ArtifactError", "PolicyModel", "load_model", "save_model", "ENCODER_SIZES",
    "WINDOW_K", "WINDOW_KPIS", "EncoderModel", "encode_window", "train_autoencoder",
    "untrained_encoder", "DqnAgent", "DqnConfig", "dqn_loss", "dqn_td_target", "dqn_update",
    "select_action_dqn", "train_dqn", "Mlp", "mlp_forward", "mlp_gradients",
    "ObservationBuilder", "kpi_mask", "window_matrix", "Adam", "AdamState", "adam_step",
    "PpoAgent", "PpoBatch", "PpoConfig", "Trajectory", "compute_advantages", "log_softmax",
    "ppo_clip_term", "ppo_total_objective", "select_action_ppo", "train_ppo", "Experience",
    "ReplayBuffer", "ReplayUnderflow", "replay_sample", "BanditEnv",
]
