from .baselines import (GreedyQPolicy, RandomPolicy, ScheduledPolicy, baseline_h_fc, baseline_h_rr,
                        hfc_policy, hrr_policy)
from .dqn import (Adam, ReplayBuffer, TrainConfig, TrainLog, Transition, make_network, select_actions,
                  td_targets, train, train_step)
from .env import EpisodeResult, OffloadEnv
from .networks import DenseQNetwork, GnnQNetwork

__all__ = [
    "GreedyQPolicy", "RandomPolicy", "ScheduledPolicy", "baseline_h_fc", "baseline_h_rr", "hfc_policy",
    "hrr_policy", "Adam", "ReplayBuffer", "TrainConfig", "TrainLog", "Transition", "make_network",
    "select_actions", "td_targets", "train", "train_step", "EpisodeResult", "OffloadEnv",
    "DenseQNetwork", "GnnQNetwork",
]
