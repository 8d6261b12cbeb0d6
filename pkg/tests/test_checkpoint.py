import numpy as np
import pytest

from uavoffload.checkpoint import CheckpointError, dumps, load_network, loads, save_network
from uavoffload.gnn import ChainConfig, FeatureScales
from uavoffload.gnn.features import random_features
from uavoffload.rl import DenseQNetwork, GnnQNetwork
from uavoffload.scenario import ScenarioConfig

SCALES = FeatureScales.from_config(ScenarioConfig())


def nets():
    return [GnnQNetwork.init(SCALES, ChainConfig(hidden=(8, 8), latent=4, activation="tanh"), seed=3),
            DenseQNetwork.init(5, 3, SCALES, hidden=(7,), seed=3)]


@pytest.mark.parametrize("net", nets(), ids=["gnn", "dqn"])
def test_round_trip_is_bit_exact(tmp_path, rng, net):
    path = tmp_path / "net.ckpt"
    save_network(net, path)
    back = load_network(path)
    assert back.kind == net.kind
    assert back.scales == net.scales
    assert all(np.array_equal(a, b) for a, b in zip(net.params, back.params))
    feats = random_features(rng, 5, 3)
    assert np.array_equal(net.q_values(feats), back.q_values(feats))


@pytest.mark.parametrize("i", [0, 1])
def test_same_seed_same_bytes(i):
    assert dumps(nets()[i]) == dumps(nets()[i])


def test_bad_magic():
    with pytest.raises(CheckpointError, match="not a Q-network"):
        loads(b"NOTACKPT" + bytes(20))


def test_truncated_and_trailing():
    blob = dumps(nets()[0])
    with pytest.raises(CheckpointError, match="truncated"):
        loads(blob[:-8])
    with pytest.raises(CheckpointError, match="trailing"):
        loads(blob + b"\0")


def test_unsupported_version():
    blob = bytearray(dumps(nets()[1]))
    blob[8] = 99
    with pytest.raises(CheckpointError, match="version"):
        loads(bytes(blob))
