"""Q-networks behind a common batch interface.

``forward_batch`` takes a list of single-graph features and returns the
stacked per-UAV values (rows in graph order) plus a cache; ``backward`` maps
the matching row gradients to parameter gradients.
"""
from __future__ import annotations

import numpy as np

from ..gnn.chain import ChainConfig, ChainParams, chain_backward, chain_forward
from ..gnn.features import FeatureScales, GraphFeatures, batch_graphs
from ..gnn.mlp import Mlp, ShapeError


class GnnQNetwork:
    kind = "gnn"

    def __init__(self, params: ChainParams, scales: FeatureScales):
        self.chain = params
        self.scales = scales

    @classmethod
    def init(cls, scales: FeatureScales, config: ChainConfig | None = None, seed: int = 0) -> "GnnQNetwork":
        return cls(ChainParams.init(config, seed), scales)

    @property
    def params(self) -> list[np.ndarray]:
        return self.chain.params

    def bump(self) -> None:
        self.chain.generation += 1

    def copy(self) -> "GnnQNetwork":
        return GnnQNetwork(self.chain.copy(), self.scales)

    def q_values(self, feats: GraphFeatures) -> np.ndarray:
        return chain_forward(self.chain, feats)

    def forward_batch(self, feats_list):
        q, cache = chain_forward(self.chain, batch_graphs(feats_list), keep=True)
        return q, cache

    def backward(self, cache, dq) -> list[np.ndarray]:
        return chain_backward(self.chain, cache, dq)


class DenseQNetwork:
    """Fully connected baseline over a fixed-width flattening of the graph.

    Input layout, zero padded to the training sizes: IoT features, each IoT's
    association-edge features, UAV-C features, the UAV->UAV delay matrix, the
    UAV->MEC delays and the MEC delay. Output: two values per UAV-C slot.
    """

    kind = "dqn"

    def __init__(self, mlp: Mlp, num_iot: int, num_uav: int, scales: FeatureScales):
        self.mlp = mlp
        self.num_iot = num_iot
        self.num_uav = num_uav
        self.scales = scales
        self.generation = 0
        if mlp.widths[0] != self.input_width(num_iot, num_uav) or mlp.widths[-1] != 2 * num_uav:
            raise ShapeError("MLP widths do not match the flattened layout")

    @staticmethod
    def input_width(num_iot: int, num_uav: int) -> int:
        return 6 * num_iot + 3 * num_uav + num_uav * num_uav + num_uav + 1

    @classmethod
    def init(cls, num_iot: int, num_uav: int, scales: FeatureScales, hidden=(64, 64), seed: int = 0):
        rng = np.random.default_rng(seed)
        widths = [cls.input_width(num_iot, num_uav), *hidden, 2 * num_uav]
        return cls(Mlp.init(widths, rng), num_iot, num_uav, scales)

    @property
    def params(self) -> list[np.ndarray]:
        return self.mlp.params

    def bump(self) -> None:
        self.generation += 1

    def copy(self) -> "DenseQNetwork":
        return DenseQNetwork(self.mlp.copy(), self.num_iot, self.num_uav, self.scales)

    def flatten(self, feats: GraphFeatures) -> np.ndarray:
        I, J = feats.num_iot, feats.num_uav
        if I > self.num_iot or J > self.num_uav:
            raise ShapeError(
                f"dense network was trained for I<={self.num_iot}, J<={self.num_uav}; got I={I}, J={J}")
        iot = np.zeros((self.num_iot, 3))
        iot[:I] = feats.iot
        iu = np.zeros((self.num_iot, 3))
        iu[feats.iu_src] = feats.iu_feat
        uav = np.zeros((self.num_uav, 3))
        uav[:J] = feats.uav
        uu = np.zeros((self.num_uav, self.num_uav))
        uu[feats.uu_src, feats.uu_dst] = feats.uu_feat[:, 0]
        um = np.zeros(self.num_uav)
        um[feats.um_src] = feats.um_feat[:, 0]
        return np.concatenate([iot.ravel(), iu.ravel(), uav.ravel(), uu.ravel(), um, feats.mec[0, :1]])

    def q_values(self, feats: GraphFeatures) -> np.ndarray:
        out = self.mlp.forward(self.flatten(feats)).reshape(self.num_uav, 2)
        return out[: feats.num_uav]

    def forward_batch(self, feats_list):
        X = np.stack([self.flatten(f) for f in feats_list])
        out, cache = self.mlp.forward(X, keep=True)
        out = out.reshape(len(feats_list), self.num_uav, 2)
        counts = [f.num_uav for f in feats_list]
        q = np.concatenate([out[b, :n] for b, n in enumerate(counts)])
        return q, (cache, counts)

    def backward(self, cache, dq) -> list[np.ndarray]:
        mlp_cache, counts = cache
        d_out = np.zeros((len(counts), self.num_uav, 2))
        row = 0
        for b, n in enumerate(counts):
            d_out[b, :n] = dq[row:row + n]
            row += n
        grads, _ = self.mlp.backward(mlp_cache, d_out.reshape(len(counts), -1))
        return grads
