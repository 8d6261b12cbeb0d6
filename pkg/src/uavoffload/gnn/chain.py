"""Graph-network blocks and the four-block heterogeneous chain.

Block order: IoT->UAV, UAV->UAV, UAV->MEC, MEC->UAV. Each block runs an edge
MLP on ``[edge, src, dst]``, sums edge latents per destination and runs a
node MLP on ``[sum, dst]``. The last node MLP emits two state-action values
per UAV-C (processing unit off / on).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .features import EDGE_WIDTH, NODE_WIDTH, GraphFeatures
from .mlp import Mlp


class StaleCacheError(RuntimeError):
    pass


@dataclass
class GnBlock:
    edge_mlp: Mlp
    node_mlp: Mlp

    @property
    def params(self) -> list[np.ndarray]:
        return self.edge_mlp.params + self.node_mlp.params

    def copy(self) -> "GnBlock":
        return GnBlock(self.edge_mlp.copy(), self.node_mlp.copy())


def gn_block_forward(block: GnBlock, src_x, dst_x, edge_x, src_idx, dst_idx, keep: bool = False):
    """Returns (edge latents, node latents[, cache]). Destinations without an
    incoming edge aggregate to zero."""
    src_idx = np.asarray(src_idx, dtype=np.int64)
    dst_idx = np.asarray(dst_idx, dtype=np.int64)
    n_src, n_dst = src_x.shape[0], dst_x.shape[0]
    if src_idx.size and (src_idx.min() < 0 or src_idx.max() >= n_src):
        raise IndexError("source index out of range")
    if dst_idx.size and (dst_idx.min() < 0 or dst_idx.max() >= n_dst):
        raise IndexError("destination index out of range")

    edge_in = np.concatenate([edge_x, src_x[src_idx], dst_x[dst_idx]], axis=1)
    edge_lat, edge_cache = block.edge_mlp.forward(edge_in, keep=True)
    agg = np.zeros((n_dst, edge_lat.shape[1]))
    np.add.at(agg, dst_idx, edge_lat)
    node_in = np.concatenate([agg, dst_x], axis=1)
    node_lat, node_cache = block.node_mlp.forward(node_in, keep=True)
    if keep:
        cache = (edge_cache, node_cache, src_idx, dst_idx, n_src, edge_x.shape[1], src_x.shape[1])
        return edge_lat, node_lat, cache
    return edge_lat, node_lat


def gn_block_backward(block: GnBlock, cache, d_node, d_edge=None):
    """Returns (param grads aligned with ``block.params``, d_src, d_dst, d_edge_feat)."""
    edge_cache, node_cache, src_idx, dst_idx, n_src, e_w, s_w = cache
    g_node, d_node_in = block.node_mlp.backward(node_cache, d_node)
    lat_w = block.edge_mlp.widths[-1]
    d_agg, d_dst = d_node_in[:, :lat_w], d_node_in[:, lat_w:].copy()
    d_edge_lat = d_agg[dst_idx]
    if d_edge is not None:
        d_edge_lat = d_edge_lat + d_edge
    g_edge, d_edge_in = block.edge_mlp.backward(edge_cache, d_edge_lat)
    d_edge_feat = d_edge_in[:, :e_w]
    d_src = np.zeros((n_src, s_w))
    np.add.at(d_src, src_idx, d_edge_in[:, e_w:e_w + s_w])
    np.add.at(d_dst, dst_idx, d_edge_in[:, e_w + s_w:])
    return g_edge + g_node, d_src, d_dst, d_edge_feat


@dataclass
class ChainConfig:
    hidden: tuple[int, ...] = (64, 64)
    latent: int = 32
    activation: str = "relu"
    node_width: int = NODE_WIDTH
    edge_width: int = EDGE_WIDTH

    def block_widths(self) -> list[tuple[list[int], list[int]]]:
        h, L, n, e = list(self.hidden), self.latent, self.node_width, self.edge_width
        return [
            ([e + n + n] + h + [L], [L + n] + h + [L]),  # IoT -> UAV
            ([e + L + L] + h + [L], [L + L] + h + [L]),  # UAV -> UAV
            ([e + L + n] + h + [L], [L + n] + h + [L]),  # UAV -> MEC
            ([e + L + n] + h + [L], [L + n] + h + [2]),  # MEC -> UAV, Q head
        ]


@dataclass
class ChainParams:
    blocks: list[GnBlock]
    config: ChainConfig = field(default_factory=ChainConfig)
    generation: int = 0  # bumped by every in-place update

    @classmethod
    def init(cls, config: ChainConfig | None = None, seed: int = 0) -> "ChainParams":
        config = config or ChainConfig()
        rng = np.random.default_rng(seed)
        blocks = [GnBlock(Mlp.init(ew, rng, config.activation), Mlp.init(nw, rng, config.activation))
                  for ew, nw in config.block_widths()]
        return cls(blocks, config)

    @classmethod
    def zeros(cls, config: ChainConfig | None = None) -> "ChainParams":
        config = config or ChainConfig()
        return cls([GnBlock(Mlp.zeros(ew, config.activation), Mlp.zeros(nw, config.activation))
                    for ew, nw in config.block_widths()], config)

    @property
    def params(self) -> list[np.ndarray]:
        return [p for b in self.blocks for p in b.params]

    def copy(self) -> "ChainParams":
        return ChainParams([b.copy() for b in self.blocks], self.config)


@dataclass
class ChainCache:
    params_id: int
    generation: int
    blocks: list


def chain_forward(params: ChainParams, feats: GraphFeatures, keep: bool = False):
    """Per-UAV state-action values, shape (num_uav, 2)."""
    b1, b2, b3, b4 = params.blocks
    _, f1, c1 = gn_block_forward(b1, feats.iot, feats.uav, feats.iu_feat, feats.iu_src, feats.iu_dst, keep=True)
    _, f2, c2 = gn_block_forward(b2, f1, f1, feats.uu_feat, feats.uu_src, feats.uu_dst, keep=True)
    _, fm, c3 = gn_block_forward(b3, f2, feats.mec, feats.um_feat, feats.um_src, feats.um_dst, keep=True)
    _, q, c4 = gn_block_forward(b4, fm, feats.uav, feats.mu_feat, feats.mu_src, feats.mu_dst, keep=True)
    if keep:
        return q, ChainCache(id(params), params.generation, [c1, c2, c3, c4])
    return q


def chain_backward(params: ChainParams, cache: ChainCache, dq: np.ndarray) -> list[np.ndarray]:
    """Gradients aligned with ``params.params``."""
    if cache.params_id != id(params) or cache.generation != params.generation:
        raise StaleCacheError("cache was produced by different parameters")
    b1, b2, b3, b4 = params.blocks
    c1, c2, c3, c4 = cache.blocks
    g4, d_fm, _, _ = gn_block_backward(b4, c4, dq)
    g3, d_f2, _, _ = gn_block_backward(b3, c3, d_fm)
    g2, d_src2, d_dst2, _ = gn_block_backward(b2, c2, d_f2)
    g1, _, _, _ = gn_block_backward(b1, c1, d_src2 + d_dst2)
    return g1 + g2 + g3 + g4
