from .chain import ChainConfig, ChainParams, GnBlock, chain_backward, chain_forward, gn_block_backward, gn_block_forward
from .features import FeatureScales, GraphFeatures, batch_graphs, build_features
from .mlp import Mlp, ShapeError, mlp_backward, mlp_forward

__all__ = [
    "ChainConfig", "ChainParams", "GnBlock", "chain_backward", "chain_forward",
    "gn_block_backward", "gn_block_forward", "FeatureScales", "GraphFeatures",
    "batch_graphs", "build_features", "Mlp", "ShapeError", "mlp_backward", "mlp_forward",
]
