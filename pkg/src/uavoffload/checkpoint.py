"""Q-network checkpoint files.

Layout::

    b"UAVQNET\\0"            8-byte magic
    uint16 little-endian     format version (1)
    uint32 little-endian     header length in bytes
    header                   UTF-8 JSON: kind, architecture, feature scales,
                             and one {"shape": [...]} entry per parameter
    payload                  every parameter as little-endian float64,
                             C order, in header order

The header is written with sorted keys, so equal networks give equal bytes.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .gnn.chain import ChainConfig, ChainParams
from .gnn.features import FeatureScales
from .gnn.mlp import Mlp
from .rl.networks import DenseQNetwork, GnnQNetwork

MAGIC = b"UAVQNET\0"
VERSION = 1


class CheckpointError(ValueError):
    pass


def _header(net) -> dict:
    head = {"kind": net.kind, "scales": net.scales.to_dict(),
            "shapes": [list(p.shape) for p in net.params]}
    if net.kind == "gnn":
        c = net.chain.config
        head["chain"] = {"hidden": list(c.hidden), "latent": c.latent, "activation": c.activation,
                         "node_width": c.node_width, "edge_width": c.edge_width}
    else:
        head["dense"] = {"widths": net.mlp.widths, "activation": net.mlp.activation,
                         "num_iot": net.num_iot, "num_uav": net.num_uav}
    return head


def dumps(net) -> bytes:
    header = json.dumps(_header(net), sort_keys=True).encode()
    payload = b"".join(np.ascontiguousarray(p, dtype="<f8").tobytes() for p in net.params)
    return MAGIC + struct.pack("<HI", VERSION, len(header)) + header + payload


def loads(blob: bytes):
    if blob[:8] != MAGIC:
        raise CheckpointError("not a Q-network checkpoint")
    version, hlen = struct.unpack("<HI", blob[8:14])
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    head = json.loads(blob[14:14 + hlen].decode())
    offset = 14 + hlen
    arrays = []
    for shape in head["shapes"]:
        n = int(np.prod(shape)) * 8
        if offset + n > len(blob):
            raise CheckpointError("truncated checkpoint")
        arrays.append(np.frombuffer(blob[offset:offset + n], dtype="<f8").reshape(shape).astype(float))
        offset += n
    if offset != len(blob):
        raise CheckpointError("trailing bytes after payload")
    scales = FeatureScales(**head["scales"])
    if head["kind"] == "gnn":
        c = head["chain"]
        config = ChainConfig(tuple(c["hidden"]), c["latent"], c["activation"], c["node_width"], c["edge_width"])
        params = ChainParams.zeros(config)
        net = GnnQNetwork(params, scales)
    elif head["kind"] == "dqn":
        d = head["dense"]
        net = DenseQNetwork(Mlp.zeros(d["widths"], d["activation"]), d["num_iot"], d["num_uav"], scales)
    else:
        raise CheckpointError(f"unknown network kind {head['kind']!r}")
    if [list(p.shape) for p in net.params] != head["shapes"]:
        raise CheckpointError("parameter shapes do not match the architecture")
    for p, a in zip(net.params, arrays):
        p[...] = a
    return net


def save_network(net, path) -> None:
    Path(path).write_bytes(dumps(net))


def load_network(path):
    return loads(Path(path).read_bytes())
