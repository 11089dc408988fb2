"""
Model checkpoints.

Layout (all integers little-endian):

    b"TRSODEN\\x01"            8-byte magic, last byte is the format version
    header_length             8-byte unsigned integer
    header                    UTF-8 JSON (sorted keys): kind, state_dim,
                              time_augmented, networks, shapes, metadata
    blob                      parameters in canonical order as '<f8'
"""

import json
import struct
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from autodiff.mlp import MlpSpec, ModelParams

from .hoden import HodenModel
from .oden import OdenModel

MAGIC = b"TRSODEN\x01"
Model = Union[OdenModel, HodenModel]


class CheckpointError(ValueError):
    """Raised when a checkpoint cannot be decoded."""


def _header(model: Model, metadata: Dict[str, Any]) -> Dict[str, Any]:
    if isinstance(model, OdenModel):
        networks = {'field': model.spec.to_dict()}
    else:
        networks = {
            'kinetic': model.kinetic_spec.to_dict(),
            'potential': model.potential_spec.to_dict(),
        }
    return {
        'kind': model.kind,
        'state_dim': model.state_dim,
        'time_augmented': model.time_augmented,
        'networks': networks,
        'shapes': [list(a.shape) for a in model.parameters()],
        'metadata': metadata,
    }


def encode_checkpoint(model: Model, metadata: Optional[Dict[str, Any]] = None) -> bytes:
    """Serialize a model to checkpoint bytes."""
    header = json.dumps(_header(model, metadata or {}), sort_keys=True).encode("utf-8")
    blob = b"".join(np.ascontiguousarray(a, dtype="<f8").tobytes() for a in model.parameters())
    return MAGIC + struct.pack("<Q", len(header)) + header + blob


def decode_checkpoint(data: bytes) -> Tuple[Model, Dict[str, Any]]:
    """
    Rebuild a model from checkpoint bytes.

    Returns:
        Tuple of (model, metadata)

    Raises:
        CheckpointError: bad magic, truncated data or inconsistent header
    """
    if data[:len(MAGIC)] != MAGIC:
        raise CheckpointError("Not a trsoden checkpoint (bad magic)")
    offset = len(MAGIC)
    if len(data) < offset + 8:
        raise CheckpointError("Checkpoint truncated before header length")
    (header_len,) = struct.unpack("<Q", data[offset:offset + 8])
    offset += 8
    try:
        header = json.loads(data[offset:offset + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"Malformed checkpoint header: {exc}") from exc
    offset += header_len

    shapes = [tuple(s) for s in header.get('shapes', [])]
    sizes = [int(np.prod(s)) for s in shapes]
    expected = offset + 8 * sum(sizes)
    if len(data) != expected:
        raise CheckpointError(f"Checkpoint blob has {len(data) - offset} bytes, expected {expected - offset}")

    flat = np.frombuffer(data, dtype="<f8", offset=offset).astype(np.float64)
    arrays, start = [], 0
    for shape, size in zip(shapes, sizes):
        arrays.append(flat[start:start + size].reshape(shape).copy())
        start += size

    try:
        kind = header['kind']
        networks = header['networks']
        time_augmented = bool(header['time_augmented'])
        state_dim = int(header['state_dim'])
        if kind == OdenModel.kind:
            model = OdenModel(MlpSpec.from_dict(networks['field']), ModelParams.from_arrays(arrays),
                              state_dim, time_augmented)
        elif kind == HodenModel.kind:
            kinetic_spec = MlpSpec.from_dict(networks['kinetic'])
            potential_spec = MlpSpec.from_dict(networks['potential'])
            split = 2 * len(kinetic_spec.layer_shapes)
            model = HodenModel(
                kinetic_spec, ModelParams.from_arrays(arrays[:split]),
                potential_spec, ModelParams.from_arrays(arrays[split:]),
                state_dim // 2, time_augmented,
            )
        else:
            raise CheckpointError(f"Unknown model kind: {kind!r}")
    except KeyError as exc:
        raise CheckpointError(f"Checkpoint header is missing {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, CheckpointError):
            raise
        raise CheckpointError(f"Checkpoint is inconsistent: {exc}") from exc
    return model, header.get('metadata', {})


def save_checkpoint(model: Model, path: Union[str, Path], metadata: Optional[Dict[str, Any]] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_checkpoint(model, metadata))
    return path


def load_checkpoint(path: Union[str, Path]) -> Tuple[Model, Dict[str, Any]]:
    return decode_checkpoint(Path(path).read_bytes())
