"""Dense neural atlases loaded from portable JSON weight files.

File layout::

    {"m": int, "d": int, "D": int,
     "encoders": [net, ...],     # m nets, R^D -> R^d
     "decoders": [net, ...],     # m nets, R^d -> R^D
     "partition": net}           # R^D -> R^m, final activation softmax

    net = [{"w": [[...], ...], "b": [...], "act": "swish"}, ...]

Weight matrices are row-major ``out x in``. All arithmetic is float64.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import expit

from .atlas import Atlas
from .errors import FormatError, UsageError

ACTIVATIONS = ("identity", "relu", "swish", "tanh", "sigmoid", "softmax")


def _softmax(a: np.ndarray) -> np.ndarray:
    e = np.exp(a - np.max(a, axis=-1, keepdims=True))
    return e / np.sum(e, axis=-1, keepdims=True)


_ACT_FUNCS = {
    "identity": lambda a: a,
    "relu": lambda a: np.maximum(a, 0.0),
    "swish": lambda a: a * expit(a),
    "tanh": np.tanh,
    "sigmoid": expit,
    "softmax": _softmax,
}


@dataclass(frozen=True, eq=False)
class DenseLayer:
    weight: np.ndarray
    bias: np.ndarray
    activation: str = "identity"

    def __post_init__(self):
        w = np.array(self.weight, dtype=np.float64)
        b = np.array(self.bias, dtype=np.float64)
        if w.ndim != 2:
            raise UsageError("weight must be a 2-D matrix")
        if b.shape != (w.shape[0],):
            raise UsageError(f"bias length {b.shape} does not match {w.shape[0]} weight rows")
        if self.activation not in ACTIVATIONS:
            raise UsageError(f"unknown activation {self.activation!r}")
        w.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "bias", b)

    @property
    def in_dim(self) -> int:
        return self.weight.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weight.shape[0]


def mlp_forward(layers: list[DenseLayer], x) -> np.ndarray:
    """Evaluate a stack of dense layers on ``x`` of shape ``(..., in)``."""
    a = np.asarray(x, dtype=np.float64)
    if not layers:
        return a.copy()
    if a.shape[-1:] != (layers[0].in_dim,):
        raise UsageError(f"input has trailing dimension {a.shape[-1:]}, network expects {layers[0].in_dim}")
    for layer in layers:
        a = _ACT_FUNCS[layer.activation](a @ layer.weight.T + layer.bias)
    return a


class NeuralAtlas(Atlas):
    """Atlas whose charts and partition of unity are dense networks.

    Encoders are total: there is no domain check on ``encode``.
    """

    encode_is_total = True

    def __init__(self, m: int, d: int, D: int, encoders, decoders, partition, spec: str = "neural"):
        self.m, self.d, self.D = int(m), int(d), int(D)
        self.encoders = tuple(tuple(net) for net in encoders)
        self.decoders = tuple(tuple(net) for net in decoders)
        self.partition_net = tuple(partition)
        self.spec = spec
        _validate_model(self)
        self._digest = hashlib.sha256(_canonical_json(self).encode()).hexdigest()

    @property
    def fingerprint(self) -> dict:
        return {"m": self.m, "d": self.d, "D": self.D, "digest": "sha256:" + self._digest}

    def _decode(self, chart, z):
        return mlp_forward(self.decoders[chart - 1], z)

    def _encode(self, chart, x):
        return mlp_forward(self.encoders[chart - 1], x)

    def _partition(self, x):
        return mlp_forward(self.partition_net, x)


def _validate_model(model: NeuralAtlas) -> None:
    def check_net(net, path, d_in, d_out, softmax_last):
        if not net:
            raise FormatError(f"{path}: network has no layers")
        prev = d_in
        for i, layer in enumerate(net):
            if layer.in_dim != prev:
                raise FormatError(f"{path}[{i}].w: expected {prev} input columns, got {layer.in_dim}")
            last = i == len(net) - 1
            if layer.activation == "softmax" and not (softmax_last and last):
                raise FormatError(f"{path}[{i}].act: softmax only allowed as the final partition layer")
            prev = layer.out_dim
        if prev != d_out:
            raise FormatError(f"{path}[{len(net) - 1}].w: expected output dimension {d_out}, got {prev}")
        if softmax_last and net[-1].activation != "softmax":
            raise FormatError(f"{path}[{len(net) - 1}].act: partition network must end in softmax")

    for key, nets in (("encoders", model.encoders), ("decoders", model.decoders)):
        if len(nets) != model.m:
            raise FormatError(f"{key}: expected {model.m} networks, got {len(nets)}")
    for y, net in enumerate(model.encoders):
        check_net(net, f"encoders[{y}]", model.D, model.d, False)
    for y, net in enumerate(model.decoders):
        check_net(net, f"decoders[{y}]", model.d, model.D, False)
    check_net(model.partition_net, "partition", model.D, model.m, True)


def _net_to_json(net) -> list:
    return [{"w": layer.weight.tolist(), "b": layer.bias.tolist(), "act": layer.activation} for layer in net]


def model_to_dict(model: NeuralAtlas) -> dict:
    return {
        "m": model.m,
        "d": model.d,
        "D": model.D,
        "encoders": [_net_to_json(net) for net in model.encoders],
        "decoders": [_net_to_json(net) for net in model.decoders],
        "partition": _net_to_json(model.partition_net),
    }


def _canonical_json(model: NeuralAtlas) -> str:
    return json.dumps(model_to_dict(model), separators=(",", ":"))


def _parse_net(obj, path: str) -> list[DenseLayer]:
    if not isinstance(obj, list):
        raise FormatError(f"{path}: expected a list of layers")
    layers = []
    for i, item in enumerate(obj):
        where = f"{path}[{i}]"
        if not isinstance(item, dict):
            raise FormatError(f"{where}: expected an object")
        for key in ("w", "b", "act"):
            if key not in item:
                raise FormatError(f"{where}.{key}: missing")
        try:
            w = np.array(item["w"], dtype=np.float64)
        except (TypeError, ValueError):
            raise FormatError(f"{where}.w: not a numeric matrix") from None
        try:
            b = np.array(item["b"], dtype=np.float64)
        except (TypeError, ValueError):
            raise FormatError(f"{where}.b: not a numeric vector") from None
        if w.ndim != 2:
            raise FormatError(f"{where}.w: expected a 2-D matrix")
        if b.shape != (w.shape[0],):
            raise FormatError(f"{where}.b: length {b.size} does not match {w.shape[0]} rows of w")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise FormatError(f"{where}: non-finite weights")
        if item["act"] not in ACTIVATIONS:
            raise FormatError(f"{where}.act: unknown activation {item['act']!r}")
        layers.append(DenseLayer(w, b, item["act"]))
    return layers


def model_from_dict(doc, spec: str = "neural") -> NeuralAtlas:
    if not isinstance(doc, dict):
        raise FormatError("$: expected a JSON object")
    for key in ("m", "d", "D", "encoders", "decoders", "partition"):
        if key not in doc:
            raise FormatError(f"{key}: missing")
    for key in ("m", "d", "D"):
        if not isinstance(doc[key], int) or isinstance(doc[key], bool) or doc[key] < 1:
            raise FormatError(f"{key}: expected a positive integer")
    nets = {}
    for key in ("encoders", "decoders"):
        if not isinstance(doc[key], list):
            raise FormatError(f"{key}: expected a list of networks")
        nets[key] = [_parse_net(net, f"{key}[{y}]") for y, net in enumerate(doc[key])]
    part = _parse_net(doc["partition"], "partition")
    return NeuralAtlas(doc["m"], doc["d"], doc["D"], nets["encoders"], nets["decoders"], part, spec=spec)


def load_neural_atlas(path) -> NeuralAtlas:
    """Load a neural atlas from a JSON weight file."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None
    return model_from_dict(doc, spec=f"neural:{path}")


def save_neural_atlas(model: NeuralAtlas, path) -> None:
    """Write ``model`` in the JSON weight format (floats round-trip exactly)."""
    Path(path).write_text(_canonical_json(model) + "\n")
