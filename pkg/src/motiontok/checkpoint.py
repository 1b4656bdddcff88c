"""Checkpoint container: named ParamSets + auxiliary arrays + JSON metadata in one npz."""

import json

import numpy as np

from .errors import FormatError
from .nn.params import ParamSet


def save_checkpoint(path, param_sets: dict, arrays: dict, meta: dict) -> None:
    payload = {}
    for set_name, ps in param_sets.items():
        for k, v in ps.state_dict().items():
            payload[f"ps/{set_name}/{k}"] = v
    for k, v in arrays.items():
        payload[f"arr/{k}"] = np.asarray(v)
    payload["meta"] = np.frombuffer(json.dumps(meta, sort_keys=True).encode(), dtype=np.uint8)
    # write through a handle so the exact path is honored (savez appends .npz
    # to bare string paths)
    with open(path, "wb") as f:
        np.savez_compressed(f, **payload)


def load_checkpoint(path):
    """Returns (param_states: {set: {param: array}}, arrays: {name: array}, meta: dict)."""
    try:
        with np.load(path, allow_pickle=False) as z:
            data = {k: z[k] for k in z.files}
    except (OSError, ValueError) as e:
        raise FormatError("bad_checkpoint", f"cannot read checkpoint {path}: {e}") from e
    if "meta" not in data:
        raise FormatError("bad_checkpoint", "checkpoint has no metadata record")
    meta = json.loads(bytes(data.pop("meta")).decode())
    states, arrays = {}, {}
    for key, v in data.items():
        if key.startswith("ps/"):
            _, set_name, param = key.split("/", 2)
            states.setdefault(set_name, {})[param] = v
        elif key.startswith("arr/"):
            arrays[key[4:]] = v
    return states, arrays, meta


def restore_params(ps: ParamSet, state: dict) -> None:
    ps.load_state_dict(state)
