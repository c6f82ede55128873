"""Weight checkpointing.

Checkpoints are .npz containers holding one array per named parameter plus
a format-version marker; names come from Module.named_parameters(), so a
checkpoint written by one build loads into any structurally identical
module tree. Loading is strict: name sets and shapes must match exactly.
"""
from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatchError
from .layers import Module

__all__ = ["save_weights", "load_weights", "FORMAT_VERSION"]

FORMAT_VERSION = 1
_VERSION_KEY = "__checkpoint_version__"


def save_weights(module: Module, path) -> None:
    arrays = {name: p.data for name, p in module.named_parameters()}
    arrays[_VERSION_KEY] = np.array(FORMAT_VERSION)
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_weights(module: Module, path) -> None:
    with np.load(path) as archive:
        stored = {k: archive[k] for k in archive.files}
    version = int(stored.pop(_VERSION_KEY, -1))
    if version != FORMAT_VERSION:
        raise ShapeMismatchError(f"unsupported checkpoint version {version}")
    params = dict(module.named_parameters())
    if set(params) != set(stored):
        missing = set(params) ^ set(stored)
        raise ShapeMismatchError(f"checkpoint/module name mismatch: {sorted(missing)}")
    for name, p in params.items():
        if stored[name].shape != p.data.shape:
            raise ShapeMismatchError(
                f"shape mismatch for {name}: {stored[name].shape} vs {p.data.shape}"
            )
        p.data = stored[name].astype(np.float64)
