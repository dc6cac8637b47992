"""Deterministic 70/15/15 train/val/test assignment."""
from __future__ import annotations

import dataclasses
import hashlib

import numpy as np

from .records import DatasetManifest, EmptyManifest, Split


def split_counts(n: int) -> tuple[int, int, int]:
    """Floor rule in integer arithmetic: train=floor(.70n), val=floor(.15n),
    test takes the remainder."""
    n_train = (70 * n) // 100
    n_val = (15 * n) // 100
    return n_train, n_val, n - n_train - n_val


def assign_splits(manifest: DatasetManifest, seed: int) -> DatasetManifest:
    """Shuffle ids with a seeded PRNG and cut at the floor-rule boundaries.

    Assignment depends only on the id set and the seed, so re-running on the
    same manifest reproduces the identical split map.
    """
    if not manifest.entries:
        raise EmptyManifest("cannot split an empty manifest")

    ids = sorted(manifest.ids())
    digest = hashlib.blake2b(f"split:{seed}".encode("ascii"), digest_size=8).digest()
    rng = np.random.default_rng(int.from_bytes(digest, "big"))
    order = rng.permutation(len(ids))
    shuffled = [ids[i] for i in order]

    n_train, n_val, _ = split_counts(len(ids))
    split_of: dict[str, Split] = {}
    for pos, image_id in enumerate(shuffled):
        if pos < n_train:
            split_of[image_id] = Split.TRAIN
        elif pos < n_train + n_val:
            split_of[image_id] = Split.VAL
        else:
            split_of[image_id] = Split.TEST
    return dataclasses.replace(manifest, split_of=split_of, split_seed=seed)
