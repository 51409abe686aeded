"""Action trees: hierarchical (domain, act, slot) structure and similarity.

An action sequence maps onto a rooted ordered labeled tree: a virtual root,
domain nodes in sequence order, act nodes under their domain, and slot
leaves under their act.  Sibling order mirrors the action sequence because
the relative position of actions is meaningful downstream.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _ted
from .model import ActionSeq

ROOT_LABEL = "<root>"


@dataclass(frozen=True)
class ActionTree:
    label: str
    children: tuple["ActionTree", ...] = ()


def to_tree(action: ActionSeq) -> ActionTree:
    """Build the rooted ordered tree of an action sequence.

    Size is 1 (virtual root) + #domains + #acts + #slots.
    """
    domains = []
    for domain, acts in action.entries:
        act_nodes = tuple(
            ActionTree(label=act, children=tuple(ActionTree(label=s) for s in slots))
            for act, slots in acts
        )
        domains.append(ActionTree(label=domain, children=act_nodes))
    return ActionTree(label=ROOT_LABEL, children=tuple(domains))


def tree_size(tree: ActionTree) -> int:
    return 1 + sum(tree_size(c) for c in tree.children)


@dataclass(frozen=True)
class PackedForest:
    """Flat postorder arrays for a list of trees (see ``_ted``)."""

    node_start: np.ndarray
    labels: np.ndarray
    lml: np.ndarray
    kr_start: np.ndarray
    keyroots: np.ndarray
    sizes: np.ndarray


def pack_trees(trees: Sequence[ActionTree]) -> PackedForest:
    node_start = [0]
    kr_start = [0]
    all_labels: list[int] = []
    all_lml: list[int] = []
    all_keyroots: list[int] = []
    intern: dict[str, int] = {}

    for tree in trees:
        labels: list[int] = []
        lml: list[int] = []

        def walk(node: ActionTree) -> int:
            first_leaf = -1
            for child in node.children:
                child_first = walk(child)
                if first_leaf < 0:
                    first_leaf = child_first
            index = len(labels)
            if first_leaf < 0:
                first_leaf = index
            labels.append(intern.setdefault(node.label, len(intern)))
            lml.append(first_leaf)
            return first_leaf

        walk(tree)
        # Keyroot = highest node of each leftmost-path equivalence class.
        highest: dict[int, int] = {}
        for i, leaf in enumerate(lml):
            highest[leaf] = i
        all_keyroots.extend(sorted(highest.values()))
        all_labels.extend(labels)
        all_lml.extend(lml)
        node_start.append(len(all_labels))
        kr_start.append(len(all_keyroots))

    return PackedForest(
        node_start=np.asarray(node_start, dtype=np.int64),
        labels=np.asarray(all_labels, dtype=np.int64),
        lml=np.asarray(all_lml, dtype=np.int64),
        kr_start=np.asarray(kr_start, dtype=np.int64),
        keyroots=np.asarray(all_keyroots, dtype=np.int64),
        sizes=np.diff(np.asarray(node_start, dtype=np.int64)),
    )


def pairwise_distances(trees: Sequence[ActionTree], threads: int = 1,
                       full: bool = False) -> np.ndarray:
    packed = pack_trees(trees)
    return _ted.pairwise_distances_packed(
        packed.node_start, packed.labels, packed.lml,
        packed.kr_start, packed.keyroots, threads=threads, full=full,
    )


def tree_edit_distance(t1: ActionTree, t2: ActionTree) -> float:
    """Minimum unit-cost insert/delete/relabel edit distance (ordered trees)."""
    return float(pairwise_distances([t1, t2])[0, 1])


def similarity_from_distance(size1: int, size2: int, distance: float) -> float:
    """Normalized similarity: (max size - d) / max size, clamped below at 0."""
    m = max(size1, size2)
    return max(0.0, (m - distance) / m)


def similarity(t1: ActionTree, t2: ActionTree) -> float:
    return similarity_from_distance(tree_size(t1), tree_size(t2), tree_edit_distance(t1, t2))
