"""Token and node alignment between a source graph and a correction graph.

Tokens are paired by a minimum-total-edit-distance bipartite assignment;
the pairing is then lifted to graph nodes by maximizing a yield-overlap
weight, dropping zero-weight candidates.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .graph import SemanticGraph, yield_of

S_TO_C = "s_to_c"
C_TO_S = "c_to_s"


def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance with unit insert/delete/substitute costs."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


@dataclass(frozen=True)
class LeafAlignment:
    """Partial 1-to-1 pairing of source token indices to correction indices."""

    pairs: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        src = [i for i, _ in self.pairs]
        dst = [j for _, j in self.pairs]
        if len(set(src)) != len(src) or len(set(dst)) != len(dst):
            raise ValueError("leaf alignment is not 1-to-1")

    def source_to_correction(self) -> dict[int, int]:
        return dict(sorted(self.pairs))

    def correction_to_source(self) -> dict[int, int]:
        return {j: i for i, j in sorted(self.pairs)}


def _normalized_distance(a: str, b: str) -> float:
    longest = max(len(a), len(b))
    return edit_distance(a, b) / longest if longest else 0.0


def align_leaves(
    source_tokens: Sequence[str],
    correction_tokens: Sequence[str],
    lowercase: bool = False,
    max_norm_dist: float | None = None,
) -> LeafAlignment:
    """Minimum-total-cost token pairing; surplus tokens stay unaligned.

    Ties between minimum-cost assignments are broken toward pairs with small
    positional displacement |i - j|, then toward the lexicographically
    smallest pair list.  ``max_norm_dist`` optionally forbids pairs whose
    normalized edit distance exceeds the threshold.
    """
    n, m = len(source_tokens), len(correction_tokens)
    if n == 0 or m == 0:
        return LeafAlignment(frozenset())
    src = [t.lower() for t in source_tokens] if lowercase else list(source_tokens)
    dst = [t.lower() for t in correction_tokens] if lowercase else list(correction_tokens)

    dist = [[edit_distance(a, b) for b in dst] for a in src]
    pruned = [[False] * m for _ in range(n)]
    if max_norm_dist is not None:
        for i in range(n):
            for j in range(m):
                if _normalized_distance(src[i], dst[j]) > max_norm_dist:
                    pruned[i][j] = True

    # Composite integer cost: edit distance first, |i - j| as tie-breaker.
    shift_unit = min(n, m) * max(n, m) + 1
    max_dist = max(max(row) for row in dist)
    forbidden = (max_dist + 1) * shift_unit * min(n, m) + 1
    cost = np.empty((n, m), dtype=np.int64)
    for i in range(n):
        for j in range(m):
            cost[i, j] = forbidden if pruned[i][j] else dist[i][j] * shift_unit + abs(i - j)
    rows, cols = linear_sum_assignment(cost)
    pairs = [(int(i), int(j)) for i, j in zip(rows, cols) if not pruned[i][j]]
    pairs = _canonicalize(pairs, dist)
    return LeafAlignment(frozenset(pairs))


def _canonicalize(
    pairs: list[tuple[int, int]], dist: list[list[int]]
) -> list[tuple[int, int]]:
    """Swap pair endpoints toward the lexicographically smallest pair list,
    preserving both the total edit distance and the total |i - j|."""
    pairs = sorted(pairs)
    changed = True
    while changed:
        changed = False
        for a in range(len(pairs)):
            for b in range(a + 1, len(pairs)):
                (i1, j1), (i2, j2) = pairs[a], pairs[b]
                old_cost = dist[i1][j1] + dist[i2][j2]
                new_cost = dist[i1][j2] + dist[i2][j1]
                old_shift = abs(i1 - j1) + abs(i2 - j2)
                new_shift = abs(i1 - j2) + abs(i2 - j1)
                if new_cost != old_cost or new_shift != old_shift:
                    continue
                candidate = sorted(
                    pairs[:a] + [(i1, j2)] + pairs[a + 1 : b] + [(i2, j1)] + pairs[b + 1 :]
                )
                if candidate < pairs:
                    pairs = candidate
                    changed = True
    return pairs


@dataclass(frozen=True)
class NodeAlignment:
    """Partial many-to-1 map from one graph's nodes onto the other's.

    ``direction`` names which side is being aligned: ``s_to_c`` maps source
    nodes onto correction nodes, ``c_to_s`` the reverse.  ``weights`` carries
    the yield-overlap weight of each mapped pair (1 for leaf pairs).
    """

    direction: str
    mapping: tuple[tuple[str, str], ...]
    weights: tuple[tuple[tuple[str, str], Fraction], ...] = ()

    def as_dict(self) -> dict[str, str]:
        return dict(self.mapping)

    def pair_set(self) -> frozenset[tuple[str, str]]:
        return frozenset(self.mapping)


def node_weight(
    v: str,
    u: str,
    aligned_pairs: Iterable[tuple[int, int]],
    g_aligned: SemanticGraph,
    g_target: SemanticGraph,
) -> Fraction:
    """Yield-overlap weight of aligning node ``v`` (aligned graph) to ``u``
    (target graph): aligned token pairs between the two yields, divided by
    the size of the target yield.  Zero when the target yield is empty.

    ``aligned_pairs`` is oriented (aligned-side token, target-side token).
    """
    yv = yield_of(g_aligned, v)
    yu = yield_of(g_target, u)
    if not yu:
        return Fraction(0)
    hits = sum(1 for a, b in aligned_pairs if a in yv and b in yu)
    return Fraction(hits, len(yu))


def extend_alignment(
    g_aligned: SemanticGraph,
    g_target: SemanticGraph,
    leaf_alignment: LeafAlignment,
    direction: str,
) -> NodeAlignment:
    """Lift a leaf alignment to a node alignment.

    Anchored leaves follow the leaf alignment directly.  Every other
    non-implicit node maps to the target node with maximal positive weight;
    ties prefer the larger target yield, then the smaller node id.  (Weight 1
    is reached by any target whose yield is fully aligned into the node's
    yield, so preferring small yields would send whole-sentence nodes to
    arbitrary single leaves; the large-yield preference keeps the alignment
    the identity on structurally identical graphs.)
    Implicit units (empty yield) are never aligned on either side.
    """
    if direction not in (S_TO_C, C_TO_S):
        raise ValueError(f"unknown direction {direction!r}")
    if direction == S_TO_C:
        token_map = leaf_alignment.source_to_correction()
    else:
        token_map = leaf_alignment.correction_to_source()
    oriented_pairs = sorted(token_map.items())

    aligned_leaves = g_aligned.anchored_leaves()
    target_leaves = g_target.anchored_leaves()

    mapping: list[tuple[str, str]] = []
    weights: list[tuple[tuple[str, str], Fraction]] = []
    for node in g_aligned.nodes:
        if node.anchor is not None:
            partner = token_map.get(node.anchor)
            if partner is not None:
                pair = (node.id, target_leaves[partner])
                mapping.append(pair)
                weights.append((pair, Fraction(1)))
            continue
        if not g_aligned.children_of(node.id):
            continue  # implicit unit
        best: tuple[Fraction, int, str] | None = None
        for target_node in g_target.nodes:
            u = target_node.id
            w = node_weight(node.id, u, oriented_pairs, g_aligned, g_target)
            if w == 0:
                continue
            key = (-w, -len(yield_of(g_target, u)), u)
            if best is None or key < best:
                best = key
        if best is not None:
            pair = (node.id, best[2])
            mapping.append(pair)
            weights.append((pair, -best[0]))
    mapping.sort()
    weights.sort()
    return NodeAlignment(direction, tuple(mapping), tuple(weights))


def format_alignment_dump(
    source_tokens: Sequence[str],
    correction_tokens: Sequence[str],
    leaf_alignment: LeafAlignment,
    node_alignment: NodeAlignment,
) -> str:
    """Human-readable diagnostic listing of leaf pairs with their costs and
    node pairs with their weights, in stable order."""
    lines = ["# leaf pairs (source_index, correction_index, source, correction, cost)"]
    for i, j in sorted(leaf_alignment.pairs):
        cost = edit_distance(source_tokens[i], correction_tokens[j])
        lines.append(f"{i}\t{j}\t{source_tokens[i]}\t{correction_tokens[j]}\t{cost}")
    lines.append(f"# node pairs ({node_alignment.direction}): aligned, target, weight")
    weight_by_pair = dict(node_alignment.weights)
    for pair in node_alignment.mapping:
        w = weight_by_pair[pair]
        lines.append(f"{pair[0]}\t{pair[1]}\t{w.numerator}/{w.denominator}")
    return "\n".join(lines) + "\n"
