"""Sensitivity harness: apply typed edits in sampled orders, emit a parse
manifest for an external parser, then aggregate per-edit-type score deltas.

The pipeline is split in two phases.  ``build_chain``/``emit_manifest`` work
on text only and produce every intermediate sentence version; an external
semantic parser turns versions into graphs; ``compute_deltas`` ingests those
graphs and averages the score change per edit type.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

from .graph import SemanticGraph
from .measures import usim


class HarnessError(ValueError):
    pass


@dataclass(frozen=True)
class EditOperation:
    """Replace tokens[start:end) with ``replacement``; typed by ``edit_type``."""

    start: int
    end: int
    replacement: tuple[str, ...]
    edit_type: str

    def __post_init__(self) -> None:
        if not 0 <= self.start <= self.end:
            raise HarnessError(f"invalid edit span ({self.start}, {self.end})")


@dataclass(frozen=True)
class VersionChain:
    sentence_id: str
    seed: int
    order: tuple[int, ...]  # permutation of edit indices, in application order
    versions: tuple[tuple[str, ...], ...]  # versions[0] is the original
    source_index: int
    edits: tuple[EditOperation, ...]  # in original (corpus) order


@dataclass(frozen=True)
class TypeDelta:
    edit_type: str
    delta_mean: Fraction
    occurrences: int


def apply_edit(tokens: Sequence[str], edit: EditOperation) -> list[str]:
    if edit.end > len(tokens):
        raise HarnessError(
            f"edit span ({edit.start}, {edit.end}) out of bounds for "
            f"{len(tokens)} tokens"
        )
    return list(tokens[: edit.start]) + list(edit.replacement) + list(tokens[edit.end :])


def _check_non_overlapping(edits: Sequence[EditOperation], n_tokens: int) -> None:
    spans = sorted((e.start, e.end) for e in edits)
    for start, end in spans:
        if end > n_tokens:
            raise HarnessError(f"edit span ({start}, {end}) out of bounds")
    for (s1, e1), (s2, e2) in zip(spans, spans[1:]):
        # open-interval intersection; insertions may touch another span's
        # boundary, but two insertions at the same point are ambiguous
        if (s1 < e2 and s2 < e1) or (s1, e1) == (s2, e2):
            raise HarnessError(f"overlapping edit spans ({s1},{e1}) and ({s2},{e2})")


def _chain_rng(master_seed: int, sentence_id: str) -> random.Random:
    # one independent, reproducible stream per sentence
    return random.Random(f"{master_seed}:{sentence_id}")


def apply_edits_in_order(
    tokens: Sequence[str],
    edits: Sequence[EditOperation],
    order: Sequence[int],
) -> list[tuple[str, ...]]:
    """All versions produced by applying the edits in the given order.

    Each pending edit's span is remapped by the cumulative length deltas of
    already applied edits that end at or before its start.  Returns
    ``len(order) + 1`` versions, the original first.
    """
    _check_non_overlapping(edits, len(tokens))
    versions = [tuple(tokens)]
    current = list(tokens)
    shift_events: list[tuple[int, int]] = []  # (original end, length delta)
    for k in order:
        edit = edits[k]
        shift = sum(delta for end, delta in shift_events if end <= edit.start)
        shifted = EditOperation(
            edit.start + shift, edit.end + shift, edit.replacement, edit.edit_type
        )
        current = apply_edit(current, shifted)
        versions.append(tuple(current))
        shift_events.append((edit.end, len(edit.replacement) - (edit.end - edit.start)))
    return versions


def build_chain(
    sentence_id: str,
    tokens: Sequence[str],
    edits: Sequence[EditOperation],
    seed: int,
    pin_source_index: int | None = None,
) -> VersionChain:
    """Apply the edits in a seeded random order, recording every version.

    The comparison source is drawn uniformly from the resulting versions
    unless pinned.
    """
    rng = _chain_rng(seed, sentence_id)
    order = list(range(len(edits)))
    rng.shuffle(order)
    versions = apply_edits_in_order(tokens, edits, order)

    if pin_source_index is None:
        source_index = rng.randrange(len(versions))
    else:
        if not 0 <= pin_source_index < len(versions):
            raise HarnessError(f"pinned source index {pin_source_index} out of range")
        source_index = pin_source_index
    return VersionChain(
        sentence_id, seed, tuple(order), tuple(versions), source_index, tuple(edits)
    )


def version_id(sentence_id: str, position: int) -> str:
    return f"{sentence_id}.v{position}"


# -- edit corpus and manifest I/O -----------------------------------------


def read_edit_corpus(path: str | Path) -> list[tuple[str, list[str], list[EditOperation]]]:
    """Newline-delimited records {sentence_id, tokens, edits:[...]}."""
    path = Path(path)
    out = []
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise HarnessError(f"cannot read {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise HarnessError(f"{path} line {lineno}: invalid JSON: {exc.msg}") from exc
        try:
            sid = doc["sentence_id"]
            tokens = list(doc["tokens"])
            edits = [
                EditOperation(
                    e["start"], e["end"], tuple(e["replacement"]), e["type"]
                )
                for e in doc["edits"]
            ]
        except (KeyError, TypeError) as exc:
            raise HarnessError(f"{path} line {lineno}: bad record: {exc}") from exc
        out.append((sid, tokens, edits))
    return out


def manifest_to_dict(chains: Sequence[VersionChain]) -> dict:
    versions = []
    chain_docs = []
    for chain in chains:
        vids = [version_id(chain.sentence_id, k) for k in range(len(chain.versions))]
        for vid, tokens in zip(vids, chain.versions):
            versions.append({"version_id": vid, "tokens": list(tokens)})
        chain_docs.append(
            {
                "sentence_id": chain.sentence_id,
                "seed": chain.seed,
                "order": list(chain.order),
                "source_index": chain.source_index,
                "version_ids": vids,
                "edits": [
                    {
                        "start": e.start,
                        "end": e.end,
                        "replacement": list(e.replacement),
                        "type": e.edit_type,
                    }
                    for e in chain.edits
                ],
            }
        )
    return {"versions": versions, "chains": chain_docs}


def chains_from_manifest(doc: dict) -> list[VersionChain]:
    try:
        tokens_by_vid = {v["version_id"]: tuple(v["tokens"]) for v in doc["versions"]}
        chains = []
        for c in doc["chains"]:
            versions = tuple(tokens_by_vid[vid] for vid in c["version_ids"])
            edits = tuple(
                EditOperation(e["start"], e["end"], tuple(e["replacement"]), e["type"])
                for e in c["edits"]
            )
            chains.append(
                VersionChain(
                    c["sentence_id"], c["seed"], tuple(c["order"]),
                    versions, c["source_index"], edits,
                )
            )
    except (KeyError, TypeError) as exc:
        raise HarnessError(f"bad manifest: {exc}") from exc
    return chains


def emit_manifest(chains: Sequence[VersionChain], path: str | Path) -> None:
    text = json.dumps(manifest_to_dict(chains), ensure_ascii=False, sort_keys=True, indent=1)
    Path(path).write_text(text + "\n", encoding="utf-8")


def load_manifest(path: str | Path) -> list[VersionChain]:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise HarnessError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise HarnessError(f"{path}: invalid JSON: {exc.msg}") from exc
    return chains_from_manifest(doc)


# -- delta aggregation -----------------------------------------------------


def per_edit_deltas(
    chains: Sequence[VersionChain],
    parsed_graphs: Mapping[str, SemanticGraph],
    lowercase: bool = False,
    include_remote: bool = True,
    strict_parent: bool = False,
    max_norm_dist: float | None = None,
) -> list[tuple[str, Fraction]]:
    """(edit type, score delta) for every applied edit across all chains."""
    kwargs = dict(
        lowercase=lowercase,
        include_remote=include_remote,
        strict_parent=strict_parent,
        max_norm_dist=max_norm_dist,
    )

    def graph_for(vid: str) -> SemanticGraph:
        try:
            return parsed_graphs[vid]
        except KeyError:
            raise HarnessError(f"no parsed graph for version {vid!r}") from None

    deltas: list[tuple[str, Fraction]] = []
    for chain in chains:
        source = graph_for(version_id(chain.sentence_id, chain.source_index))
        scores: list[Fraction] = []
        for k in range(len(chain.versions)):
            vid = version_id(chain.sentence_id, k)
            scores.append(usim(source, graph_for(vid), **kwargs).average)
        for k, edit_index in enumerate(chain.order, start=1):
            edit_type = chain.edits[edit_index].edit_type
            deltas.append((edit_type, scores[k] - scores[k - 1]))
    return deltas


def compute_deltas(
    chains: Sequence[VersionChain],
    parsed_graphs: Mapping[str, SemanticGraph],
    **score_kwargs,
) -> list[TypeDelta]:
    """Average score change per edit type, sorted by delta descending."""
    raw = per_edit_deltas(chains, parsed_graphs, **score_kwargs)
    totals: dict[str, Fraction] = {}
    counts: dict[str, int] = {}
    for edit_type, delta in raw:
        totals[edit_type] = totals.get(edit_type, Fraction(0)) + delta
        counts[edit_type] = counts.get(edit_type, 0) + 1
    report = [
        TypeDelta(t, totals[t] / counts[t], counts[t]) for t in totals
    ]
    report.sort(key=lambda td: (-td.delta_mean, td.edit_type))
    return report
