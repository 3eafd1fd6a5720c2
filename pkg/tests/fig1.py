"""Hand-encoded worked example: learner sentence "He gve an apple for john"
and its correction "He gave John an apple".

Encoding notes (documented for the golden test):
  * Both graphs carry an explicit scene layer: the root has a single H edge
    to a scene node, which parents the participants and the process.  This
    gives 9 edge instances on the learner side and 7 on the correction side,
    matching the worked example's reported edge totals.
  * Node ids are chosen so that the scene node sorts before the root
    ("scene" < "z-root"); the two tie at weight 1 with identical full-sentence
    yields when lifting the leaf alignment, and the id order resolves the tie
    toward the scene.
  * Under this encoding, aligning learner nodes onto correction nodes
    matches 7 of the 9 learner instances (the R edge over unaligned "for"
    and the C edge over "john", whose correction-side edge is labeled A,
    have no match) and all 7 correction instances.
"""
from __future__ import annotations

from helpers_build import graph_from_nested

SOURCE_TOKENS = ["He", "gve", "an", "apple", "for", "john"]
CORRECTION_TOKENS = ["He", "gave", "John", "an", "apple"]


def fig1_source(gid="fig1"):
    nested = (
        "z-root",
        [
            (
                "H",
                (
                    "scene",
                    [
                        ("A", 0),  # He
                        ("P", 1),  # gve
                        ("A", ("np", [("E", 2), ("C", 3)])),  # an apple
                        ("A", ("pp", [("R", 4), ("C", 5)])),  # for john
                    ],
                ),
            )
        ],
    )
    return graph_from_nested(gid, SOURCE_TOKENS, nested)


def fig1_correction(gid="fig1"):
    nested = (
        "z-root",
        [
            (
                "H",
                (
                    "scene",
                    [
                        ("A", 0),  # He
                        ("P", 1),  # gave
                        ("A", 2),  # John
                        ("A", ("np", [("E", 3), ("C", 4)])),  # an apple
                    ],
                ),
            )
        ],
    )
    return graph_from_nested(gid, CORRECTION_TOKENS, nested)
