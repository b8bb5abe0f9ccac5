"""Confirm/divide annotation semantics.

An annotator repeatedly marks a checked subset of the remaining members
of an initial cluster. Each submission peels the checked set off as a
confirmed subcluster; the process ends when everything is confirmed or
the annotator declares the remainder mutually dissimilar. A terminal
trace induces edge labels: +1 within a subcluster, -1 across
subclusters, covering every within-cluster pair exactly once. Pairs
crossing initial clusters are never labeled here.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable

from .simgraph import NEGATIVE, POSITIVE, LabeledEdgeSet, canonical_edge


@dataclass(frozen=True)
class AnnotationRound:
    round_index: int
    checked: frozenset[str]


@dataclass(frozen=True)
class ClusterAnnotation:
    """State machine for annotating one initial cluster."""

    cluster_id: str
    members: tuple[str, ...]
    rounds: tuple[AnnotationRound, ...] = ()
    subclusters: tuple[frozenset[str], ...] = ()
    terminal: bool = False

    def __post_init__(self):
        if len(set(self.members)) != len(self.members):
            raise ValueError("duplicate members in cluster")
        if not self.members:
            raise ValueError("empty cluster")

    @property
    def remaining(self) -> frozenset[str]:
        peeled = frozenset().union(*self.subclusters) if self.subclusters else frozenset()
        return frozenset(self.members) - peeled


def apply_round(state: ClusterAnnotation, checked: Iterable[str]) -> ClusterAnnotation:
    """Peel the checked set off as a confirmed subcluster.

    Terminal when checked equals the remaining set (confirm all), when
    checked is empty (the remaining are all mutually dissimilar, each a
    singleton), or when at most one member is left afterwards.
    """
    if state.terminal:
        raise ValueError(f"cluster {state.cluster_id} already terminal")
    checked = frozenset(checked)
    remaining = state.remaining
    foreign = checked - remaining
    if foreign:
        raise ValueError(f"checked ids not in remaining set: {sorted(foreign)}")
    rounds = state.rounds + (AnnotationRound(len(state.rounds), checked),)
    if not checked:
        new_subs = state.subclusters + tuple(frozenset({m}) for m in sorted(remaining))
        return replace(state, rounds=rounds, subclusters=new_subs, terminal=True)
    new_subs = state.subclusters + (checked,)
    left = remaining - checked
    if len(left) <= 1:
        if left:
            new_subs = new_subs + (frozenset(left),)
        return replace(state, rounds=rounds, subclusters=new_subs, terminal=True)
    return replace(state, rounds=rounds, subclusters=new_subs, terminal=False)


def derive_edges(state: ClusterAnnotation, owner: str = "") -> LabeledEdgeSet:
    """Edge labels for a terminal trace: +1 within a confirmed subcluster,
    -1 across subclusters of the same initial cluster."""
    if not state.terminal:
        raise ValueError(f"cluster {state.cluster_id} is not terminal")
    sub_of = {m: i for i, sub in enumerate(state.subclusters) for m in sub}
    es = LabeledEdgeSet(owner=owner)
    members = sorted(state.members)
    for i in range(len(members)):
        for j in range(i + 1, len(members)):
            a, b = members[i], members[j]
            label = POSITIVE if sub_of[a] == sub_of[b] else NEGATIVE
            es.entries[canonical_edge(a, b)] = label
    return es
