"""Community characterization by linked-domain preference.

Each community gets a row of link fractions over qualifying domains, a
scalar score from the first principal component of that matrix, and a
cluster assignment from 1-D hierarchical clustering of the scores.
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Mapping, Sequence

import numpy as np
from scipy.cluster.hierarchy import linkage

from .community import Label
from .errors import (
    DegenerateClusteringError,
    ParameterError,
    UrlParseError,
    ZeroVarianceError,
)
from .ingest import TweetRecord, extract_domain


@dataclass(frozen=True)
class DomainMatrix:
    """Community x domain matrix of link fractions.

    Columns are the domains linked more than ``min_count`` times by at least
    one community; each entry divides by the community's total retained
    links, so rows sum to at most 1.
    """

    communities: tuple[Label, ...]
    domains: tuple[str, ...]
    values: np.ndarray
    retained_totals: tuple[int, ...]
    zero_link_communities: tuple[Label, ...]
    unparseable_urls: int


@dataclass(frozen=True)
class LinkedDomainScore:
    """First-principal-axis loadings over domains and per-community scores."""

    domains: tuple[str, ...]
    loadings: np.ndarray
    scores: Mapping[Label, float]
    sign_anchor: str | None


@dataclass(frozen=True)
class ClusterAssignment:
    """Community -> cluster labels 0..k-1, ordered by ascending centroid."""

    assignment: Mapping[Label, int]
    centroids: tuple[float, ...]
    k: int

    def members(self, cluster: int) -> frozenset[Label]:
        return frozenset(
            label for label, c in self.assignment.items() if c == cluster
        )


def domain_frequency_matrix(
    records_by_community: Mapping[Label, Sequence[TweetRecord]],
    shorteners: frozenset[str] = frozenset(),
    min_count: int = 10,
) -> DomainMatrix:
    """Count linked domains per community into a link-fraction matrix.

    Twitter links, shortener links and unparseable URLs are dropped before
    counting. A domain becomes a column when some single community linked
    it strictly more than ``min_count`` times.
    """
    if min_count < 1:
        raise ParameterError("min_count must be a positive integer")
    communities = sorted(records_by_community, key=str)
    counts: dict[Label, Counter] = {}
    unparseable = 0
    for label in communities:
        counter: Counter = Counter()
        for record in records_by_community[label]:
            for url in record.urls:
                try:
                    domain = extract_domain(url, shorteners)
                except UrlParseError:
                    unparseable += 1
                    continue
                if domain is not None:
                    counter[domain] += 1
        counts[label] = counter
    qualifying = sorted(
        {
            domain
            for counter in counts.values()
            for domain, count in counter.items()
            if count > min_count
        }
    )
    totals = [sum(counts[label].values()) for label in communities]
    values = np.zeros((len(communities), len(qualifying)))
    for i, label in enumerate(communities):
        if totals[i] == 0:
            continue
        for j, domain in enumerate(qualifying):
            values[i, j] = counts[label][domain] / totals[i]
    zero_link = tuple(
        label for label, total in zip(communities, totals) if total == 0
    )
    return DomainMatrix(
        communities=tuple(communities),
        domains=tuple(qualifying),
        values=values,
        retained_totals=tuple(totals),
        zero_link_communities=zero_link,
        unparseable_urls=unparseable,
    )


def first_principal_component(
    matrix: DomainMatrix, anchor_domain: str | None = None
) -> LinkedDomainScore:
    """Project communities onto the leading axis of the centered matrix.

    Columns are mean-centered without variance scaling, so heavily linked
    domains keep their influence. The loading vector is the first right
    singular vector; by default its largest-magnitude entry is made
    positive, or ``anchor_domain``'s loading is forced positive instead.
    """
    if len(matrix.communities) < 2 or len(matrix.domains) < 1:
        raise ParameterError("need at least 2 communities and 1 domain")
    centered = matrix.values - matrix.values.mean(axis=0)
    if not np.any(np.abs(centered) > 1e-15):
        raise ZeroVarianceError("all communities share identical link fractions")
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    loadings = vt[0]
    if anchor_domain is not None:
        if anchor_domain not in matrix.domains:
            raise ParameterError(f"anchor domain {anchor_domain!r} not in matrix")
        anchor_value = loadings[matrix.domains.index(anchor_domain)]
        if anchor_value == 0:
            raise ParameterError(
                f"anchor domain {anchor_domain!r} has zero loading; cannot orient"
            )
        if anchor_value < 0:
            loadings = -loadings
    elif loadings[int(np.argmax(np.abs(loadings)))] < 0:
        loadings = -loadings
    projected = centered @ loadings
    scores = {
        label: float(projected[i]) for i, label in enumerate(matrix.communities)
    }
    return LinkedDomainScore(
        domains=matrix.domains,
        loadings=loadings,
        scores=scores,
        sign_anchor=anchor_domain,
    )


def cluster_scores(
    scores: LinkedDomainScore | Mapping[Label, float],
    k: int = 3,
    method: str = "centroid",
) -> ClusterAssignment:
    """Agglomerate 1-D scores and cut the dendrogram at exactly k clusters.

    ``method`` is "centroid" or "average". Cluster labels are renumbered by
    ascending centroid so cluster 0 always holds the most negative scores.
    """
    mapping = scores.scores if isinstance(scores, LinkedDomainScore) else scores
    if k < 1:
        raise ParameterError("cluster count must be positive")
    labels = sorted(mapping, key=str)
    n = len(labels)
    if n < k:
        raise ParameterError(f"cannot form {k} clusters from {n} communities")
    values = np.array([mapping[label] for label in labels], dtype=float)
    if len(set(values.tolist())) < k:
        raise DegenerateClusteringError(
            f"need at least {k} distinct scores to form {k} clusters"
        )
    if k == n:
        groups = [[i] for i in range(n)]
    elif k == 1:
        groups = [list(range(n))]
    else:
        if method not in ("centroid", "average"):
            raise ParameterError(f"unknown linkage method {method!r}")
        merge_rows = linkage(values.reshape(-1, 1), method=method)
        groups = _cut_to_k(merge_rows, n, k)
    centroids = [float(np.mean(values[group])) for group in groups]
    order = np.argsort(centroids, kind="stable")
    assignment: dict[Label, int] = {}
    for new_label, group_index in enumerate(order):
        for i in groups[group_index]:
            assignment[labels[i]] = new_label
    return ClusterAssignment(
        assignment=assignment,
        centroids=tuple(sorted(centroids)),
        k=k,
    )


def _cut_to_k(merge_rows: np.ndarray, n: int, k: int) -> list[list[int]]:
    """Apply the first n-k agglomerative merges; robust to linkage inversions."""
    clusters: dict[int, list[int]] = {i: [i] for i in range(n)}
    next_id = n
    for row in merge_rows[: n - k]:
        left, right = int(row[0]), int(row[1])
        clusters[next_id] = clusters.pop(left) + clusters.pop(right)
        next_id += 1
    return [sorted(group) for group in clusters.values()]


def write_matrix_csv(matrix: DomainMatrix, target: str | Path | IO[str]) -> None:
    close, handle = _open_for_write(target)
    try:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["community", "retained_links"] + list(matrix.domains))
        for i, label in enumerate(matrix.communities):
            writer.writerow(
                [label, matrix.retained_totals[i]]
                + [repr(float(v)) for v in matrix.values[i]]
            )
    finally:
        if close:
            handle.close()


def read_matrix_csv(source: str | Path) -> DomainMatrix:
    with open(source, newline="", encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    domains = tuple(rows[0][2:])
    communities = []
    totals = []
    values = []
    for row in rows[1:]:
        communities.append(row[0])
        totals.append(int(row[1]))
        values.append([float(v) for v in row[2:]])
    return DomainMatrix(
        communities=tuple(communities),
        domains=domains,
        values=np.array(values) if values else np.zeros((0, len(domains))),
        retained_totals=tuple(totals),
        zero_link_communities=tuple(
            label for label, total in zip(communities, totals) if total == 0
        ),
        unparseable_urls=0,
    )


def write_scores_csv(
    scores: LinkedDomainScore,
    clusters: ClusterAssignment,
    target: str | Path | IO[str],
) -> None:
    close, handle = _open_for_write(target)
    try:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["community", "score", "cluster"])
        for label in sorted(scores.scores, key=str):
            writer.writerow(
                [label, repr(scores.scores[label]), clusters.assignment[label]]
            )
    finally:
        if close:
            handle.close()


def write_loadings_csv(scores: LinkedDomainScore, target: str | Path | IO[str]) -> None:
    close, handle = _open_for_write(target)
    try:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["domain", "loading"])
        order = np.argsort(-scores.loadings, kind="stable")
        for j in order:
            writer.writerow([scores.domains[int(j)], repr(float(scores.loadings[int(j)]))])
    finally:
        if close:
            handle.close()


def _open_for_write(target: str | Path | IO[str]) -> tuple[bool, IO[str]]:
    if hasattr(target, "write"):
        return False, target
    return True, open(target, "w", newline="", encoding="utf-8")
