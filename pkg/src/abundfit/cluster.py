"""Feature matrices, Euclidean distances, single-linkage dendrograms.

Single linkage merges the two clusters with the smallest pairwise leaf
distance; merge heights therefore equal the sorted edge weights of a minimum
spanning tree and can never decrease.  Ties are broken by the
lexicographically smallest pair of cluster representative labels (the
smallest leaf label in each cluster), which makes results independent of
input order up to relabeling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .stats import SummaryRow, alpha_label


@dataclass(frozen=True)
class FeatureMatrix:
    row_labels: tuple[str, ...]
    column_names: tuple[str, ...]
    values: np.ndarray
    scaling: str = "raw"


def summary_feature_columns(rows) -> tuple[str, ...]:
    alphas = tuple(rows[0].renyi)
    return ("Sigma", "Mu", "Mean", "StDev", "lnSk", "lnKE", "FI") + tuple(
        alpha_label(a) for a in alphas
    )


def _summary_cell(row: SummaryRow, column: str) -> float:
    fixed = {
        "Sigma": row.sigma,
        "Mu": row.mu,
        "Mean": row.mean,
        "StDev": row.stdev,
        "lnSk": row.ln_skewness,
        "lnKE": row.ln_kurtosis_excess,
        "FI": row.fisher_information,
    }
    if column in fixed:
        return fixed[column]
    for a, h in row.renyi.items():
        if alpha_label(a) == column:
            return h
    raise KeyError(column)


def feature_matrix(rows, columns=None, scaling: str = "raw") -> FeatureMatrix:
    """Numeric feature matrix from summary rows, optionally z-scored."""
    if len(rows) < 2:
        raise ValueError("feature matrix needs at least 2 rows")
    if scaling not in ("raw", "zscore"):
        raise ValueError(f"unknown scaling {scaling!r}")
    cols = tuple(columns) if columns is not None else summary_feature_columns(rows)
    try:
        values = np.array([[_summary_cell(r, c) for c in cols] for r in rows], dtype=float)
    except KeyError as exc:
        raise ValueError(f"unknown summary column {exc.args[0]!r}") from None
    if scaling == "zscore":
        sd = values.std(axis=0, ddof=1)
        flat = np.nonzero(sd == 0.0)[0]
        if flat.size:
            raise ValueError(f"cannot z-score constant column {cols[flat[0]]!r}")
        values = (values - values.mean(axis=0)) / sd
    return FeatureMatrix(tuple(r.label for r in rows), cols, values, scaling)


def encode_taxonomy(entries):
    """Integer-code a categorical taxonomy table, one column per rank.

    ``entries`` is an ordered list of (species, [(rank, category), ...]);
    every species must list the same ranks in the same order.  Category
    codes are assigned 0, 1, 2, ... in first-appearance order.  Returns the
    feature matrix and the codebook {rank: {category: code}}.
    """
    if len(entries) < 1:
        raise ValueError("empty taxonomy table")
    ranks = tuple(rank for rank, _ in entries[0][1])
    codebook: dict[str, dict[str, int]] = {r: {} for r in ranks}
    rows = []
    labels = []
    for species, pairs in entries:
        if tuple(rank for rank, _ in pairs) != ranks:
            raise ValueError(
                f"species {species!r} lists ranks {[r for r, _ in pairs]}, expected {list(ranks)}"
            )
        row = []
        for rank, category in pairs:
            codes = codebook[rank]
            if category not in codes:
                codes[category] = len(codes)
            row.append(float(codes[category]))
        rows.append(row)
        labels.append(species)
    if len(set(labels)) != len(labels):
        raise ValueError("duplicate species in taxonomy table")
    matrix = FeatureMatrix(tuple(labels), ranks, np.array(rows, dtype=float), "raw")
    return matrix, codebook


def parse_taxonomy(text: str):
    """Parse a ``species,rank,category`` CSV into encode_taxonomy entries."""
    entries: dict[str, list[tuple[str, str]]] = {}
    seen_header = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not seen_header:
            if line != "species,rank,category":
                raise ValueError(
                    f"taxonomy line {lineno}: expected header 'species,rank,category'"
                )
            seen_header = True
            continue
        fields = line.split(",")
        if len(fields) != 3:
            raise ValueError(f"taxonomy line {lineno}: expected 3 fields")
        species, rank, category = (f.strip() for f in fields)
        entries.setdefault(species, []).append((rank, category))
    if not seen_header:
        raise ValueError("taxonomy file: missing header 'species,rank,category'")
    return list(entries.items())


def distance_matrix(matrix) -> np.ndarray:
    """Pairwise Euclidean distances between rows."""
    values = matrix.values if isinstance(matrix, FeatureMatrix) else np.asarray(matrix, float)
    if values.shape[0] < 2:
        raise ValueError("distance matrix needs at least 2 rows")
    diff = values[:, None, :] - values[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=2))


@dataclass(frozen=True)
class Dendrogram:
    """Agglomerative merge list: leaves are nodes 0..N-1, merge i forms node N+i."""

    leaf_labels: tuple[str, ...]
    merges: tuple[tuple[int, int, float], ...]

    @property
    def n_leaves(self) -> int:
        return len(self.leaf_labels)


def single_linkage(dist, labels) -> Dendrogram:
    d = np.asarray(dist, dtype=float)
    labels = tuple(labels)
    n = len(labels)
    if d.shape != (n, n):
        raise ValueError(f"distance matrix shape {d.shape} does not match {n} labels")
    if n < 2:
        raise ValueError("clustering needs at least 2 items")
    # active cluster id -> (representative label, node id)
    reps = {i: labels[i] for i in range(n)}
    current = {i: i for i in range(n)}  # cluster key -> node id
    dists = {(i, j): float(d[i, j]) for i in range(n) for j in range(i + 1, n)}
    merges = []
    next_node = n
    while len(current) > 1:
        best_pair, best_h, best_key = None, math.inf, None
        for (i, j), h in dists.items():
            pair_key = tuple(sorted((reps[i], reps[j])))
            if h < best_h or (h == best_h and pair_key < best_key):
                best_pair, best_h, best_key = (i, j), h, pair_key
        i, j = best_pair
        left, right = (i, j) if reps[i] <= reps[j] else (j, i)
        merges.append((current[left], current[right], best_h))
        # Lance-Williams update for the minimum linkage.
        new_key = min(i, j)
        other_key = max(i, j)
        for k in list(current):
            if k in (i, j):
                continue
            a = dists.pop((min(i, k), max(i, k)))
            b = dists.pop((min(j, k), max(j, k)))
            dists[(min(new_key, k), max(new_key, k))] = min(a, b)
        dists.pop((i, j))
        reps[new_key] = min(reps[i], reps[j])
        current.pop(other_key)
        current[new_key] = next_node
        next_node += 1
    return Dendrogram(labels, tuple(merges))


def _node_heights(dgm: Dendrogram) -> list[float]:
    heights = [0.0] * dgm.n_leaves + [h for _, _, h in dgm.merges]
    return heights


def to_newick(dgm: Dendrogram) -> str:
    """Ultrametric Newick rendering: a node at merge height h sits at depth h/2."""
    heights = _node_heights(dgm)
    n = dgm.n_leaves

    def render(node: int) -> str:
        if node < n:
            return dgm.leaf_labels[node]
        left, right, h = dgm.merges[node - n]
        parts = []
        for child in (left, right):
            blen = (heights[node] - heights[child]) / 2.0
            parts.append(f"{render(child)}:{blen:.10g}")
        return "(" + ",".join(parts) + ")"

    root = n + len(dgm.merges) - 1
    return render(root) + ";"


def to_dot(dgm: Dendrogram) -> str:
    n = dgm.n_leaves
    lines = ["digraph dendrogram {"]
    for i, label in enumerate(dgm.leaf_labels):
        lines.append(f'  n{i} [label="{label}", shape=box];')
    for m, (left, right, h) in enumerate(dgm.merges):
        node = n + m
        lines.append(f'  n{node} [label="h={h:.6g}"];')
    for m, (left, right, h) in enumerate(dgm.merges):
        node = n + m
        lines.append(f"  n{node} -> n{left};")
        lines.append(f"  n{node} -> n{right};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def format_merge_table(dgm: Dendrogram) -> str:
    lines = [f"# leaf {i}: {label}" for i, label in enumerate(dgm.leaf_labels)]
    lines.append("left\tright\theight")
    for left, right, h in dgm.merges:
        lines.append(f"{left}\t{right}\t{h:.17g}")
    return "\n".join(lines) + "\n"


def parse_merge_table(text: str) -> Dendrogram:
    labels = []
    merges = []
    for line in text.splitlines():
        if line.startswith("# leaf "):
            labels.append(line.split(": ", 1)[1])
        elif not line or line.startswith("#") or line.startswith("left\t"):
            continue
        else:
            left, right, h = line.split("\t")
            merges.append((int(left), int(right), float(h)))
    return Dendrogram(tuple(labels), tuple(merges))


def format_codebook(codebook) -> str:
    lines = ["rank\tcategory\tcode"]
    for rank, codes in codebook.items():
        for category, code in codes.items():
            lines.append(f"{rank}\t{category}\t{code}")
    return "\n".join(lines) + "\n"
