"""End-to-end pairwise attribution: permute, score, fit, report.

The main loop generates weak perturbations of the decomposed sample, scores
each reassembled sample with the black-box model, collects the adjacency
feature rows, fits the sparse linear surrogate, and scatters the fitted
weights into the symmetric pairwise matrix.  Two views are exposed: the
full relational matrix and its per-element row-mean vector.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator

from .decompose import (
    IMAGE,
    TEXT,
    ImageBuffer,
    SampleDecomposition,
    partition_image,
    reassemble,
    tokenize_text,
)
from .errors import InsufficientPermutations, KOutOfRange
from .models import Model, ScoreInput
from .perturb import (
    WITH_REPLACEMENT,
    build_adjacency,
    expand_lower_triangle,
    lower_triangle,
    weak_permute,
)
from .surrogate import AuxiliaryDataset, SparseLinearSurrogate

DEFAULT_PERMUTATIONS = {IMAGE: 5000, TEXT: 2000}


@dataclass(frozen=True)
class RelationalExplanation:
    """Symmetric pairwise weight matrix for one input."""

    n: int
    matrix: np.ndarray  # (n, n), zero diagonal
    target_class: int
    permutations_used: int
    surrogate: SparseLinearSurrogate
    modality: str
    element_labels: list
    original_score: float
    settings: dict


@dataclass(frozen=True)
class LocalExplanation:
    """Per-element importance: off-diagonal row means of the matrix."""

    n: int
    values: np.ndarray


def resolve_permutations(m, modality: str) -> int:
    """Map m='auto' to the per-modality default sample count."""
    if m == "auto" or m is None:
        return DEFAULT_PERMUTATIONS[modality]
    return int(m)


class RelationalLocalExplainer(BaseEstimator):
    """Configurable explainer; call explain() per (model, input) pair.

    Parameters follow the permutation loop and the surrogate fit: the number
    of permutations (or "auto" for the per-modality default), RNG seed,
    permute mode, regularization, and scoring batch size.
    """

    def __init__(self, permutations="auto", seed=0,
                 permute_mode=WITH_REPLACEMENT, lam=0.01, penalty="l1",
                 tol=1e-8, max_iter=1000, batch_size=64):
        self.permutations = permutations
        self.seed = seed
        self.permute_mode = permute_mode
        self.lam = lam
        self.penalty = penalty
        self.tol = tol
        self.max_iter = max_iter
        self.batch_size = batch_size

    def explain(self, model: Model, decomp: SampleDecomposition,
                target_class: int = 0) -> RelationalExplanation:
        m = resolve_permutations(self.permutations, decomp.modality)
        if m < 1:
            raise InsufficientPermutations(f"need m >= 1, got {m}")
        n = decomp.n
        rng = np.random.default_rng(self.seed)

        identity = tuple(range(n))
        original_score = model.score_batch(
            [ScoreInput(decomp.modality, reassemble(decomp, identity),
                        identity, decomp.layout)],
            target_class,
        )[0]

        d = n * (n - 1) // 2
        features = np.empty((m, d), dtype=np.float64)
        targets = np.empty(m, dtype=np.float64)
        batch_size = max(1, int(self.batch_size))
        done = 0
        while done < m:
            count = min(batch_size, m - done)
            batch_inputs = []
            for i in range(count):
                perm = weak_permute(decomp, rng, mode=self.permute_mode,
                                    draw_index=done + i)
                features[done + i] = lower_triangle(
                    build_adjacency(decomp, perm)
                )
                batch_inputs.append(
                    ScoreInput(decomp.modality, reassemble(decomp, perm.placement),
                               perm.placement, decomp.layout)
                )
            targets[done:done + count] = model.score_batch(batch_inputs,
                                                           target_class)
            done += count

        surrogate = SparseLinearSurrogate(
            lam=self.lam, penalty=self.penalty, tol=self.tol,
            max_iter=self.max_iter,
        ).fit_dataset(AuxiliaryDataset(features, targets))

        matrix = expand_lower_triangle(surrogate.coef_, n)
        return RelationalExplanation(
            n=n,
            matrix=matrix,
            target_class=int(target_class),
            permutations_used=m,
            surrogate=surrogate,
            modality=decomp.modality,
            element_labels=decomp.element_labels(),
            original_score=float(original_score),
            settings={
                "m": m,
                "seed": self.seed,
                "lambda": self.lam,
                "penalty": self.penalty,
                "permute_mode": self.permute_mode,
            },
        )

    def explain_image(self, model: Model, image: ImageBuffer, grid_side: int,
                      target_class: int = 0) -> RelationalExplanation:
        return self.explain(model, partition_image(image, grid_side),
                            target_class)

    def explain_text(self, model: Model, sentence: str,
                     target_class: int = 0) -> RelationalExplanation:
        return self.explain(model, tokenize_text(sentence), target_class)


def to_local(rel: RelationalExplanation) -> LocalExplanation:
    """Per-element vector: mean of each row excluding the zero diagonal."""
    n = rel.n
    values = rel.matrix.sum(axis=1) / (n - 1)
    return LocalExplanation(n=n, values=values)


def top_pairs(rel: RelationalExplanation, k: int):
    """The k strongest pairs as (u, v, weight), u > v, by |weight| desc.

    Ties break lexicographically on (u, v).
    """
    n = rel.n
    n_pairs = n * (n - 1) // 2
    if not 1 <= k <= n_pairs:
        raise KOutOfRange(f"k must be in [1, {n_pairs}], got {k}")
    pairs = [
        (u, v, float(rel.matrix[u, v]))
        for u in range(1, n)
        for v in range(u)
    ]
    pairs.sort(key=lambda t: (-abs(t[2]), t[0], t[1]))
    return pairs[:k]


def explanation_to_json(rel: RelationalExplanation) -> str:
    """Serialize to the stable JSON document shape (deterministic bytes)."""
    local = to_local(rel)
    doc = {
        "modality": rel.modality,
        "n": rel.n,
        "elements": rel.element_labels,
        "target_class": rel.target_class,
        "original_score": rel.original_score,
        "matrix": [[float(x) for x in row] for row in rel.matrix],
        "local": [float(x) for x in local.values],
        "settings": rel.settings,
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def explanation_from_json(text: str) -> RelationalExplanation:
    """Rebuild an explanation from its JSON document (no surrogate state)."""
    doc = json.loads(text)
    return RelationalExplanation(
        n=doc["n"],
        matrix=np.asarray(doc["matrix"], dtype=np.float64),
        target_class=doc["target_class"],
        permutations_used=doc["settings"]["m"],
        surrogate=None,
        modality=doc["modality"],
        element_labels=doc["elements"],
        original_score=doc["original_score"],
        settings=doc["settings"],
    )
