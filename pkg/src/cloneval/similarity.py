"""Cosine similarity over embeddings and feature summaries."""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import LengthMismatch
from .features import FEATURE_IDS

EMBEDDING_METRIC = "embedding"

# zero-norm policy markers surfaced in the detailed report
FLAG_BOTH_ZERO = "both_zero"
FLAG_ONE_ZERO = "one_zero"


def _cosine_flagged(u: np.ndarray, v: np.ndarray):
    if u.shape[0] != v.shape[0]:
        raise LengthMismatch(f"vector lengths differ: {u.shape[0]} vs {v.shape[0]}")
    peak_u = float(np.max(np.abs(u)))
    peak_v = float(np.max(np.abs(v)))
    if peak_u == 0.0 and peak_v == 0.0:
        return 1.0, FLAG_BOTH_ZERO
    if peak_u == 0.0 or peak_v == 0.0:
        return 0.0, FLAG_ONE_ZERO
    if u is v or np.array_equal(u, v):
        return 1.0, None  # self-similarity is exact at any magnitude
    # peak pre-scaling keeps the dot products in [1, dim]; without it the
    # squared norms of very small or very large vectors drift into
    # subnormal/infinite territory and the ratio loses precision
    un = u / peak_u
    vn = v / peak_v
    denom = math.sqrt(float(np.dot(un, un)) * float(np.dot(vn, vn)))
    value = float(np.dot(un, vn)) / denom
    return min(1.0, max(-1.0, value)), None


def cosine(u, v) -> float:
    """Normalized dot product clamped to [-1, 1].

    Degenerate inputs are mapped deterministically: two zero-norm vectors
    score 1.0, exactly one zero-norm vector scores 0.0.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    value, _ = _cosine_flagged(u, v)
    return value


@dataclass(eq=False)
class PairSide:
    """One side of a pair: feature summaries plus an optional embedding."""

    summaries: dict
    embedding: np.ndarray | None = None


@dataclass(eq=False)
class PairRecord:
    pair_id: str
    emotion: str
    scores: dict = field(default_factory=dict)  # metric id -> value in [-1, 1]
    flags: dict = field(default_factory=dict)  # metric id -> zero-norm marker
    reference_file: str = ""
    generated_file: str = ""


def metric_order(feature_ids, with_embedding: bool) -> list:
    order = [EMBEDDING_METRIC] if with_embedding else []
    order.extend(f for f in FEATURE_IDS if f in feature_ids)
    return order


def score_pair(pair_id: str, emotion: str, ref: PairSide, gen: PairSide) -> PairRecord:
    """Score one reference/generated pair across all enabled metrics."""
    if set(ref.summaries) != set(gen.summaries):
        raise LengthMismatch("reference and generated sides carry different feature sets")
    if (ref.embedding is None) != (gen.embedding is None):
        raise LengthMismatch("embedding present on only one side")

    record = PairRecord(pair_id=pair_id, emotion=emotion)
    if ref.embedding is not None:
        value, flag = _cosine_flagged(
            np.asarray(ref.embedding, dtype=np.float64),
            np.asarray(gen.embedding, dtype=np.float64),
        )
        record.scores[EMBEDDING_METRIC] = value
        if flag:
            record.flags[EMBEDDING_METRIC] = flag
    for fid in metric_order(ref.summaries, with_embedding=False):
        value, flag = _cosine_flagged(ref.summaries[fid].vector, gen.summaries[fid].vector)
        record.scores[fid] = value
        if flag:
            record.flags[fid] = flag
    return record
