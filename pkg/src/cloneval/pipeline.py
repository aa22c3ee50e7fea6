"""End-to-end evaluation: pair discovery, scoring, aggregation, reports.

A run walks two flat directories of WAV files matched by stem, scores every
pair on the enabled metrics, and writes two files: ``details.csv`` with one
row per pair and ``summary.json`` with overall and per-emotion means. Scores
are quantized to six decimals at the reporting boundary so the two files
stay mutually consistent and byte-reproducible.
"""

import csv
import json
import random
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .audio_io import PIPELINE_RATE, decode_wav, downmix_mono, resample
from .embeddings import embed
from .errors import EmptyInput, EvaluationFailed, NoPairs, ParseError, TooFewSamples
from .features import FEATURE_IDS, FrameParams, extract_summaries
from .similarity import PairSide, metric_order, score_pair

EMOTIONS = ("anger", "disgust", "fear", "happiness", "neutral", "sadness")
UNKNOWN = "unknown"

# Full words plus CREMA-D style three-letter codes; tokens are lowercased
# before lookup. Override with a JSON file via CLONEVAL_ALIAS_TABLE.
DEFAULT_ALIASES = {
    "anger": "anger",
    "angry": "anger",
    "ang": "anger",
    "disgust": "disgust",
    "disgusted": "disgust",
    "dis": "disgust",
    "fear": "fear",
    "fearful": "fear",
    "fea": "fear",
    "happiness": "happiness",
    "happy": "happiness",
    "hap": "happiness",
    "neutral": "neutral",
    "neu": "neutral",
    "sadness": "sadness",
    "sad": "sadness",
}

def load_alias_table(path) -> dict:
    """Read a token -> canonical-emotion JSON table."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read alias table {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ParseError("alias table must be a JSON object")
    table = {}
    for token, label in raw.items():
        if label not in EMOTIONS:
            raise ParseError(f"alias {token!r} maps to unknown emotion {label!r}")
        table[str(token).lower()] = label
    return table


def parse_emotion(stem: str, alias_table: dict | None = None) -> str:
    """First stem token (split on _, -, .) found in the alias table wins."""
    table = DEFAULT_ALIASES if alias_table is None else alias_table
    for token in re.split(r"[_\-.]", stem):
        if token.lower() in table:
            return table[token.lower()]
    return UNKNOWN


def discover_pairs(ref_dir, gen_dir):
    """Match WAV files across the two directories by stem (case-sensitive).

    Non-recursive. Returns (pairs, unmatched_ref, unmatched_gen) where pairs
    is a lexicographically sorted list of (stem, ref_path, gen_path).
    """
    def wavs(directory):
        return {
            p.stem: p
            for p in Path(directory).iterdir()
            if p.is_file() and p.suffix.lower() == ".wav"
        }

    ref = wavs(ref_dir)
    gen = wavs(gen_dir)
    common = sorted(set(ref) & set(gen))
    if not common:
        raise NoPairs(f"no matching stems between {ref_dir} and {gen_dir}")
    pairs = [(stem, ref[stem], gen[stem]) for stem in common]
    unmatched_ref = sorted(ref[p].name for p in set(ref) - set(gen))
    unmatched_gen = sorted(gen[p].name for p in set(gen) - set(ref))
    return pairs, unmatched_ref, unmatched_gen


@dataclass
class EvalConfig:
    frame_params: FrameParams = field(default_factory=FrameParams)
    features: tuple = FEATURE_IDS
    backend_ref: object | None = None  # None disables the embedding metric
    backend_gen: object | None = None
    emotions: str = "auto"  # "auto" applies the alias table, "off" forces unknown
    alias_table: dict | None = None
    workers: int = 1

    def fingerprint(self) -> dict:
        backend = self.backend_ref.describe() if self.backend_ref else "disabled"
        dim = self.backend_ref.dimension if self.backend_ref else None
        return {
            "version": __version__,
            "sample_rate": PIPELINE_RATE,
            "n_fft": self.frame_params.n_fft,
            "hop": self.frame_params.hop,
            "window": "hann",
            "metrics": metric_order(self.features, self.backend_ref is not None),
            "embedding_backend": backend,
            "embedding_dim": dim,
            "emotions": self.emotions,
        }


def _load_mono_16k(path):
    buf = decode_wav(Path(path).read_bytes())
    return resample(downmix_mono(buf), PIPELINE_RATE)


def _evaluate_one(stem, ref_path, gen_path, config, dump):
    ref_buf = _load_mono_16k(ref_path)
    gen_buf = _load_mono_16k(gen_path)
    ref_side = PairSide(extract_summaries(ref_buf, config.frame_params, config.features))
    gen_side = PairSide(extract_summaries(gen_buf, config.frame_params, config.features))
    if config.backend_ref is not None:
        ref_side.embedding = embed(config.backend_ref, ref_buf, key=stem).vector
        gen_side.embedding = embed(config.backend_gen, gen_buf, key=stem).vector
    if dump is not None:
        for side_name, side in (("reference", ref_side), ("generated", gen_side)):
            for summary in side.summaries.values():
                dump(stem, side_name, summary)

    emotion = parse_emotion(stem, config.alias_table) if config.emotions == "auto" else UNKNOWN
    record = score_pair(stem, emotion, ref_side, gen_side)
    record.reference_file = str(ref_path)
    record.generated_file = str(gen_path)
    return record


def evaluate_corpus(pairs, config: EvalConfig, dump=None):
    """Score every pair; failures are isolated and reported, not fatal.

    Returns (records, errors) with records sorted by pair_id, so the result
    does not depend on the worker count. Raises EvaluationFailed only when
    no pair survives.
    """
    records = []
    errors = {}

    def run(pair):
        stem, ref_path, gen_path = pair
        try:
            return stem, _evaluate_one(stem, ref_path, gen_path, config, dump), None
        except Exception as exc:
            return stem, None, f"{type(exc).__name__}: {exc}"

    if config.workers <= 1:
        outcomes = [run(p) for p in pairs]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(run, pairs))

    for stem, record, error in outcomes:
        if error is None:
            records.append(record)
        else:
            errors[stem] = error
    if pairs and not records:
        raise EvaluationFailed(f"all {len(pairs)} pairs failed; first error: "
                               f"{errors[sorted(errors)[0]]}")
    records.sort(key=lambda r: r.pair_id)
    return records, errors


@dataclass(eq=False)
class SummaryReport:
    config: dict
    overall: dict
    by_emotion: dict
    emotion_average: dict | None
    counts: dict

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "overall": self.overall,
            "by_emotion": self.by_emotion,
            "emotion_average": self.emotion_average,
            "counts": self.counts,
        }


def _quantize(value: float) -> float:
    # report precision; aggregation uses the same rounding as details.csv
    # so means recomputed from the CSV match summary.json exactly
    return round(value, 6)


def aggregate(records, config: dict | None = None) -> SummaryReport:
    """Arithmetic means per metric, overall and per emotion label.

    The overall mean runs over all records regardless of label; the
    emotion_average row is the unweighted mean of the per-emotion means over
    the known labels (absent when every record is unlabeled).
    """
    if not records:
        raise EmptyInput("no records to aggregate")
    metrics = list(records[0].scores)

    def means(group):
        return {
            m: float(np.mean([_quantize(r.scores[m]) for r in group])) for m in metrics
        }

    overall = means(records)
    labels = sorted({r.emotion for r in records})
    by_emotion = {label: means([r for r in records if r.emotion == label]) for label in labels}
    counts = {label: sum(1 for r in records if r.emotion == label) for label in labels}

    known = [label for label in labels if label != UNKNOWN]
    emotion_average = None
    if known:
        emotion_average = {
            m: float(np.mean([by_emotion[label][m] for label in known])) for m in metrics
        }
    return SummaryReport(
        config=config or {},
        overall=overall,
        by_emotion=by_emotion,
        emotion_average=emotion_average,
        counts=counts,
    )


def write_reports(records, summary: SummaryReport, out_dir, errors=None):
    """Write details.csv and summary.json; returns their paths.

    Both files are UTF-8 with LF line endings, scores fixed to six decimals,
    rows sorted by pair_id, so identical runs produce identical bytes.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    metrics = list(summary.overall)

    details_path = out_dir / "details.csv"
    with open(details_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["pair_id", "reference_file", "generated_file", "emotion", *metrics, "flags"])
        for record in sorted(records, key=lambda r: r.pair_id):
            flags = ";".join(
                f"{m}={record.flags[m]}" for m in metrics if m in record.flags
            )
            writer.writerow(
                [record.pair_id, record.reference_file, record.generated_file, record.emotion]
                + [f"{_quantize(record.scores[m]):.6f}" for m in metrics]
                + [flags]
            )

    summary_path = out_dir / "summary.json"
    payload = summary.to_dict()
    payload["errors"] = dict(sorted((errors or {}).items()))
    with open(summary_path, "w", encoding="utf-8", newline="") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return details_path, summary_path


@dataclass(frozen=True)
class PromptAssignment:
    sample_id: str
    assigned_text: str
    source_sample_id: str


def make_prompt_assignments(manifest, seed: int):
    """Assign each sample a text drawn uniformly from the other samples.

    The draw is seeded and independent per sample; a sample never receives
    its own text.
    """
    if len(manifest) < 2:
        raise TooFewSamples(f"need at least 2 manifest entries, got {len(manifest)}")
    for sample_id, text in manifest:
        if not text:
            raise ParseError(f"manifest entry {sample_id!r} has empty text")

    rng = random.Random(seed)
    assignments = []
    for i, (sample_id, _) in enumerate(manifest):
        j = rng.randrange(len(manifest) - 1)
        if j >= i:
            j += 1
        source_id, source_text = manifest[j]
        assignments.append(PromptAssignment(sample_id, source_text, source_id))
    return assignments
