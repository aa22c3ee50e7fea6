"""Speaker-embedding backends.

Two modes: run a speaker-verification model exported to ONNX, or read
precomputed embeddings from a JSON manifest. The precomputed mode makes a
full evaluation runnable with zero neural inference, which keeps CI and
third-party verification reproducible.

The ONNX graph contract is one float waveform input [1 x samples] at 16 kHz
and one float vector output [1 x D]. The graph shape is validated directly
from the file's protobuf encoding, so schema errors are reported even when
onnxruntime (an optional dependency) is not installed; the runtime is only
required to actually run inference.
"""

import json
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .audio_io import AudioBuffer, PIPELINE_RATE
from .errors import (
    DimensionMismatch,
    MissingEmbedding,
    ModelLoadError,
    ParseError,
    RateError,
    SchemaError,
)


@dataclass(eq=False)
class SpeakerEmbedding:
    vector: np.ndarray

    @property
    def dimension(self) -> int:
        return self.vector.shape[0]


@dataclass(frozen=True)
class BackendSpec:
    model_path: str | None = None
    precomputed_path: str | None = None
    expected_dim: int | None = None

    def __post_init__(self):
        if (self.model_path is None) == (self.precomputed_path is None):
            raise ValueError("exactly one of model_path / precomputed_path must be set")


def read_precomputed(path) -> dict:
    """Load a stem -> vector JSON manifest into SpeakerEmbedding objects."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read embedding manifest {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ParseError("embedding manifest must be a JSON object")

    store = {}
    dim = None
    for stem, values in raw.items():
        if not isinstance(values, list) or not values or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in values
        ):
            raise ParseError(f"entry {stem!r} is not a non-empty number array")
        vector = np.asarray(values, dtype=np.float64)
        if not np.all(np.isfinite(vector)):
            raise ParseError(f"entry {stem!r} contains non-finite values")
        if not np.any(vector):
            raise ParseError(f"entry {stem!r} has zero norm")
        if dim is None:
            dim = vector.shape[0]
        elif vector.shape[0] != dim:
            raise DimensionMismatch(
                f"entry {stem!r} has dimension {vector.shape[0]}, expected {dim}"
            )
        store[stem] = SpeakerEmbedding(vector)
    return store


# --- minimal protobuf wire-format walk over an ONNX ModelProto ------------
#
# Only what schema validation needs: graph (ModelProto field 7) with its
# input (11), output (12), and initializer (5) names. Initializers listed as
# graph inputs do not count as real inputs.

def _read_varint(buf: bytes, pos: int):
    result = 0
    shift = 0
    while True:
        if pos >= len(buf):
            raise ValueError("truncated varint")
        byte = buf[pos]
        pos += 1
        result |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return result, pos
        shift += 7
        if shift > 63:
            raise ValueError("varint too long")


def _iter_proto_fields(buf: bytes):
    pos = 0
    while pos < len(buf):
        key, pos = _read_varint(buf, pos)
        field_no, wire_type = key >> 3, key & 0x07
        if wire_type == 0:  # varint
            value, pos = _read_varint(buf, pos)
        elif wire_type == 1:  # fixed64
            value, pos = buf[pos : pos + 8], pos + 8
        elif wire_type == 2:  # length-delimited
            length, pos = _read_varint(buf, pos)
            if pos + length > len(buf):
                raise ValueError("truncated length-delimited field")
            value, pos = buf[pos : pos + length], pos + length
        elif wire_type == 5:  # fixed32
            value, pos = buf[pos : pos + 4], pos + 4
        else:
            raise ValueError(f"unsupported wire type {wire_type}")
        yield field_no, wire_type, value


def _proto_name(message: bytes, name_field: int) -> str:
    for field_no, wire_type, value in _iter_proto_fields(message):
        if field_no == name_field and wire_type == 2:
            return value.decode("utf-8", errors="replace")
    return ""


def inspect_model_graph(data: bytes):
    """Return (input_names, output_names) of an ONNX model's graph."""
    graph = None
    try:
        for field_no, wire_type, value in _iter_proto_fields(data):
            if field_no == 7 and wire_type == 2:
                graph = value
                break
        if graph is None:
            raise ValueError("no graph found")
        inputs, outputs, initializers = [], [], set()
        for field_no, wire_type, value in _iter_proto_fields(graph):
            if wire_type != 2:
                continue
            if field_no == 11:
                inputs.append(_proto_name(value, 1))
            elif field_no == 12:
                outputs.append(_proto_name(value, 1))
            elif field_no == 5:
                initializers.add(_proto_name(value, 8))
    except ValueError as exc:
        raise ModelLoadError(f"not a readable model file: {exc}") from exc
    return [n for n in inputs if n not in initializers], outputs


class PrecomputedBackend:
    """Serves embeddings from a JSON manifest, keyed by file stem."""

    def __init__(self, store: dict, dimension: int | None):
        self._store = store
        self.dimension = dimension

    def _embed(self, buf: AudioBuffer, key: str | None) -> SpeakerEmbedding:
        if key is None:
            raise ValueError("precomputed backend needs the file stem as lookup key")
        try:
            return self._store[key]
        except KeyError:
            raise MissingEmbedding(f"no precomputed embedding for {key!r}") from None

    def describe(self) -> str:
        return "precomputed"


class OnnxModelBackend:
    """Runs a 1-in/1-out ONNX model over 16 kHz waveforms."""

    def __init__(self, path: str, expected_dim: int | None):
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            raise ModelLoadError(f"cannot read model file {path}: {exc}") from exc
        inputs, outputs = inspect_model_graph(data)
        if len(inputs) != 1 or len(outputs) != 1:
            raise SchemaError(
                f"model graph must have exactly one input and one output, "
                f"found {len(inputs)} inputs and {len(outputs)} outputs"
            )
        self._input_name = inputs[0]
        self._output_name = outputs[0]
        self._path = str(path)
        self.dimension = expected_dim
        self._lock = threading.Lock()  # session calls are serialized
        try:
            import onnxruntime
        except ImportError as exc:
            raise ModelLoadError(
                "onnxruntime is required to run model-mode embeddings; install the "
                "'onnx' extra or use precomputed embeddings"
            ) from exc
        try:
            self._session = onnxruntime.InferenceSession(
                data, providers=["CPUExecutionProvider"]
            )
        except Exception as exc:
            raise ModelLoadError(f"cannot load model {path}: {exc}") from exc

    def _embed(self, buf: AudioBuffer, key: str | None) -> SpeakerEmbedding:
        waveform = np.asarray(buf.samples, dtype=np.float32)[None, :]
        with self._lock:
            (raw,) = self._session.run([self._output_name], {self._input_name: waveform})
            vector = np.asarray(raw, dtype=np.float64).reshape(-1)
            if self.dimension is None:
                self.dimension = vector.shape[0]
            elif vector.shape[0] != self.dimension:
                raise DimensionMismatch(
                    f"model produced dimension {vector.shape[0]}, expected {self.dimension}"
                )
        return SpeakerEmbedding(vector)

    def describe(self) -> str:
        return f"model:{Path(self._path).name}"


def load_backend(spec: BackendSpec):
    if spec.precomputed_path is not None:
        store = read_precomputed(spec.precomputed_path)
        dims = {e.dimension for e in store.values()}
        dim = dims.pop() if dims else None
        if spec.expected_dim is not None:
            if dim is None:
                dim = spec.expected_dim
            elif dim != spec.expected_dim:
                raise ModelLoadError(
                    f"manifest dimension {dim} does not match expected {spec.expected_dim}"
                )
        return PrecomputedBackend(store, dim)
    return OnnxModelBackend(spec.model_path, spec.expected_dim)


def embed(backend, buf: AudioBuffer, key: str | None = None) -> SpeakerEmbedding:
    """Embed a mono 16 kHz buffer; precomputed backends look up by key."""
    if buf.sample_rate != PIPELINE_RATE:
        raise RateError(f"embedding input must be {PIPELINE_RATE} Hz, got {buf.sample_rate}")
    if buf.channel_count != 1:
        raise RateError("embedding input must be mono")
    return backend._embed(buf, key)
