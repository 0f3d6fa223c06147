"""Text state files.

A file is a sequence of ``key: value`` lines; ``#`` starts a comment.
``kind`` is a bare word (ket, density, ensemble, preparation); every other
value is JSON and may continue over several lines until its brackets close.
Complex numbers are flat ``re, im`` pairs in row-major order.

    kind: ensemble
    dims: [2]
    weights: [0.5, 0.5]
    data: [1, 0, 0, 0,
           0.7071067811865476, 0, 0.7071067811865476, 0]

Layouts of ``data`` by kind:

* ket -- prod(dims) amplitudes
* density -- prod(dims)^2 entries
* ensemble -- one ket of prod(dims) amplitudes per weight
* preparation -- dims = [dS, dE]; per entry gamma, alpha (dS), eta (dE)
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvariantViolation, MixturaError, StateFileSyntaxError
from .scenarios import PreparationModel
from .states import DensityOperator, Ensemble, Ket

KINDS = ("ket", "density", "ensemble", "preparation")
_RESERVED = ("kind", "dims", "data", "weights", "labels")


@dataclass(frozen=True)
class StateFile:
    kind: str
    dims: tuple[int, ...]
    data: tuple[float, ...]
    weights: tuple[float, ...] | None = None
    labels: tuple[str, ...] | None = None
    metadata: dict[str, str] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return math.prod(self.dims)

    def complex_data(self) -> np.ndarray:
        d = np.asarray(self.data, dtype=float)
        return d[0::2] + 1j * d[1::2]

    def to_object(self):
        """Build the Ket / DensityOperator / Ensemble / PreparationModel."""
        z = self.complex_data()
        n = self.size
        if self.kind == "ket":
            return Ket(z)
        if self.kind == "density":
            return DensityOperator(z.reshape(n, n))
        if self.kind == "ensemble":
            kets = z.reshape(len(self.weights), n)
            return Ensemble(zip(self.weights, kets))
        ds, de = self.dims
        rows = z.reshape(-1, 1 + ds + de)
        return PreparationModel((r[0], r[1:1 + ds], r[1 + ds:]) for r in rows)


def _fail(msg, line=0, column=0):
    raise StateFileSyntaxError(msg, line, column)


def _split_entries(text: str):
    """Yield (key, raw value, line, column of value) for each entry."""
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        raw = lines[i]
        stripped = raw.split("#", 1)[0]
        if not stripped.strip():
            i += 1
            continue
        if ":" not in stripped:
            _fail("expected 'key: value'", i + 1, len(raw) - len(raw.lstrip()) + 1)
        key, value = stripped.split(":", 1)
        key = key.strip()
        if not key:
            _fail("empty key", i + 1, 1)
        start_line, start_col = i + 1, len(key) + 2 + (len(value) - len(value.lstrip()))
        depth = value.count("[") - value.count("]")
        while depth > 0:
            i += 1
            if i >= len(lines):
                _fail(f"unterminated value for {key!r}", start_line, start_col)
            more = lines[i].split("#", 1)[0]
            value += "\n" + more
            depth += more.count("[") - more.count("]")
        yield key, value.strip(), start_line, start_col
        i += 1


def _json(value: str, key: str, line: int, col: int):
    try:
        return json.loads(value)
    except json.JSONDecodeError as exc:
        _fail(f"bad value for {key!r}: {exc.msg}", line + exc.lineno - 1,
              (col + exc.colno - 1) if exc.lineno == 1 else exc.colno)


def _field(seen, key):
    value, line, col = seen[key]
    return _json(value, key, line, col), key, line, col


def _numbers(obj, key, line, col, kind=float):
    if not isinstance(obj, list) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in obj):
        _fail(f"{key!r} must be a list of numbers", line, col)
    if kind is int:
        if not all(float(x).is_integer() and x > 0 for x in obj):
            _fail(f"{key!r} must hold positive integers", line, col)
        return tuple(int(x) for x in obj)
    out = tuple(float(x) for x in obj)
    if not all(math.isfinite(x) for x in out):
        _fail(f"{key!r} has non-finite entries", line, col)
    return out


def parse_state_file(source: str | bytes) -> StateFile:
    if isinstance(source, bytes):
        try:
            source = source.decode("utf-8")
        except UnicodeDecodeError as exc:
            _fail(f"not UTF-8: {exc}")
    seen: dict[str, tuple[str, int, int]] = {}
    for key, value, line, col in _split_entries(source):
        if key in seen:
            _fail(f"duplicate key {key!r}", line, 1)
        seen[key] = (value, line, col)
    for req in ("kind", "dims", "data"):
        if req not in seen:
            _fail(f"missing required key {req!r}", 1, 1)

    kind, kline, kcol = seen["kind"]
    if kind not in KINDS:
        _fail(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}", kline, kcol)
    dims = _numbers(*_field(seen, "dims"), kind=int)
    data = _numbers(*_field(seen, "data"))
    weights = labels = None
    if "weights" in seen:
        weights = _numbers(*_field(seen, "weights"))
    if "labels" in seen:
        v, line, col = seen["labels"]
        labels = _json(v, "labels", line, col)
        if not isinstance(labels, list) or not all(isinstance(x, str) for x in labels):
            _fail("'labels' must be a list of strings", line, col)
        labels = tuple(labels)
    metadata = {k: v for k, (v, _, _) in seen.items() if k not in _RESERVED}

    sf = StateFile(kind, dims, data, weights, labels, metadata)
    _check_layout(sf, seen)
    try:
        sf.to_object()
    except MixturaError as exc:
        raise InvariantViolation(f"{exc.name}: {exc}") from exc
    return sf


def _check_layout(sf: StateFile, seen):
    line, col = seen["data"][1:]
    if len(sf.data) % 2:
        _fail("'data' must hold re, im pairs", line, col)
    count = len(sf.data) // 2
    n = sf.size
    if sf.kind == "ket":
        expected = n
    elif sf.kind == "density":
        expected = n * n
    elif sf.kind == "ensemble":
        if sf.weights is None:
            _fail("ensemble needs 'weights'", 1, 1)
        expected = n * len(sf.weights)
    else:
        if len(sf.dims) != 2:
            _fail("preparation needs dims [dS, dE]", *seen["dims"][1:])
        per = 1 + sf.dims[0] + sf.dims[1]
        if count == 0 or count % per:
            _fail(f"preparation data must be a multiple of {per} complex entries", line, col)
        expected = count
    if count != expected:
        _fail(f"expected {expected} complex entries for {sf.kind} with dims "
              f"{list(sf.dims)}, got {count}", line, col)


def _fmt_list(values) -> str:
    return "[" + ", ".join(repr(float(v)) for v in values) + "]"


def serialize_state_file(sf: StateFile) -> str:
    out = [f"kind: {sf.kind}", "dims: [" + ", ".join(str(d) for d in sf.dims) + "]"]
    if sf.weights is not None:
        out.append(f"weights: {_fmt_list(sf.weights)}")
    if sf.labels is not None:
        out.append(f"labels: {json.dumps(list(sf.labels))}")
    for k, v in sf.metadata.items():
        out.append(f"{k}: {v}")
    out.append(f"data: {_fmt_list(sf.data)}")
    return "\n".join(out) + "\n"


def _flat(z) -> tuple[float, ...]:
    z = np.asarray(z, dtype=np.complex128).ravel()
    return tuple(float(x) for pair in zip(z.real, z.imag) for x in pair)


def state_file_from(obj, dims=None) -> StateFile:
    """Wrap a library object as a StateFile. ``dims`` defaults to [dim]."""
    if isinstance(obj, Ket):
        return StateFile("ket", tuple(dims or (obj.dim,)), _flat(obj.amps))
    if isinstance(obj, DensityOperator):
        return StateFile("density", tuple(dims or (obj.dim,)), _flat(obj.matrix))
    if isinstance(obj, Ensemble):
        return StateFile("ensemble", tuple(dims or (obj.dim,)),
                         _flat(np.stack([k.amps for k in obj.kets])),
                         weights=tuple(float(w) for w in obj.weights))
    if isinstance(obj, PreparationModel):
        rows = [np.concatenate([[g], a.amps, e.amps]) for g, a, e in obj.entries]
        return StateFile("preparation", (obj.dims.dimA, obj.dims.dimB), _flat(np.concatenate(rows)))
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def read_state_file(path) -> StateFile:
    with open(path, "rb") as fh:
        return parse_state_file(fh.read())
