"""Text formats for nodal fields and boundary traces.

Field file (`patfield 1`):

    patfield 1
    nodes <N>
    <value>        # one per line, 17 significant digits

Trace file (`pattrace 1`):

    pattrace 1
    dt <value> steps <N> nodes <B>
    <B values per line, N lines>   # row n is time n*dt, loop order

Measurement files reuse the trace format with a `# model <tag>` comment
after the header.  Values survive a save/load round trip exactly, so a
second save reproduces the file byte for byte.
"""

from __future__ import annotations

import numpy as np

from .mesh import _expect_count, _LineReader
from .sensor import MEASUREMENT_MODELS, Measurement
from .wavesolver import BoundaryTrace


def save_field(field: np.ndarray, path) -> None:
    """Write a nodal field in the ``patfield 1`` format."""
    field = np.asarray(field, dtype=np.float64)
    if field.ndim != 1:
        raise ValueError("field must be one-dimensional")
    with open(path, "w", encoding="ascii") as f:
        f.write("patfield 1\n")
        f.write(f"nodes {field.size}\n")
        for v in field:
            f.write(f"{v:.17g}\n")


def load_field(path) -> np.ndarray:
    """Read a ``patfield 1`` file; errors carry ``path:line``."""
    reader = _LineReader(path)
    header = reader.next()
    if header.split() != ["patfield", "1"]:
        raise reader.error(f"bad header '{header}', expected 'patfield 1'")
    n = _expect_count(reader, "nodes")
    values = np.empty(n)
    for i in range(n):
        token = reader.next()
        try:
            values[i] = float(token)
        except ValueError:
            raise reader.error(f"bad value '{token}'") from None
    return values


def save_trace(trace: BoundaryTrace, path, model: str | None = None) -> None:
    """Write a trace in the ``pattrace 1`` format.

    The `steps` header field counts stored rows (time samples).  When
    `model` is given, a `# model <tag>` comment line records which
    measurement model produced the data.
    """
    with open(path, "w", encoding="ascii") as f:
        f.write("pattrace 1\n")
        if model is not None:
            f.write(f"# model {model}\n")
        rows, nodes = trace.values.shape
        f.write(f"dt {trace.dt:.17g} steps {rows} nodes {nodes}\n")
        for row in trace.values:
            f.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def load_trace(path) -> tuple[BoundaryTrace, str | None]:
    """Read a ``pattrace 1`` file; returns (trace, model tag or None)."""
    reader = _LineReader(path)
    header = reader.next()
    if header.split() != ["pattrace", "1"]:
        raise reader.error(f"bad header '{header}', expected 'pattrace 1'")
    model = None
    with open(path, "r", encoding="ascii") as f:
        for raw in f:
            stripped = raw.strip()
            if stripped.startswith("#"):
                parts = stripped[1:].split()
                if len(parts) == 2 and parts[0] == "model":
                    model = parts[1]
                    break
    line = reader.next()
    parts = line.split()
    if len(parts) != 6 or parts[0] != "dt" or parts[2] != "steps" or parts[4] != "nodes":
        raise reader.error(f"expected 'dt <value> steps <N> nodes <B>', got '{line}'")
    try:
        dt = float(parts[1])
        rows = int(parts[3])
        nodes = int(parts[5])
    except ValueError:
        raise reader.error("bad dt/steps/nodes value") from None
    if dt <= 0:
        raise reader.error(f"dt must be positive, got {dt:g}")
    if rows < 1 or nodes < 1:
        raise reader.error("steps and nodes must be positive")
    values = np.empty((rows, nodes))
    for i in range(rows):
        row = reader.next().split()
        if len(row) != nodes:
            raise reader.error(f"expected {nodes} values, got {len(row)}")
        try:
            values[i] = [float(tok) for tok in row]
        except ValueError:
            raise reader.error("bad value in trace row") from None
    return BoundaryTrace(values=values, dt=dt), model


def save_measurement(measurement: Measurement, path) -> None:
    """Write a measurement as a tagged trace file."""
    save_trace(measurement.trace, path, model=measurement.model)


def load_measurement(path) -> Measurement:
    """Read a tagged trace file back into a Measurement."""
    trace, model = load_trace(path)
    reader = _LineReader(path)  # only for uniform error formatting
    if model is None:
        raise reader.error("trace file carries no '# model <tag>' line")
    if model not in MEASUREMENT_MODELS:
        raise reader.error(f"unknown measurement model '{model}'")
    return Measurement(trace=trace, model=model)


__all__ = [
    "load_field",
    "load_measurement",
    "load_trace",
    "save_field",
    "save_measurement",
    "save_trace",
]
