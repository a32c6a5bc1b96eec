"""Delta-shell-aware container for spectra and correlation maps."""

from __future__ import annotations

import csv
import enum
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np


def map_ordered(fn, items: list, threads: int = 1) -> list:
    """``[fn(x) for x in items]``, optionally on a thread pool; order is kept."""
    if threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


class Shell(str, enum.Enum):
    """Support manifold of the distribution whose coefficient is stored."""

    POINT = "point-delta"  # delta(w) delta(w')
    LINE = "line-delta"  # one linear constraint between two frequencies
    PLANE = "plane-delta"  # w1 + w2 + w3 = 0


@dataclass
class SpectralGrid:
    """Values on a 1-D or 2-D rectilinear frequency grid.

    ``columns`` holds extra named arrays broadcastable to ``values.shape``
    (overlays, log scale, ...).  ``metadata`` must be JSON-serialisable.
    """

    axis_names: tuple
    axes: tuple
    values: np.ndarray
    shell: Shell
    metadata: dict = field(default_factory=dict)
    columns: dict = field(default_factory=dict)

    def __post_init__(self):
        self.axis_names = tuple(self.axis_names)
        self.axes = tuple(np.asarray(a, dtype=float) for a in self.axes)
        self.values = np.asarray(self.values)
        self.shell = Shell(self.shell)
        if len(self.axes) not in (1, 2) or len(self.axes) != len(self.axis_names):
            raise ValueError("a grid has one or two named axes")
        shape = tuple(len(a) for a in self.axes)
        if self.values.shape != shape:
            raise ValueError(f"values shape {self.values.shape} does not match axes {shape}")
        for a in self.axes:
            if len(a) > 1 and not (np.all(np.diff(a) > 0) or np.all(np.diff(a) < 0)):
                raise ValueError("grid axes must be strictly monotone")
        self.columns = {k: np.broadcast_to(np.asarray(v), shape).copy() for k, v in self.columns.items()}

    @property
    def shape(self) -> tuple:
        return self.values.shape

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)

    # -- long-format rows -----------------------------------------------------

    def _header(self) -> list[str]:
        names = list(self.axis_names)
        names += ["re", "im", "abs"] if self.is_complex else ["value"]
        return names + list(self.columns)

    def rows(self):
        mesh = np.meshgrid(*self.axes, indexing="ij")
        flat_axes = [m.ravel() for m in mesh]
        vals = self.values.ravel()
        extra = [c.ravel() for c in self.columns.values()]
        for i in range(vals.size):
            row = [a[i] for a in flat_axes]
            v = vals[i]
            row += [v.real, v.imag, abs(v)] if self.is_complex else [v]
            row += [c[i] for c in extra]
            yield [float(x) for x in row]

    def to_csv(self, header_lines=()) -> str:
        """Long-format CSV; floats use ``repr`` so they round-trip exactly."""
        buf = io.StringIO()
        for line in header_lines:
            buf.write(f"# {line}\n")
        buf.write("# grid: " + json.dumps(self._descriptor(), sort_keys=True) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self._header())
        for row in self.rows():
            writer.writerow([repr(x) for x in row])
        return buf.getvalue()

    def _descriptor(self) -> dict:
        return {
            "axis_names": list(self.axis_names),
            "shape": list(self.shape),
            "shell": self.shell.value,
            "complex": bool(self.is_complex),
            "columns": list(self.columns),
            "metadata": self.metadata,
        }

    @classmethod
    def from_csv(cls, text: str) -> "SpectralGrid":
        lines = text.splitlines()
        desc = None
        body = []
        for line in lines:
            if line.startswith("# grid: "):
                desc = json.loads(line[len("# grid: "):])
            elif not line.startswith("#"):
                body.append(line)
        if desc is None:
            raise ValueError("missing grid descriptor line")
        reader = csv.reader(body)
        next(reader)
        data = np.array([[float(x) for x in row] for row in reader])
        shape = tuple(desc["shape"])
        nax = len(shape)
        axes = []
        for k in range(nax):
            col = data[:, k].reshape(shape)
            index = [0] * nax
            index[k] = slice(None)
            axes.append(col[tuple(index)])
        pos = nax
        if desc["complex"]:
            values = (data[:, pos] + 1j * data[:, pos + 1]).reshape(shape)
            pos += 3
        else:
            values = data[:, pos].reshape(shape)
            pos += 1
        columns = {}
        for name in desc["columns"]:
            columns[name] = data[:, pos].reshape(shape)
            pos += 1
        return cls(tuple(desc["axis_names"]), tuple(axes), values, Shell(desc["shell"]), desc["metadata"], columns)

    # -- JSON -----------------------------------------------------------------

    @staticmethod
    def _encode(arr: np.ndarray):
        arr = np.asarray(arr)
        if np.iscomplexobj(arr):
            return {"re": arr.real.tolist(), "im": arr.imag.tolist()}
        return arr.tolist()

    @staticmethod
    def _decode(obj):
        if isinstance(obj, dict):
            return np.array(obj["re"], dtype=float) + 1j * np.array(obj["im"], dtype=float)
        return np.array(obj, dtype=float)

    def to_dict(self) -> dict:
        return {
            "axis_names": list(self.axis_names),
            "axes": [a.tolist() for a in self.axes],
            "values": self._encode(self.values),
            "shell": self.shell.value,
            "metadata": self.metadata,
            "columns": {k: self._encode(v) for k, v in self.columns.items()},
        }

    def to_json(self) -> str:
        # json writes floats with repr, which round-trips IEEE doubles exactly
        return json.dumps(self.to_dict(), sort_keys=True, allow_nan=True)

    @classmethod
    def from_dict(cls, d: dict) -> "SpectralGrid":
        return cls(
            tuple(d["axis_names"]),
            tuple(np.array(a, dtype=float) for a in d["axes"]),
            cls._decode(d["values"]),
            Shell(d["shell"]),
            d.get("metadata", {}),
            {k: cls._decode(v) for k, v in d.get("columns", {}).items()},
        )

    @classmethod
    def from_json(cls, text: str) -> "SpectralGrid":
        return cls.from_dict(json.loads(text))
