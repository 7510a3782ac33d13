"""Simulation traces and their CSV representation."""

from __future__ import annotations

import io
from datetime import datetime, timezone
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__

TIMESTAMP_KEY = "generated"


def column_names(n: int) -> list[str]:
    """Fixed CSV column order for state dimension ``n``."""
    return (
        ["t", "r", "y", "u"]
        + [f"x{i}" for i in range(1, n + 1)]
        + [f"xhat{i}" for i in range(1, n + 1)]
        + ["dfhat", "fL", "fhat"]
        + [f"theta_{i}" for i in range(n + 2)]
        + ["cost"]
    )


@dataclass
class SimTrace:
    """Every loop signal on a uniform time grid.

    ``y`` is the measured (noisy) output the loop acted on. ``theta`` and
    ``cost`` stay at zero for observers without a learner.
    """

    t: np.ndarray
    r: np.ndarray
    y: np.ndarray
    u: np.ndarray
    x: np.ndarray
    xhat: np.ndarray
    dfhat: np.ndarray
    fL: np.ndarray
    fhat: np.ndarray
    theta: np.ndarray
    cost: np.ndarray
    meta: dict[str, str] = field(default_factory=dict)

    @classmethod
    def allocate(cls, steps: int, n: int, meta: dict | None = None) -> "SimTrace":
        z = lambda *shape: np.zeros(shape)  # noqa: E731
        return cls(z(steps), z(steps), z(steps), z(steps), z(steps, n), z(steps, n),
                   z(steps), z(steps), z(steps), z(steps, n + 2), z(steps), dict(meta or {}))

    @property
    def n(self) -> int:
        return self.x.shape[1]

    def __len__(self) -> int:
        return self.t.size

    @property
    def failed(self) -> bool:
        return self.meta.get("status", "ok") != "ok"

    def truncate(self, steps: int) -> "SimTrace":
        cut = {k: getattr(self, k)[:steps].copy() for k in _ARRAYS}
        return SimTrace(**cut, meta=dict(self.meta))

    def columns(self) -> list[str]:
        return column_names(self.n)

    def as_matrix(self) -> np.ndarray:
        parts = [getattr(self, k) for k in _ARRAYS]
        return np.column_stack([p.reshape(len(self), -1) for p in parts])

    def column(self, name: str) -> np.ndarray:
        return self.as_matrix()[:, self.columns().index(name)]

    @classmethod
    def from_matrix(cls, m: np.ndarray, n: int, meta: dict | None = None) -> "SimTrace":
        m = np.asarray(m, dtype=float).reshape(-1, len(column_names(n)))
        c = 4
        x = m[:, c:c + n]
        xhat = m[:, c + n:c + 2 * n]
        c += 2 * n
        return cls(m[:, 0], m[:, 1], m[:, 2], m[:, 3], x, xhat, m[:, c], m[:, c + 1], m[:, c + 2],
                   m[:, c + 3:c + 3 + n + 2], m[:, -1], dict(meta or {}))


_ARRAYS = ("t", "r", "y", "u", "x", "xhat", "dfhat", "fL", "fhat", "theta", "cost")


def default_meta(scenario_hash: str, seed: int, **extra) -> dict[str, str]:
    meta = {"scenario_hash": scenario_hash, "seed": str(seed), "version": __version__, "status": "ok"}
    meta.update({k: str(v) for k, v in extra.items()})
    return meta


def export_trace(trace: SimTrace, path, timestamp: str | None = None) -> Path:
    """Write the trace as CSV with ``#`` metadata lines and 17-significant-digit reals.

    Raises:
        OSError: when the file cannot be written; the message names the path.
    """
    path = Path(path)
    stamp = timestamp or datetime.now(timezone.utc).isoformat(timespec="seconds")
    buf = io.StringIO()
    for key in sorted(trace.meta):
        buf.write(f"# {key}: {trace.meta[key]}\n")
    buf.write(f"# n: {trace.n}\n")
    buf.write(f"# {TIMESTAMP_KEY}: {stamp}\n")
    buf.write(",".join(trace.columns()) + "\n")
    if len(trace):
        np.savetxt(buf, trace.as_matrix(), fmt="%.17g", delimiter=",")
    try:
        path.write_text(buf.getvalue())
    except OSError as exc:
        raise OSError(f"cannot write trace to {path}: {exc.strerror or exc}") from exc
    return path


def read_trace(path) -> SimTrace:
    """Parse a file written by :func:`export_trace`."""
    path = Path(path)
    meta: dict[str, str] = {}
    header = None
    rows_start = 0
    with path.open() as fh:
        lines = fh.read().splitlines()
    for i, line in enumerate(lines):
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(":")
            meta[key.strip()] = value.strip()
            continue
        header = line.split(",")
        rows_start = i + 1
        break
    if header is None:
        raise ValueError(f"{path}: missing CSV header")
    n = int(meta.pop("n", (len(header) - 10) // 3))
    if header != column_names(n):
        raise ValueError(f"{path}: unexpected column layout")
    meta.pop(TIMESTAMP_KEY, None)
    body = [ln for ln in lines[rows_start:] if ln]
    m = np.loadtxt(body, delimiter=",", ndmin=2) if body else np.zeros((0, len(header)))
    return SimTrace.from_matrix(m, n, meta)
