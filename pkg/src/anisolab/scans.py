"""Radius scans of an integral against a growth envelope."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

# consecutive ratios in the tail of a bounded scan may grow by at most this factor
TAIL_GROWTH = 1.05


@dataclass
class EnergyScan:
    label: str
    radii: list[float]
    values: list[float]
    bounds: list[float]
    ratios: list[float] = field(init=False)
    k: float = field(init=False)
    verdict: str = field(init=False)
    tail_growth: float = field(init=False)
    truncated: list[bool] = field(default_factory=list)

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        if r.size == 0 or np.any(np.diff(r) <= 0):
            raise ValueError("radii must be non-empty and strictly increasing")
        v = np.asarray(self.values, dtype=float)
        b = np.asarray(self.bounds, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(b > 0, v / np.where(b > 0, b, 1.0), np.where(v == 0, 0.0, np.inf))
        self.ratios = [float(x) for x in ratios]
        self.k = float(np.max(ratios))
        self.tail_growth = float(tail_growth(r, ratios))
        self.verdict = "bounded" if self.tail_growth <= TAIL_GROWTH else "unbounded"
        if not self.truncated:
            self.truncated = [False] * len(self.radii)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "radii": list(map(float, self.radii)),
            "values": list(map(float, self.values)),
            "bounds": list(map(float, self.bounds)),
            "ratios": self.ratios,
            "k": self.k,
            "tail_growth": self.tail_growth,
            "verdict": self.verdict,
            "truncated": list(map(bool, self.truncated)),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["R", "value", "bound", "ratio"])
        for row in zip(self.radii, self.values, self.bounds, self.ratios):
            w.writerow([repr(float(x)) for x in row])
        return buf.getvalue()


def tail_slice(radii: np.ndarray) -> slice:
    """Indices of the last decade of radii, or of the last half when the scan is shorter."""
    radii = np.asarray(radii, dtype=float)
    start = int(np.searchsorted(radii, radii[-1] / 10.0))
    if radii.size - start < 3:
        start = radii.size // 2
    return slice(min(start, radii.size - 1), radii.size)


def tail_growth(radii, ratios) -> float:
    """Largest step-to-step growth factor of the ratios over the tail."""
    tail = np.asarray(ratios, dtype=float)[tail_slice(radii)]
    if not np.all(np.isfinite(tail)):
        return float("inf")
    if tail.size < 2 or np.max(tail) <= 0.0:
        return 1.0
    prev, nxt = tail[:-1], tail[1:]
    with np.errstate(divide="ignore", invalid="ignore"):
        steps = np.where(prev > 0, nxt / np.where(prev > 0, prev, 1.0), np.where(nxt > 0, np.inf, 1.0))
    return float(max(1.0, np.max(steps)))
