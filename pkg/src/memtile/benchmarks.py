"""Bundled benchmark layer tables: per-layer MM dimensions for sweeps."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from importlib import resources
from pathlib import Path


@dataclass(frozen=True)
class BenchmarkLayer:
    layer_id: int
    M: int
    K: int
    N: int


@dataclass(frozen=True)
class BenchmarkFixture:
    name: str
    layers: tuple[BenchmarkLayer, ...]

    def __post_init__(self) -> None:
        ids = [l.layer_id for l in self.layers]
        if len(ids) != len(set(ids)):
            raise ValueError(f"benchmark {self.name!r} has duplicate layer ids")
        for l in self.layers:
            if min(l.M, l.K, l.N) < 1:
                raise ValueError(f"benchmark {self.name!r} layer {l.layer_id} has non-positive dims")


def _parse_layers_csv(name: str, text: str) -> BenchmarkFixture:
    # Leading '#' lines carry the table's provenance and are skipped.
    rows = [line for line in text.splitlines() if line.strip() and not line.startswith("#")]
    reader = csv.DictReader(io.StringIO("\n".join(rows)))
    expected = ["layer_id", "M", "K", "N"]
    if reader.fieldnames != expected:
        raise ValueError(f"benchmark {name!r}: expected columns {expected}, got {reader.fieldnames}")
    layers = tuple(
        BenchmarkLayer(int(r["layer_id"]), int(r["M"]), int(r["K"]), int(r["N"]))
        for r in reader
    )
    return BenchmarkFixture(name=name, layers=layers)


def benchmark_names() -> list[str]:
    pkg = resources.files("memtile") / "data"
    return sorted(p.name[:-4] for p in pkg.iterdir() if p.name.endswith(".csv"))


def load_benchmark(ref: str) -> BenchmarkFixture:
    """Load a bundled table by name, or any CSV file by path."""
    path = Path(ref)
    if path.is_file():
        return _parse_layers_csv(path.stem, path.read_text(encoding="utf-8"))
    res = resources.files("memtile") / "data" / f"{ref}.csv"
    if not res.is_file():
        raise ValueError(f"unknown benchmark fixture {ref!r}; available: {benchmark_names()}")
    return _parse_layers_csv(ref, res.read_text(encoding="utf-8"))
