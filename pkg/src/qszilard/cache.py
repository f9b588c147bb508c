"""Persistent store for unit-box subsystem spectra.

The on-disk format is a JSON-lines record store (one record per line):

    {"v": 1, "n": 3, "g_eff": -0.05, "n_modes": 18, "energy_cutoff": 1606.9,
     "k": 40, "dim": 542, "solver_tol": 1e-09, "energies": [...]}

``v`` is the format version; records with any other version are ignored on
load, so a format change simply invalidates old entries.  Writes append
under an advisory file lock and the last record for a key wins, which makes
duplicate insertion idempotent (values are identical by construction).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from filelock import FileLock

from .units import SubsystemKey

FORMAT_VERSION = 1
CACHE_DIR_ENV = "QSZILARD_CACHE_DIR"
STORE_NAME = "spectra.jsonl"


@dataclass
class CacheRecord:
    key: SubsystemKey
    energies: np.ndarray
    dim: int
    solver_tol: float

    @property
    def k(self) -> int:
        return len(self.energies)


def default_cache_dir() -> Path | None:
    env = os.environ.get(CACHE_DIR_ENV)
    return Path(env) if env else None


class SpectrumCache:
    """In-memory spectrum map with optional JSONL persistence.

    ``directory=None`` keeps everything in memory.  Concurrent readers are
    safe; concurrent writers are serialized through a ``.lock`` file next to
    the store.
    """

    def __init__(self, directory: str | os.PathLike | None = None):
        self.directory = Path(directory) if directory is not None else None
        self._mem: dict[SubsystemKey, CacheRecord] = {}
        self.hits = 0
        self.misses = 0
        self.computed = 0
        if self.directory is not None:
            self.directory.mkdir(parents=True, exist_ok=True)
            self._load()

    @property
    def store_path(self) -> Path | None:
        return None if self.directory is None else self.directory / STORE_NAME

    def _lock(self) -> FileLock:
        return FileLock(str(self.store_path) + ".lock")

    def _load(self):
        path = self.store_path
        if path is None or not path.exists():
            return
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError:
                    continue  # torn write; ignore the record
                if rec.get("v") != FORMAT_VERSION:
                    continue
                key = SubsystemKey(
                    n=rec["n"],
                    g_eff=rec["g_eff"],
                    n_modes=rec["n_modes"],
                    energy_cutoff=rec["energy_cutoff"],
                )
                self._mem[key] = CacheRecord(
                    key=key,
                    energies=np.asarray(rec["energies"], dtype=float),
                    dim=rec["dim"],
                    solver_tol=rec["solver_tol"],
                )

    def get(self, key: SubsystemKey) -> CacheRecord | None:
        rec = self._mem.get(key)
        if rec is None:
            self.misses += 1
        else:
            self.hits += 1
        return rec

    def put(self, record: CacheRecord):
        self._mem[record.key] = record
        if self.store_path is None:
            return
        line = json.dumps(
            {
                "v": FORMAT_VERSION,
                "n": record.key.n,
                "g_eff": record.key.g_eff,
                "n_modes": record.key.n_modes,
                "energy_cutoff": record.key.energy_cutoff,
                "k": record.k,
                "dim": record.dim,
                "solver_tol": record.solver_tol,
                "energies": [float(e) for e in record.energies],
            }
        )
        with self._lock():
            with open(self.store_path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")

    def clear(self):
        self._mem.clear()
        if self.store_path is not None and self.store_path.exists():
            with self._lock():
                self.store_path.unlink()

    def __len__(self) -> int:
        return len(self._mem)

    def keys(self) -> list[SubsystemKey]:
        return sorted(
            self._mem,
            key=lambda k: (k.n, k.g_eff, k.n_modes, k.energy_cutoff),
        )
