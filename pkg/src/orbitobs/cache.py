"""Persistent factorization cache.

Entries are replayed on load (prime powers must multiply back to the
key and every prime must test prime); anything else is dropped.
Writers merge with whatever is on disk under an advisory file lock, so
concurrent runs lose nothing on distinct keys.
"""
from __future__ import annotations

import json
import logging
import os
import threading

from filelock import FileLock

from .arith import Factorization, is_prime

CACHE_VERSION = 1
log = logging.getLogger(__name__)


def _valid(key: int, factors) -> bool:
    out = 1
    last = 0
    for p, e in factors:
        if p <= last or e < 1 or not is_prime(p):
            return False
        out *= p ** e
        last = p
    return out == key


class FactorCache:
    def __init__(self, path: str | os.PathLike | None = None):
        self.path = os.fspath(path) if path is not None else None
        self.entries: dict[int, Factorization] = {}
        self.dirty: set[int] = set()
        self.dropped = 0
        self._lock = threading.Lock()
        if self.path and os.path.exists(self.path):
            self.entries = self._read()

    def _read(self) -> dict[int, Factorization]:
        try:
            with open(self.path) as fh:
                raw = json.load(fh)
        except (OSError, ValueError):
            log.warning("unreadable factor cache %s ignored", self.path)
            return {}
        if not isinstance(raw, dict) or raw.get("version") != CACHE_VERSION:
            return {}
        out = {}
        for key, factors in raw.get("entries", {}).items():
            try:
                n = int(key)
                pairs = tuple((int(p), int(e)) for p, e in factors)
            except (TypeError, ValueError):
                self.dropped += 1
                continue
            if n >= 1 and _valid(n, pairs):
                out[n] = Factorization(n, pairs)
            else:
                self.dropped += 1
        return out

    def get(self, n: int) -> Factorization | None:
        return self.entries.get(n)

    def put(self, n: int, fac: Factorization):
        with self._lock:
            if n not in self.entries:
                self.entries[n] = fac
                self.dirty.add(n)

    def __len__(self):
        return len(self.entries)

    def save(self):
        if not self.path or not self.dirty:
            return
        with FileLock(self.path + ".lock"):
            on_disk = self._read() if os.path.exists(self.path) else {}
            with self._lock:
                on_disk.update({n: self.entries[n] for n in self.dirty})
                self.dirty.clear()
            payload = {
                "version": CACHE_VERSION,
                "entries": {str(n): [list(pe) for pe in f.factors]
                            for n, f in sorted(on_disk.items())},
            }
            tmp = self.path + ".tmp"
            with open(tmp, "w") as fh:
                json.dump(payload, fh)
            os.replace(tmp, self.path)
