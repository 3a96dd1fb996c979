"""Key-value attribute store used for polyglot offload of metadata reads."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Optional, Union

from .elementary import ElementaryCounter
from .property_graph import PropertyGraph, PropertyValue, decode_value, encode_value

DEFAULT_KV_LOOKUP_US = 20.0

_ABSENT = object()


class KVError(Exception):
    pass


class UncoveredKeyError(KVError):
    def __init__(self, ident: int, key: str):
        self.ident = ident
        self.key = key
        super().__init__(f"({ident}, {key!r}) is not covered by the key-value store")


class KVStore:
    """Map ``(node id, key) -> value`` with a coverage manifest of ``(label, key)``.

    Coverage is total: every node carrying a covered label has an entry for
    the covered key, with an explicit absent marker when the graph has none.
    """

    def __init__(
        self,
        entries: dict,
        coverage: Iterable[tuple],
        counter: Optional[ElementaryCounter] = None,
    ):
        self._entries = entries
        self.coverage = frozenset(tuple(p) for p in coverage)
        self.counter = counter if counter is not None else ElementaryCounter()

    def __len__(self) -> int:
        return len(self._entries)

    def covers(self, label: Optional[str], key: str) -> bool:
        return (label, key) in self.coverage

    def get(self, ident: int, key: str) -> Optional[PropertyValue]:
        value = self._entries.get((ident, key), _ABSENT)
        if value is _ABSENT:
            raise UncoveredKeyError(ident, key)
        self.counter.add(kv_lookup=1)
        return None if value is None else value

    def dump(self, path: Union[str, Path]) -> None:
        """Write one JSON object per entry; the first line holds the manifest."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps({"coverage": sorted(list(p) for p in self.coverage)}) + "\n")
            for (ident, key), value in sorted(self._entries.items()):
                raw = None if value is None else encode_value(value)
                fh.write(json.dumps({"id": ident, "key": key, "value": raw}) + "\n")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "KVStore":
        entries = {}
        coverage: list = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                record = json.loads(line)
                if "coverage" in record:
                    coverage.extend(tuple(p) for p in record["coverage"])
                    continue
                try:
                    raw = record["value"]
                    value = None if raw is None else decode_value(raw)
                    entries[(int(record["id"]), str(record["key"]))] = value
                except (KeyError, ValueError, TypeError) as exc:
                    raise KVError(f"line {lineno}: bad entry ({exc})") from None
        if not coverage:
            raise KVError("key-value dump has no coverage manifest")
        return cls(entries, coverage)


def build_from_graph(
    graph: PropertyGraph,
    pairs: Iterable[tuple],
    counter: Optional[ElementaryCounter] = None,
) -> KVStore:
    """Ingest ``(label, key)`` attributes for every node carrying ``label``."""
    pairs = [tuple(p) for p in pairs]
    if not pairs:
        raise KVError("at least one (label, key) pair is required")
    entries = {}
    for label, key in pairs:
        if label not in graph.labels:
            raise KVError(f"unknown label {label!r}")
        for ident in graph.nodes_with_label(label):
            entries[(ident, key)] = graph.nodes[ident].props.get(key)
    return KVStore(entries, pairs, counter)


def kv_get(store: KVStore, ident: int, key: str) -> Optional[PropertyValue]:
    return store.get(ident, key)
