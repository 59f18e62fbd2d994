"""Append-only JSON-lines cache for class-polynomial memo entries.

Line 1 is a header binding the datum hash; every entry carries a checksum and
corrupt or mismatched lines are skipped (and dropped by `gc`), never used.
"""

from __future__ import annotations

import hashlib
import json
import os

from .laurent import Xi

VERSION = 1


def _crc(payload: str) -> str:
    return hashlib.sha256(payload.encode()).hexdigest()[:12]


def _entry_line(eng, elt, vec):
    payload = json.dumps(
        {
            "elt": eng.format(elt),
            "vec": [[eng.format(k.canonical_min), list(p.c)] for k, p in sorted(
                vec.items(), key=lambda t: t[0].sort_token()
            )],
        },
        sort_keys=True,
    )
    return json.dumps({"crc": _crc(payload), "data": payload})


def save(path, co, loaded=frozenset()):
    """Append memo entries not yet on disk; creates the file with a header."""
    eng = co.eng
    fresh = not os.path.exists(path)
    with open(path, "a") as fh:
        if fresh:
            fh.write(json.dumps({"version": VERSION, "datum": eng.datum.datum_hash}) + "\n")
        n = 0
        for elt, vec in co.memo.items():
            if elt in loaded:
                continue
            fh.write(_entry_line(eng, elt, vec) + "\n")
            n += 1
    return n


def load(path, co):
    """Install valid cache entries into the cocenter memo; returns their keys."""
    eng = co.eng
    loaded = set()
    if not os.path.exists(path):
        return loaded
    with open(path) as fh:
        header = fh.readline()
        try:
            head = json.loads(header)
        except json.JSONDecodeError:
            return loaded
        if head.get("version") != VERSION or head.get("datum") != eng.datum.datum_hash:
            return loaded
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                if _crc(obj["data"]) != obj["crc"]:
                    continue
                data = json.loads(obj["data"])
                elt = eng.parse(data["elt"])
                vec = {}
                for rep, coeffs in data["vec"]:
                    key = co.lab.class_key(eng.parse(rep))
                    vec[key] = Xi(tuple(coeffs))
                co.memo[elt] = vec
                loaded.add(elt)
            except (ValueError, KeyError, json.JSONDecodeError):
                continue
    return loaded


def gc(path, datum_hash=None):
    """Rewrite the cache keeping only well-formed, checksum-valid entries."""
    if not os.path.exists(path):
        return 0, 0
    kept, dropped = [], 0
    header = None
    with open(path) as fh:
        first = fh.readline().strip()
        try:
            head = json.loads(first)
            if head.get("version") == VERSION and (
                datum_hash is None or head.get("datum") == datum_hash
            ):
                header = first
        except json.JSONDecodeError:
            pass
        if header is None:
            return 0, sum(1 for _ in fh) + 1
        seen = set()
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                if _crc(obj["data"]) != obj["crc"]:
                    dropped += 1
                    continue
                key = json.loads(obj["data"])["elt"]
                if key in seen:
                    dropped += 1
                    continue
                seen.add(key)
                kept.append(line)
            except (ValueError, KeyError, json.JSONDecodeError):
                dropped += 1
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for line in kept:
            fh.write(line + "\n")
    return len(kept), dropped
