"""File formats: JSON instances and allocations, CSV reports, trace files.

Writers are deterministic (sorted keys, fixed separators, "\\n" line ends)
so identical inputs produce byte-identical files. See docs/formats.md and
schemas/ for the documented layouts.
"""

from __future__ import annotations

import csv
import json
from typing import Optional, Sequence

import numpy as np

from .datagen import paper_instance
from .metrics import REPORT_COLUMNS
from .model import (Allocation, CardinalityBounds, Instance, InstanceError,
                    make_allocation, make_instance)


class ParseError(ValueError):
    pass


# ---------------------------------------------------------------------------
# instances

def instance_document(inst: Instance, bounds: Optional[CardinalityBounds] = None) -> dict:
    doc = {
        "m": inst.m,
        "n": inst.n,
        "weights": inst.w.reshape(-1).tolist(),
    }
    if inst.e is not None:
        doc["expertise"] = inst.e.reshape(-1).tolist()
    if inst.rev is not None:
        doc["revenue"] = inst.rev.tolist()
    if bounds is not None:
        doc["bounds"] = {"l1": bounds.l1, "l2": bounds.l2,
                         "r1": bounds.r1, "r2": bounds.r2}
    if inst.seed is not None:
        doc["seed"] = int(inst.seed)
    if inst.instance_id is not None:
        doc["id"] = str(inst.instance_id)
    return doc


def dump_json(doc, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def write_instance(inst: Instance, path, bounds: Optional[CardinalityBounds] = None) -> None:
    dump_json(instance_document(inst, bounds), path)


def _field(doc: dict, key: str, kind, required: bool):
    if key not in doc:
        if required:
            raise ParseError(f"instance file missing field {key!r}")
        return None
    value = doc[key]
    if kind is int and (not isinstance(value, int) or isinstance(value, bool)):
        raise ParseError(f"field {key!r} must be an integer, got {value!r}")
    return value


def _flat_matrix(doc: dict, key: str, m: int, n: int, required: bool):
    raw = doc.get(key)
    if raw is None:
        if required:
            raise ParseError(f"instance file missing field {key!r}")
        return None
    if not isinstance(raw, list) or len(raw) != m * n:
        raise ParseError(f"field {key!r} must be a flat list of {m * n} numbers")
    if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in raw):
        raise ParseError(f"field {key!r} contains a non-numeric entry")
    return np.asarray(raw, dtype=np.float64).reshape(m, n)


def parse_instance_document(doc) -> tuple:
    """Decode a parsed JSON document into (Instance, bounds or None)."""
    if not isinstance(doc, dict):
        raise ParseError("instance file must contain a JSON object")
    m = _field(doc, "m", int, required=True)
    n = _field(doc, "n", int, required=True)
    if not (isinstance(m, int) and isinstance(n, int)) or m < 1 or n < 1:
        raise ParseError(f"m and n must be positive integers, got {m!r}, {n!r}")
    w = _flat_matrix(doc, "weights", m, n, required=True)
    e = _flat_matrix(doc, "expertise", m, n, required=False)
    rev = None
    if "revenue" in doc:
        raw = doc["revenue"]
        if not isinstance(raw, list) or len(raw) != n:
            raise ParseError(f"field 'revenue' must be a list of {n} numbers")
        rev = np.asarray(raw, dtype=np.float64)
    bounds = None
    if "bounds" in doc:
        raw = doc["bounds"]
        if not isinstance(raw, dict) or set(raw) != {"l1", "l2", "r1", "r2"}:
            raise ParseError("field 'bounds' must be an object with keys l1,l2,r1,r2")
        try:
            bounds = CardinalityBounds(int(raw["l1"]), int(raw["l2"]),
                                       int(raw["r1"]), int(raw["r2"]))
        except (TypeError, ValueError) as exc:
            raise ParseError(f"bad bounds: {exc}") from None
    seed = doc.get("seed")
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool)):
        raise ParseError(f"field 'seed' must be an integer, got {seed!r}")
    instance_id = doc.get("id")
    if instance_id is not None and not isinstance(instance_id, str):
        raise ParseError(f"field 'id' must be a string, got {instance_id!r}")
    try:
        inst = make_instance(w, e=e, rev=rev, seed=seed, instance_id=instance_id)
    except InstanceError as exc:
        raise ParseError(str(exc)) from None
    return inst, bounds


def read_instance(path) -> tuple:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from None
    return parse_instance_document(doc)


# ---------------------------------------------------------------------------
# allocations

def write_allocation(alloc: Allocation, path) -> None:
    dump_json([list(bundle) for bundle in alloc.bundles], path)


def read_allocation(path, m: Optional[int] = None, n: Optional[int] = None) -> Allocation:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(doc, list) or not all(isinstance(b, list) for b in doc):
        raise ParseError("allocation file must be an array of arrays")
    if m is not None and len(doc) != m:
        raise ParseError(f"allocation has {len(doc)} bundles, expected {m}")
    for bundle in doc:
        if not all(isinstance(j, int) and not isinstance(j, bool) for j in bundle):
            raise ParseError("allocation bundles must contain integer product indices")
    try:
        return make_allocation(doc, n)
    except InstanceError as exc:
        raise ParseError(str(exc)) from None


# ---------------------------------------------------------------------------
# bounds flags and instance sources

def parse_bounds(text: str) -> CardinalityBounds:
    """Parse an "l1,l2,r1,r2" flag value."""
    fields = text.split(",")
    if len(fields) != 4:
        raise ParseError(f"bounds must be 'l1,l2,r1,r2', got {text!r}")
    try:
        l1, l2, r1, r2 = (int(f) for f in fields)
    except ValueError:
        raise ParseError(f"bounds must be four integers, got {text!r}") from None
    try:
        return CardinalityBounds(l1, l2, r1, r2)
    except InstanceError as exc:
        raise ParseError(str(exc)) from None


def resolve_instance(source: str) -> tuple:
    """Load (Instance, bounds or None) from a file path or a catalog spec.

    Catalog specs look like "paper:table-C" or "paper:theorem-3:eps=0.2";
    parameters after the second colon are comma-separated k=v pairs.
    """
    if source.startswith("paper:"):
        body = source[len("paper:"):]
        name, _, tail = body.partition(":")
        params = {}
        if tail:
            for pair in tail.split(","):
                key, sep, value = pair.partition("=")
                if not sep or not key:
                    raise ParseError(f"bad catalog parameter {pair!r} in {source!r}")
                try:
                    params[key.strip()] = float(value)
                except ValueError:
                    raise ParseError(f"bad catalog parameter value {pair!r}") from None
        try:
            return paper_instance(name, **params)
        except InstanceError as exc:
            raise ParseError(str(exc)) from None
    return read_instance(source)


# ---------------------------------------------------------------------------
# reports and traces

def write_report_csv(rows: Sequence[dict], path) -> None:
    """Write comparison rows in the fixed REPORT_COLUMNS order."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(REPORT_COLUMNS),
                                lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def write_trace(lines: Sequence[str], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(line)
            fh.write("\n")
