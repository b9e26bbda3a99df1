"""JSON input parsing and deterministic report serialization."""

from __future__ import annotations

import hashlib
import json
import math
from fractions import Fraction

import numpy as np

from .core import ExtractorTable, JointSourceSpec, SourceSpec, validate_spec

SCHEMA_VERSION = 1


class InputError(ValueError):
    """Malformed or invalid input file."""


def read_json(path: str):
    """Parse a JSON file; returns ``(obj, sha256 digest of the raw bytes)``."""
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        obj = json.loads(raw.decode("utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    except UnicodeDecodeError as exc:
        raise InputError(f"{path}: not UTF-8 text ({exc})") from None
    return obj, hashlib.sha256(raw).hexdigest()


def _entry(x, exact: bool):
    if isinstance(x, bool) or not isinstance(x, (int, float, str)):
        raise InputError(f"probability entry {x!r} must be a number or a 'p/q' string")
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except ValueError:
            raise InputError(f"cannot parse probability {x!r}") from None
    if exact:
        return Fraction(str(x))
    return Fraction(x) if isinstance(x, int) else float(x)


def spec_from_obj(obj, exact: bool = False) -> SourceSpec:
    if not isinstance(obj, dict) or "dice" not in obj or "alphabet" not in obj:
        raise InputError('source spec needs keys "alphabet" and "dice"')
    k = obj["alphabet"]
    if not isinstance(k, int) or k < 1:
        raise InputError('"alphabet" must be a positive integer')
    dice = obj["dice"]
    if not isinstance(dice, list) or not dice or not all(isinstance(d, list) for d in dice):
        raise InputError('"dice" must be a nonempty list of lists')
    has_frac = any(isinstance(v, str) for d in dice for v in d)
    rows = [[_entry(v, exact or has_frac) for v in d] for d in dice]
    if not (exact or has_frac):
        rows = [[float(v) for v in r] for r in rows]
    spec = SourceSpec(k, tuple(tuple(r) for r in rows), tuple(obj["labels"]) if obj.get("labels") else None)
    report = validate_spec(spec)
    if not report.ok:
        raise InputError("invalid source spec: " + "; ".join(report.violations))
    return spec


def joint_from_obj(obj, exact: bool = False) -> JointSourceSpec:
    if not isinstance(obj, dict) or not {"a", "b", "dice"} <= set(obj):
        raise InputError('joint spec needs keys "a", "b" and "dice"')
    a, b, dice = obj["a"], obj["b"], obj["dice"]
    if not isinstance(dice, list) or not dice:
        raise InputError('"dice" must be a nonempty list of matrices')
    has_frac = any(isinstance(v, str) for m in dice for r in m for v in r)
    mats = []
    for m in dice:
        if len(m) != a or any(len(r) != b for r in m):
            raise InputError(f"each die must be an {a}x{b} matrix")
        rows = [[_entry(v, exact or has_frac) for v in r] for r in m]
        if not (exact or has_frac):
            rows = [[float(v) for v in r] for r in rows]
        mats.append(tuple(tuple(r) for r in rows))
    spec = JointSourceSpec(a, b, tuple(mats))
    try:
        spec.check()
    except ValueError as exc:
        raise InputError(str(exc)) from None
    return spec


def table_from_obj(obj, alphabet_size: int) -> ExtractorTable:
    if not isinstance(obj, dict) or "n" not in obj or "labels" not in obj:
        raise InputError('extractor table needs keys "n" and "labels"')
    labels = obj["labels"]
    if not isinstance(labels, str) or set(labels) - {"0", "1"}:
        raise InputError('"labels" must be a string of 0/1 characters')
    try:
        return ExtractorTable(alphabet_size, int(obj["n"]), tuple(int(c) for c in labels))
    except ValueError as exc:
        raise InputError(str(exc)) from None


def spec_to_obj(spec: SourceSpec) -> dict:
    return {"alphabet": spec.alphabet_size, "dice": [[jsonable(v) for v in d] for d in spec.dice]}


def joint_to_obj(spec: JointSourceSpec) -> dict:
    return {"a": spec.a_size, "b": spec.b_size,
            "dice": [[[jsonable(v) for v in r] for r in m] for m in spec.dice]}


def jsonable(x):
    """Fractions become ``"p/q"`` strings; numpy scalars and arrays become plain JSON values."""
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else x.numerator
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return x
    if isinstance(x, np.ndarray):
        return [jsonable(v) for v in x.tolist()]
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    return x


def dump_report(report: dict) -> str:
    """Canonical JSON text: sorted keys, fixed indentation, trailing newline."""
    body = {"schema": SCHEMA_VERSION, **report}
    return json.dumps(jsonable(body), sort_keys=True, indent=2) + "\n"
