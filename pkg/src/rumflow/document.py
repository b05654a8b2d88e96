"""Dataset documents: JSON on disk, exact rationals in memory.

A document looks like::

    {
      "alternatives": ["a", "b", "c"],
      "unobservable": ["c"],
      "menus": "all",
      "frequencies": [{"menu": ["a", "b"], "alternative": "a", "p": "1/2"}, ...]
    }

``menus`` may also be a list of menus.  ``p`` is a decimal string or a
``num/den`` string; both parse exactly.  An optional ``meta`` object (for
example a generator config) is allowed and ignored by the parser.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

from .errors import ParseError
from .model import IncompleteDataset, Instance, build_instance, format_fraction, set_key, validate_dataset

KEYS = {"alternatives", "unobservable", "menus", "frequencies", "meta"}


def _strings(value, what: str) -> list:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ParseError(f"{what} must be a list of strings")
    return value


def parse_document(doc) -> IncompleteDataset:
    """Validate a decoded document and build the dataset."""
    if not isinstance(doc, dict):
        raise ParseError("document must be an object")
    unknown = set(doc) - KEYS
    if unknown:
        raise ParseError(f"unknown keys: {', '.join(sorted(unknown))}")
    for key in ("alternatives", "frequencies"):
        if key not in doc:
            raise ParseError(f"missing key {key!r}")
    alts = _strings(doc["alternatives"], "alternatives")
    hidden = _strings(doc.get("unobservable", []), "unobservable")
    menus = doc.get("menus", "all")
    if not isinstance(menus, str):
        if not isinstance(menus, list):
            raise ParseError("menus must be 'all' or a list of menus")
        menus = [_strings(m, "each menu") for m in menus]
    inst = build_instance(alts, hidden, menus)
    rows = doc["frequencies"]
    if not isinstance(rows, list):
        raise ParseError("frequencies must be a list")
    freq = {}
    for row in rows:
        if not isinstance(row, dict) or set(row) != {"menu", "alternative", "p"}:
            raise ParseError("each frequency needs exactly the keys menu, alternative, p")
        if not isinstance(row["p"], (str, int)) or isinstance(row["p"], bool):
            raise ParseError(f"probability must be a string, got {row['p']!r}")
        menu = _strings(row["menu"], "menu")
        pair = inst.pair(menu, row["alternative"])
        if pair in freq:
            raise ParseError(f"duplicate entry for {inst.fmt_pair(pair)}")
        freq[pair] = row["p"]
    return validate_dataset(inst, freq)


def loads(text: str) -> IncompleteDataset:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}") from None
    return parse_document(doc)


def load(path) -> IncompleteDataset:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    return loads(text)


def instance_document(inst: Instance) -> dict:
    menus = "all" if inst.all_menus else [inst.names(d) for d in sorted(inst.menus, key=set_key)]
    return {
        "alternatives": list(inst.alternatives),
        "unobservable": inst.names(inst.unobservable),
        "menus": menus,
    }


def to_document(ds: IncompleteDataset, meta: dict | None = None) -> dict:
    """Canonical document: instance order for names, canonical order for menus and pairs."""
    inst = ds.instance
    doc = instance_document(inst)
    doc["frequencies"] = [
        {"menu": inst.names(d), "alternative": inst.alternatives[x], "p": format_fraction(ds.freq[(d, x)])}
        for d, x in inst.observable_pairs
    ]
    if meta:
        doc["meta"] = meta
    return doc


def _inline(value) -> str:
    return json.dumps(value, ensure_ascii=False, separators=(", ", ": "))


def dumps(ds: IncompleteDataset, meta: dict | None = None) -> str:
    """Canonical text: one line per top-level key, one line per frequency."""
    doc = to_document(ds, meta)
    lines = []
    for key, value in doc.items():
        if key == "frequencies":
            rows = ",\n".join(f"    {_inline(r)}" for r in value)
            lines.append(f'  "frequencies": [\n{rows}\n  ]' if value else '  "frequencies": []')
        else:
            lines.append(f"  {_inline(key)}: {_inline(value)}")
    return "{\n" + ",\n".join(lines) + "\n}\n"


def write_atomic(path, text: str):
    """Write through a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump(ds: IncompleteDataset, path, meta: dict | None = None):
    write_atomic(path, dumps(ds, meta))

