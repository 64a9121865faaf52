"""File formats: gales, antichains, set descriptions and covers.

Gales are JSON records ``{"s": "1/2", "extension": "zero", "entries":
[["01", "3/2"], ...]}`` with an optional ``"cover"`` record.  Values may be
decimals, rationals ``p/q`` or the surd text form ``c*b^(e)``; in exact mode
they are read without rounding, so a written table reads back identical.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable

from .compiler import Antichain
from .cover import NiceCover, cover_from_dict, parse_cover
from .gale import MalformedGaleError, SupergaleTable, _exponent
from .numbers import make_arith
from .sft import SetDescription


class FormatError(ValueError):
    pass


def _read(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from None


def _json(path):
    try:
        return json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None


def dumps(obj) -> str:
    """Deterministic JSON text."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


# -- covers ------------------------------------------------------------------------


def load_cover(spec: str) -> NiceCover:
    """A ``symbolic:K`` / ``cube:N:B`` spec, an inline JSON record or a record file."""
    text = spec.strip()
    if text.startswith("{"):
        return cover_from_dict(json.loads(text))
    if Path(spec).is_file():
        return cover_from_dict(_json(spec))
    return parse_cover(spec)


# -- gales -------------------------------------------------------------------------


def gale_to_dict(gale: SupergaleTable) -> dict:
    entries = sorted(gale.entries.items(), key=lambda kv: (len(kv[0]), kv[0]))
    return {
        "cover": gale.cover.to_dict(),
        "s": str(gale.s),
        "extension": gale.extension,
        "mode": "exact" if gale.exact else "float",
        "entries": [[a, gale.format_value(v)] for a, v in entries],
    }


def gale_from_dict(d: dict, cover: NiceCover | None = None, exact: bool | None = None) -> SupergaleTable:
    if not isinstance(d, dict) or "s" not in d or "entries" not in d:
        raise MalformedGaleError("gale record needs 's' and 'entries'")
    if "cover" in d:
        own = cover_from_dict(d["cover"])
        if cover is not None and own != cover:
            raise MalformedGaleError(f"gale file is for {own}, not {cover}")
        cover = own
    if cover is None:
        raise MalformedGaleError("no cover given and the gale record names none")
    s = _exponent(str(d["s"]))
    if exact is None and d.get("mode") == "float":
        exact = False
    arith = make_arith(cover.base, s, exact=exact)
    pairs = []
    for item in d["entries"]:
        if not isinstance(item, (list, tuple)) or len(item) != 2:
            raise MalformedGaleError(f"bad gale entry {item!r}")
        addr, value = item
        pairs.append((str(addr), arith.value(str(value))))
    return SupergaleTable(cover, s, pairs, d.get("extension", "zero"), arith=arith, meta=d.get("meta"))


def read_gale(path, cover: NiceCover | None = None, exact: bool | None = None) -> SupergaleTable:
    return gale_from_dict(_json(path), cover, exact)


def write_gale(path, gale: SupergaleTable) -> None:
    Path(path).write_text(dumps(gale_to_dict(gale)))


# -- antichains --------------------------------------------------------------------


def parse_antichain(text: str) -> Antichain:
    """A JSON string array, or one address per line (``#`` comments allowed).

    A line holding only ``""`` stands for the root.
    """
    stripped = text.strip()
    if stripped.startswith("["):
        items = json.loads(stripped)
        if not all(isinstance(a, str) for a in items):
            raise FormatError("antichain array must hold strings")
        return Antichain(items)
    addrs = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        addrs.append("" if line == '""' else line)
    return Antichain(addrs)


def read_antichain(path) -> Antichain:
    try:
        return parse_antichain(_read(path))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None


def antichain_to_list(antichain: Iterable[str]) -> list[str]:
    return sorted(antichain, key=lambda a: (len(a), a))


def write_antichain(path, antichain: Iterable[str]) -> None:
    Path(path).write_text(dumps(antichain_to_list(antichain)))


# -- set descriptions ----------------------------------------------------------------


def read_set(path, cover: NiceCover | None = None) -> SetDescription:
    return SetDescription.from_dict(_json(path), cover)


def write_set(path, desc: SetDescription, cover: NiceCover | None = None) -> None:
    d = desc.to_dict()
    if cover is not None:
        d["base"] = cover.alphabet_size
    Path(path).write_text(dumps(d))
