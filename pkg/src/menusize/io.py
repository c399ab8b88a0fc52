"""JSON interchange for menus, distributions and compound menus.

Formats::

    menu      {"n": 2, "entries": [{"alloc": [1, 0], "price": 3.5}, ...]}
    product   {"items": [{"values": [...], "probs": [...]}, ...]}
    joint     {"types": [[...], ...], "probs": [...]}
    compound  {"n": 4, "subauctions": [{"items": [0, 2], "menu": {...}}, ...]}

The zero entry may be omitted from a menu file. Floats are written with
Python's shortest round-trip representation, so re-reading gives identical
doubles. Files are written to a temporary sibling and renamed into place.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Any, Union

import numpy as np

from menusize.core import Menu
from menusize.dist import JointDist, ProductDist, SingleDist
from menusize.errors import MenuSizeError
from menusize.srev import CompoundMenu


class FormatError(MenuSizeError, ValueError):
    """Input file does not match the expected interchange format."""


def _plain(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_text_atomic(path: Union[str, Path], text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: Union[str, Path], obj: Any) -> None:
    write_text_atomic(path, dumps(obj))


def read_json(path: Union[str, Path]) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from exc


def menu_to_dict(M: Menu) -> dict:
    return {"n": M.n, "entries": [{"alloc": a, "price": p}
                                  for a, p in zip(M.allocs.tolist(), M.prices.tolist())]}


def menu_from_dict(d: dict) -> Menu:
    try:
        entries = d["entries"]
        n = int(d.get("n", len(entries[0]["alloc"]) if entries else 0))
        if n < 1:
            raise FormatError("menu needs n >= 1")
        allocs = np.array([e["alloc"] for e in entries], dtype=float).reshape(len(entries), n)
        prices = np.array([e["price"] for e in entries], dtype=float)
        return Menu.from_arrays(allocs, prices)
    except (KeyError, TypeError, IndexError) as exc:
        raise FormatError(f"malformed menu: {exc!r}") from exc


def single_to_dict(d: SingleDist) -> dict:
    return {"values": d.values.tolist(), "probs": d.probs.tolist()}


def dist_to_dict(F: Union[ProductDist, JointDist]) -> dict:
    if isinstance(F, ProductDist):
        return {"items": [single_to_dict(d) for d in F.items]}
    return {"types": F.types.tolist(), "probs": F.probs.tolist()}


def dist_from_dict(d: dict) -> Union[ProductDist, JointDist]:
    """Product if the document has ``items``; joint if it has ``types``."""
    try:
        if "items" in d:
            return ProductDist(tuple(SingleDist(it["values"], it["probs"]) for it in d["items"]))
        if "types" in d:
            return JointDist(d["types"], d["probs"])
        if "values" in d:
            return ProductDist((SingleDist(d["values"], d["probs"]),))
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed distribution: {exc!r}") from exc
    raise FormatError("distribution needs 'items' (product) or 'types' (joint)")


def compound_to_dict(C: CompoundMenu) -> dict:
    return {"n": C.n, "subauctions": [{"items": list(items), "menu": menu_to_dict(m)}
                                      for items, m in C.subauctions]}


def compound_from_dict(d: dict) -> CompoundMenu:
    try:
        subs = tuple((tuple(s["items"]), menu_from_dict(s["menu"])) for s in d["subauctions"])
        n = int(d.get("n", 1 + max((i for items, _ in subs for i in items), default=-1)))
        return CompoundMenu(n, subs)
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed compound menu: {exc!r}") from exc


def load_menu(path) -> Menu:
    return menu_from_dict(read_json(path))


def load_dist(path) -> Union[ProductDist, JointDist]:
    return dist_from_dict(read_json(path))


def load_any_menu(path) -> Union[Menu, CompoundMenu]:
    d = read_json(path)
    return compound_from_dict(d) if "subauctions" in d else menu_from_dict(d)
