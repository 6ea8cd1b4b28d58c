"""Canonical JSON and a small typed codec for the engine's dataclasses.

Canonical form: keys sorted, no insignificant whitespace, UTF-8, floats in
Python's shortest round-trip repr, NaN/Infinity rejected.
"""

from __future__ import annotations

import dataclasses
import enum
import functools
import hashlib
import json
import math
import types
import typing
from typing import Any

from .errors import ParseError


def canonical_json(obj: Any) -> str:
    return dumps_canonical(to_jsonable(obj))


def dumps_canonical(doc: Any) -> str:
    """Canonical text of a document that is already plain JSON data."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=False)


def canonical_bytes(obj: Any) -> bytes:
    return canonical_json(obj).encode("utf-8")


def sha256_hex(data: bytes | str) -> str:
    if isinstance(data, str):
        data = data.encode("utf-8")
    return hashlib.sha256(data).hexdigest()


def digest(obj: Any) -> str:
    """SHA-256 (lowercase hex) of the canonical serialization of ``obj``."""
    return sha256_hex(canonical_bytes(obj))


def _reject_constant(name):
    raise ValueError(f"non-finite number {name} is not allowed")


def loads(data: bytes | str) -> Any:
    """Parse JSON text strictly, turning every failure into :class:`ParseError`."""
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"document is not valid UTF-8: {exc.reason}") from None
    try:
        return json.loads(data, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg}", line=exc.lineno) from None
    except ValueError as exc:
        raise ParseError(f"malformed JSON: {exc}") from None
    except RecursionError:
        raise ParseError("malformed JSON: nesting too deep") from None


def to_jsonable(obj: Any) -> Any:
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, dict):
        return {_key(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (frozenset, set)):
        return sorted(to_jsonable(v) for v in obj)
    return obj


def _key(k: Any) -> str:
    if isinstance(k, enum.Enum):
        return str(k.value)
    if isinstance(k, str):
        return k
    raise TypeError(f"unsupported mapping key {k!r}")


@functools.lru_cache(maxsize=None)
def _shape(tp: Any) -> tuple[Any, tuple]:
    return typing.get_origin(tp), typing.get_args(tp)


@functools.lru_cache(maxsize=None)
def _is_dataclass_type(tp: Any) -> bool:
    return dataclasses.is_dataclass(tp)


@functools.lru_cache(maxsize=None)
def _dc_fields(cls: type) -> tuple[tuple[str, Any, bool], ...]:
    """(name, type hint, required) for each field of a dataclass."""
    hints = typing.get_type_hints(cls)
    return tuple(
        (f.name, hints[f.name], f.default is dataclasses.MISSING and f.default_factory is dataclasses.MISSING)
        for f in dataclasses.fields(cls)
    )


def from_jsonable(tp: Any, data: Any, path: str = "$") -> Any:
    """Rebuild a value of type ``tp`` from parsed JSON.

    Raises :class:`ParseError` naming the JSON path of the first mismatch.
    Dataclass fields with defaults may be omitted.
    """
    if tp is bool:
        if not isinstance(data, bool):
            raise ParseError("expected boolean", path=path)
        return data
    if tp is int:
        if isinstance(data, bool) or not isinstance(data, int):
            raise ParseError("expected integer", path=path)
        return data
    if tp is float:
        if isinstance(data, bool) or not isinstance(data, (int, float)):
            raise ParseError("expected number", path=path)
        try:
            value = float(data)
        except OverflowError:
            raise ParseError("number out of range", path=path) from None
        if not math.isfinite(value):
            raise ParseError("number out of range", path=path)
        return value
    if tp is str:
        if not isinstance(data, str):
            raise ParseError("expected string", path=path)
        return data
    origin, args = _shape(tp)

    if tp is Any:
        return data
    if origin in (typing.Union, types.UnionType):
        if data is None and type(None) in args:
            return None
        inner = [a for a in args if a is not type(None)]
        if len(inner) == 1:
            return from_jsonable(inner[0], data, path)
        for a in inner:
            try:
                return from_jsonable(a, data, path)
            except ParseError:
                continue
        raise ParseError(f"value does not match any of {inner}", path=path)
    if tp is type(None):
        if data is not None:
            raise ParseError("expected null", path=path)
        return None
    if _is_dataclass_type(tp):
        if not isinstance(data, dict):
            raise ParseError(f"expected object for {tp.__name__}", path=path)
        kwargs = {}
        known = set()
        for name, hint, required in _dc_fields(tp):
            known.add(name)
            if name in data:
                kwargs[name] = from_jsonable(hint, data[name], f"{path}.{name}")
            elif required:
                raise ParseError(f"missing required field '{name}'", path=path)
        extra = sorted(set(data) - known)
        if extra:
            raise ParseError(f"unknown field(s) {extra}", path=path)
        try:
            return tp(**kwargs)
        except ParseError:
            raise
        except (ValueError, TypeError) as exc:
            raise ParseError(str(exc), path=path) from None
    if isinstance(tp, type) and issubclass(tp, enum.Enum):
        try:
            return tp(data)
        except (ValueError, TypeError):
            allowed = [m.value for m in tp]
            raise ParseError(f"{data!r} is not one of {allowed}", path=path) from None
    if origin in (list, tuple, frozenset):
        if not isinstance(data, list):
            raise ParseError("expected array", path=path)
        if origin is tuple and args and args[-1] is not Ellipsis:
            if len(data) != len(args):
                raise ParseError(f"expected array of length {len(args)}", path=path)
            return tuple(from_jsonable(a, v, f"{path}[{i}]") for i, (a, v) in enumerate(zip(args, data)))
        item = args[0] if args else Any
        items = [from_jsonable(item, v, f"{path}[{i}]") for i, v in enumerate(data)]
        if origin is tuple:
            return tuple(items)
        if origin is frozenset:
            return frozenset(items)
        return items
    if origin is dict:
        if not isinstance(data, dict):
            raise ParseError("expected object", path=path)
        kt, vt = args if args else (str, Any)
        return {
            from_jsonable(kt, k, f"{path}.<key>"): from_jsonable(vt, v, f"{path}.{k}")
            for k, v in data.items()
        }
    raise TypeError(f"unsupported type {tp!r}")
