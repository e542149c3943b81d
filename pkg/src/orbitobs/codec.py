"""JSON encoding of reports, driven by dataclass type hints so that
decoding gives back an equal in-memory value."""
from __future__ import annotations

import dataclasses
import types
import typing
from fractions import Fraction

from . import adelic, arith, elliptic, order, power
from .arith import as_rat, rat_str

SCHEMA_VERSION = 1

_REGISTRY: dict[str, type] = {}


def register(*classes):
    for cls in classes:
        _REGISTRY[cls.__name__] = cls
    return classes[0] if len(classes) == 1 else classes


def _register_module(module):
    for value in vars(module).values():
        if dataclasses.is_dataclass(value) and isinstance(value, type) \
                and value.__module__ == module.__name__:
            register(value)


for _m in (arith, order, power, adelic, elliptic):
    _register_module(_m)


def encode(obj):
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, Fraction):
        return rat_str(obj)
    if dataclasses.is_dataclass(obj):
        out = {"kind": type(obj).__name__}
        for f in dataclasses.fields(obj):
            out[f.name] = encode(getattr(obj, f.name))
        return out
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    raise TypeError(f"cannot encode {type(obj).__name__}")


def _loose(value):
    # untyped tuples (curve points) hold ints over F_p, rationals over Q
    if isinstance(value, str):
        return as_rat(value)
    if isinstance(value, list):
        return tuple(_loose(v) for v in value)
    return value


def decode(data, hint=None):
    if hint is None:
        if isinstance(data, dict) and "kind" in data:
            return _decode_dataclass(data, _REGISTRY[data["kind"]])
        return _loose(data)
    origin = typing.get_origin(hint)
    args = typing.get_args(hint)
    if hint is type(None):
        return None
    if origin is typing.Union or origin is types.UnionType:
        if data is None:
            return None
        options = [a for a in args if a is not type(None)]
        if isinstance(data, dict) and "kind" in data:
            return _decode_dataclass(data, _REGISTRY[data["kind"]])
        if len(options) == 1:
            return decode(data, options[0])
        return _loose(data)
    if hint is Fraction:
        return as_rat(data)
    if hint in (int, str, bool):
        return data
    if hint is tuple:
        return _loose(data)
    if origin is tuple:
        if len(args) == 2 and args[1] is Ellipsis:
            return tuple(decode(v, args[0]) for v in data)
        return tuple(decode(v, a) for v, a in zip(data, args))
    if origin is dict:
        kt, vt = args
        return {decode(int(k) if kt is int else k, kt): decode(v, vt) for k, v in data.items()}
    if dataclasses.is_dataclass(hint):
        return _decode_dataclass(data, hint)
    return _loose(data)


def _decode_dataclass(data: dict, cls: type):
    if "kind" in data:
        cls = _REGISTRY[data["kind"]]
    hints = typing.get_type_hints(cls)
    kwargs = {f.name: decode(data[f.name], hints[f.name])
              for f in dataclasses.fields(cls) if f.name in data}
    return cls(**kwargs)


def envelope(command: str, report, **extra) -> dict:
    return {"schema_version": SCHEMA_VERSION, "command": command, **extra,
            "report": encode(report)}


def from_envelope(data: dict):
    return decode(data["report"])
