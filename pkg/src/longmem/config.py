"""Flat key-value configuration files and bit-faithful JSON output.

Grammar: one ``key = value`` per line; ``#`` starts a comment; blank lines are
ignored; list values are comma separated and may be empty. Model keys are
``order.p``, ``order.q``, ``theta.delta``, ``theta.ar``, ``theta.ma`` and
``sigma2``. Monte Carlo files add ``n_grid``, ``replications``, ``law``,
``df``, ``estimators``, ``master_seed``, ``diagnostics`` and ``simulator``.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .errors import ContractError
from .model import ModelSpec, ParamVector

MODEL_KEYS = ("order.p", "order.q", "theta.delta", "theta.ar", "theta.ma", "sigma2")
MC_KEYS = ("n_grid", "replications", "law", "df", "estimators", "master_seed",
           "diagnostics", "simulator")


def parse_config(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ContractError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ContractError(f"line {lineno}: missing key")
        if key in out:
            raise ContractError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def read_config(path) -> dict:
    try:
        with open(path) as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ContractError(f"cannot read config {path}: {exc}") from None


def parse_list(value: str, cast=float) -> list:
    value = value.strip()
    if not value:
        return []
    try:
        return [cast(v.strip()) for v in value.split(",")]
    except ValueError as exc:
        raise ContractError(f"bad list {value!r}: {exc}") from None


def _number(mapping, key, cast=float, default=None):
    if key not in mapping:
        if default is None:
            raise ContractError(f"missing key {key!r}")
        return default
    try:
        return cast(mapping[key])
    except ValueError:
        raise ContractError(f"key {key!r}: cannot parse {mapping[key]!r}") from None


def spec_from_mapping(mapping: dict) -> ModelSpec:
    delta = _number(mapping, "theta.delta")
    ar = parse_list(mapping.get("theta.ar", ""))
    ma = parse_list(mapping.get("theta.ma", ""))
    if "order.p" in mapping and _number(mapping, "order.p", int) != len(ar):
        raise ContractError("order.p does not match the number of theta.ar values")
    if "order.q" in mapping and _number(mapping, "order.q", int) != len(ma):
        raise ContractError("order.q does not match the number of theta.ma values")
    sigma2 = _number(mapping, "sigma2", float, 1.0)
    return ModelSpec(ParamVector(delta, tuple(ar), tuple(ma)), sigma2)


def spec_to_config(spec: ModelSpec) -> str:
    th = spec.theta
    fmt = lambda vals: ", ".join(format(v, ".17g") for v in vals)  # noqa: E731
    return "\n".join([
        f"order.p = {len(th.ar)}",
        f"order.q = {len(th.ma)}",
        f"theta.delta = {th.delta:.17g}",
        f"theta.ar = {fmt(th.ar)}",
        f"theta.ma = {fmt(th.ma)}",
        f"sigma2 = {spec.sigma2:.17g}",
    ]) + "\n"


def mc_config_from_mapping(mapping: dict):
    from .montecarlo import MonteCarloConfig
    from .simulation import InnovationLaw

    unknown = set(mapping) - set(MODEL_KEYS) - set(MC_KEYS)
    if unknown:
        raise ContractError(f"unknown config keys: {sorted(unknown)}")
    spec = spec_from_mapping(mapping)
    kind = mapping.get("law", "gaussian")
    df = _number(mapping, "df", float) if "df" in mapping else None
    return MonteCarloConfig(
        spec0=spec,
        n_grid=tuple(parse_list(mapping.get("n_grid", "1024"), int)),
        replications=_number(mapping, "replications", int, 100),
        law=InnovationLaw(kind, df),
        estimators=tuple(parse_list(mapping.get("estimators", "css"), str)),
        master_seed=_number(mapping, "master_seed", int, 0),
        diagnostics=tuple(parse_list(mapping.get("diagnostics", ""), str)),
        simulator=mapping.get("simulator", "auto"),
    )


# --------------------------------------------------------------------------
# JSON with 17 significant digits


def _encode(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return format(v, ".17g") if math.isfinite(v) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """JSON text with every float written to 17 significant digits; NaN becomes null."""
    return _encode(obj)
