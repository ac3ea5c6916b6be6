"""Run configuration read from an INI-style file.

Every key is optional; missing keys keep the defaults below, which are the
experimental values the simulations are calibrated against.

    [channel]
    e0 = 0.5
    ed = 0.015
    pd = 6.02e-6
    eta_d = 0.145
    alpha_db_per_km = 0.2

    [protocol]
    N_t = 1e12
    f_e = 1.16
    k_max = 15

    [fluctuation]
    epsilon = 1e-7
    n_delta = 5.3
    n_tau = 5.3
    lp_equality = false

    [optimizer]
    grid_points = 33
    ...

    [point]            ; parameters used by ``evaluate``
    mu_x = 0.055
    ...
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields, replace

from .channel import ChannelParams, ProtocolParams
from .fluctuation import FluctuationConfig
from .keyrate import F_E
from .optimizer import WARM_STARTS, OptimizerOptions
from .sources import K_MAX


class ConfigError(ValueError):
    pass


def _default_point() -> ProtocolParams:
    return ProtocolParams(pX_given_o=1.0, **WARM_STARTS[0])


@dataclass(frozen=True)
class RunConfig:
    channel: ChannelParams = field(default_factory=ChannelParams)
    fluct: FluctuationConfig = field(default_factory=FluctuationConfig)
    optimizer: OptimizerOptions = field(default_factory=OptimizerOptions)
    point: ProtocolParams = field(default_factory=_default_point)
    N_t: float = 1e12
    f_e: float = F_E
    k_max: int = K_MAX


def _coerce(template, raw: str):
    if isinstance(template, bool):
        v = raw.strip().lower()
        if v in ("1", "true", "yes", "on"):
            return True
        if v in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if isinstance(template, int):
        return int(float(raw)) if float(raw).is_integer() else int(raw)
    return float(raw)


def _section(cp, name: str, obj):
    if not cp.has_section(name):
        return obj
    known = {f.name: getattr(obj, f.name) for f in fields(obj)}
    updates = {}
    for key, raw in cp.items(name):
        if key not in known:
            raise ConfigError(f"[{name}] unknown key {key!r}")
        try:
            updates[key] = _coerce(known[key], raw)
        except ValueError as e:
            raise ConfigError(f"[{name}] {key}: {e}") from None
    try:
        return replace(obj, **updates)
    except (ValueError, TypeError) as e:
        raise ConfigError(f"[{name}] {e}") from None


def parse_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str  # keys are case-sensitive (N_t, pX_given_y)
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise ConfigError(str(e)) from None
    unknown = set(cp.sections()) - {"channel", "protocol", "fluctuation", "optimizer", "point"}
    if unknown:
        raise ConfigError(f"unknown sections: {sorted(unknown)}")
    cfg = RunConfig()
    fl = cfg.fluct
    if cp.has_section("fluctuation"):
        sec = cp["fluctuation"]
        if "epsilon" in sec and "n_delta" not in sec and "n_tau" not in sec:
            try:
                fl = FluctuationConfig.from_epsilon(float(sec["epsilon"]))
            except ValueError as e:
                raise ConfigError(f"[fluctuation] epsilon: {e}") from None
        fl = _section(cp, "fluctuation", fl)
    proto = {}
    if cp.has_section("protocol"):
        for key, raw in cp.items("protocol"):
            if key not in ("N_t", "f_e", "k_max"):
                raise ConfigError(f"[protocol] unknown key {key!r}")
            try:
                proto[key] = int(raw) if key == "k_max" else float(raw)
            except ValueError as e:
                raise ConfigError(f"[protocol] {key}: {e}") from None
    N_t = proto.get("N_t", cfg.N_t)
    out = RunConfig(
        channel=_section(cp, "channel", cfg.channel),
        fluct=fl,
        optimizer=_section(cp, "optimizer", cfg.optimizer),
        point=replace(_section(cp, "point", cfg.point), N_t=N_t),
        N_t=N_t,
        f_e=proto.get("f_e", cfg.f_e),
        k_max=proto.get("k_max", cfg.k_max),
    )
    if out.f_e < 1:
        raise ConfigError("[protocol] f_e must be >= 1")
    if out.k_max < 2:
        raise ConfigError("[protocol] k_max must be >= 2")
    return out


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    return parse_config(text)
