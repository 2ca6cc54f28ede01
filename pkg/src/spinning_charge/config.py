"""Flat ``key = value`` run configuration.

One assignment per line, ``#`` starts a comment.  Vectors are comma
separated.  ``time.dt`` also accepts ``h/k`` (grid spacing over k).  Unknown
keys and malformed values raise :class:`ConfigError`.
"""

import hashlib
from pathlib import Path

from .charge import ChargeProfile, check_fits
from .errors import ConfigError
from .external import ExternalField
from .grid import GridSpec
from .simulation import SimConfig


def _vec(s):
    parts = [p for p in s.replace(" ", "").split(",") if p]
    if len(parts) != 3:
        raise ValueError(f"expected 3 comma-separated numbers, got {s!r}")
    return tuple(float(p) for p in parts)


def _floats(s):
    return tuple(float(p) for p in s.replace(" ", "").split(",") if p)


def _bool(s):
    v = s.strip().lower()
    if v in ("on", "true", "yes", "1"):
        return True
    if v in ("off", "false", "no", "0"):
        return False
    raise ValueError(f"expected on/off, got {s!r}")


def _dt(s):
    s = s.strip()
    if s.startswith("h/"):
        return ("h/", float(s[2:]))
    return float(s)


SCHEMA = {
    "grid.n": int,
    "grid.length": float,
    "charge.kind": str,
    "charge.sigma": float,
    "external.kind": str,
    "external.b": float,
    "external.axis": int,
    "external.params": _floats,
    "body.q0": _vec,
    "body.v0": _vec,
    "body.omega0": _vec,
    "body.self_field": _bool,
    "time.dt": _dt,
    "time.t_end": float,
    "output.stride": int,
    "output.prefix": str,
    "output.snapshot_every": int,
    "output.save_trajectory": _bool,
    "init.zero_field": _bool,
    "threads": int,
    "debug.force_scale": float,
    "debug.torque_scale": float,
    "debug.current_scale": float,
}


def schema_hash():
    text = "\n".join(f"{k}:{getattr(v, '__name__', str(v))}" for k, v in sorted(SCHEMA.items()))
    return hashlib.sha256(text.encode()).hexdigest()[:12]


def parse_lines(lines, source="<config>"):
    """Dict of raw string values; later assignments override earlier ones."""
    raw = {}
    for no, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{no}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"{source}:{no}: unknown key {key!r}")
        raw[key] = value
    return raw


def parse_overrides(items):
    return parse_lines(items, source="--set")


def build_config(raw):
    """SimConfig from a dict of raw string values."""
    vals = {}
    for key, text in raw.items():
        try:
            vals[key] = SCHEMA[key](text)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {text!r} ({exc})") from None
    try:
        grid = GridSpec(vals.get("grid.n", 32), vals.get("grid.length", 16.0))
        charge = ChargeProfile(vals.get("charge.kind", "gaussian"), vals.get("charge.sigma", 1.0))
        check_fits(charge, grid)
        external = ExternalField(vals.get("external.kind", "zero"), vals.get("external.b", 0.0),
                                 vals.get("external.axis", 2), vals.get("external.params", ()))
        dt = vals.get("time.dt", ("h/", 4.0))
        if isinstance(dt, tuple):
            dt = grid.h / dt[1]
        return SimConfig(
            grid=grid, charge=charge, external=external,
            q0=vals.get("body.q0", (0.0, 0.0, 0.0)),
            v0=vals.get("body.v0", (0.0, 0.0, 0.0)),
            omega0=vals.get("body.omega0", (0.0, 0.0, 0.0)),
            self_field=vals.get("body.self_field", True),
            dt=dt, t_end=vals.get("time.t_end", 5.0),
            stride=vals.get("output.stride", 1),
            zero_field_start=vals.get("init.zero_field", False),
            output_prefix=vals.get("output.prefix"),
            snapshot_every=vals.get("output.snapshot_every", 0),
            save_trajectory=vals.get("output.save_trajectory", False),
            threads=vals.get("threads", 0),
            force_scale=vals.get("debug.force_scale", 1.0),
            torque_scale=vals.get("debug.torque_scale", 1.0),
            current_scale=vals.get("debug.current_scale", 1.0),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path, overrides=()):
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    raw = parse_lines(path.read_text().splitlines(), source=str(path))
    raw.update(parse_overrides(overrides))
    return build_config(raw)
