"""Run parameters from an INI-style file, overridden by command-line flags.

Example::

    [quadrature]
    tol = 1e-10
    panels = 80

    [legendre]
    grid = 4001

    [toric]
    C = 2.5
    window = 10

Keys outside a known section, or of the wrong type, are rejected.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, fields, replace

from .errors import ConfigError

ENV_VAR = "ENERGIA_CONFIG"


@dataclass(frozen=True)
class RunConfig:
    tol: float = 1e-8
    panels: int = 60
    grid: int = 2001
    toric_C: float | None = None
    fit_window: int = 10
    jobs: int = 1
    check: bool = True

    def override(self, **kwargs) -> RunConfig:
        """Replace fields whose new value is not ``None``."""
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})


# (section, key) -> (field, type)
_KEYS = {
    ("quadrature", "tol"): ("tol", float),
    ("quadrature", "panels"): ("panels", int),
    ("legendre", "grid"): ("grid", int),
    ("toric", "c"): ("toric_C", float),
    ("toric", "window"): ("fit_window", int),
    ("run", "jobs"): ("jobs", int),
    ("run", "check"): ("check", bool),
}


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _line_of(lines: list[str], section: str, key: str) -> int | None:
    current = None
    for i, raw in enumerate(lines, start=1):
        s = raw.strip()
        if s.startswith("[") and s.endswith("]"):
            current = s[1:-1].strip().lower()
        elif current == section and s.split("=", 1)[0].split(":", 1)[0].strip().lower() == key:
            return i
    return None


def load_config(path=None) -> RunConfig:
    """Read ``path`` (default: ``$ENERGIA_CONFIG``, else built-in defaults).

    Raises
    ------
    ConfigError
        On a syntax error, an unknown key, or a value of the wrong type; the
        message names the file and line.
    """
    if path is None:
        path = os.environ.get(ENV_VAR) or None
    if path is None:
        return RunConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    lines = text.splitlines()
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text, source=str(path))
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: expected a [section] header, got {exc.line.strip()!r}") from None
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ConfigError(f"{path}:{lineno}: cannot parse {line.strip()!r}") from None
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    values = {}
    for section in cp.sections():
        for key, raw in cp.items(section):
            where = _line_of(lines, section.lower(), key)
            loc = f"{path}:{where}" if where else str(path)
            spec = _KEYS.get((section.lower(), key))
            if spec is None:
                raise ConfigError(f"{loc}: unknown setting [{section}] {key}")
            name, typ = spec
            try:
                values[name] = _parse_bool(raw) if typ is bool else typ(raw)
            except ValueError:
                raise ConfigError(f"{loc}: {key} = {raw!r} is not a valid {typ.__name__}") from None
    cfg = RunConfig(**values)
    _validate(cfg, path)
    return cfg


def _validate(cfg: RunConfig, where) -> None:
    if not cfg.tol > 0:
        raise ConfigError(f"{where}: tol must be positive")
    if cfg.panels < 3:
        raise ConfigError(f"{where}: panels must be at least 3")
    if cfg.grid < 25:
        raise ConfigError(f"{where}: grid must be at least 25")
    if cfg.fit_window < 3:
        raise ConfigError(f"{where}: window must be at least 3")
    if cfg.jobs < 1:
        raise ConfigError(f"{where}: jobs must be at least 1")
    if cfg.toric_C is not None and not cfg.toric_C > 0:
        raise ConfigError(f"{where}: C must be positive")


__all__ = ["RunConfig", "load_config", "ENV_VAR", "CONFIG_FIELDS"]

CONFIG_FIELDS = tuple(f.name for f in fields(RunConfig))
