"""Plain-text ``key=value`` configuration with typed defaults; command-line values take precedence."""

from __future__ import annotations

DEFAULTS = {
    "tol": 1e-10,
    "r0": 2.0,
    "nu": 0.1,
    "depth": 60,
    "steps_per_halving": 8,
    "g_min": 1e-6,
    "max_len": 7,
    "word_len": 10,
    "cloud_len": 16,
    "max_iter": 200,
    "seed": 0,
}


class ConfigError(ValueError):
    pass


def parse_config(text: str) -> dict:
    """Known keys only; blank lines and lines starting with '#' are ignored."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        kind = type(DEFAULTS[key])
        try:
            out[key] = kind(val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {val!r}") from exc
    return out


def load_config(path) -> dict:
    with open(path) as fh:
        return parse_config(fh.read())


def resolve(flags: dict, config: dict) -> dict:
    """DEFAULTS overridden by the config file, overridden by flags that were given (not None)."""
    out = dict(DEFAULTS)
    out.update(config)
    out.update({k: v for k, v in flags.items() if v is not None})
    return out
