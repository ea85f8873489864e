"""Flat key-value configuration files with dotted section prefixes.

Format: one `section.key = value` per line, `#` comments, blank lines
ignored.  Values stay strings here; typed interpretation happens in the
scenario layer so that a metadata echo can be re-ingested verbatim.
"""

from .errors import ConfigError

__all__ = ["parse_config", "read_config", "format_config"]


def parse_config(text):
    """Parse config text into an ordered {dotted.key: value-string} dict."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or "." not in key:
            raise ConfigError(f"line {lineno}: key must look like 'section.name'")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def read_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def format_config(mapping):
    """Inverse of parse_config (modulo comments)."""
    return "".join(f"{key} = {value}\n" for key, value in mapping.items())
