"""Experiment configuration: strict ``key = value`` files with ``[section]`` headers.

Keys may sit before any header (they belong to ``[general]``).  Every key is
known in advance, range-checked, and rejected when unknown or repeated.
Absent keys take the documented defaults; :func:`serialize` writes the
canonical form, and ``parse_config(serialize(c)) == c``.

Lists are comma-separated.  ``mu = auto`` lets each command pick its heights
(the curve ``delta = mu e^{-mu}`` for families, 6 elsewhere) and
``tol = auto`` lets families choose a floor-aware tolerance.
"""
from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, fields

from .expr import ExprError, parse_expr

__all__ = ["COMMANDS", "ConfigError", "ExperimentConfig", "parse_config", "serialize", "load_config"]

COMMANDS = ("identities", "profile", "solve", "family", "trend", "pohozaev")
SECTION = "general"


class ConfigError(ValueError):
    """Invalid configuration; ``line`` and ``col`` are 1-based when known."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        where = "" if line is None else f"line {line}" + ("" if col is None else f", column {col}")
        super().__init__(f"{where}: {message}" if where else message)
        self.line, self.col = line, col


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment settings (see :data:`DOCS` for each key)."""

    command: str = "solve"
    N: tuple = (1,)
    h: str = "1"
    mu: tuple | None = None
    p: float = 0.0
    delta: tuple = (0.2, 0.1, 0.05)
    tau: float = 1.0
    R: float = 4.0
    n_r: int = 96
    n_t: int = 256
    core_factor: float = 1.0
    tol: float | None = None
    max_iter: int = 40
    perturbation: float = 0.0
    seed: int = 0
    radius: tuple = (0.1, 0.3)
    center_index: int = 1
    directions: int = 8
    extent: float = 3.0
    samples: int = 101
    family_dir: str = ""
    balance: bool = False
    ramp: int = 4
    svg: bool = False

    @property
    def single_N(self) -> int:
        if len(self.N) != 1:
            raise ConfigError(f"command {self.command!r} needs a single N, got {list(self.N)}")
        return self.N[0]

    def heights(self, default=(6.0,)) -> tuple:
        return self.mu if self.mu is not None else tuple(default)

    @property
    def newton_tol(self) -> float:
        return 1e-10 if self.tol is None else self.tol


DOCS = {
    "command": "one of " + ", ".join(COMMANDS),
    "N": "vortex orders, integers in [0, 16]",
    "h": "coefficient H(x1, x2), a closed-form expression positive at the origin",
    "mu": "heights in [0.5, 40], or auto",
    "p": "real root shift, |p| < 1",
    "delta": "strictly decreasing scales in (0, 1)",
    "tau": "radius of the original disk, > 0",
    "R": "solve-domain radius in (1, 1e4]",
    "n_r": "radial nodes in [16, 4096]",
    "n_t": "angular nodes, a power of two in [16, 8192]",
    "core_factor": "grid core width in bubble core widths, in (0, 100]",
    "tol": "Newton tolerance in (0, 1e-2], or auto",
    "max_iter": "Newton iterations in [1, 1000]",
    "perturbation": "amplitude of the random initial perturbation, >= 0",
    "seed": "random seed, integer >= 0",
    "radius": "Pohozaev radii, each > 0",
    "center_index": "Pohozaev core index in [0, N]",
    "directions": "number of Pohozaev directions in [1, 64]",
    "extent": "half-width of the profile sample square, > 0",
    "samples": "profile samples per axis in [2, 2001]",
    "family_dir": "directory of family checkpoints for trend (default: the output directory)",
    "balance": "family members carry a linear boundary lift with pinned cores (true/false)",
    "ramp": "homotopy steps towards H for balanced families, in [1, 64]",
    "svg": "also write SVG plots (true/false)",
}


def _float(text):
    v = float(text)
    if not math.isfinite(v):
        raise ValueError("must be finite")
    return v


def _int(text):
    if not re.fullmatch(r"[+-]?\d+", text.strip()):
        raise ValueError("must be an integer")
    return int(text)


def _list(conv):
    def parse(text):
        items = [t.strip() for t in text.split(",")]
        if not items or any(not t for t in items):
            raise ValueError("must be a comma-separated list")
        return tuple(conv(t) for t in items)
    return parse


def _auto(conv):
    def parse(text):
        return None if text.strip().lower() == "auto" else conv(text)
    return parse


def _bool(text):
    t = text.strip().lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ValueError("must be true or false")


def _expr(text):
    parse_expr(text)
    return text.strip()


PARSERS = {
    "command": str.strip, "N": _list(_int), "h": _expr, "mu": _auto(_list(_float)),
    "p": _float, "delta": _list(_float), "tau": _float, "R": _float, "n_r": _int,
    "n_t": _int, "core_factor": _float, "tol": _auto(_float), "max_iter": _int,
    "perturbation": _float, "seed": _int, "radius": _list(_float), "center_index": _int,
    "directions": _int, "extent": _float, "samples": _int, "family_dir": str.strip,
    "balance": _bool, "ramp": _int, "svg": _bool,
}


def _check(cfg: ExperimentConfig) -> list[tuple[str, str]]:
    """Return ``(key, problem)`` pairs for every range violation."""
    bad = []

    def need(key, ok, bound):
        if not ok:
            bad.append((key, f"{key} must satisfy {bound}"))

    need("command", cfg.command in COMMANDS, "one of " + ", ".join(COMMANDS))
    need("N", all(0 <= n <= 16 for n in cfg.N), "0 <= N <= 16")
    if cfg.mu is not None:
        need("mu", all(0.5 <= m <= 40 for m in cfg.mu), "0.5 <= mu <= 40")
    need("p", abs(cfg.p) < 1, "|p| < 1")
    need("delta", all(0 < d < 1 for d in cfg.delta), "0 < delta < 1")
    need("delta", all(b < a for a, b in zip(cfg.delta, cfg.delta[1:])), "strictly decreasing")
    need("tau", cfg.tau > 0, "tau > 0")
    need("R", 1 < cfg.R <= 1e4, "1 < R <= 1e4")
    need("n_r", 16 <= cfg.n_r <= 4096, "16 <= n_r <= 4096")
    need("n_t", 16 <= cfg.n_t <= 8192 and cfg.n_t & (cfg.n_t - 1) == 0,
         "a power of two in [16, 8192]")
    need("core_factor", 0 < cfg.core_factor <= 100, "0 < core_factor <= 100")
    if cfg.tol is not None:
        need("tol", 0 < cfg.tol <= 1e-2, "0 < tol <= 1e-2")
    need("max_iter", 1 <= cfg.max_iter <= 1000, "1 <= max_iter <= 1000")
    need("perturbation", cfg.perturbation >= 0, "perturbation >= 0")
    need("seed", cfg.seed >= 0, "seed >= 0")
    need("radius", all(r > 0 for r in cfg.radius), "radius > 0")
    need("center_index", 0 <= cfg.center_index <= max(cfg.N), "0 <= center_index <= N")
    need("directions", 1 <= cfg.directions <= 64, "1 <= directions <= 64")
    need("extent", cfg.extent > 0, "extent > 0")
    need("samples", 2 <= cfg.samples <= 2001, "2 <= samples <= 2001")
    need("ramp", 1 <= cfg.ramp <= 64, "1 <= ramp <= 64")
    return bad


def _locate(lines: list[str], key: str, nth: int = 0) -> tuple[int | None, int | None]:
    """1-based line and column of the ``nth`` occurrence of ``key``."""
    pat = re.compile(rf"^(\s*){re.escape(key)}\s*[=:]", re.IGNORECASE)
    for i, ln in enumerate(lines):
        m = pat.match(ln)
        if m:
            if nth == 0:
                return i + 1, len(m.group(1)) + 1
            nth -= 1
    return None, None


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate configuration text.

    Raises
    ------
    ConfigError
        Syntax errors, unknown or duplicate keys, unparsable values and range
        violations, with the line (and column where meaningful) of the key.
    """
    lines = text.splitlines()
    body = text if re.match(r"\s*\[", text) else f"[{SECTION}]\n" + text
    offset = 0 if body is text else 1
    cp = configparser.ConfigParser(interpolation=None, strict=True,
                                   comment_prefixes=("#", ";"), inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(body)
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key {exc.option!r}", (exc.lineno or 0) - offset or None) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section {exc.section!r}",
                          (exc.lineno or 0) - offset or None) from None
    except configparser.MissingSectionHeaderError as exc:  # pragma: no cover - header injected
        raise ConfigError("missing section header", exc.lineno) from None
    except configparser.ParsingError as exc:
        lineno, _ = exc.errors[0]
        raise ConfigError("expected 'key = value'", lineno - offset) from None
    known = {f.name: f for f in fields(ExperimentConfig)}
    values = {}
    for section in cp.sections():
        for key, raw in cp.items(section):
            line, col = _locate(lines, key)
            if key not in known:
                raise ConfigError(f"unknown key {key!r} in [{section}]", line, col)
            if key in values:
                raise ConfigError(f"key {key!r} given in more than one section",
                                  *_locate(lines, key, nth=1))
            if "\n" in raw:
                raise ConfigError(f"continuation lines are not allowed (value of {key!r})",
                                  None if line is None else line + 1)
            vcol = None
            if line is not None:
                vcol = lines[line - 1].find(raw.strip(), col + len(key)) + 1 or None
            try:
                values[key] = PARSERS[key](raw)
            except ExprError as exc:
                ecol = vcol + exc.col - 1 if (vcol and exc.col) else vcol
                msg = str(exc).split(": ", 1)[-1] if exc.col else str(exc)
                raise ConfigError(f"{key}: {msg}", line, ecol) from None
            except ValueError as exc:
                raise ConfigError(f"{key}: {exc}", line, vcol) from None
    cfg = ExperimentConfig(**values)
    bad = _check(cfg)
    if bad:
        key, msg = bad[0]
        line, col = _locate(lines, key)
        raise ConfigError(msg, line, col)
    return cfg


def _fmt(v) -> str:
    if v is None:
        return "auto"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ", ".join(_fmt(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def serialize(cfg: ExperimentConfig) -> str:
    """Canonical text: one ``[general]`` section, keys in declaration order."""
    out = [f"[{SECTION}]"]
    for f in fields(cfg):
        out.append(f"{f.name} = {_fmt(getattr(cfg, f.name))}")
    return "\n".join(out) + "\n"


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
