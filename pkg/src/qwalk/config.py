"""Parser for the keyword input files read by ``qw1d`` and ``qw2d``.

An input file is a whitespace-separated token stream.  Only tokens between
``BEGIN`` and ``END`` are interpreted as main-section keywords; everything
else is a comment, except the sub-sections ``BEGINBL ... ENDBL``,
``BEGINCOIN ... ENDCOIN`` and ``BEGINSTATE ... ENDSTATE``, which are
recognized anywhere in the file.  Keywords are uppercase and matched
case-sensitively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import coins as _coins
from . import links as _links
from .errors import ConfigError
from .lattice import LatticeSpec

MAIN_KEYWORDS = (
    "COIN", "STATE", "STEPS", "LATTYPE", "BLPERMANENT", "SCREEN", "DETECTORS",
    "EXPERIMENTS", "MIXTIME", "LATTSIZE", "BLPROB", "DTPROB", "CHECK", "SEED",
    "AFTERMEASURE", "LATTEXTRA",
)
SECTIONS = {"BEGINBL": "ENDBL", "BEGINCOIN": "ENDCOIN", "BEGINSTATE": "ENDSTATE"}
NOT_IN_1D = ("SCREEN", "BLPERMANENT", "DETECTORS")
CHECKS = {1: ("STATEPROB", "SYMMETRY"), 2: ("STATEPROB", "SYMMETRY", "XSYMMETRY", "YSYMMETRY")}
TOOL = {1: "qw1d", 2: "qw2d"}


@dataclass(frozen=True)
class SimulationConfig:
    dimension: int = 2
    lattice: str = "NATURAL"
    steps: int = 0
    lattsize: int | None = None
    extra: int = 1
    coin: str = "HADAMARD"
    coin_entries: tuple | None = None
    state: str = "HADAMARD"
    state_entries: tuple | None = None
    blpermanent: bool = False
    geometry: tuple = ()
    blprob: tuple | None = None
    dtprob: float | None = None
    detectors: tuple = ()
    experiments: int = 1
    mixtime: int | None = None
    screen: tuple | None = None
    checks: frozenset = frozenset()
    seed: int | None = None
    aftermeasure: int | None = None
    warnings: tuple = field(default=(), compare=False)

    def lattice_spec(self) -> LatticeSpec:
        if self.lattice == "CYCLE":
            if self.lattsize is None:
                raise ConfigError("LATTYPE CYCLE needs LATTSIZE to set the number of sites")
            size = self.lattsize
        else:
            size = self.lattsize if self.lattsize is not None else self.steps + self.extra
        return LatticeSpec(self.dimension, self.lattice, max(size, 0), self.extra)

    def coin_operator(self) -> _coins.CoinOperator:
        return _coins.build_coin(self.coin, self.dimension, self.coin_entries)

    def initial_state(self) -> _coins.StateSpec:
        return _coins.build_initial_state(self.state, self.dimension, self.state_entries)

    def permanent_topology(self, spec: LatticeSpec | None = None) -> _links.LinkTopology:
        spec = self.lattice_spec() if spec is None else spec
        if self.blpermanent and self.geometry:
            return _links.build_permanent_topology(self.geometry, spec)
        return _links.empty_topology(spec)


@dataclass(frozen=True)
class Diagnostic:
    level: str  # "error" or "warning"
    message: str

    def __str__(self):
        return f"{self.level}: {self.message}"


class _Tokens:
    def __init__(self, tokens, start=0, end=None):
        self.tokens = tokens
        self.pos = start
        self.end = len(tokens) if end is None else end

    def done(self) -> bool:
        return self.pos >= self.end

    def next(self, what: str) -> str:
        if self.done():
            raise ConfigError(f"unexpected end of input, expected {what}", self.pos)
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def int(self, what: str) -> int:
        tok = self.next(what)
        try:
            return int(tok)
        except ValueError:
            raise ConfigError(f"expected an integer for {what}, got {tok!r}", self.pos - 1) from None

    def float(self, what: str) -> float:
        tok = self.next(what)
        try:
            value = float(tok)
        except ValueError:
            raise ConfigError(f"expected a number for {what}, got {tok!r}", self.pos - 1) from None
        if not math.isfinite(value):
            raise ConfigError(f"{what} must be finite, got {tok!r}", self.pos - 1)
        return value

    def word(self, what: str, choices) -> str:
        tok = self.next(what)
        if tok not in choices:
            raise ConfigError(
                f"{what} must be one of {', '.join(choices)}, got {tok!r}", self.pos - 1)
        return tok


def _find_end(tokens, start, closer):
    for i in range(start, len(tokens)):
        if tokens[i] == closer:
            return i
    raise ConfigError(f"missing {closer}", start - 1)


def _parse_bl(ts: _Tokens) -> list:
    geometry = []
    while not ts.done():
        at = ts.pos
        cmd = ts.word("boundary command", ("LINE", "POINT"))
        if cmd == "LINE":
            args = tuple(ts.int("LINE coordinate") for _ in range(4))
            try:
                _links.segment_points(*args)
            except ConfigError as exc:
                raise ConfigError(str(exc), at) from None
        else:
            args = tuple(ts.int("POINT coordinate") for _ in range(2))
        geometry.append((cmd,) + args)
    return geometry


def _parse_coin(ts: _Tokens) -> list:
    values = []
    while not ts.done():
        values.append(ts.float("coin entry"))
    if len(values) % 2:
        raise ConfigError("coin entries need a real and an imaginary part each", ts.pos)
    return [complex(values[i], values[i + 1]) for i in range(0, len(values), 2)]


def _parse_state(ts: _Tokens, dimension: int) -> list:
    entries = []
    while not ts.done():
        coin = tuple(ts.int("state coin index") for _ in range(dimension))
        site = tuple(ts.int("state position") for _ in range(dimension))
        re = ts.float("state amplitude (real part)")
        im = ts.float("state amplitude (imaginary part)")
        entries.append((coin, site, complex(re, im)))
    return entries


def parse(text: str, dimension: int = 2) -> SimulationConfig:
    """Parse an input file for a ``dimension``-D walk into a SimulationConfig.

    Raises ConfigError for every syntax problem, with the offending token
    index.  Range and consistency checks live in ``validate``.
    """
    if dimension not in (1, 2):
        raise ConfigError(f"dimension must be 1 or 2, got {dimension}")
    tool = TOOL[dimension]
    tokens = text.split()
    values = {"dimension": dimension, "lattice": "LINE" if dimension == 1 else "NATURAL"}
    checks = set()
    warnings = []
    seen = {}
    sections = {}
    main_found = False
    in_main = False

    lattypes = ("LINE", "SEGMENT", "CYCLE") if dimension == 1 else ("DIAGONAL", "NATURAL")
    coin_kinds = ("HADAMARD", "CUSTOM") if dimension == 1 else _coins.COIN_KINDS

    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok in SECTIONS:
            end = _find_end(tokens, i + 1, SECTIONS[tok])
            if tok in sections:
                warnings.append(f"{tok} section repeated; the last one is used")
            sections[tok] = (i + 1, end)
            i = end + 1
            continue
        if not in_main:
            if tok == "BEGIN":
                if main_found:
                    raise ConfigError("more than one BEGIN ... END main section", i)
                main_found = in_main = True
            i += 1
            continue
        if tok == "END":
            in_main = False
            i += 1
            continue
        if tok not in MAIN_KEYWORDS:
            raise ConfigError(f"unknown keyword {tok!r} in the main section", i)
        if dimension == 1 and tok in NOT_IN_1D:
            raise ConfigError(f"{tok} is not recognized by {tool}", i)
        if tok in seen and tok != "CHECK":
            warnings.append(f"{tok} given more than once; the last value is used")
        seen[tok] = i
        ts = _Tokens(tokens, i + 1)
        if tok in ("COIN", "STATE"):
            kind = ts.next(f"{tok} option")
            if kind not in coin_kinds:
                if kind in _coins.COIN_KINDS:
                    raise ConfigError(f"{tok} {kind} is not recognized by {tool}", i + 1)
                raise ConfigError(
                    f"{tok} must be one of {', '.join(coin_kinds)}, got {kind!r}", i + 1)
            values["coin" if tok == "COIN" else "state"] = kind
        elif tok == "LATTYPE":
            kind = ts.next("LATTYPE option")
            if kind not in lattypes:
                if kind in ("LINE", "SEGMENT", "CYCLE", "DIAGONAL", "NATURAL"):
                    raise ConfigError(f"LATTYPE {kind} is not recognized by {tool}", i + 1)
                raise ConfigError(
                    f"LATTYPE must be one of {', '.join(lattypes)}, got {kind!r}", i + 1)
            values["lattice"] = kind
        elif tok == "STEPS":
            values["steps"] = ts.int("STEPS")
        elif tok == "LATTSIZE":
            if "STEPS" not in seen:
                raise ConfigError("LATTSIZE must be used after the STEPS keyword", i)
            values["lattsize"] = ts.int("LATTSIZE")
        elif tok == "LATTEXTRA":
            values["extra"] = ts.int("LATTEXTRA")
        elif tok == "BLPERMANENT":
            values["blpermanent"] = True
        elif tok == "SCREEN":
            values["screen"] = tuple(ts.int("SCREEN coordinate") for _ in range(4))
        elif tok == "DETECTORS":
            n = ts.int("number of detectors")
            if n < 0:
                raise ConfigError(f"number of detectors must be >= 0, got {n}", i + 1)
            values["detectors"] = tuple(
                tuple(ts.int("detector coordinate") for _ in range(dimension)) for _ in range(n))
        elif tok == "EXPERIMENTS":
            values["experiments"] = ts.int("EXPERIMENTS")
        elif tok == "MIXTIME":
            values["mixtime"] = ts.int("MIXTIME")
        elif tok == "BLPROB":
            values["blprob"] = tuple(ts.float("BLPROB probability") for _ in range(dimension))
        elif tok == "DTPROB":
            values["dtprob"] = ts.float("DTPROB probability")
        elif tok == "CHECK":
            checks.add(ts.word("CHECK option", CHECKS[dimension]))
        elif tok == "SEED":
            values["seed"] = ts.int("SEED")
        elif tok == "AFTERMEASURE":
            values["aftermeasure"] = ts.int("AFTERMEASURE")
        i = ts.pos
    if in_main:
        raise ConfigError("missing END for the main section", len(tokens))
    if not main_found:
        raise ConfigError("no BEGIN ... END main section found")

    if "LATTEXTRA" in seen and "LATTSIZE" in seen and seen["LATTEXTRA"] > seen["STEPS"]:
        raise ConfigError(
            "LATTEXTRA, STEPS and LATTSIZE must appear in that order "
            "(first LATTEXTRA, then STEPS and finally LATTSIZE)", seen["LATTEXTRA"])
    if "STEPS" not in seen:
        warnings.append("STEPS not given; no iterations will be performed")

    if "BEGINBL" in sections:
        start, end = sections["BEGINBL"]
        if dimension == 1:
            warnings.append("BEGINBL section ignored: qw1d has no permanent broken links")
        else:
            values["geometry"] = tuple(_parse_bl(_Tokens(tokens, start, end)))
    if "BEGINCOIN" in sections:
        values["coin_entries"] = tuple(_parse_coin(_Tokens(tokens, *sections["BEGINCOIN"])))
    if "BEGINSTATE" in sections:
        values["state_entries"] = tuple(
            _parse_state(_Tokens(tokens, *sections["BEGINSTATE"]), dimension))
    values["checks"] = frozenset(checks)
    values["warnings"] = tuple(warnings)
    return SimulationConfig(**values)


def validate(config: SimulationConfig) -> list:
    """Diagnostics for a parsed config; no ``error`` entries means it can run."""
    out = [Diagnostic("warning", w) for w in config.warnings]

    def error(msg):
        out.append(Diagnostic("error", msg))

    def warn(msg):
        out.append(Diagnostic("warning", msg))

    if config.steps < 0:
        error(f"STEPS must be >= 0, got {config.steps}")
    if config.extra < 0:
        error(f"LATTEXTRA must be >= 0, got {config.extra}")
    if config.experiments < 1:
        error(f"EXPERIMENTS must be >= 1, got {config.experiments}")
    if config.aftermeasure is not None and config.aftermeasure < 0:
        error(f"AFTERMEASURE must be >= 0, got {config.aftermeasure}")
    if config.seed is not None and config.seed < 0:
        error(f"SEED must be >= 0, got {config.seed}")
    if config.blprob is not None:
        for p in config.blprob:
            if not 0.0 <= p <= 1.0:
                error(f"BLPROB probabilities must lie in [0, 1], got {p}")
    if config.dtprob is not None and not 0.0 <= config.dtprob <= 1.0:
        error(f"DTPROB must lie in [0, 1], got {config.dtprob}")
    if config.mixtime is not None:
        if config.mixtime < config.steps:
            error(f"MIXTIME must be ≥ STEPS (the number of steps used to approximate the "
                  f"stationary distribution should be at least the number of simulated "
                  f"steps): MIXTIME {config.mixtime} < STEPS {config.steps}")
        if config.mixtime < 1:
            error(f"MIXTIME must be >= 1, got {config.mixtime}")
        closed = (config.lattice in ("SEGMENT", "CYCLE") or
                  (config.blpermanent and config.geometry))
        if not closed:
            warn("MIXTIME without a closed boundary: the stationary approximation "
                 "will be limited by the edge of the allocated lattice")
    if config.lattsize is not None and config.lattsize < 1:
        error(f"LATTSIZE must be >= 1, got {config.lattsize}")
    if config.lattice == "CYCLE" and config.lattsize is None:
        error("LATTYPE CYCLE needs LATTSIZE to set the number of sites")
    if (config.lattsize is not None and config.lattice in ("LINE", "DIAGONAL", "NATURAL")
            and config.lattsize < config.steps and not (config.blpermanent and config.geometry)):
        warn(f"LATTSIZE {config.lattsize} < STEPS {config.steps} without permanent broken "
             f"links: the walker will reflect at the edge of the lattice")
    if config.geometry and not config.blpermanent:
        warn("BEGINBL section given without BLPERMANENT; the links are not broken")
    if config.blpermanent and not config.geometry:
        warn("BLPERMANENT given without a BEGINBL section; no links are broken")
    if (config.aftermeasure is not None and not config.detectors and not config.dtprob):
        warn("AFTERMEASURE has no effect without DETECTORS or DTPROB")

    spec = None
    try:
        spec = config.lattice_spec()
    except ConfigError as exc:
        if config.lattice != "CYCLE":
            error(str(exc))
    try:
        config.coin_operator()
    except ConfigError as exc:
        error(str(exc))
    try:
        state = config.initial_state()
    except ConfigError as exc:
        error(str(exc))
        state = None
    if spec is not None:
        if state is not None:
            for _, site, _ in state.entries:
                if not spec.contains(site):
                    error(f"initial state position {site} lies outside the lattice")
        seen = set()
        for site in config.detectors:
            if not spec.contains(site):
                error(f"detector {site} lies outside the lattice")
            if site in seen:
                error(f"detector {site} listed twice")
            seen.add(site)
        if config.screen is not None:
            try:
                points = _links.segment_points(*config.screen)
            except ConfigError:
                error(f"SCREEN {' '.join(map(str, config.screen))} is neither parallel to an "
                      f"axis nor at 45 degrees")
            else:
                outside = sum(not spec.contains(p) for p in points)
                if outside == len(points):
                    error("SCREEN lies entirely outside the lattice")
                elif outside:
                    warn(f"{outside} SCREEN sites lie outside the lattice and are ignored")
    for cmd in config.geometry:
        if cmd[0] == "LINE":
            try:
                _links.segment_points(*cmd[1:])
            except ConfigError as exc:
                error(str(exc))
    return out


def errors(diagnostics) -> list:
    return [d for d in diagnostics if d.level == "error"]


def load(text: str, dimension: int = 2) -> SimulationConfig:
    """``parse`` followed by ``validate``; raises ConfigError listing every error."""
    config = parse(text, dimension)
    bad = errors(validate(config))
    if bad:
        raise ConfigError("; ".join(d.message for d in bad))
    return config


def _num(x: float) -> str:
    return repr(float(x))


def serialize(config: SimulationConfig) -> str:
    """Input-file text that parses back to ``config``."""
    lines = ["BEGIN"]
    defaults = SimulationConfig(dimension=config.dimension)
    if config.extra != defaults.extra:
        lines.append(f" LATTEXTRA {config.extra}")
    lines.append(f" COIN {config.coin}")
    lines.append(f" STATE {config.state}")
    lines.append(f" LATTYPE {config.lattice}")
    lines.append(f" STEPS {config.steps}")
    if config.lattsize is not None:
        lines.append(f" LATTSIZE {config.lattsize}")
    if config.blpermanent:
        lines.append(" BLPERMANENT")
    if config.screen is not None:
        lines.append(" SCREEN " + " ".join(map(str, config.screen)))
    if config.detectors:
        coords = " ".join(" ".join(map(str, s)) for s in config.detectors)
        lines.append(f" DETECTORS {len(config.detectors)} {coords}")
    if config.experiments != 1:
        lines.append(f" EXPERIMENTS {config.experiments}")
    if config.mixtime is not None:
        lines.append(f" MIXTIME {config.mixtime}")
    if config.blprob is not None:
        lines.append(" BLPROB " + " ".join(_num(p) for p in config.blprob))
    if config.dtprob is not None:
        lines.append(f" DTPROB {_num(config.dtprob)}")
    for check in sorted(config.checks):
        lines.append(f" CHECK {check}")
    if config.seed is not None:
        lines.append(f" SEED {config.seed}")
    if config.aftermeasure is not None:
        lines.append(f" AFTERMEASURE {config.aftermeasure}")
    lines.append("END")
    if config.geometry:
        lines.append("BEGINBL")
        lines.extend(" " + " ".join(map(str, cmd)) for cmd in config.geometry)
        lines.append("ENDBL")
    if config.coin_entries is not None:
        lines.append("BEGINCOIN")
        lines.extend(f" {_num(z.real)} {_num(z.imag)}" for z in config.coin_entries)
        lines.append("ENDCOIN")
    if config.state_entries is not None:
        lines.append("BEGINSTATE")
        for coin, site, amp in config.state_entries:
            ints = " ".join(map(str, coin + site))
            lines.append(f" {ints} {_num(amp.real)} {_num(amp.imag)}")
        lines.append("ENDSTATE")
    return "\n".join(lines) + "\n"

