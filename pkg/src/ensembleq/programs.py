"""Pulse program steps and their one-line-per-step text form.

A program is an ordered list of steps over one or two ensemble sites:

    R0 site=t area=0.5pi phase=0.25pi     # pulse on the g0-ryd transition
    R1 site=c area=1pi                    # pulse on the g1-ryd transition
    GAP 2.5ms                             # free evolution
    MEASURE                               # blow-away readout (terminal)

Grammar (one step per line; blank lines and '#' comments ignored):

    pulse   := ("R0" | "R1") field*
    field   := "site=" ("c"|"t"|"s") | "area=" ANGLE | "phase=" ANGLE
             | "detuning=" FLOAT | "duration=" TIME
    gap     := "GAP" TIME ["detuning=" FLOAT]
    measure := "MEASURE"
    ANGLE   := FLOAT ["pi"]           (radians; "0.5pi" means pi/2)
    TIME    := FLOAT ("s"|"ms"|"us"|"ns")

Angles print in pi units and times in the largest unit giving a mantissa in
[1, 1000), so printing a parsed program reproduces a canonical text form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SITES = ("single", "control", "target")
SITE_CODES = {"single": "s", "control": "c", "target": "t"}
CODE_SITES = {v: k for k, v in SITE_CODES.items()}
TRANSITIONS = ("zero_ryd", "one_ryd")
_TIME_UNITS = (("s", 1.0), ("ms", 1e-3), ("us", 1e-6), ("ns", 1e-9))


class ProgramParseError(ValueError):
    """Pulse-program text is malformed; carries line and column numbers."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Pulse:
    """One square drive pulse.

    Exactly one of ``area`` (radians, referenced to the nominal Rabi
    frequency of the addressed transition) or ``duration`` (seconds) is
    primary; the engine resolves and records the other at run time.
    """

    transition: str
    site: str = "single"
    area: float | None = None
    phase: float = 0.0
    detuning: float = 0.0
    duration: float | None = None

    def __post_init__(self):
        if self.transition not in TRANSITIONS:
            raise ValueError(f"unknown transition {self.transition!r}")
        if self.site not in SITES:
            raise ValueError(f"unknown site {self.site!r}")
        if (self.area is None) == (self.duration is None):
            raise ValueError("exactly one of area and duration must be given")
        if self.duration is not None and self.duration < 0:
            raise ValueError("pulse duration must be non-negative")


@dataclass(frozen=True)
class Gap:
    """Free evolution for ``duration`` seconds.

    ``detuning`` (rad/s) adds a deterministic qubit-frequency offset during
    the gap, used to display time-domain Ramsey fringes.
    """

    duration: float
    detuning: float = 0.0

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError("gap duration must be non-negative")


@dataclass(frozen=True)
class Measure:
    """Blow-away measurement; only valid terminally or as explicit projection."""

    model: object | None = None  # MeasurementModel; default filled at run time


@dataclass(frozen=True)
class PulseProgram:
    """Ordered steps over one or two ensemble sites."""

    steps: tuple
    n_sites: int = 1

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        if self.n_sites not in (1, 2):
            raise ValueError("n_sites must be 1 or 2")
        for step in self.steps:
            if isinstance(step, Pulse):
                if self.n_sites == 1 and step.site != "single":
                    raise ValueError("single-site program with two-site pulse")
                if self.n_sites == 2 and step.site == "single":
                    raise ValueError("two-site program with site='single' pulse")

    def __iter__(self):
        return iter(self.steps)


def site_index(site: str) -> int:
    return 0 if site in ("single", "control") else 1


# ---------------------------------------------------------------------------
# text form


def _format_angle(value: float) -> str:
    return f"{value / np.pi!r}pi"


def _parse_angle(text: str, line: int, col: int) -> float:
    s = text.strip()
    factor = 1.0
    if s.endswith("pi"):
        factor = np.pi
        s = s[:-2]
    try:
        return float(s) * factor
    except ValueError:
        raise ProgramParseError(f"bad angle {text!r}", line, col) from None


def _format_time(t: float) -> str:
    if t == 0.0:
        return "0s"
    for unit, scale in _TIME_UNITS:
        value = t / scale
        if 1.0 <= value < 1000.0:
            return f"{value:g}{unit}"
    return f"{t / 1e-9:g}ns"


def _parse_time(text: str, line: int, col: int) -> float:
    s = text.strip()
    for unit, scale in sorted(_TIME_UNITS, key=lambda u: -len(u[0])):
        if s.endswith(unit):
            try:
                return float(s[: -len(unit)]) * scale
            except ValueError:
                break
    raise ProgramParseError(
        f"bad duration {text!r} (expected e.g. '2.5ms'; units s|ms|us|ns)", line, col
    )


def format_program(program: PulseProgram) -> str:
    """Canonical text of a program (inverse of :func:`parse_program`)."""
    lines = []
    for step in program.steps:
        if isinstance(step, Pulse):
            name = "R0" if step.transition == "zero_ryd" else "R1"
            fields = [f"site={SITE_CODES[step.site]}"]
            if step.area is not None:
                fields.append(f"area={_format_angle(step.area)}")
            else:
                fields.append(f"duration={_format_time(step.duration)}")
            if step.phase != 0.0:
                fields.append(f"phase={_format_angle(step.phase)}")
            if step.detuning != 0.0:
                fields.append(f"detuning={step.detuning!r}")
            lines.append(" ".join([name, *fields]))
        elif isinstance(step, Gap):
            line = f"GAP {_format_time(step.duration)}"
            if step.detuning != 0.0:
                line += f" detuning={step.detuning!r}"
            lines.append(line)
        elif isinstance(step, Measure):
            lines.append("MEASURE")
        else:
            raise TypeError(f"unknown step {step!r}")
    return "\n".join(lines) + "\n"


def parse_program(text: str, n_sites: int | None = None) -> PulseProgram:
    """Parse program text; errors carry line and column positions.

    ``n_sites`` defaults to 2 when any step addresses control or target,
    else 1.
    """
    steps = []
    sites_seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        tokens = line.split()
        head = tokens[0]
        col = line.index(head) + 1

        if head in ("R0", "R1"):
            kwargs = {
                "transition": "zero_ryd" if head == "R0" else "one_ryd",
            }
            for tok in tokens[1:]:
                col = line.index(tok) + 1
                if "=" not in tok:
                    raise ProgramParseError(f"expected key=value, got {tok!r}",
                                            lineno, col)
                key, _, value = tok.partition("=")
                vcol = col + len(key) + 1
                if key == "site":
                    if value not in CODE_SITES:
                        raise ProgramParseError(
                            f"bad site {value!r} (use c|t|s)", lineno, vcol)
                    kwargs["site"] = CODE_SITES[value]
                elif key in ("area", "phase"):
                    kwargs[key] = _parse_angle(value, lineno, vcol)
                elif key == "detuning":
                    try:
                        kwargs["detuning"] = float(value)
                    except ValueError:
                        raise ProgramParseError(
                            f"bad detuning {value!r}", lineno, vcol) from None
                elif key == "duration":
                    kwargs["duration"] = _parse_time(value, lineno, vcol)
                else:
                    raise ProgramParseError(f"unknown field {key!r}", lineno, col)
            try:
                pulse = Pulse(**kwargs)
            except ValueError as exc:
                raise ProgramParseError(str(exc), lineno, 1) from None
            sites_seen.add(pulse.site)
            steps.append(pulse)

        elif head == "GAP":
            if len(tokens) < 2:
                raise ProgramParseError("GAP needs a duration", lineno, col)
            duration = _parse_time(tokens[1], lineno, line.index(tokens[1]) + 1)
            detuning = 0.0
            for tok in tokens[2:]:
                col = line.index(tok) + 1
                key, _, value = tok.partition("=")
                if key != "detuning" or not value:
                    raise ProgramParseError(f"unknown GAP field {tok!r}", lineno, col)
                try:
                    detuning = float(value)
                except ValueError:
                    raise ProgramParseError(
                        f"bad detuning {value!r}", lineno, col) from None
            steps.append(Gap(duration, detuning))

        elif head == "MEASURE":
            steps.append(Measure())

        else:
            raise ProgramParseError(f"unknown step {head!r}", lineno, col)

    if n_sites is None:
        n_sites = 2 if sites_seen & {"control", "target"} else 1
    return PulseProgram(tuple(steps), n_sites=n_sites)
