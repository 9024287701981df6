"""Text formats: the net description grammar, trace/log parsing, report rendering."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .nets import NetError, StochasticNet
from .sync import Alignment

__all__ = [
    "SlpnParseError",
    "AlignmentReport",
    "parse_slpn",
    "serialize_slpn",
    "parse_trace",
    "parse_log",
    "render",
]

_HEADER = "stochastic labeled petri net"


class SlpnParseError(ValueError):
    """Parse failure with a 1-based line number."""

    def __init__(self, line_no: int, message: str) -> None:
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class _Lines:
    """Cursor over meaningful lines: blanks and '#' comment lines are skipped."""

    def __init__(self, text: str) -> None:
        self.entries = [
            (i + 1, line.strip())
            for i, line in enumerate(text.splitlines())
            if line.strip() and not line.lstrip().startswith("#")
        ]
        self.pos = 0

    def next(self, expect: str | None = None) -> tuple[int, str]:
        if self.pos >= len(self.entries):
            last = self.entries[-1][0] if self.entries else 1
            raise SlpnParseError(last, f"unexpected end of file (expected {expect or 'more input'})")
        entry = self.entries[self.pos]
        self.pos += 1
        return entry

    def done(self) -> bool:
        return self.pos >= len(self.entries)


def _int_tokens(lines: _Lines, count: int, what: str) -> list[int]:
    out: list[int] = []
    while len(out) < count:
        line_no, line = lines.next(what)
        for tok in line.split():
            try:
                out.append(int(tok))
            except ValueError:
                raise SlpnParseError(line_no, f"expected an integer in {what}, got {tok!r}") from None
        if len(out) > count:
            raise SlpnParseError(line_no, f"too many integers for {what} (expected {count})")
    return out


def parse_slpn(text: str) -> StochasticNet:
    """Parse the textual net description.

    Grammar: a ``stochastic labeled petri net`` header, ``places <n>``,
    ``initial marking`` followed by n token counts, ``transitions <m>``, then
    per transition a ``label <string>`` or ``silent`` line, ``weight``,
    ``inputs`` and ``outputs`` lines.  Place indices are 0-based; repeating
    an index raises the arc multiplicity.  ``#`` lines are comments.
    """
    lines = _Lines(text)
    line_no, header = lines.next("header")
    if header != _HEADER:
        raise SlpnParseError(line_no, f"expected header {_HEADER!r}, got {header!r}")

    line_no, line = lines.next("places <n>")
    parts = line.split()
    if len(parts) != 2 or parts[0] != "places":
        raise SlpnParseError(line_no, f"expected 'places <n>', got {line!r}")
    try:
        n_places = int(parts[1])
    except ValueError:
        raise SlpnParseError(line_no, f"place count must be an integer, got {parts[1]!r}") from None
    if n_places < 1:
        raise SlpnParseError(line_no, "a net needs at least one place")

    line_no, line = lines.next("initial marking")
    if line != "initial marking":
        raise SlpnParseError(line_no, f"expected 'initial marking', got {line!r}")
    marking_line = line_no
    counts = _int_tokens(lines, n_places, "initial marking")
    if any(c < 0 for c in counts):
        raise SlpnParseError(marking_line, "token counts must be non-negative")
    if not any(counts):
        raise SlpnParseError(marking_line, "initial marking must be non-empty")

    line_no, line = lines.next("transitions <m>")
    parts = line.split()
    if len(parts) != 2 or parts[0] != "transitions":
        raise SlpnParseError(line_no, f"expected 'transitions <m>', got {line!r}")
    try:
        n_trans = int(parts[1])
    except ValueError:
        raise SlpnParseError(line_no, f"transition count must be an integer, got {parts[1]!r}") from None
    if n_trans < 0:
        raise SlpnParseError(line_no, "transition count must be non-negative")

    transitions = []
    for k in range(n_trans):
        line_no, line = lines.next("label <string> or silent")
        if line == "silent":
            label = None
        elif line.startswith("label ") and len(line) > 6:
            label = line[6:]
        elif line == "label":
            raise SlpnParseError(line_no, "empty label (use 'silent' for unlabeled transitions)")
        else:
            raise SlpnParseError(line_no, f"expected 'label <string>' or 'silent', got {line!r}")

        line_no, line = lines.next("weight <positive decimal>")
        parts = line.split()
        if len(parts) != 2 or parts[0] != "weight":
            raise SlpnParseError(line_no, f"expected 'weight <positive decimal>', got {line!r}")
        try:
            weight = Fraction(parts[1])
        except (ValueError, ZeroDivisionError):
            raise SlpnParseError(line_no, f"cannot parse weight {parts[1]!r}") from None
        if weight <= 0:
            raise SlpnParseError(line_no, f"weight must be strictly positive, got {parts[1]}")

        arcs = {}
        for kind in ("inputs", "outputs"):
            line_no, line = lines.next(f"{kind} <place indices>")
            parts = line.split()
            if not parts or parts[0] != kind:
                raise SlpnParseError(line_no, f"expected '{kind} ...', got {line!r}")
            idxs = []
            for tok in parts[1:]:
                try:
                    idx = int(tok)
                except ValueError:
                    raise SlpnParseError(line_no, f"place index must be an integer, got {tok!r}") from None
                if not 0 <= idx < n_places:
                    raise SlpnParseError(line_no, f"place index {idx} out of range (0..{n_places - 1})")
                idxs.append(idx)
            arcs[kind] = idxs
        transitions.append((f"t{k + 1}", label, weight, arcs["inputs"], arcs["outputs"]))

    if not lines.done():
        line_no, line = lines.next()
        raise SlpnParseError(line_no, f"trailing input after net description: {line!r}")

    try:
        return StochasticNet.build(
            [f"p{i + 1}" for i in range(n_places)],
            transitions,
            {i: c for i, c in enumerate(counts) if c},
        )
    except NetError as exc:
        raise SlpnParseError(marking_line, str(exc)) from exc


def serialize_slpn(net: StochasticNet) -> str:
    """Canonical text form; parse(serialize(net)) reproduces the net."""
    out = [_HEADER, f"places {net.num_places}", "initial marking"]
    out.append(" ".join(str(net.initial_marking.count(p)) for p in range(net.num_places)))
    out.append(f"transitions {net.num_transitions}")
    for t in range(net.num_transitions):
        label = net.labels[t]
        out.append("silent" if label is None else f"label {label}")
        out.append(f"weight {net.weights[t]}")
        for kind, arcs in (("inputs", net.pre[t]), ("outputs", net.post[t])):
            idxs = []
            for p, mult in arcs:
                idxs.extend([str(p)] * mult)
            out.append(f"{kind} {' '.join(idxs)}".rstrip())
    return "\n".join(out) + "\n"


def parse_trace(text: str) -> tuple[str, ...]:
    """Comma-separated activities; ``\\,`` escapes a literal comma.

    Tokens are stripped of surrounding whitespace before unescaping; the
    empty string is the empty trace.
    """
    if not text.strip():
        return ()
    tokens: list[str] = []
    cur: list[str] = []
    escaped = False
    for ch in text:
        if escaped:
            cur.append(ch)
            escaped = False
        elif ch == "\\":
            cur.append(ch)
            escaped = True
        elif ch == ",":
            tokens.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    tokens.append("".join(cur))

    def unescape(tok: str) -> str:
        out = []
        esc = False
        for ch in tok:
            if esc:
                out.append(ch)
                esc = False
            elif ch == "\\":
                esc = True
            else:
                out.append(ch)
        if esc:
            out.append("\\")
        return "".join(out)

    return tuple(unescape(tok.strip()) for tok in tokens)


def parse_log(text: str) -> list[tuple[str, ...]]:
    """One trace per line; blank lines and '#' comment lines are skipped."""
    out = []
    for line in text.splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        out.append(parse_trace(line))
    return out


@dataclass(frozen=True)
class AlignmentReport:
    """An alignment plus everything a rendering needs: names, config echo, timing."""

    alignment: Alignment
    trace: tuple[str, ...]
    model: StochasticNet
    cap: int | None = None
    node_budget: int | None = None
    rational: bool = False
    lp_relaxation: bool = False


def _move_cells(report: AlignmentReport, mv) -> tuple[str, str]:
    trace_cell = report.trace[mv.trace_pos] if mv.trace_pos is not None else ">>"
    model_cell = (
        report.model.transition_names[mv.model_transition]
        if mv.model_transition is not None
        else ">>"
    )
    return trace_cell, model_cell


def _move_json(report: AlignmentReport, mv) -> dict:
    if mv.trace_pos is not None:
        activity = report.trace[mv.trace_pos]
    elif mv.model_transition is not None:
        activity = report.model.labels[mv.model_transition]
    else:
        activity = None
    transition = (
        report.model.transition_names[mv.model_transition]
        if mv.model_transition is not None
        else None
    )
    return {"kind": mv.kind.value, "activity": activity, "transition": transition}


def render(report: AlignmentReport, fmt: str = "table") -> str:
    """Render an alignment report as a two-row move table or canonical JSON."""
    al = report.alignment
    if fmt == "json":
        doc = {
            "alpha": al.alpha,
            "cost": al.cost,
            "probability": float(al.probability),
            "log10_probability": al.log10_probability,
            "loss": al.loss,
            "moves": [_move_json(report, mv) for mv in al.moves],
            "stats": {
                "expanded": al.expanded_nodes,
                "runtime_ms": al.runtime_ms,
            },
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))
    if fmt != "table":
        raise ValueError(f"unknown render format {fmt!r}")

    cells = [_move_cells(report, mv) for mv in al.moves]
    widths = [max(len(tc), len(mc)) for tc, mc in cells]
    trace_row = " | ".join(tc.ljust(w) for (tc, _), w in zip(cells, widths))
    model_row = " | ".join(mc.ljust(w) for (_, mc), w in zip(cells, widths))
    lines = [
        f"alpha: {al.alpha:g}",
        f"trace | {trace_row} |" if cells else "trace | (empty) |",
        f"model | {model_row} |" if cells else "model | (empty) |",
        f"cost: {al.cost}",
        f"probability: {al.probability} ({float(al.probability):.6g})",
        f"log10 probability: {al.log10_probability:.6f}",
        f"loss: {al.loss:.6f}",
    ]
    if al.expanded_nodes is not None:
        lines.append(f"expanded nodes: {al.expanded_nodes}")
    if al.runtime_ms is not None:
        lines.append(f"runtime: {al.runtime_ms:.1f} ms")
    echo = []
    if report.cap is not None:
        echo.append(f"cap: {report.cap}")
    if report.node_budget is not None:
        echo.append(f"node budget: {report.node_budget}")
    echo.append(f"rational: {'yes' if report.rational else 'no'}")
    echo.append(f"lp relaxation: {'yes' if report.lp_relaxation else 'no'}")
    lines.append("  ".join(echo))
    return "\n".join(lines) + "\n"
