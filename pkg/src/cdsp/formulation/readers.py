"""Minimal LP and MPS readers for round-trip verification.

These parse the common subset of both interchange dialects (enough for any
file this package writes, plus typical solver output) into a neutral
structure, so serialization can be checked reader-side and file-based
solver hookups can rebuild the model.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field


@dataclass
class ParsedModel:
    objective: dict[str, float] = field(default_factory=dict)
    constraints: "dict[str, tuple[dict[str, float], str, float]]" = field(default_factory=dict)
    bounds: dict[str, tuple[float, float]] = field(default_factory=dict)
    integers: set[str] = field(default_factory=set)
    minimize: bool = True

    def variable_names(self) -> list[str]:
        seen: dict[str, None] = {}
        for name in self.objective:
            seen.setdefault(name)
        for coeffs, _, _ in self.constraints.values():
            for name in coeffs:
                seen.setdefault(name)
        for name in self.bounds:
            seen.setdefault(name)
        return list(seen)

    def bound(self, name: str) -> tuple[float, float]:
        lo, up = self.bounds.get(name, (0.0, math.inf))
        if name in self.integers and name not in self.bounds:
            return 0.0, 1.0
        return lo, up


_NAME = r"[A-Za-z_][A-Za-z0-9_.]*"
_NUM = r"\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?"
_LP_TOKEN = re.compile(rf"({_NAME})|({_NUM})|(<=|>=|=<|=>|=|\+|-|:)")

_SECTIONS = {
    "minimize": "objective",
    "minimise": "objective",
    "min": "objective",
    "maximize": "objective-max",
    "maximise": "objective-max",
    "max": "objective-max",
    "subject": None,  # handled with lookahead for "to"
    "st": "constraints",
    "s.t.": "constraints",
    "bounds": "bounds",
    "bound": "bounds",
    "binaries": "binary",
    "binary": "binary",
    "bin": "binary",
    "generals": "general",
    "general": "general",
    "gen": "general",
    "end": "end",
}


def read_lp(text: str) -> ParsedModel:
    """Parse the LP dialect this package emits (plus common variants)."""
    model = ParsedModel()
    section = None
    lines = []
    for raw in text.splitlines():
        body = raw.split("\\", 1)[0]
        if body.strip():
            lines.append(body)

    # Bounds are line-oriented; everything else can wrap, so group lines
    # per section first.
    grouped: list[tuple[str, list[str]]] = []
    idx = 0
    while idx < len(lines):
        stripped = lines[idx].strip()
        lowered = stripped.lower()
        matched = None
        rest = ""
        if lowered.startswith("subject to"):
            matched = "constraints"
            rest = stripped[len("subject to"):]
        else:
            head = lowered.split(None, 1)[0] if lowered else ""
            if head in _SECTIONS and _SECTIONS[head]:
                matched = _SECTIONS[head]
                rest = stripped[len(head):]
        if matched:
            grouped.append((matched, [rest] if rest.strip() else []))
            section = matched
        elif section:
            grouped[-1][1].append(lines[idx])
        idx += 1

    for kind, body in grouped:
        if kind == "end":
            break
        if kind in ("objective", "objective-max"):
            model.minimize = kind == "objective"
            tokens = _lp_tokens(" ".join(body))
            tokens = _strip_label(tokens)[1]
            model.objective = _parse_expr(tokens)
        elif kind == "constraints":
            _parse_constraints(" ".join(body), model)
        elif kind == "bounds":
            for line in body:
                _parse_bound_line(line.strip(), model)
        elif kind in ("binary", "general"):
            for line in body:
                for name in line.split():
                    model.integers.add(name)
                    if kind == "binary" and name not in model.bounds:
                        model.bounds[name] = (0.0, 1.0)
    return model


def _lp_tokens(text: str) -> list[str]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _LP_TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"unparseable LP text at {text[pos:pos + 20]!r}")
        tokens.append(m.group(0))
        pos = m.end()
    return tokens


def _strip_label(tokens: list[str]) -> tuple[str | None, list[str]]:
    if len(tokens) >= 2 and tokens[1] == ":":
        return tokens[0], tokens[2:]
    return None, tokens


def _is_number(token: str) -> bool:
    return bool(re.fullmatch(_NUM, token))


def _parse_expr(tokens: list[str]) -> dict[str, float]:
    coeffs: dict[str, float] = {}
    sign = 1.0
    coef: float | None = None
    for token in tokens:
        if token == "+":
            continue
        if token == "-":
            sign = -sign
            continue
        if _is_number(token):
            coef = (coef if coef is not None else 1.0) * float(token)
            continue
        value = sign * (coef if coef is not None else 1.0)
        coeffs[token] = coeffs.get(token, 0.0) + value
        sign, coef = 1.0, None
    return coeffs


def _parse_constraints(text: str, model: ParsedModel):
    tokens = _lp_tokens(text)
    # split into one statement per label; statements end where the next
    # "name :" pair begins
    starts = [
        i
        for i in range(len(tokens) - 1)
        if tokens[i + 1] == ":" and not _is_number(tokens[i])
    ]
    if not starts:
        starts = [0]
    spans = [(start, starts[k + 1] if k + 1 < len(starts) else len(tokens)) for k, start in enumerate(starts)]
    for order, (lo, hi) in enumerate(spans):
        label, body = _strip_label(tokens[lo:hi])
        name = label or f"c{order}"
        sense_pos = next(i for i, t in enumerate(body) if t in ("<=", ">=", "=", "=<", "=>"))
        sense = {"<=": "<=", "=<": "<=", ">=": ">=", "=>": ">=", "=": "="}[body[sense_pos]]
        lhs = _parse_expr(body[:sense_pos])
        rhs_tokens = body[sense_pos + 1:]
        rhs_sign = -1.0 if rhs_tokens and rhs_tokens[0] == "-" else 1.0
        rhs = rhs_sign * float(rhs_tokens[-1])
        model.constraints[name] = (lhs, sense, rhs)


def _parse_bound_line(line: str, model: ParsedModel):
    if not line:
        return
    tokens = _lp_tokens(line)
    if "free" in [t.lower() for t in tokens]:
        model.bounds[tokens[0]] = (-math.inf, math.inf)
        return

    def value(toks) -> float:
        sign = 1.0
        for t in toks:
            if t == "-":
                sign = -sign
            elif _is_number(t) or t.lower() in ("inf", "infinity"):
                mag = math.inf if t.lower() in ("inf", "infinity") else float(t)
                return sign * mag
        raise ValueError(f"bad bound line {line!r}")

    senses = [i for i, t in enumerate(tokens) if t in ("<=", ">=", "=")]
    names = [t for t in tokens if re.fullmatch(_NAME, t) and t.lower() not in ("inf", "infinity")]
    if not names:
        raise ValueError(f"bad bound line {line!r}")
    name = names[0]
    lo, up = model.bounds.get(name, (0.0, math.inf))
    if len(senses) == 2 and tokens[senses[0]] == "<=":
        lo = value(tokens[: senses[0]])
        up = value(tokens[senses[1] + 1:])
    elif len(senses) == 1:
        pos = senses[0]
        sense = tokens[pos]
        name_first = tokens.index(name) < pos
        bound_tokens = tokens[pos + 1:] if name_first else tokens[:pos]
        val = value(bound_tokens)
        if sense == "=":
            lo = up = val
        elif (sense == "<=") == name_first:
            up = val
        else:
            lo = val
    else:
        raise ValueError(f"bad bound line {line!r}")
    model.bounds[name] = (lo, up)


def read_mps(text: str) -> ParsedModel:
    """Parse free-format MPS (the subset this package emits, plus RANGES-less
    files from common solvers)."""
    model = ParsedModel()
    row_sense: dict[str, str] = {}
    obj_row: str | None = None
    section = None
    in_integer = False
    for raw in text.splitlines():
        if not raw.strip() or raw.lstrip().startswith("*"):
            continue
        head = raw.split()[0].upper()
        if not raw[0].isspace() and head in (
            "NAME",
            "ROWS",
            "COLUMNS",
            "RHS",
            "RANGES",
            "BOUNDS",
            "OBJSENSE",
            "ENDATA",
        ):
            section = head
            if head == "ENDATA":
                break
            continue
        fields = raw.split()
        if section == "OBJSENSE":
            model.minimize = fields[0].upper().startswith("MIN")
        elif section == "ROWS":
            tag, name = fields[0].upper(), fields[1]
            if tag == "N":
                if obj_row is None:
                    obj_row = name
            else:
                row_sense[name] = {"L": "<=", "E": "=", "G": ">="}[tag]
                model.constraints[name] = ({}, row_sense[name], 0.0)
        elif section == "COLUMNS":
            if len(fields) >= 3 and fields[1].strip("'").upper() == "MARKER":
                in_integer = fields[2].strip("'").upper() == "INTORG"
                continue
            name = fields[0]
            if in_integer:
                model.integers.add(name)
            for row_name, val in zip(fields[1::2], fields[2::2]):
                value = float(val)
                if row_name == obj_row:
                    if value != 0.0:
                        model.objective[name] = model.objective.get(name, 0.0) + value
                else:
                    coeffs, _, _ = model.constraints[row_name]
                    coeffs[name] = coeffs.get(name, 0.0) + value
        elif section == "RHS":
            for row_name, val in zip(fields[1::2], fields[2::2]):
                if row_name in model.constraints:
                    coeffs, sense, _ = model.constraints[row_name]
                    model.constraints[row_name] = (coeffs, sense, float(val))
        elif section == "BOUNDS":
            tag, name = fields[0].upper(), fields[2]
            lo, up = model.bounds.get(name, (0.0, math.inf))
            if tag == "BV":
                lo, up = 0.0, 1.0
                model.integers.add(name)
            elif tag == "FX":
                lo = up = float(fields[3])
            elif tag == "LO":
                lo = float(fields[3])
            elif tag == "UP":
                up = float(fields[3])
            elif tag == "MI":
                lo = -math.inf
            elif tag == "PL":
                up = math.inf
            elif tag in ("UI", "LI"):
                if tag == "UI":
                    up = float(fields[3])
                else:
                    lo = float(fields[3])
                model.integers.add(name)
            model.bounds[name] = (lo, up)
    return model
