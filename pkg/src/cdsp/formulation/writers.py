"""Byte-deterministic LP and MPS serialization of built models.

Variable names follow x_<arcid>, y_<i>_<j>, z_<j>, tau_<j>, C_<j>;
constraint names carry their family tags. Emitting the same model twice
yields identical bytes.
"""

from __future__ import annotations

import math
import re

from .model import BINARY, SENSE_EQ, SENSE_GE, SENSE_LE, MipModel

_LINE_WIDTH = 78


def emit_model(model: MipModel, fmt: str) -> str:
    """Serialize to "lp" (CPLEX LP dialect) or "mps" (free MPS)."""
    fmt = fmt.lower()
    if fmt == "lp":
        return write_lp(model)
    if fmt == "mps":
        return write_mps(model)
    raise ValueError(f"unknown model format {fmt!r}")


def _num(value: float) -> str:
    if value == math.inf:
        return "inf"
    if float(value).is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(float(value))


def _wrap(prefix: str, tokens: list[str]) -> list[str]:
    lines = []
    current = prefix
    for token in tokens:
        if current and len(current) + 1 + len(token) > _LINE_WIDTH:
            lines.append(current)
            current = " " + token
        else:
            current = token if not current else current + " " + token
    lines.append(current)
    return lines


def _expr_tokens(coeffs: dict[int, float], names: list[str]) -> list[str]:
    tokens: list[str] = []
    for col in sorted(coeffs):
        val = coeffs[col]
        sign = "-" if val < 0 else "+"
        if not tokens and sign == "+":
            sign = ""
        mag = abs(val)
        if sign:
            tokens.append(sign)
        if mag != 1.0:
            tokens.append(_num(mag))
        tokens.append(names[col])
    return tokens


def write_lp(model: MipModel) -> str:
    names = [v.name for v in model.variables]
    out: list[str] = []
    label = model.metadata.get("label", "")
    out.append(f"\\ cdsp model  label={label}  n={model.n}  K={model.fleet_size}")
    out.append("Minimize")
    out.extend(_wrap(" obj:", _expr_tokens(model.objective, names)))
    out.append("Subject To")
    for row in model.constraints:
        tokens = _expr_tokens(row.coeffs, names)
        sense = {SENSE_LE: "<=", SENSE_EQ: "=", SENSE_GE: ">="}[row.sense]
        tokens += [sense, _num(row.rhs)]
        out.extend(_wrap(f" {row.name}:", tokens))
    out.append("Bounds")
    for var in model.variables:
        if var.kind == BINARY:
            if var.lower == var.upper:
                out.append(f" {var.name} = {_num(var.lower)}")
            continue
        if var.lower == 0.0 and var.upper == math.inf:
            continue
        if var.lower == var.upper:
            out.append(f" {var.name} = {_num(var.lower)}")
        elif var.upper == math.inf:
            out.append(f" {var.name} >= {_num(var.lower)}")
        else:
            out.append(f" {_num(var.lower)} <= {var.name} <= {_num(var.upper)}")
    out.append("Binaries")
    out.extend(_wrap("", [v.name for v in model.variables if v.kind == BINARY]))
    out.append("End")
    return "\n".join(out) + "\n"


def write_mps(model: MipModel) -> str:
    names = [v.name for v in model.variables]
    label = str(model.metadata.get("label", "")) or "model"
    safe = re.sub(r"[^A-Za-z0-9_.-]", "_", label)
    out: list[str] = [f"NAME {safe}"]

    out.append("ROWS")
    out.append(" N obj")
    sense_tag = {SENSE_LE: "L", SENSE_EQ: "E", SENSE_GE: "G"}
    for row in model.constraints:
        out.append(f" {sense_tag[row.sense]} {row.name}")

    entries: list[list[tuple[str, float]]] = [[] for _ in model.variables]
    for col, val in sorted(model.objective.items()):
        entries[col].append(("obj", val))
    for row in model.constraints:
        for col in sorted(row.coeffs):
            entries[col].append((row.name, row.coeffs[col]))

    out.append("COLUMNS")
    in_integer = False
    for var in model.variables:
        want_integer = var.kind == BINARY
        if want_integer and not in_integer:
            out.append("    MARKER    'MARKER'    'INTORG'")
            in_integer = True
        elif not want_integer and in_integer:
            out.append("    MARKER    'MARKER'    'INTEND'")
            in_integer = False
        cell = entries[var.column]
        if not cell:
            cell = [("obj", 0.0)]  # declare otherwise-empty columns
        for row_name, val in cell:
            out.append(f"    {var.name}  {row_name}  {_num(val)}")
    if in_integer:
        out.append("    MARKER    'MARKER'    'INTEND'")

    out.append("RHS")
    for row in model.constraints:
        out.append(f"    RHS  {row.name}  {_num(row.rhs)}")

    out.append("BOUNDS")
    for var in model.variables:
        if var.kind == BINARY:
            if var.lower == var.upper:
                out.append(f" FX BND {var.name}  {_num(var.lower)}")
            else:
                out.append(f" BV BND {var.name}")
            continue
        out.append(f" LO BND {var.name}  {_num(var.lower)}")
        if var.upper != math.inf:
            out.append(f" UP BND {var.name}  {_num(var.upper)}")

    out.append("ENDATA")
    return "\n".join(out) + "\n"
