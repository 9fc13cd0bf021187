"""pyparsing grammar for parameter sweep expressions.

    lambda1=1e-3..1e3          log range, one point per decade (7 values)
    lambda1=1e-3..1e3:13       log range with 13 points
    lambda2=0..1:5lin          linear range with 5 points
    h=2..6:lin                 integer steps 2, 3, 4, 5, 6 (plain 2..6 is an error)
    lambda1=0.1,1,10           explicit values
"""

from __future__ import annotations

import math

import numpy as np
import pyparsing as pp

from ..errors import ParameterError
from ..models import SweepAxis

# ---------- primitives ----------
EQ = pp.Suppress(pp.Literal("="))
DOTS = pp.Suppress(pp.Literal(".."))
COLON = pp.Suppress(pp.Literal(":"))

key = pp.Word(pp.alphas + "_", pp.alphanums + "_")

# digits are required after a decimal point so "1..5" splits into 1 and 5
number = pp.Regex(r"[+-]?(?:\d+(?:\.\d+)?|\.\d+)(?:[eE][+-]?\d+)?").set_parse_action(
    lambda t: float(t[0])
)
steps = pp.Word(pp.nums).set_parse_action(lambda t: int(t[0]))
spacing = pp.one_of("log lin")

# ---------- value forms ----------
range_expr = pp.Group(
    number("lo")
    + DOTS
    + number("hi")
    + pp.Optional(COLON + pp.Optional(steps("steps")) + pp.Optional(spacing("spacing")))
)("range")

list_expr = pp.Group(pp.DelimitedList(number))("values")

sweep_expr = key("key") + EQ + (range_expr | list_expr)


def _expand(lo: float, hi: float, count: int | None, mode: str) -> list[float]:
    if mode == "log":
        if lo <= 0 or hi <= 0:
            raise ParameterError(f"log range needs positive bounds, got {lo:g}..{hi:g}")
        if count is None:
            count = int(round(abs(math.log10(hi / lo)))) + 1
            if count == 1 and lo != hi:
                raise ParameterError(
                    f"log range {lo:g}..{hi:g} spans less than a decade; "
                    "give a step count (:N) or use :lin"
                )
        if count < 1:
            raise ParameterError("a range needs at least one step")
        return [float(x) for x in np.geomspace(lo, hi, count)] if count > 1 else [lo]
    if count is None:
        if lo != int(lo) or hi != int(hi) or hi < lo:
            raise ParameterError("linear range without a step count needs integer bounds lo <= hi")
        return [float(x) for x in range(int(lo), int(hi) + 1)]
    if count < 1:
        raise ParameterError("a range needs at least one step")
    return [float(x) for x in np.linspace(lo, hi, count)] if count > 1 else [lo]


def parse_sweep(text: str) -> SweepAxis:
    """Parse one `key=...` sweep expression into the values it expands to."""
    try:
        result = sweep_expr.parse_string(text.strip(), parse_all=True)
    except pp.ParseException as e:
        raise ParameterError(f"invalid sweep expression {text!r}: {e.msg} at column {e.col}") from e

    if "range" in result:
        r = result["range"]
        mode = r.get("spacing", "log")
        values = _expand(r["lo"], r["hi"], r.get("steps"), mode)
    else:
        values = list(result["values"])
    return SweepAxis(key=result["key"], values=values)
