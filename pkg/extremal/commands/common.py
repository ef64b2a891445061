"""Shared option types and output helpers for the command groups."""

import json
import math
from fractions import Fraction
from typing import Any, Iterable, Optional

import click
from pydantic import BaseModel

from ..core.errors import ExtremalError, FormatError
from ..core.formats import parse_shape
from ..schemas.spectral import EstimatorConfig

SIGNIFICANT_DIGITS = 6
CLOSED_FORM_TOL = 1e-9
MAX_DENOMINATOR = 12
MAX_RADICAND = 10000


class ShapeType(click.ParamType):
    """Shape written as ``3x4x5``."""

    name = "shape"

    def convert(self, value, param, ctx):
        if isinstance(value, tuple):
            return value
        try:
            return parse_shape(value)
        except FormatError as exc:
            self.fail(exc.detail, param, ctx)


class PermutationType(click.ParamType):
    """Comma-separated 1-based permutation, returned 0-based."""

    name = "perm"

    def convert(self, value, param, ctx):
        if isinstance(value, list):
            return value
        try:
            return [int(tok) - 1 for tok in value.replace(" ", "").split(",") if tok]
        except ValueError:
            self.fail(f"malformed permutation {value!r}; expected e.g. 2,1,3", param, ctx)


SHAPE = ShapeType()
PERMUTATION = PermutationType()


class CommandFailed(click.ClickException):
    """A library error surfaced through click with the library's exit code."""

    def __init__(self, error: ExtremalError):
        super().__init__(error.detail)
        self.exit_code = error.exit_code


def json_option(f):
    return click.option("--json", "as_json", is_flag=True, help="Print machine-readable JSON")(f)


def estimator_options(f):
    f = click.option("--seed", type=click.IntRange(min=0), default=None, help="Seed for the random starts")(f)
    f = click.option("--tol", type=click.FloatRange(min=0, min_open=True), default=None, help="Relative stopping tolerance")(f)
    f = click.option("--starts", type=click.IntRange(min=1), default=None, help="Random starts per estimate")(f)
    return f


def make_estimator(
    starts: Optional[int], tol: Optional[float], seed: Optional[int], default_starts: Optional[int] = None
) -> EstimatorConfig:
    return EstimatorConfig.from_settings(starts=starts if starts is not None else default_starts, tol=tol, seed=seed)


def closed_form(value: float) -> Optional[str]:
    """Small rational or ``1/sqrt(k)`` matching ``value``, if any."""
    if not math.isfinite(value) or value <= 0:
        return None
    frac = Fraction(value).limit_denominator(MAX_DENOMINATOR)
    if abs(float(frac) - value) <= CLOSED_FORM_TOL:
        return str(frac)
    radicand = 1.0 / (value * value)
    k = round(radicand)
    if 1 < k <= MAX_RADICAND and abs(radicand - k) <= CLOSED_FORM_TOL * k and math.isqrt(k) ** 2 != k:
        return f"1/sqrt({k})"
    return None


def fmt(value: Optional[float]) -> str:
    """Six significant digits, with the closed form alongside when one is detected."""
    if value is None:
        return "-"
    text = f"{value:.{SIGNIFICANT_DIGITS}g}"
    form = closed_form(value)
    return f"{text} ({form})" if form and form != text else text


def fmt_indices(indices: Iterable[Iterable[int]]) -> str:
    """0-based multi-indices shown 1-based, e.g. ``112 121 211``."""
    words = []
    for idx in indices:
        idx = tuple(idx)
        sep = "" if all(i < 9 for i in idx) else ","
        words.append(sep.join(str(i + 1) for i in idx))
    return " ".join(words)


def emit(result: Any, as_json: bool, lines: Iterable[str] = (), wall_time: Optional[float] = None) -> None:
    """
    Print a result either as human-readable lines or as JSON.

    The JSON form is ``{"result": ..., "timing": {...}}`` with sorted keys,
    so reruns with the same seed differ only inside ``timing``.
    """
    if as_json:
        payload = result.model_dump(mode="json") if isinstance(result, BaseModel) else result
        if isinstance(payload, dict):
            payload.pop("wall_time", None)
        doc = {"result": payload, "timing": {"wall_time": wall_time}}
        click.echo(json.dumps(doc, sort_keys=True, indent=2))
        return
    for line in lines:
        click.echo(line)
