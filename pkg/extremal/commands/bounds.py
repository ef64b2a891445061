import time

import click
from pydantic import ValidationError

from ..core.bounds import order_gap, phi_bounds, psi_bounds
from ..core.formats import format_shape
from ..schemas.bounds import BoundReport, NumberField, SpaceSpec
from .common import SHAPE, emit, fmt, json_option

FIELDS = click.Choice([f.value for f in NumberField], case_sensitive=False)


def _space(shape, cube, order, field, symmetric) -> SpaceSpec:
    if shape is None:
        if cube is None or order is None:
            raise click.UsageError("give --shape, or both --cube and --order")
        shape = (cube,) * order
    elif cube is not None or order is not None:
        raise click.UsageError("--shape cannot be combined with --cube/--order")
    try:
        return SpaceSpec(shape=shape, field=NumberField(field.lower()), symmetric=symmetric)
    except ValidationError as exc:
        raise click.BadParameter(exc.errors()[0]["msg"], param_hint="--shape")


def _report_lines(report: BoundReport) -> list[str]:
    space = report.space
    title = f"{report.quantity} over {space.field.value} {format_shape(space.shape)}"
    if space.symmetric:
        title += " (symmetric)"
    if report.conjectural:
        title += " [zero-one values assume the nonnegative ones]"
    lines = [title]
    if report.exact is not None:
        lines.append(f"  exact  {fmt(report.exact)}")
    lines.append(f"  lower  {fmt(report.lower)}")
    lines.append(f"  upper  {fmt(report.upper)}")
    lines.append("  formulas:")
    for term in report.formulas:
        lines.append(f"    {term.role:<5}  {term.name:<28} {fmt(term.value):<26} {term.note}")
    return lines


@click.command("bounds")
@click.option("--shape", type=SHAPE, default=None, help="Dimensions, e.g. 3x4x5")
@click.option("--cube", type=click.IntRange(min=2), default=None, help="Common dimension of a cubical space")
@click.option("--order", type=click.IntRange(min=1), default=None, help="Order of a cubical space")
@click.option("--field", type=FIELDS, default=NumberField.NONNEG.value, show_default=True)
@click.option("--symmetric", is_flag=True, help="Restrict to symmetric tensors")
@click.option("--psi", is_flag=True, help="Report the Frobenius/nuclear ratio instead")
@json_option
def bounds(shape, cube, order, field, symmetric, psi, as_json):
    """
    Closed-form bounds on the extreme ratio of a tensor space.

    - **--shape** or **--cube/--order**: the space
    - **--field**: complex, real, nonneg or binary
    """
    started = time.perf_counter()
    space = _space(shape, cube, order, field, symmetric)
    report = psi_bounds(space) if psi else phi_bounds(space)
    emit(report, as_json, _report_lines(report), time.perf_counter() - started)


@click.command("order-gap")
@click.option("--shape", type=SHAPE, required=True, help="Dimensions, e.g. 3x4x5")
@click.option("--field", type=FIELDS, default=NumberField.NONNEG.value, show_default=True)
@json_option
def order_gap_command(shape, field, as_json):
    """Compare the orders of magnitude of the two extreme ratios."""
    started = time.perf_counter()
    report = order_gap(_space(shape, None, None, field, False))
    lines = [
        f"order gap for {format_shape(report.shape)}",
        f"  phi order  {fmt(report.phi_order)}",
        f"  psi order  {fmt(report.psi_order)}",
        f"  tall       {'yes' if report.tall else 'no'}",
        f"  collapsed  {'yes' if report.collapsed else 'no'}",
    ]
    emit(report, as_json, lines, time.perf_counter() - started)
