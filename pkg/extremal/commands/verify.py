import time

import click

from ..core.config import settings
from ..core.errors import VerificationMismatch
from ..core.formats import format_shape
from ..core.verification import check_conjecture2, uit_certificate_suite, verify_tables
from .common import emit, estimator_options, fmt, fmt_indices, json_option, make_estimator


@click.command("verify-tables")
@estimator_options
@json_option
def verify_tables_command(starts, tol, seed, as_json):
    """Recompute every published zero-one witness and the lower-bound column."""
    started = time.perf_counter()
    report = verify_tables(make_estimator(starts, tol, seed, default_starts=settings.TABLE_STARTS))
    lines = []
    for row in report.rows:
        status = "PASS" if row.passed and row.lower_passed else "FAIL"
        lines.append(
            f"{status}  {row.table:<11} {row.label:<6} ratio {fmt(row.computed):<24} "
            f"expected {row.expected_form:<10} lower {row.lower_computed:.3f} (table {row.lower_expected:.3f})"
        )
    lines.append(f"{report.passed}/{report.total} rows PASS")
    emit(report, as_json, lines, time.perf_counter() - started)
    if not report.all_passed:
        raise VerificationMismatch(f"{report.total - report.passed} of {report.total} table rows do not match")


@click.command("check-conjecture2")
@click.option("--n", "n", type=click.IntRange(min=2), required=True, help="Size of the permutation matrices")
@estimator_options
@json_option
def check_conjecture2_command(n, starts, tol, seed, as_json):
    """
    Check that every evenly distributed zero-one tensor with n ones and
    spectral norm one unfolds to a permutation matrix.
    """
    started = time.perf_counter()
    report = check_conjecture2(n, make_estimator(starts, tol, seed))
    lines = [
        f"doubled prime shape {format_shape(report.shape)} for n={n}",
        f"  pool            {report.pool_size}",
        f"  evenly          {report.evenly_candidates} tensors in {report.classes} classes",
        f"  excluded        {report.excluded}",
        f"  norm one        {report.qualifying}",
        f"  unfold to perm  {report.permutation_unfoldings}",
        f"  indeterminate   {report.indeterminate}",
    ]
    if report.vacuous:
        lines.append("  n is prime: every candidate is a permutation matrix")
    lines.extend(f"  counterexample  {fmt_indices(c)}" for c in report.counterexamples)
    lines.append("verified" if report.verified else "NOT verified")
    emit(report, as_json, lines, time.perf_counter() - started)
    if not report.verified:
        raise VerificationMismatch(
            f"{len(report.counterexamples)} counterexamples and {report.indeterminate} indeterminate tensors"
        )


@click.command("uit-suite")
@click.option("--dims", default="2,3,4,5", show_default=True, help="Comma-separated dimensions to combine")
@click.option("--orders", default="2,3,4,5", show_default=True, help="Comma-separated orders")
@click.option("--max-size", type=click.IntRange(min=1), default=4096, show_default=True)
@estimator_options
@json_option
def uit_suite_command(dims, orders, max_size, starts, tol, seed, as_json):
    """Certify every unfolded identity tensor in range attains the lower bound."""
    started = time.perf_counter()
    try:
        dim_list = [int(t) for t in dims.split(",") if t.strip()]
        order_list = [int(t) for t in orders.split(",") if t.strip()]
    except ValueError:
        raise click.BadParameter("expected comma-separated integers", param_hint="--dims/--orders")
    rows = uit_certificate_suite(dim_list, order_list, max_size, make_estimator(starts, tol, seed))
    lines = [
        f"{'PASS' if r.passed else 'FAIL'}  {format_shape(r.shape):<12} estimate {fmt(r.estimate):<12} "
        f"upper {fmt(r.certified_upper):<8} via {r.certificate}"
        for r in rows
    ]
    passed = sum(r.passed for r in rows)
    lines.append(f"{passed}/{len(rows)} shapes PASS")
    emit({"rows": [r.model_dump(mode="json") for r in rows], "passed": passed, "total": len(rows)},
         as_json, lines, time.perf_counter() - started)
    if passed != len(rows):
        raise VerificationMismatch(f"{len(rows) - passed} identity tensors fail their certificate")
