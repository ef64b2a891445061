import time

import click

from ..core.formats import format_shape, read_tensor
from ..core.spectral import spectral_norm_estimate, spectral_norm_symmetric
from ..core.tensor import frobenius_norm
from ..schemas.spectral import NormsReport
from .common import emit, estimator_options, fmt, json_option, make_estimator


@click.command("norms")
@click.option("-i", "--input", "source", type=click.Path(exists=True, dir_okay=False), required=True, help="Tensor file")
@click.option("--symmetric", is_flag=True, help="Use the symmetric estimator (tensor must be symmetric)")
@estimator_options
@json_option
def norms(source, symmetric, starts, tol, seed, as_json):
    """
    Frobenius norm, spectral norm estimate, certified upper bound and ratio.

    The estimate is a lower bound on the spectral norm; the seed used is
    always reported.
    """
    started = time.perf_counter()
    T = read_tensor(source)
    cfg = make_estimator(starts, tol, seed)
    estimate = spectral_norm_symmetric(T, cfg) if symmetric else spectral_norm_estimate(T, cfg)
    frobenius = frobenius_norm(T)
    report = NormsReport(
        shape=T.shape,
        frobenius=frobenius,
        spectral=estimate.value,
        certified_upper=estimate.certified_upper,
        certificate=estimate.certificate,
        ratio=estimate.value / frobenius,
        symmetric=symmetric,
        converged=estimate.converged,
        starts_used=estimate.starts_used,
        seed=cfg.seed,
    )
    lines = [
        f"tensor {format_shape(report.shape)} from {source}",
        f"  frobenius        {fmt(report.frobenius)}",
        f"  spectral (est.)  {fmt(report.spectral)}",
        f"  certified upper  {fmt(report.certified_upper)}  via {report.certificate}",
        f"  ratio            {fmt(report.ratio)}",
        f"  seed {report.seed}, {report.starts_used} starts, {'converged' if report.converged else 'not converged'}",
    ]
    emit(report, as_json, lines, time.perf_counter() - started)
