import time

import click
from pydantic import ValidationError

from ..core.config import settings
from ..core.formats import format_shape
from ..core.search import CheckpointStore, search_min_ratio
from ..schemas.search import SearchConfig
from .common import SHAPE, emit, estimator_options, fmt, fmt_indices, json_option, make_estimator


@click.command("search")
@click.option("--shape", type=SHAPE, required=True, help="Dimensions, e.g. 2x2x3")
@click.option("--symmetric", is_flag=True, help="Only symmetric zero-one tensors")
@click.option("--max-ones", type=click.IntRange(min=1), default=None, help="Stop after tensors with this many ones")
@click.option(
    "--jobs",
    type=click.IntRange(min=1),
    default=lambda: settings.JOBS,
    show_default="EXTREMAL_JOBS or 1",
    help="Worker processes",
)
@click.option("--resume", is_flag=True, help="Continue the last run with the same configuration")
@click.option("--db", default=None, help="Run-store URL for checkpoints (default: EXTREMAL_DATABASE_URL)")
@click.option("--no-prune", is_flag=True, help="Also evaluate tensors with an all-zero slice")
@estimator_options
@json_option
def search(shape, symmetric, max_ones, jobs, resume, db, no_prune, starts, tol, seed, as_json):
    """
    Smallest spectral/Frobenius ratio over zero-one tensors of a shape.

    - **--shape**: the shape to enumerate
    - **--resume/--db**: checkpoint to and resume from the run store
    """
    started = time.perf_counter()
    try:
        cfg = SearchConfig(
            shape=shape,
            symmetric=symmetric,
            max_ones=max_ones,
            estimator=make_estimator(starts, tol, seed, default_starts=settings.SEARCH_STARTS),
            prune_zero_slices=not no_prune,
            parallelism=jobs,
        )
    except ValidationError as exc:
        raise click.BadParameter(exc.errors()[0]["msg"], param_hint="--shape")

    # Use the run store only when asked to
    store = CheckpointStore(db) if (db is not None or resume) else None
    result = search_min_ratio(cfg, store=store, resume=resume)

    lines = [
        f"search over {'symmetric ' if symmetric else ''}zero-one {format_shape(result.shape)} tensors",
        f"  best ratio  {fmt(result.best_ratio)}",
        f"  classes     {result.explored} explored, {result.pruned} pruned, {result.raw_covered} raw tensors",
        f"  complete    {'yes' if result.complete else f'no (max ones {result.max_ones})'}",
        f"  seed        {result.seed}",
        "  witnesses:",
    ]
    lines.extend(f"    {fmt_indices(w)}" for w in result.witnesses)
    emit(result, as_json, lines, time.perf_counter() - started)
