import math
import time
from typing import Optional

import click

from ..core.constructions import (
    build_partition,
    build_uit,
    build_upt,
    compression_power,
    symmetric_embed,
    symmetrize,
    tall_extreme,
)
from ..core.formats import dump_index_list, dump_json, format_shape, read_tensor, write_tensor
from ..core.tensor import DenseTensor
from ..schemas.tensor import TensorPayload
from .common import PERMUTATION, SHAPE, emit, json_option


@click.group("construct")
def construct():
    """Build extremal tensors and write them to a file or stdout."""


output_option = click.option(
    "-o", "--output", type=click.Path(dir_okay=False), default=None, help="File to write; .txt gives the index list"
)
input_option = click.option(
    "-i", "--input", "source", type=click.Path(exists=True, dir_okay=False), required=True, help="Tensor file"
)


def _deliver(T: DenseTensor, output: Optional[str], as_json: bool, started: float) -> None:
    if output is not None:
        write_tensor(output, T)
        emit(
            {"output": output, "shape": list(T.shape)},
            as_json,
            [f"wrote {format_shape(T.shape)} tensor to {output}"],
            time.perf_counter() - started,
        )
        return
    if as_json:
        emit(TensorPayload(shape=list(T.shape), data=T.flat()), True, wall_time=time.perf_counter() - started)
        return
    click.echo(dump_index_list(T) if T.is_binary() else dump_json(T), nl=False)
    if not T.is_binary():
        click.echo()


@construct.command("uit")
@click.option("--shape", type=SHAPE, required=True)
@output_option
@json_option
def uit(shape, output, as_json):
    """Unfolded identity tensor of the shape."""
    started = time.perf_counter()
    _deliver(build_uit(shape), output, as_json, started)


@construct.command("upt")
@click.option("--shape", type=SHAPE, required=True)
@click.option("--perm", type=PERMUTATION, required=True, help="1-based permutation of 1..n, n = sqrt(prod of dims)")
@output_option
@json_option
def upt(shape, perm, output, as_json):
    """Unfolded permutation tensor of the shape."""
    started = time.perf_counter()
    n = math.isqrt(math.prod(shape))
    _deliver(build_upt(n, perm, build_partition(shape)), output, as_json, started)


@construct.command("tall")
@click.option("--shape", type=SHAPE, required=True)
@click.option("--mode", type=click.IntRange(min=1), default=None, help="1-based tall mode (default: the largest)")
@click.option("--perm", type=PERMUTATION, default=None, help="1-based permutation of the tall mode's indices")
@output_option
@json_option
def tall(shape, mode, perm, output, as_json):
    """Extreme zero-one tensor of a tall shape."""
    started = time.perf_counter()
    j = mode - 1 if mode is not None else max(range(len(shape)), key=lambda k: shape[k])
    if j >= len(shape):
        raise click.BadParameter(f"mode {mode} out of range for {format_shape(shape)}", param_hint="--mode")
    pi = perm if perm is not None else list(range(shape[j]))
    _deliver(tall_extreme(shape, j, pi), output, as_json, started)


@construct.command("sym-embed")
@input_option
@output_option
@json_option
def sym_embed(source, output, as_json):
    """Symmetric embedding of a tensor."""
    started = time.perf_counter()
    _deliver(symmetric_embed(read_tensor(source)), output, as_json, started)


@construct.command("symmetrize")
@input_option
@output_option
@json_option
def symmetrize_command(source, output, as_json):
    """Sum of all mode transposes of a cubical tensor."""
    started = time.perf_counter()
    _deliver(symmetrize(read_tensor(source)), output, as_json, started)


@construct.command("compress")
@click.option("-i", "--input", "source", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--shape", type=SHAPE, default=None, help="Use the unfolded identity tensor of this shape")
@click.option("--m", "m", type=click.IntRange(min=1), default=2, show_default=True, help="Kronecker power")
@output_option
@json_option
def compress(source, shape, m, output, as_json):
    """Mode-wise Kronecker power of a tensor."""
    started = time.perf_counter()
    if (source is None) == (shape is None):
        raise click.UsageError("give exactly one of -i/--input and --shape")
    T = read_tensor(source) if source is not None else build_uit(shape)
    _deliver(compression_power(T, m), output, as_json, started)
