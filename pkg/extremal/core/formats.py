"""Tensor file formats: JSON payloads and the compact index list for zero-one tensors."""

import logging
from pathlib import Path
from typing import Union

from pydantic import ValidationError

from ..schemas.tensor import TensorPayload
from .errors import FormatError, NonBinaryError, ShapeMismatchError
from .tensor import DenseTensor, Shape

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def format_shape(shape) -> str:
    return "x".join(str(int(n)) for n in shape)


def parse_shape(text: str) -> Shape:
    """
    Parse ``"3x4x5"`` (case-insensitive ``x``) into a shape tuple.

    Raises:
        FormatError: Empty parts, non-integers or dimensions below 1.
    """
    parts = text.strip().lower().split("x")
    try:
        dims = tuple(int(p) for p in parts)
    except ValueError:
        raise FormatError(f"malformed shape {text!r}; expected e.g. 3x4x5")
    if any(n < 1 for n in dims):
        raise FormatError(f"malformed shape {text!r}; dimensions must be positive")
    return dims


def dump_json(T: DenseTensor) -> str:
    return TensorPayload(shape=list(T.shape), data=T.flat()).model_dump_json()


def load_json(text: str) -> DenseTensor:
    try:
        payload = TensorPayload.model_validate_json(text)
    except ValidationError as exc:
        raise FormatError(f"invalid tensor JSON: {exc.errors()[0]['msg']}")
    return DenseTensor(payload.data, shape=payload.shape)


def dump_index_list(T: DenseTensor) -> str:
    """Shape line, then one 1-based multi-index of a one per line."""
    if not T.is_binary():
        raise NonBinaryError("the index-list format only holds zero-one tensors")
    lines = [format_shape(T.shape)]
    lines.extend(" ".join(str(i + 1) for i in idx) for idx in T.ones())
    return "\n".join(lines) + "\n"


def load_index_list(text: str) -> DenseTensor:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise FormatError("empty index list")
    shape = parse_shape(lines[0])
    indices = []
    for ln in lines[1:]:
        try:
            idx = tuple(int(tok) - 1 for tok in ln.replace(",", " ").split())
        except ValueError:
            raise FormatError(f"malformed index line {ln!r}")
        indices.append(idx)
    try:
        return DenseTensor.from_indices(shape, indices)
    except ShapeMismatchError as exc:
        raise FormatError(exc.detail)


def read_tensor(path: PathLike) -> DenseTensor:
    """Read a tensor file, picking the format from its content."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}")
    if text.lstrip().startswith("{"):
        return load_json(text)
    return load_index_list(text)


def write_tensor(path: PathLike, T: DenseTensor) -> None:
    """
    Write the index list when the suffix is ``.txt`` and the tensor is
    zero-one, JSON otherwise. :func:`read_tensor` tells the two apart by
    content.
    """
    path = Path(path)
    index_list = path.suffix == ".txt" and T.is_binary()
    if path.suffix == ".txt" and not index_list:
        logger.warning("tensor of shape %s is not zero-one; writing JSON to %s", T.shape, path)
    text = dump_index_list(T) if index_list else dump_json(T)
    path.write_text(text)
    logger.info("wrote %s tensor of shape %s to %s", "index-list" if index_list else "JSON", T.shape, path)
