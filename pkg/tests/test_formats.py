import numpy as np
import pytest

from extremal.core.errors import FormatError, NonBinaryError
from extremal.core.formats import (
    dump_index_list,
    dump_json,
    format_shape,
    load_index_list,
    load_json,
    parse_shape,
    read_tensor,
    write_tensor,
)
from extremal.core.tensor import DenseTensor


def test_parse_shape():
    assert parse_shape("3x4X5") == (3, 4, 5)
    assert format_shape((3, 4, 5)) == "3x4x5"


@pytest.mark.parametrize("text", ["", "3x", "axb", "3x0x2"])
def test_parse_shape_rejects(text):
    with pytest.raises(FormatError):
        parse_shape(text)


def test_index_list_is_one_based():
    T = DenseTensor.from_indices((2, 2, 2), [(0, 0, 1), (0, 1, 0), (1, 0, 0)])
    assert dump_index_list(T) == "2x2x2\n1 1 2\n1 2 1\n2 1 1\n"
    assert load_index_list(dump_index_list(T)) == T


def test_index_list_skips_comments_and_blank_lines():
    T = load_index_list("# table witness\n2x2x3\n\n1 1 1\n2 1 2\n2 2 3\n")
    assert T.ones() == [(0, 0, 0), (1, 0, 1), (1, 1, 2)]


def test_index_list_rejects_non_binary():
    with pytest.raises(NonBinaryError):
        dump_index_list(DenseTensor([[2.0, 0.0]]))


def test_index_list_out_of_range():
    with pytest.raises(FormatError):
        load_index_list("2x2\n3 1\n")


def test_json_payload():
    T = DenseTensor(np.arange(6.0).reshape(2, 3))
    assert load_json(dump_json(T)) == T


def test_json_entry_count_mismatch():
    with pytest.raises(FormatError):
        load_json('{"shape": [2, 2], "data": [1, 2, 3]}')


def test_read_write_picks_format(tmp_path):
    T = DenseTensor.from_indices((2, 3), [(0, 1), (1, 2)])
    write_tensor(tmp_path / "t.txt", T)
    write_tensor(tmp_path / "t.json", T)
    assert (tmp_path / "t.txt").read_text().startswith("2x3\n")
    assert (tmp_path / "t.json").read_text().startswith("{")
    assert read_tensor(tmp_path / "t.txt") == T
    assert read_tensor(tmp_path / "t.json") == T


def test_non_binary_txt_falls_back_to_json(tmp_path):
    T = DenseTensor([[0.5, 2.0], [0.0, 1.0]])
    write_tensor(tmp_path / "t.txt", T)
    assert (tmp_path / "t.txt").read_text().startswith("{")
    assert read_tensor(tmp_path / "t.txt") == T


def test_read_missing_file(tmp_path):
    with pytest.raises(FormatError):
        read_tensor(tmp_path / "missing.json")
