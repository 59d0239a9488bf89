import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sptucker import (CooTensor, FormatError, TnsParseError, read_pgm, read_tns,
                      write_pgm, write_tns)
from sptucker.io import format_tns

from conftest import random_coo


def write(tmp_path, text, name="t.tns"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_table_first_entry(tmp_path):
    t = read_tns(write(tmp_path, "# sample\n4 5 5 5 5 1\n1 1 1 1 2.0\n"))
    assert t.shape == (5, 5, 5, 5)
    assert list(t.entries()) == [((1, 1, 1, 1), 2.0)]


def test_empty_body(tmp_path):
    t = read_tns(write(tmp_path, "3 2 2 2 0\n"))
    assert t.nnz == 0 and t.shape == (2, 2, 2)


def test_write_format(tmp_path):
    t = CooTensor((2, 3), [[1, 2], [0, 0]], [0.1, -3.0])
    assert format_tns(t) == "2 2 3 2\n1 1 -3.0\n2 3 0.1\n"


@pytest.mark.parametrize("text,lineno", [
    ("3 2 2 2 1\n1 1 x 1.0\n", 2),
    ("3 2 2 2 1\n1 1 1\n", 2),
    ("3 2 2 2\n", 1),
    ("two 2 2\n", 1),
    ("\n# c\n2 2 2 1\n1 1 nan\n", 4),
    ("2 2 2 1\n1 1 abc\n", 2),
])
def test_parse_errors_carry_line(tmp_path, text, lineno):
    with pytest.raises(TnsParseError) as info:
        read_tns(write(tmp_path, text))
    assert info.value.lineno == lineno
    assert str(info.value).startswith(f"line {lineno}:")


@pytest.mark.parametrize("text", [
    "2 2 2 2\n1 1 1.0\n",          # fewer entries than declared
    "2 2 2 1\n3 1 1.0\n",          # coordinate past the shape
    "2 2 2 1\n0 1 1.0\n",          # 0 is not a 1-based coordinate
    "2 0 2 0\n",                    # empty mode
    "# nothing\n",
])
def test_format_errors(tmp_path, text):
    with pytest.raises(FormatError):
        read_tns(write(tmp_path, text))


@given(st.integers(0, 2 ** 32 - 1))
def test_tns_roundtrip_bitwise(tmp_path_factory, seed):
    rng = np.random.default_rng(seed)
    shape = tuple(int(s) for s in rng.integers(1, 7, int(rng.integers(1, 5))))
    t = random_coo(rng, shape, int(rng.integers(0, 30)))
    t = t * float(10.0 ** rng.integers(-300, 300))
    p = tmp_path_factory.mktemp("tns") / "x.tns"
    write_tns(t, p)
    back = read_tns(p)
    assert back == t


def test_write_requires_coo(tmp_path):
    with pytest.raises(TypeError):
        write_tns(np.zeros((2, 2)), tmp_path / "x.tns")


def test_pgm_examples(tmp_path):
    p = tmp_path / "black.pgm"
    write_pgm(np.zeros((3, 4)), p)
    assert read_pgm(p).nnz == 0
    img = np.zeros((3, 4))
    img[1, 2] = 1.0
    write_pgm(img, p)
    t = read_pgm(p)
    assert t.shape == (3, 4) and list(t.entries()) == [((2, 3), 1.0)]


def test_pgm_ascii_16bit_and_comments(tmp_path):
    p = tmp_path / "a.pgm"
    p.write_bytes(b"P2\n# comment\n3 2\n# more\n1000\n0 500 1000\n250 0 0\n")
    t = read_pgm(p)
    np.testing.assert_array_equal(t.to_dense(), [[0, 0.5, 1.0], [0.25, 0, 0]])
    p.write_bytes(b"P5 2 1 65535\n" + np.array([65535, 32768], ">u2").tobytes())
    np.testing.assert_array_equal(read_pgm(p).to_dense(), [[1.0, 32768 / 65535]])


@pytest.mark.parametrize("data", [b"P6\n1 1\n255\n\x00\x00\x00", b"P5\n2 2\n255\n\x00",
                                  b"P2\n1 1\n70000\n5\n", b"P2\n2 1\n10\n11 0\n", b"P5\n1"])
def test_pgm_errors(tmp_path, data):
    p = tmp_path / "bad.pgm"
    p.write_bytes(data)
    with pytest.raises(FormatError):
        read_pgm(p)


@given(st.integers(0, 2 ** 32 - 1))
def test_pgm_roundtrip_quantization(tmp_path_factory, seed):
    rng = np.random.default_rng(seed)
    img = rng.random((int(rng.integers(1, 20)), int(rng.integers(1, 20))))
    img[rng.random(img.shape) < 0.5] = 0.0
    d = tmp_path_factory.mktemp("pgm")
    write_pgm(img, d / "a.pgm")
    once = read_pgm(d / "a.pgm")
    assert np.max(np.abs(once.to_dense() - img)) <= 0.5 / 255 + 1e-12
    write_pgm(once, d / "b.pgm")
    assert read_pgm(d / "b.pgm") == once


def test_pgm_clamps(tmp_path):
    p = tmp_path / "c.pgm"
    write_pgm(np.array([[-1.0, 2.0, 0.5]]), p)
    np.testing.assert_allclose(read_pgm(p).to_dense(), [[0.0, 1.0, 128 / 255]])
    with pytest.raises(ValueError):
        write_pgm(np.zeros(3), p)
