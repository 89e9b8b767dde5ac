import numpy as np
import pytest

from polytoep import io
from polytoep.lattice import Box
from polytoep.modelspace import model_basis
from polytoep.operators import toeplitz
from polytoep.symbols import from_coefficients, max_coeff_difference, random_symbol


def test_symbol_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    for n, span, p in [(2, 2, 1), (1, 3, 2)]:
        sym = random_symbol(n, span, p=p, rng=rng)
        path = tmp_path / f"sym_{n}_{p}.json"
        io.save_symbol(path, sym)
        back = io.load_symbol(path)
        assert back.n == n and back.p == p
        assert max_coeff_difference(back, sym) == 0.0  # repr floats round-trip exactly
        assert back.tail_bound == sym.tail_bound


def test_symbol_rejects_malformed(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"n": 1}')
    with pytest.raises(ValueError, match="malformed"):
        io.load_symbol(path)


def test_operator_round_trip_binary(tmp_path):
    rng = np.random.default_rng(1)
    sym = random_symbol(2, 2, rng=rng)
    op = toeplitz(sym, Box((3, 4)))
    path = tmp_path / "T.op"
    io.save_operator(path, op, fmt="binary")
    back = io.load_operator(path)
    assert back.box == op.box and back.p == op.p and back.tag == "toeplitz"
    assert np.array_equal(back.matrix, op.matrix)
    assert back.symbol is not None
    assert max_coeff_difference(back.symbol, sym) == 0.0


def test_operator_round_trip_csv(tmp_path):
    rng = np.random.default_rng(2)
    sym = random_symbol(1, 2, p=2, rng=rng)
    op = toeplitz(sym, Box((3,)))
    path = tmp_path / "T.opcsv"
    io.save_operator(path, op, fmt="csv")
    back = io.load_operator(path)
    assert np.array_equal(back.matrix, op.matrix)


def test_operator_payload_size_check(tmp_path):
    sym = from_coefficients(1, 1, [((0,), 1)])
    op = toeplitz(sym, Box((3,)))
    path = tmp_path / "T.op"
    io.save_operator(path, op)
    data = path.read_bytes()
    (tmp_path / "short.op").write_bytes(data[:-16])
    with pytest.raises(ValueError, match="payload"):
        io.load_operator(tmp_path / "short.op")


def test_modelspace_round_trip(tmp_path):
    theta = from_coefficients(2, 1, [((1, 1), 1)])
    ms = model_basis(theta, Box((3, 3)))
    path = tmp_path / "Q.ms"
    io.save_modelspace(path, ms)
    back = io.load_modelspace(path)
    assert back.q == ms.q
    assert back.box == ms.box and back.safe_box == ms.safe_box
    assert np.array_equal(back.basis, ms.basis)
    assert max_coeff_difference(back.theta, theta) == 0.0


def test_report_determinism(tmp_path):
    report = {"b": 1.0 / 3.0, "a": [1, 2.5e-17], "nested": {"x": True}}
    p1, p2 = tmp_path / "r1.json", tmp_path / "r2.json"
    io.write_report(p1, report)
    io.write_report(p2, {"nested": {"x": True}, "a": [1, 2.5e-17], "b": 1.0 / 3.0})
    assert p1.read_bytes() == p2.read_bytes()


def test_sequence_csv(tmp_path):
    path = tmp_path / "seq.csv"
    io.write_sequence_csv(path, [(0, 1.0), (1, 0.5)], ("m", "c_m"))
    lines = path.read_text().splitlines()
    assert lines[0] == "m,c_m"
    assert lines[1] == "0,1.0"
