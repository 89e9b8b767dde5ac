import numpy as np
import pytest

from polytoep.lattice import Box
from polytoep.symbols import (
    allclose,
    blaschke_factor,
    coefficients_from_samples,
    default_grid,
    evaluate_grid,
    from_coefficients,
    is_inner,
    is_invertible_ae,
    max_coeff_difference,
    multiply,
    product_inner,
    random_symbol,
)

E12 = np.array([[0, 1], [0, 0]], dtype=complex)


def test_from_coefficients_basic():
    sym = from_coefficients(2, 1, [((0, 0), 2), ((1, 0), 1), ((0, -1), 1)])
    assert sym.coeff((0, 0)).item() == 2
    assert sym.coeff((1, 0)).item() == 1
    assert sym.coeff((5, 5)).item() == 0
    assert sym.tail_bound == 0.0


def test_from_coefficients_block():
    sym = from_coefficients(1, 2, [((1,), E12)])
    assert np.array_equal(sym.coeff((1,)), E12)


def test_from_coefficients_rejects_duplicates_and_mismatches():
    with pytest.raises(ValueError, match="duplicate"):
        from_coefficients(2, 1, [((0, 0), 1), ((0, 0), 2)])
    with pytest.raises(ValueError, match="length"):
        from_coefficients(2, 1, [((0,), 1)])
    with pytest.raises(ValueError, match="shape"):
        from_coefficients(1, 2, [((0,), np.eye(3))])


def test_evaluate_pointwise():
    sym = from_coefficients(1, 1, [((0,), 2), ((1,), 1)])
    assert sym.evaluate((0.0,)).item() == pytest.approx(3)
    assert sym.evaluate((np.pi,)).item() == pytest.approx(1)
    blk = from_coefficients(1, 2, [((1,), E12)]).evaluate((0.0,))
    assert np.allclose(blk, E12)


def test_samples_round_trip_exponential():
    sym = from_coefficients(1, 1, [((0,), 2), ((1,), 1)])
    samples = evaluate_grid(sym, (8,))
    back = coefficients_from_samples(samples, Box((1,)))
    assert back.coeff((0,)).item() == pytest.approx(2, rel=1e-12)
    assert back.coeff((1,)).item() == pytest.approx(1, rel=1e-12)
    assert abs(back.coeff((-1,)).item()) < 1e-12


def test_samples_constant():
    samples = np.ones((4, 4), dtype=complex)
    back = coefficients_from_samples(samples, Box((0, 0)))
    assert back.coeff((0, 0)).item() == pytest.approx(1)


def test_samples_aliasing_guard():
    samples = np.exp(2j * np.linspace(0, 2 * np.pi, 2, endpoint=False))
    with pytest.raises(ValueError, match="aliasing"):
        coefficients_from_samples(samples, Box((1,)))


def test_dft_round_trip_random():
    rng = np.random.default_rng(7)
    for n, span, p in [(1, 3, 1), (2, 2, 1), (1, 2, 2), (3, 1, 1)]:
        sym = random_symbol(n, span, p=p, rng=rng)
        grid = default_grid(sym)
        back = coefficients_from_samples(evaluate_grid(sym, grid), Box((span,) * n), p=p)
        assert max_coeff_difference(back, sym) < 1e-12 * sym.sup_norm_estimate()


def test_multiply_polynomials():
    one_plus = from_coefficients(1, 1, [((0,), 1), ((1,), 1)])
    one_minus = from_coefficients(1, 1, [((0,), 1), ((1,), -1)])
    prod = multiply(one_plus, one_minus)
    want = from_coefficients(1, 1, [((0,), 1), ((2,), -1), ((1,), 0)])
    assert allclose(prod, want)


def test_multiply_identity_and_monomials():
    theta = from_coefficients(2, 1, [((1, 1), 1), ((2, 0), 0.5)])
    one = from_coefficients(2, 1, [((0, 0), 1)])
    assert allclose(multiply(theta, one), theta)
    za = from_coefficients(2, 1, [((1, 0), 1)])
    zb = from_coefficients(2, 1, [((0, 1), 1)])
    assert allclose(multiply(za, zb), from_coefficients(2, 1, [((1, 1), 1)]))


def test_multiply_commutative_associative_scalar():
    rng = np.random.default_rng(3)
    a = random_symbol(2, 1, rng=rng)
    b = random_symbol(2, 1, rng=rng)
    c = random_symbol(2, 1, rng=rng)
    assert max_coeff_difference(multiply(a, b), multiply(b, a)) < 1e-12
    assert (
        max_coeff_difference(multiply(multiply(a, b), c), multiply(a, multiply(b, c)))
        < 1e-10
    )


def test_multiply_dimension_mismatch():
    a = from_coefficients(1, 1, [((0,), 1)])
    b = from_coefficients(2, 1, [((0, 0), 1)])
    with pytest.raises(ValueError):
        multiply(a, b)


def test_blaschke_zero_center():
    sym = blaschke_factor(0.0, 5)
    assert allclose(sym, from_coefficients(1, 1, [((1,), 1)]))
    assert sym.tail_bound == 0.0


def test_blaschke_half():
    sym = blaschke_factor(0.5, 2)
    assert sym.coeff((0,)).item() == pytest.approx(-0.5)
    assert sym.coeff((1,)).item() == pytest.approx(0.75)
    assert sym.coeff((2,)).item() == pytest.approx(0.375)
    assert sym.tail_bound == pytest.approx(0.375)


def test_blaschke_rejects_boundary():
    with pytest.raises(ValueError):
        blaschke_factor(1.0, 4)


def test_blaschke_certificate_within_tail():
    for a, D in [(0.5, 12), (0.3 + 0.4j, 20), (0.9, 60)]:
        sym = blaschke_factor(a, D)
        cert = is_inner(sym, (256,), tol=0.0)
        assert cert.max_deviation <= sym.tail_bound * (1 + 1e-9) + 1e-14
        assert cert.passed


def test_product_inner():
    z = blaschke_factor(0.0, 1)
    prod = product_inner([z, z])
    assert allclose(prod, from_coefficients(2, 1, [((1, 1), 1)]))
    z2 = multiply(z, z)
    one = from_coefficients(1, 1, [((0,), 1)])
    assert allclose(product_inner([z2, one]), from_coefficients(2, 1, [((2, 0), 1)]))


def test_product_inner_with_blaschke_tail():
    b = blaschke_factor(0.5, 8)
    z = blaschke_factor(0.0, 1)
    prod = product_inner([b, z])
    assert prod.n == 2
    cert = is_inner(prod, (64, 8), tol=1e-10)
    assert cert.passed
    assert cert.tail_allowance > 0


def test_is_inner_examples():
    z1z2 = from_coefficients(2, 1, [((1, 1), 1)])
    cert = is_inner(z1z2, (16, 16), tol=1e-10)
    assert cert.passed and cert.max_deviation <= 1e-14

    cert = is_inner(blaschke_factor(0.5, 40), (64,), tol=1e-8)
    assert cert.passed

    bad = from_coefficients(1, 1, [((0,), 1), ((1,), 1)])
    cert = is_inner(bad, (16,), tol=1e-10)
    assert not cert.passed


def test_is_inner_requires_analytic():
    sym = from_coefficients(1, 1, [((-1,), 1)])
    with pytest.raises(ValueError, match="analytic"):
        is_inner(sym)


def test_is_invertible_ae():
    zI = from_coefficients(1, 2, [((1,), np.eye(2))])
    rep = is_invertible_ae(zI, (16,), delta=0.5)
    assert rep.invertible and rep.min_abs_det == pytest.approx(1.0)

    degenerate = from_coefficients(1, 2, [((1,), np.diag([1.0, 0.0]))])
    rep = is_invertible_ae(degenerate, (16,), delta=1e-8)
    assert not rep.invertible and rep.min_abs_det == pytest.approx(0.0)

    mixed_coeffs = {(k,): np.diag([0.0, v.item()]) for (k,), v in blaschke_factor(0.5, 40).coefficients.items()}
    mixed_coeffs[(1,)] = mixed_coeffs.get((1,), np.zeros((2, 2))) + np.diag([1.0, 0.0])
    mixed = from_coefficients(1, 2, list(mixed_coeffs.items()))
    rep = is_invertible_ae(mixed, (64,), delta=0.9)
    assert rep.invertible
    assert rep.min_abs_det >= 1 - 1e-8


def test_exact_inner_block_is_unitary_on_grid():
    theta = from_coefficients(1, 2, [((1,), np.array([[0, 1], [1, 0]], dtype=complex))])
    cert = is_inner(theta, (32,), tol=0.0)
    assert cert.passed and cert.max_deviation < 1e-14
    rep = is_invertible_ae(theta, (32,), delta=1 - 1e-12)
    assert rep.invertible and rep.min_abs_det == pytest.approx(1.0)


def test_default_grid_powers_of_two():
    sym = from_coefficients(1, 1, [((-3,), 1), ((5,), 1)])
    assert default_grid(sym) == (32,)  # span 8 -> 17 -> 32
