from fractions import Fraction
from math import factorial

import pytest

from elladic.errors import CongruenceTooWeak, Inconclusive, NotClosed, OutsideRegion
from elladic.flows import (SeriesMap, certify, delta_power, field_bracket, flow_equation_residual, flow_from_field,
                           hamiltonian_potential, interpolate_iterate, is_critical, lie_derivative, pullback_form,
                           vector_field_log)
from elladic.padic_core import RingSpec, padic_log, scalar
from elladic.series import DiffForm, TruncSeries, VectorField

R = RingSpec(3, 12)


def x1(n=8):
    return TruncSeries.var(R, 1, n, 0)


def plane(n=8):
    return TruncSeries.var(R, 2, n, 0), TruncSeries.var(R, 2, n, 1), TruncSeries.one(R, 2, n)


def test_delta_power_examples():
    x = x1()
    ident = SeriesMap.identity(R, 1, 8)
    for k in (1, 2, 3):
        assert delta_power(ident, k)[0][0].is_zero()
    sq = SeriesMap([x + x * x])
    assert delta_power(sq, 1)[0][0].equals(x * x)
    # psi(psi(x)) - 2 psi(x) + x for psi = x + x^2
    assert delta_power(sq, 2)[0][0].equals(x ** 3 * 2 + x ** 4)


def test_delta_power_needs_tangent_identity():
    with pytest.raises(CongruenceTooWeak):
        certify(SeriesMap([x1() * 2]), 1)


def test_interpolation_examples():
    x = x1()
    ident = SeriesMap.identity(R, 1, 8)
    assert interpolate_iterate(ident, 7, certify(ident, 1)).equals(ident)
    cubic = SeriesMap([x + x ** 3])
    cert = certify(cubic, 1)
    assert interpolate_iterate(cubic, 2, cert).equals(cubic.compose(cubic))
    linear = SeriesMap([x * 4])
    half = interpolate_iterate(linear, Fraction(1, 2), certify(linear, 1))
    assert half.compose(half).equals(linear)
    # binomial series for 4^(1/2) = (1+3)^(1/2) picking the root that is 1 mod 3
    root = sum(_binom_half(k) * 3 ** k for k in range(30))
    assert half.components[0].equals(x * root)


def _binom_half(k):
    out = Fraction(1)
    for i in range(k):
        out *= Fraction(1, 2) - i
    return out / factorial(k)


def test_small_radius_restricts_time():
    x = x1()
    psi = SeriesMap([x + x * x])
    cert = certify(psi, Fraction(1, 3))
    assert cert.time_exponent > 0
    assert not cert.admits(1) and cert.admits(9)
    with pytest.raises(OutsideRegion):
        interpolate_iterate(psi, 1, cert)


def test_vector_field_log_examples():
    assert vector_field_log(SeriesMap.identity(R, 1, 8)).is_zero()
    x = x1()
    X = vector_field_log(SeriesMap([x * 4]))
    log4 = padic_log(scalar(R, 4))
    assert X.components[0].equals(x.scale_scalar(log4))
    X = vector_field_log(SeriesMap([x + x * x]))
    leading = x * x - (x ** 3 * 2 + x ** 4).scale(Fraction(1, 2))
    assert (X.components[0] - leading).order() >= 4


def test_flow_of_linear_field():
    x = x1()
    assert flow_from_field(VectorField([TruncSeries.zero(R, 1, 8)]), 1).at(5).equals(SeriesMap.identity(R, 1, 8))
    X = VectorField([x * 3])
    for t in (1, 2, Fraction(1, 2)):
        exp = sum(Fraction(3 ** k) * Fraction(t) ** k / factorial(k) for k in range(40))
        assert flow_from_field(X, 1).at(t).components[0].equals(x * exp)


def test_flow_of_logarithm_recovers_map():
    x = x1()
    psi = SeriesMap([x + x ** 3])
    X = vector_field_log(psi)
    assert flow_from_field(X, 1).at(1).equals(psi)
    lhs, rhs = flow_equation_residual(psi, X)
    assert all(a.equals(b) for a, b in zip(lhs, rhs))


def test_one_parameter_law_on_small_example():
    x = x1()
    psi = SeriesMap([x + x ** 3 + x ** 4 * 3])
    cert = certify(psi, 1)
    for t, u in ((2, 5), (Fraction(1, 2), Fraction(3, 4)), (-1, 1)):
        lhs = interpolate_iterate(psi, t + u, cert)
        rhs = interpolate_iterate(psi, t, cert).compose(interpolate_iterate(psi, u, cert))
        assert lhs.equals(rhs)


def test_field_bracket_examples():
    a, b, one = plane()
    zero = TruncSeries.zero(R, 2, 8)
    d1, d2 = VectorField([one, zero]), VectorField([zero, one])
    assert field_bracket(d1, d1).is_zero()
    assert field_bracket(d1, d2).is_zero()
    assert field_bracket(d1, VectorField([zero, a])).equals(d2)
    X = VectorField([a * b, b ** 3])
    assert field_bracket(X, X).is_zero()


def test_lie_derivative_examples():
    a, b, one = plane()
    omega = DiffForm.two_form(R, 2, 8, {(0, 1): one})
    euler = VectorField([a, b])
    assert lie_derivative(euler, omega).equals(omega.scale(2))
    assert lie_derivative(VectorField.zero(R, 2, 8), omega).is_zero()


def test_hamiltonian_potential_examples():
    a, b, one = plane()
    omega = DiffForm.two_form(R, 2, 8, {(0, 1): one})
    assert hamiltonian_potential(VectorField.zero(R, 2, 8), omega).is_zero()
    rot = VectorField([b, -a])
    assert hamiltonian_potential(rot, omega).equals((a * a + b * b).scale(Fraction(1, 2)))
    with pytest.raises(NotClosed):
        hamiltonian_potential(VectorField([a, TruncSeries.zero(R, 2, 8)]), omega)


def test_pullback_of_area_form_by_linear_map():
    a, b, one = plane()
    omega = DiffForm.two_form(R, 2, 8, {(0, 1): one})
    psi = SeriesMap([a * 4 + b * 3, a * 6 + b * 7])
    # determinant 28 - 18 = 10
    assert pullback_form(psi, omega).equals(omega.scale(10))


def test_is_critical_examples():
    a, b, one = plane()
    zero = TruncSeries.zero(R, 2, 8)
    assert is_critical([VectorField([a, zero])], [0, 0]) == [True]
    x = x1()
    assert is_critical([VectorField([x - 3])], [3]) == [True]
    assert is_critical([VectorField([TruncSeries.one(R, 1, 8)])], [0]) == [False]
    with pytest.raises(Inconclusive):
        is_critical([VectorField([x - 3])], [3], digits=40)
