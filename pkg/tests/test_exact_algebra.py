"""
Exact arithmetic substrate: polynomials, rational functions, matrices and
prime-factored rationals.
"""
import random
from fractions import Fraction

import pytest
from sympy import Symbol, resultant

from fractal_trees.algebra import (
    FactoredInteger,
    FactoredRational,
    RatMatrix,
    RationalFunction,
    UniPoly,
    char_poly,
    det_fraction_free,
    factor_rational,
    image_class,
    irreducible_factors,
    is_irreducible,
    preimage_poly,
)
from fractal_trees.algebra.polynomials import X, poly_product
from fractal_trees.errors import (
    AlgebraError,
    NotSquareError,
    PoleError,
    ReducibleClassError,
    ResourceCapExceeded,
)

SG_R = RationalFunction.from_expr(X * (5 - 4 * X))
NPCF_R = RationalFunction.from_expr(-24 * X * (X - 1) * (2 * X - 3) / (14 * X - 15))
Y = Symbol("y")
SEED = 20240917


# -- polynomials ---------------------------------------------------------------

def test_coefficients_are_ascending():
    p = UniPoly.from_coefficients([1, 2, 3])
    assert p.coefficients == (1, 2, 3)
    assert p.degree == 2
    assert p.leading == 3
    assert p.constant_term == 1
    assert p.coefficient(7) == 0


def test_zero_polynomial_has_degree_minus_one():
    assert UniPoly.from_coefficients([]).degree == -1
    with pytest.raises(AlgebraError):
        UniPoly.from_coefficients([0]).monic()


def test_content_carries_sign_of_leading_coefficient():
    p = UniPoly.from_coefficients([Fraction(1, 2), Fraction(-3, 2)])
    assert p.content == Fraction(-1, 2)
    assert p.primitive_coefficients == (-1, 3)
    assert p.primitive.scale(p.content) == p


def test_root_sum_and_product():
    p = UniPoly.from_expr((X - 2) * (X - 3) * (X + 5))
    assert p.root_sum() == 0
    assert p.root_product() == -30


def test_factorization_is_sorted_and_primitive():
    f = factor_rational(UniPoly.from_expr(2 * X**3 - 2 * X))
    assert f.content == 2
    assert [g.coefficients for g, _ in f.factors] == [(-1, 1), (0, 1), (1, 1)]
    assert f.expand() == UniPoly.from_expr(2 * X**3 - 2 * X)


def test_irreducibility():
    assert is_irreducible(UniPoly.from_expr(X**2 - 2))
    assert not is_irreducible(UniPoly.from_expr(X**2 - 1))
    assert not is_irreducible(UniPoly.constant(3))
    assert irreducible_factors(UniPoly.from_expr(4 * X**2 - 1)) == [
        UniPoly.linear_root(Fraction(1, 2)),
        UniPoly.linear_root(Fraction(-1, 2)),
    ]


def test_degree_six_product_is_recovered():
    pieces = [X**2 - 2, X**2 + X + 1, 3 * X - 1, X + 2]
    p = UniPoly.from_expr(5 * pieces[0] * pieces[1] * pieces[2] * pieces[3])
    f = factor_rational(p)
    assert p.degree == 6
    assert f.expand() == p
    assert {g for g, _ in f.factors} == {UniPoly.from_expr(q).primitive for q in pieces}
    assert all(k == 1 for _, k in f.factors)


def test_repeated_factors_keep_multiplicity():
    p = UniPoly.from_expr((X**2 - 2) ** 2 * (X - 1) ** 3)
    f = factor_rational(p)
    assert f.multiplicity(UniPoly.from_expr(X**2 - 2)) == 2
    assert f.multiplicity(UniPoly.linear_root(1)) == 3
    assert f.expand() == p


def test_hexagasket_quadratic_stays_irreducible():
    # roots (3 +- sqrt 2) / 4
    q = UniPoly.from_expr(16 * X**2 - 24 * X + 7)
    assert is_irreducible(q)
    assert irreducible_factors(q) == [q.monic()]
    assert q.monic().root_sum() == Fraction(3, 2)
    assert q.monic().root_product() == Fraction(7, 16)


def test_factor_rational_rejects_zero():
    with pytest.raises(AlgebraError):
        factor_rational(UniPoly.constant(0))


def test_count_roots_in_interval():
    p = UniPoly.from_expr((X - 1) * (X - 3) * (X**2 + 1))
    assert p.count_roots(0, 2) == 1
    assert p.count_roots(0, 4) == 2


# -- rational functions ----------------------------------------------------------

def test_rational_function_canonical_form():
    r = RationalFunction.of(UniPoly.from_expr(2 * X), UniPoly.from_expr(4 * X))
    assert r == RationalFunction.constant(Fraction(1, 2))
    s = RationalFunction.of(UniPoly.from_expr(X), UniPoly.from_expr(-2 * X + 1))
    assert s.denominator.leading > 0
    assert s.denominator.primitive == s.denominator


def test_npcf_r_reads_off_decay_constant():
    assert NPCF_R.numerator.degree == 3
    assert NPCF_R.numerator.leading == -48
    assert NPCF_R.denominator.constant_term == -15
    assert -NPCF_R.denominator.constant_term / NPCF_R.numerator.leading == Fraction(-5, 16)


def test_compose_and_evaluate():
    assert SG_R(Fraction(1, 2)) == Fraction(3, 2)
    assert SG_R.compose(SG_R)(Fraction(1, 2)) == Fraction(-3, 2)
    assert (SG_R + 1)(1) == 2
    assert (SG_R * SG_R)(1) == 1


def test_evaluate_at_pole_raises():
    with pytest.raises(PoleError):
        NPCF_R(Fraction(15, 14))


def test_derivative():
    assert SG_R.derivative() == RationalFunction.from_expr(5 - 8 * X)


# -- preimages -------------------------------------------------------------------

def test_preimage_of_three_quarters_under_sierpinski_map():
    p = preimage_poly(SG_R, UniPoly.linear_root(Fraction(3, 4)), 1)
    assert p.coefficients == (Fraction(3, 16), Fraction(-5, 4), 1)


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_preimage_degree_grows_geometrically(k):
    p = preimage_poly(SG_R, UniPoly.linear_root(Fraction(5, 4)), k)
    assert p.degree == 2**k
    assert p.is_monic


@pytest.mark.parametrize("R", [SG_R, NPCF_R], ids=["sierpinski", "npcf"])
@pytest.mark.parametrize("beta", [Fraction(3, 4), Fraction(5, 4)])
@pytest.mark.parametrize("k", [0, 1, 2])
def test_preimage_step_is_a_resultant(R, beta, k):
    lower = preimage_poly(R, UniPoly.linear_root(beta), k)
    upper = preimage_poly(R, UniPoly.linear_root(beta), k + 1)
    res = resultant(
        lower.as_expr().subs(X, Y),
        R.numerator.as_expr() - Y * R.denominator.as_expr(),
        Y,
    )
    assert UniPoly.from_expr(res).monic() == upper
    # lifting each irreducible factor of the lower level separately gives the same class
    lifted = poly_product([(preimage_poly(R, f, 1), e) for f, e in factor_rational(lower)])
    assert lifted == upper


def test_preimage_rejects_reducible_class():
    with pytest.raises(ReducibleClassError):
        preimage_poly(SG_R, UniPoly.from_expr(X**2 - 1), 1)


def test_image_class_inverts_preimage():
    pre = preimage_poly(SG_R, UniPoly.linear_root(Fraction(3, 4)), 1)
    assert image_class(SG_R, pre) == UniPoly.linear_root(Fraction(3, 4))
    assert image_class(SG_R, UniPoly.linear_root(Fraction(3, 2))) == UniPoly.linear_root(Fraction(-3, 2))


def test_image_class_of_pole_is_none():
    assert image_class(NPCF_R, UniPoly.linear_root(Fraction(15, 14))) is None


# -- matrices --------------------------------------------------------------------

def test_det_fraction_free_with_rational_entries():
    m = RatMatrix.of([[Fraction(1, 2), 1], [Fraction(1, 3), 2]])
    assert det_fraction_free(m) == Fraction(2, 3)


def test_det_requires_square():
    with pytest.raises(NotSquareError):
        det_fraction_free(RatMatrix.of([[1, 2, 3], [4, 5, 6]]))


def test_char_poly_sign_convention():
    # det(M - xI) for M = [[2, 1], [1, 2]] is x^2 - 4x + 3
    chi = char_poly(RatMatrix.of([[2, 1], [1, 2]]))
    assert chi.coefficients == (3, -4, 1)
    chi3 = char_poly(RatMatrix.identity(3))
    assert chi3.leading == -1
    assert chi3.evaluate(1) == 0


def _expand_det(rows):
    """Cofactor expansion along the first row."""
    if len(rows) == 1:
        return rows[0][0]
    return sum(
        (-1) ** j * rows[0][j] * _expand_det([r[:j] + r[j + 1:] for r in rows[1:]])
        for j in range(len(rows))
    )


def _random_matrices(count, seed, fractions=False):
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        size = rng.randint(1, 4)
        entry = (lambda: Fraction(rng.randint(-5, 5), rng.randint(1, 4))) if fractions else (lambda: rng.randint(-6, 6))
        out.append([[entry() for _ in range(size)] for _ in range(size)])
    return out


@pytest.mark.parametrize("rows", _random_matrices(60, SEED))
def test_det_matches_cofactor_expansion(rows):
    assert det_fraction_free(RatMatrix.of(rows)) == _expand_det(rows)


@pytest.mark.parametrize("rows", _random_matrices(40, SEED + 1, fractions=True))
def test_char_poly_at_zero_is_det(rows):
    m = RatMatrix.of(rows)
    chi = char_poly(m)
    assert chi.degree == len(rows)
    assert chi.leading == (-1) ** len(rows)
    assert chi.evaluate(0) == det_fraction_free(m) == _expand_det(rows)


def test_char_poly_with_fractions():
    m = RatMatrix.of([[1, Fraction(-1, 2)], [Fraction(-1, 3), 1]])
    chi = char_poly(m)
    assert chi.constant_term == det_fraction_free(m)
    assert chi.root_sum() == 2


# -- factored rationals ------------------------------------------------------------

def test_factored_integer_formatting():
    f = FactoredRational.from_int(524880)
    assert str(f) == "2^4 · 3^8 · 5^1"
    assert f.digits() == 6
    assert FactoredInteger.from_rational(f).to_int() == 524880


def test_factored_fraction_has_negative_exponents():
    f = FactoredRational.from_fraction(Fraction(3, 16))
    assert f.as_dict() == {2: -4, 3: 1}
    assert not f.is_integer
    with pytest.raises(AlgebraError):
        FactoredInteger.from_rational(f)


def test_factored_arithmetic():
    a = FactoredRational.from_int(12)
    b = FactoredRational.from_fraction(Fraction(-1, 6))
    assert (a * b).to_fraction() == -2
    assert (a / a) == FactoredRational.one()
    assert (b**2).to_fraction() == Fraction(1, 36)
    assert abs(b).sign == 1


def test_expansion_respects_digit_cap():
    huge = FactoredRational.of({2: 10**7})
    assert huge.digits() == 3010300
    with pytest.raises(ResourceCapExceeded):
        huge.to_fraction(digit_cap=1000)


def test_of_rejects_composites():
    with pytest.raises(AlgebraError):
        FactoredRational.of({4: 1})
