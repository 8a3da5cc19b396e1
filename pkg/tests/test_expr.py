"""Expression grammar: round-trips, evaluation, and error positions."""

import numpy as np
import pytest

from nijenhuis.expr import (Add, Call, Const, Div, ExpressionError, Mul, Neg,
                            Pow, Sub, Var, evaluate, format_expression,
                            parse_expression)

from expr_corpus import CORPUS

SEED = 73


def num_eval(e, p):
    """Independent plain-float evaluator mirroring jet operation order."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return float(p[e.index - 1])
    if isinstance(e, Add):
        return num_eval(e.left, p) + num_eval(e.right, p)
    if isinstance(e, Sub):
        return num_eval(e.left, p) - num_eval(e.right, p)
    if isinstance(e, Mul):
        return num_eval(e.left, p) * num_eval(e.right, p)
    if isinstance(e, Div):
        return num_eval(e.left, p) / num_eval(e.right, p)
    if isinstance(e, Neg):
        return -num_eval(e.operand, p)
    if isinstance(e, Pow):
        b = num_eval(e.base, p)
        k = e.exponent
        if k == 0:
            return 1.0
        if k < 0:
            return 1.0 / num_eval(Pow(e.base, -k), p)
        acc = b
        for _ in range(k - 1):
            acc = acc * b
        return acc
    if isinstance(e, Call):
        return {"sqrt": np.sqrt, "exp": np.exp,
                "sin": np.sin, "cos": np.cos}[e.func](num_eval(e.arg, p))
    raise TypeError(e)


def test_corpus_round_trips():
    assert len(CORPUS) >= 30
    for text, n in CORPUS:
        ast = parse_expression(text, n)
        again = parse_expression(format_expression(ast), n)
        assert again == ast, f"round trip changed {text!r}"


def test_corpus_values_match_plain_float_oracle():
    rng = np.random.default_rng(SEED)
    for text, n in CORPUS:
        for _ in range(5):
            # keep arguments safely inside sqrt/div domains
            p = rng.uniform(0.3, 1.4, size=n)
            ast = parse_expression(text, n)
            jet = evaluate(ast, p)
            ref = num_eval(ast, p)
            assert jet.value == pytest.approx(ref, rel=1e-15, abs=1e-15), text


def test_worked_canonical_print():
    ast = parse_expression("y^2+x1*y", 2)
    assert format_expression(ast) == "((y^2)+(x1*y))"


def test_worked_evaluation():
    jet = evaluate(parse_expression("y^2+x1*y", 2), np.array([1.0, 2.0]))
    assert jet.value == 6.0
    assert np.array_equal(jet.gradient, [2.0, 5.0])
    assert np.array_equal(jet.hessian, [[0.0, 1.0], [1.0, 2.0]])


def test_x_is_alias_for_x1():
    assert parse_expression("x", 3) == parse_expression("x1", 3)


def test_y_is_last_coordinate():
    ast = parse_expression("y", 4)
    assert ast == Var(4, "y")


def test_unary_minus_binds_looser_than_power():
    assert parse_expression("-y^2", 2) == Neg(Pow(Var(2, "y"), 2))


def test_power_does_not_chain():
    with pytest.raises(ExpressionError):
        parse_expression("y^2^3", 2)


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(SEED + 1)
    h = 1e-5
    for text, n in [("y^3 + y + x1", 3), ("sin(x1)*cos(y) + exp(x2)", 3),
                    ("(x1 - x2) / (y + 2)", 3)]:
        ast = parse_expression(text, n)
        for _ in range(5):
            p = rng.uniform(-1.0, 1.0, size=n)
            jet = evaluate(ast, p)
            for i in range(n):
                e = np.zeros(n)
                e[i] = h
                fd = (num_eval(ast, p + e) - num_eval(ast, p - e)) / (2 * h)
                assert jet.gradient[i] == pytest.approx(fd, abs=5e-8), text


def error_position(text, n):
    with pytest.raises(ExpressionError) as err:
        parse_expression(text, n)
    assert err.value.position is not None
    assert f"(at offset {err.value.position})" in str(err.value)
    return err.value


def test_unknown_variable_out_of_range():
    err = error_position("x3 + y", 3)
    assert "variable x3 out of range for n=3" in str(err)
    assert "valid variables x1, x2, y" in str(err)
    assert err.position == 0


def test_unknown_identifier():
    err = error_position("z + 1", 2)
    assert "unknown identifier" in str(err)


def test_non_integer_exponent():
    err = error_position("y^1.5", 2)
    assert "non-integer exponent" in str(err)


def test_variable_exponent_rejected():
    err = error_position("y^x1", 2)
    assert "non-integer exponent" in str(err)


def test_exponent_magnitude_cap():
    err = error_position("y^65", 2)
    assert "exceeds 64" in str(err)
    parse_expression("y^64", 2)  # boundary is allowed


def test_unbalanced_parens():
    err = error_position("(y + 1", 2)
    assert "expected ')'" in str(err) or "unexpected end" in str(err)
    error_position("y + 1)", 2)


def test_empty_and_trailing():
    err = error_position("", 2)
    assert "empty expression" in str(err)
    error_position("1 2", 2)


def test_bad_character():
    err = error_position("y & 2", 2)
    assert "unexpected character" in str(err)


def test_builtin_requires_call():
    error_position("sqrt + 1", 2)


def test_const_round_trip_value():
    ast = parse_expression("2", 2)
    assert ast == Const(2.0)
    assert parse_expression(format_expression(ast), 2) == ast
