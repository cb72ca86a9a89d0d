import pytest

from src.core.exceptions import (
    ContinuationError,
    ConvergenceError,
    DegenerateOrbitError,
    DimensionError,
    DomainError,
    GeometryError,
    OpenLocError,
    ParseError,
)


@pytest.mark.parametrize(
    "error, code",
    [
        (DomainError("x"), 2),
        (DimensionError("x"), 2),
        (GeometryError("x"), 2),
        (ConvergenceError("x"), 3),
        (DegenerateOrbitError("x"), 3),
        (ContinuationError("x"), 3),
        (ParseError("x"), 4),
    ],
)
def test_exit_codes(error, code):
    assert isinstance(error, OpenLocError)
    assert error.exit_code == code


def test_domain_errors_are_value_errors():
    """
    Callers that only know the standard library can still catch bad inputs.
    """
    assert isinstance(DimensionError("x"), ValueError)
    assert isinstance(ConvergenceError("x"), ArithmeticError)


def test_convergence_error_carries_diagnostics():
    error = ConvergenceError("stalled", iterations=90, block=(3, 7))

    assert str(error) == "stalled"
    assert error.iterations == 90
    assert error.block == (3, 7)


def test_parse_error_prefixes_the_line_number():
    error = ParseError("not a number: 'x'", line=12)

    assert str(error) == "line 12: not a number: 'x'"
    assert error.line == 12
    assert str(ParseError("empty")) == "empty"
