"""Exact rational arithmetic backend.

Everything in this package computes over exact rationals; floats are
rejected at every boundary. Two interchangeable backends provide the
number type:

* ``gmpy2.mpq`` -- GMP-backed, selected by default when gmpy2 imports;
  roughly an order of magnitude faster on the small fractions this
  pipeline churns through, and the whole hot path is rational
  arithmetic, so the backend choice is the performance knob.
* ``fractions.Fraction`` -- stdlib fallback with identical semantics.

Both types print the same canonical ``num/den`` strings, hash and
compare identically, and mix freely with ints, so the rest of the
package never needs to know which one is active. Set the environment
variable ``CEUB_RATIONAL_BACKEND`` to ``gmpy2`` or ``fractions`` to
force a choice (``auto`` is the default); selection happens once at
import. ``benchmarks/backend_bench.py`` compares the two.
"""

import os
import re

_CHOICES = ("auto", "gmpy2", "fractions")
_requested = os.environ.get("CEUB_RATIONAL_BACKEND", "auto")
if _requested not in _CHOICES:
    raise RuntimeError(
        f"CEUB_RATIONAL_BACKEND must be one of {', '.join(_CHOICES)}; got {_requested!r}"
    )

if _requested in ("auto", "gmpy2"):
    try:
        from gmpy2 import mpq as Rational

        BACKEND = "gmpy2"
    except ImportError:
        if _requested == "gmpy2":
            raise
        from fractions import Fraction as Rational

        BACKEND = "fractions"
else:
    from fractions import Fraction as Rational

    BACKEND = "fractions"

ZERO = Rational(0)
ONE = Rational(1)

# A rational literal: optionally signed integer, optionally over an
# integer denominator. Denominator sign and zero are checked separately
# so the error can say what is actually wrong.
_LITERAL = re.compile(r"^(-?[0-9]+)(?:/(-?[0-9]+))?$")


def parse_rational(text: str):
    """Parse a ``num/den`` (or plain integer) string into a Rational.

    Accepts any well-formed literal and normalizes it to lowest terms;
    zero or negative denominators and anything non-numeric are errors.
    """
    if not isinstance(text, str):
        raise ValueError(f"expected a rational string, got {type(text).__name__}")
    match = _LITERAL.match(text)
    if match is None:
        raise ValueError(f"not a rational literal: {text!r}")
    num = int(match.group(1))
    if match.group(2) is None:
        return Rational(num)
    den = int(match.group(2))
    if den == 0:
        raise ValueError(f"zero denominator: {text!r}")
    if den < 0:
        raise ValueError(f"denominator must be positive: {text!r}")
    return Rational(num, den)


def format_rational(value) -> str:
    """Canonical string form: lowest terms, ``num/den``, integers as ``k``."""
    return str(rat(value))


def rat(value, den=None):
    """Coerce to the active Rational type. Ints, literal strings, and
    rationals from either backend are accepted; floats never are."""
    if den is not None:
        if isinstance(value, bool) or isinstance(den, bool):
            raise TypeError("bool is not a rational component")
        if not isinstance(value, int) or not isinstance(den, int):
            raise TypeError("two-argument form takes integers")
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        return Rational(value, den)
    if isinstance(value, bool):
        raise TypeError("bool is not a rational")
    if isinstance(value, int):
        return Rational(value)
    if isinstance(value, str):
        return parse_rational(value)
    if isinstance(value, Rational):
        return value
    if isinstance(value, float):
        raise TypeError("floats are not exact; pass a string, int, or rational")
    # Rational-like from the other backend: both expose numerator/denominator.
    num = getattr(value, "numerator", None)
    denom = getattr(value, "denominator", None)
    if num is not None and denom is not None:
        return Rational(int(num), int(denom))
    raise TypeError(f"cannot make an exact rational from {type(value).__name__}")
