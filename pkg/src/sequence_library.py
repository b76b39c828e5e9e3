"""Builtin moment sequences."""

import logging
import math
from fractions import Fraction
from typing import Callable, Dict, Optional, Union

from src.exceptions import InputError, MomentOverflow, QOutOfRange, UnknownBuiltin
from src.measures import AtomicMeasure, moments_of
from src.sequences import TruncatedMomentSequence

logger = logging.getLogger(__name__)


def hilbert(count: int) -> TruncatedMomentSequence:
    """s_k = 1/(k+1): moments of Lebesgue measure on [0, 1]."""
    return TruncatedMomentSequence.from_fractions([Fraction(1, k + 1) for k in range(count)])


def factorial(count: int) -> TruncatedMomentSequence:
    """s_k = 1/(k+1)!; det H_1 = 1/6 - 1/4 < 0, so no representing measure."""
    return TruncatedMomentSequence.from_fractions([Fraction(1, math.factorial(k + 1)) for k in range(count)])


def stieltjes_wigert(count: int, q: float = 0.9) -> TruncatedMomentSequence:
    """s_n = q^(-(n+1)^2/2), an indeterminate sequence for 0 < q < 1."""
    q = float(q)
    if not 0 < q < 1:
        raise QOutOfRange(q)
    values = []
    for n in range(count):
        exponent = -((n + 1) ** 2) / 2 * math.log(q)
        if exponent > 709:
            raise MomentOverflow(n)
        values.append(math.exp(exponent))
    return TruncatedMomentSequence(tuple(values))


def geometric(count: int, a: Union[float, str, Fraction] = 2) -> TruncatedMomentSequence:
    """s_k = a^k, the moments of delta_a."""
    try:
        base = Fraction(a)
    except (TypeError, ValueError, OverflowError):
        raise InputError(f"Base a must be a real number, got {a!r}")
    return TruncatedMomentSequence.from_fractions([base ** k for k in range(count)])


def from_measure(count: int, measure: AtomicMeasure) -> TruncatedMomentSequence:
    """Moments s_0..s_{count-1} of an atomic measure."""
    return moments_of(measure, count - 1)


BUILTINS: Dict[str, Callable[..., TruncatedMomentSequence]] = {
    "hilbert": hilbert,
    "factorial": factorial,
    "stieltjes_wigert": stieltjes_wigert,
    "geometric": geometric,
    "from_measure": from_measure,
}


def generate(name: str, count: int, q: Optional[float] = None, a: Optional[Union[float, str]] = None,
             measure: Optional[AtomicMeasure] = None) -> TruncatedMomentSequence:
    """
    Generate `count` entries of a builtin sequence.

    Raises:
        UnknownBuiltin: If the name is not registered
        QOutOfRange: For stieltjes_wigert with q outside (0, 1)
    """
    if name not in BUILTINS:
        raise UnknownBuiltin(name, sorted(BUILTINS))
    if count < 1:
        raise InputError(f"Entry count must be positive, got {count}")

    logger.info(f"Generating {count} entries of {name}")
    if name == "stieltjes_wigert":
        return stieltjes_wigert(count, 0.9 if q is None else q)
    if name == "geometric":
        return geometric(count, 2 if a is None else a)
    if name == "from_measure":
        if measure is None:
            raise InputError("from_measure needs a measure")
        return from_measure(count, measure)
    return BUILTINS[name](count)
