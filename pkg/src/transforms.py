"""Stieltjes transforms of atomic measures and the shift/quotient relations.

For sigma~ the measure of s~_k = s_{kd+offset}:

    int x^offset dsigma(x) / (x^d - lambda) = w_sigma~(lambda)

and for d = 1 the polynomial division x^l/(x-lambda) = sum_j lambda^(l-1-j) x^j
+ lambda^l/(x-lambda) gives w_sigma~(lambda) = C(lambda) + lambda^l w_sigma(lambda).
"""

import logging
from dataclasses import dataclass
from typing import Union

import numpy as np

from src.exceptions import InputError, InsufficientMoments, OddOffset, RealLambda
from src.measures import AtomicMeasure, moments_of
from src.sequences import TruncatedMomentSequence

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ComplexPoint:
    re: float
    im: float

    @classmethod
    def parse(cls, text: str) -> "ComplexPoint":
        """Parse '1+2i', '-i', '3+0.5j', '2i' and the like."""
        cleaned = str(text).strip().replace(" ", "").replace("i", "j")
        try:
            value = complex(cleaned)
        except ValueError:
            raise InputError(f"Cannot parse complex number {text!r}")
        return cls(value.real, value.imag)

    @classmethod
    def from_complex(cls, value: complex) -> "ComplexPoint":
        return cls(float(value.real), float(value.imag))

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    def require_nonreal(self) -> complex:
        if self.im == 0:
            raise RealLambda(self.value)
        return self.value


LambdaLike = Union[ComplexPoint, complex]


def _as_lambda(lam: LambdaLike) -> complex:
    point = lam if isinstance(lam, ComplexPoint) else ComplexPoint.from_complex(complex(lam))
    return point.require_nonreal()


def _check_offset(offset: int):
    if offset < 0 or offset % 2:
        raise OddOffset(offset)


def stieltjes_transform(mu: AtomicMeasure, lam: LambdaLike) -> complex:
    """w_mu(lambda) = sum_i c_i / (p_i - lambda); |w| <= mass/|Im lambda|."""
    z = _as_lambda(lam)
    if len(mu) == 0:
        return 0j
    return complex(np.sum(np.asarray(mu.weights) / (np.asarray(mu.nodes) - z)))


def shifted_transform(sigma: AtomicMeasure, offset: int, lam: LambdaLike) -> complex:
    """sum_i c_i p_i^offset / (p_i - lambda), the transform of x^offset dsigma."""
    _check_offset(offset)
    z = _as_lambda(lam)
    if len(sigma) == 0:
        return 0j
    nodes = np.asarray(sigma.nodes)
    return complex(np.sum(np.asarray(sigma.weights) * nodes ** offset / (nodes - z)))


def circle_constant(seq: TruncatedMomentSequence, offset: int, lam: LambdaLike) -> complex:
    """C(lambda) = sum_{j<offset} lambda^(offset-1-j) s_j, by Horner; 0 for offset 0."""
    _check_offset(offset)
    if len(seq) < offset:
        raise InsufficientMoments(offset, len(seq))
    z = lam.value if isinstance(lam, ComplexPoint) else complex(lam)
    constant = 0j
    for j in range(offset):
        constant = constant * z + seq.entries[j]
    return constant


def circle_relation_check(sigma: AtomicMeasure, sigma_sub: AtomicMeasure, offset: int,
                          lam: LambdaLike) -> float:
    """|w_sigma~ - C - lambda^offset w_sigma| with C from the moments of sigma."""
    _check_offset(offset)
    z = _as_lambda(lam)
    constant = 0j
    if offset > 0:
        constant = circle_constant(moments_of(sigma, offset - 1), offset, z)
    residual = stieltjes_transform(sigma_sub, z) - constant - z ** offset * stieltjes_transform(sigma, z)
    logger.debug(f"circle relation at {z}: residual {abs(residual):.3e}")
    return abs(residual)


def quotient_relation_check(sigma: AtomicMeasure, sigma_sub: AtomicMeasure, d: int, offset: int,
                            lam: LambdaLike) -> float:
    """|sum_i c_i p_i^offset / (p_i^d - lambda) - w_sigma~(lambda)|."""
    if d < 1:
        raise InputError(f"Step d must be a positive integer, got {d}")
    _check_offset(offset)
    z = _as_lambda(lam)
    lhs = 0j
    if len(sigma):
        nodes = np.asarray(sigma.nodes)
        lhs = complex(np.sum(np.asarray(sigma.weights) * nodes ** offset / (nodes ** d - z)))
    return abs(lhs - stieltjes_transform(sigma_sub, z))


def transform_scale(sigma: AtomicMeasure, offset: int, lam: LambdaLike) -> float:
    """Size reference for relation residuals: 1 plus the magnitudes of every term compared."""
    z = _as_lambda(lam)
    if len(sigma) == 0:
        return 1.0
    weights = np.asarray(sigma.weights)
    nodes = np.abs(np.asarray(sigma.nodes))
    radius = abs(z)
    shifted = np.sum(weights * nodes ** offset) / abs(z.imag)
    lifted = radius ** offset * np.sum(weights) / abs(z.imag)
    constant = sum(radius ** (offset - 1 - j) * np.sum(weights * nodes ** j) for j in range(offset))
    return float(1.0 + shifted + lifted + constant)
