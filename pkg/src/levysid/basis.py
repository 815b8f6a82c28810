"""Basis dictionaries for the drift and diffusion regressions."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np

from .errors import DomainError, EvaluationDomainError
from .expr import evaluate_block, parse_expression

_SIZE_CAP = 10_000


@dataclass(frozen=True)
class BasisDictionary:
    """Ordered, named list of expression trees sharing one dimension."""

    n: int
    names: tuple
    functions: tuple

    def __post_init__(self):
        if len(self.names) != len(self.functions) or not self.functions:
            raise DomainError("names and functions must align and be nonempty")
        if len(set(self.names)) != len(self.names):
            raise DomainError("dictionary names must be unique")
        for f in self.functions:
            if f.dimension != self.n:
                raise DomainError(
                    f"function dimension {f.dimension} != dictionary dimension {self.n}")

    @property
    def K(self):
        return len(self.functions)


def polynomial_dictionary(n, degree):
    """All monomials of total degree <= degree over x1..xn.

    Ordered by total degree, then by the combination order of variable
    indices, which for n=3, degree=2 gives
    1, x1, x2, x3, x1^2, x1*x2, x1*x3, x2^2, x2*x3, x3^2.
    """
    if n < 1:
        raise DomainError(f"dimension must be >= 1, got {n}")
    if degree < 0:
        raise DomainError(f"degree must be >= 0, got {degree}")
    names = []
    for d in range(degree + 1):
        for combo in combinations_with_replacement(range(n), d):
            if len(names) >= _SIZE_CAP:
                raise DomainError(
                    f"polynomial dictionary exceeds the size cap {_SIZE_CAP}")
            if not combo:
                names.append("1")
                continue
            parts = []
            for var in sorted(set(combo)):
                e = combo.count(var)
                parts.append(f"x{var + 1}" if e == 1 else f"x{var + 1}^{e}")
            names.append("*".join(parts))
    funcs = tuple(parse_expression(t, n) for t in names)
    return BasisDictionary(n, tuple(names), funcs)


_EXAMPLE2_TEXT = (
    "1",
    "x1",
    "x1^2",
    "x1^3",
    "sin(x1)",
    "cos(11*x1)",
    "sin(11*x1)",
    "-10*tanh(10*x1)^2 + 10",
    "-10*tanh(10*x1 - 10)^2 + 10",
    "exp(-50*x1^2)",
    "exp(-50*(x1 - 3)^2)",
    "exp(-0.3*x1^2)",
    "exp(-0.3*(x1 - 3)^2)",
    "exp(-2*(x1 - 2)^2)",
    "exp(-50*(x1 - 4)^2)",
    "exp(-0.6*(x1 - 4)^2)",
    "exp(-0.6*(x1 - 3)^2)",
    "-2*tanh(2*x1 - 4)^2 + 2",
    "tanh(x1 - 4)^2 + 1",
)


def example2_dictionary():
    """The fixed 19-function dictionary used by the 1-D gene-regulation runs.

    A mix of monomials, trigonometric terms, tanh^2 plateaus and Gaussian
    bumps; frozen as data so reports and plots always agree on ordering.
    """
    funcs = tuple(parse_expression(t, 1) for t in _EXAMPLE2_TEXT)
    return BasisDictionary(1, _EXAMPLE2_TEXT, funcs)


def design_matrix(dictionary, points):
    """Evaluate every dictionary function at every point: entry (j,k) is
    psi_k(point_j)."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[1] != dictionary.n:
        raise DomainError(
            f"points must be (M, {dictionary.n}), got shape {pts.shape}")
    out = np.empty((pts.shape[0], dictionary.K), dtype=np.float64)
    for k, tree in enumerate(dictionary.functions):
        try:
            out[:, k] = evaluate_block(tree, pts)
        except EvaluationDomainError as exc:
            raise EvaluationDomainError(
                f"dictionary entry {dictionary.names[k]!r} failed: {exc}") from exc
    return out
