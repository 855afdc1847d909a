"""
Expression fields for user system-definition files
Metric, potential and frame components are strings in the variables q1..qn
"""
import math
import re

import numpy as np
from py_expression_eval import Parser

from errors import ExpressionDomain
from validator import ValidationError

_parser = Parser()

VARIABLE_PATTERN = re.compile(r'^q([1-9][0-9]*)$')


class ScalarExpression:
    """A compiled scalar expression evaluated at chart points"""

    def __init__(self, source, n):
        if isinstance(source, (int, float)):
            source = repr(float(source))
        if not isinstance(source, str) or not source.strip():
            raise ValidationError(f"Expression must be a non-empty string, got {source!r}")
        self.source = source
        try:
            self._expr = _parser.parse(source)
        except Exception as e:
            raise ValidationError(f"Cannot parse expression {source!r}: {e}")
        for name in self._expr.variables():
            match = VARIABLE_PATTERN.match(name)
            if not match or int(match.group(1)) > n:
                raise ValidationError(
                    f"Unknown variable {name!r} in {source!r}; use q1..q{n}"
                )
        self.n = n
        self.is_constant = not self._expr.variables()

    def __call__(self, q):
        env = {f"q{i + 1}": float(q[i]) for i in range(self.n)}
        try:
            value = float(self._expr.evaluate(env))
        except (ArithmeticError, ValueError, TypeError) as e:
            raise ExpressionDomain(f"Cannot evaluate {self.source!r} at q={list(env.values())}: {e}")
        if not math.isfinite(value):
            raise ExpressionDomain(f"{self.source!r} is not finite at q={list(env.values())}")
        return value

    def __repr__(self):
        return f"ScalarExpression({self.source!r})"


class VectorExpression:
    """A list of component expressions"""

    def __init__(self, sources, n, length=None):
        if not isinstance(sources, (list, tuple)):
            raise ValidationError(f"Expected a list of expressions, got {sources!r}")
        if length is not None and len(sources) != length:
            raise ValidationError(f"Expected {length} components, got {len(sources)}")
        self.components = [ScalarExpression(s, n) for s in sources]

    def __call__(self, q):
        return np.array([c(q) for c in self.components])


class MatrixExpression:
    """A square matrix of component expressions"""

    def __init__(self, rows, n):
        if not isinstance(rows, (list, tuple)) or len(rows) != n:
            raise ValidationError(f"Metric must be an {n}x{n} list of rows")
        self.rows = [VectorExpression(row, n, length=n) for row in rows]
        self.is_constant = all(c.is_constant for row in self.rows for c in row.components)

    def __call__(self, q):
        return np.vstack([row(q) for row in self.rows])
