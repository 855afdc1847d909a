"""
Input validation module for the simulator
Validates system names, numeric parameters, vectors and output options
"""
import math
import re
from typing import Optional, Sequence

import numpy as np

from config import Config


class ValidationError(Exception):
    """Custom exception for validation errors"""
    code = 'ValidationError'


class Validator:
    """Validator class for run parameters"""

    # Builtin system names look like particle-r3-linear, disk-free
    SYSTEM_PATTERN = re.compile(r'^[a-z][a-z0-9]*(-[a-z0-9]+)*$')

    VALID_METHODS = ['rk4', 'rkf45']

    VALID_FORMATS = ['csv', 'json']

    @staticmethod
    def validate_system_name(name: str) -> str:
        """
        Validate a builtin system name

        Args:
            name: System name (e.g., disk-harmonic)

        Returns:
            Normalized lowercase name

        Raises:
            ValidationError: If the name is malformed
        """
        if not name:
            raise ValidationError("System cannot be empty")

        name = name.lower().strip()

        if not Validator.SYSTEM_PATTERN.match(name):
            raise ValidationError(
                f"Invalid system name: {name}. "
                "Expected a builtin name such as disk-harmonic"
            )

        return name

    @staticmethod
    def validate_finite(value, name: str = 'value') -> float:
        """
        Validate a finite scalar

        Raises:
            ValidationError: If value is not a finite number
        """
        try:
            value = float(value)
        except (ValueError, TypeError):
            raise ValidationError(f"Invalid {name}: {value}. Must be a number")

        if not math.isfinite(value):
            raise ValidationError(f"{name} must be finite: {value}")

        return value

    @staticmethod
    def validate_positive(value, name: str = 'value') -> float:
        """Validate a finite, strictly positive scalar"""
        value = Validator.validate_finite(value, name)
        if value <= 0:
            raise ValidationError(f"{name} must be positive: {value}")
        return value

    @staticmethod
    def validate_nonnegative(value, name: str = 'value') -> float:
        """Validate a finite scalar >= 0"""
        value = Validator.validate_finite(value, name)
        if value < 0:
            raise ValidationError(f"{name} cannot be negative: {value}")
        return value

    @staticmethod
    def validate_count(value, name: str = 'count', minimum: int = 1) -> int:
        """Validate an integer count with a lower bound"""
        try:
            count = int(value)
        except (ValueError, TypeError):
            raise ValidationError(f"Invalid {name}: {value}. Must be an integer")
        if count != value and not isinstance(value, str):
            raise ValidationError(f"Invalid {name}: {value}. Must be an integer")
        if count < minimum:
            raise ValidationError(f"{name} must be at least {minimum}: {count}")
        return count

    @staticmethod
    def validate_seed(seed) -> int:
        """Validate a random seed"""
        return Validator.validate_count(seed, 'seed', minimum=0)

    @staticmethod
    def validate_vector(values: Sequence, length: Optional[int] = None,
                        name: str = 'vector') -> np.ndarray:
        """
        Validate a finite numeric vector

        Args:
            values: Sequence of numbers
            length: Required length (optional)
            name: Field name for messages

        Returns:
            Float numpy array

        Raises:
            ValidationError: If the vector is malformed
        """
        try:
            vector = np.asarray(values, dtype=float)
        except (ValueError, TypeError):
            raise ValidationError(f"Invalid {name}: {values}. Must be a list of numbers")

        if vector.ndim != 1:
            raise ValidationError(f"{name} must be one-dimensional")

        if length is not None and vector.shape[0] != length:
            raise ValidationError(
                f"{name} must have {length} components, got {vector.shape[0]}"
            )

        if not np.all(np.isfinite(vector)):
            raise ValidationError(f"{name} must be finite: {values}")

        return vector

    @staticmethod
    def validate_method(method: str) -> str:
        """
        Validate integrator method

        Raises:
            ValidationError: If method is unknown
        """
        if not method:
            raise ValidationError("Method cannot be empty")

        method = method.lower().strip()

        if method not in Validator.VALID_METHODS:
            raise ValidationError(
                f"Invalid method: {method}. "
                f"Valid methods: {', '.join(Validator.VALID_METHODS)}"
            )

        return method

    @staticmethod
    def validate_format(output_format: str) -> str:
        """Validate output format (csv or json)"""
        output_format = (output_format or '').lower().strip()

        if output_format not in Validator.VALID_FORMATS:
            raise ValidationError(
                f"Invalid format: {output_format}. "
                f"Valid formats: {', '.join(Validator.VALID_FORMATS)}"
            )

        return output_format

    @staticmethod
    def validate_radii(radii: Sequence) -> list:
        """
        Validate exponential-map radii

        Returns:
            Radii as a list of floats

        Raises:
            ValidationError: If radii are negative or not ascending
        """
        radii = Validator.validate_vector(radii, name='radii')
        if radii.size == 0:
            raise ValidationError("radii cannot be empty")
        if np.any(radii < 0):
            raise ValidationError(f"radii must be non-negative: {radii.tolist()}")
        if np.any(np.diff(radii) < 0):
            raise ValidationError(f"radii must be ascending: {radii.tolist()}")
        return radii.tolist()

    @staticmethod
    def validate_energy(energy, potential_value: float) -> float:
        """
        Validate an energy level against the potential at the start point

        Raises:
            ValidationError: If the start point is outside the Hill region
        """
        energy = Validator.validate_finite(energy, 'energy')
        if energy - potential_value <= Config.HILL_EPS:
            raise ValidationError(
                f"Energy {energy} must exceed V(q0) = {potential_value} "
                "(start point outside the Hill region)"
            )
        return energy
