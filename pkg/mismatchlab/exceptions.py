# Copyright 2026 The mismatchlab authors
# Use of this source code is governed by an MIT
# license that can be found in the LICENSE file.

from typing import List, Optional


class MismatchLabException(Exception):
    """Base class for mismatchlab exceptions.

    :param message: Message describing the error that occurred.
    """

    def __init__(self, message: str):
        super().__init__(message)


class MeasureValidationException(MismatchLabException):
    """A measure is malformed or not a probability measure.

    :param message: Message describing the error that occurred.
    :param mass: The offending total mass, if applicable.
    """

    def __init__(self, message: str, mass: Optional[float] = None):
        super().__init__(message)
        self.mass = mass


class UnboundedSupportException(MismatchLabException):
    """The operation requires a measure with bounded support."""

    pass


class IncompatibleModelsException(MismatchLabException):
    """Two models do not share a state/action structure."""

    pass


class InvalidModelException(MismatchLabException):
    """A model failed validation.

    :param message: Message describing the error that occurred.
    :param diagnostics: The violations reported by validate().
    """

    def __init__(self, message: str, diagnostics: List):
        super().__init__(message)
        self.diagnostics = diagnostics

    def __str__(self):
        details = "; ".join(str(d) for d in self.diagnostics)
        return f"{super().__str__()}: {details}"


class PolicyMeasurabilityException(MismatchLabException):
    """A policy cannot be evaluated on the model's region structure or is not
    admissible under the model's information structure."""

    pass


class BudgetExceededException(MismatchLabException):
    """An exact enumeration would exceed its configured budget.

    :param message: Message describing the error that occurred.
    :param required: Number of nodes/policies the enumeration needs.
    :param budget: The configured budget.
    """

    def __init__(self, message: str, required: float, budget: float):
        super().__init__(message)
        self.required = required
        self.budget = budget

    def __str__(self):
        return (
            f"{super().__str__()} (required: {self.required:.4g}, "
            f"budget: {self.budget:.4g})"
        )


class SolverException(MismatchLabException):
    """No solver is applicable, or a numerical solve failed."""

    pass


class EstimatorException(MismatchLabException):
    """An estimator was given data or a model it cannot handle."""

    pass


class ConfigException(MismatchLabException):
    """An experiment configuration is invalid.

    :param message: Message describing the error that occurred.
    :param field: Name of the offending configuration field, if known.
    """

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field
