from typing import Tuple


class TorusMHDError(Exception):
    pass


class SingularPointError(TorusMHDError):
    def __init__(self, node: Tuple[int, ...], det: float):
        self.node = node
        self.det = det
        super().__init__(
            f"Singular pointwise system at node {node}: det={det:.3e}"
        )


class FrameDegeneracyError(TorusMHDError):
    def __init__(self, node: Tuple[int, ...], det: float):
        self.node = node
        self.det = det
        super().__init__(f"Degenerate frame at node {node}: det={det:.3e}")


class FormatError(TorusMHDError):
    def __init__(self, message: str):
        super().__init__(f"Format error: {message}")


class ShapeError(TorusMHDError):
    def __init__(self, message: str):
        super().__init__(f"Shape error: {message}")


class DegreeError(TorusMHDError):
    def __init__(self, operation: str, degree: int):
        self.degree = degree
        super().__init__(f"{operation} is undefined for degree {degree}")


class AllMaskedError(TorusMHDError):
    def __init__(self):
        super().__init__("Field vanishes at every node, nothing to evaluate")


class PositivityError(TorusMHDError):
    def __init__(self, quantity: str, minimum: float):
        self.quantity = quantity
        self.minimum = minimum
        super().__init__(
            f"{quantity} must be positive everywhere, min={minimum:.3e}"
        )


class ParameterError(TorusMHDError):
    def __init__(self, message: str):
        super().__init__(f"Parameter error: {message}")


class NotLevelError(TorusMHDError):
    def __init__(self, spread: float):
        self.spread = spread
        super().__init__(f"Pressure varies along the slice by {spread:.3e}")


class CriticalError(TorusMHDError):
    def __init__(self, norm: float):
        self.norm = norm
        super().__init__(f"Pressure is critical on the slice: |dp|={norm:.3e}")


class TangencyError(TorusMHDError):
    def __init__(self, field: str, residual: float):
        self.field = field
        self.residual = residual
        super().__init__(
            f"{field} is not tangent to the slice: normal part {residual:.3e}"
        )


class KindError(TorusMHDError):
    def __init__(self, kind: str):
        super().__init__(f"Operation not available for bundle kind {kind}")


class SubclassError(TorusMHDError):
    def __init__(self):
        super().__init__("to be implemented in a subclass")
