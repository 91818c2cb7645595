"""
Residual reports and their JSON / table renderings.
"""

from typing import Any, Dict, List, Type, TypeVar

R = TypeVar("R", bound="Report")


class Report:
    """
    A named set of max-norm residuals checked against one tolerance.

    JSON form: {"name", "residuals": {label: value}, "tolerance",
    "verdict"}.
    """

    name = ""
    tolerance = 0.0
    verdict = False

    def __init__(self, **kwargs):
        self.residuals: Dict[str, float] = {}
        for key, val in kwargs.items():
            setattr(self, key, val)

    @classmethod
    def from_residuals(
        cls: Type[R],
        name: str,
        residuals: Dict[str, float],
        tolerance: float,
    ) -> R:
        """
        Build a report whose verdict is that every residual is within
        tolerance.
        """
        values = {label: float(val) for label, val in residuals.items()}
        return cls(
            name=name,
            residuals=values,
            tolerance=tolerance,
            verdict=all(val <= tolerance for val in values.values()),
        )

    @classmethod
    def from_json(cls: Type[R], payload: Dict[str, Any]) -> R:
        return cls(
            name=payload["name"],
            residuals={
                label: float(val)
                for label, val in payload["residuals"].items()
            },
            tolerance=float(payload["tolerance"]),
            verdict=bool(payload["verdict"]),
        )

    def to_json(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "residuals": {
                label: float(val) for label, val in self.residuals.items()
            },
            "tolerance": float(self.tolerance),
            "verdict": bool(self.verdict),
        }

    @staticmethod
    def header() -> str:
        """
        Return a nicely formatted header line.
        """
        name, label, val, tol, res = (
            "Check",
            "Residual",
            "Value",
            "Tolerance",
            "Result",
        )
        return f"{name:24s} {label:28s} {val:>11s} {tol:>11s} {res:>6s}"

    def info(self) -> List[str]:
        """
        Return nicely formatted lines, one per residual.
        """
        lines = []
        for label, val in self.residuals.items():
            res = "pass" if val <= self.tolerance else "FAIL"
            lines.append(
                f"{self.name:24s} {label:28s} {val:11.3e} "
                f"{self.tolerance:11.3e} {res:>6s}"
            )
        return lines


class Comparison(Report):
    """
    A single numerical-vs-closed-form comparison, as a one-row report.
    """

    @classmethod
    def of(
        cls, name: str, label: str, error: float, tolerance: float
    ) -> "Comparison":
        return cls(
            name=name,
            residuals={label: float(error)},
            tolerance=tolerance,
            verdict=float(error) <= tolerance,
        )


def summarize(reports: List[Report]) -> Dict[str, Any]:
    return {
        "verdict": all(rep.verdict for rep in reports),
        "reports": [rep.to_json() for rep in reports],
    }
