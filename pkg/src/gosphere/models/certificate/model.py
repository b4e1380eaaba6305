#!/usr/bin/env python3
"""
Geodesic Orbit Certificate Models
Spray vectors, per-sample certificates and aggregated verdicts
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np


class Verdict:
    """Outcome of a sampled geodesic-orbit test"""

    PASS = "PASS"
    FAIL = "FAIL"
    INCONCLUSIVE = "INCONCLUSIVE"

    ALL = [PASS, FAIL, INCONCLUSIVE]

    @classmethod
    def from_residual(cls, residual: float, tolerance: float, fail_threshold: float) -> str:
        if residual < tolerance:
            return cls.PASS
        if residual > fail_threshold:
            return cls.FAIL
        return cls.INCONCLUSIVE


@dataclass(frozen=True)
class SprayVector:
    """eta(u), defined by g_u(eta(u), v) = g_u(u, [v, u]_m) for all v in m"""

    base: np.ndarray
    value: np.ndarray
    defining_residual: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {"base": self.base.tolist(), "value": self.value.tolist(),
                "defining_residual": self.defining_residual}


@dataclass
class GOCertificate:
    """Per-sample record of the compensator and both residuals"""

    index: int
    u: List[float]
    u_prime: List[float]
    residual3: float
    residual4: float
    tolerance: float
    seed: Optional[int] = None
    source: str = "random"  # slice | random

    @property
    def passed3(self) -> bool:
        return self.residual3 < self.tolerance

    @property
    def passed4(self) -> bool:
        return self.residual4 < self.tolerance

    @property
    def consistent(self) -> bool:
        """Conditions (3) and (4) agree at the shared tolerance."""
        return self.passed3 == self.passed4

    def to_dict(self) -> Dict[str, Any]:
        return {
            "index": self.index,
            "u": list(self.u),
            "u_prime": list(self.u_prime),
            "residual3": self.residual3,
            "residual4": self.residual4,
            "tol": self.tolerance,
            "seed": self.seed,
            "source": self.source,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GOCertificate":
        return cls(
            index=data["index"],
            u=list(data["u"]),
            u_prime=list(data["u_prime"]),
            residual3=data["residual3"],
            residual4=data["residual4"],
            tolerance=data["tol"],
            seed=data.get("seed"),
            source=data.get("source", "random"),
        )


@dataclass
class GOVerdict:
    """Aggregated verdict over a sample net"""

    verdict: str
    presentation: str
    tolerance: float
    fail_threshold: float
    sample_count: int
    seed: Optional[int]
    max_residual3: float
    max_residual4: float
    conditions_agree: bool
    certificates: List[GOCertificate] = field(default_factory=list)
    witness: Optional[GOCertificate] = None

    @property
    def passed(self) -> bool:
        return self.verdict == Verdict.PASS

    def to_dict(self, include_certificates: bool = True) -> Dict[str, Any]:
        data = {
            "verdict": self.verdict,
            "presentation": self.presentation,
            "tol": self.tolerance,
            "fail_threshold": self.fail_threshold,
            "sample_count": self.sample_count,
            "seed": self.seed,
            "max_residual3": self.max_residual3,
            "max_residual4": self.max_residual4,
            "conditions_agree": self.conditions_agree,
            "witness": self.witness.to_dict() if self.witness else None,
        }
        if include_certificates:
            data["certificates"] = [certificate.to_dict() for certificate in self.certificates]
        return data
