"""Pydantic schemas for sweep configurations, verification reports and coefficient tables."""

from enum import Enum
from typing import TYPE_CHECKING, Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

if TYPE_CHECKING:
    from qbailey.services.series import LaurentSeries


class VerificationStatus(str, Enum):
    """Outcome of one verification cell."""

    PASS = "pass"
    FAIL = "fail"
    SKIPPED = "skipped"
    UNVERIFIED = "unverified-bound"


class Target(str, Enum):
    """Families of identities a sweep can verify."""

    CONJUGATE_PAIR = "conjugate-pair"
    GAMMA_DELTA = "gamma-delta-pair"
    LEMMA33 = "lemma33"
    RECURRENCES = "recurrences"
    TELESCOPIC = "telescopic"
    HL_LEMMA = "hl-lemma"
    THM44 = "thm44"
    COROLLARY = "corollary"
    STRING_FUNCTIONS = "string-functions"
    TRANSFORMS_AUDIT = "transforms-audit"
    CONJUGATE_TRANSFORM = "conjugate-transform"


class SigmaPolicy(str, Enum):
    """Which values of sigma a sweep visits."""

    ALL = "all"
    ZERO = "0"
    ONE = "1"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


VARIANTS: Dict[Target, Tuple[str, ...]] = {
    Target.TELESCOPIC: ("rtele", "btele"),
    Target.COROLLARY: ("N1", "N2a", "N2b", "pipeline", "aux", "triple-product"),
    Target.STRING_FUNCTIONS: ("symmetry", "lattice", "e55"),
    Target.TRANSFORMS_AUDIT: ("ab", "lattice", "chain", "lattice2", "chains"),
    Target.CONJUGATE_TRANSFORM: ("ab", "chain", "lattice"),
    Target.HL_LEMMA: ("I", "II", "III0", "III1"),
}


class CoefficientRow(BaseModel):
    """One row of a coefficient table: ``coefficient * q^(exponent_num/denom)``."""

    exponent_num: int
    denom: int = Field(..., ge=1)
    coefficient: int


class SeriesEnvelope(BaseModel):
    """Serialized truncated Laurent series."""

    denom: int = Field(..., ge=1, description="Exponent grid 1/denom")
    order: Optional[int] = Field(None, description="Known strictly below q^(order/denom); null if exact")
    terms: List[Tuple[int, int]] = Field(default_factory=list, description="(exponent_num, coefficient)")

    model_config = ConfigDict(json_schema_extra={
        "example": {
            "denom": 4,
            "order": 12,
            "terms": [[0, 1], [2, 1], [4, 1]],
        }
    })

    @model_validator(mode="after")
    def validate_terms(self) -> "SeriesEnvelope":
        """Reject terms at or beyond the order and repeated exponents."""
        exponents = [e for e, _ in self.terms]
        if len(set(exponents)) != len(exponents):
            raise ValueError("Repeated exponent in series terms")
        if self.order is not None and any(e >= self.order for e in exponents):
            raise ValueError(f"Term at or beyond order {self.order}")
        return self

    @classmethod
    def from_series(cls, s: "LaurentSeries") -> "SeriesEnvelope":
        return cls(denom=s.denom, order=s.order, terms=s.terms())

    def to_series(self) -> "LaurentSeries":
        from qbailey.services.series import LaurentSeries

        return LaurentSeries.from_terms(dict(self.terms), self.denom, self.order)

    def rows(self) -> List[CoefficientRow]:
        return [CoefficientRow(exponent_num=e, denom=self.denom, coefficient=c) for e, c in self.terms]


class Mismatch(BaseModel):
    """The lowest exponent at which two sides differ."""

    exponent_num: int
    denom: int = Field(..., ge=1)
    lhs: int
    rhs: int
    label: Optional[str] = Field(None, description="Index inside the cell, e.g. 'L=2, k=1'")


class VerificationReport(BaseModel):
    """Outcome of one verification cell. Equality is exact on the window; there is no tolerance."""

    key: str
    target: Target
    status: VerificationStatus
    order_numerator: Optional[int] = None
    denom: Optional[int] = None
    checks: int = 0
    mismatch: Optional[Mismatch] = None
    detail: Optional[str] = None
    seed: Optional[int] = None
    info: Dict[str, Union[bool, int, str]] = Field(default_factory=dict)
    wall_time: Optional[float] = None

    model_config = ConfigDict(json_schema_extra={
        "example": {
            "key": "thm44/N=1/delta=1/k=2/i=2/lambda=[]/sigma=0",
            "target": "thm44",
            "status": "pass",
            "order_numerator": 40,
            "denom": 2,
            "checks": 1,
            "info": {"theorem_range": True, "corollary_range": True, "construction": "lattice2"},
            "wall_time": 0.42,
        }
    })

    @model_validator(mode="after")
    def validate_status(self) -> "VerificationReport":
        """A failure carries a mismatch or a reason; a pass never carries a mismatch."""
        if self.status is VerificationStatus.FAIL and self.mismatch is None and not self.detail:
            raise ValueError("A failing report needs a mismatch or a detail")
        if self.status is not VerificationStatus.FAIL and self.mismatch is not None:
            raise ValueError(f"A {self.status.value} report cannot carry a mismatch")
        return self


class SweepConfig(BaseModel):
    """A parameter grid for one target.

    The truncation order is given either in powers of q (``order``) or as a numerator
    over the target's exponent grid (``order_numerator``); see ``target_denominator``.
    """

    target: Target
    variant: Optional[str] = None
    N: List[int] = Field(default_factory=lambda: [1])
    ell: List[int] = Field(default_factory=lambda: [0])
    partitions: Optional[List[List[int]]] = Field(
        None, description="Explicit partitions; all with |lambda| <= max_weight when omitted"
    )
    max_weight: int = Field(default=0, ge=0)
    sigma: SigmaPolicy = SigmaPolicy.ALL
    M: List[int] = Field(default_factory=list)
    k: List[int] = Field(default_factory=list)
    i: Optional[List[int]] = Field(None, description="All admissible i when omitted")
    delta: List[int] = Field(default_factory=lambda: [0, 1])
    m: Optional[List[int]] = Field(None, description="String-function charges; all when omitted")
    r1: List[int] = Field(default_factory=list)
    span: int = Field(default=3, ge=0, description="Entries of A and B range over [-span, span]")
    order: Optional[int] = Field(None, ge=0)
    order_numerator: Optional[int] = Field(None, ge=0)
    cases: Optional[int] = Field(None, ge=0)
    seed: Optional[int] = None
    workers: Optional[int] = Field(None, ge=1)
    reports: Optional[str] = None
    tables: Optional[str] = None
    corrupt_delta: bool = Field(default=False, description="Negative control: perturb delta")

    model_config = ConfigDict(json_schema_extra={
        "example": {
            "target": "corollary",
            "variant": "N1",
            "k": [2],
            "i": [2],
            "delta": [1],
            "order": 50,
        }
    })

    @model_validator(mode="after")
    def validate_grid(self) -> "SweepConfig":
        """Exactly one order form; variants, N and delta in range."""
        if (self.order is None) == (self.order_numerator is None):
            raise ValueError("Give exactly one of order and order_numerator")
        allowed = VARIANTS.get(self.target)
        if self.variant is not None:
            if allowed is None:
                raise ValueError(f"Target {self.target.value} takes no variant")
            if self.variant not in allowed:
                raise ValueError(f"Variant {self.variant!r} not in {list(allowed)}")
        if any(n < 1 for n in self.N):
            raise ValueError("N must be at least 1")
        if any(d not in (0, 1) for d in self.delta):
            raise ValueError("delta must be 0 or 1")
        if any(x < 0 for x in self.ell + self.M + self.k + self.r1):
            raise ValueError("ell, M, k and r1 must be non-negative")
        return self


class EvalRequest(BaseModel):
    """A named series with parameters, for the eval verb."""

    name: str
    params: Dict[str, str] = Field(default_factory=dict)
    order: Optional[int] = Field(None, ge=0)
    format: OutputFormat = OutputFormat.CSV

    model_config = ConfigDict(json_schema_extra={
        "example": {
            "name": "residue-product",
            "params": {"mod": "5", "exclude": "0,2,3"},
            "order": 10,
            "format": "csv",
        }
    })


class SweepCell(BaseModel):
    """One expanded cell of a sweep: a target, its parameters and its window."""

    key: str
    target: Target
    variant: Optional[str] = None
    params: Dict[str, Any] = Field(default_factory=dict)
    denom: int = Field(..., ge=1)
    order_numerator: int = Field(..., ge=0)
    seed: Optional[int] = None
