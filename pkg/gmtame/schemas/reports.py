from pydantic import BaseModel, Field, ConfigDict, field_validator
from typing import Dict, List, Literal, Optional
from enum import Enum

from gmtame.algebra.exactmath import QMatrix, format_rational, rational
from gmtame.services.milnor import MilnorData
from gmtame.services.pipeline import MonodromyData, PipelineResult
from gmtame.services.spectrum import SpectrumData


class ChecksEnum(str, Enum):
    OFF = "off"
    FAST = "fast"
    FULL = "full"


def matrix_rows(m: QMatrix) -> List[List[str]]:
    return [[format_rational(m[i, j]) for j in range(m.cols)] for i in range(m.rows)]


class PolynomialRequest(BaseModel):
    polynomial: str = Field(..., min_length=1, max_length=4096)
    vars: Optional[List[str]] = None
    checks: ChecksEnum = ChecksEnum.FAST
    k_max: Optional[int] = Field(default=None, gt=0)


class SpectralNumber(BaseModel):
    alpha: str  # "p/q"
    mult: int = Field(..., gt=0)

    @field_validator("alpha")
    @classmethod
    def alpha_is_rational(cls, v: str) -> str:
        try:
            rational(v)
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"not a rational number: {v!r}")
        return v


class SpectrumReport(BaseModel):
    polynomial: str
    vars: List[str]
    mu: int
    spectrum: List[SpectralNumber]
    mean: str

    @classmethod
    def from_spectrum(cls, polynomial: str, vars: List[str], s: SpectrumData) -> "SpectrumReport":
        return cls(
            polynomial=polynomial,
            vars=vars,
            mu=s.mu,
            spectrum=[SpectralNumber(alpha=format_rational(a), mult=m) for a, m in s.values],
            mean=format_rational(s.mean),
        )

    @classmethod
    def from_result(cls, result: PipelineResult) -> "SpectrumReport":
        return cls.from_spectrum(result.polynomial, list(result.context.names), result.spectrum)


class MonodromyClassReport(BaseModel):
    model_config = ConfigDict(from_attributes=True, populate_by_name=True)

    value: str = Field(..., alias="class")  # alpha mod 1, eigenvalue exp(-2 pi i value)
    multiplicity: int
    partition: List[int]


class GoodBasisReport(BaseModel):
    polynomial: str
    vars: List[str]
    n: int
    mu: int
    basis: List[str]
    A0: List[List[str]]
    A1: List[List[str]]
    spectrum: List[SpectralNumber]
    mean: str
    monodromy: List[MonodromyClassReport]
    stats: Dict[str, int] = {}

    @staticmethod
    def monodromy_classes(data: MonodromyData) -> List[MonodromyClassReport]:
        return [
            MonodromyClassReport(value=format_rational(c.value), multiplicity=c.multiplicity, partition=c.partition)
            for c in data.classes
        ]

    @classmethod
    def from_result(cls, result: PipelineResult) -> "GoodBasisReport":
        spectrum = SpectrumReport.from_result(result)
        return cls(
            polynomial=result.polynomial,
            vars=list(result.context.names),
            n=result.n,
            mu=result.mu,
            basis=result.basis_text(),
            A0=matrix_rows(result.A0),
            A1=matrix_rows(result.A1),
            spectrum=spectrum.spectrum,
            mean=spectrum.mean,
            monodromy=cls.monodromy_classes(result.monodromy),
            stats=result.stats,
        )


class MilnorReport(BaseModel):
    polynomial: str
    vars: List[str]
    mu: int
    standard_monomials: List[str]
    quasihomogeneous_weights: Optional[List[str]] = None

    @classmethod
    def from_data(cls, data: MilnorData, polynomial: str, weights=None) -> "MilnorReport":
        context = data.context
        return cls(
            polynomial=polynomial,
            vars=list(context.names),
            mu=data.mu,
            standard_monomials=[context.format(context.monomial(m)) for m in data.standard_monomials],
            quasihomogeneous_weights=[format_rational(w) for w in weights] if weights else None,
        )


class ErrorReport(BaseModel):
    error: str
    detail: str
    stage: Optional[str] = None
    exit_code: int


class CorpusCase(BaseModel):
    name: str
    polynomial: str
    vars: Optional[List[str]] = None
    spectrum: Dict[str, int]
    monodromy: Optional[Dict[str, List[int]]] = None
    slow: bool = False

    @field_validator("spectrum", "monodromy")
    @classmethod
    def keys_are_rational(cls, v):
        for key in v or {}:
            try:
                rational(key)
            except (ValueError, ZeroDivisionError):
                raise ValueError(f"not a rational number: {key!r}")
        return v


class CaseOutcome(BaseModel):
    name: str
    status: Literal["pass", "fail", "error"]
    diff: List[str] = []
