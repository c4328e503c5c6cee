from fastapi import APIRouter, HTTPException, status
from starlette.concurrency import run_in_threadpool
import logging

from gmtame.algebra.polyring import context_of, parse
from gmtame.core.config import RunConfig
from gmtame.core.exceptions import (
    GMTameError,
    InternalInvariantError,
    IterationCapExceeded,
    NotIsolated,
    ParseError,
)
from gmtame.schemas.reports import (
    GoodBasisReport,
    MilnorReport,
    PolynomialRequest,
    SpectrumReport,
)
from gmtame.services.milnor import milnor_data, quasihomogeneous_weights
from gmtame.services.pipeline import run, run_spectrum

logger = logging.getLogger(__name__)

router = APIRouter()


def _http_error(e: GMTameError) -> HTTPException:
    if isinstance(e, (ParseError, NotIsolated)):
        code = 422
    elif isinstance(e, IterationCapExceeded):
        code = status.HTTP_409_CONFLICT
    else:
        code = status.HTTP_500_INTERNAL_SERVER_ERROR
    if isinstance(e, InternalInvariantError):
        logger.error(f"Internal failure in stage {e.stage}: {e.detail}")
    return HTTPException(status_code=code, detail=e.to_dict())


def _config(request: PolynomialRequest) -> RunConfig:
    return RunConfig(vars=request.vars, checks=request.checks.value, k_max=request.k_max)


@router.post("/spectrum", response_model=SpectrumReport)
async def compute_spectrum(request: PolynomialRequest):
    """
    Spectrum at infinity of a tame polynomial
    """
    try:
        config = _config(request)
        f = parse(request.polynomial, config.vars)
        context = context_of(f)
        spectrum = await run_in_threadpool(run_spectrum, f, context, config)
    except GMTameError as e:
        raise _http_error(e)
    return SpectrumReport.from_spectrum(context.format(f), list(context.names), spectrum)


@router.post("/goodbasis", response_model=GoodBasisReport)
async def compute_good_basis(request: PolynomialRequest):
    """
    Good basis of the Brieskorn lattice with A0, A1, spectrum and monodromy classes
    """
    try:
        config = _config(request)
        f = parse(request.polynomial, config.vars)
        result = await run_in_threadpool(run, f, context_of(f), config)
    except GMTameError as e:
        raise _http_error(e)
    return GoodBasisReport.from_result(result)


@router.post("/milnor", response_model=MilnorReport)
async def compute_milnor(request: PolynomialRequest):
    """
    Milnor number and standard monomial basis of the Jacobian algebra
    """
    try:
        f = parse(request.polynomial, request.vars)
        context = context_of(f)
        data = milnor_data(f, context)
    except GMTameError as e:
        raise _http_error(e)
    return MilnorReport.from_data(data, context.format(f), quasihomogeneous_weights(f, context))
