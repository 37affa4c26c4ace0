import logging
from typing import List, Optional

from fastapi import APIRouter, HTTPException, Query, status
from pydantic import BaseModel, ConfigDict, Field, field_validator

from domains import DOMAIN_NAMES, FORMULA_KINDS, domain_size_formula, named_domain
from errors import BudgetError, InputError

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/domains", tags=["domains"])

# enumeration responses list every vote
MAX_ENUMERATED = 50_000


# ----- Pydantic Schemas -----
class DomainSizeOut(BaseModel):
    kind: str
    m: int
    size: int


class EnumerateRequest(BaseModel):
    model_config = ConfigDict(
        extra="forbid",
        json_schema_extra={"examples": [{"kind": "SP", "m": 4}]},
    )

    kind: str
    m: int = Field(..., ge=1, le=16)
    seed: Optional[int] = None

    @field_validator("kind")
    @classmethod
    def validate_kind(cls, v: str):
        if v not in DOMAIN_NAMES:
            raise ValueError(f"kind must be one of {', '.join(DOMAIN_NAMES)}")
        return v


class EnumerateOut(BaseModel):
    kind: str
    m: int
    size: int
    lower_bound: bool
    votes: List[List[int]]  # 1-based candidates


# ----- Endpoints -----
@router.get("/sizes", response_model=DomainSizeOut)
def domain_size(kind: str = Query(..., description=", ".join(FORMULA_KINDS)), m: int = Query(..., ge=1, le=64)):
    """Closed-form domain size."""
    try:
        return DomainSizeOut(kind=kind, m=m, size=domain_size_formula(kind, m))
    except InputError as exc:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(exc))


@router.post("/enumerate", response_model=EnumerateOut)
def enumerate_domain(payload: EnumerateRequest):
    if payload.kind == "Full" and payload.m > 8:
        raise HTTPException(status_code=status.HTTP_413_REQUEST_ENTITY_TOO_LARGE,
                            detail=f"Full domain over {payload.m} candidates is too large to list")
    try:
        dom = named_domain(payload.kind, payload.m, payload.seed)
    except BudgetError as exc:
        raise HTTPException(status_code=status.HTTP_413_REQUEST_ENTITY_TOO_LARGE, detail=str(exc))
    except InputError as exc:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(exc))
    if len(dom) > MAX_ENUMERATED:
        raise HTTPException(status_code=status.HTTP_413_REQUEST_ENTITY_TOO_LARGE,
                            detail=f"{payload.kind} over {payload.m} candidates has {len(dom)} votes")
    logger.info("Domain enumerated via API", extra={"kind": payload.kind, "m": payload.m, "size": len(dom)})
    return EnumerateOut(
        kind=payload.kind,
        m=payload.m,
        size=len(dom),
        lower_bound=dom.descriptor.lower_bound,
        votes=[[c + 1 for c in v] for v in dom.votes],
    )
