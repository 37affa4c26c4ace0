import logging
from typing import List, Optional, Union

from fastapi import APIRouter, File, Form, HTTPException, UploadFile, status
from pydantic import BaseModel, ConfigDict, Field, field_validator

from core import Certificate, Election
from election_file import loads
from errors import BudgetError, InputError
from solvers import SolverConfig, SolverMethod, solve

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/kemeny", tags=["kemeny"])


# ----- Pydantic Schemas -----
class SolveRequest(BaseModel):
    model_config = ConfigDict(
        extra="forbid",
        json_schema_extra={
            "examples": [
                {"votes": [[1, 2, 3], [1, 2, 3], [3, 2, 1]], "k": 1, "solver": {"method": "exact"}}
            ]
        },
    )

    votes: List[List[int]]  # 1-based candidates
    weights: Optional[List[float]] = None
    k: int = Field(..., ge=1)
    sp_axis: Optional[List[int]] = None
    sc_order: Optional[List[int]] = None  # 1-based vote indices
    solver: SolverConfig = Field(default_factory=SolverConfig)

    @field_validator("votes")
    @classmethod
    def validate_votes(cls, v: List[List[int]]):
        if not v:
            raise ValueError("at least one vote is required")
        return v


class SolveOut(BaseModel):
    k: int
    score: Union[int, float]
    method: str
    exact: bool
    centers: List[List[int]]
    cluster_sizes: List[float]


def _run(election: Election, k: int, solver: SolverConfig) -> SolveOut:
    try:
        result = solve(election, k, solver)
    except BudgetError as exc:
        logger.warning("Solve over budget", extra={"budget": exc.budget, "k": k})
        raise HTTPException(status_code=status.HTTP_413_REQUEST_ENTITY_TOO_LARGE, detail=str(exc))
    except InputError as exc:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(exc))
    return SolveOut(
        k=k,
        score=result.score,
        method=result.method,
        exact=result.exact,
        centers=[[c + 1 for c in center] for center in result.centers],
        cluster_sizes=[float(s) for s in result.cluster_sizes(election)],
    )


# ----- Endpoints -----
@router.post("/solve", response_model=SolveOut)
def solve_election(payload: SolveRequest):
    try:
        cert = None
        if payload.sp_axis is not None or payload.sc_order is not None:
            cert = Certificate(
                sp_axis=tuple(c - 1 for c in payload.sp_axis) if payload.sp_axis is not None else None,
                sc_order=tuple(i - 1 for i in payload.sc_order) if payload.sc_order is not None else None,
            )
        election = Election.from_rankings(
            [[c - 1 for c in v] for v in payload.votes],
            payload.weights,
            certificate=cert,
        )
    except InputError as exc:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(exc))
    return _run(election, payload.k, payload.solver)


@router.post("/solve-file", response_model=SolveOut)
async def solve_file(
    file: UploadFile = File(...),
    k: int = Form(1, ge=1),
    method: SolverMethod = Form("heuristic"),
    restarts: int = Form(10, ge=1),
    seed: Optional[int] = Form(None),
):
    """Solve an uploaded election file."""
    raw = await file.read()
    try:
        election = loads(raw.decode("utf-8"))
    except UnicodeDecodeError:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail="election file must be UTF-8 text")
    except InputError as exc:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(exc))
    logger.info("Election file uploaded", extra={"filename": file.filename, "m": election.m, "k": k})
    return _run(election, k, SolverConfig(method=method, restarts=restarts, seed=seed))
