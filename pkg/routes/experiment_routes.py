from typing import Any, Dict, List, Optional

from fastapi import APIRouter, Depends, HTTPException, Query, status
from sqlalchemy import desc
from sqlalchemy.orm import Session

from db import ExperimentRun, get_db

router = APIRouter(prefix="/experiments", tags=["experiments"])


@router.get("/runs", response_model=List[Dict[str, Any]])
def list_runs(
    name: Optional[str] = Query(None, description="filter by experiment name"),
    limit: int = Query(50, ge=1, le=500),
    db: Session = Depends(get_db),
):
    """Recorded experiment runs, newest first."""
    query = db.query(ExperimentRun)
    if name:
        query = query.filter(ExperimentRun.name == name)
    runs = query.order_by(desc(ExperimentRun.started_at), desc(ExperimentRun.id)).limit(limit).all()
    return [run.to_dict() for run in runs]


@router.get("/runs/{run_id}", response_model=Dict[str, Any])
def get_run(run_id: str, db: Session = Depends(get_db)):
    run = db.query(ExperimentRun).filter(ExperimentRun.run_id == run_id).first()
    if not run:
        raise HTTPException(status_code=status.HTTP_404_NOT_FOUND, detail="Run not found")
    return run.to_dict()
