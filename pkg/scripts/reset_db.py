#!/usr/bin/env python3
"""
DANGER: Drops and recreates the experiment run registry tables.
Output directories on disk are left alone; only the recorded runs are erased.
"""
import sys
from pathlib import Path

# Ensure project root is on sys.path so we can import db.py
ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from sqlalchemy import func, select

from db import Base, ExperimentRun, engine


def reset() -> int:
    """Returns how many recorded runs were dropped."""
    with engine.connect() as conn:
        count = conn.execute(select(func.count()).select_from(ExperimentRun.__table__)).scalar()
    Base.metadata.drop_all(bind=engine)
    Base.metadata.create_all(bind=engine)
    return int(count or 0)


if __name__ == "__main__":
    print("[reset_db] Dropping and recreating experiment_runs...")
    dropped = reset()
    print(f"[reset_db] Done ({dropped} runs removed).")
