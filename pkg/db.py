import json
import logging
from datetime import datetime, timezone
from typing import Optional

from sqlalchemy import CheckConstraint, Column, DateTime, Integer, String, Text, create_engine
from sqlalchemy.orm import declarative_base, sessionmaker

import config

logger = logging.getLogger(__name__)

_connect_args = {"check_same_thread": False} if config.DATABASE_URL.startswith("sqlite") else {}
engine = create_engine(config.DATABASE_URL, pool_pre_ping=True, connect_args=_connect_args)
SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)
Base = declarative_base()


class ExperimentRun(Base):
    __tablename__ = "experiment_runs"
    __table_args__ = (
        CheckConstraint("status in ('running','finished','failed')", name="ck_experiment_runs_status"),
    )
    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(String, unique=True, index=True, nullable=False)
    name = Column(String, nullable=False, index=True)
    seed = Column(Integer, nullable=False)
    config_json = Column(Text, nullable=False)  # RunConfig as JSON
    output_dir = Column(String, nullable=False)
    status = Column(String, nullable=False, default="running")  # running | finished | failed
    started_at = Column(DateTime, nullable=False)
    completed_at = Column(DateTime, nullable=True)
    manifest_path = Column(String, nullable=True)

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "name": self.name,
            "seed": self.seed,
            "config": json.loads(self.config_json),
            "output_dir": self.output_dir,
            "status": self.status,
            "started_at": self.started_at.isoformat() if self.started_at else None,
            "completed_at": self.completed_at.isoformat() if self.completed_at else None,
            "manifest_path": self.manifest_path,
        }


Base.metadata.create_all(bind=engine)


def get_db():  # pragma: no cover
    db = SessionLocal()
    try:
        yield db
    finally:
        db.close()


def _now() -> datetime:
    return datetime.now(timezone.utc).replace(tzinfo=None)


def record_run_started(run_id: str, name: str, seed: int, config_json: str, output_dir: str,
                       session_factory=None) -> None:
    db = (session_factory or SessionLocal)()
    try:
        db.add(ExperimentRun(run_id=run_id, name=name, seed=seed, config_json=config_json,
                             output_dir=output_dir, status="running", started_at=_now()))
        db.commit()
        logger.info("Run recorded", extra={"run_id": run_id, "experiment": name})
    finally:
        db.close()


def record_run_finished(run_id: str, manifest_path: Optional[str], failed: bool = False,
                        session_factory=None) -> None:
    db = (session_factory or SessionLocal)()
    try:
        run = db.query(ExperimentRun).filter(ExperimentRun.run_id == run_id).first()
        if run is None:
            logger.warning("Finishing unknown run", extra={"run_id": run_id})
            return
        run.status = "failed" if failed else "finished"
        run.completed_at = _now()
        run.manifest_path = manifest_path
        db.commit()
    finally:
        db.close()
