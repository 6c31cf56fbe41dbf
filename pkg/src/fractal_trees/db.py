from __future__ import annotations

import json
from datetime import datetime
from functools import lru_cache
from typing import List, Optional

from sqlalchemy import Boolean, DateTime, Float, Integer, String, Text, create_engine, select
from sqlalchemy.orm import DeclarativeBase, Mapped, mapped_column, sessionmaker

from .config import get_settings


class Base(DeclarativeBase):
    pass


class CountRun(Base):
    __tablename__ = "count_runs"
    id: Mapped[int] = mapped_column(Integer, primary_key=True, autoincrement=True)
    schema_name: Mapped[str] = mapped_column(String)
    level: Mapped[int] = mapped_column(Integer)
    method: Mapped[str] = mapped_column(String)          # decimation | cofactor | probabilistic | verify
    factored_json: Mapped[str] = mapped_column(Text, default="{}")
    digits: Mapped[int] = mapped_column(Integer, default=0)
    log10: Mapped[float] = mapped_column(Float, default=0.0)
    agree: Mapped[bool | None] = mapped_column(Boolean, nullable=True)
    detail: Mapped[str] = mapped_column(Text, default="")
    created_at: Mapped[datetime] = mapped_column(DateTime, default=datetime.utcnow)


@lru_cache(maxsize=8)
def _sessionmaker_for(path: str) -> sessionmaker:
    engine = create_engine(f"sqlite:///{path}", future=True)
    Base.metadata.create_all(bind=engine)
    return sessionmaker(bind=engine, autoflush=False, autocommit=False)


def get_sessionmaker(db_path: Optional[str] = None) -> sessionmaker:
    return _sessionmaker_for(db_path or get_settings().db_path)


def record_run(
    schema_name: str,
    level: int,
    method: str,
    factored: dict,
    digits: int = 0,
    log10: float = 0.0,
    agree: Optional[bool] = None,
    detail: str = "",
    db_path: Optional[str] = None,
) -> int:
    """Store one result; returns the row id."""
    SessionLocal = get_sessionmaker(db_path)
    with SessionLocal() as db:
        row = CountRun(
            schema_name=schema_name,
            level=level,
            method=method,
            factored_json=json.dumps(factored, sort_keys=True),
            digits=digits,
            log10=log10,
            agree=agree,
            detail=detail,
        )
        db.add(row)
        db.commit()
        db.refresh(row)
        return row.id


def list_runs(schema_name: Optional[str] = None, limit: int = 50, db_path: Optional[str] = None) -> List[CountRun]:
    SessionLocal = get_sessionmaker(db_path)
    with SessionLocal() as db:
        query = select(CountRun).order_by(CountRun.created_at.desc(), CountRun.id.desc()).limit(limit)
        if schema_name:
            query = query.where(CountRun.schema_name == schema_name)
        rows = db.execute(query).scalars().all()
        db.expunge_all()
        return list(rows)


def print_history(schema_name: Optional[str] = None, limit: int = 50, db_path: Optional[str] = None) -> None:
    """List recorded runs, newest first."""
    rows = list_runs(schema_name, limit, db_path)

    if not rows:
        print("No recorded runs.")
        return

    print("\n" + "=" * 70)
    print("RECORDED RUNS")
    print("=" * 70)
    print(f"{'ID':<6} {'Schema':<16} {'n':<4} {'Method':<14} {'Digits':<10} {'Agree':<7} {'When'}")
    print("-" * 70)

    for row in rows:
        agree = "N/A" if row.agree is None else ("yes" if row.agree else "NO")
        when = row.created_at.strftime("%Y-%m-%d %H:%M") if row.created_at else "N/A"
        print(f"{row.id:<6} {row.schema_name:<16} {row.level:<4} {row.method:<14} {row.digits:<10} {agree:<7} {when}")

    print("-" * 70)
    print(f"Total: {len(rows)} runs\n")
