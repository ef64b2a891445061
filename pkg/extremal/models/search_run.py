from sqlalchemy import Column, DateTime, Float, ForeignKey, Integer, String, Text, UniqueConstraint
from sqlalchemy.orm import relationship
from sqlalchemy.sql import func

from ..database import Base


class SearchRun(Base):
    __tablename__ = "search_runs"

    id = Column(Integer, primary_key=True, index=True)
    config_hash = Column(String(64), nullable=False, index=True)
    config_json = Column(Text, nullable=False)
    status = Column(String, nullable=False, default="running")

    best_ratio = Column(Float, nullable=True)
    explored = Column(Integer, nullable=False, default=0)
    pruned = Column(Integer, nullable=False, default=0)
    result_json = Column(Text, nullable=True)

    created_at = Column(DateTime(timezone=True), server_default=func.now())
    updated_at = Column(DateTime(timezone=True), onupdate=func.now())

    checkpoints = relationship(
        "SearchCheckpoint", back_populates="run", cascade="all, delete-orphan", order_by="SearchCheckpoint.chunk_index"
    )

    def __repr__(self):
        return f"<SearchRun(id={self.id}, status='{self.status}', best_ratio={self.best_ratio})>"


class SearchCheckpoint(Base):
    __tablename__ = "search_checkpoints"
    __table_args__ = (UniqueConstraint("run_id", "chunk_index"),)

    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(Integer, ForeignKey("search_runs.id", ondelete="CASCADE"), nullable=False)
    chunk_index = Column(Integer, nullable=False)
    # JSON list of [canonical key, ratio] pairs evaluated in the chunk
    entries_json = Column(Text, nullable=False)
    explored = Column(Integer, nullable=False, default=0)
    created_at = Column(DateTime(timezone=True), server_default=func.now())

    run = relationship("SearchRun", back_populates="checkpoints")

    def __repr__(self):
        return f"<SearchCheckpoint(run_id={self.run_id}, chunk_index={self.chunk_index})>"
