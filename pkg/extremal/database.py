from typing import Optional

from sqlalchemy import create_engine
from sqlalchemy.engine import Engine
from sqlalchemy.orm import declarative_base, sessionmaker

from .core.config import settings


def make_engine(url: Optional[str] = None) -> Engine:
    """Engine for the run store; echoes SQL when DEBUG is set."""
    return create_engine(url or settings.DATABASE_URL, echo=settings.DEBUG)


def session_factory(bind: Engine) -> sessionmaker:
    return sessionmaker(autocommit=False, autoflush=False, bind=bind)


# Default engine and session class, bound to settings.DATABASE_URL
engine = make_engine()
SessionLocal = session_factory(engine)

# Base class for all models
Base = declarative_base()


def init_db(bind: Optional[Engine] = None) -> None:
    """Create the run-store tables if they do not exist."""
    from .models import search_run  # noqa: F401  registers the tables on Base

    Base.metadata.create_all(bind=bind or engine)


def get_db():
    """
    Yield a session on the default engine and close it when the caller is done.
    """
    db = SessionLocal()
    try:
        yield db
    finally:
        db.close()
