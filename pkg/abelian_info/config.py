import logging
import math
import os
from functools import lru_cache

from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError as PydanticValidationError

from .errors import BudgetExceededError, ValidationError

logger = logging.getLogger(__name__)

# Absolute tolerance for grouping spectral values and detecting zeros.
TOL_EQ = 1e-9
# Weight sums of states, row sums of channels and Markov maps.
TOL_STOCHASTIC = 1e-9
# log2 of the largest dense coordinate count.
DEFAULT_BUDGET_LOG2 = 24

BUDGET_ENV = "ABELIAN_INFO_BUDGET"
TOLERANCE_ENV = "ABELIAN_INFO_TOLERANCE"
STOCHASTIC_TOLERANCE_ENV = "ABELIAN_INFO_STOCHASTIC_TOLERANCE"


class Settings(BaseModel):
    """Process-wide defaults; every function also accepts explicit overrides."""

    tolerance: float = Field(default=TOL_EQ, gt=0)
    stochastic_tolerance: float = Field(default=TOL_STOCHASTIC, gt=0)
    budget_log2: float = Field(default=DEFAULT_BUDGET_LOG2, gt=0, le=60)


_overrides = {}


@lru_cache(maxsize=1)
def _load():
    load_dotenv()
    values = {}
    if os.environ.get(BUDGET_ENV):
        values["budget_log2"] = os.environ[BUDGET_ENV]
    if os.environ.get(TOLERANCE_ENV):
        values["tolerance"] = os.environ[TOLERANCE_ENV]
    if os.environ.get(STOCHASTIC_TOLERANCE_ENV):
        values["stochastic_tolerance"] = os.environ[STOCHASTIC_TOLERANCE_ENV]
    values.update(_overrides)
    try:
        settings = Settings(**values)
    except PydanticValidationError as e:
        raise ValidationError(f"Invalid settings: {e.errors()[0]['msg']} ({', '.join(values)})") from e
    logger.debug("settings: %s", settings)
    return settings


def get_settings():
    return _load()


def configure(**overrides):
    """Replace the cached settings, e.g. configure(budget_log2=20)."""
    _overrides.update({k: v for k, v in overrides.items() if v is not None})
    _load.cache_clear()
    return get_settings()


def reset():
    _overrides.clear()
    _load.cache_clear()


def resolve_tol(tol=None):
    return get_settings().tolerance if tol is None else tol


def resolve_stochastic_tol(tol=None):
    return get_settings().stochastic_tolerance if tol is None else tol


def resolve_budget(budget=None):
    return get_settings().budget_log2 if budget is None else budget


def check_budget(coordinates, budget=None, what="dense enumeration"):
    """Raise BudgetExceededError when log2(coordinates) exceeds the budget."""
    budget = resolve_budget(budget)
    if coordinates <= 0:
        return
    size = math.log2(coordinates)
    if size > budget + 1e-12:
        raise BudgetExceededError(
            f"{what} needs 2^{size:.2f} coordinates, budget is 2^{budget:g} "
            f"(raise --budget or {BUDGET_ENV})"
        )
    logger.debug("%s: 2^%.2f coordinates within budget 2^%g", what, size, budget)
