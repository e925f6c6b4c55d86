"""File formats and report serialization.

Inputs (code, channel, Markov and sweep files) and outputs (reports) are
pydantic models. JSON output rounds floats to 12 significant digits and keeps
insertion order, so identical inputs give byte-identical reports.
"""

import json
import logging
from pathlib import Path
from typing import Any, Literal, Optional

import numpy as np
import pandas as pd
import yaml
from pydantic import BaseModel, ConfigDict, Field, model_validator
from pydantic import ValidationError as PydanticValidationError

from . import __version__
from .errors import ValidationError

logger = logging.getLogger(__name__)

TOOL = "abelian-info"
SCHEMA_VERSION = 1
SIGNIFICANT_DIGITS = 12


# ===========================================================
#  Input files
# ===========================================================

class CodeFile(BaseModel):
    code_dim: int = Field(default=2, ge=2, le=36)
    codewords: list[str] = Field(min_length=1)


def _check_rectangular(rows, what):
    widths = {len(row) for row in rows}
    if len(widths) > 1:
        raise ValueError(f"{what} rows have different lengths {sorted(widths)}")


class ChannelFile(BaseModel):
    rows: list[list[float]] = Field(min_length=1)

    @model_validator(mode="after")
    def _rectangular(self):
        _check_rectangular(self.rows, "channel")
        return self


class MarkovFile(BaseModel):
    """Either one stationary matrix (`rows`) or a list of maps; columns are images."""

    maps: Optional[list[list[list[float]]]] = None
    rows: Optional[list[list[float]]] = None
    initial: Optional[list[float]] = None

    @model_validator(mode="after")
    def _one_of(self):
        if (self.maps is None) == (self.rows is None):
            raise ValueError("give exactly one of 'maps' or 'rows'")
        if self.maps is not None and not self.maps:
            raise ValueError("'maps' must not be empty")
        for k, matrix in enumerate(self.matrices()):
            _check_rectangular(matrix, f"map {k}")
        return self

    def matrices(self):
        return [self.rows] if self.rows is not None else list(self.maps)


class ParameterSpec(BaseModel):
    value: Any = None
    values: Optional[list[Any]] = None

    @model_validator(mode="after")
    def _one_of(self):
        if (self.value is None) == (self.values is None):
            raise ValueError("each parameter needs exactly one of 'value' or 'values'")
        return self

    def grid(self):
        return list(self.values) if self.values is not None else [self.value]


class SweepConfig(BaseModel):
    program: str = "main.py"
    method: Literal["grid"] = "grid"
    kind: Literal["aep", "coding"]
    seed: int = Field(default=0, ge=0)
    parameters: dict[str, ParameterSpec] = Field(default_factory=dict)
    tracking: dict[str, Any] = Field(default_factory=dict)


# ===========================================================
#  Reports
# ===========================================================

class TypicalSummary(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    eps: float
    entropy: float
    prob_mass: float
    count: int
    log2_count: float
    lower_log2: float
    upper_log2: float
    sandwich_holds: bool
    mode: str = "strict"
    method: str = "type-class"
    dropped_symbols: list[int] = Field(default_factory=list)


class CodingReport(BaseModel):
    """One trial of the block-coding experiment at block length k."""

    model_config = ConfigDict(frozen=True)

    k: int
    rate: float
    codebook_size: int
    trial: int
    seed: int
    policy: str
    input_distribution: str = "uniform"
    decoder_scale: str = "transition"
    mode: str = "exact"
    error_prob: float
    # None in monte-carlo mode
    gap: Optional[float] = None
    outside_mass: float
    # expectations use the full Y(x)X basis of the k-block joint state,
    # summed over pairs whose input lies in the codebook
    interpretation: str = "full-basis"


class CodingSummary(BaseModel):
    model_config = ConfigDict(frozen=True)

    k: int
    rate: float
    codebook_size: int
    trials: int
    mean_error_prob: float
    max_error_prob: float
    mean_gap: Optional[float] = None
    max_gap: Optional[float] = None
    mean_outside_mass: float


class ZkReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    k: int
    rate: float
    eps: float
    codebook_size: int
    mass: float
    bound: float
    provable_bound: float
    holds: bool


# ===========================================================
#  Reading and writing
# ===========================================================

def load_model(model, path):
    """Parse the JSON (or YAML, by suffix) file at `path` into `model`."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ValidationError(f"Cannot read {path}: {e.strerror}") from e
    try:
        if path.suffix in (".yaml", ".yml"):
            data = yaml.safe_load(text)
        else:
            data = json.loads(text)
        return model.model_validate(data)
    except PydanticValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(p) for p in first["loc"]) or "<root>"
        raise ValidationError(f"{path}: {where}: {first['msg']}") from e
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise ValidationError(f"{path}: malformed file ({e})") from e


def round_floats(obj, digits=SIGNIFICANT_DIGITS):
    if isinstance(obj, BaseModel):
        obj = obj.model_dump()
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return float(f"{x:.{digits}g}") if np.isfinite(x) else x
    if isinstance(obj, dict):
        return {str(k): round_floats(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [round_floats(v, digits) for v in obj]
    return obj


def to_json(obj):
    return json.dumps(round_floats(obj), indent=2, ensure_ascii=False) + "\n"


def to_csv(records):
    """One row per record; nested values are JSON-encoded into their cell."""
    rows = []
    for record in round_floats(records):
        rows.append({
            k: json.dumps(v) if isinstance(v, (dict, list)) else v
            for k, v in record.items()
        })
    if not rows:
        return ""
    return pd.DataFrame(rows).to_csv(index=False, lineterminator="\n")


def write_text(path, text):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise ValidationError(f"Cannot write {path}: {e.strerror}") from e
    logger.info("wrote %s (%d bytes)", path, len(text))


def report_meta(command, seed=None, config=None):
    meta = {
        "tool": TOOL,
        "version": __version__,
        "schema_version": SCHEMA_VERSION,
        "seed": seed,
        "command": command,
    }
    if config is not None:
        meta["config"] = config
    return meta
