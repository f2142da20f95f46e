"""Block partitioning, within-block standardization and block maxima."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from datetime import date
from typing import Sequence, TextIO

import numpy as np

from .errors import DegenerateBlockError, InvalidInputError, SchemaError
from .ingest import DivisionSeries

log = logging.getLogger(__name__)

BLOCK_LENGTHS = (7, 15, 30)
COVARIATE_MODES = ("argmax", "block_mean")


@dataclass(frozen=True)
class Block:
    index: int
    days: tuple
    length_target: int

    @property
    def demand(self) -> np.ndarray:
        return np.array([d.demand for d in self.days], dtype=float)

    @property
    def at(self) -> np.ndarray:
        return np.array([d.at for d in self.days], dtype=float)


@dataclass(frozen=True)
class BlockMaximum:
    block_index: int
    z: float
    covariate: float
    argmax_date: date


def partition_blocks(series: DivisionSeries, block_len: int) -> list:
    """Split the series into consecutive non-overlapping blocks.

    Blocks count series positions, so excluded weekdays do not shorten them.
    A trailing remainder is kept only if it has at least half a block.
    """
    if block_len not in BLOCK_LENGTHS:
        raise InvalidInputError(f"block_len must be one of {BLOCK_LENGTHS}, got {block_len}")
    days = series.days
    if not days:
        raise InvalidInputError("cannot partition an empty series")
    blocks = []
    for index, start in enumerate(range(0, len(days), block_len)):
        chunk = days[start:start + block_len]
        if len(chunk) < block_len and len(chunk) < math.ceil(block_len / 2):
            break
        blocks.append(Block(index, tuple(chunk), block_len))
    return blocks


def standardize_block(block: Block) -> np.ndarray:
    """Demand in units of block standard deviations from the block mean."""
    d = block.demand
    if d.size < 2:
        raise DegenerateBlockError(f"block {block.index} has fewer than 2 days")
    mean = d.mean()
    sd = d.std(ddof=1)
    if not sd > 1e-12 * np.max(np.abs(d)):
        raise DegenerateBlockError(f"block {block.index} has constant demand")
    return (d - mean) / sd


def block_maximum(block: Block, covariate_mode: str = "argmax") -> BlockMaximum:
    """Largest standardized demand of the block and its covariate.

    Ties go to the earliest day. ``covariate_mode="block_mean"`` pairs the
    maximum with the block's mean apparent temperature instead of the
    apparent temperature on the peak day.
    """
    z = standardize_block(block)
    i = int(np.argmax(z))
    if covariate_mode == "argmax":
        cov = float(block.days[i].at)
    elif covariate_mode == "block_mean":
        cov = float(block.at.mean())
    else:
        raise InvalidInputError(f"covariate_mode must be one of {COVARIATE_MODES}")
    return BlockMaximum(block.index, float(z[i]), cov, block.days[i].date)


def extract_block_maxima(
    series: DivisionSeries, block_len: int = 15, covariate_mode: str = "argmax"
) -> list:
    """Block maxima for the whole series; degenerate blocks are skipped."""
    out = []
    for block in partition_blocks(series, block_len):
        try:
            out.append(block_maximum(block, covariate_mode))
        except DegenerateBlockError as exc:
            log.warning("skipping block: %s", exc)
    return out


def as_arrays(maxima: Sequence[BlockMaximum]):
    """``(z, covariate)`` arrays for a sequence of block maxima."""
    z = np.array([m.z for m in maxima], dtype=float)
    t = np.array([m.covariate for m in maxima], dtype=float)
    return z, t


def write_block_maxima(maxima: Sequence[BlockMaximum], stream: TextIO) -> None:
    stream.write("block_index,argmax_date,z,covariate\n")
    for m in maxima:
        stream.write(f"{m.block_index},{m.argmax_date.isoformat()},{m.z!r},{m.covariate!r}\n")


def read_block_maxima(stream: TextIO) -> list:
    reader = csv.DictReader(stream)
    cols = ("block_index", "argmax_date", "z", "covariate")
    missing = [c for c in cols if c not in (reader.fieldnames or [])]
    if missing:
        raise SchemaError(f"missing mandatory column {missing[0]!r}", column=missing[0])
    out = []
    for n, row in enumerate(reader, start=2):
        try:
            out.append(BlockMaximum(
                int(row["block_index"]), float(row["z"]), float(row["covariate"]),
                date.fromisoformat(row["argmax_date"]),
            ))
        except (TypeError, ValueError) as exc:
            raise SchemaError(str(exc), row=n) from None
    return out
