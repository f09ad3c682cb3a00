#!/usr/bin/env python3

###########################################################################
#
#  Copyright 2024 Google LLC
#
#  Licensed under the Apache License, Version 2.0 (the "License");
#  you may not use this file except in compliance with the License.
#  You may obtain a copy of the License at
#
#      https://www.apache.org/licenses/LICENSE-2.0
#
#  Unless required by applicable law or agreed to in writing, software
#  distributed under the License is distributed on an "AS IS" BASIS,
#  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#  See the License for the specific language governing permissions and
#  limitations under the License.
#
###########################################################################

"""Module with the scaling table of a sweep over population sizes."""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping
from typing import Any

import pandas

from errors import InsufficientData
from metrics.fitting import FitResult, fit_exponent, fit_polylog

SCALING_COLUMNS = (
    "n",
    "seed",
    "trial",
    "interactions",
    "chunks",
    "fragmented_time",
    "parallel_time",
    "stabilized",
    "correct",
)
FITTED_METRICS = ("interactions", "parallel_time", "fragmented_time")


class ScalingTable:
  """One row per (n, seed) trial, rows ordered by n then trial.

  Attributes:
    frame: the rows as a pandas DataFrame with SCALING_COLUMNS plus one
      column per numeric extra.
  """

  def __init__(self, frame: pandas.DataFrame):
    self.frame = frame.sort_values(["n", "trial"], kind="stable").reset_index(
        drop=True
    )

  @classmethod
  def from_records(cls, records: Iterable[Mapping[str, Any]]) -> ScalingTable:
    frame = pandas.DataFrame(list(records))
    missing = [column for column in SCALING_COLUMNS if column not in frame]
    if missing:
      raise InsufficientData(f"scaling rows lack columns {missing}")
    return cls(frame)

  @classmethod
  def from_outcomes(cls, outcomes: Iterable[Any]) -> ScalingTable:
    """Builds the table from cli TrialOutcome objects."""
    records = []
    for outcome in outcomes:
      result = outcome.result
      record = {
          "n": outcome.n,
          "seed": outcome.seed,
          "trial": outcome.trial,
          "interactions": result.interactions,
          "chunks": result.chunks,
          "fragmented_time": result.fragmented_time,
          "parallel_time": result.parallel_time,
          "stabilized": result.stabilized,
          "correct": result.correct,
      }
      for key, value in result.extras:
        if isinstance(value, (int, float)) and key not in record:
          record[key] = value
      records.append(record)
    return cls.from_records(records)

  def sizes(self) -> list[int]:
    return sorted(self.frame["n"].unique().tolist())

  def points(self, column: str) -> list[tuple[int, float]]:
    """(n, value) of every trial, for fitting."""
    return [
        (int(n), float(value))
        for n, value in zip(self.frame["n"], self.frame[column])
    ]

  def means(self, column: str) -> pandas.Series:
    return self.frame.groupby("n")[column].mean()

  def correct_fraction(self) -> float:
    if self.frame.empty:
      return 0.0
    return float(self.frame["correct"].astype(bool).mean())

  def log_ratio(
      self, column: str = "fragmented_time", power: int = 1
  ) -> pandas.Series:
    """Mean of `column` divided by ln(n)**power, per n."""
    means = self.means(column)
    suffix = "ln n" if power == 1 else f"ln^{power} n"
    return pandas.Series(
        [value / math.log(n) ** power for n, value in means.items()],
        index=means.index,
        name=f"{column}/{suffix}",
    )

  def growth(
      self, column: str, ratio_to_log: bool = False, power: int = 1
  ) -> float:
    """Mean at the largest n over the mean at the smallest n.

    With `ratio_to_log` the means are first divided by ln(n)**power.
    """
    series = (
        self.log_ratio(column, power) if ratio_to_log else self.means(column)
    )
    if len(series) < 2 or series.iloc[0] <= 0:
      raise InsufficientData(f"growth of {column} needs two positive means")
    return float(series.iloc[-1] / series.iloc[0])

  def fit(self, column: str) -> tuple[FitResult, FitResult]:
    """Power law and polylog fits of `column` against n."""
    points = self.points(column)
    return fit_exponent(points), fit_polylog(points)

  def summary(self) -> pandas.DataFrame:
    """Per n: trials, correct fraction and the means of the fitted metrics."""
    grouped = self.frame.groupby("n")
    summary = grouped[list(FITTED_METRICS)].mean()
    summary.insert(0, "trials", grouped.size())
    summary.insert(1, "correct", grouped["correct"].mean())
    summary["fragmented_time/ln n"] = self.log_ratio()
    return summary
