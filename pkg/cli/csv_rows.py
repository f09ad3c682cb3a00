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

"""Module with the CSV rows of an experiment.

One row per trial, followed by one row per protocol specific extra value of
that trial. Extra rows repeat the trial columns and fill extra_key and
extra_value; trial rows leave both empty.
"""

from __future__ import annotations

import io
from collections.abc import Iterable
from typing import Any, TextIO

import pandas

from cli.trials import TrialOutcome

CSV_HEADER = (
    "protocol",
    "model",
    "n",
    "seed",
    "trial",
    "interactions",
    "chunks",
    "fragmented_time",
    "parallel_time",
    "stabilized",
    "correct",
    "extra_key",
    "extra_value",
)


def _flag(value: bool) -> str:
  return "true" if value else "false"


def _value(value: Any) -> Any:
  if isinstance(value, bool):
    return _flag(value)
  return value


def rows_for(outcome: TrialOutcome) -> list[dict[str, Any]]:
  """The trial row of `outcome` and its extra rows."""
  result = outcome.result
  row = {
      "protocol": outcome.protocol,
      "model": outcome.model,
      "n": outcome.n,
      "seed": outcome.seed,
      "trial": outcome.trial,
      "interactions": result.interactions,
      "chunks": result.chunks,
      "fragmented_time": result.fragmented_time,
      "parallel_time": result.parallel_time,
      "stabilized": _flag(result.stabilized),
      "correct": _flag(result.correct),
      "extra_key": "",
      "extra_value": "",
  }
  rows = [row]
  for key, value in result.extras:
    rows.append({**row, "extra_key": key, "extra_value": _value(value)})
  for code in result.diagnostics:
    rows.append({**row, "extra_key": "diagnostic", "extra_value": code})
  return rows


def build_frame(outcomes: Iterable[TrialOutcome]) -> pandas.DataFrame:
  rows = [row for outcome in outcomes for row in rows_for(outcome)]
  return pandas.DataFrame(rows, columns=list(CSV_HEADER))


def write_csv(outcomes: Iterable[TrialOutcome], stream: TextIO) -> None:
  """Writes the rows of every outcome, header first, with \\n line ends."""
  build_frame(outcomes).to_csv(stream, index=False, lineterminator="\n")


def csv_text(outcomes: Iterable[TrialOutcome]) -> str:
  buffer = io.StringIO()
  write_csv(outcomes, buffer)
  return buffer.getvalue()


def read_trial_rows(path: str) -> pandas.DataFrame:
  """Reads a CSV written by write_csv and keeps the trial rows only."""
  frame = pandas.read_csv(path, keep_default_na=False, dtype={"extra_key": str})
  return frame[frame["extra_key"] == ""].reset_index(drop=True)
