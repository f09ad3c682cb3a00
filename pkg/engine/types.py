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

"""Module with the value types shared by the scheduler and its callers."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any

from errors import ConfigurationError


class Model(enum.Enum):
  """Interaction model of a protocol."""

  STANDARD = "standard"
  SELECTIVE = "selective"


class Guard(enum.Enum):
  """Key comparison a rule requires.

  LESS means initiator key < responder key.
  """

  NONE = ""
  LESS = "<"
  GREATER = ">"


class OutcomeKind(enum.Enum):
  """Outcome of one scheduler step."""

  MEANINGFUL = "Meaningful"
  EMPTINESS = "Emptiness"
  SINGLETON = "Singleton"
  NO_MATCH = "NoMatch"


@dataclass(frozen=True)
class StateId:
  """A state of a protocol, by position in its state table."""

  index: int
  name: str


@dataclass(frozen=True)
class GroupId:
  """A group of a protocol, by position in its group table."""

  index: int
  name: str


@dataclass(frozen=True, slots=True)
class InteractionRecord:
  """One scheduler step.

  Attributes:
    step: 1-based interaction counter.
    initiator: agent id of the initiator.
    responder: agent id of the responder, None for Emptiness, Singleton and
      for NoMatch draws of idle initiators.
    kind: outcome of the step.
    rule: index of the fired rule in its protocol, None when nothing fired.
  """

  step: int
  initiator: int
  responder: int | None
  kind: OutcomeKind
  rule: int | None


@dataclass(frozen=True)
class RunLimits:
  """Bounds of a single run."""

  max_interactions: int
  stability_check_period: int | None = None
  stop_when_stable: bool = True

  def __post_init__(self):
    if self.max_interactions < 1:
      raise ConfigurationError(
          f"max_interactions must be at least 1, got {self.max_interactions}"
      )
    if (
        self.stability_check_period is not None
        and self.stability_check_period < 1
    ):
      raise ConfigurationError(
          "stability_check_period must be at least 1, got"
          f" {self.stability_check_period}"
      )


@dataclass
class RunResult:
  """What a run reports back to the harness.

  Attributes:
    stabilized: the stability predicate held when the run halted.
    interactions: interactions executed by this run.
    final_counts: state name -> agent count at halt.
    diagnostics: non fatal diagnostic codes, e.g. FreePoolExhausted.
    chunks: chunk count of the whole trace so far.
    fragmented_time: k * ln n of the whole trace so far.
    parallel_time: interactions of the whole trace divided by n.
    output: protocol specific output, filled by the protocol bundle.
    correct: verdict of the bundle's correctness oracle.
    extras: protocol specific key/value pairs for the CSV extra rows.
  """

  stabilized: bool
  interactions: int
  final_counts: dict[str, int]
  diagnostics: list[str] = field(default_factory=list)
  chunks: int = 0
  fragmented_time: float = 0.0
  parallel_time: float = 0.0
  output: Any = None
  correct: bool = False
  extras: list[tuple[str, Any]] = field(default_factory=list)

  def add_diagnostic(self, code: str) -> None:
    if code not in self.diagnostics:
      self.diagnostics.append(code)
