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

"""Module with the errors raised by the simulator.

Every error exposes a class level `code` equal to its class name. The command
line prints it in front of the message so scripts can grep for it.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
  from rules_dsl.source_span import SourceSpan


class SelectiveProtocolError(Exception):
  """Root of all simulator errors."""

  code = "SelectiveProtocolError"

  def __init_subclass__(cls, **kwargs):
    super().__init_subclass__(**kwargs)
    cls.code = cls.__name__

  def describe(self) -> str:
    """Returns the one line diagnostic used by the command line."""
    return f"{self.code}: {self}"


# Population


class PopulationError(SelectiveProtocolError):
  """Invalid population input."""


class DuplicateKey(PopulationError):
  """Two agents were given keys that do not compare as different."""


class UnknownState(PopulationError):
  """A state name that the protocol does not declare."""


class EmptyPopulation(PopulationError):
  """A population needs at least one agent."""


# Scheduler


class SchedulerError(SelectiveProtocolError):
  """The scheduler met a situation the protocol does not cover."""


class MissingNullRule(SchedulerError):
  """Emptiness or singleton outcome for a state without a null rule."""


class GuardedProtocolNeedsPredicate(SchedulerError):
  """The generic stability check cannot see hidden keys."""


class InvariantBreach(SchedulerError):
  """An audited invariant does not hold."""


class IllegalKeyRead(SchedulerError):
  """A hidden key was read other than through the comparator."""


# Protocol definitions


class ProtocolDefinitionError(SelectiveProtocolError):
  """A protocol description that is not well formed.

  Attributes:
    span: where in the protocol text the problem is, when parsed from text.
  """

  def __init__(self, message: str, span: SourceSpan | None = None):
    super().__init__(message)
    self.message = message
    self.span = span

  def describe(self) -> str:
    if self.span is None:
      return f"{self.code}: {self.message}"
    return f"{self.span.line}:{self.span.column}: {self.code}: {self.message}"


class ProtocolSyntaxError(ProtocolDefinitionError):
  """The text does not follow the protocol grammar."""


class OverlappingGroups(ProtocolDefinitionError):
  """A state is listed in more than one group."""


class UncoveredState(ProtocolDefinitionError):
  """A state is not listed in any group."""


class MissingTarget(ProtocolDefinitionError):
  """A selective initiator state has no target group."""


class UnknownGroup(ProtocolDefinitionError):
  """A group name that the protocol does not declare."""


class UndeclaredState(ProtocolDefinitionError):
  """A rule, group or target refers to a state missing from `states:`."""


class RulePatternOutsideTargetGroup(ProtocolDefinitionError):
  """The responder pattern is not a member of the initiator's target group."""


class DuplicateRuleMatch(ProtocolDefinitionError):
  """Two rules can match the same drawn pair."""


class GuardInStandardModel(ProtocolDefinitionError):
  """Guarded rule in a standard protocol that does not declare keys."""


# Protocol parameters


class ProtocolParameterError(SelectiveProtocolError):
  """Input parameters outside a protocol's preconditions."""


class NoCandidate(ProtocolParameterError):
  """Leader election needs at least one candidate."""


class ModelAssumptionViolated(ProtocolParameterError):
  """Median protocols need an odd number of pairwise distinct keys."""


# Metrics


class MetricsError(SelectiveProtocolError):
  """Metrics computed on unsuitable data."""


class InsufficientData(MetricsError):
  """A fit needs at least three distinct sizes and positive values."""


class InvalidState(MetricsError):
  """A state outside the ones the metric is defined for."""


# Configuration


class ConfigurationError(SelectiveProtocolError):
  """Experiment configuration that violates its invariants."""
