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

"""Module with partitioning by coloring against a pivot.

One phase starts with the pivot in P_start and the uncolored agents in N0 /
N0^ (group `uncolored`). Agents learn their side of the pivot by comparing
keys with the pivot or with agents already colored:

  P + uncolored|N0 [<] -> P + G_T        P + uncolored|N0 [>] -> P + R_T
  R_k + uncolored|N0 [<] -> R_k-1 + N    R_k + uncolored|N0 [>] -> R_k + R_T
  G_k + uncolored|N0 [>] -> G_k-1 + N    G_k + uncolored|N0 [<] -> G_k + G_T
  R_0 + colored|N [>] -> R_0 + R_T       G_0 + colored|N [<] -> G_0 + G_T
  N + colored|P [<] -> R_T + P           N + colored|P [>] -> G_T + P
  R_0 + colored|P [<] -> R_0 + P         G_0 + colored|P [>] -> G_0 + P

for 1 <= k <= T tickets. The pivot ends the phase when it finds the
uncolored group empty: P_start -> P_done when nothing was left to color,
P -> P_end otherwise. Between phases a reset stage settles the colors and
returns neutral agents to N0.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

from engine.population import Population
from engine.rng import SchedulerRng
from engine.scheduler import Observer
from engine.trace import Trace
from engine.types import Guard, InteractionRecord
from errors import InvariantBreach
from protocols.bundle import count_is
from protocols.stages import (
    NEUTRAL,
    NEUTRAL_STATES,
    PIVOT,
    PIVOT_DONE,
    PIVOT_END,
    PIVOT_START,
    PIVOT_STATES,
    TAGS,
    UNCOLORED,
    UNCOLORED_STATES,
    StageBudget,
    any_of,
    colored_states,
    green,
    green_states,
    merge_diagnostics,
    red,
    red_states,
    run_stage,
)
from rules_dsl.protocol_spec import ProtocolBuilder, ProtocolSpec

logger = logging.getLogger(__name__)

PIVOT_LOST = "PivotLost"
CANDIDATE_PIVOT = "^"


def coloring_spec(
    states: Sequence[str], tickets: int, fault: bool = False
) -> ProtocolSpec:
  """One coloring phase over the shared state table.

  Args:
    states: the shared state table.
    tickets: tickets of a newly colored agent.
    fault: use the rules that recolor the pivot when a ticketless colored
      agent meets it. Coloring is then no longer sound.
  """
  colored_group = PIVOT_STATES + NEUTRAL_STATES + colored_states(tickets)
  builder = (
      ProtocolBuilder("coloring")
      .states(*states)
      .group("uncolored", *UNCOLORED_STATES)
      .group("colored", *colored_group)
  )
  used = set(UNCOLORED_STATES + colored_group)
  rest = [state for state in states if state not in used]
  if rest:
    builder.group("rest", *rest)

  ticketed = [
      paint(k, tag)
      for paint in (red, green)
      for k in range(1, tickets + 1)
      for tag in TAGS
  ]
  ticketless = [paint(0, tag) for paint in (red, green) for tag in TAGS]
  builder.target("uncolored", *PIVOT_STATES, *ticketed)
  builder.target("colored", *ticketless, *NEUTRAL_STATES)

  for x in TAGS:
    uncolored = UNCOLORED + x
    for pivot in PIVOT_STATES:
      builder.rule(pivot, uncolored, PIVOT, green(tickets, x), Guard.LESS)
      builder.rule(pivot, uncolored, PIVOT, red(tickets, x), Guard.GREATER)
    for k in range(1, tickets + 1):
      for y in TAGS:
        builder.rule(
            red(k, y), uncolored, red(k - 1, y), NEUTRAL + x, Guard.LESS
        )
        builder.rule(
            red(k, y), uncolored, red(k, y), red(tickets, x), Guard.GREATER
        )
        builder.rule(
            green(k, y), uncolored, green(k - 1, y), NEUTRAL + x,
            Guard.GREATER,
        )
        builder.rule(
            green(k, y), uncolored, green(k, y), green(tickets, x), Guard.LESS
        )
    for y in TAGS:
      builder.rule(
          red(0, y), NEUTRAL + x, red(0, y), red(tickets, x), Guard.GREATER
      )
      builder.rule(
          green(0, y), NEUTRAL + x, green(0, y), green(tickets, x), Guard.LESS
      )
    builder.rule(NEUTRAL + x, PIVOT, red(tickets, x), PIVOT, Guard.LESS)
    builder.rule(NEUTRAL + x, PIVOT, green(tickets, x), PIVOT, Guard.GREATER)

  for y in TAGS:
    if fault:
      builder.rule(
          red(0, y), PIVOT, red(0, y), red(tickets, CANDIDATE_PIVOT),
          Guard.LESS,
      )
      builder.rule(
          green(0, y), PIVOT, green(0, y), green(tickets, CANDIDATE_PIVOT),
          Guard.GREATER,
      )
    else:
      builder.rule(red(0, y), PIVOT, red(0, y), PIVOT, Guard.LESS)
      builder.rule(green(0, y), PIVOT, green(0, y), PIVOT, Guard.GREATER)

  builder.null_rule(PIVOT_START, PIVOT_DONE)
  builder.null_rule(PIVOT, PIVOT_END)
  builder.idle(*ticketed, *ticketless, *NEUTRAL_STATES)
  return builder.build()


@dataclass
class PhaseLog:
  """Accounting of one coloring phase.

  Attributes:
    phase: 1-based phase number within the partition.
    uncolored_before: uncolored agents at the start of the phase.
    colored_this_phase: agents colored R or G during the phase.
    interactions_used: interactions of the phase, reset included.
    chunks_used: chunks the phase added to the trace.
  """

  phase: int
  uncolored_before: int
  colored_this_phase: int
  interactions_used: int
  chunks_used: int

  @property
  def colored_fraction(self) -> float:
    if not self.uncolored_before:
      return 1.0
    return self.colored_this_phase / self.uncolored_before

  def meets_ticket_bound(self, tickets: int) -> bool:
    """Each agent leaving `uncolored` is colored or costs a ticket."""
    needed = math.ceil(self.uncolored_before / (tickets + 1))
    return self.colored_this_phase >= needed


@dataclass
class PartitionOutcome:
  phases: list[PhaseLog] = field(default_factory=list)
  complete: bool = False
  diagnostics: list[str] = field(default_factory=list)


class ColoringAudit:
  """Observer checking coloring soundness against a known pivot.

  Every agent a step touches is checked: red states need a key below the
  pivot's, green states a key above it. A second pivot raises.

  Attributes:
    pivot: the pivot agent.
    violations: (step, agent, state name) of every unsound coloring.
  """

  def __init__(self, pop: Population, pivot: int, tickets: int):
    spec = pop.spec
    self.pivot = pivot
    self._red = {spec.state_id(name).index for name in red_states(tickets)}
    self._green = {
        spec.state_id(name).index for name in green_states(tickets)
    }
    self._pivots = [spec.state_id(name).index for name in PIVOT_STATES]
    self.violations: list[tuple[int, int, str]] = []

  def _check(self, step: int, agent: int, pop: Population) -> None:
    state = pop.state_of[agent]
    if state in self._red and not pop.key_less(agent, self.pivot):
      self.violations.append((step, agent, pop.state_name(agent)))
    elif state in self._green and not pop.key_less(self.pivot, agent):
      self.violations.append((step, agent, pop.state_name(agent)))

  def __call__(self, record: InteractionRecord, pop: Population) -> None:
    self._check(record.step, record.initiator, pop)
    if record.responder is not None:
      self._check(record.step, record.responder, pop)
    if sum(pop.counts[state] for state in self._pivots) > 1:
      raise InvariantBreach(f"two pivots after step {record.step}")


def _leader_lost(pop: Population) -> str | None:
  if not pop.count_of(PIVOT_STATES + (PIVOT_END, PIVOT_DONE)):
    return PIVOT_LOST
  return None


def _colored_now(pop: Population, tickets: int) -> int:
  return pop.count_of(colored_states(tickets))


def partition_by_coloring(
    pop: Population,
    coloring: ProtocolSpec,
    reset: ProtocolSpec,
    tickets: int,
    rng: SchedulerRng,
    trace: Trace,
    budget: StageBudget,
    observers: Sequence[Observer] = (),
    audit: bool = False,
) -> PartitionOutcome:
  """Repeats coloring phases until the pivot finds nothing left to color.

  Expects one agent in P_start and every other agent settled or uncolored.

  Args:
    pop: the population, bound to any stage of the shared table.
    coloring: the coloring phase protocol.
    reset: the relabeling that settles colors between phases.
    tickets: ticket pool, for the accounting.
    rng: random source.
    trace: the run's trace.
    budget: interactions left for the run.
    observers: per-step observers for both stages.
    audit: re-check the group index after every step.
  Returns:
    the per-phase logs; `complete` is set when the pivot reached P_done.
  """
  outcome = PartitionOutcome()
  stable_coloring = any_of((PIVOT_END, PIVOT_DONE))
  while True:
    uncolored_before = pop.count_of(UNCOLORED_STATES)
    interactions_before = trace.interactions
    chunks_before = trace.chunks.chunk_count
    result = run_stage(
        pop, coloring, rng, trace, budget, stable_coloring, _leader_lost,
        observers, audit,
    )
    merge_diagnostics(outcome.diagnostics, result.diagnostics)
    if not result.stabilized:
      return outcome
    if pop.count(PIVOT_DONE):
      outcome.complete = True
      return outcome
    colored = _colored_now(pop, tickets)
    result = run_stage(
        pop, reset, rng, trace, budget, count_is(PIVOT_START, 1), None,
        observers, audit,
    )
    merge_diagnostics(outcome.diagnostics, result.diagnostics)
    phase = PhaseLog(
        phase=len(outcome.phases) + 1,
        uncolored_before=uncolored_before,
        colored_this_phase=colored,
        interactions_used=trace.interactions - interactions_before,
        chunks_used=trace.chunks.chunk_count - chunks_before,
    )
    outcome.phases.append(phase)
    logger.debug(
        "coloring phase %d: %d of %d uncolored agents colored",
        phase.phase,
        colored,
        uncolored_before,
    )
    if not result.stabilized:
      return outcome
