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

""" Module to test partitioning by coloring against a pivot """

import pytest

from engine.population import build_population
from engine.rng import SchedulerRng
from engine.scheduler import step_selective
from engine.trace import Trace
from engine.types import InteractionRecord, OutcomeKind
from errors import InvariantBreach
from protocols.coloring import ColoringAudit, partition_by_coloring
from protocols.fast_median import build_stages
from protocols.stages import (
    PIVOT,
    PIVOT_DONE,
    PIVOT_START,
    StageBudget,
    green,
    green_states,
    red,
    red_states,
)

TICKETS = 2


def _first_meaningful(pop, spec, seed, steps=500):
  rng = SchedulerRng(seed)
  for step in range(1, steps + 1):
    record = step_selective(pop, spec, rng, step)
    if record.kind is OutcomeKind.MEANINGFUL:
      return record
  return None


@pytest.mark.parametrize("key, color", [(9, green(TICKETS)),
                                        (1, red(TICKETS))])
def test_pivot_colors_by_key(key, color):
  """The pivot colors a larger uncolored agent G and a smaller one R"""
  coloring = build_stages(TICKETS).coloring
  pop = build_population(coloring, keyed=[(PIVOT, 5), ("N0", key)])
  record = _first_meaningful(pop, coloring, seed=key)
  assert record.initiator == 0 and record.responder == 1
  assert pop.state_name(0) == PIVOT
  assert pop.state_name(1) == color


def test_ticketless_red_colors_smaller_neutral():
  """R0 meeting a neutral agent with a smaller key colors it red"""
  coloring = build_stages(TICKETS).coloring
  pop = build_population(coloring, keyed=[(red(0), 5), ("N", 1)])
  record = _first_meaningful(pop, coloring, seed=3)
  assert record.initiator == 0
  assert pop.state_name(0) == red(0)
  assert pop.state_name(1) == red(TICKETS)


def test_ticketless_red_ignores_larger_neutral():
  """R0 learns nothing from a neutral agent with a larger key"""
  coloring = build_stages(TICKETS).coloring
  pop = build_population(coloring, keyed=[(red(0), 5), ("N", 9)])
  assert _first_meaningful(pop, coloring, seed=4, steps=200) is None
  assert pop.counts_by_name() == {red(0): 1, "N": 1}


def test_ticket_is_spent_on_the_wrong_side():
  """R_k meeting a larger uncolored agent gives up a ticket"""
  coloring = build_stages(TICKETS).coloring
  pop = build_population(coloring, keyed=[(red(TICKETS), 5), ("N0", 9)])
  _first_meaningful(pop, coloring, seed=5)
  assert pop.state_name(0) == red(TICKETS - 1)
  assert pop.state_name(1) == "N"


def _partition(keys, pivot_key, seed, tickets=TICKETS):
  stages = build_stages(tickets)
  keyed = [(PIVOT_START, pivot_key)] + [("N0", key) for key in keys]
  pop = build_population(stages.coloring, keyed=keyed)
  audit = ColoringAudit(pop, 0, tickets)
  outcome = partition_by_coloring(
      pop,
      stages.coloring,
      stages.reset,
      tickets,
      SchedulerRng(seed),
      Trace(pop.n),
      StageBudget(500_000),
      observers=[audit],
  )
  return pop, outcome, audit


def test_three_agents_around_the_middle_key():
  """Keys 1, 5, 9 with pivot 5: one red, one green"""
  pop, outcome, audit = _partition([1, 9], 5, seed=1)
  assert outcome.complete
  assert pop.state_name(0) == PIVOT_DONE
  assert pop.state_name(1) in red_states(TICKETS)
  assert pop.state_name(2) in green_states(TICKETS)
  assert not audit.violations
  assert outcome.phases[0].uncolored_before == 2


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_partition_of_nine_keys(seed):
  """Keys 1..9 with pivot 5: four red, four green, all on their side"""
  keys = [key for key in SchedulerRng(seed).permutation(9) if key != 5]
  pop, outcome, audit = _partition(keys, 5, seed)
  assert outcome.complete
  assert not audit.violations
  reds = green_count = 0
  for agent in range(1, pop.n):
    state = pop.state_name(agent)
    if state in red_states(TICKETS):
      reds += 1
      assert pop.key_less(agent, 0)
    else:
      assert state in green_states(TICKETS)
      green_count += 1
      assert pop.key_less(0, agent)
  assert (reds, green_count) == (4, 4)
  assert all(phase.meets_ticket_bound(TICKETS) for phase in outcome.phases)
  assert sum(phase.colored_this_phase for phase in outcome.phases) == 8


def test_audit_flags_unsound_colors():
  """A red agent above the pivot is a violation"""
  coloring = build_stages(TICKETS).coloring
  pop = build_population(coloring, keyed=[(PIVOT, 5), (red(1), 9)])
  audit = ColoringAudit(pop, 0, TICKETS)
  audit(InteractionRecord(1, 1, None, OutcomeKind.NO_MATCH, None), pop)
  assert audit.violations == [(1, 1, red(1))]


def test_audit_rejects_a_second_pivot():
  """Two pivots break the partition"""
  coloring = build_stages(TICKETS).coloring
  pop = build_population(
      coloring, keyed=[(PIVOT, 5), (PIVOT_START, 7), ("N0", 9)]
  )
  audit = ColoringAudit(pop, 0, TICKETS)
  with pytest.raises(InvariantBreach):
    audit(InteractionRecord(1, 2, None, OutcomeKind.NO_MATCH, None), pop)
