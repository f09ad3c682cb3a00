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

"""Module with the disorder of a median configuration.

With a the agent of smaller key and b the larger one, the unordered pair
{a, b} is disordered when the median rules would rewrite it, i.e. when its
states (a, b) are one of (N, N), (U, L), (U, N) or (N, L). The disorder is the
number of disordered pairs; it is C(n, 2) on the all-N start and 0 exactly on
the configurations L...L N U...U in key order.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from typing import Any

from engine.population import Population
from engine.types import InteractionRecord, OutcomeKind
from errors import InvalidState

logger = logging.getLogger(__name__)

LOWER = "L"
NEUTRAL = "N"
UPPER = "U"
MEDIAN_STATES = frozenset((LOWER, NEUTRAL, UPPER))

# (state of the smaller key, state of the larger key)
DISORDERED_PAIRS = frozenset((
    (NEUTRAL, NEUTRAL),
    (UPPER, LOWER),
    (UPPER, NEUTRAL),
    (NEUTRAL, LOWER),
))


def _check_states(states: Sequence[str]) -> None:
  for agent, state in enumerate(states):
    if state not in MEDIAN_STATES:
      raise InvalidState(f"agent {agent} is in state {state!r}, not L/N/U")


def disorder(states: Sequence[str], keys: Sequence[Any]) -> int:
  """Counts disordered pairs by direct enumeration.

  Args:
    states: state name per agent, each one of L, N, U.
    keys: distinct key per agent.
  Returns:
    the number of disordered unordered pairs.
  Raises:
    InvalidState: a state outside {L, N, U}.
  """
  _check_states(states)
  count = 0
  n = len(states)
  for a in range(n):
    for b in range(a + 1, n):
      if keys[a] < keys[b]:
        pair = (states[a], states[b])
      else:
        pair = (states[b], states[a])
      if pair in DISORDERED_PAIRS:
        count += 1
  return count


def population_disorder(pop: Population) -> int:
  """Disorder of a keyed population, comparing keys with the comparator."""
  states = [pop.state_name(agent) for agent in range(pop.n)]
  _check_states(states)
  count = 0
  for a in range(pop.n):
    for b in range(a + 1, pop.n):
      if pop.key_less(a, b):
        pair = (states[a], states[b])
      else:
        pair = (states[b], states[a])
      if pair in DISORDERED_PAIRS:
        count += 1
  return count


def is_sorted_partition(pop: Population) -> bool:
  """Zero-disorder test by one sort and one scan.

  In key order the states must read L...L, at most one N, then U...U.
  """
  phase = 0  # 0: reading L, 1: read the N, 2: reading U
  for agent in pop.key_order():
    state = pop.state_name(agent)
    if state == LOWER:
      if phase:
        return False
    elif state == NEUTRAL:
      if phase:
        return False
      phase = 1
    elif state == UPPER:
      phase = 2
    else:
      return False
  return True


class DisorderAudit:
  """Observer checking that median steps only ever decrease the disorder.

  Keeps its own copy of the states so that the change of one step can be
  computed from the two agents involved, in O(n) per step.

  Attributes:
    value: the current disorder.
    violations: (step, before, after) of every step breaking monotonicity.
    meaningful_steps: Meaningful steps seen.
  """

  def __init__(self, pop: Population):
    self._pop = pop
    self._states = [pop.state_name(agent) for agent in range(pop.n)]
    self.value = population_disorder(pop)
    self.initial = self.value
    self.violations: list[tuple[int, int, int]] = []
    self.meaningful_steps = 0

  def _pair(self, states: Sequence[str], a: int, b: int) -> bool:
    if self._pop.key_less(a, b):
      return (states[a], states[b]) in DISORDERED_PAIRS
    return (states[b], states[a]) in DISORDERED_PAIRS

  def _involving(self, states: Sequence[str], touched: Sequence[int]) -> int:
    count = 0
    for agent in touched:
      for other in range(self._pop.n):
        if other == agent or (other in touched and other < agent):
          continue
        if self._pair(states, agent, other):
          count += 1
    return count

  def __call__(self, record: InteractionRecord, pop: Population) -> None:
    touched = [record.initiator]
    if record.responder is not None:
      touched.append(record.responder)
    before = self._involving(self._states, touched)
    for agent in touched:
      self._states[agent] = pop.state_name(agent)
    after = self._involving(self._states, touched)
    old_value = self.value
    self.value += after - before
    if record.kind is OutcomeKind.MEANINGFUL:
      self.meaningful_steps += 1
      if not self.value < old_value:
        self.violations.append((record.step, old_value, self.value))
    elif self.value != old_value:
      self.violations.append((record.step, old_value, self.value))

  def recheck(self) -> bool:
    """Full recomputation against the running value."""
    full = population_disorder(self._pop)
    if full != self.value:
      logger.error(
          "running disorder %d differs from recomputed %d", self.value, full
      )
      return False
    return True
