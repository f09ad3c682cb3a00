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

"""Module with the random scheduler of the standard and selective models.

Standard model: the ordered pair (initiator, responder) is uniform over the
n(n-1) pairs of distinct agents.

Selective model: the initiator is uniform over all agents; the responder is
uniform over the initiator's target group without the initiator. An empty
target group is an emptiness test, a target group holding only the
initiator is a singleton test; both fire the initiator's null rule.
"""

from __future__ import annotations

import functools
import logging
from collections.abc import Callable, Sequence

from engine.population import Population
from engine.rng import SchedulerRng
from engine.trace import Trace
from engine.types import InteractionRecord, OutcomeKind, RunLimits, RunResult
from errors import (
    GuardedProtocolNeedsPredicate,
    MissingNullRule,
    PopulationError,
)
from rules_dsl.protocol_spec import CompiledSpec, ProtocolSpec

logger = logging.getLogger(__name__)

Observer = Callable[[InteractionRecord, Population], None]
StablePredicate = Callable[[Population], bool]
# returns a diagnostic code when the run can make no further progress
StallPredicate = Callable[[Population], str | None]

# (initiator, responder, kind, rule id, initiator and responder share a group)
StepOutcome = tuple[int, int | None, OutcomeKind, int | None, bool]

MEANINGFUL = OutcomeKind.MEANINGFUL
NO_MATCH = OutcomeKind.NO_MATCH


def _apply_pair(
    pop: Population, compiled: CompiledSpec, initiator: int, responder: int
) -> StepOutcome:
  state_of = pop.state_of
  initiator_state = state_of[initiator]
  responder_state = state_of[responder]
  internal = (
      pop.group_of_state[initiator_state] == pop.group_of_state[responder_state]
  )
  slots = compiled.pair_rules.get((initiator_state, responder_state))
  if slots is None:
    return initiator, responder, NO_MATCH, None, internal
  entry = slots[0]
  if entry is None:
    entry = slots[1] if pop.key_less(initiator, responder) else slots[2]
    if entry is None:
      return initiator, responder, NO_MATCH, None, internal
  rule_id, initiator_out, responder_out = entry
  pop.set_state(initiator, initiator_out)
  pop.set_state(responder, responder_out)
  return initiator, responder, MEANINGFUL, rule_id, internal


def _step_selective(
    pop: Population, compiled: CompiledSpec, rng: SchedulerRng
) -> StepOutcome:
  initiator = sample_initiator(pop, rng)
  state = pop.state_of[initiator]
  target = compiled.target_of[state]
  if target < 0:
    return initiator, None, NO_MATCH, None, False
  members = pop.members[target]
  size = len(members)
  if pop.group_of_state[state] == target:
    if size > 1:
      index = rng.below(size - 1)
      if index >= pop.position[initiator]:
        index += 1
      return _apply_pair(pop, compiled, initiator, members[index])
    kind = OutcomeKind.SINGLETON
  else:
    if size:
      return _apply_pair(pop, compiled, initiator, members[rng.below(size)])
    kind = OutcomeKind.EMPTINESS
  entry = compiled.null_rules[state]
  if entry is None:
    raise MissingNullRule(
        f"{kind.value} test for state {pop.spec.states[state]} of"
        f" {pop.spec.name}, which declares no null rule for it"
    )
  pop.set_state(initiator, entry[1])
  return initiator, None, kind, entry[0], False


def _step_standard(
    pop: Population, compiled: CompiledSpec, rng: SchedulerRng
) -> StepOutcome:
  initiator = rng.below(pop.n)
  responder = rng.below(pop.n - 1)
  if responder >= initiator:
    responder += 1
  return _apply_pair(pop, compiled, initiator, responder)


def _prepare(pop: Population, spec: ProtocolSpec) -> None:
  if pop.spec is not spec:
    pop.rebind(spec)
  if spec.comparison_model and not pop.has_keys:
    raise PopulationError(f"protocol {spec.name} compares keys; give keys")
  if not spec.is_selective and pop.n < 2:
    raise PopulationError("the standard model needs at least two agents")


def sample_initiator(pop: Population, rng: SchedulerRng) -> int:
  """Uniform agent id."""
  return rng.below(pop.n)


def step_selective(
    pop: Population, spec: ProtocolSpec, rng: SchedulerRng, step: int = 1
) -> InteractionRecord:
  """Executes one selective interaction attempt."""
  _prepare(pop, spec)
  initiator, responder, kind, rule, _ = _step_selective(
      pop, spec.compiled, rng
  )
  return InteractionRecord(step, initiator, responder, kind, rule)


def step_standard(
    pop: Population, spec: ProtocolSpec, rng: SchedulerRng, step: int = 1
) -> InteractionRecord:
  """Executes one standard-model interaction."""
  _prepare(pop, spec)
  initiator, responder, kind, rule, _ = _step_standard(
      pop, spec.compiled, rng
  )
  return InteractionRecord(step, initiator, responder, kind, rule)


def is_stable_generic(pop: Population, spec: ProtocolSpec) -> bool:
  """True iff no scheduler draw can change any state.

  Idle null rules and rules that rewrite nothing are ignored.

  Raises:
    GuardedProtocolNeedsPredicate: the spec compares hidden keys.
  """
  if spec.comparison_model:
    raise GuardedProtocolNeedsPredicate(
        f"protocol {spec.name} compares keys; give it a stability predicate"
    )
  compiled = spec.compiled
  counts = pop.counts
  for initiator, responder in compiled.changing_rules:
    if not counts[initiator]:
      continue
    if responder is None:
      target = compiled.target_of[initiator]
      size = len(pop.members[target])
      if compiled.group_of[initiator] == target:
        if size == 1:
          return False
      elif size == 0:
        return False
    elif counts[responder] >= (2 if responder == initiator else 1):
      return False
  return True


def run(
    pop: Population,
    spec: ProtocolSpec,
    rng: SchedulerRng,
    limits: RunLimits,
    stable: StablePredicate | None = None,
    stall: StallPredicate | None = None,
    trace: Trace | None = None,
    observers: Sequence[Observer] = (),
    audit: bool = False,
) -> tuple[RunResult, Trace]:
  """Steps the scheduler until the population is stable or limits are hit.

  Args:
    pop: the population, rebound to `spec` if needed.
    spec: the protocol to run.
    rng: random source.
    limits: interaction budget of this call and the stability check period
      (default n).
    stable: stability predicate; defaults to `is_stable_generic`.
    stall: checked with the stability predicate; a returned code ends the
      run and is reported as a diagnostic.
    trace: an existing trace to continue, e.g. across stages.
    observers: called with every InteractionRecord after it is applied.
    audit: re-check the group index after every step.
  Returns:
    the run result and the trace.
  """
  _prepare(pop, spec)
  if stable is None:
    stable = functools.partial(is_stable_generic, spec=spec)
  if trace is None:
    trace = Trace(pop.n)
  compiled = spec.compiled
  step = _step_selective if spec.is_selective else _step_standard
  period = limits.stability_check_period or pop.n
  tracker = trace.chunks
  kind_counts = trace.kind_counts
  rule_fires = trace.rule_fires
  records = trace.records
  responders = trace.responders
  external_flags = trace.external_flags
  count_unmatched = trace.count_unmatched
  unmatched_before = trace.unmatched_draws
  diagnostics: list[str] = []

  stabilized = limits.stop_when_stable and stable(pop)
  done = 0
  while not stabilized and done < limits.max_interactions:
    initiator, responder, kind, rule, internal = step(pop, compiled, rng)
    done += 1
    trace.interactions += 1
    kind_counts[kind] += 1
    tallied = responder
    if responder is not None:
      if internal:
        trace.internal += 1
      else:
        trace.external += 1
      if kind is NO_MATCH:
        trace.unmatched_draws += 1
        if not count_unmatched:
          tallied = None
    if rule is not None:
      rule_fires[(spec.name, rule)] += 1
    tracker.observe(tallied)
    if responders is not None:
      responders.append(tallied)
      external_flags.append(responder is not None and not internal)
    if records is not None or observers:
      record = InteractionRecord(
          trace.interactions, initiator, responder, kind, rule
      )
      if records is not None:
        records.append(record)
      for observer in observers:
        observer(record, pop)
    if audit:
      pop.audit()
    if done % period == 0:
      if limits.stop_when_stable and stable(pop):
        stabilized = True
        break
      if stall is not None:
        code = stall(pop)
        if code:
          diagnostics.append(code)
          break

  if not stabilized:
    stabilized = stable(pop)
  if not stabilized:
    if stall is not None:
      code = stall(pop)
      if code and code not in diagnostics:
        diagnostics.append(code)
    diagnostics.append("NotStabilized")
  if spec.is_selective and trace.unmatched_draws > unmatched_before:
    diagnostics.append("NoMatchResponderDraw")
  logger.debug(
      "%s: %d interactions, stabilized=%s", spec.name, done, stabilized
  )
  report = tracker.report()
  result = RunResult(
      stabilized=stabilized,
      interactions=done,
      final_counts=pop.counts_by_name(),
      diagnostics=diagnostics,
      chunks=report.chunk_count,
      fragmented_time=report.fragmented_time,
      parallel_time=trace.interactions / pop.n,
  )
  return result, trace
