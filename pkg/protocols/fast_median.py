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

"""Module with the fast median controller.

The controller elects a leader, which becomes the first pivot, and then
repeats:
  1. partition everybody against the pivot by coloring,
  2. run majority between the red (smaller) and green (larger) agents,
  3. let the pivot probe the verdict,
  4. on a tie announce the pivot as the median; otherwise keep as candidates
     only the candidates on the winning side and hand the pivot role to a
     candidate.

Each step is a selective protocol over one shared state table; the
controller rebinds the population between them when the leader reaches the
state that ends the step. Keys are only ever compared inside rules; the
controller reads them solely for the audit log.
"""

from __future__ import annotations

import functools
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

from engine.population import Population, build_population
from engine.rng import SchedulerRng
from engine.trace import Trace
from engine.types import Model, RunLimits, RunResult
from protocols.bundle import (
    G_WINS,
    R_WINS,
    TIE,
    MedianKey,
    ObserverFactory,
    count_is,
)
from protocols.coloring import (
    ColoringAudit,
    PhaseLog,
    coloring_spec,
    partition_by_coloring,
)
from protocols.median import check_median_keys, median_oracle
from protocols.stages import (
    DEFAULT_TICKETS,
    HANDOVER,
    LEADER,
    LOWER,
    MEDIAN,
    PIVOT_END,
    PIVOT_START,
    UNCOLORED_CANDIDATE,
    UPPER,
    WINNER_G,
    WINNER_N,
    WINNER_R,
    FastMedianStages,
    StageBudget,
    any_of,
    election_spec,
    handover_spec,
    majority_stage_spec,
    merge_diagnostics,
    probe_spec,
    relabel_spec,
    reset_mapping,
    run_stage,
    tie_mapping,
    universal_states,
    verdict_mapping,
)
from rules_dsl.protocol_spec import ProtocolSpec

logger = logging.getLogger(__name__)

ITERATION_LIMIT = "IterationLimit"
VERDICT_OF_WINNER = {WINNER_G: G_WINS, WINNER_R: R_WINS, WINNER_N: TIE}


@functools.lru_cache(maxsize=8)
def build_stages(
    tickets: int = DEFAULT_TICKETS, fault: bool = False
) -> FastMedianStages:
  """Builds and validates every stage protocol once per configuration."""
  states = universal_states(tickets)
  return FastMedianStages(
      tickets=tickets,
      states=states,
      election=election_spec(states),
      coloring=coloring_spec(states, tickets, fault),
      reset=relabel_spec(
          "coloring-reset", states, reset_mapping(tickets), PIVOT_END,
          PIVOT_START,
      ),
      majority=majority_stage_spec(states),
      probe=probe_spec(states),
      verdict_g=relabel_spec(
          "verdict-g", states, verdict_mapping(WINNER_G), WINNER_G, HANDOVER
      ),
      verdict_r=relabel_spec(
          "verdict-r", states, verdict_mapping(WINNER_R), WINNER_R, HANDOVER
      ),
      tie=relabel_spec(
          "announce", states, tie_mapping(), WINNER_N, MEDIAN
      ),
      handover=handover_spec(states),
  )


@dataclass
class IterationLog:
  """One pass of the candidate loop.

  Attributes:
    iteration: 1-based index.
    pivot: the pivot agent.
    pivot_key: its key, for the audit only.
    candidates_before: |C| when the pass started, pivot included.
    candidates_after: |C| after the verdict.
    verdict: G-wins, R-wins or Tie.
    median_in_candidates: the true median agent is still a candidate.
    phases: the coloring phases of the pass.
    interactions: interactions the pass used.
  """

  iteration: int
  pivot: int
  pivot_key: Any
  candidates_before: int
  candidates_after: int
  verdict: str
  median_in_candidates: bool
  phases: list[PhaseLog] = field(default_factory=list)
  interactions: int = 0

  @property
  def shrank_to_three_quarters(self) -> bool:
    return 4 * self.candidates_after <= 3 * self.candidates_before


@dataclass
class FastMedianReport:
  election_interactions: int = 0
  iterations: list[IterationLog] = field(default_factory=list)
  soundness_violations: int = 0
  completed: bool = False

  @property
  def phases(self) -> list[PhaseLog]:
    return [phase for log in self.iterations for phase in log.phases]


def default_max_iterations(n: int) -> int:
  return 8 * math.ceil(math.log2(n + 1)) + 20


def fast_median_budget(n: int) -> int:
  return int(100 * n * math.log(n + 1) ** 4) + 100_000


class FastMedian:
  """Composed controller with the run interface of a ProtocolBundle."""

  name = "median-fast"

  def __init__(
      self,
      keys: Sequence[Any],
      tickets: int = DEFAULT_TICKETS,
      fault: bool = False,
      max_iterations: int | None = None,
  ):
    self.keys = tuple(keys)
    check_median_keys(self.keys)
    self.n = len(self.keys)
    self.tickets = tickets
    self.stages = build_stages(tickets, fault)
    self.max_iterations = max_iterations or default_max_iterations(self.n)
    self.budget = fast_median_budget(self.n)
    self.oracle = median_oracle(self.keys, lower=LOWER, upper=UPPER)
    ordered = sorted(range(self.n), key=self.keys.__getitem__)
    self.median_agent = ordered[self.n // 2]

  @property
  def spec(self) -> ProtocolSpec:
    return self.stages.election

  @property
  def model(self) -> Model:
    return Model.SELECTIVE

  def initial(self, poison_keys: bool = False) -> Population:
    return build_population(
        self.stages.election,
        keyed=[(LEADER, key) for key in self.keys],
        poison_keys=poison_keys,
    )

  def output(self, pop: Population) -> MedianKey:
    median = pop.agents_in(MEDIAN)
    return MedianKey(
        key=self.keys[median[0]] if len(median) == 1 else None,
        partition={LOWER: pop.count(LOWER), UPPER: pop.count(UPPER)},
    )

  def execute(
      self,
      rng: SchedulerRng,
      limits: RunLimits | None = None,
      observer_factories: Sequence[ObserverFactory] = (),
      poison_keys: bool = False,
      keep_responders: bool = False,
      audit: bool = False,
  ) -> tuple[RunResult, Trace]:
    result, trace, _ = self.execute_with_report(
        rng, limits, observer_factories, poison_keys, keep_responders, audit
    )
    return result, trace

  def execute_with_report(
      self,
      rng: SchedulerRng,
      limits: RunLimits | None = None,
      observer_factories: Sequence[ObserverFactory] = (),
      poison_keys: bool = False,
      keep_responders: bool = False,
      audit: bool = False,
  ) -> tuple[RunResult, Trace, FastMedianReport]:
    """Runs all stages on one population and one trace.

    Returns:
      the run result, the trace spanning every stage and the report with
      one IterationLog per pass of the candidate loop.
    """
    pop = self.initial(poison_keys)
    limits = limits or RunLimits(self.budget)
    median_run = _MedianRun(
        controller=self,
        pop=pop,
        rng=rng,
        trace=Trace(pop.n, keep_responders=keep_responders),
        budget=StageBudget(
            limits.max_interactions, limits.stability_check_period
        ),
        observers=[factory(pop) for factory in observer_factories],
        audit=audit,
    )
    report = median_run.execute()
    trace = median_run.trace
    diagnostics = median_run.diagnostics
    if not report.completed and "NotStabilized" not in diagnostics:
      diagnostics.append("NotStabilized")
    chunks = trace.chunk_report()
    result = RunResult(
        stabilized=report.completed,
        interactions=trace.interactions,
        final_counts=pop.counts_by_name(),
        diagnostics=diagnostics,
        chunks=chunks.chunk_count,
        fragmented_time=chunks.fragmented_time,
        parallel_time=trace.interactions / pop.n,
    )
    result.output = self.output(pop)
    result.correct = result.stabilized and self.oracle(result.output)
    result.extras = _extras(report)
    logger.debug(
        "median-fast n=%d: %d iterations, %d interactions",
        self.n,
        len(report.iterations),
        trace.interactions,
    )
    return result, trace, report


@dataclass
class _MedianRun:
  """Mutable state of one controller run."""

  controller: FastMedian
  pop: Population
  rng: SchedulerRng
  trace: Trace
  budget: StageBudget
  observers: list
  audit: bool
  diagnostics: list[str] = field(default_factory=list)
  report: FastMedianReport = field(default_factory=FastMedianReport)

  def stage(self, spec: ProtocolSpec, stable, extra=()) -> bool:
    result = run_stage(
        self.pop,
        spec,
        self.rng,
        self.trace,
        self.budget,
        stable,
        None,
        self.observers + list(extra),
        self.audit,
    )
    merge_diagnostics(self.diagnostics, result.diagnostics)
    return result.stabilized

  def execute(self) -> FastMedianReport:
    stages = self.controller.stages
    report = self.report
    running = self.stage(stages.election, count_is(PIVOT_START, 1))
    report.election_interactions = self.trace.interactions
    while running:
      if len(report.iterations) >= self.controller.max_iterations:
        merge_diagnostics(self.diagnostics, [ITERATION_LIMIT])
        break
      log = self.iteration()
      if log.verdict == TIE or not log.verdict:
        break
      running = self.stage(stages.handover, count_is(PIVOT_START, 1))
    report.completed = self.pop.count(MEDIAN) == 1
    return report

  def iteration(self) -> IterationLog:
    """One pass of the candidate loop, up to the verdict broadcast.

    The verdict of the returned log stays empty when a stage ran out of
    budget.
    """
    controller = self.controller
    stages = controller.stages
    pop = self.pop
    start = self.trace.interactions
    pivot = pop.agents_in(PIVOT_START)[0]
    candidates = pop.count(UNCOLORED_CANDIDATE) + 1
    soundness = ColoringAudit(pop, pivot, controller.tickets)
    outcome = partition_by_coloring(
        pop,
        stages.coloring,
        stages.reset,
        controller.tickets,
        self.rng,
        self.trace,
        self.budget,
        self.observers + [soundness],
        self.audit,
    )
    self.report.soundness_violations += len(soundness.violations)
    merge_diagnostics(self.diagnostics, outcome.diagnostics)
    log = IterationLog(
        iteration=len(self.report.iterations) + 1,
        pivot=pivot,
        pivot_key=controller.keys[pivot],
        candidates_before=candidates,
        candidates_after=candidates,
        verdict="",
        median_in_candidates=False,
        phases=outcome.phases,
    )
    self.report.iterations.append(log)
    decided = (
        outcome.complete
        and self.stage(stages.majority, None)
        and self.stage(stages.probe, any_of((WINNER_G, WINNER_R, WINNER_N)))
    )
    if decided:
      winner = next(
          state for state in (WINNER_G, WINNER_R, WINNER_N) if pop.count(state)
      )
      if winner == WINNER_N:
        announced = self.stage(stages.tie, count_is(MEDIAN, 1))
        log.candidates_after = 1
        log.median_in_candidates = pivot == controller.median_agent
      else:
        spec = stages.verdict_g if winner == WINNER_G else stages.verdict_r
        announced = self.stage(spec, count_is(HANDOVER, 1))
        log.candidates_after = pop.count(UNCOLORED_CANDIDATE)
        log.median_in_candidates = (
            pop.state_name(controller.median_agent) == UNCOLORED_CANDIDATE
        )
      if announced:
        log.verdict = VERDICT_OF_WINNER[winner]
        if not log.median_in_candidates:
          logger.warning(
              "iteration %d: the median left the candidate set",
              log.iteration,
          )
    log.interactions = self.trace.interactions - start
    return log


def _extras(report: FastMedianReport) -> list[tuple[str, Any]]:
  extras: list[tuple[str, Any]] = [
      ("iterations", len(report.iterations)),
      ("soundness_violations", report.soundness_violations),
  ]
  for phase in report.phases:
    extras.append(("phase_colored_fraction", phase.colored_fraction))
  return extras


def fast_median(
    keys: Sequence[Any],
    tickets: int = DEFAULT_TICKETS,
    fault: bool = False,
    max_iterations: int | None = None,
) -> FastMedian:
  return FastMedian(keys, tickets, fault, max_iterations)
