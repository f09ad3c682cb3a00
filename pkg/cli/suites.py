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

"""Module with the verification suites.

Each criterion runs its own seeded experiments and returns pass or fail
with a one line detail. The `fast` suite runs the same checks as `full` on
smaller grids.
"""

from __future__ import annotations

import logging
import math
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field, replace

from scipy import stats

import protocols.protocol_modules as protocol_module
from cli.trials import (
    TrialOutcome,
    TrialTask,
    build_runner,
    make_tasks,
    run_trials,
    runner_model,
)
from engine.population import Population, build_population
from engine.rng import SchedulerRng
from engine.scheduler import step_selective, step_standard
from engine.types import OutcomeKind, RunLimits, RunResult
from errors import ConfigurationError, SelectiveProtocolError
from helpers.generic_helpers import execute_tasks_in_parallel, mix_seed
from metrics.disorder import DisorderAudit
from metrics.envelopes import (
    minimum_length,
    standard_envelope_check,
    summarize,
)
from metrics.fitting import fit_exponent
from metrics.fragmented_time import (
    ChunkReport,
    fragmented_time,
    minimum_chunks_exhaustive,
)
from metrics.scaling_table import ScalingTable
from protocol_configs.protocols import get_protocol_configs
from protocols.fast_median import FastMedianReport, build_stages
from protocols.multiplication import (
    fast_free_requirement,
    rounds_needed,
    slow_free_requirement,
)
from protocols.stages import DEFAULT_TICKETS
from rules_dsl.parser import parse_protocol_with_diagnostics
from rules_dsl.printer import pretty_print
from rules_dsl.protocol_spec import ProtocolBuilder, ProtocolSpec

logger = logging.getLogger(__name__)

SUITES = ("fast", "full")
UNIFORMITY_P_VALUE = 0.001
EXPECTED_COLORED_FRACTION = 1 / 5
# fast median T_F is compared against ln(n)**4; the ratio may grow at most
# this much from the smallest to the largest n of the grid
FAST_MEDIAN_LOG_POWER = 4
FAST_MEDIAN_RATIO_GROWTH = 3.0

MALFORMED_PROTOCOLS = (
    # no protocol line
    "model selective\nstates: 0, 1\ngroup G0 = {0}\ngroup G1 = {1}\n",
    # no model line
    "protocol p\nstates: 0, 1\n",
    "protocol p\nmodel quantum\n",
    "protocol p\nprotocol q\nmodel selective\n",
    "protocol p\nmodel selective\nstats: 0, 1\n",
    "protocol p\nmodel selective\nstates: 0, 1, $Stop\n",
    "protocol p\nmodel selective\nstates: 0, 1\ngroup G0 = {0\n",
    "protocol p\nmodel selective\nstates: 0, 1, Stop\ngroup G0 = {0}\n"
    "group G1 = {1}\ntarget 1 -> G0\n1 + G0|null -> Stop\n",
    "protocol p\nmodel selective\nstates: 0, 1\ngroup G0 = {0, 1}\n"
    "group G1 = {1}\n",
    "protocol p\nmodel selective\nstates: 0, 1\ngroup G0 = {0}\n"
    "group G1 = {1}\ntarget 1 -> G9\n",
    "protocol p\nmodel selective\nstates: 0, 1\ngroup G0 = {0}\n"
    "group G1 = {1}\ntarget 1 -> G0\n1 + G1|1 -> 1 + 1\n",
    "protocol p\nmodel selective\nstates: 0, 1, Stop\ngroup G0 = {0}\n"
    "group G1 = {1, Stop}\ntarget 1 -> G0\n1 + G0|Stop -> 1 + 1\n",
    "protocol p\nmodel selective\nstates: 0, 1\ngroup G0 = {0}\n"
    "group G1 = {1}\ntarget 1 -> G0\n1 + G0|0 -> 1 + 1\n1 + G0|0 -> 0 + 0\n",
    "protocol p\nmodel standard\nstates: 0, 1\n1 + 0 [<] -> 1 + 1\n",
    "protocol p\nmodel selective\nstates: 0, 1, Stop\ngroup G0 = {0}\n"
    "group G1 = {1, Stop}\ntarget 1 -> G0\n1 + G0|null -> Stop + 1\n",
    "protocol p\nmodel selective\nstates: 0, 1\ngroup G0 = {0}\n"
    "group G1 = {1}\ntarget 1 -> G0\n1 + G0|0 -> 1\n",
    "protocol p\nmodel selective\nstates: 0, 1\ngroup G0 = {0}\n"
    "group G1 = {1}\ntarget 1 -> G0\n1 + G0|0 -> 1 + 2\n",
    "protocol p\nmodel selective\nstates: 0, 1\ngroup G0 = {0}\n"
    "group G1 = {1}\ntarget 1 -> G0\n0 + G1|1 -> 1 + 1\n",
    "protocol p\nmodel standard\nstates: 0, 1\n1 + G|0 -> 1 + 1\n",
    "protocol p\nmodel selective\nstates: 0, 1\ngroup G0 = {0}\n"
    "group G1 = {1}\ntarget 1 -> G0\n1 + G0|0 [=] -> 1 + 1\n",
)


@dataclass(frozen=True)
class SuiteSizes:
  """Grids and trial counts of one suite."""

  name: str
  uniformity_draws: int = 100_000
  chunk_traces: int = 500
  envelope_sizes: tuple[int, ...] = (1_000, 10_000)
  envelope_trials: int = 100
  le_sizes: tuple[int, ...] = (1_000, 10_000)
  le_trials: int = 100
  le_growth_sizes: tuple[int, ...] = (1_000, 100_000)
  le_growth_trials: int = 10
  majority_max_total: int = 12
  majority_seeds: int = 3
  majority_bias_n: int = 10_000
  majority_bias_trials: int = 50
  majority_fit_sizes: tuple[int, ...] = (1_000, 10_000, 100_000)
  majority_fit_trials: int = 5
  mult_max: int = 8
  mult_seeds: int = 3
  mult_growth_sizes: tuple[int, ...] = (1_000, 100_000)
  mult_growth_trials: int = 5
  median_sizes: tuple[int, ...] = (101, 501, 1_001)
  median_trials: int = 30
  median_audit_n: int = 101
  median_fit_sizes: tuple[int, ...] = (101, 301, 1_001)
  median_fit_trials: int = 20
  fast_median_sizes: tuple[int, ...] = (101, 1_001, 10_001)
  fast_median_trials: int = 30
  fast_median_audit_n: int = 101
  min_shrink_iterations: int = 200


FULL_SUITE = SuiteSizes(name="full")
FAST_SUITE = SuiteSizes(
    name="fast",
    envelope_sizes=(100, 1_000),
    envelope_trials=20,
    le_sizes=(200, 1_000),
    le_trials=10,
    le_growth_sizes=(200, 2_000),
    le_growth_trials=5,
    majority_seeds=1,
    majority_bias_n=1_001,
    majority_bias_trials=10,
    majority_fit_sizes=(100, 1_000, 5_000),
    majority_fit_trials=3,
    mult_seeds=1,
    mult_growth_sizes=(300, 3_000),
    mult_growth_trials=3,
    median_sizes=(51, 101),
    median_trials=5,
    median_fit_trials=10,
    fast_median_sizes=(51, 101, 201),
    fast_median_trials=5,
    min_shrink_iterations=60,
)


@dataclass
class CriterionResult:
  name: str
  passed: bool
  detail: str
  seconds: float


@dataclass
class SuiteContext:
  """What every criterion of one suite run shares.

  Attributes:
    sizes: grids and trial counts.
    workers: worker processes for the trial pool.
    base_seed: seed all trial seeds are mixed from.
    fault_injection: run fast median with the pivot destroying rules.
  """

  sizes: SuiteSizes
  workers: int = 1
  base_seed: int = 0
  fault_injection: bool = False
  _fast_median_runs: list[tuple[TrialOutcome, FastMedianReport]] | None = (
      field(default=None, repr=False)
  )

  def run(self, protocol: str, n_grid: Sequence[int], trials: int,
          parameters: dict | None = None, **options) -> list[TrialOutcome]:
    tasks = make_tasks(
        protocol, n_grid, trials, self.base_seed, parameters, **options
    )
    return run_trials(tasks, self.workers)

  def fast_median_parameters(self) -> dict:
    if self.fault_injection:
      return {"fault": True, "tickets": 0}
    return {}

  def fast_median_runs(self) -> list[tuple[TrialOutcome, FastMedianReport]]:
    """Fast median trials over the suite grid, run once per suite."""
    if self._fast_median_runs is None:
      sizes = self.sizes
      tasks = make_tasks(
          "median-fast",
          sizes.fast_median_sizes,
          sizes.fast_median_trials,
          self.base_seed,
          self.fast_median_parameters(),
      )
      tasks = [
          replace(task, audit=task.n == sizes.fast_median_audit_n)
          for task in tasks
      ]
      self._fast_median_runs = execute_tasks_in_parallel(
          fast_median_trial, tasks, self.workers
      )
    return self._fast_median_runs


def fast_median_trial(
    task: TrialTask,
) -> tuple[TrialOutcome, FastMedianReport]:
  """Runs one fast median trial and keeps its per iteration report."""
  rng = SchedulerRng(task.seed)
  runner = build_runner(task.protocol, task.n, task.parameters, rng.jumped())
  limits = RunLimits(task.max_interactions or runner.budget)
  result, _, report = runner.execute_with_report(
      rng, limits, audit=task.audit
  )
  outcome = TrialOutcome(
      task.protocol, runner_model(runner), task.n, task.seed, task.trial,
      result,
  )
  return outcome, report


def median_audit_trial(task: TrialTask) -> tuple[RunResult, int, int, bool]:
  """Standard median with the disorder audit on every step.

  Returns:
    the run result, the monotonicity violations, the meaningful steps seen
    and whether the running disorder matches a full recomputation.
  """
  rng = SchedulerRng(task.seed)
  runner = build_runner(task.protocol, task.n, task.parameters, rng.jumped())
  audits: list[DisorderAudit] = []

  def audit_factory(pop: Population) -> DisorderAudit:
    audits.append(DisorderAudit(pop))
    return audits[-1]

  result, _ = runner.execute(
      rng,
      RunLimits(runner.budget),
      observer_factories=[audit_factory],
      audit=task.audit,
  )
  audit = audits[0]
  return result, len(audit.violations), audit.meaningful_steps, audit.recheck()


# Scheduler semantics


def frozen_spec() -> ProtocolSpec:
  """Rule-less protocol: every draw is NoMatch, so the configuration stays."""
  return (
      ProtocolBuilder("frozen")
      .states("A", "B", "C")
      .group("GA", "A")
      .group("GB", "B", "C")
      .target("GB", "A", "B")
      .build()
  )


def responder_tallies(
    pop: Population, rng: SchedulerRng, draws: int, initiator_state: str
) -> dict[int, int]:
  """Responder counts of the draws whose initiator is in `initiator_state`."""
  spec = pop.spec
  state = spec.state_id(initiator_state).index
  tallies: dict[int, int] = {}
  for step in range(draws):
    record = step_selective(pop, spec, rng, step + 1)
    if pop.state_of[record.initiator] == state:
      if record.responder == record.initiator:
        raise AssertionError("the initiator was drawn as its own responder")
      tallies[record.responder] = tallies.get(record.responder, 0) + 1
  return tallies


def _uniform_p_value(tallies: dict[int, int], members: Sequence[int]) -> float:
  observed = [tallies.get(agent, 0) for agent in members]
  return float(stats.chisquare(observed).pvalue)


def uniformity_p_values(draws: int, seed: int) -> list[tuple[str, float]]:
  """Chi-square p-values of responder and initiator draws.

  Three frozen configurations: an external target group of 7, an internal
  target group of 6 where the initiator is excluded, an external target
  group of 50. The first also tests initiators over all 8 agents.
  """
  spec = frozen_spec()
  results = []
  pop = build_population(spec, counts={"A": 1, "B": 4, "C": 3})
  rng = SchedulerRng(seed)
  initiators = [0] * pop.n
  tallies: dict[int, int] = {}
  for step in range(draws):
    record = step_selective(pop, spec, rng, step + 1)
    initiators[record.initiator] += 1
    if pop.state_name(record.initiator) == "A":
      tallies[record.responder] = tallies.get(record.responder, 0) + 1
  group_b = spec.compiled.group_index["GB"]
  results.append((
      "responders of A over 7",
      _uniform_p_value(tallies, pop.members[group_b]),
  ))
  results.append(
      ("initiators over 8", float(stats.chisquare(initiators).pvalue))
  )

  pop = build_population(spec, counts={"A": 2, "B": 6})
  tallies = responder_tallies(pop, SchedulerRng(seed + 1), draws, "B")
  results.append((
      "responders of B over 6, self excluded",
      _uniform_p_value(tallies, pop.members[group_b]),
  ))

  pop = build_population(spec, counts={"A": 1, "C": 50})
  tallies = responder_tallies(pop, SchedulerRng(seed + 2), draws, "A")
  results.append((
      "responders of A over 50",
      _uniform_p_value(tallies, pop.members[group_b]),
  ))
  return results


def outcome_violations(
    pop: Population, spec: ProtocolSpec, rng: SchedulerRng, steps: int = 20
) -> list[str]:
  """Steps the scheduler and checks every outcome against the configuration
  it was drawn from.
  """
  compiled = spec.compiled
  step = step_selective if spec.is_selective else step_standard
  problems = []
  for number in range(1, steps + 1):
    before = list(pop.state_of)
    sizes = [len(members) for members in pop.members]
    record = step(pop, spec, rng, number)
    state = before[record.initiator]
    kind = record.kind
    if kind is OutcomeKind.MEANINGFUL:
      if record.responder is None or record.rule is None:
        problems.append(f"step {number}: meaningful without responder/rule")
    elif kind in (OutcomeKind.EMPTINESS, OutcomeKind.SINGLETON):
      target = compiled.target_of[state]
      own = compiled.group_of[state] == target
      if record.responder is not None or not spec.is_selective:
        problems.append(f"step {number}: {kind.value} with a responder")
      elif kind is OutcomeKind.SINGLETON and not (own and sizes[target] == 1):
        problems.append(f"step {number}: singleton outside own group")
      elif kind is OutcomeKind.EMPTINESS and (own or sizes[target]):
        problems.append(f"step {number}: emptiness on a nonempty group")
    elif pop.state_of != before:
      problems.append(f"step {number}: NoMatch changed a state")
  return problems


def check_scheduler_semantics(context: SuiteContext) -> tuple[bool, str]:
  p_values = uniformity_p_values(
      context.sizes.uniformity_draws, context.base_seed
  )
  worst = min(p for _, p in p_values)
  problems = []
  for protocol_config in get_protocol_configs():
    protocol = protocol_config["id"]
    rng = SchedulerRng(mix_seed(context.base_seed, 19, 0))
    runner = build_runner(protocol, 19, {}, rng.jumped())
    pop = runner.initial(False)
    problems += [
        f"{protocol}: {problem}"
        for problem in outcome_violations(pop, runner.spec, rng)
    ]
  problems += scripted_null_outcomes()
  passed = worst > UNIFORMITY_P_VALUE and not problems
  detail = f"min p-value {worst:.4f}; {len(problems)} outcome violations"
  if problems:
    detail += f" (first: {problems[0]})"
  return passed, detail


def scripted_null_outcomes() -> list[str]:
  """Emptiness and singleton tests on configurations that force them."""
  problems = []
  spec = protocol_module.epidemic_table()
  pop = build_population(spec, counts={"1": 3})
  record = step_selective(pop, spec, SchedulerRng(1))
  if record.kind is not OutcomeKind.EMPTINESS or pop.count("Stop") != 1:
    problems.append("epidemic: all informed should give an emptiness test")
  spec = protocol_module.leader_election_table()
  pop = build_population(spec, counts={"L": 1})
  record = step_selective(pop, spec, SchedulerRng(1))
  if record.kind is not OutcomeKind.SINGLETON or pop.count("L*") != 1:
    problems.append("le: a lone candidate should give a singleton test")
  return problems


# Fragmented time


def random_responders(rng: SchedulerRng, n: int, length: int) -> list:
  """Responder stream skewed towards agent 0 so that cuts happen."""
  responders = []
  for _ in range(length):
    draw = rng.below(10)
    if draw < 2:
      responders.append(None)
    elif draw < 8:
      responders.append(0)
    else:
      responders.append(rng.below(n))
  return responders


def check_chunk_minimality(context: SuiteContext) -> tuple[bool, str]:
  rng = SchedulerRng(context.base_seed)
  mismatches = 0
  cut = 0
  for _ in range(context.sizes.chunk_traces):
    n = 2 + rng.below(5)
    responders = random_responders(rng, n, rng.below(61))
    greedy = fragmented_time(responders, n).chunk_count
    if greedy > 1:
      cut += 1
    if greedy != minimum_chunks_exhaustive(responders, n):
      mismatches += 1
  detail = (
      f"{mismatches} mismatches over {context.sizes.chunk_traces} traces"
      f" ({cut} with more than one chunk)"
  )
  return mismatches == 0, detail


def check_standard_envelope(context: SuiteContext) -> tuple[bool, str]:
  sizes = context.sizes
  checks = []
  for n in sizes.envelope_sizes:
    outcomes = context.run(
        "epidemic-std",
        [n],
        sizes.envelope_trials,
        max_interactions=math.ceil(minimum_length(n)),
        stop_when_stable=False,
    )
    for outcome in outcomes:
      result = outcome.result
      report = ChunkReport(
          n=n,
          chunk_count=result.chunks,
          fragmented_time=result.fragmented_time,
          interactions=result.interactions,
      )
      checks.append(standard_envelope_check(report))
  summary = summarize(checks)
  passed = (
      summary.checked > 0
      and summary.within_fraction >= 0.95
      and summary.lower_fraction == 1.0
  )
  detail = (
      f"within T/10 <= T_F <= 2T: {summary.within_fraction:.2f} of"
      f" {summary.checked}; lower bound: {summary.lower_fraction:.2f}"
  )
  return passed, detail


# Protocols


def _all_correct(outcomes: Sequence[TrialOutcome]) -> tuple[int, int]:
  return sum(outcome.result.correct for outcome in outcomes), len(outcomes)


def check_leader_election(context: SuiteContext) -> tuple[bool, str]:
  sizes = context.sizes
  correct, total = _all_correct(
      context.run("le", sizes.le_sizes, sizes.le_trials)
  )
  growth_table = ScalingTable.from_outcomes(
      context.run("le", sizes.le_growth_sizes, sizes.le_growth_trials)
  )
  growth = growth_table.growth("fragmented_time", ratio_to_log=True)
  passed = correct == total and growth <= 2.0
  detail = f"{correct}/{total} correct; T_F/ln n growth {growth:.2f}"
  return passed, detail


def check_majority(context: SuiteContext) -> tuple[bool, str]:
  sizes = context.sizes
  tasks = []
  for total in range(1, sizes.majority_max_total + 1):
    for g in range(total + 1):
      for seed in range(sizes.majority_seeds):
        tasks.append(
            TrialTask(
                protocol="majority",
                n=total,
                trial=seed,
                seed=mix_seed(context.base_seed + g, total, seed),
                parameters={"g": g, "r": total - g},
            )
        )
  exhaustive, exhaustive_total = _all_correct(
      run_trials(tasks, context.workers)
  )
  biased, biased_total = _all_correct(
      context.run(
          "majority",
          [sizes.majority_bias_n],
          sizes.majority_bias_trials,
          {"bias": 1},
      )
  )
  table = ScalingTable.from_outcomes(
      context.run(
          "majority", sizes.majority_fit_sizes, sizes.majority_fit_trials
      )
  )
  slope = fit_exponent(table.points("fragmented_time")).slope
  passed = (
      exhaustive == exhaustive_total
      and biased == biased_total
      and slope <= 0.3
  )
  detail = (
      f"exhaustive {exhaustive}/{exhaustive_total}, bias 1"
      f" {biased}/{biased_total}, T_F slope {slope:.3f}"
  )
  return passed, detail


def _multiplication_tasks(
    context: SuiteContext, protocol: str, requirement: Callable[[int, int], int]
) -> list[TrialTask]:
  sizes = context.sizes
  tasks = []
  for x in range(sizes.mult_max + 1):
    for y in range(sizes.mult_max + 1):
      free = requirement(x, y)
      n = x + y + free + 1
      for seed in range(sizes.mult_seeds):
        tasks.append(
            TrialTask(
                protocol=protocol,
                n=n,
                trial=seed,
                seed=mix_seed(context.base_seed + x, n, seed),
                parameters={"x": x, "y": y, "free": free},
            )
        )
  return tasks


def check_multiplication(context: SuiteContext) -> tuple[bool, str]:
  sizes = context.sizes
  slow = run_trials(
      _multiplication_tasks(context, "mult-slow", slow_free_requirement),
      context.workers,
  )
  fast_tasks = _multiplication_tasks(
      context, "mult-fast", fast_free_requirement
  )
  fast = run_trials(fast_tasks, context.workers)
  slow_correct, slow_total = _all_correct(slow)
  fast_correct, fast_total = _all_correct(fast)
  wrong_rounds = 0
  for task, outcome in zip(fast_tasks, fast):
    y = task.parameters["y"]
    rounds = dict(outcome.result.extras).get("rounds")
    if y >= 1 and rounds != rounds_needed(y):
      wrong_rounds += 1
  table = ScalingTable.from_outcomes(
      context.run(
          "mult-fast",
          sizes.mult_growth_sizes,
          sizes.mult_growth_trials,
          {"x": 2, "y": 5},
      )
  )
  growth = table.growth("fragmented_time")
  passed = (
      slow_correct == slow_total
      and fast_correct == fast_total
      and wrong_rounds == 0
      and growth <= 2.0
  )
  detail = (
      f"slow {slow_correct}/{slow_total}, fast {fast_correct}/{fast_total},"
      f" {wrong_rounds} wrong round counts, fast T_F growth {growth:.2f}"
  )
  return passed, detail


def check_median_standard(context: SuiteContext) -> tuple[bool, str]:
  sizes = context.sizes
  correct, total = _all_correct(
      context.run("median-std", sizes.median_sizes, sizes.median_trials)
  )
  audit_task = TrialTask(
      protocol="median-std",
      n=sizes.median_audit_n,
      trial=0,
      seed=mix_seed(context.base_seed, sizes.median_audit_n, 0),
      audit=True,
  )
  result, violations, meaningful, consistent = median_audit_trial(audit_task)
  table = ScalingTable.from_outcomes(
      context.run(
          "median-std", sizes.median_fit_sizes, sizes.median_fit_trials
      )
  )
  slope = fit_exponent(table.points("interactions")).slope
  passed = (
      correct == total
      and result.correct
      and violations == 0
      and consistent
      and 1.9 <= slope <= 2.3
  )
  detail = (
      f"{correct}/{total} correct; {violations} disorder violations over"
      f" {meaningful} meaningful steps; interactions slope {slope:.3f}"
  )
  return passed, detail


def check_fast_median(context: SuiteContext) -> tuple[bool, str]:
  runs = context.fast_median_runs()
  tickets = (
      0 if context.fault_injection else DEFAULT_TICKETS
  )
  correct = sum(outcome.result.correct for outcome, _ in runs)
  violations = sum(report.soundness_violations for _, report in runs)
  phases = [phase for _, report in runs for phase in report.phases]
  short = sum(not phase.meets_ticket_bound(tickets) for phase in phases)
  fractions = [phase.colored_fraction for phase in phases]
  mean_fraction = sum(fractions) / len(fractions) if fractions else 0.0
  lost = sum(
      not log.median_in_candidates
      for _, report in runs
      for log in report.iterations
      if log.verdict
  )
  table = ScalingTable.from_outcomes(outcome for outcome, _ in runs)
  ratio_growth = table.growth(
      "fragmented_time", ratio_to_log=True, power=FAST_MEDIAN_LOG_POWER
  )
  slope = fit_exponent(table.points("fragmented_time")).slope
  passed = (
      correct == len(runs)
      and violations == 0
      and short == 0
      and lost == 0
      and ratio_growth <= FAST_MEDIAN_RATIO_GROWTH
  )
  detail = (
      f"{correct}/{len(runs)} correct; {violations} coloring violations;"
      f" {short}/{len(phases)} phases under the ticket bound; mean colored"
      f" fraction {mean_fraction:.2f} (vs {EXPECTED_COLORED_FRACTION:.2f});"
      f" median lost {lost} times; T_F/ln^4 n growth {ratio_growth:.2f};"
      f" T_F slope {slope:.3f}"
  )
  return passed, detail


def check_candidate_shrink(context: SuiteContext) -> tuple[bool, str]:
  sizes = context.sizes
  iterations = [
      log
      for _, report in context.fast_median_runs()
      for log in report.iterations
      if log.verdict
  ]
  trial = sizes.fast_median_trials
  n = sizes.fast_median_sizes[0]
  while len(iterations) < sizes.min_shrink_iterations:
    task = TrialTask(
        protocol="median-fast",
        n=n,
        trial=trial,
        seed=mix_seed(context.base_seed, n, trial),
        parameters=context.fast_median_parameters(),
    )
    _, report = fast_median_trial(task)
    decided = [log for log in report.iterations if log.verdict]
    if not decided:
      break
    iterations += decided
    trial += 1
  if len(iterations) < sizes.min_shrink_iterations:
    return False, f"only {len(iterations)} iterations to measure"
  shrank = sum(log.shrank_to_three_quarters for log in iterations)
  fraction = shrank / len(iterations)
  detail = (
      f"|C| shrank to 3/4 or less in {fraction:.2f} of"
      f" {len(iterations)} iterations"
  )
  return fraction >= 0.4, detail


def check_protocol_text(context: SuiteContext) -> tuple[bool, str]:
  del context
  mismatches = []
  specs = [
      getattr(protocol_module, protocol_config["spec_function"])()
      for protocol_config in get_protocol_configs()
      if protocol_config.get("spec_function")
  ]
  specs.extend(build_stages(DEFAULT_TICKETS).all_specs())
  for spec in specs:
    again, diagnostics = parse_protocol_with_diagnostics(pretty_print(spec))
    if again != spec:
      mismatches.append(spec.name)
      logger.error(
          "round trip of %s failed: %s",
          spec.name,
          [diagnostic.describe() for diagnostic in diagnostics],
      )
  unspanned = 0
  for text in MALFORMED_PROTOCOLS:
    try:
      spec, diagnostics = parse_protocol_with_diagnostics(text)
    except SelectiveProtocolError:
      unspanned += 1
      continue
    size = len(text.encode("utf-8"))
    if spec is not None or not diagnostics or not all(
        diagnostic.span is not None and 0 <= diagnostic.span.start
        and diagnostic.span.end <= size
        for diagnostic in diagnostics
    ):
      unspanned += 1
  passed = not mismatches and unspanned == 0
  detail = (
      f"round trip mismatches: {mismatches or 'none'}; {unspanned} of"
      f" {len(MALFORMED_PROTOCOLS)} malformed inputs without a spanned"
      " diagnostic"
  )
  return passed, detail


def get_criteria() -> list[dict]:
  """Criteria in the order they run."""
  return [
      {"name": "Scheduler semantics", "function": check_scheduler_semantics},
      {"name": "Chunk minimality", "function": check_chunk_minimality},
      {"name": "Standard model T_F envelope",
       "function": check_standard_envelope},
      {"name": "Leader election", "function": check_leader_election},
      {"name": "Majority", "function": check_majority},
      {"name": "Multiplication", "function": check_multiplication},
      {"name": "Median, standard model", "function": check_median_standard},
      {"name": "Median by pivot partitioning",
       "function": check_fast_median},
      {"name": "Candidate shrink", "function": check_candidate_shrink},
      {"name": "Protocol text", "function": check_protocol_text},
  ]


def suite_sizes(suite: str) -> SuiteSizes:
  if suite == "fast":
    return FAST_SUITE
  if suite == "full":
    return FULL_SUITE
  raise ConfigurationError(f"unknown suite {suite!r}; use one of {SUITES}")


def run_suite(
    suite: str,
    workers: int = 1,
    base_seed: int = 0,
    fault_injection: bool = False,
    only: Sequence[str] = (),
) -> list[CriterionResult]:
  """Runs every criterion of `suite`, or those whose name is in `only`."""
  context = SuiteContext(
      sizes=suite_sizes(suite),
      workers=workers,
      base_seed=base_seed,
      fault_injection=fault_injection,
  )
  results = []
  for criterion in get_criteria():
    name = criterion["name"]
    if only and name not in only:
      continue
    logger.info("Checking %s...", name)
    start = time.perf_counter()
    try:
      passed, detail = criterion["function"](context)
    except SelectiveProtocolError as error:
      passed, detail = False, error.describe()
    results.append(
        CriterionResult(name, passed, detail, time.perf_counter() - start)
    )
  return results
