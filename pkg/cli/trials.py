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

"""Module to run trials, one fresh protocol instance and seed each.

A trial is described by a picklable TrialTask so that trials can run in
worker processes. Every worker builds its own protocol instance and random
streams; nothing is shared between trials.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

import protocols.protocol_modules as protocol_module
from engine.rng import SchedulerRng
from engine.types import RunLimits, RunResult
from helpers.generic_helpers import execute_tasks_in_parallel, mix_seed
from protocol_configs.protocols import get_protocol_config
from rules_dsl.parser import parse_protocol

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrialTask:
  """One (n, trial) cell of an experiment.

  Attributes:
    protocol: registry id, or the name of the protocol in `protocol_text`.
    n: population size.
    trial: 0-based trial number at this size.
    seed: scheduler seed of the trial.
    parameters: protocol parameters; registry defaults fill the gaps.
    protocol_text: protocol text read from a file, instead of a built-in.
    max_interactions: interaction budget; None uses the protocol's budget.
    stability_check_period: None checks every n interactions.
    audit: re-check the group index after every step.
    poison_keys: wrap hidden keys so that any read but `<` raises.
    stop_when_stable: end the run at the first stable check.
  """

  protocol: str
  n: int
  trial: int
  seed: int
  parameters: Mapping[str, Any] = field(default_factory=dict)
  protocol_text: str | None = None
  max_interactions: int | None = None
  stability_check_period: int | None = None
  audit: bool = False
  poison_keys: bool = False
  stop_when_stable: bool = True


@dataclass
class TrialOutcome:
  protocol: str
  model: str
  n: int
  seed: int
  trial: int
  result: RunResult


def build_runner(
    protocol: str,
    n: int,
    parameters: Mapping[str, Any],
    key_rng: SchedulerRng,
    protocol_text: str | None = None,
):
  """Builds the bundle (or composed controller) of one trial.

  Built-ins are looked up in the registry and built by the function it
  names in protocols.protocol_modules.
  """
  if protocol_text is not None:
    spec = parse_protocol(protocol_text)
    return protocol_module.build_from_spec(spec, n, parameters)
  protocol_config = get_protocol_config(protocol)
  function_name = protocol_config.get("builder_function")
  builder = getattr(protocol_module, function_name)
  merged = dict(protocol_config.get("parameters", {}))
  merged.update(parameters)
  return builder(n, merged, key_rng)


def runner_model(runner) -> str:
  return runner.spec.model.value


def run_trial(task: TrialTask) -> TrialOutcome:
  """Builds the protocol instance of `task` and runs it once.

  The scheduler stream is seeded with the task seed; hidden keys come from
  a jumped stream of the same generator.
  """
  rng = SchedulerRng(task.seed)
  runner = build_runner(
      task.protocol, task.n, task.parameters, rng.jumped(), task.protocol_text
  )
  limits = RunLimits(
      task.max_interactions or runner.budget,
      task.stability_check_period,
      task.stop_when_stable,
  )
  result, _ = runner.execute(
      rng, limits, poison_keys=task.poison_keys, audit=task.audit
  )
  logger.debug(
      "%s n=%d trial=%d: %d interactions, correct=%s",
      task.protocol,
      task.n,
      task.trial,
      result.interactions,
      result.correct,
  )
  return TrialOutcome(
      protocol=task.protocol,
      model=runner_model(runner),
      n=task.n,
      seed=task.seed,
      trial=task.trial,
      result=result,
  )


def make_tasks(
    protocol: str,
    n_grid: Sequence[int],
    trials: int,
    base_seed: int,
    parameters: Mapping[str, Any] | None = None,
    **task_options: Any,
) -> list[TrialTask]:
  """One task per (n, trial), in (n, trial) order."""
  return [
      TrialTask(
          protocol=protocol,
          n=n,
          trial=trial,
          seed=mix_seed(base_seed, n, trial),
          parameters=dict(parameters or {}),
          **task_options,
      )
      for n in n_grid
      for trial in range(trials)
  ]


def run_trials(
    tasks: Sequence[TrialTask], workers: int = 1
) -> list[TrialOutcome]:
  """Runs every task; outcomes are in task order."""
  logger.info(
      "Running %d trials of %s on %d worker(s)...",
      len(tasks),
      tasks[0].protocol if tasks else "nothing",
      workers,
  )
  return execute_tasks_in_parallel(run_trial, tasks, workers)
