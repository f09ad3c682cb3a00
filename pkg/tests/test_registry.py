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

""" Module to test the protocol registry and the trial runner """

import pytest

import protocols.protocol_modules as protocol_module
from cli.trials import (
    TrialTask,
    build_runner,
    make_tasks,
    run_trial,
    run_trials,
)
from engine.rng import SchedulerRng
from errors import ConfigurationError
from helpers.generic_helpers import execute_tasks_in_parallel, mix_seed
from protocol_configs.protocols import get_protocol_config, get_protocol_configs
from rules_dsl.printer import pretty_print
from rules_dsl.validation import collect_errors


def test_protocol_ids_are_unique():
  """Registry ids identify protocols on the command line"""
  ids = [config["id"] for config in get_protocol_configs()]
  assert len(ids) == len(set(ids))
  assert set(ids) == {
      "epidemic", "epidemic-std", "le", "majority", "mult-slow",
      "mult-fast", "median-std", "median-fast",
  }


@pytest.mark.parametrize(
    "protocol_config", get_protocol_configs(), ids=lambda config: config["id"]
)
def test_registry_functions_exist(protocol_config):
  """Builder and spec functions named by the registry are defined"""
  assert hasattr(protocol_module, protocol_config["builder_function"])
  assert protocol_config["model"] in ("selective", "standard")
  spec_function = protocol_config.get("spec_function")
  if spec_function is None:
    return
  spec = getattr(protocol_module, spec_function)()
  assert spec.name == protocol_config["id"]
  assert spec.model.value == protocol_config["model"]
  assert not collect_errors(spec)
  assert pretty_print(spec)


@pytest.mark.parametrize(
    "protocol_config", get_protocol_configs(), ids=lambda config: config["id"]
)
def test_registry_defaults_run(protocol_config):
  """Every built-in runs correctly with its default parameters"""
  task = TrialTask(
      protocol=protocol_config["id"], n=31, trial=0, seed=mix_seed(0, 31, 0)
  )
  outcome = run_trial(task)
  assert outcome.model == protocol_config["model"]
  assert outcome.result.stabilized
  assert outcome.result.correct


def test_unknown_protocol():
  """Unknown ids are configuration errors"""
  with pytest.raises(ConfigurationError):
    get_protocol_config("bubble-sort")
  with pytest.raises(ConfigurationError):
    build_runner("bubble-sort", 10, {}, SchedulerRng(0))


def test_parameters_override_defaults():
  """Task parameters win over registry defaults"""
  runner = build_runner("majority", 10, {"g": 2}, SchedulerRng(0))
  result, _ = runner.execute(SchedulerRng(1))
  assert result.output.verdict == "R-wins"


def test_runner_from_protocol_text():
  """Protocol text replaces the registry lookup"""
  text = pretty_print(protocol_module.leader_election_table())
  runner = build_runner("le", 20, {}, SchedulerRng(0), protocol_text=text)
  result, _ = runner.execute(SchedulerRng(1))
  assert result.stabilized


def test_make_tasks_order_and_seeds():
  """One task per (n, trial) in grid order, seeded by mix_seed"""
  tasks = make_tasks("le", [10, 20], 3, 42, {"candidates": 2})
  assert [(task.n, task.trial) for task in tasks] == [
      (10, 0), (10, 1), (10, 2), (20, 0), (20, 1), (20, 2)
  ]
  assert tasks[4].seed == mix_seed(42, 20, 1)
  assert all(task.parameters == {"candidates": 2} for task in tasks)
  assert len({task.seed for task in tasks}) == len(tasks)


def test_trials_are_reproducible():
  """The same task gives the same run, in any worker count"""
  tasks = make_tasks("epidemic", [16, 32], 2, 7)
  first = run_trials(tasks, workers=1)
  second = run_trials(tasks, workers=2)
  assert [o.result.interactions for o in first] == [
      o.result.interactions for o in second
  ]
  assert [o.result.chunks for o in first] == [o.result.chunks for o in second]


def test_tasks_in_parallel_keep_order():
  """Results come back in task order"""
  assert execute_tasks_in_parallel(abs, [-3, 2, -1], workers=2) == [3, 2, 1]
  assert not execute_tasks_in_parallel(abs, [], workers=4)


def test_fixed_length_runs():
  """Without the stability stop a run uses its whole budget"""
  task = TrialTask(
      protocol="epidemic", n=20, trial=0, seed=1, max_interactions=5_000,
      stop_when_stable=False,
  )
  assert run_trial(task).result.interactions == 5_000
