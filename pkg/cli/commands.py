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

"""Module with the subcommands of the command line.

Every command takes the Configuration and returns the exit code: 0 on
success, 1 when a trial or a criterion failed. Errors are raised and turned
into exit code 2 by main.
"""

from __future__ import annotations

import logging
import sys
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import TextIO

from cli.csv_rows import write_csv
from cli.suites import run_suite
from cli.trials import TrialOutcome, TrialTask, make_tasks, run_trials
from configuration import Configuration
from errors import ConfigurationError, InsufficientData
from helpers.generic_helpers import print_checks
from metrics.scaling_table import FITTED_METRICS, ScalingTable
from rules_dsl.parser import parse_protocol_with_diagnostics
from rules_dsl.printer import pretty_print
from rules_dsl.validation import collect_warnings

logger = logging.getLogger(__name__)

MIN_SCALING_SIZES = 3


def experiment_tasks(config: Configuration) -> list[TrialTask]:
  return make_tasks(
      config.protocol_name,
      config.n_grid,
      config.trials,
      config.base_seed,
      config.protocol_parameters,
      protocol_text=config.protocol_text,
      max_interactions=config.max_interactions,
      stability_check_period=config.stability_check_period,
      audit=config.audit,
      poison_keys=config.poison_keys,
  )


def report_stream(config: Configuration) -> TextIO:
  """Reports go to standard error when the CSV takes standard output."""
  return sys.stderr if config.out == "-" else sys.stdout


def write_outcomes(outcomes: Sequence[TrialOutcome], out: str) -> None:
  if out == "-":
    write_csv(outcomes, sys.stdout)
    return
  try:
    with open(out, "w", encoding="utf-8", newline="") as file:
      write_csv(outcomes, file)
  except OSError as error:
    raise ConfigurationError(f"cannot write {out}: {error}") from error
  logger.info("Wrote %d trials to %s", len(outcomes), out)


def all_correct(outcomes: Sequence[TrialOutcome]) -> bool:
  return all(
      outcome.result.stabilized and outcome.result.correct
      for outcome in outcomes
  )


def correctness_checks(
    outcomes: Sequence[TrialOutcome],
) -> list[tuple[str, bool]]:
  """One (line, passed) pair per size: correct trials and mean costs."""
  by_size: dict[int, list[TrialOutcome]] = {}
  for outcome in outcomes:
    by_size.setdefault(outcome.n, []).append(outcome)
  checks = []
  for n, group in by_size.items():
    correct = sum(
        outcome.result.stabilized and outcome.result.correct
        for outcome in group
    )
    interactions = sum(o.result.interactions for o in group) / len(group)
    fragmented = sum(o.result.fragmented_time for o in group) / len(group)
    diagnostics = sorted(
        {code for outcome in group for code in outcome.result.diagnostics}
    )
    line = (
        f"n={n}: {correct}/{len(group)} correct, mean interactions"
        f" {interactions:.1f}, mean T_F {fragmented:.2f}"
    )
    if diagnostics:
      line += f", diagnostics {', '.join(diagnostics)}"
    checks.append((line, correct == len(group)))
  return checks


def cmd_simulate(config: Configuration) -> int:
  """Runs the trials, writes the CSV and prints the correctness summary."""
  config.validate()
  outcomes = run_trials(experiment_tasks(config), config.workers)
  write_outcomes(outcomes, config.out)
  print_checks(
      f"Simulation of {config.protocol_name}",
      correctness_checks(outcomes),
      report_stream(config),
  )
  return 0 if all_correct(outcomes) else 1


def print_scaling_report(table: ScalingTable, title: str, stream: TextIO):
  print(f"***** Scaling of {title} ***** \n", file=stream)
  print(table.summary().to_string(float_format="{:.4g}".format), file=stream)
  print("", file=stream)
  for metric in FITTED_METRICS:
    exponent, polylog = table.fit(metric)
    print(
        f" * {metric}: n^{exponent.slope:.3f} (rms {exponent.residual:.3f}),"
        f" (ln n)^{polylog.slope:.3f} (rms {polylog.residual:.3f})",
        file=stream,
    )
  growth = table.growth("fragmented_time", ratio_to_log=True)
  print(f" * T_F/ln n growth over the grid: {growth:.2f}x", file=stream)
  print("", file=stream)


def cmd_scale(config: Configuration) -> int:
  """Runs a sweep, writes the CSV and reports fitted exponents."""
  config.validate()
  if len(config.n_grid) < MIN_SCALING_SIZES:
    raise InsufficientData(
        f"a scaling sweep needs {MIN_SCALING_SIZES} sizes, got"
        f" {len(config.n_grid)}"
    )
  outcomes = run_trials(experiment_tasks(config), config.workers)
  write_outcomes(outcomes, config.out)
  stream = report_stream(config)
  print_scaling_report(
      ScalingTable.from_outcomes(outcomes), config.protocol_name, stream
  )
  print_checks("Correctness", correctness_checks(outcomes), stream)
  return 0 if all_correct(outcomes) else 1


def cmd_verify(config: Configuration) -> int:
  """Runs a verify suite and prints one line per criterion."""
  results = run_suite(
      config.suite,
      workers=config.workers,
      base_seed=config.base_seed,
      fault_injection=config.fault_injection,
      only=config.criteria,
  )
  if not results:
    raise ConfigurationError(f"no criterion matches {config.criteria}")
  print_checks(
      f"Verify {config.suite}",
      [
          (f"{result.name}: {result.detail} ({result.seconds:.1f}s)",
           result.passed)
          for result in results
      ],
  )
  passed = sum(result.passed for result in results)
  print(f"{passed}/{len(results)} criteria passed")
  return 0 if passed == len(results) else 1


def cmd_parse_check(config: Configuration) -> int:
  """Prints the canonical form of a protocol file, or its diagnostics.

  Returns:
    0 when the file is valid, 2 otherwise.
  """
  path = config.protocol_file
  try:
    text = Path(path).read_text(encoding="utf-8")
  except (OSError, UnicodeDecodeError) as error:
    raise ConfigurationError(f"cannot read {path}: {error}") from error
  spec, diagnostics = parse_protocol_with_diagnostics(text)
  if spec is None:
    for diagnostic in diagnostics:
      print(f"{path}:{diagnostic.describe()}", file=sys.stderr)
    return 2
  for warning in collect_warnings(spec):
    print(f"{path}: {warning.describe()}", file=sys.stderr)
  print(pretty_print(spec), end="")
  return 0


def get_command(name: str) -> Callable[[Configuration], int]:
  commands = {
      "simulate": cmd_simulate,
      "scale": cmd_scale,
      "verify": cmd_verify,
      "parse-check": cmd_parse_check,
  }
  if name not in commands:
    raise ConfigurationError(f"unknown command {name!r}")
  return commands[name]
