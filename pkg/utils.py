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

""" Utils Module for the command line arguments """

from __future__ import annotations

import argparse
import json
import textwrap
from collections.abc import Sequence
from typing import Any

from cli.suites import SUITES, get_criteria
from configuration import Configuration
from errors import ConfigurationError


def parse_parameter(text: str) -> tuple[str, Any]:
  """Parses `KEY=VALUE`; VALUE is read as JSON, else kept as a string."""
  key, separator, value = text.partition("=")
  if not separator or not key:
    raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
  try:
    return key, json.loads(value)
  except json.JSONDecodeError:
    return key, value


def parse_grid(text: str) -> list[int]:
  """Parses a comma separated list of sizes, e.g. `100,1000,10000`."""
  try:
    return [int(item) for item in text.split(",") if item.strip()]
  except ValueError as error:
    raise argparse.ArgumentTypeError(
        f"expected comma separated integers, got {text!r}"
    ) from error


def build_experiment_config(args: Any) -> Configuration:
  """Builds the configuration of one command.

  Defaults come from Configuration, then the JSON file, then the flags,
  then SELPOP_WORKERS.

  Args:
      args: The parser arguments.
  Returns:
      config: The configuration of the command.
  """
  config = Configuration()
  config.command = args.command
  config.verbose = args.verbose
  config.quiet = args.quiet
  if getattr(args, "config", None):
    config.load_json(args.config)

  if args.command == "parse-check":
    config.set_parameters(protocol_file=args.protocol_file)
    return config
  if args.command == "verify":
    config.suite = args.suite
    config.fault_injection = args.fault_injection
    config.criteria = list(args.criterion or [])
    config.set_parameters(base_seed=args.seed, workers=args.workers)
    config.apply_environment()
    return config

  if args.n is not None and args.n_grid is not None:
    raise ConfigurationError("give one of --n and --n-grid")
  n_grid = [args.n] if args.n is not None else args.n_grid
  if args.protocol_file is not None:
    config.protocol = ""
  if args.protocol is not None:
    config.protocol_file = ""
  config.set_parameters(
      protocol=args.protocol,
      protocol_file=args.protocol_file,
      n_grid=n_grid,
      trials=args.trials,
      base_seed=args.seed,
      out=args.out,
      workers=args.workers,
  )
  config.set_limits(
      max_interactions=args.max_interactions,
      stability_check_period=args.stability_period,
      audit=args.audit or None,
      poison_keys=args.poison_keys or None,
  )
  config.set_protocol_parameters(dict(args.param or []))
  config.apply_environment()
  return config


def _add_common_arguments(parser: argparse.ArgumentParser) -> None:
  parser.add_argument(
      "--verbose",
      "-v",
      help="Print all the steps as they happen.",
      action="store_true",
      default=False,
  )
  parser.add_argument(
      "--quiet",
      "-q",
      help="Print errors only.",
      action="store_true",
      default=False,
  )


def _add_experiment_arguments(parser: argparse.ArgumentParser) -> None:
  parser.add_argument("--protocol", "-p", help="Built-in protocol id.")
  parser.add_argument(
      "--protocol-file", "-f", help="Protocol text file to run instead."
  )
  parser.add_argument("--n", type=int, help="Population size.")
  parser.add_argument(
      "--n-grid",
      type=parse_grid,
      help="Comma separated population sizes, ascending.",
  )
  parser.add_argument("--trials", "-t", type=int, help="Trials per size.")
  parser.add_argument("--seed", "-s", type=int, help="Base seed.")
  parser.add_argument(
      "--max-interactions",
      type=int,
      help="Interaction budget per trial (default: the protocol's budget).",
  )
  parser.add_argument(
      "--stability-period",
      type=int,
      help="Interactions between stability checks (default: n).",
  )
  parser.add_argument(
      "--out", "-o", help="CSV output path, - for standard output."
  )
  parser.add_argument("--workers", "-w", type=int, help="Worker processes.")
  parser.add_argument(
      "--param",
      type=parse_parameter,
      action="append",
      metavar="KEY=VALUE",
      help="Protocol parameter, repeatable. VALUE is read as JSON.",
  )
  parser.add_argument(
      "--config", "-c", help="JSON file with the experiment configuration."
  )
  parser.add_argument(
      "--audit",
      help="Re-check the group index after every interaction.",
      action="store_true",
      default=False,
  )
  parser.add_argument(
      "--poison-keys",
      help="Raise on any read of a hidden key other than a comparison.",
      action="store_true",
      default=False,
  )
  _add_common_arguments(parser)


def parse_args(arg_list: Sequence[str] | None = None) -> argparse.Namespace:
  """Parses command line arguments"""

  parser = argparse.ArgumentParser(
      prog="selpop",
      formatter_class=argparse.RawDescriptionHelpFormatter,
      description=textwrap.dedent(
          """\
          Simulator and experiment harness for selective population protocols.

          Example: python main.py simulate --protocol le --n 1000 \\
          --trials 20 --seed 7 --out le.csv
      """
      ),
  )
  subparsers = parser.add_subparsers(dest="command", required=True)

  simulate = subparsers.add_parser(
      "simulate", help="Run trials and write one CSV row per trial."
  )
  _add_experiment_arguments(simulate)

  scale = subparsers.add_parser(
      "scale", help="Run a sweep over sizes and fit the running times."
  )
  _add_experiment_arguments(scale)

  verify = subparsers.add_parser(
      "verify", help="Run the verification suite."
  )
  verify.add_argument(
      "suite", nargs="?", choices=SUITES, default="fast", help="Suite size."
  )
  verify.add_argument("--seed", "-s", type=int, help="Base seed.")
  verify.add_argument("--workers", "-w", type=int, help="Worker processes.")
  verify.add_argument(
      "--criterion",
      action="append",
      choices=[criterion["name"] for criterion in get_criteria()],
      help="Run only this criterion, repeatable.",
  )
  verify.add_argument(
      "--fault-injection",
      help="Run fast median with the pivot destroying coloring rules.",
      action="store_true",
      default=False,
  )
  _add_common_arguments(verify)

  parse_check = subparsers.add_parser(
      "parse-check", help="Validate a protocol file and print it back."
  )
  parse_check.add_argument("protocol_file", help="Protocol text file.")
  _add_common_arguments(parse_check)

  args = parser.parse_args(arg_list)

  return args
