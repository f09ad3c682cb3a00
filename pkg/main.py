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

"""Module to run the selective population protocol simulator"""

from __future__ import annotations

import logging
import sys
import time

from cli.commands import get_command
from errors import SelectiveProtocolError
from helpers.generic_helpers import print_error
from utils import build_experiment_config, parse_args

logger = logging.getLogger(__name__)


def configure_logging(verbose: bool, quiet: bool) -> None:
  if quiet:
    logging.basicConfig(level=logging.ERROR, format="%(message)s")
  elif verbose:
    logging.basicConfig(
        level=logging.DEBUG,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
  else:
    logging.basicConfig(level=logging.INFO, format="%(message)s")


def main(arg_list: list[str] | None = None) -> int:
  """Runs one subcommand. See utils.parse_args for the arguments.

  Args:
    arg_list: A list of command line arguments

  Returns:
    the exit code: 0 on success, 1 when a trial or criterion failed, 2 on a
    configuration or protocol error.
  """

  args = parse_args(arg_list)
  configure_logging(args.verbose, args.quiet)

  start_time = time.time()
  try:
    config = build_experiment_config(args)
    exit_code = get_command(config.command)(config)
  except SelectiveProtocolError as error:
    print_error(error.describe())
    return 2

  logger.info("%s took %.1f s", args.command, time.time() - start_time)
  return exit_code


if __name__ == "__main__":
  sys.exit(main())
