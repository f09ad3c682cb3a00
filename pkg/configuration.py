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

"""Module that defines the parameters of an experiment"""

from __future__ import annotations

import json
import logging
import os
from collections.abc import Mapping, Sequence
from pathlib import Path
from typing import Any

from cli.trials import build_runner
from engine.rng import SchedulerRng
from errors import ConfigurationError, EmptyPopulation
from protocol_configs.protocols import get_protocol_config
from rules_dsl.parser import parse_protocol

logger = logging.getLogger(__name__)

WORKERS_VARIABLE = "SELPOP_WORKERS"
FILE_PARAMETERS = ("initial",)
JSON_KEYS = (
    "protocol",
    "protocol_file",
    "n_grid",
    "trials",
    "seed",
    "max_interactions",
    "stability_check_period",
    "out",
    "workers",
    "parameters",
    "audit",
    "poison_keys",
)


class Configuration:
  """Class that stores all parameters of a simulator run."""

  def __init__(self):
    """Initialize with every default.

    Defaults live here and nowhere else; the command line and the JSON file
    only override them.
    """
    # set parameters
    self.command = "simulate"
    self.protocol = ""
    self.protocol_file = ""
    self.n_grid: list[int] = []
    self.trials = 1
    self.base_seed = 0
    self.out = "-"
    self.workers = 1
    self.verbose = False
    self.quiet = False

    # set protocol
    self.protocol_parameters: dict[str, Any] = {}
    self.protocol_text: str | None = None
    self.protocol_name = ""

    # set limits
    self.max_interactions: int | None = None
    self.stability_check_period: int | None = None
    self.audit = False
    self.poison_keys = False

    # set verify
    self.suite = "fast"
    self.fault_injection = False
    self.criteria: list[str] = []

  def set_parameters(
      self,
      protocol: str | None = None,
      protocol_file: str | None = None,
      n_grid: Sequence[int] | None = None,
      trials: int | None = None,
      base_seed: int | None = None,
      out: str | None = None,
      workers: int | None = None,
  ) -> None:
    """Sets the experiment parameters that are given, keeps the rest.

    Args:
      protocol: built-in protocol id.
      protocol_file: path of a protocol text file, instead of a built-in.
      n_grid: population sizes, ascending.
      trials: trials per size.
      base_seed: seed every trial seed is mixed from.
      out: CSV path, `-` for standard output.
      workers: worker processes.
    """
    if protocol is not None:
      self.protocol = protocol
    if protocol_file is not None:
      self.protocol_file = protocol_file
    if n_grid is not None:
      self.n_grid = list(n_grid)
    if trials is not None:
      self.trials = trials
    if base_seed is not None:
      self.base_seed = base_seed
    if out is not None:
      self.out = out
    if workers is not None:
      self.workers = workers

  def set_protocol_parameters(self, parameters: Mapping[str, Any]) -> None:
    """Adds protocol parameters; later values win."""
    self.protocol_parameters.update(parameters)

  def set_limits(
      self,
      max_interactions: int | None = None,
      stability_check_period: int | None = None,
      audit: bool | None = None,
      poison_keys: bool | None = None,
  ) -> None:
    if max_interactions is not None:
      self.max_interactions = max_interactions
    if stability_check_period is not None:
      self.stability_check_period = stability_check_period
    if audit is not None:
      self.audit = audit
    if poison_keys is not None:
      self.poison_keys = poison_keys

  def load_json(self, path: str) -> None:
    """Loads a JSON object whose keys mirror the command line flags.

    Raises:
      ConfigurationError: unreadable file, invalid JSON or unknown keys.
    """
    try:
      with open(path, encoding="utf-8") as file:
        payload = json.load(file)
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as error:
      raise ConfigurationError(f"cannot load {path}: {error}") from error
    if not isinstance(payload, dict):
      raise ConfigurationError(f"{path} must hold a JSON object")
    unknown = sorted(set(payload) - set(JSON_KEYS))
    if unknown:
      raise ConfigurationError(f"{path} has unknown keys {unknown}")
    parameters = payload.get("parameters", {})
    if not isinstance(parameters, dict):
      raise ConfigurationError(f"`parameters` in {path} must be an object")
    self.set_parameters(
        protocol=payload.get("protocol"),
        protocol_file=payload.get("protocol_file"),
        n_grid=payload.get("n_grid"),
        trials=payload.get("trials"),
        base_seed=payload.get("seed"),
        out=payload.get("out"),
        workers=payload.get("workers"),
    )
    self.set_limits(
        max_interactions=payload.get("max_interactions"),
        stability_check_period=payload.get("stability_check_period"),
        audit=payload.get("audit"),
        poison_keys=payload.get("poison_keys"),
    )
    self.set_protocol_parameters(parameters)
    logger.debug("Loaded configuration from %s", path)

  def apply_environment(self) -> None:
    """SELPOP_WORKERS overrides the worker count."""
    value = os.environ.get(WORKERS_VARIABLE)
    if not value:
      return
    try:
      self.workers = int(value)
    except ValueError as error:
      raise ConfigurationError(
          f"{WORKERS_VARIABLE} must be an integer, got {value!r}"
      ) from error

  def _check_integer(self, name: str, value: Any, minimum: int) -> None:
    if isinstance(value, bool) or not isinstance(value, int):
      raise ConfigurationError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
      raise ConfigurationError(f"{name} must be >= {minimum}, got {value}")

  def _read_protocol_file(self) -> None:
    try:
      self.protocol_text = Path(self.protocol_file).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as error:
      raise ConfigurationError(
          f"cannot read {self.protocol_file}: {error}"
      ) from error
    self.protocol_name = parse_protocol(self.protocol_text).name

  def _check_sizes(self, min_n: int, odd_n: bool) -> None:
    for n in self.n_grid:
      if n < min_n:
        raise ConfigurationError(
            f"{self.protocol_name} needs n >= {min_n}, got {n}"
        )
      if odd_n and n % 2 == 0:
        raise ConfigurationError(
            f"{self.protocol_name} needs an odd n, got {n}"
        )

  def validate(self) -> None:
    """Checks the experiment before any trial runs.

    A protocol file is read and parsed here. Every size of the grid is also
    checked by building the protocol instance once, so that protocol
    preconditions fail before the first trial.

    Raises:
      ConfigurationError: an invalid experiment.
      EmptyPopulation: a size below 1.
      ProtocolDefinitionError: an invalid protocol file.
      ProtocolParameterError: parameters outside the protocol preconditions.
    """
    if bool(self.protocol) == bool(self.protocol_file):
      raise ConfigurationError(
          "give exactly one of --protocol and --protocol-file"
      )
    if not self.n_grid:
      raise ConfigurationError("the n grid is empty; give --n or --n-grid")
    for n in self.n_grid:
      self._check_integer("n", n, 0)
      if n < 1:
        raise EmptyPopulation(f"n={n}: a population needs at least one agent")
    if self.n_grid != sorted(set(self.n_grid)):
      raise ConfigurationError(
          f"the n grid must be strictly ascending, got {self.n_grid}"
      )
    self._check_integer("trials", self.trials, 1)
    self._check_integer("workers", self.workers, 1)
    self._check_integer("seed", self.base_seed, 0)
    if self.max_interactions is not None:
      self._check_integer("max interactions", self.max_interactions, 1)
    if self.stability_check_period is not None:
      self._check_integer(
          "stability check period", self.stability_check_period, 1
      )

    if self.protocol_file:
      self._read_protocol_file()
      known = set(FILE_PARAMETERS)
    else:
      protocol_config = get_protocol_config(self.protocol)
      self.protocol_name = self.protocol
      self.protocol_text = None
      known = set(protocol_config.get("parameters", {}))
      self._check_sizes(
          protocol_config.get("min_n", 1), protocol_config.get("odd_n", False)
      )
    unknown = sorted(set(self.protocol_parameters) - known)
    if unknown:
      raise ConfigurationError(
          f"{self.protocol_name} takes parameters {sorted(known)}, not"
          f" {unknown}"
      )
    for n in self.n_grid:
      build_runner(
          self.protocol_name,
          n,
          self.protocol_parameters,
          SchedulerRng(self.base_seed),
          self.protocol_text,
      )
