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

""" Module to test the experiment parameters """

import argparse
import json
from dataclasses import dataclass, field

import pytest

from errors import (
    ConfigurationError,
    EmptyPopulation,
    ProtocolParameterError,
    ProtocolSyntaxError,
)
from utils import (
    build_experiment_config,
    parse_args,
    parse_grid,
    parse_parameter,
)


@dataclass
class ArgsMock():
  """Mock class to define params"""
  command: str = "simulate"
  verbose: bool = False
  quiet: bool = False
  config: str | None = None
  # set protocol
  protocol: str | None = None
  protocol_file: str | None = None
  param: list = field(default_factory=list)
  # set experiment
  n: int | None = None
  n_grid: list[int] | None = None
  trials: int | None = None
  seed: int | None = None
  out: str | None = None
  workers: int | None = None
  # set limits
  max_interactions: int | None = None
  stability_period: int | None = None
  audit: bool = False
  poison_keys: bool = False


def test_defaults():
  """Defaults live in Configuration"""
  config = build_experiment_config(ArgsMock(protocol="le", n=10))
  assert config.protocol == "le"
  assert config.n_grid == [10]
  assert config.trials == 1
  assert config.base_seed == 0
  assert config.out == "-"
  assert config.workers == 1
  assert config.max_interactions is None
  assert not config.audit
  config.validate()
  assert config.protocol_name == "le"


def test_flags_override_json(tmp_path):
  """Flags win over the JSON file"""
  path = tmp_path / "experiment.json"
  path.write_text(json.dumps({
      "protocol": "majority",
      "n_grid": [11, 21],
      "trials": 4,
      "seed": 9,
      "parameters": {"bias": 3},
      "audit": True,
  }), encoding="utf-8")
  args = ArgsMock(config=str(path), trials=2, param=[("g", 8)])
  config = build_experiment_config(args)
  assert config.protocol == "majority"
  assert config.n_grid == [11, 21]
  assert config.trials == 2
  assert config.base_seed == 9
  assert config.protocol_parameters == {"bias": 3, "g": 8}
  assert config.audit


def test_flag_protocol_replaces_json_protocol_file(tmp_path):
  """--protocol clears a protocol file named in the JSON file"""
  path = tmp_path / "experiment.json"
  path.write_text(
      json.dumps({"protocol_file": "le.proto", "n_grid": [5]}),
      encoding="utf-8",
  )
  config = build_experiment_config(ArgsMock(config=str(path), protocol="le"))
  assert config.protocol == "le"
  assert config.protocol_file == ""


def test_json_errors(tmp_path):
  """Unknown keys and broken files are configuration errors"""
  path = tmp_path / "experiment.json"
  path.write_text(
      json.dumps({"protocol": "le", "population": 10}), encoding="utf-8"
  )
  with pytest.raises(ConfigurationError):
    build_experiment_config(ArgsMock(config=str(path)))
  path.write_text("{not json", encoding="utf-8")
  with pytest.raises(ConfigurationError):
    build_experiment_config(ArgsMock(config=str(path)))
  with pytest.raises(ConfigurationError):
    build_experiment_config(ArgsMock(config=str(tmp_path / "missing.json")))
  path.write_bytes(b'{"trials": \xff}')
  with pytest.raises(ConfigurationError):
    build_experiment_config(ArgsMock(config=str(path)))


def test_workers_from_environment(monkeypatch):
  """SELPOP_WORKERS overrides --workers"""
  monkeypatch.setenv("SELPOP_WORKERS", "3")
  config = build_experiment_config(ArgsMock(protocol="le", n=10, workers=8))
  assert config.workers == 3
  monkeypatch.setenv("SELPOP_WORKERS", "many")
  with pytest.raises(ConfigurationError):
    build_experiment_config(ArgsMock(protocol="le", n=10))


def test_n_and_grid_are_exclusive():
  """--n and --n-grid cannot both be given"""
  with pytest.raises(ConfigurationError):
    build_experiment_config(ArgsMock(protocol="le", n=10, n_grid=[10, 20]))


@pytest.mark.parametrize(
    "args, error",
    [
        (ArgsMock(protocol="le", n=0), EmptyPopulation),
        (ArgsMock(protocol="le"), ConfigurationError),
        (ArgsMock(n=10), ConfigurationError),
        (ArgsMock(protocol="le", n_grid=[20, 10]), ConfigurationError),
        (ArgsMock(protocol="le", n_grid=[10, 10]), ConfigurationError),
        (ArgsMock(protocol="le", n=10, trials=0), ConfigurationError),
        (ArgsMock(protocol="le", n=10, workers=0), ConfigurationError),
        (ArgsMock(protocol="le", n=10, max_interactions=0),
         ConfigurationError),
        (ArgsMock(protocol="quicksort", n=10), ConfigurationError),
        (ArgsMock(protocol="le", n=10, param=[("tickets", 3)]),
         ConfigurationError),
        (ArgsMock(protocol="median-std", n=10), ConfigurationError),
        (ArgsMock(protocol="epidemic", n=1), ConfigurationError),
        (ArgsMock(protocol="le", n=10, param=[("candidates", 0)]),
         ProtocolParameterError),
        (ArgsMock(protocol="mult-slow", n=5), ProtocolParameterError),
        (ArgsMock(protocol="majority", n=10, param=[("g", 3), ("r", 3)]),
         ConfigurationError),
    ],
)
def test_invalid_experiments(args, error):
  """Invalid experiments fail before any trial runs"""
  config = build_experiment_config(args)
  with pytest.raises(error):
    config.validate()


def test_protocol_file(tmp_path):
  """A protocol file is read, parsed and named by its header"""
  path = tmp_path / "spread.proto"
  path.write_text(
      "protocol spread\nmodel standard\nstates: 0, 1\n1 + 0 -> 1 + 1\n",
      encoding="utf-8",
  )
  args = ArgsMock(protocol_file=str(path), n=10, param=[("initial", {"1": 2})])
  config = build_experiment_config(args)
  config.validate()
  assert config.protocol_name == "spread"
  assert config.protocol_text.startswith("protocol spread")


def test_protocol_file_errors(tmp_path):
  """Unreadable and malformed files, and built-in parameters"""
  config = build_experiment_config(
      ArgsMock(protocol_file=str(tmp_path / "missing.proto"), n=10)
  )
  with pytest.raises(ConfigurationError):
    config.validate()
  path = tmp_path / "broken.proto"
  path.write_text("protocol broken\nstates 0, 1\n", encoding="utf-8")
  config = build_experiment_config(ArgsMock(protocol_file=str(path), n=10))
  with pytest.raises(ProtocolSyntaxError):
    config.validate()


def test_parse_parameter():
  """KEY=VALUE with JSON values and a string fallback"""
  assert parse_parameter("bias=3") == ("bias", 3)
  assert parse_parameter("fault=true") == ("fault", True)
  assert parse_parameter("variant=rested") == ("variant", "rested")
  assert parse_parameter('initial={"1": 4}') == ("initial", {"1": 4})
  with pytest.raises(argparse.ArgumentTypeError):
    parse_parameter("bias")
  with pytest.raises(argparse.ArgumentTypeError):
    parse_parameter("=3")


def test_parse_grid():
  """Comma separated sizes"""
  assert parse_grid("100,1000, 10000") == [100, 1000, 10000]
  with pytest.raises(argparse.ArgumentTypeError):
    parse_grid("100,lots")


def test_parse_args():
  """The command line maps onto the configuration"""
  args = parse_args([
      "simulate", "-p", "majority", "--n-grid", "11,21", "-t", "3",
      "--param", "bias=3", "--param", "g=7", "--seed", "5", "--audit",
  ])
  config = build_experiment_config(args)
  assert config.command == "simulate"
  assert config.n_grid == [11, 21]
  assert config.trials == 3
  assert config.base_seed == 5
  assert config.protocol_parameters == {"bias": 3, "g": 7}
  assert config.audit


def test_parse_verify_args():
  """verify takes a suite, a seed and criteria"""
  args = parse_args([
      "verify", "full", "--seed", "3", "--criterion", "Majority",
      "--fault-injection",
  ])
  config = build_experiment_config(args)
  assert config.suite == "full"
  assert config.base_seed == 3
  assert config.criteria == ["Majority"]
  assert config.fault_injection
  args = parse_args(["verify"])
  assert build_experiment_config(args).suite == "fast"
