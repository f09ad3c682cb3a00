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

"""Module with the registry of the built-in protocols."""

from errors import ConfigurationError


def get_protocol_configs() -> list[dict]:
  """Gets all the built-in protocols.

  Returns:
    protocol_configs: one dict per protocol. `builder_function` and
    `spec_function` name functions of protocols.protocol_modules; the spec
    function is absent for composed protocols without a single rule table.
  """
  protocol_configs = [
      {
          "id": "epidemic",
          "name": "One-way epidemic",
          "model": "selective",
          "description": (
              "Informers spread the message to the uninformed group and stop"
              " on an emptiness test."
          ),
          "parameters": {"variant": "stop", "informers": 1},
          "min_n": 2,
          "builder_function": "build_epidemic",
          "spec_function": "epidemic_table",
      },
      {
          "id": "epidemic-std",
          "name": "One-way epidemic, standard model",
          "model": "standard",
          "description": "1 + 0 -> 1 + 1 under the uniform pair scheduler.",
          "parameters": {"informers": 1},
          "min_n": 2,
          "builder_function": "build_epidemic_standard",
          "spec_function": "epidemic_standard_table",
      },
      {
          "id": "le",
          "name": "Leader election",
          "model": "selective",
          "description": (
              "Candidates eliminate each other until a singleton test"
              " confirms the leader, which then informs the followers."
          ),
          "parameters": {"candidates": None},
          "min_n": 1,
          "builder_function": "build_leader_election",
          "spec_function": "leader_election_table",
      },
      {
          "id": "majority",
          "name": "Majority",
          "model": "selective",
          "description": (
              "Decides whether G or R holds more agents, or reports a tie."
          ),
          "parameters": {"bias": 1, "g": None, "r": None},
          "min_n": 1,
          "builder_function": "build_majority",
          "spec_function": "majority_table",
      },
      {
          "id": "mult-slow",
          "name": "Multiplication by repeated addition",
          "model": "selective",
          "description": "A leader builds |Z| = |X|·|Y| one agent at a time.",
          "parameters": {"x": 2, "y": 3, "free": None},
          "min_n": 1,
          "builder_function": "build_multiply_slow",
          "spec_function": "multiply_slow_table",
      },
      {
          "id": "mult-fast",
          "name": "Multiplication by halving",
          "model": "selective",
          "description": (
              "A leader halves Y and doubles X each round, adding X to Z on"
              " odd remainders."
          ),
          "parameters": {"x": 2, "y": 3, "free": None},
          "min_n": 1,
          "builder_function": "build_multiply_fast",
          "spec_function": "multiply_fast_table",
      },
      {
          "id": "median-std",
          "name": "Median, standard model",
          "model": "standard",
          "description": (
              "Agents with hidden keys sort themselves into L, N and U by"
              " pairwise comparisons."
          ),
          "parameters": {},
          "min_n": 3,
          "odd_n": True,
          "builder_function": "build_median_standard",
          "spec_function": "median_standard_table",
      },
      {
          "id": "median-fast",
          "name": "Median by pivot partitioning",
          "model": "selective",
          "description": (
              "A leader pivot partitions the keys by coloring, majority picks"
              " the side holding the median, repeated until a tie."
          ),
          "parameters": {
              "tickets": 21,
              "fault": False,
              "max_iterations": None,
          },
          "min_n": 1,
          "odd_n": True,
          "builder_function": "build_median_fast",
      },
  ]
  return protocol_configs


def get_protocol_config(protocol_id: str) -> dict:
  """Looks a protocol up by id. Raises ConfigurationError when unknown."""
  for protocol_config in get_protocol_configs():
    if protocol_config.get("id") == protocol_id:
      return protocol_config
  known = ", ".join(config["id"] for config in get_protocol_configs())
  raise ConfigurationError(
      f"unknown protocol {protocol_id!r}; use one of {known}"
  )
