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

"""Module with the builder functions named by the protocol registry.

Every builder takes the population size, the protocol parameters and a key
generator and returns something with the bundle run interface. The registry
in protocol_configs.protocols refers to them by name.
"""

from __future__ import annotations

from collections.abc import Mapping
from typing import Any

from engine.population import Population, build_population
from engine.rng import SchedulerRng
from engine.scheduler import is_stable_generic
from errors import ConfigurationError, ProtocolParameterError
from protocols.bundle import PartitionSummary, ProtocolBundle, automatic_budget
from protocols.epidemic import (
    STOP_VARIANT,
    epidemic_selective,
    epidemic_standard,
    standard_spec,
    stop_spec,
)
from protocols.fast_median import FastMedian, fast_median
from protocols.leader_election import le_spec, leader_election
from protocols.majority import majority, majority_spec, split_for_bias
from protocols.median import median_spec, median_standard
from protocols.multiplication import (
    fast_spec,
    multiply_fast,
    multiply_slow,
    slow_spec,
)
from protocols.stages import DEFAULT_TICKETS
from rules_dsl.protocol_spec import ProtocolSpec

DEFAULT_FACTOR = 2
DEFAULT_MULTIPLIER = 3


def _int_parameter(parameters: Mapping[str, Any], name: str, default: int):
  value = parameters.get(name, default)
  if value is None:
    return None
  if isinstance(value, bool) or not isinstance(value, int):
    raise ConfigurationError(f"parameter {name} must be an integer: {value!r}")
  return value


def median_keys(n: int, key_rng: SchedulerRng) -> list[int]:
  """Hidden keys of a median run: a seeded permutation of 1..n."""
  return key_rng.permutation(n)


def build_epidemic(
    n: int, parameters: Mapping[str, Any], key_rng: SchedulerRng
) -> ProtocolBundle:
  del key_rng
  return epidemic_selective(
      n,
      variant=parameters.get("variant", STOP_VARIANT),
      informers=_int_parameter(parameters, "informers", 1),
  )


def build_epidemic_standard(
    n: int, parameters: Mapping[str, Any], key_rng: SchedulerRng
) -> ProtocolBundle:
  del key_rng
  return epidemic_standard(
      n, informers=_int_parameter(parameters, "informers", 1)
  )


def build_leader_election(
    n: int, parameters: Mapping[str, Any], key_rng: SchedulerRng
) -> ProtocolBundle:
  del key_rng
  return leader_election(
      n, candidates=_int_parameter(parameters, "candidates", None)
  )


def build_majority(
    n: int, parameters: Mapping[str, Any], key_rng: SchedulerRng
) -> ProtocolBundle:
  """Explicit g and r win over `bias` (default 1)."""
  del key_rng
  g = _int_parameter(parameters, "g", None)
  r = _int_parameter(parameters, "r", None)
  if g is None and r is None:
    g, r = split_for_bias(n, _int_parameter(parameters, "bias", 1))
  elif g is None:
    g = n - r
  elif r is None:
    r = n - g
  if g + r != n:
    raise ConfigurationError(f"majority with g={g} and r={r} needs n={g + r}")
  return majority(g, r)


def _multiplication_counts(
    n: int, parameters: Mapping[str, Any]
) -> tuple[int, int, int]:
  x = _int_parameter(parameters, "x", DEFAULT_FACTOR)
  y = _int_parameter(parameters, "y", DEFAULT_MULTIPLIER)
  free = _int_parameter(parameters, "free", None)
  if free is None:
    free = n - x - y - 1
  if x + y + free + 1 != n:
    raise ConfigurationError(
        f"x={x}, y={y}, free={free} and the leader make"
        f" {x + y + free + 1} agents, not n={n}"
    )
  if free < 0:
    raise ProtocolParameterError(
        f"n={n} is too small for x={x}, y={y} and the leader"
    )
  return x, y, free


def build_multiply_slow(
    n: int, parameters: Mapping[str, Any], key_rng: SchedulerRng
) -> ProtocolBundle:
  del key_rng
  return multiply_slow(*_multiplication_counts(n, parameters))


def build_multiply_fast(
    n: int, parameters: Mapping[str, Any], key_rng: SchedulerRng
) -> ProtocolBundle:
  del key_rng
  return multiply_fast(*_multiplication_counts(n, parameters))


def build_median_standard(
    n: int, parameters: Mapping[str, Any], key_rng: SchedulerRng
) -> ProtocolBundle:
  del parameters
  return median_standard(median_keys(n, key_rng))


def build_median_fast(
    n: int, parameters: Mapping[str, Any], key_rng: SchedulerRng
) -> FastMedian:
  return fast_median(
      median_keys(n, key_rng),
      tickets=_int_parameter(parameters, "tickets", DEFAULT_TICKETS),
      fault=bool(parameters.get("fault", False)),
      max_iterations=_int_parameter(parameters, "max_iterations", None),
  )


def build_from_spec(
    spec: ProtocolSpec, n: int, parameters: Mapping[str, Any]
) -> ProtocolBundle:
  """Bundle for a protocol read from a file.

  The `initial` parameter maps state names to agent counts; agents not
  listed there start in the first declared state. Without it one agent
  starts in the second declared state. The run is correct when it
  stabilizes.
  """
  if spec.comparison_model:
    raise ConfigurationError(
        f"protocol {spec.name} compares keys and has no stability predicate;"
        " run it as a built-in"
    )
  initial_counts = dict(parameters.get("initial") or {})
  if not initial_counts and len(spec.states) > 1:
    initial_counts = {spec.states[1]: 1}
  placed = sum(initial_counts.values())
  if placed > n:
    raise ConfigurationError(
        f"the initial configuration places {placed} agents, n is {n}"
    )
  counts = {spec.states[0]: n - placed}
  for name, count in initial_counts.items():
    counts[name] = counts.get(name, 0) + count

  def initial(_poison_keys: bool) -> Population:
    return build_population(spec, counts=counts)

  def stable(pop: Population) -> bool:
    return is_stable_generic(pop, spec)

  return ProtocolBundle(
      name=spec.name,
      spec=spec,
      initial=initial,
      stable=stable,
      output=lambda pop: PartitionSummary(pop.counts_by_name()),
      oracle=lambda output: True,
      budget=automatic_budget(n),
  )


# Specs of the protocols that are single rule tables, for printing and
# round trips through the protocol text format.


def epidemic_table() -> ProtocolSpec:
  return stop_spec()


def epidemic_standard_table() -> ProtocolSpec:
  return standard_spec()


def leader_election_table() -> ProtocolSpec:
  return le_spec()


def majority_table() -> ProtocolSpec:
  return majority_spec()


def median_standard_table() -> ProtocolSpec:
  return median_spec()


def multiply_slow_table() -> ProtocolSpec:
  return slow_spec()


def multiply_fast_table() -> ProtocolSpec:
  return fast_spec()
