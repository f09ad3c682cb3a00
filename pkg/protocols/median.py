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

"""Module with the standard-model median protocol.

Agents start in N with hidden keys. Written for the pair (a, b) with the key
of a smaller than the key of b:
  N, N -> L, U
  U, L -> L, U
  U, N -> N, U
  N, L -> L, N
Each line is expanded into two guarded rules, one per initiator role, so the
smaller-key agent always takes the left outcome.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from typing import Any

from engine.population import Population, build_population
from engine.types import Guard, Model
from errors import ModelAssumptionViolated
from metrics.disorder import LOWER, NEUTRAL, UPPER, is_sorted_partition
from protocols.bundle import MedianKey, ProtocolBundle
from rules_dsl.protocol_spec import ProtocolBuilder, ProtocolSpec

# (smaller in, larger in) -> (smaller out, larger out)
ORDERED_RULES = (
    ((NEUTRAL, NEUTRAL), (LOWER, UPPER)),
    ((UPPER, LOWER), (LOWER, UPPER)),
    ((UPPER, NEUTRAL), (NEUTRAL, UPPER)),
    ((NEUTRAL, LOWER), (LOWER, NEUTRAL)),
)


def median_spec() -> ProtocolSpec:
  builder = (
      ProtocolBuilder("median-std", model=Model.STANDARD, comparison=True)
      .states(LOWER, NEUTRAL, UPPER)
  )
  for (small, large), (small_out, large_out) in ORDERED_RULES:
    builder.rule(small, large, small_out, large_out, guard=Guard.LESS)
    builder.rule(large, small, large_out, small_out, guard=Guard.GREATER)
  return builder.build()


def check_median_keys(keys: Sequence[Any]) -> None:
  """Raises ModelAssumptionViolated unless n is odd and keys are distinct."""
  if len(keys) % 2 == 0:
    raise ModelAssumptionViolated(
        f"the median protocols need an odd number of keys, got {len(keys)}"
    )
  ordered = sorted(keys)
  for smaller, larger in zip(ordered, ordered[1:]):
    if not smaller < larger:
      raise ModelAssumptionViolated("the median protocols need distinct keys")


def median_oracle(
    keys: Sequence[Any], lower: str = LOWER, upper: str = UPPER
):
  """Judges a MedianKey against the sorted keys.

  When the output carries a partition, `lower` and `upper` must each hold
  (n - 1) / 2 agents.
  """
  n = len(keys)
  median = sorted(keys)[n // 2]

  def oracle(output: MedianKey) -> bool:
    if output.key != median:
      return False
    if not output.partition:
      return True
    half = (n - 1) // 2
    return (
        output.partition.get(lower, 0) == half
        and output.partition.get(upper, 0) == half
    )

  return oracle


def median_budget(n: int) -> int:
  return int(10 * n * n * math.log(n + 1)) + 10_000


def median_standard(keys: Sequence[Any]) -> ProtocolBundle:
  """Median of `keys` in the standard model with comparisons."""
  keys = tuple(keys)
  check_median_keys(keys)
  spec = median_spec()

  def initial(poison_keys: bool) -> Population:
    return build_population(
        spec, keyed=[(NEUTRAL, key) for key in keys], poison_keys=poison_keys
    )

  def output(pop: Population) -> MedianKey:
    neutral = pop.agents_in(NEUTRAL)
    key = keys[neutral[0]] if len(neutral) == 1 else None
    return MedianKey(
        key=key,
        partition={
            state: pop.count(state) for state in (LOWER, NEUTRAL, UPPER)
        },
    )

  return ProtocolBundle(
      name="median-std",
      spec=spec,
      initial=initial,
      stable=is_sorted_partition,
      output=output,
      oracle=median_oracle(keys),
      budget=median_budget(len(keys)),
  )
