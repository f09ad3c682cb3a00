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

"""Module with the one-way epidemic protocols.

Selective, stop variant: informers target the uninformed group and stop on
an emptiness test.
  1 + G0|0 -> 1 + 1
  1 + G0|null -> Stop

Selective, rested variant (single informer): the uninformed pull the
message from the informer group, which then rests.
  0 + G1|1 -> 1* + 1
  1 + G0|null -> 1*

Standard model:
  1 + 0 -> 1 + 1
"""

from __future__ import annotations

from engine.population import build_population
from engine.types import Model
from errors import ConfigurationError, ProtocolParameterError
from protocols.bundle import EpidemicDone, ProtocolBundle, automatic_budget
from rules_dsl.protocol_spec import ProtocolBuilder, ProtocolSpec

STOP_VARIANT = "stop"
RESTED_VARIANT = "rested"
VARIANTS = (STOP_VARIANT, RESTED_VARIANT)


def stop_spec() -> ProtocolSpec:
  return (
      ProtocolBuilder("epidemic")
      .states("0", "1", "Stop")
      .group("G0", "0")
      .group("G1", "1", "Stop")
      .target("G0", "1")
      .rule("1", "0", "1", "1")
      .null_rule("1", "Stop")
      .build()
  )


def rested_spec() -> ProtocolSpec:
  return (
      ProtocolBuilder("epidemic-rested")
      .states("0", "1", "1*")
      .group("G0", "0")
      .group("G1", "1")
      .group("G1*", "1*")
      .target("G1", "0")
      .target("G0", "1")
      .rule("0", "1", "1*", "1")
      .null_rule("1", "1*")
      .build()
  )


def standard_spec() -> ProtocolSpec:
  return (
      ProtocolBuilder("epidemic-std", model=Model.STANDARD)
      .states("0", "1")
      .rule("1", "0", "1", "1")
      .build()
  )


def _check_size(n: int, informers: int) -> None:
  if n < 2:
    raise ProtocolParameterError(f"epidemic needs n >= 2, got {n}")
  if not 1 <= informers <= n:
    raise ProtocolParameterError(
        f"epidemic needs 1 <= informers <= n, got {informers}"
    )


def _informed(pop) -> EpidemicDone:
  return EpidemicDone(informed=pop.n - pop.count("0"))


# informers in state 1 stop or rest only once the uninformed group is empty
def _no_active_informer(pop) -> bool:
  return pop.count("1") == 0


def epidemic_selective(
    n: int, variant: str = STOP_VARIANT, informers: int = 1
) -> ProtocolBundle:
  """Selective epidemic from `informers` informed agents.

  The rested variant is the single-informer protocol and ignores
  `informers`.
  """
  if variant not in VARIANTS:
    raise ConfigurationError(
        f"unknown epidemic variant {variant!r}; use one of {VARIANTS}"
    )
  if variant == RESTED_VARIANT:
    informers = 1
  _check_size(n, informers)
  spec = stop_spec() if variant == STOP_VARIANT else rested_spec()
  counts = {"1": informers, "0": n - informers}

  def initial(_poison_keys: bool):
    return build_population(spec, counts=counts)

  return ProtocolBundle(
      name="epidemic",
      spec=spec,
      initial=initial,
      stable=_no_active_informer,
      output=_informed,
      oracle=lambda output: output.informed == n,
      budget=automatic_budget(n),
  )


def epidemic_standard(n: int, informers: int = 1) -> ProtocolBundle:
  _check_size(n, informers)
  spec = standard_spec()
  counts = {"1": informers, "0": n - informers}

  def initial(_poison_keys: bool):
    return build_population(spec, counts=counts)

  return ProtocolBundle(
      name="epidemic-std",
      spec=spec,
      initial=initial,
      stable=lambda pop: pop.count("0") == 0,
      output=_informed,
      oracle=lambda output: output.informed == n,
      budget=automatic_budget(n),
  )

