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

"""Module with the two leader-driven multiplication protocols.

Both build a subpopulation Z with |Z| = |X|·|Y| out of free agents. The slow
protocol deletes X one agent at a time and adds |Y| agents to Z for each. The
fast protocol halves Y per round, adds b·|X| to Z for the parity bit b and
doubles X, so it runs bitlen(|Y|) rounds.
"""

from __future__ import annotations

import logging

from engine.population import Population, build_population
from engine.trace import Trace
from errors import ProtocolParameterError
from protocols.bundle import ProductSize, ProtocolBundle, count_is
from rules_dsl.protocol_spec import ProtocolBuilder, ProtocolSpec

logger = logging.getLogger(__name__)

FREE_POOL_EXHAUSTED = "FreePoolExhausted"

SLOW_LEADER_STATES = ("L_in", "L_y", "L_z", "L_y^", "L_out")
FAST_LEADER_STATES = (
    "L_in", "L_out", "L", "L0", "L1", "L0_in", "L1_in", "L'", "L''",
)


def slow_spec() -> ProtocolSpec:
  return (
      ProtocolBuilder("mult-slow")
      .states(*SLOW_LEADER_STATES, "x", "y", "y^", "z", "free")
      .group("G_x", "x")
      .group("G_y", "y")
      .group("G_y^", "y^")
      .group("G_z", "z")
      .group("G_R", *SLOW_LEADER_STATES, "free")
      .target("G_x", "L_in")
      .target("G_y", "L_y")
      .target("G_R", "L_z")
      .target("G_y^", "L_y^")
      .rule("L_in", "x", "L_y", "free")
      .null_rule("L_in", "L_out")
      .rule("L_y", "y", "L_z", "y^")
      .null_rule("L_y", "L_y^")
      .rule("L_z", "free", "L_y", "z")
      .rule("L_y^", "y^", "L_y^", "y")
      .null_rule("L_y^", "L_in")
      # a leader alone in G_R waits for free agents that never come
      .idle("L_z")
      .build()
  )


def fast_spec() -> ProtocolSpec:
  builder = (
      ProtocolBuilder("mult-fast")
      .states(*FAST_LEADER_STATES)
      .states("A", "A'", "A''", "B", "C0", "C0*", "C1", "C1*", "D")
      .states("X", "Y", "Z", "free")
      .group("G_L", *FAST_LEADER_STATES)
      .group("G_A", "A", "A'", "A''")
      .group("G_B", "B")
      .group("G_C", "C0", "C0*", "C1", "C1*")
      .group("G_D", "D")
      .group("G_X", "X")
      .group("G_Y", "Y")
      .group("G_Z", "Z")
      .group("G_f", "free")
      .target("G_Y", "L_in", "A")
      .target("G_A", "A'", "L", "B")
      .target("G_B", "L0", "L1")
      .target("G_X", "L0_in", "L1_in", "C0", "C1")
      .target("G_f", "C0*", "C1*")
      .target("G_C", "D", "L'")
      .target("G_D", "L''")
  )
  # halve Y, leader learns the parity bit
  (
      builder.null_rule("L_in", "L_out")
      .rule("L_in", "Y", "L", "A")
      .rule("A", "Y", "A", "A")
      .null_rule("A", "A'")
      .rule("A'", "A", "B", "free")
      .rule("A'", "A'", "B", "free")
      .null_rule("A'", "A''")
      .rule("L", "A''", "L1", "free")
      .null_rule("L", "L0")
      .null_rule("B", "Y")
      .null_rule("L0", "L0_in")
      .null_rule("L1", "L1_in")
  )
  # add bit·|X| to Z and double X
  for bit in ("0", "1"):
    (
        builder.rule(f"L{bit}_in", "X", "L'", f"C{bit}")
        .null_rule(f"L{bit}_in", "L_in")
        .rule(f"C{bit}", "X", f"C{bit}", f"C{bit}")
        .null_rule(f"C{bit}", f"C{bit}*")
    )
  return (
      builder.rule("C1*", "free", "C0*", "Z")
      .rule("C0*", "free", "D", "D")
      .idle("C0*", "C1*")
      .null_rule("D", "X")
      .null_rule("L'", "L''")
      .null_rule("L''", "L_in")
      .build()
  )


def rounds_needed(y: int) -> int:
  return y.bit_length()


def slow_free_requirement(x: int, y: int) -> int:
  return x * y


def fast_free_requirement(x: int, y: int) -> int:
  return x * (2 ** rounds_needed(y) - 1) + x * y


def _check_counts(name: str, x: int, y: int, free: int) -> None:
  if min(x, y, free) < 0:
    raise ProtocolParameterError(
        f"{name} needs x, y, free >= 0, got x={x} y={y} free={free}"
    )


def _slow_product(pop: Population) -> ProductSize:
  return ProductSize(z=pop.count("z"))


def _fast_product(pop: Population) -> ProductSize:
  return ProductSize(z=pop.count("Z"))


def _slow_stall(pop: Population) -> str | None:
  if pop.count("free") == 0 and pop.count("L_z") == 1:
    return FREE_POOL_EXHAUSTED
  return None


def _fast_stall(pop: Population) -> str | None:
  if pop.count("free") == 0 and pop.count_of(("C0*", "C1*")):
    return FREE_POOL_EXHAUSTED
  return None


def multiply_slow(x: int, y: int, free: int | None = None) -> ProtocolBundle:
  """|Z| = x·y by repeated addition; n = x + y + free + 1 (the leader)."""
  if free is None:
    free = slow_free_requirement(x, y)
  _check_counts("mult-slow", x, y, free)
  if free < slow_free_requirement(x, y):
    logger.warning(
        "mult-slow with %d free agents for x·y = %d may stall", free, x * y
    )
  spec = slow_spec()
  counts = {"L_in": 1, "x": x, "y": y, "free": free}
  n = x + y + free + 1

  def initial(_poison_keys: bool) -> Population:
    return build_population(spec, counts=counts)

  return ProtocolBundle(
      name="mult-slow",
      spec=spec,
      initial=initial,
      stable=count_is("L_out", 1),
      output=_slow_product,
      oracle=lambda output: output.z == x * y,
      stall=_slow_stall,
      budget=50 * n * (x * y + x + y + 2) + 10_000,
  )


def multiply_fast(x: int, y: int, free: int | None = None) -> ProtocolBundle:
  """|Z| = x·y by halving Y; n = x + y + free + 1 (the leader)."""
  if free is None:
    free = fast_free_requirement(x, y)
  _check_counts("mult-fast", x, y, free)
  if free < fast_free_requirement(x, y):
    logger.warning(
        "mult-fast with %d free agents, %d needed, may stall",
        free,
        fast_free_requirement(x, y),
    )
  spec = fast_spec()
  counts = {"L_in": 1, "X": x, "Y": y, "free": free}
  n = x + y + free + 1
  halving_rule = spec.rules.index(next(
      rule for rule in spec.rules
      if rule.initiator == "L_in" and rule.responder == "Y"
  ))

  def initial(_poison_keys: bool) -> Population:
    return build_population(spec, counts=counts)

  def extras(_pop: Population, trace: Trace) -> list[tuple[str, int]]:
    return [("rounds", trace.fires(spec.name, halving_rule))]

  return ProtocolBundle(
      name="mult-fast",
      spec=spec,
      initial=initial,
      stable=count_is("L_out", 1),
      output=_fast_product,
      oracle=lambda output: output.z == x * y,
      stall=_fast_stall,
      budget=int(400 * n * (rounds_needed(y) + 1) * (n.bit_length() + 1))
      + 10_000,
      extras=extras,
  )
