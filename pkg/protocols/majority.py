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

"""Module with the selective majority protocol.

Groups G_R = {R, R*}, G_N = {N} and G_G = {G, G*}. Opposite opinions cancel
into N; an opinion that finds the opposite group empty confirms itself and
then converts the neutral agents.
  R + G_G|G -> N + N         G + G_R|R -> N + N
  R + G_G|null -> R*         G + G_R|null -> G*
  R* + G_N|N -> R* + R*      G* + G_N|N -> G* + G*

G - R is invariant under the cancelling rules.
"""

from __future__ import annotations

import functools

from engine.population import Population, build_population
from engine.scheduler import is_stable_generic
from errors import ProtocolParameterError
from protocols.bundle import (
    G_WINS,
    MajorityVerdict,
    ProtocolBundle,
    R_WINS,
    TIE,
    UNDECIDED,
    automatic_budget,
)
from rules_dsl.protocol_spec import ProtocolBuilder, ProtocolSpec


def majority_spec() -> ProtocolSpec:
  return (
      ProtocolBuilder("majority")
      .states("R", "R*", "G", "G*", "N")
      .group("G_R", "R", "R*")
      .group("G_N", "N")
      .group("G_G", "G", "G*")
      .target("G_G", "R")
      .target("G_R", "G")
      .target("G_N", "R*", "G*")
      .rule("R", "G", "N", "N")
      .rule("G", "R", "N", "N")
      .null_rule("R", "R*")
      .null_rule("G", "G*")
      .rule("R*", "N", "R*", "R*")
      .rule("G*", "N", "G*", "G*")
      .idle("R*", "G*")
      .build()
  )


def verdict_of(pop: Population) -> MajorityVerdict:
  n = pop.n
  if pop.count("G*") == n:
    return MajorityVerdict(G_WINS)
  if pop.count("R*") == n:
    return MajorityVerdict(R_WINS)
  if pop.count("N") == n:
    return MajorityVerdict(TIE)
  return MajorityVerdict(UNDECIDED)


def expected_verdict(g: int, r: int) -> str:
  if g > r:
    return G_WINS
  if r > g:
    return R_WINS
  return TIE


def split_for_bias(n: int, bias: int) -> tuple[int, int]:
  """(g, r) with g + r = n and g - r = bias, rounding r down."""
  r = (n - bias) // 2
  return n - r, r


def majority(g: int, r: int) -> ProtocolBundle:
  """Majority between g agents in G and r agents in R."""
  if g < 0 or r < 0 or g + r < 1:
    raise ProtocolParameterError(
        f"majority needs g, r >= 0 and g + r >= 1, got g={g} r={r}"
    )
  spec = majority_spec()
  counts = {"G": g, "R": r}
  expected = expected_verdict(g, r)

  def initial(_poison_keys: bool) -> Population:
    return build_population(spec, counts=counts)

  return ProtocolBundle(
      name="majority",
      spec=spec,
      initial=initial,
      stable=functools.partial(is_stable_generic, spec=spec),
      output=verdict_of,
      oracle=lambda output: output.verdict == expected,
      budget=automatic_budget(g + r),
  )
