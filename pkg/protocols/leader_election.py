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

"""Module with the selective leader election protocol.

Groups G0 = {L, L*, F*} and G1 = {F}. Candidates eliminate each other until
one is alone in G0, confirm themselves on the singleton test and then inform
every follower.
  L + G0|L -> L + F
  L + G0|null -> L*
  L* + G1|F -> L* + F*
  F* + G1|F -> F* + F*
"""

from __future__ import annotations

from engine.population import Population, build_population
from errors import NoCandidate, ProtocolParameterError
from protocols.bundle import Leader, ProtocolBundle, automatic_budget
from rules_dsl.protocol_spec import ProtocolBuilder, ProtocolSpec


def le_spec() -> ProtocolSpec:
  return (
      ProtocolBuilder("le")
      .states("L", "L*", "F", "F*")
      .group("G0", "L", "L*", "F*")
      .group("G1", "F")
      .target("G0", "L")
      .target("G1", "L*", "F*")
      .rule("L", "L", "L", "F")
      .null_rule("L", "L*")
      .rule("L*", "F", "L*", "F*")
      .rule("F*", "F", "F*", "F*")
      .idle("L*", "F*")
      .build()
  )


def leader_output(pop: Population) -> Leader:
  leaders = pop.count("L*")
  agents = pop.agents_in("L*") if leaders == 1 else []
  return Leader(
      agent=agents[0] if agents else None,
      leaders=leaders,
      followers=pop.count("F*"),
  )


def leader_election(n: int, candidates: int | None = None) -> ProtocolBundle:
  """Leader election among `candidates` agents (default all n)."""
  if candidates is None:
    candidates = n
  if candidates == 0:
    raise NoCandidate("leader election needs at least one candidate")
  if not 1 <= candidates <= n:
    raise ProtocolParameterError(
        f"leader election needs 1 <= candidates <= n, got {candidates} of {n}"
    )
  spec = le_spec()
  counts = {"L": candidates, "F": n - candidates}

  def initial(_poison_keys: bool) -> Population:
    return build_population(spec, counts=counts)

  def stable(pop: Population) -> bool:
    return pop.count("L*") == 1 and pop.count("F*") == n - 1

  return ProtocolBundle(
      name="le",
      spec=spec,
      initial=initial,
      stable=stable,
      output=leader_output,
      oracle=lambda output: output.leaders == 1 and output.followers == n - 1,
      budget=automatic_budget(n),
  )
