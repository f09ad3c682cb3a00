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

"""Module with the protocol bundle and the protocol outputs.

A bundle ties a spec to its initial population, stability predicate, output
extractor and correctness oracle, so the harness can run any protocol the
same way.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any, Union

from engine.population import Population
from engine.rng import SchedulerRng
from engine.scheduler import Observer, StablePredicate, StallPredicate, run
from engine.trace import Trace
from engine.types import RunLimits, RunResult
from rules_dsl.protocol_spec import ProtocolSpec

G_WINS = "G-wins"
R_WINS = "R-wins"
TIE = "Tie"
UNDECIDED = "Undecided"


@dataclass(frozen=True)
class EpidemicDone:
  informed: int


@dataclass(frozen=True)
class Leader:
  agent: int | None
  leaders: int
  followers: int


@dataclass(frozen=True)
class MajorityVerdict:
  verdict: str


@dataclass(frozen=True)
class ProductSize:
  z: int


@dataclass(frozen=True)
class MedianKey:
  key: Any
  partition: dict[str, int] = field(default_factory=dict)


@dataclass(frozen=True)
class PartitionSummary:
  counts: dict[str, int]


ProtocolOutput = Union[
    EpidemicDone, Leader, MajorityVerdict, ProductSize, MedianKey,
    PartitionSummary,
]

# builds an observer once the population exists
ObserverFactory = Callable[[Population], Observer]


def automatic_budget(n: int, factor: float = 1.0) -> int:
  """Default interaction budget: 200·n·ln(n+1)^2 + 10^4, scaled."""
  return int(factor * 200 * n * math.log(n + 1) ** 2) + 10_000


@dataclass(frozen=True)
class ProtocolBundle:
  """Everything needed to run and judge one protocol instance.

  Attributes:
    name: protocol name as used on the command line.
    spec: the protocol.
    initial: builds the initial population; the flag asks for poisoned keys.
    stable: stability predicate.
    output: reads the protocol output from a final population.
    oracle: judges an output.
    stall: optional stall detector.
    budget: default interaction budget.
    extras: optional (key, value) pairs for the CSV, from the final
      population and trace.
  """

  name: str
  spec: ProtocolSpec
  initial: Callable[[bool], Population]
  stable: StablePredicate
  output: Callable[[Population], ProtocolOutput]
  oracle: Callable[[ProtocolOutput], bool]
  stall: StallPredicate | None = None
  budget: int = 10_000
  extras: Callable[[Population, Trace], list[tuple[str, Any]]] | None = None

  @property
  def n(self) -> int:
    return self.initial(False).n

  def execute(
      self,
      rng: SchedulerRng,
      limits: RunLimits | None = None,
      observer_factories: Sequence[ObserverFactory] = (),
      poison_keys: bool = False,
      keep_responders: bool = False,
      audit: bool = False,
  ) -> tuple[RunResult, Trace]:
    """Runs the protocol from its initial population and judges the output."""
    pop = self.initial(poison_keys)
    limits = limits or RunLimits(self.budget)
    trace = Trace(pop.n, keep_responders=keep_responders)
    result, trace = run(
        pop,
        self.spec,
        rng,
        limits,
        stable=self.stable,
        stall=self.stall,
        trace=trace,
        observers=[factory(pop) for factory in observer_factories],
        audit=audit,
    )
    result.output = self.output(pop)
    result.correct = result.stabilized and self.oracle(result.output)
    if self.extras is not None:
      result.extras = self.extras(pop, trace)
    return result, trace


def count_is(name: str, expected: int) -> StablePredicate:
  """Stability predicate: exactly `expected` agents in state `name`."""

  def predicate(pop: Population) -> bool:
    return pop.count(name) == expected

  return predicate
