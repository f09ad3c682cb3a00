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

"""Module with the stage protocols the fast median controller switches between.

All stages share one state table, so a population can be rebound from one
stage to the next without touching any agent. A state not used by a stage
sits in that stage's `rest` group and never initiates anything.

Agents carry their candidate flag in the state name: `^` marks a median
candidate while coloring (N0^, R3^, ...), and the tags r^ / g^ keep it
through the majority stage.
"""

from __future__ import annotations

import functools
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass

from engine.population import Population
from engine.rng import SchedulerRng
from engine.scheduler import (
    Observer,
    StablePredicate,
    StallPredicate,
    is_stable_generic,
    run,
)
from engine.trace import Trace
from engine.types import RunLimits, RunResult
from rules_dsl.protocol_spec import ProtocolBuilder, ProtocolSpec

DEFAULT_TICKETS = 21
CANDIDATE = "^"
TAGS = ("", CANDIDATE)

LEADER = "L"
CONFIRMED_LEADER = "L*"
FOLLOWER = "F"
LE_STATES = (LEADER, CONFIRMED_LEADER, FOLLOWER)

PIVOT_START = "P_start"
PIVOT = "P"
PIVOT_END = "P_end"
PIVOT_DONE = "P_done"
WINNER_G = "W_G"
WINNER_R = "W_R"
WINNER_N = "W_N"
HANDOVER = "H"
MEDIAN = "median"
LEADER_STATES = (
    PIVOT_START, PIVOT, PIVOT_END, PIVOT_DONE, WINNER_G, WINNER_R, WINNER_N,
    HANDOVER, MEDIAN,
)
PIVOT_STATES = (PIVOT_START, PIVOT)

UNCOLORED = "N0"
UNCOLORED_CANDIDATE = "N0^"
NEUTRAL = "N"
UNCOLORED_STATES = (UNCOLORED, UNCOLORED_CANDIDATE)
NEUTRAL_STATES = (NEUTRAL, NEUTRAL + CANDIDATE)

SETTLED_RED = ("R.r", "R.r^")
SETTLED_GREEN = ("G.g", "G.g^")
MAJORITY_TAGS = ("r", "r^", "g", "g^")
CONFIRMED_RED = tuple(f"R*.{tag}" for tag in MAJORITY_TAGS)
CONFIRMED_GREEN = tuple(f"G*.{tag}" for tag in MAJORITY_TAGS)
MAJORITY_NEUTRAL = tuple(f"N.{tag}" for tag in MAJORITY_TAGS)
MAJORITY_STATES = (
    SETTLED_RED + SETTLED_GREEN + CONFIRMED_RED + CONFIRMED_GREEN
    + MAJORITY_NEUTRAL
)

LOWER = "lower"
UPPER = "upper"
RESULT_STATES = (LOWER, UPPER)


def red(tickets: int, tag: str = "") -> str:
  return f"R{tickets}{tag}"


def green(tickets: int, tag: str = "") -> str:
  return f"G{tickets}{tag}"


def colored_states(tickets: int) -> tuple[str, ...]:
  """R0..RT and G0..GT, plain and candidate."""
  return tuple(
      paint(k, tag)
      for paint in (red, green)
      for k in range(tickets + 1)
      for tag in TAGS
  )


def red_states(tickets: int) -> tuple[str, ...]:
  """States asserting a key below the pivot."""
  return tuple(red(k, tag) for k in range(tickets + 1) for tag in TAGS) + (
      SETTLED_RED
  )


def green_states(tickets: int) -> tuple[str, ...]:
  """States asserting a key above the pivot."""
  return tuple(green(k, tag) for k in range(tickets + 1) for tag in TAGS) + (
      SETTLED_GREEN
  )


def universal_states(tickets: int = DEFAULT_TICKETS) -> tuple[str, ...]:
  """The state table shared by every stage."""
  return (
      LE_STATES
      + LEADER_STATES
      + UNCOLORED_STATES
      + NEUTRAL_STATES
      + colored_states(tickets)
      + MAJORITY_STATES
      + RESULT_STATES
  )


def _with_rest(
    builder: ProtocolBuilder, states: Sequence[str], used: Iterable[str]
) -> ProtocolBuilder:
  used = set(used)
  rest = [state for state in states if state not in used]
  if rest:
    builder.group("rest", *rest)
  return builder


def election_spec(states: Sequence[str]) -> ProtocolSpec:
  """Leader election that hands every follower an N0^ and the leader P_start.

  L + le|L -> L + F
  L + le|null -> L*
  L* + followers|F -> L* + N0^
  N0^ + followers|F -> N0^ + N0^
  L* + followers|null -> P_start
  """
  electing = (LEADER, CONFIRMED_LEADER, UNCOLORED_CANDIDATE)
  builder = (
      ProtocolBuilder("fast-median-election")
      .states(*states)
      .group("le", *electing)
      .group("followers", FOLLOWER)
  )
  return (
      _with_rest(builder, states, electing + (FOLLOWER,))
      .target("le", LEADER)
      .target("followers", CONFIRMED_LEADER, UNCOLORED_CANDIDATE)
      .rule(LEADER, LEADER, LEADER, FOLLOWER)
      .null_rule(LEADER, CONFIRMED_LEADER)
      .rule(CONFIRMED_LEADER, FOLLOWER, CONFIRMED_LEADER, UNCOLORED_CANDIDATE)
      .rule(UNCOLORED_CANDIDATE, FOLLOWER, UNCOLORED_CANDIDATE,
            UNCOLORED_CANDIDATE)
      .null_rule(CONFIRMED_LEADER, PIVOT_START)
      .idle(UNCOLORED_CANDIDATE)
      .build()
  )


def relabel_spec(
    name: str,
    states: Sequence[str],
    mapping: Mapping[str, str],
    leader_from: str,
    leader_to: str,
) -> ProtocolSpec:
  """Leader-driven rewrite of every agent in the domain of `mapping`.

  The leader and every already rewritten agent pull agents out of the old
  states (an epidemic); the leader's emptiness test on the old group ends the
  stage by moving it to `leader_to`.
  """
  domain = tuple(mapping)
  codomain = tuple(dict.fromkeys(mapping.values()))
  fresh = tuple(dict.fromkeys(codomain + (leader_from, leader_to)))
  builder = (
      ProtocolBuilder(name)
      .states(*states)
      .group("old", *domain)
      .group("new", *fresh)
  )
  _with_rest(builder, states, domain + fresh)
  builder.target("old", leader_from, *codomain)
  for initiator in (leader_from,) + codomain:
    for state in domain:
      builder.rule(initiator, state, initiator, mapping[state])
  return builder.null_rule(leader_from, leader_to).idle(*codomain).build()


def reset_mapping(tickets: int) -> dict[str, str]:
  """End of a coloring phase: colors settle, neutral agents become uncolored."""
  mapping = {}
  for k in range(tickets + 1):
    for tag in TAGS:
      mapping[red(k, tag)] = SETTLED_RED[bool(tag)]
      mapping[green(k, tag)] = SETTLED_GREEN[bool(tag)]
  for tag in TAGS:
    mapping[NEUTRAL + tag] = UNCOLORED + tag
  return mapping


def majority_stage_spec(states: Sequence[str]) -> ProtocolSpec:
  """Majority over the settled colors, every agent keeping its tag.

  Settled red agents R.r / R.r^ play R, settled green agents play G; a
  tag follows its agent through N.t, R*.t and G*.t.
  """
  builder = (
      ProtocolBuilder("fast-median-majority")
      .states(*states)
      .group("G_R", *SETTLED_RED, *CONFIRMED_RED)
      .group("G_N", *MAJORITY_NEUTRAL)
      .group("G_G", *SETTLED_GREEN, *CONFIRMED_GREEN)
  )
  _with_rest(builder, states, MAJORITY_STATES)
  builder.target("G_G", *SETTLED_RED)
  builder.target("G_R", *SETTLED_GREEN)
  builder.target("G_N", *CONFIRMED_RED, *CONFIRMED_GREEN)
  for red_state in SETTLED_RED:
    for green_state in SETTLED_GREEN:
      builder.rule(
          red_state, green_state, _neutral_of(red_state),
          _neutral_of(green_state),
      )
      builder.rule(
          green_state, red_state, _neutral_of(green_state),
          _neutral_of(red_state),
      )
  for red_state in SETTLED_RED:
    builder.null_rule(red_state, "R*." + _tag_of(red_state))
  for green_state in SETTLED_GREEN:
    builder.null_rule(green_state, "G*." + _tag_of(green_state))
  for confirmed in CONFIRMED_RED + CONFIRMED_GREEN:
    winner = confirmed.split(".")[0]
    for neutral in MAJORITY_NEUTRAL:
      builder.rule(
          confirmed, neutral, confirmed, f"{winner}.{_tag_of(neutral)}"
      )
  return builder.idle(*CONFIRMED_RED, *CONFIRMED_GREEN).build()


def _tag_of(state: str) -> str:
  return state.split(".", 1)[1]


def _neutral_of(state: str) -> str:
  return "N." + _tag_of(state)


def probe_spec(states: Sequence[str]) -> ProtocolSpec:
  """The pivot reads the majority outcome off one agent."""
  leader = (PIVOT_DONE, WINNER_G, WINNER_R, WINNER_N)
  builder = (
      ProtocolBuilder("fast-median-probe")
      .states(*states)
      .group("leader", *leader)
      .group("outcome", *MAJORITY_STATES)
  )
  _with_rest(builder, states, leader + MAJORITY_STATES)
  builder.target("outcome", PIVOT_DONE)
  for state in CONFIRMED_GREEN:
    builder.rule(PIVOT_DONE, state, WINNER_G, state)
  for state in CONFIRMED_RED:
    builder.rule(PIVOT_DONE, state, WINNER_R, state)
  for state in MAJORITY_NEUTRAL:
    builder.rule(PIVOT_DONE, state, WINNER_N, state)
  return builder.null_rule(PIVOT_DONE, WINNER_N).build()


def verdict_mapping(winner: str) -> dict[str, str]:
  """Candidates on the winning side stay candidates, all others drop out."""
  kept = "g^" if winner == WINNER_G else "r^"
  return {
      state: (
          UNCOLORED_CANDIDATE if _tag_of(state) == kept else UNCOLORED
      )
      for state in MAJORITY_STATES
  }


def tie_mapping() -> dict[str, str]:
  return {
      state: LOWER if _tag_of(state).startswith("r") else UPPER
      for state in MAJORITY_STATES
  }


def handover_spec(states: Sequence[str]) -> ProtocolSpec:
  """The old pivot passes the pivot role to the first candidate it meets."""
  builder = (
      ProtocolBuilder("fast-median-handover")
      .states(*states)
      .group("candidates", UNCOLORED_CANDIDATE)
      .group("handover", HANDOVER)
  )
  return (
      _with_rest(builder, states, (UNCOLORED_CANDIDATE, HANDOVER))
      .target("candidates", HANDOVER)
      .rule(HANDOVER, UNCOLORED_CANDIDATE, UNCOLORED, PIVOT_START)
      .idle(HANDOVER)
      .build()
  )


def merge_diagnostics(into: list[str], codes: Sequence[str]) -> None:
  for code in codes:
    if code not in into:
      into.append(code)


def any_of(names: Sequence[str]) -> StablePredicate:
  def predicate(pop: Population) -> bool:
    return pop.count_of(names) > 0

  return predicate


@dataclass
class StageBudget:
  """Interactions left for the remaining stages of one run."""

  remaining: int
  period: int | None = None

  @property
  def exhausted(self) -> bool:
    return self.remaining <= 0

  def limits(self) -> RunLimits:
    return RunLimits(self.remaining, self.period)


def run_stage(
    pop: Population,
    spec: ProtocolSpec,
    rng: SchedulerRng,
    trace: Trace,
    budget: StageBudget,
    stable: StablePredicate | None = None,
    stall: StallPredicate | None = None,
    observers: Sequence[Observer] = (),
    audit: bool = False,
) -> RunResult:
  """Runs one stage on the shared trace and charges it to the budget."""
  if stable is None:
    stable = functools.partial(is_stable_generic, spec=spec)
  if budget.exhausted:
    if pop.spec is not spec:
      pop.rebind(spec)
    done = stable(pop)
    return RunResult(
        stabilized=done,
        interactions=0,
        final_counts=pop.counts_by_name(),
        diagnostics=[] if done else ["NotStabilized"],
    )
  result, _ = run(
      pop,
      spec,
      rng,
      budget.limits(),
      stable=stable,
      stall=stall,
      trace=trace,
      observers=observers,
      audit=audit,
  )
  budget.remaining -= result.interactions
  return result


@dataclass(frozen=True)
class FastMedianStages:
  """Every stage protocol of one fast median configuration."""

  tickets: int
  states: tuple[str, ...]
  election: ProtocolSpec
  coloring: ProtocolSpec
  reset: ProtocolSpec
  majority: ProtocolSpec
  probe: ProtocolSpec
  verdict_g: ProtocolSpec
  verdict_r: ProtocolSpec
  tie: ProtocolSpec
  handover: ProtocolSpec

  def all_specs(self) -> tuple[ProtocolSpec, ...]:
    return (
        self.election, self.coloring, self.reset, self.majority, self.probe,
        self.verdict_g, self.verdict_r, self.tie, self.handover,
    )
