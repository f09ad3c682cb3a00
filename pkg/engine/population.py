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

"""Module with the agent population and its group index.

Each group keeps a dense list of its member agents and every agent remembers
its position in that list. Moving an agent between groups swaps the last
member into the vacated slot, so insert, delete and uniform sampling are all
constant time.
"""

from __future__ import annotations

import functools
from collections.abc import Iterable, Mapping, Sequence
from typing import Any

from errors import (
    DuplicateKey,
    EmptyPopulation,
    IllegalKeyRead,
    InvariantBreach,
    PopulationError,
    UnknownState,
)
from rules_dsl.protocol_spec import ProtocolSpec


class PoisonedKey:
  """Wraps a key so that anything but `<` raises IllegalKeyRead."""

  __slots__ = ("_value",)

  def __init__(self, value: Any):
    self._value = value

  def __lt__(self, other: Any) -> bool:
    if not isinstance(other, PoisonedKey):
      raise IllegalKeyRead("hidden keys only compare with other hidden keys")
    return self._value < other._value

  def _illegal(self, *_args: Any) -> Any:
    raise IllegalKeyRead("hidden keys can only be compared with <")

  __gt__ = __le__ = __ge__ = __eq__ = __ne__ = _illegal
  __hash__ = __int__ = __float__ = __index__ = __bool__ = _illegal
  __str__ = __format__ = _illegal

  def __repr__(self) -> str:
    return "PoisonedKey(<hidden>)"


class Population:
  """Per-agent states, optional hidden keys and the group index.

  Agents are ids 0..n-1. States are indices into the bound spec's state
  table. Keys are reachable only through `key_less` and `key_order`.
  """

  def __init__(
      self,
      spec: ProtocolSpec,
      state_of: Sequence[int],
      keys: Sequence[Any] | None = None,
  ):
    if not state_of:
      raise EmptyPopulation("a population needs at least one agent")
    self.n = len(state_of)
    self.state_of = list(state_of)
    self._keys = tuple(keys) if keys is not None else None
    self._key_order: list[int] | None = None
    self.counts = [0] * len(spec.states)
    for state in self.state_of:
      self.counts[state] += 1
    self._bind(spec)

  def _bind(self, spec: ProtocolSpec) -> None:
    compiled = spec.compiled
    self.spec = spec
    self.group_of_state = compiled.group_of
    self.members: list[list[int]] = [[] for _ in range(compiled.group_count)]
    self.position = [0] * self.n
    for agent, state in enumerate(self.state_of):
      group = self.members[self.group_of_state[state]]
      self.position[agent] = len(group)
      group.append(agent)

  def rebind(self, spec: ProtocolSpec) -> None:
    """Switches to another spec over the same state table."""
    if spec.states != self.spec.states:
      raise UnknownState(
          f"cannot rebind {self.spec.name} to {spec.name}: state tables differ"
      )
    self._bind(spec)

  @property
  def has_keys(self) -> bool:
    return self._keys is not None

  def key_less(self, first: int, second: int) -> bool:
    """The two-outcome comparator: key of `first` < key of `second`."""
    return self._keys[first] < self._keys[second]

  def key_order(self) -> list[int]:
    """Agent ids sorted by key, computed once with the comparator."""
    if self._key_order is None:
      self._key_order = sorted(
          range(self.n),
          key=functools.cmp_to_key(
              lambda a, b: -1 if self.key_less(a, b) else 1
          ),
      )
    return self._key_order

  def set_state(self, agent: int, state: int) -> None:
    old = self.state_of[agent]
    if old == state:
      return
    self.counts[old] -= 1
    self.counts[state] += 1
    self.state_of[agent] = state
    old_group = self.group_of_state[old]
    new_group = self.group_of_state[state]
    if old_group == new_group:
      return
    members = self.members[old_group]
    index = self.position[agent]
    last = members.pop()
    if last != agent:
      members[index] = last
      self.position[last] = index
    target = self.members[new_group]
    self.position[agent] = len(target)
    target.append(agent)

  def group_size(self, group: int) -> int:
    return len(self.members[group])

  def count(self, name: str) -> int:
    return self.counts[self.spec.state_id(name).index]

  def count_of(self, names: Iterable[str]) -> int:
    return sum(self.count(name) for name in names)

  def counts_by_name(self) -> dict[str, int]:
    return {
        name: count
        for name, count in zip(self.spec.states, self.counts)
        if count
    }

  def state_name(self, agent: int) -> str:
    return self.spec.states[self.state_of[agent]]

  def agents_in(self, name: str) -> list[int]:
    state = self.spec.state_id(name).index
    return [agent for agent in range(self.n) if self.state_of[agent] == state]

  def audit(self) -> None:
    """Checks the group index against the states. Raises InvariantBreach."""
    seen = 0
    for group, members in enumerate(self.members):
      for index, agent in enumerate(members):
        if self.position[agent] != index:
          raise InvariantBreach(
              f"agent {agent} recorded at {self.position[agent]} but found at"
              f" {index} of group {group}"
          )
        if self.group_of_state[self.state_of[agent]] != group:
          raise InvariantBreach(
              f"agent {agent} listed in group {group} but its state is not"
          )
      seen += len(members)
    if seen != self.n:
      raise InvariantBreach(
          f"group lists hold {seen} agents, expected {self.n}"
      )
    counts = [0] * len(self.counts)
    for state in self.state_of:
      counts[state] += 1
    if counts != self.counts:
      raise InvariantBreach("state counts out of date")


def _check_distinct(keys: Sequence[Any]) -> None:
  ordered = sorted(keys)
  for smaller, larger in zip(ordered, ordered[1:]):
    if not smaller < larger:
      raise DuplicateKey("keys must be pairwise distinct")


def build_population(
    spec: ProtocolSpec,
    counts: Mapping[str, int] | Iterable[tuple[str, int]] | None = None,
    keyed: Sequence[tuple[str, Any]] | None = None,
    poison_keys: bool = False,
) -> Population:
  """Builds a population from state counts or from (state, key) pairs.

  Args:
    spec: the protocol the population runs.
    counts: state name -> number of agents; agents get ids in input order.
    keyed: one (state name, key) pair per agent, agent i is pair i.
    poison_keys: wrap keys so that any read other than `<` raises.
  Returns:
    the population.
  Raises:
    UnknownState: a state the spec does not declare.
    DuplicateKey: two keys compare equal.
    EmptyPopulation: no agents.
  """
  if (counts is None) == (keyed is None):
    raise PopulationError("give exactly one of counts or keyed")
  index = spec.compiled.state_index
  keys = None
  state_of: list[int] = []
  if counts is not None:
    items = counts.items() if isinstance(counts, Mapping) else counts
    for name, count in items:
      if name not in index:
        raise UnknownState(f"protocol {spec.name} has no state {name!r}")
      if count < 0:
        raise PopulationError(f"negative count {count} for state {name}")
      state_of.extend([index[name]] * count)
  else:
    keys = []
    for name, key in keyed:
      if name not in index:
        raise UnknownState(f"protocol {spec.name} has no state {name!r}")
      state_of.append(index[name])
      keys.append(PoisonedKey(key) if poison_keys else key)
    _check_distinct(keys)
  if not state_of:
    raise EmptyPopulation("a population needs at least one agent")
  if keys is None and spec.comparison_model:
    raise PopulationError(f"protocol {spec.name} compares keys; give keys")
  return Population(spec, state_of, keys)
