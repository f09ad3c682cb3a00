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

"""Module with the run history and its streaming summary."""

from __future__ import annotations

from collections import Counter

from engine.types import InteractionRecord, OutcomeKind
from metrics.fragmented_time import ChunkReport, ChunkTracker


class Trace:
  """History of one run, possibly spanning several stage specs.

  The summary (counters, per-rule fire counts and the chunk tracker) is always
  kept. Full records and the raw responder stream are opt in, since runs can
  reach 10^8 interactions.

  Attributes:
    n: population size.
    interactions: steps recorded so far.
    kind_counts: OutcomeKind -> count.
    internal: steps whose initiator and responder sat in the same group.
    external: steps with a responder from another group.
    unmatched_draws: NoMatch steps that drew a responder.
    rule_fires: (protocol name, rule id) -> count.
    chunks: streaming chunk tracker.
    records: every InteractionRecord, when `keep_records`.
    responders: responder per step (None when absent), when
      `keep_responders`.
    external_flags: per step, whether a responder came from another group,
      kept with `responders`.
  """

  def __init__(
      self,
      n: int,
      keep_records: bool = False,
      keep_responders: bool = False,
      count_unmatched: bool = True,
  ):
    self.n = n
    self.interactions = 0
    self.kind_counts: Counter[OutcomeKind] = Counter()
    self.internal = 0
    self.external = 0
    self.unmatched_draws = 0
    self.rule_fires: Counter[tuple[str, int]] = Counter()
    self.chunks = ChunkTracker(n)
    self.count_unmatched = count_unmatched
    self.records: list[InteractionRecord] | None = [] if keep_records else None
    self.responders: list[int | None] | None = (
        [] if keep_responders else None
    )
    self.external_flags: list[bool] | None = (
        [] if keep_responders else None
    )

  def chunk_report(self) -> ChunkReport:
    return self.chunks.report()

  def fires(self, protocol: str, rule_id: int) -> int:
    return self.rule_fires[(protocol, rule_id)]

  def tallied_responders(self) -> list[int | None]:
    """The responder stream as the chunk tracker saw it."""
    if self.responders is None:
      raise ValueError("trace was recorded without responders")
    return list(self.responders)
