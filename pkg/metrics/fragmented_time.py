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

"""Module to compute fragmented parallel time.

A trace is cut into contiguous chunks in which no agent is the responder more
than 10·ln n times. With k the minimum number of chunks, the fragmented time
is T_F = k·ln n. The greedy cut (extend the chunk until the next responder
would exceed the bound) is minimal, because any sub-interval of a feasible
chunk is feasible.

Responder streams hold an agent id per interaction, or None for interactions
without a responder.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

RESPONDER_FACTOR = 10.0


def responder_threshold(n: int) -> float:
  return RESPONDER_FACTOR * math.log(n) if n > 1 else 0.0


@dataclass
class ChunkReport:
  """Chunk decomposition of a trace.

  Attributes:
    n: population size.
    chunk_count: minimum number of chunks k.
    chunk_boundaries: 1-based interaction index where each chunk starts.
    fragmented_time: k·ln n.
    responder_max_per_chunk: largest responder tally of any agent in any
      chunk.
    interactions: length of the trace.
  """

  n: int
  chunk_count: int
  chunk_boundaries: list[int] = field(default_factory=list)
  fragmented_time: float = 0.0
  responder_max_per_chunk: int = 0
  interactions: int = 0


class ChunkTracker:
  """Streaming greedy chunking, fed one interaction at a time."""

  def __init__(self, n: int, keep_boundaries: bool = True):
    self.n = n
    self.threshold = responder_threshold(n)
    self.interactions = 0
    self.chunk_count = 0
    self.boundaries: list[int] = []
    self.responder_max = 0
    self._keep_boundaries = keep_boundaries
    self._tally: dict[int, int] = {}

  def _open_chunk(self) -> None:
    self.chunk_count += 1
    self._tally = {}
    if self._keep_boundaries:
      self.boundaries.append(self.interactions)

  def observe(self, responder: int | None) -> None:
    self.interactions += 1
    if self.chunk_count == 0:
      self._open_chunk()
    if responder is None:
      return
    tally = self._tally.get(responder, 0) + 1
    if tally > self.threshold:
      self._open_chunk()
      tally = 1
    self._tally[responder] = tally
    if tally > self.responder_max:
      self.responder_max = tally

  def report(self) -> ChunkReport:
    return ChunkReport(
        n=self.n,
        chunk_count=self.chunk_count,
        chunk_boundaries=list(self.boundaries),
        fragmented_time=self.chunk_count * math.log(self.n) if self.n else 0.0,
        responder_max_per_chunk=self.responder_max,
        interactions=self.interactions,
    )


def fragmented_time(responders: Iterable[int | None], n: int) -> ChunkReport:
  """Greedy chunking of a whole responder stream.

  Args:
    responders: per interaction, the responder id or None.
    n: population size.
  Returns:
    the chunk report; an empty trace has k = 0 and T_F = 0.
  """
  tracker = ChunkTracker(n)
  for responder in responders:
    tracker.observe(responder)
  return tracker.report()


def minimum_chunks_exhaustive(responders: Sequence[int | None], n: int) -> int:
  """Minimum chunk count over all contiguous partitions.

  Dynamic programming over prefixes; best[j] is the fewest chunks covering
  the first j interactions. Quadratic, for cross-checking short traces.
  """
  threshold = responder_threshold(n)
  length = len(responders)
  best = [0] + [math.inf] * length
  for end in range(1, length + 1):
    tally: dict[int, int] = {}
    # grow the last chunk leftwards from `end`
    for start in range(end, 0, -1):
      responder = responders[start - 1]
      if responder is not None:
        tally[responder] = tally.get(responder, 0) + 1
        if tally[responder] > threshold:
          break
      best[end] = min(best[end], best[start - 1] + 1)
  return int(best[length])
