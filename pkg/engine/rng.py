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

"""Module with the seeded random source of the scheduler.

The generator is numpy's PCG64. Raw 64-bit words are pulled in blocks and
bounded integers use Lemire's multiply-and-reject method, so draws are
unbiased for every bound up to 2**64.
"""

from __future__ import annotations

import numpy

MASK_64 = (1 << 64) - 1
BUFFER_SIZE = 4096


def splitmix64(value: int) -> int:
  """One round of the splitmix64 finalizer."""
  value = (value + 0x9E3779B97F4A7C15) & MASK_64
  value = ((value ^ (value >> 30)) * 0xBF58476D1CE4E5B9) & MASK_64
  value = ((value ^ (value >> 27)) * 0x94D049BB133111EB) & MASK_64
  return value ^ (value >> 31)


class SchedulerRng:
  """Seedable 64-bit random source with jump-ahead streams."""

  def __init__(
      self,
      seed: int,
      bit_generator: numpy.random.PCG64 | None = None,
      buffer_size: int = BUFFER_SIZE,
  ):
    self._seed = seed & MASK_64
    self._bit_generator = (
        bit_generator
        if bit_generator is not None
        else numpy.random.PCG64(self._seed)
    )
    self._buffer_size = buffer_size
    self._buffer: list[int] = []
    self._position = 0

  @property
  def seed(self) -> int:
    return self._seed

  def next_u64(self) -> int:
    if self._position == len(self._buffer):
      self._buffer = self._bit_generator.random_raw(self._buffer_size).tolist()
      self._position = 0
    value = self._buffer[self._position]
    self._position += 1
    return value

  def below(self, bound: int) -> int:
    """Returns a uniform integer in [0, bound)."""
    if bound <= 0:
      raise ValueError(f"bound must be positive, got {bound}")
    product = self.next_u64() * bound
    low = product & MASK_64
    if low < bound:
      threshold = ((1 << 64) - bound) % bound
      while low < threshold:
        product = self.next_u64() * bound
        low = product & MASK_64
    return product >> 64

  def random(self) -> float:
    """Returns a float in [0, 1) with 53 random bits."""
    return (self.next_u64() >> 11) * (1.0 / (1 << 53))

  def shuffle(self, items: list) -> None:
    """Fisher-Yates shuffle in place."""
    for i in range(len(items) - 1, 0, -1):
      j = self.below(i + 1)
      items[i], items[j] = items[j], items[i]

  def permutation(self, n: int) -> list[int]:
    """Returns a uniform permutation of 1..n."""
    values = list(range(1, n + 1))
    self.shuffle(values)
    return values

  def jumped(self, jumps: int = 1) -> SchedulerRng:
    """Returns an independent stream, as if 2**127 * jumps draws were made."""
    return SchedulerRng(
        self._seed,
        bit_generator=self._bit_generator.jumped(jumps),
        buffer_size=self._buffer_size,
    )

  def fork(self) -> SchedulerRng:
    """Returns a child generator seeded from this one."""
    return SchedulerRng(splitmix64(self.next_u64()))
