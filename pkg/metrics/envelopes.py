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

"""Module with the parallel time envelopes of fragmented time.

Two empirical checks relate the fragmented time T_F of an interval of
interactions to its parallel time T = interactions / n:

  * standard-model traces satisfy T/10 <= T_F always and T_F <= 2T with
    high probability, for long enough traces;
  * selective traces in which every agent is the responder of an external
    interaction at most once satisfy I/(10n) <= T_F <= 2I/n with high
    probability.

Both only claim anything for long intervals, so checks carry a
`long_enough` flag and aggregates skip the short ones.
"""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from metrics.fragmented_time import ChunkReport, fragmented_time

MIN_LENGTH_FACTOR = 10.0


def minimum_length(n: int, factor: float = MIN_LENGTH_FACTOR) -> float:
  """Shortest interval the envelopes are checked on: factor·n·ln n."""
  return factor * n * math.log(n) if n > 1 else 0.0


@dataclass(frozen=True)
class EnvelopeCheck:
  """Fragmented time of one interval against its parallel time.

  Attributes:
    n: population size.
    interactions: length of the interval.
    parallel_time: interactions / n.
    fragmented_time: k·ln n.
    lower_holds: T/10 <= T_F.
    within: T/10 <= T_F <= 2T.
    long_enough: the interval reaches the minimum length.
    qualifies: the interval meets the check's precondition.
  """

  n: int
  interactions: int
  parallel_time: float
  fragmented_time: float
  lower_holds: bool
  within: bool
  long_enough: bool
  qualifies: bool = True


def _envelope(
    n: int,
    interactions: int,
    fragmented: float,
    min_length: float | None,
    qualifies: bool = True,
) -> EnvelopeCheck:
  parallel = interactions / n
  # rounding slack for traces that sit exactly on the bound
  lower_holds = parallel / 10 <= fragmented + 1e-9
  if min_length is None:
    min_length = minimum_length(n)
  return EnvelopeCheck(
      n=n,
      interactions=interactions,
      parallel_time=parallel,
      fragmented_time=fragmented,
      lower_holds=lower_holds,
      within=lower_holds and fragmented <= 2 * parallel,
      long_enough=interactions >= min_length,
      qualifies=qualifies,
  )


def standard_envelope_check(
    report: ChunkReport, min_length: float | None = None
) -> EnvelopeCheck:
  """Checks T/10 <= T_F <= 2T on the chunking of a standard-model trace.

  Args:
    report: chunk report of the whole trace.
    min_length: minimum interval length, default 10·n·ln n.
  Returns:
    the check; an empty trace has T = T_F = 0 and is never long enough.
  """
  return _envelope(
      report.n, report.interactions, report.fragmented_time, min_length
  )


def once_responder_check(
    responders: Sequence[int | None],
    external_flags: Sequence[bool],
    n: int,
    min_length: float | None = None,
) -> EnvelopeCheck:
  """Checks I/(10n) <= T_F <= 2I/n on a selective interval.

  Args:
    responders: responder per interaction, as tallied for chunking.
    external_flags: per interaction, whether the responder came from
      another group than the initiator.
    n: population size.
    min_length: minimum interval length, default 10·n·ln n.
  Returns:
    the check; `qualifies` is false when some agent is the responder of
    more than one external interaction.
  """
  external = Counter(
      responder
      for responder, flag in zip(responders, external_flags)
      if flag and responder is not None
  )
  qualifies = not external or max(external.values()) <= 1
  report = fragmented_time(responders, n)
  return _envelope(
      n, len(responders), report.fragmented_time, min_length, qualifies
  )


@dataclass(frozen=True)
class EnvelopeSummary:
  """Aggregate over many checks, counting only long enough intervals."""

  checked: int
  skipped: int
  within_fraction: float
  lower_fraction: float


def summarize(checks: Iterable[EnvelopeCheck]) -> EnvelopeSummary:
  counted = []
  skipped = 0
  for check in checks:
    if check.long_enough and check.qualifies:
      counted.append(check)
    else:
      skipped += 1
  if not counted:
    return EnvelopeSummary(0, skipped, 0.0, 0.0)
  return EnvelopeSummary(
      checked=len(counted),
      skipped=skipped,
      within_fraction=sum(check.within for check in counted) / len(counted),
      lower_fraction=sum(check.lower_holds for check in counted)
      / len(counted),
  )
