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

""" Module to test fragmented time, envelopes, fits and disorder """

import math

import pytest

from cli.trials import TrialOutcome
from engine.population import build_population
from engine.rng import SchedulerRng
from engine.types import RunResult
from errors import InsufficientData, InvalidState
from metrics.disorder import (
    DisorderAudit,
    disorder,
    is_sorted_partition,
    population_disorder,
)
from metrics.envelopes import (
    EnvelopeCheck,
    minimum_length,
    once_responder_check,
    standard_envelope_check,
    summarize,
)
from metrics.fitting import fit_exponent, fit_polylog
from metrics.fragmented_time import (
    ChunkTracker,
    fragmented_time,
    minimum_chunks_exhaustive,
    responder_threshold,
)
from metrics.scaling_table import ScalingTable
from protocols.median import median_spec, median_standard


def test_empty_trace():
  """An empty trace has no chunk"""
  report = fragmented_time([], 10)
  assert report.chunk_count == 0
  assert report.fragmented_time == 0.0
  assert minimum_chunks_exhaustive([], 10) == 0


def test_single_chunk_without_repeats():
  """Distinct responders never force a cut"""
  report = fragmented_time([0, 1, 2, None, 3], 10)
  assert report.chunk_count == 1
  assert report.fragmented_time == pytest.approx(math.log(10))
  assert report.chunk_boundaries == [1]
  assert report.interactions == 5


def test_greedy_cut_position():
  """The chunk ends right before a responder would exceed 10 ln n"""
  n = 2
  limit = math.floor(responder_threshold(n))
  assert limit == 6
  report = fragmented_time([0] * 20, n)
  assert report.chunk_count == 4
  assert report.chunk_boundaries == [1, 7, 13, 19]
  assert report.responder_max_per_chunk == 6


def test_tracker_matches_batch():
  """Streaming and batch chunking agree"""
  rng = SchedulerRng(4)
  responders = [rng.below(3) if rng.below(4) else None for _ in range(300)]
  tracker = ChunkTracker(3)
  for responder in responders:
    tracker.observe(responder)
  assert tracker.report() == fragmented_time(responders, 3)


def test_greedy_is_minimal():
  """Greedy chunk counts equal the exhaustive minimum"""
  rng = SchedulerRng(12)
  for _ in range(200):
    n = 2 + rng.below(4)
    responders = [
        0 if rng.below(3) else (None if rng.below(5) == 0 else rng.below(n))
        for _ in range(rng.below(50))
    ]
    assert fragmented_time(responders, n).chunk_count == (
        minimum_chunks_exhaustive(responders, n)
    )


def test_standard_envelope_check():
  """Checks against T/10 <= T_F <= 2T"""
  n = 100
  length = math.ceil(minimum_length(n))
  rng = SchedulerRng(1)
  report = fragmented_time([rng.below(n) for _ in range(length)], n)
  check = standard_envelope_check(report)
  assert check.long_enough
  assert check.lower_holds
  assert check.within
  short = standard_envelope_check(fragmented_time([1, 2, 3], n))
  assert not short.long_enough


def test_envelope_flags_a_hot_responder():
  """One agent answering every time breaks the upper bound"""
  n = 100
  length = math.ceil(minimum_length(n))
  check = standard_envelope_check(fragmented_time([0] * length, n))
  assert check.lower_holds
  assert not check.within


def test_once_responder_check():
  """Repeated external responders disqualify the interval"""
  responders = [0, 1, 2, 3]
  check = once_responder_check(responders, [True] * 4, 10, min_length=1)
  assert check.qualifies and check.long_enough
  check = once_responder_check([0, 0], [True, True], 10, min_length=1)
  assert not check.qualifies
  check = once_responder_check([0, 0], [True, False], 10, min_length=1)
  assert check.qualifies


def test_summarize_skips_short_and_unqualified_checks():
  """Only long, qualifying intervals are counted"""
  def make(within, long_enough=True, qualifies=True):
    return EnvelopeCheck(
        n=10,
        interactions=100,
        parallel_time=10.0,
        fragmented_time=5.0,
        lower_holds=True,
        within=within,
        long_enough=long_enough,
        qualifies=qualifies,
    )

  summary = summarize([
      make(True),
      make(False),
      make(False, long_enough=False),
      make(False, qualifies=False),
  ])
  assert summary.checked == 2
  assert summary.skipped == 2
  assert summary.within_fraction == 0.5
  assert summary.lower_fraction == 1.0
  assert summarize([]).checked == 0


def test_fit_exponent_recovers_power_law():
  """log-log slope of 3 n^2 is 2"""
  fit = fit_exponent([(n, 3 * n**2) for n in (10, 100, 1000, 10000)])
  assert fit.slope == pytest.approx(2.0)
  assert fit.intercept == pytest.approx(math.log(3))
  assert fit.residual == pytest.approx(0.0, abs=1e-9)
  assert fit.sizes == 4


def test_fit_polylog_recovers_log_power():
  """(ln n)^2 has polylog slope 2"""
  fit = fit_polylog([(n, math.log(n) ** 2) for n in (10, 100, 1000)])
  assert fit.slope == pytest.approx(2.0)


def test_fit_needs_three_sizes_and_positive_values():
  """Fits refuse data they cannot fit"""
  with pytest.raises(InsufficientData):
    fit_exponent([(10, 1.0), (10, 2.0), (100, 3.0)])
  with pytest.raises(InsufficientData):
    fit_exponent([(10, 1.0), (100, 0.0), (1000, 3.0)])
  with pytest.raises(InsufficientData):
    fit_polylog([(2, 1.0), (10, 2.0), (100, 3.0)])


def _outcome(n, trial, interactions, correct=True):
  result = RunResult(
      stabilized=True,
      interactions=interactions,
      final_counts={},
      chunks=2,
      fragmented_time=2 * math.log(n),
      parallel_time=interactions / n,
      correct=correct,
      extras=[("rounds", 3), ("verdict", "Tie")],
  )
  return TrialOutcome("demo", "selective", n, 0, trial, result)


def test_scaling_table():
  """Rows, means, ratios and fits of a sweep"""
  outcomes = [
      _outcome(n, trial, n * n * (trial + 1))
      for n in (1000, 10, 100)
      for trial in range(2)
  ]
  table = ScalingTable.from_outcomes(outcomes)
  assert table.sizes() == [10, 100, 1000]
  assert table.frame["n"].tolist() == [10, 10, 100, 100, 1000, 1000]
  assert "rounds" in table.frame and "verdict" not in table.frame
  assert table.means("interactions")[10] == pytest.approx(150.0)
  assert table.correct_fraction() == 1.0
  assert table.log_ratio().tolist() == pytest.approx([2.0, 2.0, 2.0])
  assert table.growth("fragmented_time", ratio_to_log=True) == pytest.approx(
      1.0
  )
  assert table.growth(
      "fragmented_time", ratio_to_log=True, power=4
  ) == pytest.approx(1 / 27)
  assert table.log_ratio(power=4).name == "fragmented_time/ln^4 n"
  exponent, _ = table.fit("interactions")
  assert exponent.slope == pytest.approx(2.0)
  summary = table.summary()
  assert summary["trials"].tolist() == [2, 2, 2]


def test_scaling_table_needs_columns():
  """Records without the scaling columns are rejected"""
  with pytest.raises(InsufficientData):
    ScalingTable.from_records([{"n": 10}])


def test_disorder_extremes():
  """All-N starts at C(n, 2); the sorted partition is at 0"""
  keys = [5, 1, 4, 2, 3]
  assert disorder(["N"] * 5, keys) == 10
  assert disorder(["U", "L", "U", "L", "N"], keys) == 0
  assert disorder(["L", "L", "U", "L", "N"], keys) > 0
  with pytest.raises(InvalidState):
    disorder(["N", "X"], [1, 2])


def test_population_disorder_and_sorted_partition():
  """The comparator based versions agree with direct enumeration"""
  keys = [5, 1, 4, 2, 3]
  states = ["U", "L", "U", "L", "N"]
  pop = build_population(median_spec(), keyed=list(zip(states, keys)))
  assert population_disorder(pop) == 0
  assert is_sorted_partition(pop)
  pop = build_population(
      median_spec(), keyed=list(zip(["N"] * 5, keys))
  )
  assert population_disorder(pop) == 10
  assert not is_sorted_partition(pop)


def test_disorder_audit_tracks_a_median_run():
  """Every meaningful median step lowers the disorder"""
  bundle = median_standard(SchedulerRng(2).permutation(31))
  audits = []

  def factory(pop):
    audits.append(DisorderAudit(pop))
    return audits[-1]

  result, _ = bundle.execute(SchedulerRng(3), observer_factories=[factory])
  (audit,) = audits
  assert result.correct
  assert audit.initial == 31 * 30 // 2
  assert audit.value == 0
  assert audit.violations == []
  assert audit.meaningful_steps > 0
  assert audit.recheck()
