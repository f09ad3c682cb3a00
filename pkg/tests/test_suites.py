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

""" Module to test the verify suites """

import pytest

import protocols.protocol_modules as protocol_module
from cli.suites import (
    FAST_SUITE,
    FULL_SUITE,
    MALFORMED_PROTOCOLS,
    SuiteContext,
    check_chunk_minimality,
    check_protocol_text,
    get_criteria,
    outcome_violations,
    random_responders,
    run_suite,
    scripted_null_outcomes,
    suite_sizes,
    uniformity_p_values,
)
from engine.population import build_population
from engine.rng import SchedulerRng
from errors import ConfigurationError
from metrics.fragmented_time import fragmented_time, minimum_chunks_exhaustive
from rules_dsl.parser import parse_protocol_with_diagnostics


def test_suite_sizes():
  """The fast suite is a cut down full suite"""
  assert suite_sizes("fast") is FAST_SUITE
  assert suite_sizes("full") is FULL_SUITE
  assert FAST_SUITE.uniformity_draws <= FULL_SUITE.uniformity_draws
  assert max(FAST_SUITE.le_sizes) <= max(FULL_SUITE.le_sizes)
  with pytest.raises(ConfigurationError):
    suite_sizes("medium")


def test_criteria_names_are_unique():
  """Criteria are selected by name"""
  names = [criterion["name"] for criterion in get_criteria()]
  assert len(names) == len(set(names)) == 10
  assert all(callable(criterion["function"]) for criterion in get_criteria())


def test_responder_draws_look_uniform():
  """Responders and initiators are drawn uniformly"""
  for name, p_value in uniformity_p_values(20_000, 5):
    assert p_value > 1e-5, name


@pytest.mark.parametrize(
    "table, counts",
    [
        ("epidemic_table", {"0": 15, "1": 4}),
        ("leader_election_table", {"L": 12, "F": 7}),
        ("majority_table", {"G": 10, "R": 9}),
        ("multiply_slow_table", {"L_in": 1, "x": 3, "y": 2, "free": 6}),
    ],
)
def test_outcomes_match_their_configuration(table, counts):
  """Every scheduler outcome is legal for the configuration it saw"""
  spec = getattr(protocol_module, table)()
  pop = build_population(spec, counts=counts)
  assert not outcome_violations(pop, spec, SchedulerRng(3), steps=200)


def test_scripted_null_outcomes():
  """Forced emptiness and singleton tests"""
  assert not scripted_null_outcomes()


def test_random_responders_are_skewed():
  """Most draws hit agent 0 so that chunks get cut"""
  responders = random_responders(SchedulerRng(1), 4, 1_000)
  assert len(responders) == 1_000
  assert responders.count(0) > 500
  assert None in responders
  assert fragmented_time(responders, 4).chunk_count > 1


def test_greedy_matches_exhaustive_on_short_traces():
  """Greedy chunking is minimal"""
  rng = SchedulerRng(9)
  for _ in range(50):
    n = 2 + rng.below(3)
    responders = random_responders(rng, n, rng.below(25))
    assert fragmented_time(responders, n).chunk_count == (
        minimum_chunks_exhaustive(responders, n)
    )


def test_cheap_criteria_pass():
  """Criteria that need no trial runs pass on the fast suite"""
  context = SuiteContext(sizes=FAST_SUITE)
  passed, detail = check_protocol_text(context)
  assert passed, detail
  passed, detail = check_chunk_minimality(context)
  assert passed, detail


def test_malformed_inputs_have_spans():
  """Every malformed protocol is located in its text"""
  for text in MALFORMED_PROTOCOLS:
    spec, diagnostics = parse_protocol_with_diagnostics(text)
    assert spec is None
    assert diagnostics
    assert all(diagnostic.span is not None for diagnostic in diagnostics)


def test_run_suite_filters_criteria():
  """Only the named criteria run, in suite order"""
  results = run_suite("fast", only=["Protocol text", "Chunk minimality"])
  assert [result.name for result in results] == [
      "Chunk minimality", "Protocol text"
  ]
  assert all(result.passed for result in results)
  assert all(result.seconds >= 0 for result in results)
  assert not run_suite("fast", only=["No such criterion"])


def test_median_criteria_pass_on_the_fast_suite():
  """Both median criteria pass end to end on the fast grids"""
  names = ["Median, standard model", "Median by pivot partitioning"]
  results = run_suite("fast", workers=4, only=names)
  assert [result.name for result in results] == names
  for result in results:
    assert result.passed, f"{result.name}: {result.detail}"
  assert "T_F/ln^4 n growth" in results[1].detail
