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

""" Module to test the protocol text format """

import pytest

import protocols.protocol_modules as protocol_module
from cli.suites import MALFORMED_PROTOCOLS
from engine.types import Guard, Model
from errors import (
    DuplicateRuleMatch,
    GuardInStandardModel,
    MissingTarget,
    OverlappingGroups,
    ProtocolSyntaxError,
    RulePatternOutsideTargetGroup,
    UncoveredState,
    UnknownGroup,
)
from protocol_configs.protocols import get_protocol_configs
from protocols.epidemic import rested_spec
from protocols.fast_median import build_stages
from protocols.stages import DEFAULT_TICKETS
from rules_dsl.parser import parse_protocol, parse_protocol_with_diagnostics
from rules_dsl.printer import pretty_print
from rules_dsl.protocol_spec import ProtocolBuilder
from rules_dsl.validation import collect_warnings, validate

EPIDEMIC_TEXT = """\
protocol epidemic
model selective
states: 0, 1, Stop
group G0 = {0}
group G1 = {1, Stop}
target 1 -> G0
1 + G0|0 -> 1 + 1
1 + G0|null -> Stop
"""


def test_parse_epidemic():
  """The documented example parses into the built-in epidemic"""
  spec = parse_protocol(EPIDEMIC_TEXT)
  assert spec == protocol_module.epidemic_table()
  assert spec.model is Model.SELECTIVE
  assert spec.target_of("1") == "G0"
  assert spec.group_of("Stop") == "G1"
  assert spec.rules[1].is_null


def test_comments_and_blank_lines_are_ignored():
  """`#` starts a comment"""
  text = "# the epidemic\n\n" + EPIDEMIC_TEXT.replace(
      "1 + G0|0 -> 1 + 1", "1 + G0|0 -> 1 + 1   # spread"
  )
  assert parse_protocol(text) == parse_protocol(EPIDEMIC_TEXT)


def test_pretty_print_is_canonical():
  """Printing the parsed example gives back the example"""
  assert pretty_print(parse_protocol(EPIDEMIC_TEXT)) == EPIDEMIC_TEXT


@pytest.mark.parametrize(
    "protocol_config",
    [config for config in get_protocol_configs() if "spec_function" in config],
    ids=lambda config: config["id"],
)
def test_builtin_round_trip(protocol_config):
  """Every built-in rule table survives print and parse"""
  spec = getattr(protocol_module, protocol_config["spec_function"])()
  assert parse_protocol(pretty_print(spec)) == spec


def test_rested_epidemic_round_trip():
  """Names with `*` survive print and parse"""
  assert parse_protocol(pretty_print(rested_spec())) == rested_spec()


@pytest.mark.parametrize("tickets", [0, DEFAULT_TICKETS])
def test_stage_protocols_round_trip(tickets):
  """Every stage of the pivot median survives print and parse"""
  for spec in build_stages(tickets).all_specs():
    assert parse_protocol(pretty_print(spec)) == spec, spec.name


def test_hyphens_in_names():
  """A hyphen belongs to the name unless it starts an arrow"""
  spec = parse_protocol(
      "protocol two-way\nmodel standard\nstates: x-1, y\nx-1+y->y+y\n"
  )
  assert spec.name == "two-way"
  assert spec.states == ("x-1", "y")
  assert spec.rules[0].initiator == "x-1"
  assert spec.rules[0].responder_out == "y"
  assert parse_protocol(pretty_print(spec)) == spec


SLOW_MULTIPLICATION_TEXT = """\
protocol mult-slow
model selective
states: L_in, L_y, L_z, L_y^, L_out, x, y, y^, z, free
group G_x = {x}
group G_y = {y}
group G_y^ = {y^}
group G_z = {z}
group G_R = {L_in, L_y, L_z, L_y^, L_out, free}
target L_in -> G_x
target L_y -> G_y
target L_z -> G_R
target L_y^ -> G_y^
L_in + G_x|x -> L_y + free
L_in + G_x|null -> L_out
L_y + G_y|y -> L_z + y^
L_y + G_y|null -> L_y^
L_z + G_R|free -> L_y + z
L_y^ + G_y^|y^ -> L_y^ + y
L_y^ + G_y^|null -> L_in
"""


def test_seven_rule_multiplication_text():
  """The seven rule multiplication reads as 7 rules, 5 groups, 10 states"""
  spec = parse_protocol(SLOW_MULTIPLICATION_TEXT)
  assert len(spec.rules) == 7
  assert len(spec.groups) == 5
  assert len(spec.states) == 10
  built = protocol_module.multiply_slow_table()
  assert spec.rules == tuple(rule for rule in built.rules if not rule.is_idle)
  assert spec.groups == built.groups
  assert [warning.code for warning in collect_warnings(spec)] == [
      "MissingNullRule"
  ]


def test_ticket_states_expand_mechanically():
  """Ticket counters written out as R_0..R_21 are ordinary states"""
  tickets = [f"R_{t}" for t in range(22)]
  lines = [
      "protocol tickets",
      "model selective",
      "states: N, " + ", ".join(tickets),
      "group G_N = {N}",
      "group G_R = {" + ", ".join(tickets) + "}",
  ]
  lines += [f"target R_{t} -> G_N" for t in range(1, 22)]
  for t in range(1, 22):
    lines.append(f"R_{t} + G_N|N -> R_{t - 1} + R_0")
    lines.append(f"R_{t} + G_N|null -> R_{t}")
  spec = parse_protocol("\n".join(lines) + "\n")
  assert len(spec.states) == 23
  assert spec.group_members("G_R") == tuple(tickets)
  assert len(spec.rules) == 42
  assert spec.target_of("R_0") is None
  assert not validate(spec)
  assert parse_protocol(pretty_print(spec)) == spec


def test_guarded_standard_text():
  """Guards in the standard model need the comparison flag"""
  text = (
      "protocol m\nmodel standard comparison\nstates: a, b\n"
      "a + b [<] -> b + a\n"
  )
  spec = parse_protocol(text)
  assert spec.rules[0].guard is Guard.LESS
  assert spec.comparison_model
  with pytest.raises(GuardInStandardModel):
    parse_protocol(text.replace(" comparison", ""))


@pytest.mark.parametrize(
    "text, error_class",
    [
        ("model selective\n", ProtocolSyntaxError),
        ("protocol p\nmodel quantum\n", ProtocolSyntaxError),
        (
            "protocol p\nmodel selective\nstates: a, b\ngroup A = {a, b}\n"
            "group B = {b}\n",
            OverlappingGroups,
        ),
        (
            "protocol p\nmodel selective\nstates: a, b\ngroup A = {a}\n",
            UncoveredState,
        ),
        (
            "protocol p\nmodel selective\nstates: a\ngroup A = {a}\n"
            "target a -> B\n",
            UnknownGroup,
        ),
        (
            "protocol p\nmodel selective\nstates: a, b\ngroup A = {a}\n"
            "group B = {b}\nb + A|a -> b + b\n",
            MissingTarget,
        ),
        (
            "protocol p\nmodel selective\nstates: a, b\ngroup A = {a}\n"
            "group B = {b}\ntarget a -> B\na + B|a -> a + a\n",
            RulePatternOutsideTargetGroup,
        ),
        (
            "protocol p\nmodel selective\nstates: a, b\ngroup A = {a}\n"
            "group B = {b}\ntarget a -> B\na + B|b -> a + a\n"
            "a + B|b -> b + b\n",
            DuplicateRuleMatch,
        ),
    ],
)
def test_invalid_text_raises(text, error_class):
  """parse_protocol raises the first problem as its error class"""
  with pytest.raises(error_class) as raised:
    parse_protocol(text)
  assert raised.value.span is not None


def test_diagnostic_location():
  """Diagnostics point at the offending token"""
  text = "protocol p\nmodel selective\nstates: a, $b\n"
  spec, diagnostics = parse_protocol_with_diagnostics(text)
  assert spec is None
  (diagnostic,) = diagnostics
  assert diagnostic.code == "ProtocolSyntaxError"
  assert diagnostic.span.line == 3
  assert diagnostic.span.column == 12
  assert text.encode()[diagnostic.span.start : diagnostic.span.end] == b"$"
  assert diagnostic.describe().startswith("3:12: error: ProtocolSyntaxError")


def test_every_line_error_is_collected():
  """One diagnostic per broken line"""
  text = "protocol p\nmodel quantum\nstates: a, $b\n"
  _, diagnostics = parse_protocol_with_diagnostics(text)
  assert [diagnostic.span.line for diagnostic in diagnostics] == [2, 3]


@pytest.mark.parametrize("text", MALFORMED_PROTOCOLS)
def test_malformed_fixtures_are_located(text):
  """Every malformed fixture yields a diagnostic inside the text"""
  spec, diagnostics = parse_protocol_with_diagnostics(text)
  assert spec is None
  assert diagnostics
  size = len(text.encode("utf-8"))
  for diagnostic in diagnostics:
    assert diagnostic.span is not None
    assert 0 <= diagnostic.span.start <= diagnostic.span.end <= size


def test_missing_null_rule_is_a_warning():
  """Targets without a null rule are reported, not rejected"""
  spec = (
      ProtocolBuilder("warned")
      .states("a", "b")
      .group("A", "a")
      .group("B", "b")
      .target("B", "a")
      .rule("a", "b", "a", "a")
      .build()
  )
  (warning,) = collect_warnings(spec)
  assert warning.code == "MissingNullRule"
  assert warning.severity == "warning"
  assert validate(spec) == [warning]


def test_builder_rejects_guard_in_standard_model():
  """A standard protocol with guards has to declare the comparison model"""
  builder = (
      ProtocolBuilder("bad", model=Model.STANDARD)
      .states("a", "b")
      .rule("a", "b", "b", "a", guard=Guard.LESS)
  )
  with pytest.raises(GuardInStandardModel):
    builder.build()
