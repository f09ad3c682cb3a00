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

"""Module to print a protocol back to its canonical text."""

from engine.types import Model
from rules_dsl.protocol_spec import ProtocolSpec


def pretty_print(spec: ProtocolSpec) -> str:
  """Returns canonical protocol text; parsing it gives back an equal spec.

  Sections come in a fixed order (header, states, groups, targets, rules) and
  rules are printed by id.
  """
  model = spec.model.value
  if spec.comparison_model:
    model += " comparison"
  lines = [f"protocol {spec.name}", f"model {model}"]
  lines.append("states: " + ", ".join(spec.states))
  if spec.model is Model.SELECTIVE:
    for group, members in spec.groups:
      lines.append(f"group {group} = {{{', '.join(members)}}}")
    for state, group in spec.targets:
      lines.append(f"target {state} -> {group}")
  for rule in spec.rules:
    lines.append(rule.text())
  return "\n".join(lines) + "\n"
