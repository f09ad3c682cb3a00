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

"""Module to check protocol descriptions.

`collect_errors` finds every structural problem, `validate` adds the warnings
and `ensure_valid` raises the first error as its exception class.
"""

from __future__ import annotations

from collections.abc import Mapping
from typing import TYPE_CHECKING

import errors
from engine.types import Guard, Model
from rules_dsl.source_span import Diagnostic, SourceSpan

if TYPE_CHECKING:
  from rules_dsl.protocol_spec import ProtocolSpec

# ("state" | "group" | "target", name) -> where it was declared
SpanIndex = Mapping[tuple[str, str], SourceSpan]

RESERVED_NAMES = ("null",)


def _guards_overlap(first: Guard, second: Guard) -> bool:
  if first is Guard.NONE or second is Guard.NONE:
    return True
  return first is second


def _check_states(spec: ProtocolSpec, spans: SpanIndex) -> list[Diagnostic]:
  diagnostics = []
  seen = set()
  for state in spec.states:
    span = spans.get(("state", state))
    if state in seen:
      diagnostics.append(
          Diagnostic(
              "ProtocolSyntaxError", f"state {state} declared twice", span=span
          )
      )
    if state in RESERVED_NAMES:
      diagnostics.append(
          Diagnostic(
              "ProtocolSyntaxError",
              f"{state} is reserved and cannot name a state",
              span=span,
          )
      )
    seen.add(state)
  return diagnostics


def _check_groups(spec: ProtocolSpec, spans: SpanIndex) -> list[Diagnostic]:
  diagnostics = []
  declared = set(spec.states)
  owner: dict[str, str] = {}
  group_names = set()
  for group, members in spec.groups:
    span = spans.get(("group", group))
    if group in group_names:
      diagnostics.append(
          Diagnostic(
              "ProtocolSyntaxError", f"group {group} declared twice", span=span
          )
      )
    group_names.add(group)
    for state in members:
      if state not in declared:
        diagnostics.append(
            Diagnostic(
                "UndeclaredState",
                f"group {group} lists undeclared state {state}",
                span=span,
            )
        )
      elif state in owner and owner[state] != group:
        diagnostics.append(
            Diagnostic(
                "OverlappingGroups",
                f"state {state} is in groups {owner[state]} and {group}",
                span=span,
            )
        )
      else:
        owner[state] = group
  for state in spec.states:
    if state not in owner:
      diagnostics.append(
          Diagnostic(
              "UncoveredState",
              f"state {state} is not in any group",
              span=spans.get(("state", state)),
          )
      )
  return diagnostics


def _check_targets(spec: ProtocolSpec, spans: SpanIndex) -> list[Diagnostic]:
  diagnostics = []
  declared = set(spec.states)
  group_names = {group for group, _ in spec.groups}
  for state, group in spec.targets:
    span = spans.get(("target", state))
    if state not in declared:
      diagnostics.append(
          Diagnostic(
              "UndeclaredState",
              f"target given for undeclared state {state}",
              span=span,
          )
      )
    if group not in group_names:
      diagnostics.append(
          Diagnostic("UnknownGroup", f"unknown group {group}", span=span)
      )
  return diagnostics


def _check_rules(spec: ProtocolSpec) -> list[Diagnostic]:
  diagnostics = []
  declared = set(spec.states)
  group_members = dict(spec.groups)
  targets = dict(spec.targets)
  for rule in spec.rules:
    span = rule.span
    names = [rule.initiator, rule.initiator_out]
    if not rule.is_null:
      names += [rule.responder, rule.responder_out]
    undeclared = [name for name in names if name not in declared]
    if undeclared:
      diagnostics.append(
          Diagnostic(
              "UndeclaredState",
              f"rule {rule.text()} uses undeclared state {undeclared[0]}",
              span=span,
          )
      )
      continue
    if rule.is_null and rule.guard is not Guard.NONE:
      diagnostics.append(
          Diagnostic(
              "ProtocolSyntaxError",
              f"null rule {rule.text()} cannot carry a guard",
              span=span,
          )
      )
    if spec.model is Model.STANDARD:
      if rule.is_null or rule.group is not None:
        diagnostics.append(
            Diagnostic(
                "ProtocolSyntaxError",
                f"rule {rule.text()} uses a group clause in a standard"
                " protocol",
                span=span,
            )
        )
      continue
    target = targets.get(rule.initiator)
    if target is None:
      diagnostics.append(
          Diagnostic(
              "MissingTarget",
              f"initiator state {rule.initiator} has no target group",
              span=span,
          )
      )
      continue
    if rule.group not in group_members:
      diagnostics.append(
          Diagnostic("UnknownGroup", f"unknown group {rule.group}", span=span)
      )
      continue
    if rule.group != target:
      diagnostics.append(
          Diagnostic(
              "RulePatternOutsideTargetGroup",
              f"rule {rule.text()} names group {rule.group} but the target"
              f" of {rule.initiator} is {target}",
              span=span,
          )
      )
      continue
    if not rule.is_null and rule.responder not in group_members[target]:
      diagnostics.append(
          Diagnostic(
              "RulePatternOutsideTargetGroup",
              f"responder {rule.responder} of rule {rule.text()} is not in"
              f" group {target}",
              span=span,
          )
      )
  return diagnostics


def _check_ambiguity(spec: ProtocolSpec) -> list[Diagnostic]:
  diagnostics = []
  by_pair: dict[tuple[str, str | None], list] = {}
  for rule in spec.rules:
    key = (rule.initiator, rule.responder)
    for other in by_pair.get(key, []):
      if _guards_overlap(rule.guard, other.guard):
        diagnostics.append(
            Diagnostic(
                "DuplicateRuleMatch",
                f"rules {other.text()} and {rule.text()} match the same pair",
                span=rule.span,
            )
        )
        break
    by_pair.setdefault(key, []).append(rule)
  return diagnostics


def collect_errors(
    spec: ProtocolSpec, spans: SpanIndex | None = None
) -> list[Diagnostic]:
  """Returns every invariant violation of the spec, in declaration order."""
  spans = spans or {}
  diagnostics = _check_states(spec, spans)
  diagnostics += _check_groups(spec, spans)
  if spec.model is Model.SELECTIVE:
    diagnostics += _check_targets(spec, spans)
  diagnostics += _check_rules(spec)
  diagnostics += _check_ambiguity(spec)
  return diagnostics


def collect_warnings(spec: ProtocolSpec) -> list[Diagnostic]:
  """Returns protocol smells that do not make the spec invalid."""
  if spec.model is not Model.SELECTIVE:
    return []
  warnings = []
  with_null_rule = {rule.initiator for rule in spec.rules if rule.is_null}
  for state, group in spec.targets:
    if state not in with_null_rule:
      warnings.append(
          Diagnostic(
              "MissingNullRule",
              f"state {state} targets {group} but has no null rule for an"
              " emptiness or singleton test",
              severity="warning",
          )
      )
  return warnings


def validate(spec: ProtocolSpec) -> list[Diagnostic]:
  """Re-checks all invariants and adds warnings. Never raises."""
  return collect_errors(spec) + collect_warnings(spec)


def ensure_valid(spec: ProtocolSpec, spans: SpanIndex | None = None) -> None:
  """Raises the first structural problem as its error class."""
  for diagnostic in collect_errors(spec, spans):
    error_class = getattr(errors, diagnostic.code)
    raise error_class(diagnostic.message, span=diagnostic.span)
