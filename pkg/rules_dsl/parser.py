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

"""Module to parse `.pp` protocol text.

The format is line oriented:

  protocol epidemic
  model selective
  states: 0, 1, Stop
  group G0 = {0}
  group G1 = {1, Stop}
  target 1 -> G0
  1 + G0|0 -> 1 + 1
  1 + G0|null -> Stop

Standard protocols write rules without a group clause (`1 + 0 -> 1 + 1`) and
declare `model standard comparison` when their rules carry `[<]` or `[>]`
guards. `#` starts a comment. Every problem is reported with its line and
column.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import errors
from engine.types import Guard, Model
from rules_dsl.protocol_spec import NULL, ProtocolSpec, Rule
from rules_dsl.source_span import Diagnostic, SourceSpan
from rules_dsl.validation import collect_errors

TOKEN_PATTERN = re.compile(
    r"(?P<space>\s+)"
    r"|(?P<arrow>->)"
    r"|(?P<ident>[A-Za-z0-9_](?:[A-Za-z0-9_*'.^~]|-(?!>))*)"
    r"|(?P<punct>[+|\[\]<>{},:=])"
)
MODELS = {"standard": Model.STANDARD, "selective": Model.SELECTIVE}


@dataclass(frozen=True)
class Token:
  kind: str
  text: str
  span: SourceSpan


class _LineSyntaxError(Exception):
  """Carries one diagnostic out of the line parser."""

  def __init__(self, message: str, span: SourceSpan):
    super().__init__(message)
    self.diagnostic = Diagnostic("ProtocolSyntaxError", message, span=span)


def tokenize(
    line: str, line_number: int, line_offset: int
) -> tuple[list[Token], SourceSpan]:
  """Splits one comment-free line into tokens.

  Returns:
    the tokens and a zero width span at the end of the line.
  """
  tokens = []
  position = 0
  while position < len(line):
    match = TOKEN_PATTERN.match(line, position)
    if match is None:
      raise _LineSyntaxError(
          f"unexpected character {line[position]!r}",
          SourceSpan.of_line(
              line_number, line_offset, line, position, position + 1
          ),
      )
    kind = match.lastgroup
    if kind != "space":
      text = match.group()
      if kind == "punct":
        kind = text
      tokens.append(
          Token(
              kind,
              text,
              SourceSpan.of_line(
                  line_number, line_offset, line, match.start(), match.end()
              ),
          )
      )
    position = match.end()
  end = SourceSpan.of_line(
      line_number, line_offset, line, len(line), len(line)
  )
  return tokens, end


class _TokenCursor:
  """Walks the tokens of one line."""

  def __init__(self, tokens: list[Token], end: SourceSpan):
    self._tokens = tokens
    self._end = end
    self._index = 0

  def peek(self, offset: int = 0) -> Token | None:
    index = self._index + offset
    return self._tokens[index] if index < len(self._tokens) else None

  def expect(self, kind: str, what: str | None = None) -> Token:
    token = self.peek()
    if token is None:
      raise _LineSyntaxError(
          f"expected {what or kind}; reached end of line", self._end
      )
    if token.kind != kind:
      raise _LineSyntaxError(
          f"expected {what or kind}; received {token.text!r}", token.span
      )
    self._index += 1
    return token

  def accept(self, kind: str) -> Token | None:
    token = self.peek()
    if token is not None and token.kind == kind:
      self._index += 1
      return token
    return None

  def last(self) -> Token:
    return self._tokens[self._index - 1]

  def expect_end(self) -> None:
    token = self.peek()
    if token is not None:
      raise _LineSyntaxError(f"unexpected {token.text!r}", token.span)

  def identifier_list(self, closing: str | None) -> list[Token]:
    """Parses `a, b, c`, stopping before `closing` or the end of line."""
    items = []
    token = self.peek()
    if token is None or token.kind == closing:
      return items
    items.append(self.expect("ident", "a state name"))
    while self.accept(","):
      items.append(self.expect("ident", "a state name"))
    return items


class _ProtocolReader:
  """Accumulates declarations line by line."""

  def __init__(self):
    self.name: Token | None = None
    self.model: Model | None = None
    self.comparison = False
    self.states: list[str] = []
    self.groups: list[tuple[str, tuple[str, ...]]] = []
    self.targets: dict[str, str] = {}
    self.rules: list[Rule] = []
    self.spans: dict[tuple[str, str], SourceSpan] = {}

  def read_line(self, cursor: _TokenCursor) -> None:
    first = cursor.peek()
    second = cursor.peek(1)
    if first.kind != "ident":
      raise _LineSyntaxError(
          f"expected a declaration or a rule; received {first.text!r}",
          first.span,
      )
    if second is not None and second.kind == "+":
      self._read_rule(cursor)
    elif first.text == "protocol":
      self._read_protocol(cursor)
    elif first.text == "model":
      self._read_model(cursor)
    elif first.text == "states" and second is not None and second.kind == ":":
      self._read_states(cursor)
    elif first.text == "group":
      self._read_group(cursor)
    elif first.text == "target":
      self._read_target(cursor)
    else:
      raise _LineSyntaxError(
          f"unknown declaration {first.text!r}", first.span
      )

  def _read_protocol(self, cursor: _TokenCursor) -> None:
    keyword = cursor.expect("ident")
    if self.name is not None:
      raise _LineSyntaxError("protocol name declared twice", keyword.span)
    self.name = cursor.expect("ident", "a protocol name")
    cursor.expect_end()

  def _read_model(self, cursor: _TokenCursor) -> None:
    keyword = cursor.expect("ident")
    if self.model is not None:
      raise _LineSyntaxError("model declared twice", keyword.span)
    token = cursor.expect("ident", "standard or selective")
    if token.text not in MODELS:
      raise _LineSyntaxError(
          f"expected standard or selective; received {token.text!r}",
          token.span,
      )
    self.model = MODELS[token.text]
    flag = cursor.accept("ident")
    if flag is not None:
      if flag.text != "comparison":
        raise _LineSyntaxError(
            f"expected comparison; received {flag.text!r}", flag.span
        )
      self.comparison = True
    cursor.expect_end()

  def _read_states(self, cursor: _TokenCursor) -> None:
    cursor.expect("ident")
    cursor.expect(":")
    for token in cursor.identifier_list(None):
      self.states.append(token.text)
      self.spans[("state", token.text)] = token.span
    cursor.expect_end()

  def _read_group(self, cursor: _TokenCursor) -> None:
    cursor.expect("ident")
    name = cursor.expect("ident", "a group name")
    cursor.expect("=")
    cursor.expect("{")
    members = cursor.identifier_list("}")
    cursor.expect("}")
    cursor.expect_end()
    self.groups.append((name.text, tuple(token.text for token in members)))
    self.spans[("group", name.text)] = name.span

  def _read_target(self, cursor: _TokenCursor) -> None:
    cursor.expect("ident")
    state = cursor.expect("ident", "a state name")
    cursor.expect("arrow", "->")
    group = cursor.expect("ident", "a group name")
    cursor.expect_end()
    if state.text in self.targets:
      raise _LineSyntaxError(f"target of {state.text} given twice", state.span)
    self.targets[state.text] = group.text
    self.spans[("target", state.text)] = state.span

  def _read_guard(self, cursor: _TokenCursor) -> Guard:
    if cursor.accept("[") is None:
      return Guard.NONE
    token = cursor.peek()
    if token is not None and token.kind in ("<", ">"):
      cursor.expect(token.kind)
      cursor.expect("]")
      return Guard(token.kind)
    cursor.expect("<", "< or >")
    return Guard.NONE

  def _read_rule(self, cursor: _TokenCursor) -> None:
    initiator = cursor.expect("ident", "an initiator state")
    cursor.expect("+")
    second = cursor.expect("ident", "a group or responder state")
    group = None
    responder: str | None = second.text
    if cursor.accept("|"):
      group = second.text
      responder = cursor.expect("ident", "a responder state or null").text
      if responder == NULL:
        responder = None
    guard = self._read_guard(cursor)
    cursor.expect("arrow", "->")
    initiator_out = cursor.expect("ident", "an initiator output state").text
    responder_out = None
    plus = cursor.accept("+")
    if responder is None and plus is not None:
      raise _LineSyntaxError(
          "a null rule rewrites the initiator only", plus.span
      )
    if responder is not None:
      if plus is None:
        cursor.expect("+")
      responder_out = cursor.expect("ident", "a responder output state").text
    cursor.expect_end()
    span = SourceSpan(
        line=initiator.span.line,
        column=initiator.span.column,
        start=initiator.span.start,
        end=cursor.last().span.end,
    )
    self.rules.append(
        Rule(
            initiator.text,
            responder,
            initiator_out,
            responder_out,
            group=group,
            guard=guard,
            span=span,
        )
    )

  def build(self, text_end: SourceSpan) -> tuple[ProtocolSpec | None,
                                                 list[Diagnostic]]:
    if self.name is None:
      return None, [
          Diagnostic(
              "ProtocolSyntaxError",
              "missing `protocol <name>` declaration",
              span=text_end,
          )
      ]
    if self.model is None:
      return None, [
          Diagnostic(
              "ProtocolSyntaxError",
              "missing `model standard|selective` declaration",
              span=self.name.span,
          )
      ]
    if self.model is Model.STANDARD:
      guarded = [rule for rule in self.rules if rule.guard is not Guard.NONE]
      if guarded and not self.comparison:
        return None, [
            Diagnostic(
                "GuardInStandardModel",
                "guarded rule in a standard protocol; declare `model standard"
                " comparison`",
                span=guarded[0].span,
            )
        ]
      groups = (("all", tuple(self.states)),)
      targets = ()
    else:
      groups = tuple(self.groups)
      ordered = [state for state in self.states if state in self.targets]
      ordered += [state for state in self.targets if state not in ordered]
      targets = tuple((state, self.targets[state]) for state in ordered)
    spec = ProtocolSpec(
        name=self.name.text,
        model=self.model,
        states=tuple(self.states),
        groups=groups,
        targets=targets,
        rules=tuple(self.rules),
    )
    diagnostics = collect_errors(spec, self.spans)
    if diagnostics:
      return None, diagnostics
    return spec, []


def parse_protocol_with_diagnostics(
    text: str,
) -> tuple[ProtocolSpec | None, list[Diagnostic]]:
  """Parses protocol text, collecting every problem instead of raising.

  Args:
    text: the protocol text.
  Returns:
    the spec (None when anything is wrong) and the list of diagnostics.
  """
  reader = _ProtocolReader()
  diagnostics: list[Diagnostic] = []
  offset = 0
  lines = text.split("\n")
  for number, raw_line in enumerate(lines, start=1):
    line = raw_line.split("#", 1)[0]
    try:
      tokens, end = tokenize(line, number, offset)
      if tokens:
        reader.read_line(_TokenCursor(tokens, end))
    except _LineSyntaxError as error:
      diagnostics.append(error.diagnostic)
    offset += len(raw_line.encode("utf-8")) + 1
  if diagnostics:
    return None, diagnostics
  last = lines[-1]
  text_end = SourceSpan.of_line(
      len(lines), offset - len(last.encode("utf-8")) - 1, last, len(last),
      len(last),
  )
  return reader.build(text_end)


def parse_protocol(text: str) -> ProtocolSpec:
  """Parses and validates protocol text.

  Raises:
    ProtocolDefinitionError: the first problem found, with its span.
  """
  spec, diagnostics = parse_protocol_with_diagnostics(text)
  if spec is None:
    first = diagnostics[0]
    raise getattr(errors, first.code)(first.message, span=first.span)
  return spec
