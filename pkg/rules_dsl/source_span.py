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

"""Module with source locations and diagnostics of protocol text."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SourceSpan:
  """A region of protocol text.

  Attributes:
    line: 1-based line number.
    column: 1-based column of the first character.
    start: UTF-8 byte offset of the first character.
    end: UTF-8 byte offset one past the last character.
  """

  line: int
  column: int
  start: int
  end: int

  @classmethod
  def of_line(
      cls, line_number: int, line_offset: int, line: str, begin: int, stop: int
  ) -> SourceSpan:
    """Builds a span from character positions inside one line.

    Args:
      line_number: 1-based line number.
      line_offset: byte offset of the line start in the whole text.
      line: the line text.
      begin: first character index inside the line.
      stop: character index one past the end inside the line.
    Returns:
      the span with byte offsets into the whole text.
    """
    start = line_offset + len(line[:begin].encode("utf-8"))
    end = line_offset + len(line[:stop].encode("utf-8"))
    return cls(line=line_number, column=begin + 1, start=start, end=end)

  def __str__(self) -> str:
    return f"{self.line}:{self.column}"


@dataclass(frozen=True)
class Diagnostic:
  """A problem found in a protocol description."""

  code: str
  message: str
  severity: str = "error"
  span: SourceSpan | None = None

  @property
  def is_error(self) -> bool:
    return self.severity == "error"

  def describe(self) -> str:
    location = f"{self.span}: " if self.span is not None else ""
    return f"{location}{self.severity}: {self.code}: {self.message}"
