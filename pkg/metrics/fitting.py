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

"""Module with least-squares scaling fits.

`fit_exponent` fits log(value) against log(n): a power law n^a has slope a.
`fit_polylog` fits log(value) against log(log(n)): a polylog (ln n)^b has
slope b.
"""

from __future__ import annotations

import math
from collections.abc import Iterable
from dataclasses import dataclass

import numpy

from errors import InsufficientData

MIN_SIZES = 3


@dataclass(frozen=True)
class FitResult:
  """Slope, intercept and root mean square residual of a linear fit."""

  slope: float
  intercept: float
  residual: float
  sizes: int
  points: int


def _checked(
    points: Iterable[tuple[float, float]],
) -> list[tuple[float, float]]:
  points = list(points)
  sizes = {n for n, _ in points}
  if len(sizes) < MIN_SIZES:
    raise InsufficientData(
        f"a fit needs at least {MIN_SIZES} distinct sizes, got {len(sizes)}"
    )
  for n, value in points:
    if value <= 0 or not math.isfinite(value):
      raise InsufficientData(f"value {value} at n={n} is not positive")
  return points


def _fit(xs: list[float], ys: list[float], sizes: int) -> FitResult:
  x = numpy.asarray(xs, dtype=float)
  y = numpy.asarray(ys, dtype=float)
  slope, intercept = numpy.polyfit(x, y, 1)
  predicted = numpy.polyval((slope, intercept), x)
  residual = float(numpy.sqrt(numpy.mean((y - predicted) ** 2)))
  return FitResult(
      slope=float(slope),
      intercept=float(intercept),
      residual=residual,
      sizes=sizes,
      points=len(xs),
  )


def fit_exponent(points: Iterable[tuple[float, float]]) -> FitResult:
  """Fits log value = slope·log n + intercept.

  Args:
    points: (n, value) pairs; several values per n are allowed.
  Returns:
    the fit.
  Raises:
    InsufficientData: fewer than 3 distinct n or a nonpositive value.
  """
  points = _checked(points)
  return _fit(
      [math.log(n) for n, _ in points],
      [math.log(value) for _, value in points],
      len({n for n, _ in points}),
  )


def fit_polylog(points: Iterable[tuple[float, float]]) -> FitResult:
  """Fits log value = slope·log log n + intercept. Needs every n > e."""
  points = _checked(points)
  for n, _ in points:
    if n <= math.e:
      raise InsufficientData(f"log log n is not positive at n={n}")
  return _fit(
      [math.log(math.log(n)) for n, _ in points],
      [math.log(value) for _, value in points],
      len({n for n, _ in points}),
  )
