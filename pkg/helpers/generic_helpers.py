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

"""Module to load generic helper functions"""

from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from typing import Any, TextIO
import sys

from engine.rng import MASK_64, splitmix64


def mix_seed(base_seed: int, n: int, trial: int) -> int:
  """Seed of trial `trial` at size `n`.

  seed = base_seed XOR splitmix64(splitmix64(n) XOR trial), on 64 bits.
  """
  return (base_seed ^ splitmix64(splitmix64(n) ^ trial)) & MASK_64


def execute_tasks_in_parallel(
    function: Callable[[Any], Any], tasks: Sequence[Any], workers: int = 1
) -> list[Any]:
  """Applies `function` to every task, in a process pool when workers > 1.

  Results come back in task order, whatever order the workers finish in.
  `function` and the tasks must be picklable.
  """
  if workers <= 1 or len(tasks) <= 1:
    return [function(task) for task in tasks]
  results = []
  with ProcessPoolExecutor(max_workers=workers) as executor:
    running_tasks = [executor.submit(function, task) for task in tasks]
    for running_task in running_tasks:
      results.append(running_task.result())
  return results


def print_checks(
    title: str,
    checks: Iterable[tuple[str, bool]],
    stream: TextIO | None = None,
) -> None:
  """Prints one ✅ / ❌ line per (name, passed) pair."""
  stream = stream or sys.stdout
  print(f"***** {title} ***** \n", file=stream)
  for name, passed in checks:
    if passed:
      print(f" * ✅ {name}", file=stream)
    else:
      print(f" * ❌ {name}", file=stream)
  print("", file=stream)


def print_error(message: str) -> None:
  print(f"ERROR: {message}", file=sys.stderr)
