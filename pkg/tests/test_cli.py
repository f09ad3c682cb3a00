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

""" Module to test the command line """

import pytest

import protocols.protocol_modules as protocol_module
from cli.csv_rows import CSV_HEADER, csv_text, read_trial_rows, rows_for
from cli.trials import TrialOutcome, make_tasks, run_trials
from engine.types import RunResult
from main import main
from rules_dsl.printer import pretty_print


def outcome_with(result: RunResult) -> TrialOutcome:
  return TrialOutcome(
      protocol="le", model="selective", n=8, seed=11, trial=0, result=result
  )


def test_trial_and_extra_rows():
  """Extras and diagnostics repeat the trial columns"""
  result = RunResult(
      stabilized=False, interactions=40, final_counts={"L": 8},
      diagnostics=["NotStabilized"], chunks=3, fragmented_time=6.2,
      parallel_time=5.0, correct=False, extras=[("rounds", 2), ("ok", True)],
  )
  rows = rows_for(outcome_with(result))
  assert len(rows) == 4
  assert rows[0]["stabilized"] == "false"
  assert rows[0]["extra_key"] == ""
  assert rows[1]["extra_key"] == "rounds"
  assert rows[1]["extra_value"] == 2
  assert rows[2]["extra_value"] == "true"
  assert rows[3]["extra_key"] == "diagnostic"
  assert rows[3]["extra_value"] == "NotStabilized"
  assert all(row["interactions"] == 40 for row in rows)


def test_csv_header_and_booleans():
  """The header comes first and flags are lowercase words"""
  result = RunResult(
      stabilized=True, interactions=10, final_counts={}, correct=True
  )
  lines = csv_text([outcome_with(result)]).split("\n")
  assert lines[0] == ",".join(CSV_HEADER)
  assert lines[1].startswith("le,selective,8,11,0,10,0,")
  assert lines[1].endswith(",true,true,,")
  assert lines[2] == ""


def test_csv_is_deterministic():
  """Same tasks, same bytes"""
  tasks = make_tasks("majority", [9, 17], 2, 3)
  assert csv_text(run_trials(tasks)) == csv_text(run_trials(tasks))


def test_simulate_writes_csv(tmp_path, capsys):
  """simulate writes one trial row per (n, trial)"""
  out = tmp_path / "le.csv"
  code = main([
      "simulate", "-p", "le", "--n-grid", "10,20", "-t", "3", "-s", "7",
      "-o", str(out),
  ])
  assert code == 0
  rows = read_trial_rows(str(out))
  assert list(rows["n"]) == [10, 10, 10, 20, 20, 20]
  assert list(rows["trial"]) == [0, 1, 2, 0, 1, 2]
  assert {str(value).lower() for value in rows["correct"]} == {"true"}
  assert "n=20: 3/3 correct" in capsys.readouterr().out


def test_simulate_to_standard_output(capsys):
  """With --out - the CSV takes stdout and the report goes to stderr"""
  code = main(["simulate", "-p", "epidemic", "--n", "16", "-q"])
  captured = capsys.readouterr()
  assert code == 0
  assert captured.out.startswith(",".join(CSV_HEADER) + "\n")
  assert "Simulation of epidemic" in captured.err


def test_failed_trials_exit_with_one(tmp_path):
  """A stalled multiplication is reported, not raised"""
  out = tmp_path / "mult.csv"
  code = main([
      "simulate", "-p", "mult-slow", "--n", "8", "--param", "free=2",
      "-o", str(out), "-q",
  ])
  assert code == 1
  text = out.read_text(encoding="utf-8")
  assert "diagnostic,FreePoolExhausted" in text


def test_errors_exit_with_two(capsys):
  """Configuration and protocol errors print one line and exit with 2"""
  assert main(["simulate", "-p", "le", "--n", "0", "-q"]) == 2
  assert "ERROR: EmptyPopulation:" in capsys.readouterr().err
  assert main(["simulate", "-p", "le", "--n", "10", "--param", "x=1"]) == 2
  assert "ERROR: ConfigurationError:" in capsys.readouterr().err
  assert main(["scale", "-p", "le", "--n-grid", "10,20", "-q"]) == 2
  assert "ERROR: InsufficientData:" in capsys.readouterr().err


def test_parse_check(tmp_path, capsys):
  """Valid files are printed back in canonical form"""
  path = tmp_path / "majority.proto"
  text = pretty_print(protocol_module.majority_table())
  path.write_text(text, encoding="utf-8")
  assert main(["parse-check", str(path), "-q"]) == 0
  assert capsys.readouterr().out == text


def test_parse_check_diagnostics(tmp_path, capsys):
  """Invalid files get located diagnostics and exit code 2"""
  path = tmp_path / "broken.proto"
  path.write_text(
      "protocol broken\nstates 0, 1\nmodel sideways\n", encoding="utf-8"
  )
  assert main(["parse-check", str(path), "-q"]) == 2
  lines = capsys.readouterr().err.strip().split("\n")
  assert len(lines) == 2
  assert lines[0].startswith(f"{path}:2:1: error: ProtocolSyntaxError:")
  assert lines[1].startswith(f"{path}:3:")


def test_parse_check_missing_file(tmp_path, capsys):
  """An unreadable file is a configuration error"""
  assert main(["parse-check", str(tmp_path / "none.proto"), "-q"]) == 2
  assert "ConfigurationError" in capsys.readouterr().err


def test_files_that_are_not_utf8(tmp_path, capsys):
  """Undecodable protocol files end with exit code 2, not a traceback"""
  path = tmp_path / "bad.proto"
  path.write_bytes(b"protocol bad\n\xff\n")
  assert main(["parse-check", str(path), "-q"]) == 2
  assert "ERROR: ConfigurationError:" in capsys.readouterr().err
  assert main(["simulate", "-f", str(path), "--n", "10", "-q"]) == 2
  assert "ERROR: ConfigurationError:" in capsys.readouterr().err


@pytest.mark.parametrize("criterion", ["Protocol text", "Chunk minimality"])
def test_verify_single_criterion(criterion, capsys):
  """verify runs only the named criteria"""
  assert main(["verify", "--criterion", criterion, "-q"]) == 0
  out = capsys.readouterr().out
  assert f" * ✅ {criterion}:" in out
  assert "1/1 criteria passed" in out
