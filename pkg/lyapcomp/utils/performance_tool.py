#  Copyright 2026 The lyapcomp Authors
#
#  Licensed under the Apache License, Version 2.0 (the "License");
#  you may not use this file except in compliance with the License.
#  You may obtain a copy of the License at
#
#       http://www.apache.org/licenses/LICENSE-2.0
#
#  Unless required by applicable law or agreed to in writing, software
#  distributed under the License is distributed on an "AS IS" BASIS,
#  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#  See the License for the specific language governing permissions and
#  limitations under the License.

"""Timing helpers for solver runs."""

import datetime
import time

from typing_extensions import Self


class Stopwatch:
  """A stopwatch on the monotonic clock, used as a context manager."""

  start_time: float
  end_time: float | None = None

  def __init__(self) -> None:
    self.start_time = time.monotonic()

  def __enter__(self) -> Self:
    self.start_time = time.monotonic()
    return self

  def __exit__(self, exc_type, exc_value, traceback):
    self.end_time = time.monotonic()

  @property
  def elapsed_time(self) -> datetime.timedelta:
    end = self.end_time if self.end_time is not None else time.monotonic()
    return datetime.timedelta(seconds=end - self.start_time)

  @property
  def elapsed_seconds(self) -> float:
    return self.elapsed_time.total_seconds()
