# Copyright 2026 The fewshot Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Few-shot test-scenario selection for crash-rate evaluation."""

from ._core import (
    INF,
    ConfigError,
    Project,
    RuntimeFailure,
    halton_2d,
    idm_acceleration,
    summarize,
    trials_csv,
)

__all__ = [
    "INF",
    "ConfigError",
    "Project",
    "RuntimeFailure",
    "halton_2d",
    "idm_acceleration",
    "summarize",
    "trials_csv",
]
