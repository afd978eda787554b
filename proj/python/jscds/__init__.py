# Copyright 2026 The jscds Authors.
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
#
# SPDX-License-Identifier: Apache-2.0
"""Core-set selection with Jensen-Shannon scoring, baselines and a small trainer."""

from ._jscds import (
    ConfigError,
    Dataset,
    Error,
    Model,
    NumericError,
    ParseError,
    ShapeError,
    ValidationError,
    benchmark,
    core_set_size,
    generate_synthetic,
    jsd,
    kl,
    metrics,
    select,
    softmax,
    split,
    train,
)

__all__ = [
    "ConfigError",
    "Dataset",
    "Error",
    "Model",
    "NumericError",
    "ParseError",
    "ShapeError",
    "ValidationError",
    "benchmark",
    "core_set_size",
    "generate_synthetic",
    "jsd",
    "kl",
    "metrics",
    "select",
    "softmax",
    "split",
    "train",
]
