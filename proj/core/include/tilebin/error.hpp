/*
 * Copyright 2026 The tilebin Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace tilebin {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

/// Malformed blob, image, manifest or protocol message.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A merge was requested with tile maps missing for part of the plan.
class IncompleteInput : public Error {
 public:
  using Error::Error;
};

/// Metric has no meaningful value for the given input (e.g. no positives).
class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

/// A pipeline stage was invoked before its inputs exist, or inputs were
/// modified after the upstream stage recorded them.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace tilebin
