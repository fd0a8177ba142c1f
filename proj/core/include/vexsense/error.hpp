// Copyright 2026 The vexsense Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <stdexcept>
#include <string>

namespace vexsense {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configuration or physical parameter violates its documented range.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// Input data (traces, datasets, records) is malformed or inconsistent.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// An operation was attempted in a state that does not permit it.
class StateError : public Error {
 public:
  using Error::Error;
};

/// Training could not produce a model (single class, empty data).
class TrainingError : public Error {
 public:
  using Error::Error;
};

/// The SMO solver hit its iteration limit before meeting the KKT tolerance.
class ConvergenceError : public TrainingError {
 public:
  ConvergenceError(const std::string& what, std::size_t iterations, double gap)
      : TrainingError(what), iterations_(iterations), gap_(gap) {}

  std::size_t iterations() const noexcept { return iterations_; }
  double gap() const noexcept { return gap_; }

 private:
  std::size_t iterations_;
  double gap_;
};

/// A persisted session log cannot be replayed against the supplied model.
class ReplayError : public Error {
 public:
  using Error::Error;
};

/// A wire-level request is not valid for the session's current protocol step.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// A referenced entity (session, model) does not exist.
class NotFound : public Error {
 public:
  using Error::Error;
};

}  // namespace vexsense
