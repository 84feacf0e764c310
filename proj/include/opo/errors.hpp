// Copyright 2026 The opokit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef OPO_ERRORS_HPP
#define OPO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace opo {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter violates a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A configuration or data file could not be read or parsed.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The requested physical regime is not modeled (unstable cavity,
/// above-threshold pump, data inconsistent with the model).
class PhysicsError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed: no root in bracket, non-convergence,
/// unidentifiable parameters.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace opo

#endif  // OPO_ERRORS_HPP
